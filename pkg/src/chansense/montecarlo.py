"""Empirical oracle for the closed forms: simulate the per-sample
channel, run the actual decision rules, and estimate error rates,
energy, and the continuation probability with standard errors.

Randomness comes from counter-based Philox streams keyed by
(seed, hypothesis bank, chunk index), so estimates are bit-identical
for a given seed regardless of how chunks would be distributed across
workers. Trials are processed in fixed-size chunks with vectorized
decision kernels; the kernels are equivalence-tested against the
scalar decide_* rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import NoiseProfile, ScenarioParams
from .schemes import (
    AdaSenseConfig,
    BmacConfig,
    Hypothesis,
    SchemeConfig,
    SinglePhaseConfig,
)

_CHUNK = 1 << 14


@dataclass(frozen=True)
class McSettings:
    trials_per_hypothesis: int
    seed: int
    antithetic: bool = False

    def __post_init__(self) -> None:
        if self.trials_per_hypothesis < 1:
            raise ValueError("trials_per_hypothesis must be >= 1")


@dataclass(frozen=True)
class McEstimate:
    """Point estimates with standard errors from one simulation run.

    ``degenerate`` flags banks where every trial reached the same
    decision (the binomial SE is then 0 and uninformative).
    """

    p_fa_hat: float
    p_fa_se: float
    p_miss_hat: float
    p_miss_se: float
    energy_h0_hat: float
    energy_h0_se: float
    energy_h1_hat: float
    energy_h1_se: float
    mixed_energy_hat: float
    mixed_energy_se: float
    trials: int
    seed: int
    p_continue_hat: float | None = None
    p_continue_se: float | None = None
    degenerate: bool = False


def _stream(seed: int, bank: int, chunk: int) -> np.random.Generator:
    """Counter-based stream for one (hypothesis bank, chunk) cell."""
    key = (int(seed) & (2**64 - 1)) + ((bank + 1) << 64) + (chunk << 72)
    return np.random.Generator(np.random.Philox(key=key))


def generate_samples(
    hypothesis: Hypothesis,
    count: int,
    sigma_sq: float,
    received_power: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """I.i.d. channel observations: N(0, sigma^2) under H0,
    N(sqrt(P), sigma^2) under H1."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if not sigma_sq > 0.0:
        raise ValueError("sigma_sq must be positive")
    mean = math.sqrt(received_power) if hypothesis is Hypothesis.H1 else 0.0
    return rng.normal(mean, math.sqrt(sigma_sq), count)


def _normals(rng: np.random.Generator, rows: int, cols: int, antithetic: bool) -> np.ndarray:
    if not antithetic:
        return rng.standard_normal((rows, cols))
    half = (rows + 1) // 2
    z = rng.standard_normal((half, cols))
    return np.concatenate([z, -z])[:rows]


def _kernel_single_phase(
    z: np.ndarray, cfg: SinglePhaseConfig, scenario: ScenarioParams, profile: NoiseProfile, mean: float
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized fixed-sample LLR test. Returns (declared_h1, energy)."""
    sigma_sq = profile.noise_variance(cfg.receiver_power_watts)
    y = mean + math.sqrt(sigma_sq) * z
    power = scenario.received_power_watts
    t = math.sqrt(power) / sigma_sq * y.sum(axis=1) - cfg.n * power / (2.0 * sigma_sq)
    declared = t > cfg.threshold
    energy = np.full(z.shape[0], cfg.n * cfg.receiver_power_watts)
    return declared, energy


def _kernel_bmac(
    z: np.ndarray, cfg: BmacConfig, profile: NoiseProfile, mean: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized sequential test. Returns (declared_h1, energy, consumed)."""
    sigma = math.sqrt(profile.noise_variance(cfg.receiver_power_watts))
    y = mean + sigma * z
    below = y <= cfg.threshold
    stopped = below.any(axis=1)
    first = below.argmax(axis=1)
    consumed = np.where(stopped, first + 1, cfg.n)
    declared = ~stopped
    return declared, consumed * cfg.receiver_power_watts, consumed


def _kernel_adasense(
    z: np.ndarray, cfg: AdaSenseConfig, scenario: ScenarioParams, profile: NoiseProfile, mean_unit: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized two-phase test. ``mean_unit`` is 0 or sqrt(P); phase
    noise levels differ, so the two sample blocks are scaled
    separately. Returns (declared_h1, energy, continued)."""
    power = scenario.received_power_watts
    sig1_sq = profile.noise_variance(cfg.p_r1)
    sig2_sq = profile.noise_variance(cfg.p_r2)
    y1 = mean_unit + math.sqrt(sig1_sq) * z[:, : cfg.l1]
    y2 = mean_unit + math.sqrt(sig2_sq) * z[:, cfg.l1 :]
    sqrt_p = math.sqrt(power)
    t1 = sqrt_p / sig1_sq * y1.sum(axis=1) - cfg.l1 * power / (2.0 * sig1_sq)
    t2 = sqrt_p / sig2_sq * y2.sum(axis=1) - cfg.l2 * power / (2.0 * sig2_sq)
    continued = t1 > cfg.eta1
    declared = continued & (t2 > cfg.eta2)
    energy = cfg.l1 * cfg.p_r1 + continued * (cfg.l2 * cfg.p_r2)
    return declared, energy, continued


def _samples_per_trial(cfg: SchemeConfig) -> int:
    if isinstance(cfg, AdaSenseConfig):
        return cfg.l1 + cfg.l2
    return cfg.n


def _run_bank(
    cfg: SchemeConfig,
    scenario: ScenarioParams,
    profile: NoiseProfile,
    settings: McSettings,
    bank: int,
) -> dict[str, float]:
    """Simulate one hypothesis bank; returns accumulated statistics."""
    mean = math.sqrt(scenario.received_power_watts) if bank == 1 else 0.0
    cols = _samples_per_trial(cfg)
    total = settings.trials_per_hypothesis
    declared_sum = 0
    cont_sum = 0
    e_sum = 0.0
    e_sq_sum = 0.0
    done = 0
    chunk_idx = 0
    while done < total:
        rows = min(_CHUNK, total - done)
        rng = _stream(settings.seed, bank, chunk_idx)
        z = _normals(rng, rows, cols, settings.antithetic)
        if isinstance(cfg, SinglePhaseConfig):
            declared, energy = _kernel_single_phase(z, cfg, scenario, profile, mean)
        elif isinstance(cfg, BmacConfig):
            declared, energy, _ = _kernel_bmac(z, cfg, profile, mean)
        else:
            declared, energy, continued = _kernel_adasense(z, cfg, scenario, profile, mean)
            cont_sum += int(continued.sum())
        declared_sum += int(declared.sum())
        e_sum += float(energy.sum())
        e_sq_sum += float(np.square(energy).sum())
        done += rows
        chunk_idx += 1
    return {
        "declared_h1": declared_sum,
        "continued": cont_sum,
        "energy_sum": e_sum,
        "energy_sq_sum": e_sq_sum,
        "trials": total,
    }


def _binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def _mean_se(total: float, sq_total: float, n: int) -> tuple[float, float]:
    mean = total / n
    if n < 2:
        return mean, 0.0
    var = max(sq_total - n * mean * mean, 0.0) / (n - 1)
    return mean, math.sqrt(var / n)


def estimate(
    scheme_cfg: SchemeConfig,
    scenario: ScenarioParams,
    profile: NoiseProfile,
    settings: McSettings,
) -> McEstimate:
    """Simulate both hypothesis banks and assemble the estimate.

    Energy per trial sums the powers of the samples actually consumed;
    the prior-mixed energy combines the per-hypothesis means with the
    scenario prior.
    """
    h0 = _run_bank(scheme_cfg, scenario, profile, settings, bank=0)
    h1 = _run_bank(scheme_cfg, scenario, profile, settings, bank=1)
    n = settings.trials_per_hypothesis
    p_fa = h0["declared_h1"] / n
    p_miss = 1.0 - h1["declared_h1"] / n
    e0, e0_se = _mean_se(h0["energy_sum"], h0["energy_sq_sum"], n)
    e1, e1_se = _mean_se(h1["energy_sum"], h1["energy_sq_sum"], n)
    p1 = scenario.prior_p1
    mixed = p1 * e1 + (1.0 - p1) * e0
    mixed_se = math.hypot(p1 * e1_se, (1.0 - p1) * e0_se)
    degenerate = p_fa in (0.0, 1.0) or p_miss in (0.0, 1.0)
    p_c = p_c_se = None
    if isinstance(scheme_cfg, AdaSenseConfig):
        c0 = h0["continued"] / n
        c1 = h1["continued"] / n
        p_c = p1 * c1 + (1.0 - p1) * c0
        p_c_se = math.hypot(
            p1 * _binomial_se(c1, n), (1.0 - p1) * _binomial_se(c0, n)
        )
    return McEstimate(
        p_fa_hat=p_fa,
        p_fa_se=_binomial_se(p_fa, n),
        p_miss_hat=p_miss,
        p_miss_se=_binomial_se(p_miss, n),
        energy_h0_hat=e0,
        energy_h0_se=e0_se,
        energy_h1_hat=e1,
        energy_h1_se=e1_se,
        mixed_energy_hat=mixed,
        mixed_energy_se=mixed_se,
        trials=n,
        seed=settings.seed,
        p_continue_hat=p_c,
        p_continue_se=p_c_se,
        degenerate=degenerate,
    )


def bmac_stopping_histogram(
    cfg: BmacConfig,
    scenario: ScenarioParams,
    profile: NoiseProfile,
    settings: McSettings,
    hypothesis: Hypothesis = Hypothesis.H0,
) -> np.ndarray:
    """Histogram of samples consumed by the sequential test (length n,
    index i holds the count of trials that stopped after i+1 samples)."""
    mean = (
        math.sqrt(scenario.received_power_watts)
        if hypothesis is Hypothesis.H1
        else 0.0
    )
    bank = 0 if hypothesis is Hypothesis.H0 else 1
    counts = np.zeros(cfg.n, dtype=np.int64)
    total = settings.trials_per_hypothesis
    done = 0
    chunk_idx = 0
    while done < total:
        rows = min(_CHUNK, total - done)
        rng = _stream(settings.seed, bank, chunk_idx)
        z = _normals(rng, rows, cfg.n, settings.antithetic)
        _, _, consumed = _kernel_bmac(z, cfg, profile, mean)
        counts += np.bincount(consumed - 1, minlength=cfg.n)
        done += rows
        chunk_idx += 1
    return counts


def bmac_stopping_pmf(
    cfg: BmacConfig,
    scenario: ScenarioParams,
    profile: NoiseProfile,
    hypothesis: Hypothesis = Hypothesis.H0,
) -> np.ndarray:
    """Truncated-geometric stopping law Pr(N = i), i = 1..n."""
    sigma = math.sqrt(profile.noise_variance(cfg.receiver_power_watts))
    arg = cfg.threshold / sigma
    if hypothesis is Hypothesis.H1:
        arg = (cfg.threshold - math.sqrt(scenario.received_power_watts)) / sigma
    from .core import q_function

    p = q_function(arg)
    i = np.arange(1, cfg.n + 1)
    pmf = p ** (i - 1.0) * (1.0 - p)
    pmf[-1] = p ** (cfg.n - 1.0)
    return pmf
