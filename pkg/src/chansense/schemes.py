"""Closed-form performance of the three sensing schemes and the
per-sample decision rules that the Monte-Carlo harness drives.

The three detectors share the Gaussian observation model
Y_i = M*sqrt(P) + Z_i with Z_i ~ N(0, sigma_r^2) and differ in how
they spend samples:

* single-phase: one LLR test over all n samples at constant power,
* BMAC: per-sample thresholding, stops at the first sample <= eta,
* two-phase adaptive ("AdaSense"): a cheap tentative LLR test on l1
  samples, then, only if it fires, a high-power confirmation test on
  l2 fresh samples.

Probabilities are computed in log domain internally; the products of
small Gaussian tails at the operating points of interest underflow in
linear arithmetic.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .core import (
    DomainError,
    NoiseProfile,
    ScenarioParams,
    log_q_function,
    q_function,
)


class Hypothesis(enum.Enum):
    H0 = 0
    H1 = 1


@dataclass(frozen=True)
class SinglePhaseConfig:
    """Fixed-sample LLR detector: n samples at power P_r, threshold eta
    in the LLR domain."""

    n: int
    receiver_power_watts: float
    threshold: float

    def __post_init__(self) -> None:
        if not (self.n >= 1):
            raise DomainError(f"n must be >= 1, got {self.n!r}")
        if not (self.receiver_power_watts > 0.0):
            raise DomainError("receiver power must be positive")


@dataclass(frozen=True)
class BmacConfig:
    """Sequential per-sample detector: declares H0 at the first sample
    <= eta (sample-amplitude domain), H1 if all n samples exceed it."""

    n: int
    receiver_power_watts: float
    threshold: float

    def __post_init__(self) -> None:
        if not (self.n >= 1):
            raise DomainError(f"n must be >= 1, got {self.n!r}")
        if not (self.receiver_power_watts > 0.0):
            raise DomainError("receiver power must be positive")


@dataclass(frozen=True)
class AdaSenseConfig:
    """Two-phase adaptive detector.

    Phase 1: l1 samples at power p_r1, LLR test against eta1.
    Phase 2 (only on a tentative H1): l2 fresh samples at p_r2, LLR
    test against eta2.
    """

    l1: int
    l2: int
    p_r1: float
    p_r2: float
    eta1: float
    eta2: float

    def __post_init__(self) -> None:
        if not (self.l1 >= 1 and self.l2 >= 1):
            raise DomainError(f"phase lengths must be >= 1, got {self.l1}, {self.l2}")
        if not (self.p_r1 > 0.0 and self.p_r2 > 0.0):
            raise DomainError("phase powers must be positive")


SchemeConfig = SinglePhaseConfig | BmacConfig | AdaSenseConfig


@dataclass(frozen=True)
class PerfReport:
    """Exact performance of one detector configuration.

    ``energy`` is in Watt-samples (unit symbol duration). ``log_p_fa``
    and ``log_p_miss`` carry the log-domain values so deep-tail
    operating points survive; ``p_fa``/``p_miss`` are their
    exponentials for reporting.
    """

    p_fa: float
    p_miss: float
    energy: float
    log_p_fa: float
    log_p_miss: float
    p_continue: float | None = None


@dataclass(frozen=True)
class Decision:
    decision: Hypothesis
    samples_consumed: int
    energy_spent: float


def _llr_args(length: int, power: float, sigma_sq: float, eta: float) -> tuple[float, float]:
    """Q-function arguments for one LLR phase.

    Returns (arg under H0, arg under H1) such that
    Pr(T > eta | H_j) = Q(arg_j). arg1 = arg0 - s with
    s = sqrt(length*P/sigma^2) the per-phase deflection.
    """
    s = math.sqrt(length * power / sigma_sq)
    arg0 = math.sqrt(sigma_sq) * eta / math.sqrt(length * power) + 0.5 * s
    return arg0, arg0 - s


def eval_single_phase(
    cfg: SinglePhaseConfig, scenario: ScenarioParams, profile: NoiseProfile
) -> PerfReport:
    """Exact P_FA, P_Miss, and energy of the fixed-sample LLR detector."""
    sigma_sq = profile.noise_variance(cfg.receiver_power_watts)
    arg0, arg1 = _llr_args(cfg.n, scenario.received_power_watts, sigma_sq, cfg.threshold)
    log_p_fa = log_q_function(arg0)
    # P_Miss = Pr(T <= eta | H1) = 1 - Q(arg1) = Q(-arg1)
    log_p_miss = log_q_function(-arg1)
    return PerfReport(
        p_fa=math.exp(log_p_fa),
        p_miss=math.exp(log_p_miss),
        energy=cfg.n * cfg.receiver_power_watts,
        log_p_fa=log_p_fa,
        log_p_miss=log_p_miss,
    )


def _geometric_sum(log_x: float, n: int) -> float:
    """Sum_{i=0}^{n-1} x**i for x = exp(log_x) in (0, 1].

    Stable near x = 1, where the closed ratio degenerates; the x -> 1
    limit is n.
    """
    if log_x == 0.0:
        return float(n)
    return math.expm1(n * log_x) / math.expm1(log_x)


def eval_bmac(
    cfg: BmacConfig, scenario: ScenarioParams, profile: NoiseProfile
) -> PerfReport:
    """Exact P_FA, P_Miss, and expected stopping energy of the
    sequential per-sample detector.

    P_FA = p^n and P_Miss = 1 - q^n with p = Q(eta/sigma) and
    q = Q((eta - sqrt(P))/sigma); the expected energy sums the
    truncated-geometric stopping law under both hypotheses.
    """
    sigma = math.sqrt(profile.noise_variance(cfg.receiver_power_watts))
    sqrt_p = math.sqrt(scenario.received_power_watts)
    log_p = log_q_function(cfg.threshold / sigma)
    log_q = log_q_function((cfg.threshold - sqrt_p) / sigma)

    log_p_fa = cfg.n * log_p
    p_miss = -math.expm1(cfg.n * log_q)
    log_p_miss = math.log(p_miss) if p_miss > 0.0 else -math.inf

    p1 = scenario.prior_p1
    energy = cfg.receiver_power_watts * (
        p1 * _geometric_sum(log_q, cfg.n) + (1.0 - p1) * _geometric_sum(log_p, cfg.n)
    )
    return PerfReport(
        p_fa=math.exp(log_p_fa),
        p_miss=p_miss,
        energy=energy,
        log_p_fa=log_p_fa,
        log_p_miss=log_p_miss,
    )


def eval_adasense(
    cfg: AdaSenseConfig, scenario: ScenarioParams, profile: NoiseProfile
) -> PerfReport:
    """Exact P_FA, P_Miss, energy, and continuation probability of the
    two-phase adaptive detector.

    The two phase statistics are independent (disjoint sample sets), so
    P_FA factorizes into the two H0 pass probabilities and P_Miss is
    first-phase miss plus pass-then-miss.
    """
    if cfg.l1 + cfg.l2 > scenario.preamble_len:
        raise DomainError(
            f"l1 + l2 = {cfg.l1 + cfg.l2} exceeds preamble length "
            f"{scenario.preamble_len}"
        )
    power = scenario.received_power_watts
    sig1_sq = profile.noise_variance(cfg.p_r1)
    sig2_sq = profile.noise_variance(cfg.p_r2)
    a10, a11 = _llr_args(cfg.l1, power, sig1_sq, cfg.eta1)
    a20, a21 = _llr_args(cfg.l2, power, sig2_sq, cfg.eta2)

    log_p_fa = log_q_function(a10) + log_q_function(a20)
    # miss = Q(-a11) + Q(a11) * Q(-a21)
    log_p_miss = _logaddexp(
        log_q_function(-a11), log_q_function(a11) + log_q_function(-a21)
    )
    p1 = scenario.prior_p1
    p_continue = (1.0 - p1) * q_function(a10) + p1 * q_function(a11)
    energy = cfg.l1 * cfg.p_r1 + p_continue * cfg.l2 * cfg.p_r2
    return PerfReport(
        p_fa=math.exp(log_p_fa),
        p_miss=math.exp(log_p_miss),
        energy=energy,
        log_p_fa=log_p_fa,
        log_p_miss=log_p_miss,
        p_continue=p_continue,
    )


def _logaddexp(a: float, b: float) -> float:
    if a < b:
        a, b = b, a
    if a == -math.inf:
        return a
    return a + math.log1p(math.exp(b - a))


def llr_statistic(samples: Sequence[float], power: float, sigma_sq: float) -> float:
    """Log-likelihood ratio of i.i.d. samples for mean 0 vs sqrt(P)."""
    m = len(samples)
    sqrt_p = math.sqrt(power)
    return sqrt_p / sigma_sq * math.fsum(samples) - m * power / (2.0 * sigma_sq)


def decide_single_phase(
    samples: Sequence[float],
    cfg: SinglePhaseConfig,
    scenario: ScenarioParams,
    profile: NoiseProfile,
) -> Decision:
    """Run the fixed-sample LLR test on exactly n samples."""
    if len(samples) != cfg.n:
        raise ValueError(f"expected exactly {cfg.n} samples, got {len(samples)}")
    sigma_sq = profile.noise_variance(cfg.receiver_power_watts)
    t = llr_statistic(samples, scenario.received_power_watts, sigma_sq)
    decision = Hypothesis.H1 if t > cfg.threshold else Hypothesis.H0
    return Decision(decision, cfg.n, cfg.n * cfg.receiver_power_watts)


def decide_bmac(samples: Iterable[float], cfg: BmacConfig) -> Decision:
    """Run the sequential test, drawing samples lazily.

    Stops at the first sample <= eta (H0) or after n samples all above
    it (H1). Raises if the source runs dry before a decision.
    """
    it: Iterator[float] = iter(samples)
    consumed = 0
    for _ in range(cfg.n):
        try:
            y = next(it)
        except StopIteration:
            raise ValueError(
                f"sample source exhausted after {consumed} of {cfg.n} samples"
            ) from None
        consumed += 1
        if y <= cfg.threshold:
            return Decision(Hypothesis.H0, consumed, consumed * cfg.receiver_power_watts)
    return Decision(Hypothesis.H1, cfg.n, cfg.n * cfg.receiver_power_watts)


def decide_adasense(
    samples: Iterable[float],
    cfg: AdaSenseConfig,
    scenario: ScenarioParams,
    profile: NoiseProfile,
) -> Decision:
    """Run the two-phase test.

    The sample source must deliver the first l1 samples at the phase-1
    noise level and, if the test continues, l2 more at the phase-2
    level; that contract lives with the generator.
    """
    it: Iterator[float] = iter(samples)
    phase1 = _take(it, cfg.l1, "phase 1")
    sig1_sq = profile.noise_variance(cfg.p_r1)
    t1 = llr_statistic(phase1, scenario.received_power_watts, sig1_sq)
    if t1 <= cfg.eta1:
        return Decision(Hypothesis.H0, cfg.l1, cfg.l1 * cfg.p_r1)
    phase2 = _take(it, cfg.l2, "phase 2")
    sig2_sq = profile.noise_variance(cfg.p_r2)
    t2 = llr_statistic(phase2, scenario.received_power_watts, sig2_sq)
    decision = Hypothesis.H1 if t2 > cfg.eta2 else Hypothesis.H0
    return Decision(
        decision, cfg.l1 + cfg.l2, cfg.l1 * cfg.p_r1 + cfg.l2 * cfg.p_r2
    )


def _take(it: Iterator[float], count: int, what: str) -> list[float]:
    out = []
    for _ in range(count):
        try:
            out.append(next(it))
        except StopIteration:
            raise ValueError(f"sample source exhausted during {what}") from None
    return out
