"""Turn reliability targets into concrete detector configurations.

Single-phase and BMAC reduce to a one-dimensional root solve: bind the
false-alarm constraint through the threshold, then bisect the receiver
power until the miss constraint is met. The two-phase scheme needs the
full 6-variable constrained minimization; see :func:`optimize_adasense`.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from scipy import optimize as sp_optimize
from scipy import special as sp_special

from .core import (
    NoiseProfile,
    ReliabilityTarget,
    ScenarioParams,
    inverse_q,
    log_q_function,
)
from .schemes import (
    AdaSenseConfig,
    BmacConfig,
    PerfReport,
    SchemeConfig,
    SinglePhaseConfig,
    eval_adasense,
    eval_bmac,
    eval_single_phase,
)

# Receiver power search bracket: 1 pW (far below any practical operating
# point) up to 1 W (far above micro-Watt-class receivers).
PR_MIN = 1e-12
PR_MAX = 1.0

# A configuration is feasible if its constraints hold up to floating noise.
FEASIBILITY_REL_TOL = 1e-9

# Constraints are targeted with a small safety margin so that the exact
# re-evaluation of a solved configuration lands strictly inside the
# feasibility tolerance despite quantile round-trip error.
_TARGET_MARGIN = 1e-6

# Soft wall-time cap per optimize_adasense call; beyond it the local
# refinement degrades its multi-start count.
WALL_TIME_BUDGET_S = 60.0

SCHEME_ORDER = ("single_phase", "bmac", "adasense")


@dataclass(frozen=True)
class OptimizationResult:
    """A solved configuration plus its re-verified performance."""

    config: SchemeConfig | None
    report: PerfReport | None
    feasible: bool
    objective_energy: float
    diagnostics: dict[str, Any] = field(default_factory=dict)


def _result(
    config: SchemeConfig | None,
    report: PerfReport | None,
    target: ReliabilityTarget,
    t_start: float,
    *,
    starts_tried: int = 1,
    best_start_index: int = 0,
    extra: dict[str, Any] | None = None,
) -> OptimizationResult:
    feasible = report is not None and _is_feasible(report, target)
    diagnostics: dict[str, Any] = {
        "starts_tried": starts_tried,
        "best_start_index": best_start_index,
        "constraint_slack": (
            (target.alpha - report.p_fa, target.beta - report.p_miss)
            if report is not None
            else (math.nan, math.nan)
        ),
        "wall_time_seconds": time.perf_counter() - t_start,
    }
    if extra:
        diagnostics.update(extra)
    return OptimizationResult(
        config=config,
        report=report,
        feasible=feasible,
        objective_energy=report.energy if (report is not None and feasible) else math.inf,
        diagnostics=diagnostics,
    )


def _is_feasible(report: PerfReport, target: ReliabilityTarget) -> bool:
    return (
        report.p_fa <= target.alpha * (1.0 + FEASIBILITY_REL_TOL)
        and report.p_miss <= target.beta * (1.0 + FEASIBILITY_REL_TOL)
    )


def _bisect_min_power(miss_gap: Callable[[float], float]) -> float | None:
    """Smallest receiver power in [PR_MIN, PR_MAX] with miss_gap(P_r) <= 0.

    ``miss_gap`` must be decreasing in P_r. Returns None if even PR_MAX
    fails. The returned power is the feasible (upper) end of the final
    bisection bracket.
    """
    if miss_gap(PR_MAX) > 0.0:
        return None
    if miss_gap(PR_MIN) <= 0.0:
        return PR_MIN
    lo, hi = math.log(PR_MIN), math.log(PR_MAX)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if miss_gap(math.exp(mid)) > 0.0:
            lo = mid
        else:
            hi = mid
    return math.exp(hi)


def solve_single_phase(
    scenario: ScenarioParams, profile: NoiseProfile, target: ReliabilityTarget
) -> OptimizationResult:
    """Minimum-energy single-phase configuration meeting both targets.

    With n fixed, energy is n*P_r, so the optimum is the smallest P_r
    for which a threshold exists satisfying both constraints. Binding
    the false-alarm constraint leaves P_Miss = Q(s - Q^{-1}(alpha)) with
    s = sqrt(n*P/sigma^2), which is decreasing in P_r.
    """
    t0 = time.perf_counter()
    n = scenario.preamble_len
    power = scenario.received_power_watts
    alpha = target.alpha * (1.0 - _TARGET_MARGIN)
    qa = inverse_q(alpha)
    qb = inverse_q(target.beta * (1.0 - _TARGET_MARGIN))

    def miss_gap(p_r: float) -> float:
        s = math.sqrt(n * power / profile.noise_variance(p_r))
        return (qa + qb) - s

    p_r = _bisect_min_power(miss_gap)
    if p_r is None:
        return _result(None, None, target, t0, extra={"reason": "bracket exhausted"})
    sigma_sq = profile.noise_variance(p_r)
    s = math.sqrt(n * power / sigma_sq)
    eta = (qa - 0.5 * s) * math.sqrt(n * power) / math.sqrt(sigma_sq)
    cfg = SinglePhaseConfig(n=n, receiver_power_watts=p_r, threshold=eta)
    return _result(cfg, eval_single_phase(cfg, scenario, profile), target, t0)


def solve_bmac(
    scenario: ScenarioParams, profile: NoiseProfile, target: ReliabilityTarget
) -> OptimizationResult:
    """Minimum-power BMAC configuration meeting both targets.

    The false-alarm constraint fixes eta/sigma = Q^{-1}(alpha^{1/n}) at
    every power probe; the miss probability is then decreasing in P_r
    and the minimum power follows by bisection.
    """
    t0 = time.perf_counter()
    n = scenario.preamble_len
    sqrt_p = math.sqrt(scenario.received_power_watts)
    alpha = target.alpha * (1.0 - _TARGET_MARGIN)
    beta = target.beta * (1.0 - _TARGET_MARGIN)
    # eta/sigma for the per-sample test; alpha^(1/n) computed in log space.
    eta_over_sigma = inverse_q(math.exp(math.log(alpha) / n))

    def miss_gap(p_r: float) -> float:
        sigma = math.sqrt(profile.noise_variance(p_r))
        log_q = log_q_function(eta_over_sigma - sqrt_p / sigma)
        p_miss = -math.expm1(n * log_q)
        return p_miss - beta

    p_r = _bisect_min_power(miss_gap)
    if p_r is None:
        return _result(None, None, target, t0, extra={"reason": "bracket exhausted"})
    sigma = math.sqrt(profile.noise_variance(p_r))
    cfg = BmacConfig(n=n, receiver_power_watts=p_r, threshold=eta_over_sigma * sigma)
    return _result(cfg, eval_bmac(cfg, scenario, profile), target, t0)


# ---------------------------------------------------------------------------
# Two-phase optimization.
#
# For a fixed phase-length pair (l1, l2) the remaining 4 variables reduce
# to 2. Both constraints bind at an interior optimum: raising the phase-2
# pass probability (toward the false-alarm budget) or either per-phase
# miss allocation strictly lowers the required deflection s_i, hence the
# phase power, hence the energy. Writing q_i = Pr(T_i > eta_i | H0) and
# m_i for the per-phase miss contributions, binding gives
#   q1 * q2 = alpha,     m1 + (1 - m1) * m2 = beta,
# and each phase power follows in closed form from
#   s_i = Q^{-1}(q_i) + Q^{-1}(m_i),  sigma_i^2 = l_i * P / s_i^2.
# The search runs over the false-alarm split exponent u (q1 = alpha^u)
# and the miss split fraction (m1 = beta * v), both mapped from the real
# line through a logistic, so the inner problem is smooth and unbounded.
# ---------------------------------------------------------------------------


def _expit(x: np.ndarray | float) -> np.ndarray | float:
    return sp_special.expit(x)


def _inner_energy_grid(
    l1: np.ndarray,
    l2: np.ndarray,
    u: np.ndarray,
    v: np.ndarray,
    power: float,
    p1: float,
    log_alpha: float,
    beta: float,
    profile: NoiseProfile,
) -> np.ndarray:
    """Vectorized energy of the reduced two-phase problem.

    Broadcasts over phase-length pairs and the (u, v) split grids;
    infeasible cells come back as +inf.
    """
    with np.errstate(all="ignore"):
        log_q1 = u * log_alpha
        log_q2 = (1.0 - u) * log_alpha
        m1 = beta * v
        m2 = (beta - m1) / (1.0 - m1)
        a1 = -sp_special.ndtri(np.exp(log_q1))
        a2 = -sp_special.ndtri(np.exp(log_q2))
        b1 = -sp_special.ndtri(m1)
        b2 = -sp_special.ndtri(m2)
        s1 = a1 + b1
        s2 = a2 + b2
        sig1_sq = l1 * power / np.square(s1)
        sig2_sq = l2 * power / np.square(s2)
        ex1 = sig1_sq - profile.sigma_t_sq
        ex2 = sig2_sq - profile.sigma_t_sq
        pr1 = np.power(profile.k / ex1, 1.0 / profile.gamma)
        pr2 = np.power(profile.k / ex2, 1.0 / profile.gamma)
        pr1 = np.clip(pr1, PR_MIN, None)
        pr2 = np.clip(pr2, PR_MIN, None)
        p_c = (1.0 - p1) * np.exp(log_q1) + p1 * (1.0 - m1)
        energy = l1 * pr1 + p_c * l2 * pr2
        bad = (
            (s1 <= 0.0)
            | (s2 <= 0.0)
            | (ex1 <= 0.0)
            | (ex2 <= 0.0)
            | (pr1 > PR_MAX)
            | (pr2 > PR_MAX)
            | ~np.isfinite(energy)
        )
    return np.where(bad, np.inf, energy)


def _inner_point(
    l1: int,
    l2: int,
    x: Sequence[float],
    power: float,
    p1: float,
    log_alpha: float,
    beta: float,
    profile: NoiseProfile,
) -> tuple[float, AdaSenseConfig | None]:
    """Scalar objective at one (u, v) point; also reconstructs the config."""
    u = float(_expit(x[0]))
    v = float(_expit(x[1]))
    log_q1 = u * log_alpha
    log_q2 = (1.0 - u) * log_alpha
    m1 = beta * v
    m2 = (beta - m1) / (1.0 - m1)
    try:
        a1 = inverse_q(math.exp(log_q1))
        a2 = inverse_q(math.exp(log_q2))
        b1 = inverse_q(m1)
        b2 = inverse_q(m2)
    except ValueError:
        return math.inf, None
    s1, s2 = a1 + b1, a2 + b2
    if s1 <= 0.0 or s2 <= 0.0:
        return math.inf, None
    sig1_sq = l1 * power / (s1 * s1)
    sig2_sq = l2 * power / (s2 * s2)
    if sig1_sq <= profile.sigma_t_sq or sig2_sq <= profile.sigma_t_sq:
        return math.inf, None
    pr1 = profile.power_for_variance(sig1_sq)
    pr2 = profile.power_for_variance(sig2_sq)
    if pr1 > PR_MAX or pr2 > PR_MAX:
        return math.inf, None
    pr1 = max(pr1, PR_MIN)
    pr2 = max(pr2, PR_MIN)
    # Thresholds from the H0 pass arguments: arg0_i = a_i.
    sig1 = math.sqrt(profile.noise_variance(pr1))
    sig2 = math.sqrt(profile.noise_variance(pr2))
    s1_act = math.sqrt(l1 * power) / sig1
    s2_act = math.sqrt(l2 * power) / sig2
    eta1 = (a1 - 0.5 * s1_act) * math.sqrt(l1 * power) / sig1
    eta2 = (a2 - 0.5 * s2_act) * math.sqrt(l2 * power) / sig2
    p_c = (1.0 - p1) * math.exp(log_q1) + p1 * (1.0 - m1)
    energy = l1 * pr1 + p_c * l2 * pr2
    cfg = AdaSenseConfig(l1=l1, l2=l2, p_r1=pr1, p_r2=pr2, eta1=eta1, eta2=eta2)
    return energy, cfg


# Deterministic multi-start schedule: false-alarm split exponents crossed
# with two miss-split seeds.
_START_U = (0.1, 0.25, 0.5, 0.75)
_START_V = (0.25, 0.75)
_REFINE_PAIRS = 15


def optimize_adasense(
    scenario: ScenarioParams, profile: NoiseProfile, target: ReliabilityTarget
) -> OptimizationResult:
    """Minimize two-phase energy subject to the reliability targets.

    Strategy: exhaustive enumeration of the integer phase-length pairs,
    a vectorized coarse grid over the constraint-split variables to rank
    the pairs, then Nelder-Mead multi-start refinement on the most
    promising pairs. The single-phase solution (the l1 = 0 boundary of
    the feasible set) is always evaluated too and returned when it wins.
    Fully deterministic: fixed grids, fixed start schedule, ties broken
    lexicographically by (l1, l2, start index).
    """
    t0 = time.perf_counter()
    n = scenario.preamble_len
    if n < 2:
        single = solve_single_phase(scenario, profile, target)
        return single
    power = scenario.received_power_watts
    p1 = scenario.prior_p1
    alpha = target.alpha * (1.0 - _TARGET_MARGIN)
    beta = target.beta * (1.0 - _TARGET_MARGIN)
    log_alpha = math.log(alpha)

    pairs = [(l1, l2) for l1 in range(1, n) for l2 in range(1, n - l1 + 1)]
    l1_arr = np.array([p[0] for p in pairs], dtype=float)[:, None, None]
    l2_arr = np.array([p[1] for p in pairs], dtype=float)[:, None, None]
    u_grid = np.linspace(0.04, 0.96, 13)[None, :, None]
    v_grid = np.linspace(0.05, 0.95, 10)[None, None, :]
    grid_e = _inner_energy_grid(
        l1_arr, l2_arr, u_grid, v_grid, power, p1, log_alpha, beta, profile
    )
    per_pair_best = grid_e.reshape(len(pairs), -1).min(axis=1)
    order = np.argsort(per_pair_best, kind="stable")
    candidates = [pairs[i] for i in order[:_REFINE_PAIRS] if per_pair_best[i] < math.inf]

    starts = [
        (math.log(u / (1.0 - u)), math.log(v / (1.0 - v)))
        for u in _START_U
        for v in _START_V
    ]

    best: tuple[float, int, int, int] | None = None  # sort key
    best_cfg: AdaSenseConfig | None = None
    starts_tried = 0
    budget_degraded = False
    for l1, l2 in candidates:
        pair_starts = starts
        if time.perf_counter() - t0 > WALL_TIME_BUDGET_S:
            pair_starts = starts[:2]
            budget_degraded = True

        def objective(x: np.ndarray, _l1: int = l1, _l2: int = l2) -> float:
            e, _ = _inner_point(_l1, _l2, x, power, p1, log_alpha, beta, profile)
            return e

        for start_idx, x0 in enumerate(pair_starts):
            starts_tried += 1
            res = sp_optimize.minimize(
                objective,
                np.asarray(x0, dtype=float),
                method="Nelder-Mead",
                options={"xatol": 1e-8, "fatol": 0.0, "maxiter": 400},
            )
            energy, cfg = _inner_point(
                l1, l2, res.x, power, p1, log_alpha, beta, profile
            )
            if cfg is None:
                continue
            key = (energy, l1, l2, start_idx)
            if best is None or key < best:
                best = key
                best_cfg = cfg

    single = solve_single_phase(scenario, profile, target)

    if best_cfg is not None:
        report = eval_adasense(best_cfg, scenario, profile)
        two_phase = _result(
            best_cfg,
            report,
            target,
            t0,
            starts_tried=starts_tried,
            best_start_index=best[3],
            extra={
                "pairs_enumerated": len(pairs),
                "pairs_refined": len(candidates),
                "budget_degraded": budget_degraded,
            },
        )
    else:
        two_phase = _result(
            None,
            None,
            target,
            t0,
            starts_tried=starts_tried,
            extra={"pairs_enumerated": len(pairs), "reason": "no feasible start"},
        )

    if single.feasible and (
        not two_phase.feasible or single.objective_energy < two_phase.objective_energy
    ):
        diag = dict(single.diagnostics)
        diag.update(
            starts_tried=starts_tried,
            wall_time_seconds=time.perf_counter() - t0,
            boundary="single_phase",
        )
        return OptimizationResult(
            config=single.config,
            report=single.report,
            feasible=True,
            objective_energy=single.objective_energy,
            diagnostics=diag,
        )
    return two_phase


_SOLVERS: dict[str, Callable[..., OptimizationResult]] = {
    "single_phase": solve_single_phase,
    "bmac": solve_bmac,
    "adasense": optimize_adasense,
}


def solve_scheme(
    scheme: str,
    scenario: ScenarioParams,
    profile: NoiseProfile,
    target: ReliabilityTarget,
) -> OptimizationResult:
    """Dispatch to the solver for a named scheme."""
    try:
        solver = _SOLVERS[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}") from None
    return solver(scenario, profile, target)


def sweep(
    scenarios: Iterable[ScenarioParams],
    profile: NoiseProfile,
    targets: Iterable[ReliabilityTarget],
    schemes: Sequence[str] = SCHEME_ORDER,
) -> list[dict[str, Any]]:
    """Cross-product solve over scenarios, targets, and schemes.

    Rows come back in deterministic lexicographic order (scenario,
    target, canonical scheme order). Infeasible cells are recorded
    in-row, never raised. When both the sequential baseline and the
    two-phase scheme are present in a cell, the relative energy saving
    100*(E_bmac - E_ada)/E_bmac is attached to the two-phase row.
    """
    schemes = [s for s in SCHEME_ORDER if s in schemes]
    rows: list[dict[str, Any]] = []
    for scenario in scenarios:
        for target in targets:
            cell: dict[str, OptimizationResult] = {}
            for scheme in schemes:
                cell[scheme] = solve_scheme(scheme, scenario, profile, target)
            for scheme in schemes:
                result = cell[scheme]
                row: dict[str, Any] = {
                    "scenario": scenario,
                    "target": target,
                    "scheme": scheme,
                    "result": result,
                }
                savings = None
                if (
                    scheme == "adasense"
                    and "bmac" in cell
                    and cell["bmac"].feasible
                    and result.feasible
                ):
                    e_bmac = cell["bmac"].objective_energy
                    savings = 100.0 * (e_bmac - result.objective_energy) / e_bmac
                row["savings_vs_bmac_pct"] = savings
                rows.append(row)
    return rows
