"""Energy modeling and optimization of channel-sensing schemes."""

from .core import (
    DomainError,
    NoiseProfile,
    ReliabilityTarget,
    ScenarioParams,
    dbm_to_watts,
    inverse_q,
    log_q_function,
    q_function,
    thermal_noise_watts,
    watts_to_dbm,
)
from .schemes import (
    AdaSenseConfig,
    BmacConfig,
    Decision,
    Hypothesis,
    PerfReport,
    SinglePhaseConfig,
    decide_adasense,
    decide_bmac,
    decide_single_phase,
    eval_adasense,
    eval_bmac,
    eval_single_phase,
)
from .solvers import (
    OptimizationResult,
    optimize_adasense,
    solve_bmac,
    solve_scheme,
    solve_single_phase,
    sweep,
)
from .montecarlo import McEstimate, McSettings, estimate
from .asymptotics import (
    Tolerances,
    check_adasense_sparsity,
    check_bmac_lower_bound,
    check_single_phase_slope,
)
from .config import ConfigError, RunConfig, load_config

__version__ = "0.1.0"

__all__ = [
    "AdaSenseConfig",
    "BmacConfig",
    "ConfigError",
    "Decision",
    "DomainError",
    "Hypothesis",
    "McEstimate",
    "McSettings",
    "NoiseProfile",
    "OptimizationResult",
    "PerfReport",
    "ReliabilityTarget",
    "RunConfig",
    "ScenarioParams",
    "SinglePhaseConfig",
    "Tolerances",
    "check_adasense_sparsity",
    "check_bmac_lower_bound",
    "check_single_phase_slope",
    "dbm_to_watts",
    "decide_adasense",
    "decide_bmac",
    "decide_single_phase",
    "estimate",
    "eval_adasense",
    "eval_bmac",
    "eval_single_phase",
    "inverse_q",
    "load_config",
    "log_q_function",
    "optimize_adasense",
    "q_function",
    "solve_bmac",
    "solve_scheme",
    "solve_single_phase",
    "sweep",
    "thermal_noise_watts",
    "watts_to_dbm",
]
