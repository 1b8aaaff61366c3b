"""Core numeric primitives: Gaussian tail functions, unit conversions,
and the receiver noise-power model.

All powers are kept in Watts internally; dBm only appears at I/O
boundaries (see :func:`dbm_to_watts` / :func:`watts_to_dbm`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special

# Boltzmann constant, J/K (2019 SI exact value).
BOLTZMANN = 1.380649e-23

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class DomainError(ValueError):
    """Raised when an argument is outside a function's mathematical domain."""


def _require_finite(x: float, name: str) -> None:
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")


def q_function(x: float) -> float:
    """Gaussian upper-tail probability Pr(Z > x) for Z ~ N(0, 1).

    Accurate to better than 1e-12 relative for |x| <= 8, and stays
    positive and strictly decreasing out to x ~ 38 (the complementary
    error function underflows near x = 26.5, so the deep tail is
    evaluated through the log-domain path).
    """
    _require_finite(x, "x")
    if x > 25.0:
        # exp of the log-domain value keeps subnormal-but-positive results
        # down to x ~ 38.5.
        return math.exp(log_q_function(x))
    return 0.5 * special.erfc(x / _SQRT2)


def log_q_function(x: float) -> float:
    """ln Q(x) without intermediate underflow.

    Uses the scaled complementary error function for x >= 0 and
    log1p(-Q(-x)) for x < 0, so the result is accurate over the whole
    real line.
    """
    _require_finite(x, "x")
    if x < 0.0:
        return math.log1p(-q_function(-x))
    # Q(x) = 0.5 * erfcx(x/sqrt(2)) * exp(-x^2/2)
    return math.log(0.5 * special.erfcx(x / _SQRT2)) - 0.5 * x * x


def inverse_q(p: float) -> float:
    """Inverse of :func:`q_function` on (0, 1).

    One Newton refinement in log-probability space on top of the
    standard normal quantile keeps the round-trip error |dp/p| below
    1e-10 even deep in the tails.
    """
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    x = float(-special.ndtri(p))
    log_p = math.log(p)
    # d/dx ln Q(x) = -phi(x)/Q(x)
    for _ in range(2):
        log_pdf = -0.5 * x * x - _LOG_SQRT_2PI
        slope = -math.exp(log_pdf - log_q_function(x))
        step = (log_p - log_q_function(x)) / slope
        if not math.isfinite(step):
            break
        x += step
        if abs(step) < 1e-14 * max(1.0, abs(x)):
            break
    return x


def dbm_to_watts(p_dbm: float) -> float:
    """Convert a power in dBm to Watts."""
    _require_finite(p_dbm, "p_dbm")
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def watts_to_dbm(p_w: float) -> float:
    """Convert a power in Watts to dBm."""
    if not (p_w > 0.0) or not math.isfinite(p_w):
        raise DomainError(f"power must be positive and finite, got {p_w!r}")
    return 10.0 * math.log10(p_w / 1e-3)


def thermal_noise_watts(temperature_kelvin: float, bandwidth_hz: float) -> float:
    """Thermal noise power k_b * T * B in Watts."""
    if not (temperature_kelvin > 0.0):
        raise DomainError(f"temperature must be positive, got {temperature_kelvin!r}")
    if not (bandwidth_hz > 0.0):
        raise DomainError(f"bandwidth must be positive, got {bandwidth_hz!r}")
    return BOLTZMANN * temperature_kelvin * bandwidth_hz


@dataclass(frozen=True)
class NoiseProfile:
    """Receiver noise law sigma_r^2 = k * P_r**(-gamma) + sigma_t_sq.

    ``k`` has units Watt**(1+gamma) so that the variance comes out in
    Watts; ``sigma_t_sq`` is an optional thermal floor (defaults to 0,
    negligible for the micro-Watt receivers this models).
    """

    k: float
    gamma: float
    sigma_t_sq: float = 0.0

    def __post_init__(self) -> None:
        if not (self.k > 0.0):
            raise DomainError(f"k must be positive, got {self.k!r}")
        if not (self.gamma >= 1.0):
            raise DomainError(f"gamma must be >= 1, got {self.gamma!r}")
        if not (self.sigma_t_sq >= 0.0):
            raise DomainError(f"sigma_t_sq must be >= 0, got {self.sigma_t_sq!r}")

    def noise_variance(self, receiver_power_watts: float) -> float:
        """Total noise variance at receiver power P_r (Watts)."""
        if not (receiver_power_watts > 0.0):
            raise DomainError(
                f"receiver power must be positive, got {receiver_power_watts!r}"
            )
        return self.k * receiver_power_watts ** (-self.gamma) + self.sigma_t_sq

    def power_for_variance(self, sigma_sq: float) -> float:
        """Receiver power producing a given total noise variance.

        Inverse of :meth:`noise_variance`; requires sigma_sq above the
        thermal floor.
        """
        excess = sigma_sq - self.sigma_t_sq
        if not (excess > 0.0):
            raise DomainError(
                f"variance {sigma_sq!r} not above the thermal floor {self.sigma_t_sq!r}"
            )
        return (self.k / excess) ** (1.0 / self.gamma)


def noise_variance(profile: NoiseProfile, receiver_power_watts: float) -> float:
    """Functional alias for :meth:`NoiseProfile.noise_variance`."""
    return profile.noise_variance(receiver_power_watts)


@dataclass(frozen=True)
class ScenarioParams:
    """Channel and deployment context for one sensing problem.

    ``received_power_watts`` is the signal power P at the antenna,
    ``prior_p1`` the prior probability that a listening window contains
    a preamble, ``preamble_len`` the number n of available samples.
    """

    received_power_watts: float
    prior_p1: float
    preamble_len: int

    def __post_init__(self) -> None:
        if not (self.received_power_watts > 0.0):
            raise DomainError(
                f"received power must be positive, got {self.received_power_watts!r}"
            )
        if not (0.0 < self.prior_p1 < 1.0):
            raise DomainError(f"prior_p1 must lie in (0, 1), got {self.prior_p1!r}")
        if not (self.preamble_len >= 1):
            raise DomainError(f"preamble_len must be >= 1, got {self.preamble_len!r}")


@dataclass(frozen=True)
class ReliabilityTarget:
    """Upper bounds on the false-alarm and miss probabilities."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not (0.0 < self.beta < 1.0):
            raise DomainError(f"beta must lie in (0, 1), got {self.beta!r}")
