"""Scaling-law checkers and their tolerance plumbing."""

import math

import pytest

from chansense import (
    ScenarioParams,
    Tolerances,
    check_adasense_sparsity,
    check_bmac_lower_bound,
    check_single_phase_slope,
    inverse_q,
)
from chansense.asymptotics import min_single_phase_samples

ALPHAS = tuple(10.0 ** -e for e in range(4, 21, 2))


class TestTolerances:
    def test_defaults(self):
        tol = Tolerances()
        assert tol.slope_ratio_lo < tol.slope_ratio_hi
        assert tol.slope_r2_min == 0.99

    def test_load_overrides(self, tmp_path):
        path = tmp_path / "tol.yaml"
        path.write_text("slope_ratio_lo: 1.2\nslope_ratio_hi: 1.6\n")
        tol = Tolerances.load(path)
        assert tol.slope_ratio_lo == 1.2
        assert tol.slope_r2_min == 0.99

    def test_load_rejects_unknown(self, tmp_path):
        path = tmp_path / "tol.yaml"
        path.write_text("slope_band: 1.0\n")
        with pytest.raises(ValueError, match="unknown tolerance keys"):
            Tolerances.load(path)

    def test_load_none_is_defaults(self):
        assert Tolerances.load(None) == Tolerances()


class TestMinSamples:
    def test_formula(self, profile):
        n = min_single_phase_samples(profile, 1e-9, 1e-6, 1e-3, 1e-3)
        s = inverse_q(1e-3) + inverse_q(1e-3)
        sigma_sq = profile.noise_variance(1e-6)
        assert n == math.ceil(sigma_sq * s * s / 1e-9)

    def test_never_below_one(self, profile):
        assert min_single_phase_samples(profile, 1e-9, 1e-3, 0.6, 0.6) == 1


class TestSlope:
    def test_fit_quality(self, profile):
        fit = check_single_phase_slope(profile, 1e-9, 1e-6, 1e-3, ALPHAS)
        tol = Tolerances()
        assert fit.r_squared >= tol.slope_r2_min
        assert tol.slope_ratio_lo <= fit.slope_ratio <= tol.slope_ratio_hi
        assert not fit.excluded_alphas

    def test_energy_increases(self, profile):
        fit = check_single_phase_slope(profile, 1e-9, 1e-6, 1e-3, ALPHAS)
        assert all(a < b for a, b in zip(fit.energies, fit.energies[1:]))

    def test_input_validation(self, profile):
        with pytest.raises(ValueError, match="strictly decreasing"):
            check_single_phase_slope(profile, 1e-9, 1e-6, 1e-3, (1e-3, 1e-2))
        with pytest.raises(ValueError, match="at least two"):
            check_single_phase_slope(profile, 1e-9, 1e-6, 1e-3, (1e-3,))


class TestBmacBound:
    def test_convergence_from_above(self, profile):
        # The exact energy dominates the asymptotic bound and the gap
        # closes monotonically as alpha shrinks. This is the true
        # finite-alpha behavior of the asymptotic bound; the ratios
        # themselves are decreasing, not increasing.
        scenario = ScenarioParams(
            received_power_watts=1e-9, prior_p1=1e-10, preamble_len=30
        )
        ratios = check_bmac_lower_bound(profile, scenario, 1e-3, ALPHAS)
        assert all(r.feasible for r in ratios)
        gaps = [abs(r.ratio - 1.0) for r in ratios]
        assert all(r.ratio >= Tolerances().bmac_ratio_min for r in ratios)
        assert all(a >= b for a, b in zip(gaps, gaps[1:]))


class TestSparsity:
    def test_non_increasing_and_flat(self, profile):
        points = check_adasense_sparsity(
            profile, 1e-9, 1e-6, 1e-3, (1e-2, 1e-4, 1e-6), preamble_len=50
        )
        energies = [p.optimal_energy for p in points]
        assert all(p.feasible for p in points)
        assert all(a >= b * (1 - 1e-12) for a, b in zip(energies, energies[1:]))

    def test_rejects_non_decreasing_priors(self, profile):
        with pytest.raises(ValueError, match="strictly decreasing"):
            check_adasense_sparsity(
                profile, 1e-9, 1e-6, 1e-3, (1e-4, 1e-2), preamble_len=50
            )
