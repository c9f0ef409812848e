"""Global-sensing figure of merit and control-field optimization."""

import numpy as np
import pytest

from modsense import XYChainSpec, ValidationError, qfi_finite_difference
from modsense.global_sensing import (
    GlobalSensingProblem,
    QfiCache,
    average_uncertainty,
    optimize_control_field,
)

BASE = dict(n_sites=40, cell_size=2, inter_coupling=0.4, anisotropy=0.3)


def make_problem(width, h0=0.0, n=40):
    spec = XYChainSpec(**{**BASE, "n_sites": n})
    return GlobalSensingProblem(spec=spec, h0=h0, width=width, n_points=51)


class TestValidation:
    def test_width_positive(self):
        with pytest.raises(ValidationError):
            make_problem(0.0)

    def test_minimum_quadrature_points(self):
        spec = XYChainSpec(**BASE)
        with pytest.raises(ValidationError):
            GlobalSensingProblem(spec=spec, width=0.1, n_points=21)

    def test_uniform_prior_only(self):
        spec = XYChainSpec(**BASE)
        with pytest.raises(ValidationError):
            GlobalSensingProblem(spec=spec, width=0.1, prior="gaussian")


class TestAverageUncertainty:
    def test_narrow_interval_inverts_qfi(self):
        """As width -> 0, G(center) -> 1/Q(center) (trapezoid of a constant)."""
        problem = make_problem(1e-5)
        h_ctr = 0.4
        g = average_uncertainty(problem, h_ctr)
        q = qfi_finite_difference(
            problem.spec.with_parameter("h", h_ctr), "h", richardson=False
        ).value
        assert g == pytest.approx(1.0 / q, rel=1e-3)

    def test_lower_bound_from_peak_qfi(self):
        """G can never beat the best single-point Cramer-Rao bound."""
        problem = make_problem(0.5)
        cache = QfiCache(problem.spec)
        g = average_uncertainty(problem, 0.2, cache)
        q_max = max(v for v, _ in cache._values.values())
        assert g >= 1.0 / q_max

    def test_cache_reuse_across_overlapping_windows(self):
        problem = make_problem(0.5)
        cache = QfiCache(problem.spec)
        average_uncertainty(problem, 0.0, cache)
        n_first = len(cache)
        # shifted by exactly one node spacing: all but one node is shared
        average_uncertainty(problem, 0.5 / 50, cache)
        assert len(cache) == n_first + 1


class TestOptimization:
    def test_optimum_tracks_qfi_peak_for_narrow_prior(self):
        """With a tiny interval the best center sits on a critical point."""
        result = optimize_control_field(make_problem(1e-4), n_scan=61)
        assert min(abs(abs(result.h_ctr_opt) - 0.2142),
                   abs(abs(result.h_ctr_opt) - 0.6942)) < 0.02
        assert result.g_opt > 0

    def test_scan_curve_contains_optimum(self):
        result = optimize_control_field(make_problem(0.5), n_scan=41)
        finite = np.isfinite(result.g_values)
        assert result.g_opt <= np.min(result.g_values[finite]) + 1e-12

    def test_deterministic(self):
        a = optimize_control_field(make_problem(0.5), n_scan=41)
        b = optimize_control_field(make_problem(0.5), n_scan=41)
        assert a.h_ctr_opt == b.h_ctr_opt
        assert a.g_opt == b.g_opt

    def test_wider_prior_costs_more(self):
        """A wider unknown-field interval cannot make sensing easier."""
        narrow = optimize_control_field(make_problem(0.2), n_scan=41)
        wide = optimize_control_field(make_problem(1.0), n_scan=41)
        assert wide.g_opt > narrow.g_opt
