"""Transfer-matrix phase-boundary tests."""

import numpy as np
import pytest

from modsense import ValidationError, cell_transfer_matrix, find_critical_fields
from modsense.phase_boundary import boundary_determinant, phase_diagram_grid


class TestCellTransferMatrix:
    def test_r1_closed_form(self):
        """Single-bond cell: Mtilde = [[-2h/(J(1-g)), -(1+g)/(1-g)], [1, 0]]."""
        h, j, g = 0.3, 0.7, 0.25
        cell = cell_transfer_matrix(h, j, g, 1)
        expected = np.array([[-2 * h / (j * (1 - g)), -(1 + g) / (1 - g)], [1.0, 0.0]])
        assert np.allclose(cell.m_tilde, expected, atol=1e-14)

    def test_scaled_product_consistency(self):
        """The determinant condition is evaluated in the rescaled form."""
        h, j, g, r = 0.4, 0.4, 0.3, 3
        cell = cell_transfer_matrix(h, j, g, r)
        direct = float(np.linalg.det(cell.m_tilde + np.eye(2)))
        scaled = boundary_determinant(h, j, g, r, 1) / (1 - g) ** (2 * r)
        assert direct == pytest.approx(scaled, rel=1e-10)

    def test_ising_guard(self):
        with pytest.raises(ValidationError):
            cell_transfer_matrix(0.5, 0.4, 1.0, 2)

    def test_invalid_cell_size(self):
        with pytest.raises(ValidationError):
            cell_transfer_matrix(0.5, 0.4, 0.3, 0)


class TestCriticalFields:
    def test_uniform_chain_roots_at_unit_field(self):
        """r=1, J=1 must reproduce the transverse-chain boundaries h = +-1."""
        roots = find_critical_fields(1.0, 0.5, 1)
        assert np.allclose(sorted(roots.critical_fields), [-1.0, 1.0], atol=1e-9)

    def test_dimer_roots(self):
        roots = find_critical_fields(0.4, 0.3, 2).positive()
        assert len(roots) == 2
        assert roots[0] == pytest.approx(0.2142428528562855, abs=1e-8)
        assert roots[1] == pytest.approx(0.6941901756723441, abs=1e-8)

    def test_determinant_vanishes_at_roots(self):
        result = find_critical_fields(0.4, 0.3, 2)
        for h, branch in zip(result.critical_fields, result.branches):
            sign = 1 if branch == "+I" else -1
            assert abs(boundary_determinant(h, 0.4, 0.3, 2, sign)) < 1e-8

    def test_field_sign_symmetry(self):
        roots = np.array(find_critical_fields(0.4, 0.05, 4).critical_fields)
        assert np.allclose(np.sort(roots), np.sort(-roots), atol=1e-8)

    def test_island_density_doubles_with_cell_size(self):
        """Doubling r roughly doubles the number of boundaries at small gamma."""
        n_r = len(find_critical_fields(0.4, 0.05, 5, samples=2000).positive())
        n_2r = len(find_critical_fields(0.4, 0.05, 10, samples=4000).positive())
        assert n_r > 0
        assert 1.4 <= n_2r / n_r <= 2.6

    def test_works_near_ising_limit(self):
        """The rescaled root finder stays regular as gamma -> 1."""
        roots = find_critical_fields(1.0, 1.0 - 1e-12, 1).positive()
        assert len(roots) == 1
        assert roots[0] == pytest.approx(1.0, abs=1e-6)

    def test_invalid_interval(self):
        with pytest.raises(ValidationError):
            find_critical_fields(0.4, 0.3, 2, interval=(1.0, -1.0))


class TestPhaseDiagramGrid:
    def test_boundary_marks_straddle_roots(self):
        hs = np.linspace(0.0, 1.0, 81)
        gammas = np.array([0.3])
        grid = phase_diagram_grid(("h", hs), ("gamma", gammas), {"J": 0.4, "r": 2})
        marked = hs[np.where(grid["boundary"][0])[0]]
        for hc in (0.2142, 0.6942):
            assert np.min(np.abs(marked - hc)) < (hs[1] - hs[0]) + 1e-12

    def test_axis_validation(self):
        with pytest.raises(ValidationError):
            phase_diagram_grid(("h", [0.1]), ("h", [0.2]), {"r": 2})
