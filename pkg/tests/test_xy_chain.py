"""Free-fermion chain solver tests."""

import numpy as np
import pytest

from modsense import (
    XYChainSpec,
    ValidationError,
    build_couplings,
    build_bdg_matrix,
    solve_chain,
    ground_state_energy,
    best_sector,
)


def uniform_dispersion(n, h, gamma, j=1.0):
    """Antiperiodic uniform-chain energies 2 sqrt((h - J cos k)^2 + (gJ sin k)^2)."""
    ks = np.pi * (2 * np.arange(n) + 1) / n
    return np.sort(2.0 * np.sqrt((h - j * np.cos(ks)) ** 2 + (gamma * j * np.sin(ks)) ** 2))


class TestSpecValidation:
    def test_size_must_be_multiple_of_cell(self):
        with pytest.raises(ValidationError):
            XYChainSpec(n_sites=10, cell_size=3)

    def test_unknown_boundary(self):
        with pytest.raises(ValidationError):
            XYChainSpec(n_sites=4, boundary="twisted")

    def test_anisotropy_range(self):
        with pytest.raises(ValidationError):
            XYChainSpec(n_sites=4, anisotropy=1.5)

    def test_per_site_field_length(self):
        with pytest.raises(ValidationError):
            XYChainSpec(n_sites=4, field=[0.1, 0.2])

    def test_with_parameter(self):
        spec = XYChainSpec(n_sites=8, cell_size=2, inter_coupling=0.4)
        assert spec.with_parameter("h", 0.3).field == 0.3
        assert spec.with_parameter("J", 0.7).inter_coupling == 0.7
        assert spec.with_parameter("gamma", 0.2).anisotropy == 0.2
        with pytest.raises(ValidationError):
            spec.with_parameter("n_sites", 10)


class TestCouplings:
    def test_modular_pattern(self):
        spec = XYChainSpec(n_sites=6, cell_size=3, inter_coupling=0.4)
        assert np.allclose(build_couplings(spec), [1.0, 1.0, 0.4, 1.0, 1.0, 0.4])

    def test_open_chain_drops_wrap_bond(self):
        spec = XYChainSpec(n_sites=6, cell_size=3, inter_coupling=0.4, boundary="open")
        assert len(build_couplings(spec)) == 5

    def test_r1_is_uniform(self):
        spec = XYChainSpec(n_sites=8, cell_size=1, inter_coupling=0.7)
        assert np.allclose(build_couplings(spec), 0.7)


class TestDiagonalization:
    def test_uniform_dispersion_oracle(self):
        n, h, gamma = 24, 0.35, 0.6
        spec = XYChainSpec(n_sites=n, cell_size=1, anisotropy=gamma, field=h)
        sol = solve_chain(spec)
        assert np.allclose(sol.energies, uniform_dispersion(n, h, gamma), atol=1e-12)

    def test_r1_unit_j_matches_uniform_bitwise(self):
        a = XYChainSpec(n_sites=12, cell_size=1, inter_coupling=1.0, anisotropy=0.5, field=0.3)
        b = XYChainSpec(n_sites=12, cell_size=2, inter_coupling=1.0, anisotropy=0.5, field=0.3)
        ma, mb = build_bdg_matrix(a), build_bdg_matrix(b)
        assert np.array_equal(ma.matrix, mb.matrix)

    def test_orthonormal_columns(self):
        spec = XYChainSpec(n_sites=20, cell_size=4, inter_coupling=0.4, anisotropy=0.3, field=0.5)
        sol = solve_chain(spec)
        gram = sol.u.T @ sol.u + sol.v.T @ sol.v
        assert np.allclose(gram, np.eye(20), atol=1e-12)

    def test_spectrum_particle_hole_pairing(self):
        spec = XYChainSpec(n_sites=14, cell_size=7, inter_coupling=0.3, anisotropy=0.8, field=0.2)
        w = np.linalg.eigvalsh(build_bdg_matrix(spec).matrix)
        assert np.allclose(np.sort(w), np.sort(-w), atol=1e-12)

    def test_energies_positive_and_sorted(self):
        spec = XYChainSpec(n_sites=16, cell_size=2, inter_coupling=0.4, anisotropy=0.3, field=0.9)
        sol = solve_chain(spec)
        assert np.all(sol.energies >= -1e-12)
        assert np.all(np.diff(sol.energies) >= -1e-12)

    def test_anisotropy_sign_leaves_spectrum(self):
        base = dict(n_sites=12, cell_size=3, inter_coupling=0.5, field=0.4)
        plus = solve_chain(XYChainSpec(anisotropy=0.6, **base))
        minus = solve_chain(XYChainSpec(anisotropy=-0.6, **base))
        assert np.allclose(plus.energies, minus.energies, atol=1e-12)

    def test_large_field_limit(self):
        h = 50.0
        spec = XYChainSpec(n_sites=8, cell_size=2, inter_coupling=0.4, anisotropy=0.3, field=h)
        sol = solve_chain(spec)
        assert np.allclose(sol.energies, 2.0 * h, rtol=0.05)

    def test_deterministic_repeat(self):
        spec = XYChainSpec(n_sites=16, cell_size=4, inter_coupling=0.4, anisotropy=0.3, field=0.214)
        a, b = solve_chain(spec), solve_chain(spec)
        assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)


class TestSectors:
    def test_best_sector_is_lower(self):
        spec = XYChainSpec(n_sites=8, cell_size=2, inter_coupling=0.4, anisotropy=0.3, field=0.1)
        best = best_sector(spec)
        other = "periodic" if best.boundary == "antiperiodic" else "antiperiodic"
        assert ground_state_energy(best) <= ground_state_energy(
            XYChainSpec(**{**best.__dict__, "boundary": other})
        )

    def test_open_passthrough(self):
        spec = XYChainSpec(n_sites=8, cell_size=2, boundary="open")
        assert best_sector(spec) is spec
