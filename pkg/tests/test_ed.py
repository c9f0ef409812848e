"""Exact-diagonalization oracle tests."""

import numpy as np
import pytest

from modsense import XYChainSpec, SizeError, ground_state_energy
from modsense.ed import build_spin_hamiltonian, parity_operator, ed_ground_state, qfi_ed


class TestSpinHamiltonian:
    def test_real_symmetric(self):
        spec = XYChainSpec(n_sites=6, cell_size=2, inter_coupling=0.4, anisotropy=0.3, field=0.5)
        h = build_spin_hamiltonian(spec)
        assert np.allclose(h, h.T, atol=1e-14)
        assert h.dtype == float

    def test_parity_commutes(self):
        spec = XYChainSpec(n_sites=6, cell_size=3, inter_coupling=0.7, anisotropy=0.5, field=0.3)
        h = build_spin_hamiltonian(spec)
        pi = parity_operator(6)
        assert np.allclose(h @ pi, pi @ h, atol=1e-12)

    def test_size_cap(self):
        with pytest.raises(SizeError):
            build_spin_hamiltonian(XYChainSpec(n_sites=14, cell_size=2))

    def test_single_site_field_only(self):
        spec = XYChainSpec(n_sites=1, cell_size=1, field=0.7, boundary="open")
        h = build_spin_hamiltonian(spec)
        assert np.allclose(h, [[0.7, 0.0], [0.0, -0.7]])


class TestGroundState:
    @pytest.mark.parametrize("n,r,j,gamma,h", [
        (6, 2, 0.4, 0.3, 0.2),
        (8, 2, 0.4, 0.3, 0.7),
        (8, 4, 0.6, 0.8, 0.45),
        (6, 3, 1.3, 0.5, 0.9),
    ])
    def test_matches_free_fermion_energy(self, n, r, j, gamma, h):
        """The spin ground energy equals the lower fermionic sector's -1/2 sum Lambda."""
        spec = XYChainSpec(n_sites=n, cell_size=r, inter_coupling=j, anisotropy=gamma, field=h)
        e_ed, _, _ = ed_ground_state(spec)
        e_ff = min(
            ground_state_energy(XYChainSpec(**{**spec.__dict__, "boundary": b}))
            for b in ("periodic", "antiperiodic")
        )
        assert e_ed == pytest.approx(e_ff, abs=1e-10)

    def test_gap_reported(self):
        spec = XYChainSpec(n_sites=6, cell_size=2, inter_coupling=0.4, anisotropy=0.3, field=0.5)
        _, psi, gap = ed_ground_state(spec)
        assert gap > 0
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)


class TestQfiEd:
    def test_positive_and_smooth(self):
        spec = XYChainSpec(n_sites=6, cell_size=2, inter_coupling=0.4, anisotropy=0.3, field=0.3)
        q = qfi_ed(spec, "h", step=1e-4)
        assert q.value > 0
        q2 = qfi_ed(spec, "h", step=5e-5)
        assert q2.value == pytest.approx(q.value, rel=1e-4)

    def test_field_sign_symmetry(self):
        base = dict(n_sites=6, cell_size=2, inter_coupling=0.4, anisotropy=0.3)
        qp = qfi_ed(XYChainSpec(field=0.4, **base), "h", step=1e-4)
        qm = qfi_ed(XYChainSpec(field=-0.4, **base), "h", step=1e-4)
        assert qp.value == pytest.approx(qm.value, rel=1e-6)
