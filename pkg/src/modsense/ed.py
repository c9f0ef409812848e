"""Exact-diagonalization oracle for the spin-1/2 modular XY chain.

Dense brute force for N <= 12, used as the independent reference for the
free-fermion engine: ground states, overlaps and QFI from the spin picture

    H = -1/2 sum_j J_{j,j+1} [ (1+gamma) sx sx + (1-gamma) sy sy ] + h sum_j sz.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import SizeError, NumericalError, ValidationError
from .xy_chain import XYChainSpec, build_couplings

MAX_SITES = 12

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
# sy = i * _SY_REAL keeps the Hamiltonian real: sy_j sy_k = -_SY_REAL_j _SY_REAL_k
_SY_REAL = np.array([[0.0, -1.0], [1.0, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])


def _site_operator(n: int, site: int, op: np.ndarray) -> np.ndarray:
    out = np.array([[1.0]])
    for j in range(n):
        out = np.kron(out, op if j == site else np.eye(2))
    return out


def build_spin_hamiltonian(spec: XYChainSpec) -> np.ndarray:
    """Dense 2^N x 2^N spin Hamiltonian of the modular XY chain.

    The spin model has no antiperiodic option: any non-open boundary is a
    periodic spin chain.
    """
    n = spec.n_sites
    if n > MAX_SITES:
        raise SizeError(f"ED oracle limited to N <= {MAX_SITES}, got N = {n}")
    gamma = spec.anisotropy
    bonds = build_couplings(spec)
    n_bonds = n - 1 if spec.boundary == "open" else n
    h = np.zeros((2**n, 2**n))
    for j in range(n_bonds):
        k = (j + 1) % n
        xx = _site_operator(n, j, _SX) @ _site_operator(n, k, _SX)
        yy = -_site_operator(n, j, _SY_REAL) @ _site_operator(n, k, _SY_REAL)
        h += -0.5 * bonds[j] * ((1.0 + gamma) * xx + (1.0 - gamma) * yy)
    fields = spec.field_values()
    for j in range(n):
        h += fields[j] * _site_operator(n, j, _SZ)
    return h


def parity_operator(n: int) -> np.ndarray:
    """Global parity Pi = prod_j sz_j (diagonal)."""
    diag = np.ones(1)
    for _ in range(n):
        diag = np.kron(diag, np.array([1.0, -1.0]))
    return np.diag(diag)


def ed_ground_state(spec: XYChainSpec) -> tuple[float, np.ndarray, float]:
    """Lowest eigenpair and the gap to the first excited state."""
    h = build_spin_hamiltonian(spec)
    w, v = scipy.linalg.eigh(h, subset_by_index=[0, min(1, h.shape[0] - 1)])
    gap = float(w[1] - w[0]) if len(w) > 1 else np.inf
    return float(w[0]), v[:, 0], gap


def qfi_ed(spec: XYChainSpec, parameter: str = "h", step: float = 1e-5):
    """QFI via the centered fidelity susceptibility of exact ground states.

    Q = 8 (1 - |<psi(l - step/2)|psi(l + step/2)>|) / step^2, phase-free.
    """
    from .qfi import QfiResult  # local import avoids a cycle

    if step <= 0:
        raise ValidationError("step must be positive")
    lam = spec.parameter_value(parameter)
    _, psi_lo, gap_lo = ed_ground_state(spec.with_parameter(parameter, lam - step / 2.0))
    _, psi_hi, gap_hi = ed_ground_state(spec.with_parameter(parameter, lam + step / 2.0))
    gap = min(gap_lo, gap_hi)
    if gap < 1e-10:
        raise NumericalError(
            f"degenerate ground state: gap = {gap:.3e} at {parameter} = {lam}"
        )
    fidelity = abs(float(psi_lo @ psi_hi))
    q = 8.0 * (1.0 - min(fidelity, 1.0)) / step**2
    return QfiResult(
        value=max(q, 0.0),
        parameter=parameter,
        step=step,
        method="ed_oracle",
        spec=spec,
    )
