"""Thermodynamic-limit critical fields of the modular XY chain.

At a gap closing the Bogoliubov recurrence decouples into a 2x2 transfer
matrix per bond; periodicity over one cell reduces the condition to
det(Mtilde +/- I) = 0 where Mtilde is the ordered product of one J-bond
factor, r-2 intra-cell factors and one closing factor:

    Mtilde = [[-2h/(J(1-g)), -(1+g)/(J(1-g))], [1, 0]]
             * [[-2h/(1-g), -(1+g)/(1-g)], [1, 0]]^(r-2)
             * [[-2h/(1-g), -J(1+g)/(1-g)], [1, 0]]

Roots in h are located by a dense sign scan refined by bisection. Root
finding internally multiplies every factor by (1-g), which rescales the
determinant condition to det(P +/- (1-g)^r I) = 0 without moving the roots;
this keeps the procedure regular as g -> 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

ISING_GUARD = 1e-9


@dataclass(frozen=True)
class TransferMatrixCell:
    """Single-cell transfer matrix and its parameters."""

    m_tilde: np.ndarray
    h: float
    inter_coupling: float
    anisotropy: float
    cell_size: int


@dataclass(frozen=True)
class PhaseBoundarySet:
    """Critical fields with the determinant branch that produced each."""

    critical_fields: tuple
    branches: tuple  # '+I' or '-I' per root
    inter_coupling: float
    anisotropy: float
    cell_size: int
    tolerance: float

    def positive(self) -> tuple:
        return tuple(h for h in self.critical_fields if h > 0)


def _scaled_factors(h: float, j: float, gamma: float, r: int):
    """Cell factors with every transfer matrix multiplied through by (1-g)."""
    one_minus = 1.0 - gamma
    first = np.array([[-2.0 * h / j, -(1.0 + gamma) / j], [one_minus, 0.0]])
    middle = np.array([[-2.0 * h, -(1.0 + gamma)], [one_minus, 0.0]])
    last = np.array([[-2.0 * h, -j * (1.0 + gamma)], [one_minus, 0.0]])
    if r == 1:
        # single all-J bond: previous and next bond both carry J
        return [np.array([[-2.0 * h / j, -(1.0 + gamma)], [one_minus, 0.0]])]
    return [first] + [middle] * (r - 2) + [last]


def _scaled_cell_product(h: float, j: float, gamma: float, r: int) -> np.ndarray:
    product = np.eye(2)
    for factor in _scaled_factors(h, j, gamma, r):
        product = product @ factor
    return product


def cell_transfer_matrix(
    h: float, j: float, gamma: float, r: int
) -> TransferMatrixCell:
    """The exact single-cell transfer matrix product Mtilde."""
    if r < 1:
        raise ValidationError("cell size r must be >= 1")
    if gamma >= 1.0 - ISING_GUARD:
        raise ValidationError(
            "anisotropy too close to 1: the bare factors divide by (1-gamma); "
            "use find_critical_fields, which works with the (1-gamma)-rescaled "
            "formulation"
        )
    scale = (1.0 - gamma) ** r
    m_tilde = _scaled_cell_product(h, j, gamma, r) / scale
    return TransferMatrixCell(
        m_tilde=m_tilde, h=h, inter_coupling=j, anisotropy=gamma, cell_size=r
    )


def boundary_determinant(h: float, j: float, gamma: float, r: int, branch: int) -> float:
    """det(Mtilde + branch*I), evaluated in the rescaled form."""
    scale = (1.0 - gamma) ** r
    product = _scaled_cell_product(h, j, gamma, r)
    return float(np.linalg.det(product + branch * scale * np.eye(2)))


def find_critical_fields(
    j: float,
    gamma: float,
    r: int,
    interval: tuple = (-1.5, 1.5),
    tolerance: float = 1e-10,
    samples: int | None = None,
) -> PhaseBoundarySet:
    """All roots of det(Mtilde(h) +/- I) = 0 in ``interval``.

    Dense scan (>= 40*r points per branch) followed by bisection; roots are
    deduplicated across the two branches. An empty interval yields an empty
    set; a sign change at a scan endpoint triggers a widen-interval warning.
    """
    if r < 1:
        raise ValidationError("cell size r must be >= 1")
    if tolerance <= 0:
        raise ValidationError("tolerance must be positive")
    lo, hi = interval
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ValidationError(f"invalid interval {interval}")
    if samples is None:
        samples = max(40 * r, 200)
    grid = np.linspace(lo, hi, samples)
    roots: list[tuple[float, str]] = []
    for branch, label in ((1, "+I"), (-1, "-I")):
        values = np.array(
            [boundary_determinant(h, j, gamma, r, branch) for h in grid]
        )
        if values[0] == 0.0 or values[-1] == 0.0:
            warnings.warn(
                "root at scan endpoint; widen the search interval", stacklevel=2
            )
        for i in range(samples - 1):
            a, b = grid[i], grid[i + 1]
            fa, fb = values[i], values[i + 1]
            if fa == 0.0:
                roots.append((float(a), label))
                continue
            if fa * fb >= 0.0:
                continue
            while b - a > tolerance:
                mid = 0.5 * (a + b)
                fm = boundary_determinant(mid, j, gamma, r, branch)
                if fa * fm <= 0.0:
                    b = mid
                else:
                    a, fa = mid, fm
            roots.append((0.5 * (a + b), label))
    roots.sort()
    merged: list[tuple[float, str]] = []
    for h, label in roots:
        if merged and abs(h - merged[-1][0]) < 10.0 * tolerance:
            continue
        merged.append((h, label))
    return PhaseBoundarySet(
        critical_fields=tuple(h for h, _ in merged),
        branches=tuple(label for _, label in merged),
        inter_coupling=j,
        anisotropy=gamma,
        cell_size=r,
        tolerance=tolerance,
    )


def phase_diagram_grid(
    axis1: tuple,
    axis2: tuple,
    fixed: dict,
    samples_per_cell: int = 1,
):
    """Boundary-crossing marks on a rectangular parameter grid.

    ``axis1``/``axis2`` are (name, values) with names from {'h', 'gamma', 'J'};
    remaining parameters (and 'r') come from ``fixed``. Returns a dict with
    the axis arrays and a boolean ``boundary`` array marking grid cells where
    det(Mtilde + I) or det(Mtilde - I) changes sign between neighbors.
    """
    name1, vals1 = axis1
    name2, vals2 = axis2
    allowed = {"h", "gamma", "J"}
    if name1 not in allowed or name2 not in allowed or name1 == name2:
        raise ValidationError("axes must be two distinct names from {h, gamma, J}")
    vals1 = np.asarray(vals1, dtype=float)
    vals2 = np.asarray(vals2, dtype=float)
    r = int(fixed.get("r", fixed.get("cell_size", 1)))

    def params(x1, x2):
        p = {"h": fixed.get("h", 0.0), "gamma": fixed.get("gamma", 0.5),
             "J": fixed.get("J", 1.0)}
        p[name1] = x1
        p[name2] = x2
        gamma = min(p["gamma"], 1.0 - ISING_GUARD)
        return p["h"], p["J"], gamma

    signs = np.zeros((len(vals2), len(vals1), 2))
    for i2, x2 in enumerate(vals2):
        for i1, x1 in enumerate(vals1):
            h, j, gamma = params(x1, x2)
            for k, branch in enumerate((1, -1)):
                signs[i2, i1, k] = np.sign(boundary_determinant(h, j, gamma, r, branch))
    boundary = np.zeros((len(vals2), len(vals1)), dtype=bool)
    boundary[:, 1:] |= np.any(signs[:, 1:, :] != signs[:, :-1, :], axis=2)
    boundary[1:, :] |= np.any(signs[1:, :, :] != signs[:-1, :, :], axis=2)
    return {
        "axis1": (name1, vals1),
        "axis2": (name2, vals2),
        "boundary": boundary,
        "signs": signs,
    }
