"""Modular SSH probe: Bloch bands, band QFI in J2, and the topological index.

The probe is a hopping chain whose unit cell holds r dimers (2r sites) with
couplings alternating 1, J2, 1, J2, ..., 1 inside the cell and J between
cells. Bloch diagonalization gives 2r bands in +/- pairs (chiral symmetry).
The estimated parameter is J2; per-band QFI is 4x the fidelity
susceptibility of the Bloch eigenvector, and the half-filling total sums the
occupied bands over the momentum grid p_k = 2 pi k / l.

The topological index is computed from Wilson-loop Zak phases in a unit cell
whose boundary is cut on a J2 bond: each of the 2r - 1 band gaps contributes
the Z2 class of the accumulated Zak phase below it (0 or 1 after dividing by
pi), and the index is the sum of the per-gap classes. This count equals the
number of protected edge-state pairs of the corresponding open chain and
jumps exactly at the gap closings J = J2 and J = J2^(1 - r).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ValidationError, NumericalError

DEGENERACY_EPS = 1e-8
RESIDUAL_TOL = 0.05


@dataclass(frozen=True)
class SSHChainSpec:
    """Immutable description of the modular SSH probe.

    ``dimers_per_cell`` is r (the cell has 2r sites), ``j1`` the odd-bond
    coupling (unit of energy), ``j2`` the even-bond coupling being estimated,
    ``inter_coupling`` the bond J between cells, ``n_cells`` the number l of
    cells (N = 2 r l sites).
    """

    dimers_per_cell: int
    j2: float
    inter_coupling: float
    n_cells: int
    j1: float = 1.0

    def __post_init__(self):
        if self.dimers_per_cell < 1:
            raise ValidationError("dimers_per_cell must be a positive integer")
        if self.n_cells < 1:
            raise ValidationError("n_cells must be a positive integer")
        if self.j1 <= 0 or self.j2 <= 0 or self.inter_coupling <= 0:
            raise ValidationError("all couplings must be positive")

    @property
    def sites_per_cell(self) -> int:
        return 2 * self.dimers_per_cell

    @property
    def n_sites(self) -> int:
        return self.sites_per_cell * self.n_cells

    def momentum_grid(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_cells) / self.n_cells


@dataclass(frozen=True)
class BlochHamiltonian:
    """One momentum block of the SSH chain."""

    momentum: float
    matrix: np.ndarray


@dataclass(frozen=True)
class BandStructure:
    """Sorted band energies and gauge-fixed eigenvectors on a momentum grid."""

    momenta: np.ndarray
    energies: np.ndarray  # (n_p, 2r), ascending per momentum
    eigenvectors: np.ndarray  # (n_p, 2r, 2r), columns match energies

    @property
    def n_bands(self) -> int:
        return self.energies.shape[1]

    def min_gap(self) -> float:
        """Smallest adjacent-band gap over all sampled momenta."""
        return float(np.min(self.energies[:, 1:] - self.energies[:, :-1]))


@dataclass(frozen=True)
class BandQfi:
    """Per-band QFI at one momentum; value = 4 * susceptibility."""

    value: float
    susceptibility: float
    band: int
    momentum: float
    degenerate: bool


@dataclass(frozen=True)
class HalfFillingQfi:
    """Total QFI of the half-filled probe, with divergence diagnostics."""

    total: float
    spec: SSHChainSpec
    diverged: bool
    closings: tuple  # (band, momentum) pairs where a gap closed


@dataclass(frozen=True)
class WindingResult:
    """Integer topological index with its discretization parameters."""

    index: int
    gap_indices: tuple  # Z2 class per band gap, bottom to top
    j2: float
    inter_coupling: float
    dimers_per_cell: int
    n_samples: int
    max_residual: float


def _cell_pattern(spec: SSHChainSpec) -> list:
    """Bond couplings along one cell: 1, J2, ..., 1 intra plus the J bond."""
    r = spec.dimers_per_cell
    intra = [spec.j1 if k % 2 == 0 else spec.j2 for k in range(2 * r - 1)]
    return intra + [spec.inter_coupling]


def build_bloch(spec: SSHChainSpec, p: float, bond_offset: int = 0) -> BlochHamiltonian:
    """Bloch Hamiltonian at momentum p: intra-cell bonds plus a J e^(-ip) corner.

    ``bond_offset`` rotates the bond pattern inside the cell; offset 0 puts
    the inter-cell J on the corner, offset 2 cuts the cell on a J2 bond (used
    by the topological index).
    """
    pattern = _cell_pattern(spec)
    n = spec.sites_per_cell
    h = np.zeros((n, n), dtype=complex)
    for k in range(n - 1):
        t = pattern[(k + bond_offset) % n]
        h[k, k + 1] = t
        h[k + 1, k] = t
    t = pattern[(n - 1 + bond_offset) % n]
    h[0, n - 1] = t * np.exp(-1j * p)
    h[n - 1, 0] = t * np.exp(1j * p)
    return BlochHamiltonian(momentum=float(p), matrix=h)


def chiral_operator(spec: SSHChainSpec) -> np.ndarray:
    """Sublattice operator Gamma = diag(+1, -1, ...); Gamma H Gamma = -H."""
    return np.diag([1.0 if k % 2 == 0 else -1.0 for k in range(spec.sites_per_cell)])


def _gauge_fix(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column's phase so its largest-magnitude entry is real positive.

    The pivot is the first entry within a relative tolerance of the maximum,
    so near-ties in magnitude cannot flip the gauge between nearby inputs.
    """
    out = np.empty_like(vecs)
    for c in range(vecs.shape[1]):
        mags = np.abs(vecs[:, c])
        pivot = int(np.argmax(mags >= (1.0 - 1e-8) * mags.max()))
        phase = vecs[pivot, c] / mags[pivot]
        out[:, c] = vecs[:, c] / phase
    return out


def band_structure(spec: SSHChainSpec, momenta=None) -> BandStructure:
    """Diagonalize the Bloch Hamiltonian over a momentum grid."""
    if momenta is None:
        momenta = spec.momentum_grid()
    momenta = np.atleast_1d(np.asarray(momenta, dtype=float))
    n = spec.sites_per_cell
    energies = np.empty((len(momenta), n))
    vectors = np.empty((len(momenta), n, n), dtype=complex)
    for i, p in enumerate(momenta):
        try:
            w, v = np.linalg.eigh(build_bloch(spec, p).matrix)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
            raise NumericalError(f"Bloch eigensolver failed at p = {p}") from exc
        energies[i] = w
        vectors[i] = _gauge_fix(v)
    return BandStructure(momenta=momenta, energies=energies, eigenvectors=vectors)


def band_energies_closed(j2: float, j: float, p: float) -> tuple[float, float]:
    """Closed-form positive band energies (omega1, omega2) for r = 2.

    omega_{1,2}^2 = (t -/+ sqrt(t^2 - 4c)) / 2 with t = J2^2 + J^2 + 2 and
    c = 1 + J2^2 J^2 - 2 J2 J cos p.
    """
    t = j2 * j2 + j * j + 2.0
    c = 1.0 + j2 * j2 * j * j - 2.0 * j2 * j * np.cos(p)
    disc = max(t * t - 4.0 * c, 0.0)
    d = np.sqrt(disc)
    return float(np.sqrt(max((t - d) / 2.0, 0.0))), float(np.sqrt((t + d) / 2.0))


def _closed_components(j2: float, j: float, p: float, omega: float):
    """Unnormalized eigenvector components and their analytic J2-derivatives.

    For r = 2 the eigenvector of the Bloch matrix at energy Omega has
    components (alpha, beta, gamma, delta):

        alpha = J (Omega^2 - J2^2) e^(-ip) + J2
        beta  = -Omega (J2 + J e^(-ip))
        gamma = (Omega^2 - 1) + J J2 e^(-ip)
        delta = Omega (1 + J2^2 - Omega^2)

    The J2-derivative carries the implicit dependence through Omega(J2).
    """
    phase = np.exp(-1j * p)
    t = j2 * j2 + j * j + 2.0
    c = 1.0 + j2 * j2 * j * j - 2.0 * j2 * j * np.cos(p)
    d = np.sqrt(max(t * t - 4.0 * c, 0.0))
    if d == 0.0 or omega == 0.0:
        raise NumericalError(
            f"closed-form derivative undefined at a band degeneracy (p = {p})"
        )
    dt = 2.0 * j2
    dc = 2.0 * j2 * j * j - 2.0 * j * np.cos(p)
    dd = (t * dt - 2.0 * dc) / d
    # omega^2 = (t -/+ d)/2; pick the branch matching this omega
    branch = -1.0 if abs(omega * omega - (t - d) / 2.0) < abs(omega * omega - (t + d) / 2.0) else 1.0
    domega_sq = (dt + branch * dd) / 2.0
    domega = domega_sq / (2.0 * omega)

    alpha = j * (omega * omega - j2 * j2) * phase + j2
    beta = -omega * (j2 + j * phase)
    gam = (omega * omega - 1.0) + j * j2 * phase
    delta = omega * (1.0 + j2 * j2 - omega * omega)
    v = np.array([alpha, beta, gam, delta])

    dalpha = j * (2.0 * omega * domega - 2.0 * j2) * phase + 1.0
    dbeta = -domega * (j2 + j * phase) - omega
    dgam = 2.0 * omega * domega + j * phase
    ddelta = domega * (1.0 + j2 * j2 - omega * omega) + omega * (2.0 * j2 - 2.0 * omega * domega)
    dv = np.array([dalpha, dbeta, dgam, ddelta])
    return v, dv


def closed_form_eigenvector(spec: SSHChainSpec, band: int, p: float) -> np.ndarray:
    """Normalized r = 2 Bloch eigenvector of the requested band, in closed form.

    The component formulas evaluated at energy Omega produce, through the
    chiral symmetry Gamma H Gamma = -H, the eigenvector of the partner band
    at -Omega; evaluating them at -Omega therefore yields the requested band.
    Gauge-fixed like :func:`band_structure` (largest entry real positive).
    """
    if spec.dimers_per_cell != 2:
        raise ValidationError("closed forms are available for r = 2 only")
    if not 0 <= band < 4:
        raise ValidationError("band index must be in 0..3 for r = 2")
    w1, w2 = band_energies_closed(spec.j2, spec.inter_coupling, p)
    omega = (-w2, -w1, w1, w2)[band]
    v, _ = _closed_components(spec.j2, spec.inter_coupling, p, -omega)
    v = v / np.linalg.norm(v)
    return _gauge_fix(v[:, None])[:, 0]


def band_qfi_closed(spec: SSHChainSpec, band: int, p: float) -> BandQfi:
    """Closed-form per-band QFI at momentum p for the r = 2 probe.

    The susceptibility of the normalized eigenvector follows from the
    unnormalized components v and their derivative dv as
    (<dv|dv> n - |<v|dv>|^2) / n^2 with n = <v|v>.
    """
    if spec.dimers_per_cell != 2:
        raise ValidationError("closed forms are available for r = 2 only")
    if spec.j1 != 1.0:
        raise ValidationError("closed forms assume j1 = 1")
    if not 0 <= band < 4:
        raise ValidationError("band index must be in 0..3 for r = 2")
    w1, w2 = band_energies_closed(spec.j2, spec.inter_coupling, p)
    omega = (-w2, -w1, w1, w2)[band]
    v, dv = _closed_components(spec.j2, spec.inter_coupling, p, omega)
    n = float(np.vdot(v, v).real)
    chi = float(np.vdot(dv, dv).real) / n - abs(np.vdot(v, dv)) ** 2 / n**2
    chi = max(chi, 0.0)
    gaps = (w2 - w1, w1, w1, w2 - w1)
    return BandQfi(
        value=4.0 * chi,
        susceptibility=chi,
        band=band,
        momentum=float(p),
        degenerate=gaps[band] < DEGENERACY_EPS,
    )


def band_qfi(spec: SSHChainSpec, band: int, p: float, step: float | None = None) -> BandQfi:
    """Per-band QFI in J2 at momentum p via gauge-fixed central differences.

    Works for any r. A closing of the gap to an adjacent band within 1e-8
    sets the ``degenerate`` flag (the value there is unreliable and large).
    """
    n_bands = spec.sites_per_cell
    if not 0 <= band < n_bands:
        raise ValidationError(f"band index must be in 0..{n_bands - 1}")
    if step is None:
        step = 1e-6 * max(1.0, abs(spec.j2))
    if step <= 0:
        raise ValidationError("step must be positive")
    from dataclasses import replace

    def vector(j2):
        w, v = np.linalg.eigh(build_bloch(replace(spec, j2=j2), p).matrix)
        return w, v[:, band]

    w0, v0 = vector(spec.j2)
    _, vp = vector(spec.j2 + step)
    _, vm = vector(spec.j2 - step)
    for vv in (vp, vm):
        ph = np.vdot(v0, vv)
        if abs(ph) < 1e-12:
            raise NumericalError(
                f"eigenvector branch lost at p = {p}, band {band}: "
                "perturbed state orthogonal to the reference"
            )
    vp = vp * (np.conj(np.vdot(v0, vp)) / abs(np.vdot(v0, vp)))
    vm = vm * (np.conj(np.vdot(v0, vm)) / abs(np.vdot(v0, vm)))
    dv = (vp - vm) / (2.0 * step)
    chi = float((np.vdot(dv, dv) - abs(np.vdot(v0, dv)) ** 2).real)
    chi = max(chi, 0.0)
    gap = np.inf
    if band > 0:
        gap = min(gap, w0[band] - w0[band - 1])
    if band < n_bands - 1:
        gap = min(gap, w0[band + 1] - w0[band])
    return BandQfi(
        value=4.0 * chi,
        susceptibility=chi,
        band=band,
        momentum=float(p),
        degenerate=gap < DEGENERACY_EPS,
    )


def half_filling_qfi(spec: SSHChainSpec, step: float | None = None) -> HalfFillingQfi:
    """Total QFI of the half-filled probe: occupied bands summed over p_k.

    Momenta where a gap closes are flagged (the QFI diverges at the phase
    boundaries) but still included in the total.
    """
    if spec.n_cells < 2:
        raise ValidationError("need at least 2 cells for the momentum sum")
    r = spec.dimers_per_cell
    total = 0.0
    closings = []
    for p in spec.momentum_grid():
        for band in range(r):
            result = band_qfi(spec, band, p, step=step)
            total += result.value
            if result.degenerate:
                closings.append((band, float(p)))
    return HalfFillingQfi(
        total=total,
        spec=spec,
        diverged=bool(closings),
        closings=tuple(closings),
    )


def _zak_phases(spec: SSHChainSpec, n_samples: int, bond_offset: int) -> np.ndarray:
    """Wilson-loop Zak phase of every band over the Brillouin zone."""
    momenta = np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False)
    n = spec.sites_per_cell
    vecs = []
    for p in momenta:
        w, v = np.linalg.eigh(build_bloch(spec, p, bond_offset=bond_offset).matrix)
        gaps = w[1:] - w[:-1]
        if np.min(gaps) < DEGENERACY_EPS:
            closed = momenta[len(vecs)] if len(vecs) < len(momenta) else p
            raise NumericalError(
                f"topological index undefined: band gap closes at p = {closed:.6f}"
            )
        vecs.append(v)
    zaks = np.empty(n)
    for band in range(n):
        prod = 1.0 + 0.0j
        for i in range(n_samples):
            prod *= np.vdot(vecs[i][:, band], vecs[(i + 1) % n_samples][:, band])
        zaks[band] = -np.angle(prod)
    return zaks


def winding_number(spec: SSHChainSpec, n_samples: int = 401) -> WindingResult:
    """Integer topological index of the gapped probe.

    Computed from Wilson-loop Zak phases: each band gap contributes the
    parity of the accumulated Zak phase below it in units of pi, and the
    index is the sum over the 2r - 1 gaps. Quantization requires an
    inversion-symmetric unit cell, so the cell is cut on a J2 bond for
    r = 2 (which makes the index count the protected edge-state pairs of the
    J2-cut open chain) and on the standard J bond otherwise. Raises when a
    gap closes at a sampled momentum or when any accumulated phase fails to
    quantize within 0.05 of an integer multiple of pi.
    """
    if n_samples < 16:
        raise ValidationError("need at least 16 momentum samples")
    offset = 2 if spec.dimers_per_cell == 2 else 0
    zaks = _zak_phases(spec, n_samples, bond_offset=offset)
    n = spec.sites_per_cell
    gap_indices = []
    max_residual = 0.0
    for gap in range(1, n):
        accumulated = float(np.sum(zaks[:gap])) / np.pi
        nearest = round(accumulated)
        # the Wilson loop fixes the phase sum only mod 2
        residual = abs(accumulated - nearest)
        alt = abs(abs(accumulated - nearest) - 2.0)
        residual = min(residual, alt)
        max_residual = max(max_residual, residual)
        if residual > RESIDUAL_TOL:
            raise NumericalError(
                f"Zak phase below gap {gap} not quantized: {accumulated:.4f} pi "
                f"(residual {residual:.3f})"
            )
        gap_indices.append(nearest % 2)
    return WindingResult(
        index=int(sum(gap_indices)),
        gap_indices=tuple(gap_indices),
        j2=spec.j2,
        inter_coupling=spec.inter_coupling,
        dimers_per_cell=spec.dimers_per_cell,
        n_samples=n_samples,
        max_residual=max_residual,
    )


def minimum_gap(spec: SSHChainSpec, j: float, n_momenta: int = 401) -> float:
    """Smallest adjacent-band gap over the Brillouin zone at inter-coupling j."""
    from dataclasses import replace

    bands = band_structure(
        replace(spec, inter_coupling=j),
        np.linspace(-np.pi, np.pi, n_momenta),
    )
    return bands.min_gap()


def find_gap_closings(
    spec: SSHChainSpec,
    j_range: tuple = (0.05, 4.0),
    n_scan: int = 200,
    n_momenta: int = 201,
    gap_tolerance: float = 1e-6,
) -> tuple:
    """Inter-coupling values J where some band gap closes.

    Scans the minimum gap over a J grid and refines each local minimum by
    bounded scalar minimization; a closing is reported when the refined
    minimum gap falls below ``gap_tolerance``.
    """
    lo, hi = j_range
    if not (0 < lo < hi):
        raise ValidationError(f"invalid J range {j_range}")
    grid = np.linspace(lo, hi, n_scan)
    gaps = np.array([minimum_gap(spec, j, n_momenta) for j in grid])
    closings = []
    for i in range(1, n_scan - 1):
        if gaps[i] <= gaps[i - 1] and gaps[i] <= gaps[i + 1]:
            res = minimize_scalar(
                lambda j: minimum_gap(spec, j, n_momenta),
                bounds=(grid[i - 1], grid[i + 1]),
                method="bounded",
                options={"xatol": 1e-8},
            )
            if res.fun < gap_tolerance:
                closings.append(float(res.x))
    merged = []
    for j in sorted(closings):
        if merged and abs(j - merged[-1]) < 1e-6:
            continue
        merged.append(j)
    return tuple(merged)
