"""Scaling exponents from QFI-vs-size data.

Direct log-log slopes give the exponent at a fixed field; the finite-size
scaling ansatz Q = N^(beta/nu) f(N^(1/nu) (h - h_c)) is fitted by minimizing
a data-collapse cost: the mean squared deviation of each rescaled curve from
the piecewise-linear interpolant through the other curves, restricted to the
shared abscissa range and normalized by the variance of the rescaled data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ValidationError

DEFAULT_BOUNDS = ((0.5, 3.0), (0.3, 3.0))
DEFAULT_WINDOW = 0.1


@dataclass(frozen=True)
class ScalingDataset:
    """Records of (N, h, Q) grouped by system size."""

    groups: dict  # N -> (h array sorted ascending, Q array)

    @classmethod
    def from_records(cls, records) -> "ScalingDataset":
        by_n: dict[int, list] = {}
        for n, h, q in records:
            if q <= 0:
                raise ValidationError(f"QFI values must be positive (N={n}, h={h}, Q={q})")
            by_n.setdefault(int(n), []).append((float(h), float(q)))
        groups = {}
        for n, pts in by_n.items():
            pts.sort()
            hs = np.array([p[0] for p in pts])
            qs = np.array([p[1] for p in pts])
            groups[n] = (hs, qs)
        return cls(groups=groups)

    def restricted(self, h_c: float, window: float) -> "ScalingDataset":
        groups = {}
        for n, (hs, qs) in self.groups.items():
            mask = np.abs(hs - h_c) <= window
            if mask.any():
                groups[n] = (hs[mask], qs[mask])
        return ScalingDataset(groups=groups)

    @property
    def sizes(self) -> list:
        return sorted(self.groups)


@dataclass(frozen=True)
class ScalingFit:
    """Collapse-fit result for the ansatz Q = N^(beta/nu) f(N^(1/nu)(h - h_c))."""

    beta: float
    nu: float
    h_c: float
    collapse_cost: float
    beta_err: float
    nu_err: float
    on_boundary: bool
    slope_fits: dict = field(default_factory=dict)


def loglog_slope(points) -> tuple[float, float]:
    """Least-squares slope of log Q vs log N with its standard error."""
    pts = [(float(n), float(q)) for n, q in points]
    if len(pts) < 3:
        raise ValidationError("need at least 3 points for a log-log slope")
    if any(n <= 0 or q <= 0 for n, q in pts):
        raise ValidationError("log-log slope requires positive N and Q")
    x = np.log([n for n, _ in pts])
    y = np.log([q for _, q in pts])
    (slope, intercept), residuals, *_ = np.polyfit(x, y, 1, full=True)
    dof = len(pts) - 2
    rss = float(residuals[0]) if len(residuals) else 0.0
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = np.sqrt(rss / dof / sxx) if dof > 0 else 0.0
    return float(slope), float(stderr)


def collapse_cost(dataset: ScalingDataset, beta: float, nu: float, h_c: float) -> float:
    """Leave-one-group-out collapse quality; 0 is a perfect collapse.

    Infinite when the rescaled abscissas of the groups do not overlap; 0 by
    convention for a single-size dataset.
    """
    sizes = dataset.sizes
    if len(sizes) < 2:
        return 0.0
    xs, ys = {}, {}
    for n in sizes:
        hs, qs = dataset.groups[n]
        xs[n] = n ** (1.0 / nu) * (hs - h_c)
        ys[n] = qs * n ** (-beta / nu)
    lo = max(xs[n].min() for n in sizes)
    hi = min(xs[n].max() for n in sizes)
    if lo >= hi:
        return np.inf
    all_y = np.concatenate([ys[n] for n in sizes])
    var = float(all_y.var())
    if var == 0.0:
        return 0.0
    total, count = 0.0, 0
    for n in sizes:
        other_x = np.concatenate([xs[m] for m in sizes if m != n])
        other_y = np.concatenate([ys[m] for m in sizes if m != n])
        order = np.argsort(other_x)
        other_x, other_y = other_x[order], other_y[order]
        mask = (xs[n] >= lo) & (xs[n] <= hi)
        if not mask.any():
            continue
        interp = np.interp(xs[n][mask], other_x, other_y)
        total += float(np.sum((ys[n][mask] - interp) ** 2))
        count += int(mask.sum())
    if count == 0:
        return np.inf
    return total / count / var


def fit_collapse(
    dataset: ScalingDataset,
    h_c: float,
    bounds: tuple = DEFAULT_BOUNDS,
    window: float = DEFAULT_WINDOW,
    grid_points: int = 41,
) -> ScalingFit:
    """Exponents (beta, nu) minimizing the collapse cost at fixed h_c.

    Coarse grid over ``bounds`` followed by Nelder-Mead refinement from the
    best cell. Uncertainties are the half-widths of the grid region whose
    cost stays within 1.1x the minimum. The critical field is held fixed
    (it comes from the transfer-matrix condition); data outside
    |h - h_c| <= window are dropped before fitting.
    """
    data = dataset.restricted(h_c, window)
    if len(data.sizes) < 3:
        raise ValidationError("need at least 3 system sizes for a collapse fit")
    (b_lo, b_hi), (n_lo, n_hi) = bounds
    betas = np.linspace(b_lo, b_hi, grid_points)
    nus = np.linspace(n_lo, n_hi, grid_points)
    costs = np.empty((grid_points, grid_points))
    for i, b in enumerate(betas):
        for k, v in enumerate(nus):
            costs[i, k] = collapse_cost(data, b, v, h_c)
    i0, k0 = np.unravel_index(np.argmin(costs), costs.shape)
    result = minimize(
        lambda x: collapse_cost(data, x[0], x[1], h_c),
        [betas[i0], nus[k0]],
        method="Nelder-Mead",
        options={"xatol": 1e-5, "fatol": 1e-12, "maxiter": 400},
    )
    beta, nu = float(result.x[0]), float(result.x[1])
    cost_min = float(result.fun)
    region = costs <= 1.1 * cost_min
    if region.any():
        beta_err = 0.5 * float(np.ptp(betas[region.any(axis=1)])) or float(betas[1] - betas[0])
        nu_err = 0.5 * float(np.ptp(nus[region.any(axis=0)])) or float(nus[1] - nus[0])
    else:
        beta_err = float(betas[1] - betas[0])
        nu_err = float(nus[1] - nus[0])
    on_boundary = (
        beta <= b_lo + 1e-9 or beta >= b_hi - 1e-9
        or nu <= n_lo + 1e-9 or nu >= n_hi - 1e-9
    )
    slope_fits = {}
    for n in data.sizes:
        hs, qs = data.groups[n]
        peak = float(qs.max())
        slope_fits[n] = {"h_peak": float(hs[np.argmax(qs)]), "q_peak": peak}
    return ScalingFit(
        beta=beta,
        nu=nu,
        h_c=h_c,
        collapse_cost=cost_min,
        beta_err=beta_err,
        nu_err=nu_err,
        on_boundary=on_boundary,
        slope_fits=slope_fits,
    )
