"""Fringe extraction and cross-route comparison of momentum distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import find_peaks

from .core import MomentumDistribution, NormConvention

__all__ = [
    "FringeReport",
    "GridMismatchError",
    "extract_fringes",
    "compare_routes",
    "smooth_density",
]


class GridMismatchError(ValueError):
    """Momentum grids overlap too little to compare."""


@dataclass(frozen=True)
class FringeReport:
    """Positions and contrast of interference fringes in one region.

    ``visibility`` is (I_max - I_min)/(I_max + I_min) averaged over adjacent
    extremum pairs; ``mean_spacing`` averages consecutive same-type extremum
    separations. Both are NaN when fewer than two extrema were found (an
    empty report, not an error).
    """

    minima: np.ndarray
    maxima: np.ndarray
    mean_spacing: float
    visibility: float
    region: tuple[float, float]
    minima_values: np.ndarray = field(default_factory=lambda: np.array([]))
    maxima_values: np.ndarray = field(default_factory=lambda: np.array([]))

    @property
    def n_fringes(self) -> int:
        return len(self.minima)

    def is_empty(self) -> bool:
        return len(self.minima) + len(self.maxima) < 2


def smooth_density(dist: MomentumDistribution, width_steps: float = 1.0
                   ) -> MomentumDistribution:
    """Optional Gaussian smoothing (kernel width in grid steps).

    Off by default everywhere; intended for noisy sampled spectra only.
    """
    p = dist.p_grid
    kernel_half = int(math.ceil(4.0 * width_steps))
    offs = np.arange(-kernel_half, kernel_half + 1)
    kern = np.exp(-0.5 * (offs / width_steps) ** 2)
    kern /= kern.sum()
    dens = np.convolve(np.pad(dist.density, kernel_half, mode="edge"), kern,
                       mode="valid")
    return MomentumDistribution(p, dens, NormConvention.RAW, dict(dist.meta))


def _refine_quadratic(p: np.ndarray, d: np.ndarray, idx: int) -> tuple[float, float]:
    """Vertex of the parabola fitted through +-2 grid points around idx."""
    lo = max(idx - 2, 0)
    hi = min(idx + 3, len(p))
    x = p[lo:hi] - p[idx]
    y = d[lo:hi]
    a, b, c = np.polyfit(x, y, 2)
    if a == 0.0:
        return float(p[idx]), float(d[idx])
    xv = -b / (2.0 * a)
    # a runaway vertex means the quadratic is a bad local model; keep the node
    if abs(xv) > (p[min(idx + 1, len(p) - 1)] - p[max(idx - 1, 0)]):
        return float(p[idx]), float(d[idx])
    return float(p[idx] + xv), float(a * xv * xv + b * xv + c)


def extract_fringes(
    dist: MomentumDistribution, region: tuple[float, float] | None = None
) -> FringeReport:
    """Locate fringe extrema inside ``region`` (defaults to the whole grid).

    Extrema are detected on the raw samples, filtered by prominence
    (discarding features below 1e-3 of the regional peak), forced to
    alternate, and refined by a local quadratic fit over +-2 grid points.
    """
    p_all = dist.p_grid
    if region is None:
        region = (float(p_all[0]), float(p_all[-1]))
    lo, hi = region
    mask = (p_all >= lo) & (p_all <= hi)
    if mask.sum() < 5:
        raise ValueError(f"region {region} contains fewer than 5 grid points")
    p = p_all[mask]
    d = dist.density[mask]
    peak = float(np.max(d))
    if peak <= 0.0:
        return FringeReport(np.array([]), np.array([]), math.nan, math.nan, region)
    prom = 1e-3 * peak

    imax, _ = find_peaks(d, prominence=prom)
    imin, _ = find_peaks(-d, prominence=prom)

    # enforce alternation: between consecutive maxima keep the deepest minimum
    events = sorted([(i, +1) for i in imax] + [(i, -1) for i in imin])
    cleaned: list[tuple[int, int]] = []
    for i, kind in events:
        if cleaned and cleaned[-1][1] == kind:
            prev_i, _ = cleaned[-1]
            better = (d[i] > d[prev_i]) if kind > 0 else (d[i] < d[prev_i])
            if better:
                cleaned[-1] = (i, kind)
        else:
            cleaned.append((i, kind))

    minima, maxima, min_vals, max_vals = [], [], [], []
    for i, kind in cleaned:
        pos, val = _refine_quadratic(p, d, i)
        if kind > 0:
            maxima.append(pos)
            max_vals.append(val)
        else:
            minima.append(pos)
            min_vals.append(val)

    vis_list = []
    for idx in range(len(cleaned) - 1):
        (i1, k1), (i2, _) = cleaned[idx], cleaned[idx + 1]
        hi_v = d[i1] if k1 > 0 else d[i2]
        lo_v = d[i2] if k1 > 0 else d[i1]
        if hi_v + lo_v > 0:
            vis_list.append((hi_v - lo_v) / (hi_v + lo_v))

    def spacing(xs: list[float]) -> float:
        return float(np.mean(np.diff(xs))) if len(xs) >= 2 else math.nan

    mean_spacing = spacing(minima) if len(minima) >= 2 else spacing(maxima)
    visibility = float(np.mean(vis_list)) if vis_list else math.nan
    return FringeReport(
        np.array(minima),
        np.array(maxima),
        mean_spacing,
        visibility,
        region,
        np.array(min_vals),
        np.array(max_vals),
    )


def compare_routes(
    a: MomentumDistribution, b: MomentumDistribution
) -> tuple[float, float]:
    """L1 distance and mean matched-minima displacement between two spectra.

    Both inputs must be unit-integral normalized; ``b`` is resampled onto
    ``a``'s grid with a cubic spline over the overlapping support.
    """
    for name, dist in (("a", a), ("b", b)):
        if dist.norm_convention is not NormConvention.UNIT_INTEGRAL:
            raise ValueError(f"distribution {name} must be unit-integral normalized")
    lo = max(a.p_grid[0], b.p_grid[0])
    hi = min(a.p_grid[-1], b.p_grid[-1])
    span_a = a.p_grid[-1] - a.p_grid[0]
    if hi - lo < 0.9 * span_a:
        raise GridMismatchError(
            f"grids overlap over [{lo}, {hi}], less than 90% of a's support"
        )
    mask = (a.p_grid >= lo) & (a.p_grid <= hi)
    p = a.p_grid[mask]
    b_on_a = CubicSpline(b.p_grid, b.density)(p)
    l1 = float(np.trapezoid(np.abs(a.density[mask] - b_on_a), p))

    rep_a = extract_fringes(a, (float(lo), float(hi)))
    rep_b = extract_fringes(
        MomentumDistribution(p, np.clip(b_on_a, 0.0, None), NormConvention.RAW,
                             dict(b.meta)),
        (float(lo), float(hi)),
    )
    if rep_a.n_fringes == 0 or rep_b.n_fringes == 0:
        return l1, math.nan
    # mutual nearest-neighbor matching; unmatched minima (washed-out fringes
    # on the broader route) are excluded rather than paired with far ones
    cap = 0.75 * rep_a.mean_spacing if np.isfinite(rep_a.mean_spacing) else np.inf
    shifts = []
    for i, m in enumerate(rep_a.minima):
        j = int(np.argmin(np.abs(rep_b.minima - m)))
        back = int(np.argmin(np.abs(rep_a.minima - rep_b.minima[j])))
        d = abs(rep_b.minima[j] - m)
        if back == i and d <= cap:
            shifts.append(d)
    if not shifts:
        return l1, math.nan
    return l1, float(np.mean(shifts))
