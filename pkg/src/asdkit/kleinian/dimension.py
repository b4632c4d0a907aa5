"""Box-counting dimension, the Schoen-Yau trichotomy, and crossing scans."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from asdkit.errors import NoCrossingError, ParameterError, UnreliableEstimateError
from asdkit.kleinian.coordinates import t_from_z, z_from_t
from asdkit.kleinian.groups import build_deformed, limit_points

MAX_RESIDUAL = 0.15
MIN_POINTS = 1000


@dataclass
class DimensionEstimate:
    value: float
    scales: list[float]
    fit_residual: float
    point_count: int
    counts: list[int] = field(default_factory=list)
    degenerate: bool = False

    def as_dict(self) -> dict:
        return {"value": self.value, "fit_residual": self.fit_residual,
                "point_count": self.point_count, "scales": list(self.scales),
                "counts": list(self.counts), "degenerate": self.degenerate}


def count_boxes(points: np.ndarray, delta: float) -> int:
    """Occupied cells of the ``delta`` grid anchored at the lower-left corner of the cloud."""
    x = np.floor((points.real - points.real.min()) / delta)
    y = np.floor((points.imag - points.imag.min()) / delta)
    return len(np.unique(np.stack([x, y], axis=1), axis=0))


def box_dimension(cloud, scale_min: float, scale_max: float, n_scales: int = 8,
                  min_points: int = MIN_POINTS) -> DimensionEstimate:
    """Slope of log N(delta) against log(1/delta) over a geometric range of box sizes.

    ``cloud`` is a complex array or anything with a ``points`` attribute.
    Refuses (``UnreliableEstimateError``) when the fit is poor; a cloud of
    zero diameter returns dimension 0 flagged ``degenerate``.
    """
    pts = np.asarray(getattr(cloud, "points", cloud), dtype=complex).ravel()
    pts = pts[np.isfinite(pts)]
    if n_scales < 4:
        raise ParameterError("need at least 4 scales")
    if not (0 < scale_min and scale_max / scale_min >= 10):
        raise ParameterError("scales must span at least one decade")
    if len(pts) < min_points:
        raise UnreliableEstimateError(f"{len(pts)} points; at least {min_points} required")
    scales = np.geomspace(scale_max, scale_min, n_scales)
    diam = max(np.ptp(pts.real), np.ptp(pts.imag))
    if diam == 0:
        return DimensionEstimate(0.0, scales.tolist(), 0.0, len(pts), [1] * n_scales, degenerate=True)
    counts = np.array([count_boxes(pts, d) for d in scales])
    x, y = np.log(1 / scales), np.log(counts)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    if resid >= MAX_RESIDUAL:
        raise UnreliableEstimateError(f"log-log fit residual {resid:.3f} >= {MAX_RESIDUAL}")
    value = float(np.clip(slope, 0.0, 2.0))
    return DimensionEstimate(value, scales.tolist(), resid, len(pts), counts.tolist())


def schoen_yau_sign(dim_lambda: float, n: int = 4, tol: float = 1e-9) -> int:
    """Sign of the scalar curvature from the limit-set dimension: compare with n/2 - 1."""
    if n < 3:
        raise ParameterError("n must be >= 3")
    if dim_lambda <= 0:
        raise ParameterError("the limit set must have positive dimension")
    if dim_lambda > n:
        raise ParameterError("dimension cannot exceed n")
    crit = n / 2 - 1
    if abs(dim_lambda - crit) <= tol:
        return 0
    return 1 if dim_lambda < crit else -1


@dataclass
class ScanResult:
    u0: float
    lower: float
    upper: float
    value_at_lower_end: float
    value_at_upper_end: float
    iterations: int
    history: list[tuple[float, float]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"u0": self.u0, "bracket": [self.lower, self.upper],
                "endpoint_values": [self.value_at_lower_end, self.value_at_upper_end],
                "iterations": self.iterations,
                "history": [list(h) for h in self.history]}


def to_t_picture(points: np.ndarray, t: complex) -> np.ndarray:
    """Conjugate from the z-normalization (alpha fixes 0, INF) to the t-normalization.

    The map sends 0 -> 1, INF -> -1, 1 -> t and z(t) -> -t, so the limit set is
    symmetric about the common perpendicular of the axes and stays bounded.
    """
    s = (1 - t) / (1 + t)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = (1 - s * points) / (1 + s * points)
    return q[np.isfinite(q)]


def auto_scales(points: np.ndarray, per_box: float = 10.0, max_decades: float = 2.5,
                quantile: float = 0.99) -> tuple[np.ndarray, float, float]:
    """Trim outliers and choose a box-size range adapted to the cloud.

    Keeps points within the ``quantile`` radius of the coordinatewise median;
    the largest box is half that radius and boxes shrink while they still hold
    about ``per_box`` points each, capped at ``max_decades`` decades.
    """
    c = complex(np.median(points.real), np.median(points.imag))
    radius = float(np.quantile(np.abs(points - c), quantile))
    kept = points[np.abs(points - c) <= radius]
    if radius == 0:
        return kept, 1e-3, 1e-2
    smax = radius / 2
    smin = smax
    while smin > smax / 10 ** max_decades and count_boxes(kept, smin / 1.5) < len(kept) / per_box:
        smin /= 1.5
    return kept, max(smin, smax / 10 ** max_decades), smax


NAIVE_SCALES = (1e-6, 1e-1, 9)


def group_dimension(group, depth: int, n_scales: int = 8,
                    min_points: int = MIN_POINTS) -> DimensionEstimate:
    """Box-counting estimate for a group's limit set from its depth-``depth`` orbit cloud.

    Naive groups use the whole cloud on fixed box sizes 1e-6..1e-1: their
    covers contract by roughly eps^2 per level, so only a wide range sees
    more than one level. Deformed groups are moved to the t-normalization,
    keep points first reached by words of at least ``depth // 2`` syllables,
    and use :func:`auto_scales`.
    """
    cloud = limit_points(group, depth)
    if group.construction == "naive":
        smin, smax, n = NAIVE_SCALES
        return box_dimension(cloud.points, smin, smax, n, min_points=min_points)
    pts = to_t_picture(cloud.deeper_than(depth // 2), t_from_z(group.params["z"]))
    pts, smin, smax = auto_scales(pts)
    if smax / smin < 10:
        raise UnreliableEstimateError("cloud too sparse for a one-decade scale range")
    return box_dimension(pts, smin, smax, n_scales, min_points=min_points)


def deformed_dimension(ell: int, t: complex, depth: int = 24) -> DimensionEstimate:
    return group_dimension(build_deformed(ell, z_from_t(t)), depth)


def ray_path(theta: float, r_start: float, r_end: float) -> Callable[[float], complex]:
    """t(u) = r(u) exp(i theta) with r linear in u on [-1, 1]."""
    def path(u: float) -> complex:
        r = r_start + (r_end - r_start) * (u + 1) / 2
        return complex(r * math.cos(theta), r * math.sin(theta))
    return path


def scan_dimension_crossing(ell: int, path: Callable[[float], complex], depth: int,
                            tol: float = 1e-3, *, oracle: Callable[[float], float] | None = None,
                            estimator: Callable[[complex], DimensionEstimate] | None = None,
                            ) -> ScanResult:
    """Bisect u in [-1, 1] for a zero of ``dim(t(u)) - 1``.

    ``oracle`` replaces the whole signed quantity (test seam); ``estimator``
    replaces only the dimension estimate at a given ``t``. Endpoint signs
    must differ by more than twice the fit residual at each end.
    """
    if oracle is not None:
        def signed(u):
            return float(oracle(u)), 0.0
    else:
        est = estimator or (lambda t: deformed_dimension(ell, t, depth))

        def signed(u):
            e = est(path(u))
            return e.value - 1.0, e.fit_residual

    lo, hi = -1.0, 1.0
    f_lo, r_lo = signed(lo)
    f_hi, r_hi = signed(hi)
    if f_lo * f_hi >= 0:
        raise NoCrossingError(f"endpoint values {f_lo:+.4f}, {f_hi:+.4f} share a sign")
    if abs(f_lo) <= 2 * r_lo or abs(f_hi) <= 2 * r_hi:
        raise NoCrossingError("an endpoint lies within twice its fit residual of the crossing")
    ends = (f_lo, f_hi)
    history = [(lo, f_lo), (hi, f_hi)]
    it = 0
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        f_mid, _ = signed(mid)
        history.append((mid, f_mid))
        it += 1
        if f_mid == 0:
            lo = hi = mid
            break
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return ScanResult(0.5 * (lo + hi), lo, hi, ends[0], ends[1], it, history)
