"""Decay rate of an asymptotically flat metric towards its flat model."""
from __future__ import annotations

import numpy as np

from asdkit.curvature.chart import MetricChart
from asdkit.errors import ParameterError, UnreliableEstimateError

EPS = np.finfo(float).eps


def metric_deviation(g: np.ndarray, g0: np.ndarray) -> np.ndarray:
    """Largest |eigenvalue| of g0^{-1/2} g g0^{-1/2} - I, a frame-independent sup-norm."""
    w, U = np.linalg.eigh(g0)
    s = U / np.sqrt(w)[..., None, :]           # columns scaled: g0^{-1/2} up to rotation
    m = np.swapaxes(s, -1, -2) @ g @ s
    return np.max(np.abs(np.linalg.eigvalsh(m) - 1), axis=-1)


def sphere_deviation(chart: MetricChart, radius: float, n: int = 64, seed: int = 0) -> float:
    if chart.flat_model is None or chart.radial_sampler is None:
        raise ParameterError(f"{chart.name} has no asymptotic flat model")
    X = chart.radial_sampler(radius, n, np.random.default_rng(seed))
    return float(np.max(metric_deviation(chart(X), chart.flat_model(X))))


def falloff_exponent(chart: MetricChart, radii, n: int = 64, seed: int = 0) -> float:
    """Least-squares slope of log sup|g - g_flat| against log radius.

    Deviations are measured relative to the flat model on spheres of the
    given radii, sampled by the chart's radial sampler.
    """
    r = np.asarray(radii, dtype=float)
    if len(r) < 2 or np.any(np.diff(r) <= 0):
        raise ParameterError("radii must be strictly increasing (at least two)")
    if r[-1] / r[0] < 10:
        raise ParameterError("radii must span at least one decade")
    dev = np.array([sphere_deviation(chart, float(x), n, seed) for x in r])
    if dev[-1] < 10 * EPS:
        raise UnreliableEstimateError(f"deviation {dev[-1]:.1e} at the largest radius is at "
                                      "machine precision; no exponent can be fitted")
    slope, _ = np.polyfit(np.log(r), np.log(dev), 1)
    return float(slope)
