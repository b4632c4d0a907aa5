"""Conformal rescaling, Rayleigh quotients of the Yamabe operator 6 Delta + s, and sign tests.

Delta is the positive Laplacian -div grad. In dimension four the metric
u^2 g has scalar curvature s_hat with s_hat u^3 = (6 Delta + s) u.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from asdkit.curvature.chart import MetricChart
from asdkit.curvature.quadrature import integrate_vector, as_atlas
from asdkit.curvature.tensors import (
    PAIRS, STEP_FACTOR, UNIT_STENCIL, check_stencil_domain, curvature_batch, metric_jets,
    riemann_from_jets,
)
from asdkit.errors import ParameterError
from asdkit.kleinian.dimension import MAX_RESIDUAL, DimensionEstimate, schoen_yau_sign

DEGENERATE_NORM = 1e-14


@dataclass(frozen=True)
class ScalarField:
    """A smooth function on chart coordinates; derivatives by Richardson central differences."""
    evaluator: Callable[[np.ndarray], np.ndarray]    # (..., 4) -> (...)
    name: str = "u"
    scale: float = 1.0

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(x, dtype=float)), dtype=float)

    def jets(self, X: np.ndarray, scale: Optional[float] = None):
        """(u, du, ddu) at points X (N, 4): du[n, k] = d_k u, ddu[n, k, l] = d_k d_l u."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        h = (scale or self.scale) * STEP_FACTOR
        out = []
        for step in (h, 2 * h):
            P = X[:, None, :] + step * UNIT_STENCIL[None]
            U = self(P.reshape(-1, 4)).reshape(len(X), len(UNIT_STENCIL))
            u0 = U[:, 0]
            du = np.empty((len(X), 4))
            ddu = np.empty((len(X), 4, 4))
            for k in range(4):
                up, um = U[:, 1 + 2 * k], U[:, 2 + 2 * k]
                du[:, k] = (up - um) / (2 * step)
                ddu[:, k, k] = (up - 2 * u0 + um) / step ** 2
            for p, (i, j) in enumerate(PAIRS):
                b = 9 + 4 * p
                ddu[:, i, j] = ddu[:, j, i] = (U[:, b] - U[:, b + 1] - U[:, b + 2] + U[:, b + 3]) / (4 * step ** 2)
            out.append((u0, du, ddu))
        (u, d1, dd1), (_, d2, dd2) = out
        return u, (4 * d1 - d2) / 3, (4 * dd1 - dd2) / 3

    def gradient(self, X: np.ndarray) -> np.ndarray:
        return self.jets(X)[1]


def constant_field(c: float = 1.0) -> ScalarField:
    return ScalarField(lambda x: np.full(np.shape(x)[:-1], float(c)), name=f"const={c:g}")


def s4_harmonic(radius: float = 1.0, k: int = 0) -> ScalarField:
    """First spherical harmonic X_{k+1} = 2 R x_k / (R^2 + |x|^2) in stereographic coordinates.

    The expression is the same in the north and south charts, so it can be
    used on the whole two-chart atlas.
    """
    R = float(radius)

    def ev(x):
        return 2 * R * x[..., k] / (R * R + np.sum(x * x, axis=-1))
    return ScalarField(ev, name=f"x{k + 1}", scale=R)


def random_conformal_factor(rng: np.random.Generator, amplitude: float = 0.3,
                            center: Sequence[float] = (0, 0, 0, 0), width: float = 1.0) -> ScalarField:
    """u = exp(a . sin(B (x - c) / width)) with random a, B: smooth and positive."""
    a = rng.uniform(-amplitude, amplitude, 3)
    B = rng.normal(size=(3, 4))
    c = np.asarray(center, dtype=float)

    def ev(x):
        return np.exp(np.sin((x - c) @ B.T / width) @ a)
    return ScalarField(ev, name="random", scale=width)


def conformal_rescale(chart: MetricChart, u: ScalarField, n_check: int = 256, seed: int = 0) -> MetricChart:
    """The chart for u^2 g; u is sampled on the domain and must be positive there."""
    x = chart.sample(n_check, np.random.default_rng(seed))
    vals = u(x)
    if not np.all(np.isfinite(vals)) or np.min(vals) <= 0:
        raise ParameterError(f"conformal factor {u.name} is not positive on {chart.name}")

    def ev(x):
        x = np.asarray(x, dtype=float)
        return (u(x) ** 2)[..., None, None] * chart.evaluator(x)
    return replace(chart, evaluator=ev, name=f"{chart.name}*{u.name}^2", flat_model=None,
                   radial_sampler=None)


def laplacian(chart: MetricChart, u: ScalarField, X: np.ndarray) -> np.ndarray:
    """Delta u = -(g^ij d_i d_j u - g^ij Gamma^k_ij d_k u) at points X (N, 4)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    g, dg, ddg = metric_jets(chart, X)
    _, gamma, ginv = riemann_from_jets(g, dg, ddg)
    _, du, ddu = u.jets(X, chart.scale)
    return -(np.einsum("nij,nij->n", ginv, ddu) - np.einsum("nij,nkij,nk->n", ginv, gamma, du))


def conformal_law_residual(chart: MetricChart, u: ScalarField, X: np.ndarray) -> np.ndarray:
    """|s_hat u^3 - (6 Delta u + s u)|, with s_hat from the curvature of u^2 g directly."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    check_stencil_domain(chart, X, 4 * chart.scale * STEP_FACTOR)
    hat = conformal_rescale(chart, u)
    s_hat = curvature_batch(hat, X)["s"]
    s = curvature_batch(chart, X)["s"]
    uu = u(X)
    return np.abs(s_hat * uu ** 3 - (6 * laplacian(chart, u, X) + s * uu))


def _fields_for(atlas, u) -> list[ScalarField]:
    if isinstance(u, ScalarField):
        return [u] * len(atlas)
    fields = list(u)
    if len(fields) != len(atlas):
        raise ParameterError("need one scalar field per atlas chart")
    return fields


def rayleigh_quotient(chart_or_atlas, u: Union[ScalarField, Sequence[ScalarField]],
                      resolution: int = 12, threads: int = 1) -> float:
    """Integral of (6 |du|_g^2 + s u^2) over integral of u^2, both against dmu_g.

    A negative value certifies that 6 Delta + s has a negative eigenvalue.
    For an atlas, ``u`` may be a list with one field per chart.
    """
    atlas = as_atlas(chart_or_atlas)
    fields = _fields_for(atlas, u)
    num = den = 0.0
    cache = {}
    for (chart, weight), field in zip(atlas, fields):
        key = (id(chart), id(weight), id(field))
        if key not in cache:
            def integrand(ch, X, field=field):
                r = curvature_batch(ch, X)
                uu, du, _ = field.jets(X, ch.scale)
                grad2 = np.einsum("nij,ni,nj->n", r["ginv"], du, du)
                return np.stack([6 * grad2 + r["s"] * uu ** 2, uu ** 2], axis=1)
            v, _, _, _ = integrate_vector([(chart, weight)], integrand, resolution, threads)
            cache[key] = v
        num += cache[key][0]
        den += cache[key][1]
    if abs(den) < DEGENERATE_NORM:
        raise ParameterError("test function has (numerically) zero L2 norm")
    return float(num / den)


def smoothstep(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3 - 2 * t)


def cutoff_test_function(centers: Sequence[Sequence[float]], epsilon: float) -> ScalarField:
    """0 on the (epsilon/2)-balls, 1 outside the epsilon-balls, C^1 cubic ramp between.

    The ramp is 3 tau^2 - 2 tau^3 with tau = 2 d / epsilon - 1, so the
    Euclidean gradient is at most 3 / epsilon (reached mid-annulus).
    """
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    C = np.asarray(centers, dtype=float).reshape(-1, 4)
    for i in range(len(C)):
        for j in range(i + 1, len(C)):
            if np.linalg.norm(C[i] - C[j]) < 2 * epsilon:
                raise ParameterError("cutoff balls overlap")

    def ev(x):
        x = np.asarray(x, dtype=float)
        u = np.ones(x.shape[:-1])
        for c in C:
            d = np.linalg.norm(x - c, axis=-1)
            u = u * smoothstep(2 * d / epsilon - 1)
        return u
    return ScalarField(ev, name="cutoff", scale=epsilon / 8)


def negativity_budget(volume: float, c_ball: float, epsilon: float) -> float:
    """54 C eps^2 - (Vol - C eps^4); a negative value certifies a negative Rayleigh quotient.

    Assumes s < -1, ball volumes below C eps^4 and gradient below 3 / eps.
    """
    if not (volume > 0 and c_ball > 0 and epsilon > 0):
        raise ParameterError("volume, c_ball and epsilon must be positive")
    if epsilon >= 1:
        raise ParameterError("epsilon must be < 1")
    return 54 * c_ball * epsilon ** 2 - (volume - c_ball * epsilon ** 4)


@dataclass
class SignReport:
    dimension: float
    residual: float
    sign: Union[int, str]
    rule: str

    def as_dict(self) -> dict:
        return {"dimension": self.dimension, "residual": self.residual, "sign": self.sign,
                "rule": self.rule}

    def to_json(self) -> str:
        return json.dumps({"schema": 1, **self.as_dict()}, indent=2, sort_keys=True)


def scalar_sign_from_limit_set(estimate: DimensionEstimate) -> SignReport:
    """Sign of the scalar curvature predicted from a limit-set dimension estimate (n = 4).

    Values within twice the fit residual of the critical dimension 1 are
    reported as ``"undetermined"``.
    """
    v, r = estimate.value, estimate.fit_residual
    if estimate.degenerate or not (math.isfinite(v) and math.isfinite(r)) or not (0 <= r < MAX_RESIDUAL):
        raise ParameterError("dimension estimate is not valid")
    band = 2 * r
    if abs(v - 1.0) <= band:
        return SignReport(v, r, "undetermined", f"|dim - 1| <= 2 * residual = {band:.3g}")
    sign = schoen_yau_sign(v, n=4)
    rule = "dim < 1 - 2 * residual" if sign > 0 else "dim > 1 + 2 * residual"
    return SignReport(v, r, sign, rule)


__all__ = [
    "ScalarField", "constant_field", "s4_harmonic", "random_conformal_factor", "conformal_rescale",
    "laplacian", "conformal_law_residual", "rayleigh_quotient", "cutoff_test_function",
    "negativity_budget", "SignReport", "scalar_sign_from_limit_set",
]
