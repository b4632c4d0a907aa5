"""Catalog of explicit metric charts.

Every constructor returns a :class:`MetricChart`. Compact examples that need
more than one chart also have an ``*_atlas`` companion returning
``[(chart, weight), ...]`` pairs whose weights sum to one on the manifold.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from asdkit.curvature.chart import MetricChart, diag_metric
from asdkit.errors import DomainError, ParameterError

TWO_PI = 2 * math.pi


def euclidean(half_width: float = 10.0) -> MetricChart:
    def ev(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(4), x.shape[:-1] + (4, 4)).copy()
    return MetricChart(ev, (-half_width,) * 4, (half_width,) * 4, name="euclidean")


def flat_torus() -> MetricChart:
    """The square torus R^4 / (2 pi Z)^4 on its fundamental domain [0, 2 pi)^4."""
    chart = euclidean()
    return MetricChart(chart.evaluator, (0.0,) * 4, (TWO_PI,) * 4, name="flat_torus")


def round_s4(radius: float = 1.0, half_width: float = 3.5) -> MetricChart:
    """Stereographic chart: g = 4 R^4 delta / (R^2 + |x|^2)^2, box |x_k| <= half_width * R."""
    if not radius > 0:
        raise ParameterError("radius must be positive")
    R = float(radius)

    def ev(x):
        x = np.asarray(x, dtype=float)
        f = 4 * R ** 4 / (R ** 2 + np.sum(x * x, axis=-1)) ** 2
        return f[..., None, None] * np.eye(4)
    w = half_width * R
    return MetricChart(ev, (-w,) * 4, (w,) * 4, name=f"s4:r={R:g}", scale=R,
                       meta={"radius": R, "compact": True, "quad_stretch": R})


def round_s4_atlas(radius: float = 1.0) -> list:
    """North and south stereographic charts with weights 1/(1 + (r/R)^4) in each.

    Inversion x -> R^2 x / |x|^2 is an isometry of the chart metric, so both
    charts share one evaluator; the two weights sum to one at every point.
    """
    chart = round_s4(radius)
    R = chart.scale

    def weight(x):
        return 1.0 / (1.0 + (np.sum(x * x, axis=-1) / R ** 2) ** 2)
    return [(chart, weight), (chart, weight)]


def product_s2_h2(theta_margin: float = 0.05) -> MetricChart:
    """Unit S^2 x H^2 in coordinates (theta, phi, x, y): diag(1, sin^2 theta, 1/y^2, 1/y^2)."""
    ev = diag_metric(lambda x: [np.ones(x.shape[:-1]), np.sin(x[..., 0]) ** 2,
                                1 / x[..., 3] ** 2, 1 / x[..., 3] ** 2])
    return MetricChart(ev, (theta_margin, -math.pi, -3.0, 0.2), (math.pi - theta_margin, math.pi, 3.0, 3.0),
                       name="s2h2", scale=0.5)


def hyperbolic4(y_min: float = 0.5, y_max: float = 2.0, half_width: float = 1.0) -> MetricChart:
    """Upper half-space model of H^4 (s = -12) on a bounded box."""
    def ev(x):
        x = np.asarray(x, dtype=float)
        return (1 / x[..., 3] ** 2)[..., None, None] * np.eye(4)
    return MetricChart(ev, (-half_width, -half_width, -half_width, y_min),
                       (half_width, half_width, half_width, y_max), name="h4", scale=y_min,
                       meta={"compact": False})


def _fs_eval(x):
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)[..., None, None]
    jx = np.stack([-x[..., 1], x[..., 0], -x[..., 3], x[..., 2]], axis=-1)
    outer = x[..., :, None] * x[..., None, :] + jx[..., :, None] * jx[..., None, :]
    return np.eye(4) / (1 + r2) - outer / (1 + r2) ** 2


def fubini_study(half_width: float = 6.0) -> MetricChart:
    """Affine chart (z1, z2) = (x1 + i x2, x3 + i x4) of CP^2; s = 24, complex orientation."""
    return MetricChart(_fs_eval, (-half_width,) * 4, (half_width,) * 4, name="fs",
                       meta={"compact": True, "quad_stretch": 1.0, "sample_lo": (-2.0,) * 4, "sample_hi": (2.0,) * 4})


def fubini_study_atlas(half_width: float = 6.0) -> list:
    """The three standard affine charts with weights |Z_i|^4 / sum_j |Z_j|^4.

    The charts are isometric to one another so one evaluator serves all three.
    """
    chart = fubini_study(half_width)

    def weight(x):
        a = x[..., 0] ** 2 + x[..., 1] ** 2
        b = x[..., 2] ** 2 + x[..., 3] ** 2
        return 1.0 / (1.0 + a * a + b * b)
    return [(chart, weight)] * 3


# ---------------------------------------------------------------- Gibbons-Hawking

@dataclass(frozen=True)
class GibbonsHawkingSpec:
    """Monopole positions (0, 0, z_j) on the x3-axis; psi has period ``fiber_period``."""
    centers: tuple[float, ...]
    fiber_period: float = 4 * math.pi
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        c = tuple(float(z) for z in self.centers)
        object.__setattr__(self, "centers", c)
        if len(c) < 1:
            raise ParameterError("need at least one center")
        if len(set(c)) != len(c):
            raise ParameterError("centers must be distinct")

    @property
    def ell(self) -> int:
        return len(self.centers)

    @property
    def centroid(self) -> float:
        return float(np.mean(self.centers))


def gh_potential(spec: GibbonsHawkingSpec, x: np.ndarray) -> np.ndarray:
    """V = sum 1/(2 rho_j) at points x (..., 3)."""
    return sum(0.5 / _rho(x, z) for z in spec.centers)


def gh_potential_gradient(spec: GibbonsHawkingSpec, x: np.ndarray) -> np.ndarray:
    out = np.zeros(x.shape)
    for z in spec.centers:
        d = x - np.array([0.0, 0.0, z])
        out -= d / (2 * _rho(x, z)[..., None] ** 3)
    return out


def gh_connection(spec: GibbonsHawkingSpec, x: np.ndarray) -> np.ndarray:
    """Cartesian components of A = sum (1/2)(x3 - z_j)/rho_j dphi."""
    coef = sum(0.5 * (x[..., 2] - z) / _rho(x, z) for z in spec.centers)
    return _dphi(x) * coef[..., None]


def _rho(x, z):
    return np.sqrt(x[..., 0] ** 2 + x[..., 1] ** 2 + (x[..., 2] - z) ** 2)


def _dphi(x):
    s2 = x[..., 0] ** 2 + x[..., 1] ** 2
    return np.stack([-x[..., 1] / s2, x[..., 0] / s2, np.zeros(x.shape[:-1])], axis=-1)


def _gh_metric(V, A):
    g = np.zeros(V.shape + (4, 4))
    g[..., :3, :3] = V[..., None, None] * np.eye(3) + A[..., :, None] * A[..., None, :] / V[..., None, None]
    g[..., :3, 3] = A / V[..., None]
    g[..., 3, :3] = A / V[..., None]
    g[..., 3, 3] = 1 / V
    return g


# orientation in which W+ vanishes, fixed by the curvature computation
GH_ASD_ORIENTATION = 1
LEBRUN_ASD_ORIENTATION = -1


def gibbons_hawking(spec: GibbonsHawkingSpec, half_width: float = 1e4, tube: float = 0.05,
                    ball: float = 0.05) -> MetricChart:
    """V (dx^2) + V^-1 (dpsi + A)^2 in coordinates (x1, x2, x3, psi).

    The axis (where A is singular) is excluded by a tube of radius ``tube``
    and the centers by balls of radius ``ball``. The chart orientation is the
    one in which W+ = 0.
    """
    centers = spec.centers
    zc = spec.centroid
    ell = spec.ell

    def ev(x):
        x = np.asarray(x, dtype=float)
        p = x[..., :3]
        return _gh_metric(gh_potential(spec, p), gh_connection(spec, p))

    def flat(x):
        x = np.asarray(x, dtype=float)
        p = x[..., :3]
        rc = _rho(p, zc)
        V0 = ell / (2 * rc)
        A0 = _dphi(p) * (0.5 * ell * (p[..., 2] - zc) / rc)[..., None]
        return _gh_metric(V0, A0)

    def excluded(x):
        x = np.asarray(x, dtype=float)
        bad = x[..., 0] ** 2 + x[..., 1] ** 2 < tube ** 2
        for z in centers:
            bad |= _rho(x[..., :3], z) < ball
        return bad

    def radial(varrho, n, rng):
        # flat-model radius: rho = varrho^2 / (2 ell) about the centroid
        rho = varrho ** 2 / (2 * ell)
        cos_t = rng.uniform(-0.8, 0.8, n)
        phi = rng.uniform(0, TWO_PI, n)
        sin_t = np.sqrt(1 - cos_t ** 2)
        psi = rng.uniform(0, spec.fiber_period, n)
        return np.stack([rho * sin_t * np.cos(phi), rho * sin_t * np.sin(phi),
                         zc + rho * cos_t, psi], axis=1)

    span = max(centers) - min(centers)
    lo_s, hi_s = -1.5 - span, 1.5 + span
    return MetricChart(
        ev, (-half_width, -half_width, -half_width, 0.0),
        (half_width, half_width, half_width, spec.fiber_period),
        name="gh:centers=" + ",".join(f"{z:g}" for z in centers),
        orientation=GH_ASD_ORIENTATION, scale=1.0, exclusion=excluded, flat_model=flat,
        radial_sampler=radial,
        meta={"compact": False, "sample_lo": (lo_s, lo_s, zc + lo_s, 0.0),
              "sample_hi": (hi_s, hi_s, zc + hi_s, spec.fiber_period),
              "fiber_period": spec.fiber_period})


def check_gh_connection(spec: GibbonsHawkingSpec, points: np.ndarray, h: float = 1e-5) -> float:
    """max |curl A - grad V| at ``points`` (N, 3), with curl A by central differences.

    This is the Cartesian form of dA = *dV.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    J = np.empty((len(P), 3, 3))   # J[n, i, k] = d_k A_i
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        J[:, :, k] = (gh_connection(spec, P + e) - gh_connection(spec, P - e)) / (2 * h)
    curl = np.stack([J[:, 2, 1] - J[:, 1, 2], J[:, 0, 2] - J[:, 2, 0], J[:, 1, 0] - J[:, 0, 1]], axis=1)
    return float(np.max(np.abs(curl - gh_potential_gradient(spec, P))))


# ---------------------------------------------------------------- scalar-flat Kaehler metrics on O(-ell)

@dataclass(frozen=True)
class LeBrunSpec:
    ell: int

    def __post_init__(self):
        if int(self.ell) != self.ell or self.ell < 1:
            raise ParameterError("ell must be an integer >= 1")


def lebrun_f(ell: int, varrho):
    r2 = np.asarray(varrho, dtype=float) ** 2
    return 1 + (ell - 2) / r2 - (ell - 1) / (r2 * r2)


def _su2_metric(F_of_rho):
    """dr^2/F + (r^2/4)[dtheta^2 + sin^2 theta dphi^2 + F (dpsi + cos theta dphi)^2]."""
    def ev(x):
        x = np.asarray(x, dtype=float)
        r, th = x[..., 0], x[..., 1]
        F = F_of_rho(r)
        q = r * r / 4
        c, s = np.cos(th), np.sin(th)
        g = np.zeros(x.shape[:-1] + (4, 4))
        g[..., 0, 0] = 1 / F
        g[..., 1, 1] = q
        g[..., 2, 2] = q * (s * s + F * c * c)
        g[..., 3, 3] = q * F
        g[..., 2, 3] = g[..., 3, 2] = q * F * c
        return g
    return ev


def flat_polar() -> MetricChart:
    """Euclidean R^4 in the same Euler-angle coordinates (F = 1)."""
    return MetricChart(_su2_metric(lambda r: np.ones_like(r)), (0.5, 0.05, -math.pi, 0.0),
                       (200.0, math.pi - 0.05, math.pi, 4 * math.pi), name="flat_polar")


@lru_cache(maxsize=1)
def _check_euler_convention() -> float:
    # curvature of the F = 1 reference chart must vanish, or the sigma conventions are off
    from asdkit.curvature.tensors import curvature_at
    fc = curvature_at(flat_polar(), [1.7, 1.1, 0.3, 2.0])
    worst = float(np.max(np.abs(fc.riemann_orthonormal)))
    if worst > 1e-6:
        raise RuntimeError(f"Euler-angle reference chart is not flat: |Rm| = {worst:.2e}")
    return worst


def lebrun(spec: LeBrunSpec, rho_margin: float = 0.05, rho_max: float = 200.0,
           theta_margin: float = 0.05) -> MetricChart:
    """Scalar-flat Kaehler ALE metric on the line bundle O(-ell), coordinates (varrho, theta, phi, psi).

    F = 1 + (ell - 2)/varrho^2 - (ell - 1)/varrho^4 vanishes at varrho = 1,
    which is the chart's lower boundary. Oriented so that W+ = 0.
    """
    _check_euler_convention()
    ell = int(spec.ell)
    flat = flat_polar()

    def radial(varrho, n, rng):
        th = np.arccos(rng.uniform(-0.8, 0.8, n))
        return np.stack([np.full(n, float(varrho)), th, rng.uniform(-math.pi, math.pi, n),
                         rng.uniform(0, 4 * math.pi, n)], axis=1)

    return MetricChart(
        _su2_metric(lambda r: lebrun_f(ell, r)), (1.0 + rho_margin, theta_margin, -math.pi, 0.0),
        (rho_max, math.pi - theta_margin, math.pi, 4 * math.pi), name=f"lebrun:ell={ell}",
        orientation=LEBRUN_ASD_ORIENTATION, scale=1.0, flat_model=flat.evaluator,
        radial_sampler=radial,
        meta={"compact": False, "ell": ell, "sample_lo": (1.1, 0.3, -math.pi, 0.0),
              "sample_hi": (3.0, math.pi - 0.3, math.pi, 4 * math.pi)})


# ---------------------------------------------------------------- sampling and names

def generic_samples(chart: MetricChart, n: int, rng: np.random.Generator) -> np.ndarray:
    """Admissible points in the chart's region of interest (``meta`` sample box if set)."""
    from asdkit.curvature.tensors import step_size
    lo = np.asarray(chart.meta.get("sample_lo", chart.lo), dtype=float)
    hi = np.asarray(chart.meta.get("sample_hi", chart.hi), dtype=float)
    margin = 4 * step_size(chart)
    lo, hi = np.maximum(lo, chart.lo_arr + margin), np.minimum(hi, chart.hi_arr - margin)
    out, have = [], 0
    while have < n:
        x = rng.uniform(lo, hi, size=(max(4 * n, 64), 4))
        x = x[chart.admissible(x, margin)]
        out.append(x)
        have += len(x)
    return np.concatenate(out)[:n]


_NAME = re.compile(r"^([a-z0-9_]+)(?::(.*))?$")


def _parse_args(text: str) -> dict[str, str]:
    args = {}
    if not text:
        return args
    for part in re.split(r";(?=[a-z_]+=)", text):
        if "=" not in part:
            raise ParameterError(f"malformed metric argument {part!r}")
        k, v = part.split("=", 1)
        args[k.strip()] = v.strip()
    return args


def parse_centers(text: str) -> tuple[float, ...]:
    """Comma list of x3-positions; ``±a`` (or ``+-a``) stands for the pair -a, a."""
    out = []
    for tok in text.replace("+-", "±").split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            if tok.startswith("±"):
                a = float(tok[1:])
                out.extend([-a, a])
            else:
                out.append(float(tok))
        except ValueError:
            raise ParameterError(f"bad center {tok!r}") from None
    return tuple(out)


def _float_arg(args, key, default):
    try:
        return float(args.get(key, default))
    except ValueError:
        raise ParameterError(f"{key} must be a number") from None


def metric_from_name(name: str) -> MetricChart:
    """Resolve catalog names such as ``s4:r=1``, ``lebrun:ell=3``, ``gh:centers=±1``."""
    m = _NAME.match(name.strip().lower())
    if not m:
        raise ParameterError(f"unknown metric {name!r}")
    kind, args = m.group(1), _parse_args(m.group(2) or "")
    if kind in ("euclidean", "flat", "r4"):
        return euclidean()
    if kind in ("torus", "flat_torus", "t4"):
        return flat_torus()
    if kind in ("s4", "sphere"):
        return round_s4(_float_arg(args, "r", 1.0))
    if kind in ("s2h2", "s2xh2"):
        return product_s2_h2()
    if kind in ("h4", "hyperbolic"):
        return hyperbolic4()
    if kind in ("fs", "cp2", "fubini_study"):
        return fubini_study()
    if kind in ("gh", "gibbons_hawking"):
        return gibbons_hawking(GibbonsHawkingSpec(parse_centers(args.get("centers", "±1"))))
    if kind == "lebrun":
        ell = _float_arg(args, "ell", 3)
        if ell != int(ell):
            raise ParameterError("ell must be an integer")
        return lebrun(LeBrunSpec(int(ell)))
    raise ParameterError(f"unknown metric {name!r}")


def atlas_from_name(name: str) -> list:
    """Weighted atlas for compact catalog metrics; a single chart otherwise."""
    chart = metric_from_name(name)
    if chart.name.startswith("s4:"):
        return round_s4_atlas(chart.scale)
    if chart.name == "fs":
        return fubini_study_atlas()
    return [(chart, None)]


def require_positive(chart: MetricChart, n: int = 1000, seed: int = 0) -> None:
    """Raise DomainError unless g is symmetric positive-definite at ``n`` random points."""
    x = chart.sample(n, np.random.default_rng(seed))
    chart.check_positive(x)
    if not np.all(np.isfinite(chart(x))):
        raise DomainError(f"{chart.name}: non-finite metric values")
