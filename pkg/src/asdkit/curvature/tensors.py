"""Finite-difference curvature of a metric chart.

Metric jets (g, dg, ddg) come from central differences at steps h and 2h,
combined by Richardson extrapolation. The Riemann tensor is assembled from
the jets directly,

    R_ijkl = 1/2 (g_il,jk + g_jk,il - g_ik,jl - g_jl,ik)
             + g_mn (G^m_jk G^n_il - G^m_jl G^n_ik),

with the sign chosen so that the unit round sphere has R_ijij > 0 and s = 12.
Repeating the extrapolation with steps 2h and 4h gives the reported error
estimate ``delta_fd``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from asdkit.curvature.chart import MetricChart
from asdkit.errors import DomainError

EPS = np.finfo(float).eps
STEP_FACTOR = EPS ** (1 / 6)
PAIRS = list(itertools.combinations(range(4), 2))
# stencil for one step size: center, +-e_k, and the four corners for each pair
_UNIT = [np.zeros(4)]
for _k in range(4):
    for _s in (1, -1):
        e = np.zeros(4)
        e[_k] = _s
        _UNIT.append(e)
for _i, _j in PAIRS:
    for _si, _sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        e = np.zeros(4)
        e[_i], e[_j] = _si, _sj
        _UNIT.append(e)
UNIT_STENCIL = np.array(_UNIT)  # (33, 4)


def step_size(chart: MetricChart) -> float:
    return chart.scale * STEP_FACTOR


def _plain_jets(G: np.ndarray, h: float):
    """Central-difference jets from metric values on the unit stencil scaled by ``h``.

    ``G`` has shape (N, 33, 4, 4) in UNIT_STENCIL order.
    """
    g0 = G[:, 0]
    N = G.shape[0]
    dg = np.empty((N, 4, 4, 4))
    ddg = np.empty((N, 4, 4, 4, 4))
    for k in range(4):
        gp, gm = G[:, 1 + 2 * k], G[:, 2 + 2 * k]
        dg[:, k] = (gp - gm) / (2 * h)
        ddg[:, k, k] = (gp - 2 * g0 + gm) / (h * h)
    for p, (i, j) in enumerate(PAIRS):
        base = 9 + 4 * p
        mixed = (G[:, base] - G[:, base + 1] - G[:, base + 2] + G[:, base + 3]) / (4 * h * h)
        ddg[:, i, j] = mixed
        ddg[:, j, i] = mixed
    return g0, dg, ddg


def _eval_stencil(chart: MetricChart, X: np.ndarray, steps: list[float]) -> list[np.ndarray]:
    offsets = np.concatenate([UNIT_STENCIL * s for s in steps])
    P = X[:, None, :] + offsets[None, :, :]
    G = chart.evaluator(P.reshape(-1, 4)).reshape(X.shape[0], len(offsets), 4, 4)
    if not np.all(np.isfinite(G)):
        raise DomainError(f"{chart.name}: non-finite metric on the stencil")
    n = len(UNIT_STENCIL)
    return [G[:, i * n:(i + 1) * n] for i in range(len(steps))]


def metric_jets(chart: MetricChart, X: np.ndarray, with_error: bool = False):
    """Richardson-extrapolated (g, dg, ddg) at points ``X`` (N, 4).

    With ``with_error`` also returns the jets extrapolated from steps 2h, 4h.
    ``dg[n, k, i, j] = d_k g_ij`` and ``ddg[n, k, l, i, j] = d_k d_l g_ij``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    h = step_size(chart)
    steps = [h, 2 * h, 4 * h] if with_error else [h, 2 * h]
    Gs = _eval_stencil(chart, X, steps)
    jets = [_plain_jets(G, s) for G, s in zip(Gs, steps)]

    def richardson(a, b):
        return tuple(x if i == 0 else (4 * x - y) / 3 for i, (x, y) in enumerate(zip(a, b)))

    fine = richardson(jets[0], jets[1])
    if not with_error:
        return fine
    return fine, richardson(jets[1], jets[2])


def riemann_from_jets(g, dg, ddg):
    """All-lower Riemann tensor, Christoffel symbols and inverse metric from jets."""
    ginv = np.linalg.inv(g)
    # first kind: Gam1[n, k, i, j] = 1/2 (d_i g_kj + d_j g_ki - d_k g_ij)
    d_i_gkj = np.einsum("nikj->nkij", dg)
    d_j_gki = np.einsum("njki->nkij", dg)
    Gam1 = 0.5 * (d_i_gkj + d_j_gki - dg)
    Gam2 = np.einsum("nmk,nkij->nmij", ginv, Gam1)
    # ddg[n, a, b, i, j] = d_a d_b g_ij
    t1 = np.einsum("njkil->nijkl", ddg)   # d_j d_k g_il
    t2 = np.einsum("niljk->nijkl", ddg)   # d_i d_l g_jk
    t3 = np.einsum("nikjl->nijkl", ddg)   # d_i d_k g_jl
    t4 = np.einsum("njlik->nijkl", ddg)   # d_j d_l g_ik
    lowered = np.einsum("nmp,npil->nmil", g, Gam2)      # g_mn Gamma^n_il
    quad = (np.einsum("nmjk,nmil->nijkl", Gam2, lowered)
            - np.einsum("nmjl,nmik->nijkl", Gam2, lowered))
    R = 0.5 * (t1 + t2 - t3 - t4) + quad
    return R, Gam2, ginv


@dataclass
class FullCurvature:
    point: np.ndarray
    metric: np.ndarray
    riemann: np.ndarray        # R_ijkl, coordinate components
    ricci: np.ndarray
    scalar: float
    christoffel: np.ndarray    # Gamma^m_ij
    frame: np.ndarray          # columns: orthonormal frame vectors in coordinates
    riemann_orthonormal: np.ndarray
    delta_fd: float

    def symmetry_defects(self) -> dict[str, float]:
        R = self.riemann_orthonormal
        return {
            "antisym_12": float(np.max(np.abs(R + np.swapaxes(R, 0, 1)))),
            "antisym_34": float(np.max(np.abs(R + np.swapaxes(R, 2, 3)))),
            "pair_swap": float(np.max(np.abs(R - np.transpose(R, (2, 3, 0, 1))))),
            "bianchi": float(np.max(np.abs(R + np.transpose(R, (0, 2, 3, 1))
                                           + np.transpose(R, (0, 3, 1, 2))))),
        }


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Frame matrices E (N, 4, 4) with E^T g E = I and det E > 0 (Gram-Schmidt via Cholesky)."""
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise DomainError("metric not positive definite") from exc
    return np.swapaxes(np.linalg.inv(L), -1, -2)


def to_frame(R: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Components R(E_a, E_b, E_c, E_d), one index at a time."""
    R = np.einsum("nijkl,nia->najkl", R, E)
    R = np.einsum("najkl,njb->nabkl", R, E)
    R = np.einsum("nabkl,nkc->nabcl", R, E)
    return np.einsum("nabcl,nld->nabcd", R, E)


def curvature_batch(chart: MetricChart, X: np.ndarray, with_error: bool = False) -> dict:
    """Vectorised curvature at points ``X`` (N, 4); returns a dict of arrays."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = metric_jets(chart, X, with_error)
    fine, coarse = (out if with_error else (out, None))
    R, Gam, ginv = riemann_from_jets(*fine)
    g = fine[0]
    E = orthonormal_frame(g)
    Ro = to_frame(R, E)
    ric = np.einsum("nik,nijkl->njl", ginv, R)
    s = np.einsum("njl,njl->n", ginv, ric)
    res = {"g": g, "R": R, "gamma": Gam, "ginv": ginv, "E": E, "R_on": Ro,
           "ricci": ric, "s": s}
    if with_error:
        R2, _, _ = riemann_from_jets(*coarse)
        Ro2 = to_frame(R2, E)
        res["delta_fd"] = np.max(np.abs(Ro - Ro2), axis=(1, 2, 3, 4))
    return res


def check_stencil_domain(chart: MetricChart, X: np.ndarray, reach: float) -> None:
    X = np.atleast_2d(X)
    bad = ~chart.admissible(X, margin=reach)
    if np.any(bad):
        raise DomainError(f"{chart.name}: point(s) {X[bad][:3].tolist()} within {reach:.2e} "
                          "of the chart boundary or an excluded region")
    offsets = UNIT_STENCIL * reach
    P = X[:, None, :] + offsets[None, :, :]
    if not np.all(chart.admissible(P)):
        raise DomainError(f"{chart.name}: stencil meets an excluded region")


def curvature_at(chart: MetricChart, x) -> FullCurvature:
    """Riemann, Ricci and scalar curvature at one interior point, with error estimate."""
    x = np.asarray(x, dtype=float).reshape(1, 4)
    check_stencil_domain(chart, x, 4 * step_size(chart))
    chart.check_positive(x)
    r = curvature_batch(chart, x, with_error=True)
    return FullCurvature(
        point=x[0], metric=r["g"][0], riemann=r["R"][0], ricci=r["ricci"][0],
        scalar=float(r["s"][0]), christoffel=r["gamma"][0], frame=r["E"][0],
        riemann_orthonormal=r["R_on"][0], delta_fd=float(r["delta_fd"][0]))
