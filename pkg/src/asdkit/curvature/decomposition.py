"""Splitting the curvature operator along Lambda^2 = Lambda^+ (+) Lambda^-.

The curvature operator acts on 2-forms; in an oriented orthonormal basis of
Lambda^+ followed by Lambda^- it is the symmetric 6x6 matrix

    [[W+ + s/12,  B        ],
     [B^T,        W- + s/12]]

with B carrying the trace-free Ricci tensor. It is normalized so that the
unit round sphere gives the identity.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from asdkit.curvature.chart import MetricChart
from asdkit.curvature.tensors import check_stencil_domain, curvature_batch, step_size
from asdkit.errors import ParameterError

SQRT_HALF = 1 / math.sqrt(2)
# (a, b, c, d): basis element (e^a ^ e^b +- e^c ^ e^d) / sqrt 2
_BASIS_PAIRS = [(0, 1, 2, 3), (0, 2, 3, 1), (0, 3, 1, 2)]


def two_form_basis(orientation: int = 1) -> np.ndarray:
    """Six antisymmetric 4x4 matrices: Lambda^+ then Lambda^- (unit norm)."""
    out = []
    for sign in (1, -1):
        for a, b, c, d in _BASIS_PAIRS:
            w = np.zeros((4, 4))
            w[a, b], w[b, a] = SQRT_HALF, -SQRT_HALF
            w[c, d], w[d, c] = sign * orientation * SQRT_HALF, -sign * orientation * SQRT_HALF
            out.append(w)
    return np.array(out)


def curvature_operator(R_on: np.ndarray, orientation: int = 1) -> np.ndarray:
    """6x6 operator from orthonormal-frame Riemann components (batched on axis 0)."""
    w = two_form_basis(orientation).reshape(6, 16)
    R = R_on.reshape(R_on.shape[:-4] + (16, 16))
    return 0.25 * (w @ R @ w.T)


@dataclass
class CurvatureDecomposition:
    w_plus: np.ndarray
    w_minus: np.ndarray
    b_block: np.ndarray
    scalar: float
    basis: np.ndarray
    operator: np.ndarray
    ricci_traceless: np.ndarray   # orthonormal-frame components
    orientation: int
    delta_fd: float

    def reconstruct(self) -> np.ndarray:
        c = self.scalar / 12 * np.eye(3)
        return np.block([[self.w_plus + c, self.b_block], [self.b_block.T, self.w_minus + c]])

    @property
    def norms(self) -> dict[str, float]:
        return {"s": self.scalar,
                "w_plus": float(np.linalg.norm(self.w_plus)),
                "w_minus": float(np.linalg.norm(self.w_minus)),
                "ricci0": float(np.linalg.norm(self.ricci_traceless)),
                "delta_fd": self.delta_fd}


def _split(op: np.ndarray, s: np.ndarray):
    c = (s / 12)[..., None, None] * np.eye(3)
    return op[..., :3, :3] - c, op[..., 3:, 3:] - c, op[..., :3, 3:]


def decompose_batch(chart: MetricChart, X: np.ndarray, with_error: bool = False) -> dict:
    """Vectorised decomposition; returns arrays keyed like CurvatureDecomposition fields."""
    r = curvature_batch(chart, X, with_error)
    op = curvature_operator(r["R_on"], chart.orientation)
    wp, wm, b = _split(op, r["s"])
    E = r["E"]
    ric_on = np.einsum("nij,nia,njb->nab", r["ricci"], E, E)
    ric0 = ric_on - (r["s"] / 4)[:, None, None] * np.eye(4)
    out = {"w_plus": wp, "w_minus": wm, "b_block": b, "s": r["s"], "operator": op,
           "ricci0": ric0, "g": r["g"]}
    if with_error:
        out["delta_fd"] = r["delta_fd"]
    return out


def decompose_at(chart: MetricChart, x) -> CurvatureDecomposition:
    x = np.asarray(x, dtype=float).reshape(1, 4)
    check_stencil_domain(chart, x, 4 * step_size(chart))
    chart.check_positive(x)
    d = decompose_batch(chart, x, with_error=True)
    return CurvatureDecomposition(
        w_plus=d["w_plus"][0], w_minus=d["w_minus"][0], b_block=d["b_block"][0],
        scalar=float(d["s"][0]), basis=two_form_basis(chart.orientation),
        operator=d["operator"][0], ricci_traceless=d["ricci0"][0],
        orientation=chart.orientation, delta_fd=float(d["delta_fd"][0]))


def pointwise_invariants(chart: MetricChart, X: np.ndarray, with_error: bool = False) -> dict:
    """Frobenius norms |W+|, |W-|, |r0| and s at each point (no domain checks)."""
    d = decompose_batch(chart, X, with_error)
    out = {"s": d["s"],
           "w_plus": np.linalg.norm(d["w_plus"], axis=(1, 2)),
           "w_minus": np.linalg.norm(d["w_minus"], axis=(1, 2)),
           "ricci0": np.linalg.norm(d["ricci0"], axis=(1, 2))}
    if with_error:
        out["delta_fd"] = d["delta_fd"]
    return out


def gauss_bonnet_density(inv: dict) -> np.ndarray:
    s, wp, wm, r0 = inv["s"], inv["w_plus"], inv["w_minus"], inv["ricci0"]
    return (s ** 2 / 24 + wp ** 2 + wm ** 2 - r0 ** 2 / 2) / (8 * math.pi ** 2)


def signature_density(inv: dict) -> np.ndarray:
    return (inv["w_plus"] ** 2 - inv["w_minus"] ** 2) / (12 * math.pi ** 2)


def gauss_bonnet_integrand(chart: MetricChart, x) -> float:
    """Euler-characteristic density against the Riemannian volume."""
    d = decompose_at(chart, x)
    return float(gauss_bonnet_density({k: np.asarray(v) for k, v in d.norms.items()}))


def signature_integrand(chart: MetricChart, x) -> float:
    d = decompose_at(chart, x)
    return float(signature_density({k: np.asarray(v) for k, v in d.norms.items()}))


@dataclass
class ResidualReport:
    chart: str
    orientation: int
    points: np.ndarray
    s: np.ndarray
    w_plus: np.ndarray
    w_minus: np.ndarray
    ricci0: np.ndarray
    delta_fd: np.ndarray

    def sup(self, flipped: bool = False) -> dict[str, float]:
        wp, wm = (self.w_minus, self.w_plus) if flipped else (self.w_plus, self.w_minus)
        return {"sup_w_plus": float(np.max(wp)), "sup_w_minus": float(np.max(wm)),
                "sup_s": float(np.max(np.abs(self.s))), "sup_ricci0": float(np.max(self.ricci0))}

    @property
    def sup_w_plus(self) -> float:
        return float(np.max(self.w_plus))

    @property
    def sup_w_minus(self) -> float:
        return float(np.max(self.w_minus))

    @property
    def sup_s(self) -> float:
        return float(np.max(np.abs(self.s)))

    @property
    def sup_ricci0(self) -> float:
        return float(np.max(self.ricci0))

    def as_dict(self) -> dict:
        return {"chart": self.chart, "samples": len(self.points),
                "orientation": self.orientation, **self.sup(),
                "flipped": {"orientation": -self.orientation, **self.sup(flipped=True)},
                "max_delta_fd": float(np.max(self.delta_fd))}

    def to_json(self) -> str:
        return json.dumps({"schema": 1, **self.as_dict()}, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x1", "x2", "x3", "x4", "s", "w_plus", "w_minus", "ricci0", "delta_fd"])
        for i, p in enumerate(self.points):
            w.writerow([repr(float(v)) for v in p]
                       + [repr(float(a[i])) for a in (self.s, self.w_plus, self.w_minus,
                                                      self.ricci0, self.delta_fd)])
        return buf.getvalue()


def asd_sf_residuals(chart: MetricChart, samples) -> ResidualReport:
    """Suprema of |W+|, |W-|, |s|, |r0| over ``samples``, in the chart's orientation.

    The flipped-orientation values are the same numbers with W+ and W- swapped;
    :meth:`ResidualReport.sup` returns either view.
    """
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    if X.size == 0:
        raise ParameterError("empty sample list")
    check_stencil_domain(chart, X, 4 * step_size(chart))
    chart.check_positive(X)
    inv = pointwise_invariants(chart, X, with_error=True)
    return ResidualReport(chart.name, chart.orientation, X, inv["s"], inv["w_plus"],
                          inv["w_minus"], inv["ricci0"], inv["delta_fd"])
