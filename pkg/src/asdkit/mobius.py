"""Moebius transformations of the Riemann sphere, stored as det-1 matrices in SL(2,C).

Points of the sphere are plain Python complex numbers, plus the singleton
:data:`INF` for the point at infinity.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

DET_TOL = 1e-12
EQ_TOL = 1e-10
CLASS_TOL = 1e-9
MAX_ELLIPTIC_ORDER = 64


class InvalidMapError(ValueError):
    pass


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
ComplexPoint = Union[complex, _Infinity]


def is_inf(p) -> bool:
    return p is INF


def as_point(p) -> ComplexPoint:
    """Coerce numbers (and ``INF``) to a sphere point; rejects nan/inf floats."""
    if p is INF:
        return INF
    z = complex(p)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"finite point expected, got {p!r}; use INF for infinity")
    return z


@dataclass(frozen=True)
class MobiusMap:
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        a, b, c, d = (complex(v) for v in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if not all(math.isfinite(v.real) and math.isfinite(v.imag) for v in (a, b, c, d)):
            raise InvalidMapError("matrix entries must be finite")
        if abs(det) < DET_TOL:
            raise InvalidMapError(f"degenerate matrix, |det| = {abs(det):.3e}")
        s = cmath.sqrt(det)
        object.__setattr__(self, "a", a / s)
        object.__setattr__(self, "b", b / s)
        object.__setattr__(self, "c", c / s)
        object.__setattr__(self, "d", d / s)

    @classmethod
    def _unchecked(cls, a: complex, b: complex, c: complex, d: complex) -> MobiusMap:
        # products of det-1 matrices: recomputing ad - bc would cancel catastrophically
        m = object.__new__(cls)
        for k, v in zip("abcd", (a, b, c, d)):
            object.__setattr__(m, k, v)
        return m

    @classmethod
    def identity(cls) -> MobiusMap:
        return cls(1, 0, 0, 1)

    @property
    def trace(self) -> complex:
        return self.a + self.d

    def entries(self) -> tuple[complex, complex, complex, complex]:
        return self.a, self.b, self.c, self.d

    def inverse(self) -> MobiusMap:
        return MobiusMap._unchecked(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: MobiusMap) -> MobiusMap:
        return compose(self, other)

    def __call__(self, p):
        return apply(self, p)

    def __pow__(self, n: int) -> MobiusMap:
        if n < 0:
            return self.inverse() ** (-n)
        result, base = MobiusMap.identity(), self
        while n:
            if n & 1:
                result = compose(result, base)
            base = compose(base, base)
            n >>= 1
        return result

    def is_close(self, other: MobiusMap, tol: float = EQ_TOL) -> bool:
        """Equality in PSL(2,C): entrywise agreement up to a global sign."""
        x, y = self.entries(), other.entries()
        return (max(abs(p - q) for p, q in zip(x, y)) <= tol
                or max(abs(p + q) for p, q in zip(x, y)) <= tol)

    def is_identity(self, tol: float = EQ_TOL) -> bool:
        return self.is_close(MobiusMap.identity(), tol)


def compose(m1: MobiusMap, m2: MobiusMap) -> MobiusMap:
    """Matrix product ``m1 @ m2``, i.e. the map ``p -> m1(m2(p))``."""
    a1, b1, c1, d1 = m1.entries()
    a2, b2, c2, d2 = m2.entries()
    return MobiusMap._unchecked(a1 * a2 + b1 * c2, a1 * b2 + b1 * d2,
                                c1 * a2 + d1 * c2, c1 * b2 + d1 * d2)


def apply(m: MobiusMap, p) -> ComplexPoint:
    a, b, c, d = m.entries()
    if p is INF:
        return INF if c == 0 else a / c
    p = complex(p)
    den = c * p + d
    if den == 0:
        return INF
    return (a * p + b) / den


@dataclass(frozen=True)
class MobiusClass:
    kind: str  # identity | elliptic | parabolic | loxodromic
    order: int | None = None


def _elliptic_order(tr: complex) -> int | None:
    half = min(abs(tr.real) / 2.0, 1.0)
    for n in range(2, MAX_ELLIPTIC_ORDER + 1):
        for k in range(1, n):
            if math.gcd(k, n) == 1 and abs(half - abs(math.cos(math.pi * k / n))) < CLASS_TOL:
                return n
    return None


def classify(m: MobiusMap) -> MobiusClass:
    if m.is_identity():
        return MobiusClass("identity")
    tr = m.trace
    tr2 = tr * tr
    if abs(tr2 - 4) < CLASS_TOL:
        return MobiusClass("parabolic")
    if abs(tr2.imag) < CLASS_TOL and -CLASS_TOL <= tr2.real < 4:
        return MobiusClass("elliptic", _elliptic_order(tr))
    return MobiusClass("loxodromic")


def fixed_points(m: MobiusMap) -> tuple[ComplexPoint, ComplexPoint]:
    """Roots of ``c p^2 + (d - a) p - b = 0``; a vanishing ``c`` puts one root at ``INF``.

    The root taken with ``+sqrt`` of the discriminant comes first.
    """
    if m.is_identity():
        raise InvalidMapError("identity fixes every point")
    a, b, c, d = m.entries()
    scale = max(abs(a), abs(b), abs(c), abs(d))
    if abs(c) <= 1e-14 * scale:
        if abs(a - d) <= 1e-14 * scale:
            return INF, INF
        return b / (d - a), INF
    disc = cmath.sqrt((a - d) ** 2 + 4 * b * c)
    qp, qm = a - d + disc, a - d - disc
    # take the larger of the two sums and recover the other root from the product -b/c
    if abs(qp) >= abs(qm):
        if qp == 0:
            return 0j, 0j
        return qp / (2 * c), -2 * b / qp
    return -2 * b / qm, qm / (2 * c)


def from_points(p0, p_inf) -> MobiusMap:
    """A map sending 0 to ``p0`` and INF to ``p_inf``."""
    if p0 is INF and p_inf is INF:
        raise InvalidMapError("0 and INF must go to distinct points")
    if p_inf is INF:
        return MobiusMap(1, p0, 0, 1)
    if p0 is INF:
        return MobiusMap(p_inf, 1, 1, 0)
    if abs(p0 - p_inf) < DET_TOL:
        raise InvalidMapError("coincident target points")
    # w -> (p_inf w + p0) / (w + 1)
    return MobiusMap(p_inf, p0, 1, 1)


def rotation(order: int) -> MobiusMap:
    """``w -> exp(2 pi i / order) w``."""
    h = cmath.exp(1j * math.pi / order)
    return MobiusMap(h, 0, 0, 1 / h)


def elliptic_from_fixed_points(order: int, p_plus, p_minus) -> MobiusMap:
    """Elliptic map of the given order rotating by ``+2 pi / order`` about ``p_plus``.

    Built as ``M rot M^-1`` with ``M(0) = p_plus`` and ``M(INF) = p_minus``.
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    p_plus, p_minus = as_point(p_plus), as_point(p_minus)
    if p_plus is INF and p_minus is INF:
        raise InvalidMapError("fixed points coincide")
    if p_plus is not INF and p_minus is not INF and abs(p_plus - p_minus) < DET_TOL:
        raise InvalidMapError("fixed points coincide")
    M = from_points(p_plus, p_minus)
    return compose(compose(M, rotation(order)), M.inverse())
