"""Nested disk covers of the naive limit set and the resulting Hausdorff bound."""
from __future__ import annotations

import math
from dataclasses import dataclass

from asdkit.errors import ParameterError
from asdkit.kleinian.groups import KleinianGroup, build_naive
from asdkit.mobius import INF, MobiusMap, apply, compose


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError("disk radius must be positive and finite")

    def contains(self, p: complex, slack: float = 0.0) -> bool:
        return abs(p - self.center) <= self.radius + slack

    def contains_disk(self, other: Disk, slack: float = 1e-10) -> bool:
        return abs(other.center - self.center) + other.radius <= self.radius + slack


def _circumcircle(p1: complex, p2: complex, p3: complex) -> tuple[complex, float]:
    # center w solves |w - p_k| = const; reduce to a 2x2 complex-linear system
    a, b = p2 - p1, p3 - p1
    den = 2 * (a.real * b.imag - a.imag * b.real)
    if den == 0:
        raise ValueError("collinear points: image is a line, not a circle")
    aa, bb = abs(a) ** 2, abs(b) ** 2
    ux = (b.imag * aa - a.imag * bb) / den
    uy = (a.real * bb - b.real * aa) / den
    center = p1 + complex(ux, uy)
    return center, abs(center - p1)


def disk_image(m: MobiusMap, disk: Disk) -> Disk:
    """Exact image of a closed disk; raises if the image is a disk complement.

    With ``q = |c z0 + d|^2 - |c|^2 r^2`` the image has radius ``r / q`` and
    center ``((a z0 + b) conj(c z0 + d) - a conj(c) r^2) / q`` (det-1 entries).
    """
    a, b, c, d = m.entries()
    z0, r = disk.center, disk.radius
    w = c * z0 + d
    q = abs(w) ** 2 - abs(c) ** 2 * r ** 2
    if q <= 0:
        raise ValueError("pole of the map lies inside the disk")
    center = ((a * z0 + b) * w.conjugate() - a * c.conjugate() * r * r) / q
    return Disk(center, r / q)


def disk_image_3pt(m: MobiusMap, disk: Disk) -> Disk:
    """Same image via the circumcircle of three mapped boundary points."""
    pole = apply(m.inverse(), INF)
    if pole is not INF and abs(pole - disk.center) <= disk.radius:
        raise ValueError("pole of the map lies inside the disk")
    c, r = disk.center, disk.radius
    pts = [apply(m, c + r * complex(math.cos(t), math.sin(t)))
           for t in (0.0, 2 * math.pi / 3, 4 * math.pi / 3)]
    center, radius = _circumcircle(*pts)
    return Disk(center, radius)


def c_constant(ell: int, epsilon: float) -> float:
    """C with epsilon = sin(pi/ell) / (C + 1)."""
    return math.sin(math.pi / ell) / epsilon - 1


@dataclass
class Hierarchy:
    levels: list[list[Disk]]
    max_ratio: float    # largest child/parent radius ratio observed
    c: float

    @property
    def ratio_bound(self) -> float:
        return self.c ** -2


def disk_hierarchy(ell: int, epsilon: float, levels: int, group: KleinianGroup | None = None) -> Hierarchy:
    """Levels 0..``levels`` of the cover; level N has ell (ell-1)^N disks.

    Level 0 is ``beta^k(D0)`` with ``D0`` the disk of radius epsilon about 1;
    each disk ``g(D0)`` has children ``g alpha beta^j (D0)``, j = 1..ell-1.
    """
    C = c_constant(ell, epsilon)
    if C <= 1:
        raise ParameterError(f"C = {C:.4f} <= 1: the covering bound is meaningless")
    if levels < 0:
        raise ParameterError("levels must be >= 0")
    group = group or build_naive(ell, epsilon)
    d0 = Disk(1 + 0j, epsilon)
    betas = [group.beta ** j for j in range(ell)]
    frontier = [(betas[k], apply(betas[k], 1 + 0j), epsilon) for k in range(ell)]
    out = [[Disk(c, r) for _, c, r in frontier]]
    max_ratio = 0.0
    for _ in range(levels):
        nxt = []
        for g, _, r_parent in frontier:
            for j in range(1, ell):
                h = compose(compose(g, group.alpha), betas[j])
                child = disk_image(h, d0)
                max_ratio = max(max_ratio, child.radius / r_parent)
                nxt.append((h, child.center, child.radius))
        frontier = nxt
        out.append([Disk(c, r) for _, c, r in frontier])
    return Hierarchy(out, max_ratio, C)


def hausdorff_upper_bound(ell: int, epsilon: float) -> float:
    """log(ell - 1) / (2 log C): Hausdorff measure vanishes above this dimension."""
    C = c_constant(ell, epsilon)
    if C <= 1:
        raise ParameterError(f"C = {C:.4f} <= 1: the covering bound is meaningless")
    return math.log(ell - 1) / (2 * math.log(C))
