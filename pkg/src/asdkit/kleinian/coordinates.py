"""Coordinates on the deformation space of Z_m * Z_ell.

``z`` is the cross-ratio coordinate (negative fixed point of beta when alpha
fixes 0 and INF and beta fixes 1); ``t = exp(d + i theta)`` is the geometric
coordinate, ``d`` being the hyperbolic distance between the generator axes.
"""
from __future__ import annotations

import cmath
import math

from asdkit.errors import ParameterError


def _on_cut(z: complex, tol: float = 0.0) -> bool:
    return abs(z.imag) <= tol and z.real <= 0


def z_from_t(t: complex) -> complex:
    """z = (t + 1)^2 / (t - 1)^2."""
    t = complex(t)
    if t == 1:
        raise ParameterError("t = 1 is a pole of z(t)")
    return (t + 1) ** 2 / (t - 1) ** 2


def t_from_z(z: complex) -> complex:
    """Inverse of :func:`z_from_t` using the principal square root (cut along z <= 0)."""
    z = complex(z)
    if z == 1 or _on_cut(z):
        raise ParameterError(f"z = {z} lies on the deleted set (-inf, 0] U {{1}}")
    r = cmath.sqrt(z)
    return (r + 1) / (r - 1)


def critical_separation(m: int, ell: int) -> float:
    """Distance L between the order-m and order-ell vertices of the (m, ell, inf) triangle.

    cosh L = (1 + cos(pi/m) cos(pi/ell)) / (sin(pi/m) sin(pi/ell)).
    """
    if m < 2 or ell < max(m, 3):
        raise ParameterError("need m >= 2 and ell >= max(m, 3)")
    a, b = math.pi / m, math.pi / ell
    return math.acosh((1 + math.cos(a) * math.cos(b)) / (math.sin(a) * math.sin(b)))


def in_schottky_region(t: complex, m: int, ell: int) -> bool:
    """Sufficient test for membership in the deformation space: log|t| > L.

    The comparison is made between the axis separation ``log|t|`` and the
    distance ``L``. Read literally as ``|t| > L`` the test would accept
    ``|t|`` between ``L`` and ``e^L``, where the axes are closer than ``L``.
    ``False`` means undetermined, not disproven.
    """
    t = complex(t)
    if abs(t) <= 1:
        raise ParameterError("|t| must exceed 1")
    return math.log(abs(t)) > critical_separation(m, ell)
