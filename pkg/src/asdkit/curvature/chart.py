"""Coordinate charts carrying a Riemannian metric on a box in R^4."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from asdkit.errors import DomainError

Evaluator = Callable[[np.ndarray], np.ndarray]          # (..., 4) -> (..., 4, 4)
Exclusion = Callable[[np.ndarray], np.ndarray]          # (..., 4) -> (...) bool, True = excluded


@dataclass(frozen=True)
class MetricChart:
    evaluator: Evaluator
    lo: tuple[float, float, float, float]
    hi: tuple[float, float, float, float]
    name: str = "chart"
    orientation: int = 1
    scale: float = 1.0
    exclusion: Optional[Exclusion] = None
    # asymptotic structure, used by falloff_exponent
    flat_model: Optional[Evaluator] = None
    radial_sampler: Optional[Callable[[float, int, np.random.Generator], np.ndarray]] = None
    meta: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        return self.evaluator(np.asarray(x, dtype=float))

    def flipped(self) -> MetricChart:
        return replace(self, orientation=-self.orientation, name=self.name)

    def with_orientation(self, orientation: int) -> MetricChart:
        return replace(self, orientation=orientation)

    @property
    def lo_arr(self) -> np.ndarray:
        return np.asarray(self.lo, dtype=float)

    @property
    def hi_arr(self) -> np.ndarray:
        return np.asarray(self.hi, dtype=float)

    def admissible(self, x: np.ndarray, margin: float = 0.0) -> np.ndarray:
        """Mask of points inside the box shrunk by ``margin`` and outside the exclusion."""
        x = np.asarray(x, dtype=float)
        ok = np.all((x >= self.lo_arr + margin) & (x <= self.hi_arr - margin), axis=-1)
        if self.exclusion is not None:
            ok &= ~np.asarray(self.exclusion(x), dtype=bool)
        return ok

    def sample(self, n: int, rng: np.random.Generator, margin: float = 0.0) -> np.ndarray:
        """Uniform admissible points by rejection from the (shrunk) box."""
        out = []
        lo, hi = self.lo_arr + margin, self.hi_arr - margin
        while sum(len(o) for o in out) < n:
            x = rng.uniform(lo, hi, size=(max(2 * n, 16), 4))
            out.append(x[self.admissible(x, margin)])
        return np.concatenate(out)[:n]

    def check_positive(self, x: np.ndarray, sym_tol: float = 1e-12) -> None:
        g = self.evaluator(np.asarray(x, dtype=float))
        asym = np.max(np.abs(g - np.swapaxes(g, -1, -2)))
        if asym > sym_tol * max(1.0, float(np.max(np.abs(g)))):
            raise DomainError(f"{self.name}: metric not symmetric (|g - g^T| = {asym:.2e})")
        if np.min(np.linalg.eigvalsh(g)) <= 0:
            raise DomainError(f"{self.name}: metric not positive definite")


def diag_metric(fn: Callable[[np.ndarray], list]) -> Evaluator:
    """Build an evaluator from a function returning the four diagonal entries."""
    def ev(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = np.broadcast_arrays(*fn(x))
        g = np.zeros(x.shape[:-1] + (4, 4))
        for i in range(4):
            g[..., i, i] = d[i]
        return g
    return ev
