"""Z_2 * Z_ell groups, reduced words and orbit point clouds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from asdkit.errors import ParameterError, SizeGuardError
from asdkit.mobius import (INF, MobiusMap, as_point, elliptic_from_fixed_points,
                           fixed_points)

MAX_WORDS = 10_000_000
DEDUP_GRID = 1e-12
RELATION_TOL = 1e-10


@dataclass(frozen=True)
class KleinianGroup:
    ell: int
    alpha: MobiusMap
    beta: MobiusMap
    construction: str  # "naive" | "deformed"
    params: dict = field(default_factory=dict)

    def generator(self, syllable: int) -> MobiusMap:
        """Syllable 0 is alpha, syllable j in 1..ell-1 is beta**j."""
        if syllable == 0:
            return self.alpha
        return self.beta ** syllable

    def relation_defect(self) -> float:
        """Largest entrywise distance of alpha^2 and beta^ell from +-I."""
        def dist(m):
            e = np.array(m.entries())
            return min(np.max(np.abs(e - sgn * np.array([1, 0, 0, 1]))) for sgn in (1, -1))
        return float(max(dist(self.alpha ** 2), dist(self.beta ** self.ell)))

    def relations_hold(self, tol: float = RELATION_TOL) -> bool:
        return self.relation_defect() <= tol

    def seeds(self) -> list:
        return [*fixed_points(self.alpha), *fixed_points(self.beta)]


def build_naive(ell: int, epsilon: float) -> KleinianGroup:
    """beta(q) = exp(2 pi i/ell) q and alpha(q) = 1 + eps^2 / (q - 1)."""
    if ell < 3:
        raise ParameterError("ell must be >= 3")
    bound = math.sin(math.pi / ell)
    if not 0 < epsilon < bound:
        raise ParameterError(f"epsilon must lie in (0, sin(pi/ell)) = (0, {bound:.6f})")
    h = complex(math.cos(math.pi / ell), math.sin(math.pi / ell))
    beta = MobiusMap(h, 0, 0, 1 / h)
    alpha = MobiusMap(1, epsilon ** 2 - 1, 1, -1)
    return KleinianGroup(ell, alpha, beta, "naive", {"epsilon": float(epsilon)})


def build_deformed(ell: int, z: complex) -> KleinianGroup:
    """alpha(w) = -w, beta of order ell with positive fixed point 1 and negative fixed point z."""
    if ell < 3:
        raise ParameterError("ell must be >= 3")
    z = complex(as_point(z))
    if z == 1 or (z.imag == 0 and z.real <= 0):
        raise ParameterError(f"z = {z} lies on the deleted set (-inf, 0] U {{1}}")
    alpha = MobiusMap(1j, 0, 0, -1j)
    beta = elliptic_from_fixed_points(ell, 1, z)
    return KleinianGroup(ell, alpha, beta, "deformed", {"z": z})


ReducedWord = tuple  # syllables: 0 = alpha, j = beta**j


def _word_counts(ell: int, max_syllables: int) -> list[int]:
    """Number of reduced words of each exact length 0..max_syllables."""
    counts = [1]
    a_end, b_end = 0, 0  # words of current length ending in alpha / in a beta power
    for k in range(1, max_syllables + 1):
        if k == 1:
            a_end, b_end = 1, ell - 1
        else:
            a_end, b_end = b_end, a_end * (ell - 1)
        counts.append(a_end + b_end)
    return counts


def word_count(ell: int, max_syllables: int) -> int:
    return sum(_word_counts(ell, max_syllables))


def _allowed(ell: int, last: int | None) -> range | list[int]:
    if last is None:
        return range(ell)
    if last == 0:
        return range(1, ell)
    return [0]


def enumerate_words(ell: int, max_syllables: int) -> list[ReducedWord]:
    """All reduced words up to ``max_syllables``, ordered by length then lexicographically."""
    if max_syllables < 0:
        raise ParameterError("max_syllables must be >= 0")
    if word_count(ell, max_syllables) > MAX_WORDS:
        raise SizeGuardError("word count exceeds guard")
    words: list[ReducedWord] = [()]
    level: list[ReducedWord] = [()]
    for _ in range(max_syllables):
        level = [w + (s,) for w in level for s in _allowed(ell, w[-1] if w else None)]
        words.extend(level)
    return words


def is_reduced(word: Sequence[int], ell: int) -> bool:
    for s in word:
        if not 0 <= s < ell:
            return False
    return all((a == 0) != (b == 0) for a, b in zip(word, word[1:]))


def evaluate_word(group: KleinianGroup, word: Sequence[int]) -> MobiusMap:
    m = MobiusMap.identity()
    for s in word:
        m = m @ group.generator(s)
    return m


@dataclass
class PointCloud:
    points: np.ndarray         # complex, finite points in first-occurrence order
    lengths: np.ndarray        # syllable count of the first word reaching each point
    hits_infinity: bool
    depth: int
    word_count: int

    def __len__(self) -> int:
        return len(self.points)

    def deeper_than(self, min_syllables: int) -> np.ndarray:
        return self.points[self.lengths >= min_syllables]


def _apply_batch(mats: np.ndarray, p) -> np.ndarray:
    a, b, c, d = mats
    if p is INF:
        num, den = a, c
    else:
        num, den = a * p + b, c * p + d
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    out[den == 0] = np.inf
    return out


def dedup_points(z: np.ndarray, grid: float = DEDUP_GRID) -> np.ndarray:
    """Indices of first occurrences after snapping to a ``grid`` lattice, in input order."""
    if len(z) == 0:
        return np.zeros(0, dtype=int)
    keys = np.stack([np.round(z.real / grid), np.round(z.imag / grid)], axis=1)
    _, first = np.unique(keys, axis=0, return_index=True)
    return np.sort(first)


def limit_points(group: KleinianGroup, depth: int, seeds: Sequence | None = None) -> PointCloud:
    """Images ``w(p)`` over reduced words with at most ``depth`` syllables and seeds ``p``.

    Seeds default to the fixed points of alpha and beta. Word matrices are
    built breadth-first in enumeration order, so the cloud is reproducible.
    """
    if depth < 1:
        raise ParameterError("depth must be >= 1")
    total = word_count(group.ell, depth)
    if total > MAX_WORDS:
        raise SizeGuardError(f"{total} words exceed the guard of {MAX_WORDS}")
    seeds = group.seeds() if seeds is None else [as_point(p) for p in seeds]
    gens = [group.generator(s).entries() for s in range(group.ell)]

    level = np.array([[1], [0], [0], [1]], dtype=complex)
    last = np.array([-1])
    chunks, lens = [level], [np.zeros(1, dtype=int)]
    for k in range(1, depth + 1):
        # children of each word in order; syllable loop inside keeps lexicographic order
        parent_idx, syll = [], []
        for s in range(group.ell):
            if s == 0:
                mask = last != 0
            else:
                mask = (last == 0) | (last == -1)
            idx = np.nonzero(mask)[0]
            parent_idx.append(idx)
            syll.append(np.full(len(idx), s))
        parent_idx = np.concatenate(parent_idx)
        syll = np.concatenate(syll)
        order = np.lexsort((syll, parent_idx))
        parent_idx, syll = parent_idx[order], syll[order]
        A, B, C, D = level[:, parent_idx]
        G = np.array(gens)[syll].T  # (4, n)
        new = np.array([A * G[0] + B * G[2], A * G[1] + B * G[3],
                        C * G[0] + D * G[2], C * G[1] + D * G[3]])
        level, last = new, syll
        chunks.append(level)
        lens.append(np.full(level.shape[1], k))
    mats = np.concatenate(chunks, axis=1)
    wlen = np.concatenate(lens)

    # word-major order so each point's first occurrence comes from its shortest word
    pts = np.stack([_apply_batch(mats, p) for p in seeds], axis=1).ravel()
    plen = np.repeat(wlen, len(seeds))
    finite = np.isfinite(pts)
    hits_inf = bool((~finite).any())
    pts, plen = pts[finite], plen[finite]
    keep = dedup_points(pts)
    return PointCloud(pts[keep], plen[keep], hits_inf, depth, total)
