"""Symmetric group combinatorics: partitions, standard tableaux, Young's
orthogonal form, Murnaghan-Nakayama characters and conjugation orbits.

Index conventions
-----------------
Permutations act on ``{0, ..., k-1}`` and are stored in one-line form,
``images[i] = sigma(i)``.  Composition is right-to-left,
``(sigma * tau)(i) = sigma(tau(i))``, and ``rep_matrix`` is a homomorphism
for this product.  Cycle notation in ``repr`` is printed 1-based.

Standard tableaux are listed in *last-letter order*: tableaux are compared
by the row holding ``k``, then the row holding ``k-1`` and so on, a smaller
row index coming first.  The basis of Young's orthogonal form follows this
order.
"""
from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Partition",
    "Permutation",
    "StandardTableau",
    "enumerate_partitions",
    "hook_dimension",
    "syt_enumerate",
    "yor_generator",
    "rep_matrix",
    "character_mn",
    "conjugation_orbit",
    "all_permutations",
]


@dataclass(frozen=True, order=True)
class Partition:
    """A weakly decreasing tuple of positive integers."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p <= 0 for p in parts):
            raise ValueError(f"partition parts must be positive: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"partition parts must be weakly decreasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def height(self) -> int:
        return len(self.parts)

    def conjugate(self) -> "Partition":
        if not self.parts:
            return self
        return Partition(tuple(sum(1 for p in self.parts if p > j) for j in range(self.parts[0])))

    def cells(self) -> list[tuple[int, int]]:
        return [(r, c) for r, p in enumerate(self.parts) for c in range(p)]

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)

    def __repr__(self):
        return f"Partition{self.parts}"


def _as_partition(lam) -> Partition:
    return lam if isinstance(lam, Partition) else Partition(tuple(lam))


@dataclass(frozen=True)
class Permutation:
    """Bijection of ``{0, ..., k-1}`` in one-line form."""

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(i) for i in self.images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a permutation: {images}")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, k: int) -> "Permutation":
        return cls(tuple(range(k)))

    @classmethod
    def from_cycles(cls, k: int, cycles: Iterable[Sequence[int]]) -> "Permutation":
        """Build from 0-based disjoint cycles, e.g. ``[(0, 1, 2)]`` maps 0->1->2->0."""
        images = list(range(k))
        seen: set[int] = set()
        for cyc in cycles:
            cyc = [int(c) for c in cyc]
            if seen.intersection(cyc) or len(set(cyc)) != len(cyc):
                raise ValueError("cycles must be disjoint")
            seen.update(cyc)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                images[a] = b
        return cls(tuple(images))

    @property
    def k(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if other.k != self.k:
            raise ValueError("permutations act on different sets")
        return Permutation(tuple(self.images[j] for j in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.k
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    def conjugate_by(self, pi: "Permutation") -> "Permutation":
        """Return ``pi * self * pi^-1``."""
        images = [0] * self.k
        for i, j in enumerate(self.images):
            images[pi.images[i]] = pi.images[j]
        return Permutation(tuple(images))

    def cycles(self, include_fixed: bool = False) -> list[tuple[int, ...]]:
        seen = [False] * self.k
        out = []
        for start in range(self.k):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            j = self.images[start]
            while j != start:
                cyc.append(j)
                seen[j] = True
                j = self.images[j]
            if include_fixed or len(cyc) > 1:
                out.append(tuple(cyc))
        return out

    def cycle_type(self) -> Partition:
        return Partition(tuple(sorted((len(c) for c in self.cycles(True)), reverse=True)))

    def num_cycles(self) -> int:
        return len(self.cycles(include_fixed=True))

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def adjacent_word(self) -> list[int]:
        """Indices ``i`` with ``self = s_{w[0]} * s_{w[1]} * ...``, ``s_i = (i, i+1)``.

        Bubble sort on the one-line form; the word is reduced.
        """
        cur = list(self.images)
        word = []
        swapped = True
        while swapped:
            swapped = False
            for i in range(len(cur) - 1):
                if cur[i] > cur[i + 1]:
                    # cur * s_i swaps positions i, i+1 of the one-line form
                    cur[i], cur[i + 1] = cur[i + 1], cur[i]
                    word.append(i)
                    swapped = True
        # self * s_{w0} * ... * s_{wm} = id  =>  self = s_{wm} * ... * s_{w0}
        return word[::-1]

    def __repr__(self):
        cyc = self.cycles()
        if not cyc:
            return "()"
        return "".join("(" + " ".join(str(c + 1) for c in cy) + ")" for cy in cyc)


@dataclass(frozen=True)
class StandardTableau:
    """Standard filling of a Young diagram; ``rows[r][c]`` holds a letter in ``1..k``."""

    rows: tuple[tuple[int, ...], ...]

    @property
    def shape(self) -> Partition:
        return Partition(tuple(len(r) for r in self.rows))

    def position(self, letter: int) -> tuple[int, int]:
        for r, row in enumerate(self.rows):
            if letter in row:
                return r, row.index(letter)
        raise KeyError(letter)

    def content(self, letter: int) -> int:
        r, c = self.position(letter)
        return c - r

    def swap(self, a: int, b: int) -> "StandardTableau":
        """Exchange letters ``a`` and ``b`` (result need not be standard)."""
        def sub(x):
            return b if x == a else a if x == b else x
        return StandardTableau(tuple(tuple(sub(x) for x in row) for row in self.rows))

    def is_standard(self) -> bool:
        k = sum(len(r) for r in self.rows)
        flat = sorted(x for r in self.rows for x in r)
        if flat != list(range(1, k + 1)):
            return False
        for row in self.rows:
            if any(a >= b for a, b in zip(row, row[1:])):
                return False
        for r in range(1, len(self.rows)):
            if any(self.rows[r][c] <= self.rows[r - 1][c] for c in range(len(self.rows[r]))):
                return False
        return True


def enumerate_partitions(k: int, max_height: int | None = None) -> list[Partition]:
    """All partitions of ``k`` with at most ``max_height`` parts, lexicographically decreasing.

    >>> [p.parts for p in enumerate_partitions(4, 2)]
    [(4,), (3, 1), (2, 2)]
    """
    if max_height is None:
        max_height = k
    if k <= 0 or max_height <= 0:
        raise ValueError("k and max_height must be positive")
    return [Partition(p) for p in _partitions(k, k, max_height)]


@lru_cache(maxsize=None)
def _partitions(k: int, largest: int, height: int) -> tuple[tuple[int, ...], ...]:
    if k == 0:
        return ((),)
    if height == 0:
        return ()
    out = []
    for first in range(min(k, largest), 0, -1):
        for rest in _partitions(k - first, first, height - 1):
            out.append((first,) + rest)
    return tuple(out)


def hook_dimension(lam) -> int:
    """Number of standard tableaux of shape ``lam`` (hook-length formula)."""
    lam = _as_partition(lam)
    conj = lam.conjugate()
    hooks = 1
    for r, c in lam.cells():
        hooks *= (lam.parts[r] - c) + (conj.parts[c] - r) - 1
    return math.factorial(lam.weight) // hooks


@lru_cache(maxsize=None)
def _syt(parts: tuple[int, ...]) -> tuple[StandardTableau, ...]:
    k = sum(parts)
    if k == 0:
        return (StandardTableau(()),)
    out = []
    for r, length in enumerate(parts):
        # removable corner at the end of row r
        if r + 1 < len(parts) and parts[r + 1] == length:
            continue
        smaller = list(parts)
        smaller[r] -= 1
        smaller_t = tuple(p for p in smaller if p > 0)
        for t in _syt(smaller_t):
            rows = [list(row) for row in t.rows]
            if r == len(rows):
                rows.append([])
            rows[r].append(k)
            out.append(StandardTableau(tuple(tuple(row) for row in rows)))
    return tuple(out)


def syt_enumerate(lam) -> list[StandardTableau]:
    """Standard tableaux of shape ``lam`` in last-letter order (see module docstring)."""
    return list(_syt(_as_partition(lam).parts))


_cache_lock = threading.Lock()
_yor_cache: dict[tuple[tuple[int, ...], int], np.ndarray] = {}


def yor_generator(lam, i: int) -> np.ndarray:
    """Matrix of the adjacent transposition ``(i, i+1)`` in Young's orthogonal form.

    ``i`` is 1-based, ``1 <= i <= k-1``, acting on letters ``i`` and ``i+1``.
    With axial distance ``r = content(i+1) - content(i)`` the tableau ``T``
    picks up ``1/r`` on the diagonal and ``sqrt(1 - 1/r^2)`` towards the
    tableau with ``i`` and ``i+1`` exchanged.
    """
    lam = _as_partition(lam)
    k = lam.weight
    if not 1 <= i <= k - 1:
        raise ValueError(f"generator index {i} out of range for k={k}")
    key = (lam.parts, i)
    with _cache_lock:
        cached = _yor_cache.get(key)
    if cached is not None:
        return cached.copy()
    tabs = syt_enumerate(lam)
    index = {t: j for j, t in enumerate(tabs)}
    m = np.zeros((len(tabs), len(tabs)))
    for j, t in enumerate(tabs):
        r = t.content(i + 1) - t.content(i)
        m[j, j] = 1.0 / r
        if abs(r) > 1:
            m[index[t.swap(i, i + 1)], j] = math.sqrt(1.0 - 1.0 / r**2)
    m.setflags(write=False)
    with _cache_lock:
        _yor_cache[key] = m
    return m.copy()


def rep_matrix(lam, sigma: Permutation) -> np.ndarray:
    """Young's orthogonal representation matrix ``R_lam(sigma)``."""
    lam = _as_partition(lam)
    if sigma.k != lam.weight:
        raise ValueError(f"permutation on {sigma.k} letters vs partition of {lam.weight}")
    return _rep_matrix_cached(lam.parts, sigma.images).copy()


@lru_cache(maxsize=65536)
def _rep_matrix_cached(parts: tuple[int, ...], images: tuple[int, ...]) -> np.ndarray:
    dim = hook_dimension(Partition(parts))
    out = np.eye(dim)
    for i in Permutation(images).adjacent_word():
        out = out @ yor_generator(parts, i + 1)
    out.setflags(write=False)
    return out


def _beta_set(parts: tuple[int, ...], length: int) -> tuple[int, ...]:
    padded = list(parts) + [0] * (length - len(parts))
    return tuple(p + length - 1 - j for j, p in enumerate(padded))


@lru_cache(maxsize=None)
def _mn(beta: frozenset, cycle_type: tuple[int, ...]) -> int:
    if not cycle_type:
        return 1
    r, rest = cycle_type[0], cycle_type[1:]
    total = 0
    for b in beta:
        # removing an r-rim hook moves a bead from b to the free position b - r
        if b - r < 0 or (b - r) in beta:
            continue
        leg = sum(1 for x in beta if b - r < x < b)
        total += (-1) ** leg * _mn(beta - {b} | {b - r}, rest)
    return total


def character_mn(lam, cycle_type) -> int:
    """Irreducible character value via the Murnaghan-Nakayama rule.

    Rim hooks are removed recursively on the abacus; a hook spanning
    ``h`` rows contributes ``(-1)**(h-1)``.
    """
    lam = _as_partition(lam)
    mu = _as_partition(cycle_type)
    if lam.weight != mu.weight:
        raise ValueError("partition and cycle type have different weights")
    beta = frozenset(_beta_set(lam.parts, lam.weight))
    return _mn(beta, mu.parts)


@lru_cache(maxsize=None)
def all_permutations(k: int) -> tuple[Permutation, ...]:
    return tuple(Permutation(p) for p in itertools.permutations(range(k)))


def conjugation_orbit(sigmas: Sequence[Permutation]) -> set[tuple[Permutation, ...]]:
    """Orbit of a tuple under simultaneous conjugation by ``S_k``."""
    sigmas = tuple(sigmas)
    if not sigmas:
        return {()}
    k = sigmas[0].k
    if any(s.k != k for s in sigmas):
        raise ValueError("all permutations must act on the same number of letters")
    return {tuple(s.conjugate_by(pi) for s in sigmas) for pi in all_permutations(k)}
