"""Symmetry-reduced block SDP.

For a partition tuple ``(lam_1, ..., lam_n)`` with ``height(lam_i) <= d``
the block matrix of a generator is the average of
``R_{lam_1}(s_1) (x) ... (x) R_{lam_n}(s_n)`` over the simultaneous
conjugation orbit of its site permutations.  A coefficient vector ``y`` is
feasible when ``sum_g y_g B_g`` is positive semidefinite in every block.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .marginals import Generator, SpectrumSet, enumerate_generators, generator_value, site_permutations
from .permrep import Partition, Permutation, all_permutations, enumerate_partitions, hook_dimension, rep_matrix

__all__ = [
    "BlockKey",
    "BlockSDP",
    "SizeReport",
    "CapacityError",
    "block_keys",
    "orbit_block",
    "assemble",
    "size_report",
    "trace_weight",
    "DEFAULT_BLOCK_CAP",
]

DEFAULT_BLOCK_CAP = 1024

BlockKey = tuple[Partition, ...]


class CapacityError(RuntimeError):
    """A block or dense operator would exceed the configured size cap."""


def block_keys(n: int, d: int, k: int) -> list[BlockKey]:
    parts = enumerate_partitions(k, d)
    return [tuple(key) for key in itertools.product(parts, repeat=n)]


def block_dimension(key: BlockKey) -> int:
    return math.prod(hook_dimension(lam) for lam in key)


@lru_cache(maxsize=4096)
def _orbit(g: Generator, n: int) -> tuple[tuple[Permutation, ...], ...]:
    sigmas = site_permutations(g, n)
    orbit = {tuple(s.conjugate_by(pi) for s in sigmas) for pi in all_permutations(g.k)}
    orbit |= {tuple(s.inverse() for s in t) for t in orbit}
    return tuple(sorted(orbit, key=lambda t: tuple(s.images for s in t)))


def orbit_block(g: Generator, key: BlockKey, cap: int = DEFAULT_BLOCK_CAP) -> np.ndarray:
    """Symmetric coefficient matrix of ``g`` in the block labelled by ``key``."""
    key = tuple(lam if isinstance(lam, Partition) else Partition(tuple(lam)) for lam in key)
    if any(lam.weight != g.k for lam in key):
        raise ValueError("block partitions and generator disagree on k")
    dim = block_dimension(key)
    if dim > cap:
        raise CapacityError(f"block dimension {dim} exceeds cap {cap}")
    if g.is_identity:
        return np.eye(dim)
    orbit = _orbit(g, len(key))
    acc = np.ones((len(orbit), 1, 1))
    for site, lam in enumerate(key):
        stack = np.stack([rep_matrix(lam, t[site]) for t in orbit])
        o, a, _ = acc.shape
        b = stack.shape[1]
        acc = np.einsum("oij,okl->oikjl", acc, stack).reshape(o, a * b, a * b)
    m = acc.mean(axis=0)
    return 0.5 * (m + m.T)


def trace_weight(g: Generator, n: int, d: int) -> float:
    """Normalized trace ``tr(eta(g)) / d^{kn}`` of the dense permutation operator."""
    cycles = sum(s.num_cycles() for s in site_permutations(g, n))
    return float(d) ** (cycles - g.k * n)


@dataclass(frozen=True)
class SizeReport:
    n_naive: int
    n_sym: int
    block_count: int
    max_block: int


def size_report(n: int, d: int, k: int) -> SizeReport:
    """Variable counts of the dense and the block-reduced programs."""
    if min(n, d, k) < 1:
        raise ValueError("n, d, k must be positive")
    dims = [hook_dimension(lam) for lam in enumerate_partitions(k, d)]
    big = d ** (n * k)
    n_sym = 0
    for combo in itertools.product(dims, repeat=n):
        size = math.prod(combo)
        n_sym += size * (size + 1) // 2
    return SizeReport(n_naive=big * (big + 1) // 2, n_sym=n_sym,
                      block_count=len(dims) ** n, max_block=max(dims) ** n)


@dataclass(frozen=True)
class BlockSDP:
    """Assembled refutation program.

    ``blocks[key]`` has shape ``(len(generators), N, N)``.  The identity
    generator is always first.  ``weights`` holds the normalized dense
    trace of each generator, used to bound the solver's search.
    """

    spectra: SpectrumSet
    n: int
    d: int
    k: int
    mode: str
    generators: tuple[Generator, ...]
    targets: np.ndarray
    weights: np.ndarray
    blocks: dict
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def keys(self) -> list[BlockKey]:
        return list(self.blocks)

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    def block_sizes(self) -> list[int]:
        return [b.shape[1] for b in self.blocks.values()]

    def combination(self, y: Sequence[float]) -> dict:
        """``sum_g y_g B_g`` for every block."""
        y = np.asarray(y, dtype=float)
        return {key: np.tensordot(y, b, axes=1) for key, b in self.blocks.items()}

    def min_eigenvalue(self, y: Sequence[float]) -> float:
        return min(float(np.linalg.eigvalsh(m)[0]) for m in self.combination(y).values())

    def with_spectra(self, spectra: SpectrumSet) -> "BlockSDP":
        """Same blocks, new targets; the prepared solver data is shared."""
        if spectra.n != self.n or set(spectra.subsystems) != set(self.spectra.subsystems):
            raise ValueError("new spectra must live on the same subsystems")
        _check_dims(spectra, self.d)
        targets = np.array([generator_value(g, spectra) for g in self.generators])
        return BlockSDP(spectra, self.n, self.d, self.k, self.mode, self.generators,
                        targets, self.weights, self.blocks, self._cache)

    def size(self) -> SizeReport:
        sizes = self.block_sizes()
        big = self.d ** (self.n * self.k)
        return SizeReport(n_naive=big * (big + 1) // 2,
                          n_sym=sum(s * (s + 1) // 2 for s in sizes),
                          block_count=len(sizes), max_block=max(sizes))


def _check_dims(spectra: SpectrumSet, d: int) -> None:
    for a, mu in spectra.spectra.items():
        support = sum(1 for v in mu if v > 0)
        if support > d ** len(a):
            raise ValueError(f"spectrum on {a} has rank {support} > local dimension {d}^{len(a)}")


def assemble(spectra: SpectrumSet, d: int, k: int, mode: str = "cycles",
             cap: int = DEFAULT_BLOCK_CAP, threads: int = 1) -> BlockSDP:
    """Build every block of the level-``k`` refutation program with height bound ``d``."""
    if k < 1 or d < 1:
        raise ValueError("k and d must be positive")
    _check_dims(spectra, d)
    n = spectra.n
    gens = tuple(enumerate_generators(spectra.subsystems, k, mode))
    keys = block_keys(n, d, k)
    too_big = [block_dimension(key) for key in keys if block_dimension(key) > cap]
    if too_big:
        raise CapacityError(f"block dimension {max(too_big)} exceeds cap {cap}")

    def build(key):
        return np.stack([orbit_block(g, key, cap) for g in gens])

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            stacks = list(pool.map(build, keys))
    else:
        stacks = [build(key) for key in keys]
    targets = np.array([generator_value(g, spectra) for g in gens])
    weights = np.array([trace_weight(g, n, d) for g in gens])
    return BlockSDP(spectra, n, d, k, mode, gens, targets, weights, dict(zip(keys, stacks)))
