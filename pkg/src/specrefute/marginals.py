"""Problem statement: subsystem collections, prescribed spectra and the
permutation generators whose expectations on ``rho^{(x)k}`` are products of
marginal power sums.

Sites and copies are 0-based in code; problem files use 1-based sites.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .permrep import Permutation

__all__ = [
    "Subsystem",
    "SpectrumSet",
    "Atom",
    "Generator",
    "power_sum",
    "enumerate_generators",
    "generator_value",
    "site_permutations",
    "subsystem_label",
]

Subsystem = tuple[int, ...]

SPECTRUM_TOL = 1e-12


def _subsystem(a: Iterable[int]) -> Subsystem:
    a = tuple(sorted({int(x) for x in a}))
    if not a:
        raise ValueError("subsystems must be nonempty")
    return a


def subsystem_label(a: Subsystem) -> str:
    """Letters for small systems: ``(0, 1) -> 'AB'``."""
    if max(a) < 26:
        return "".join(chr(ord("A") + i) for i in a)
    return ",".join(str(i + 1) for i in a)


@dataclass(frozen=True)
class SpectrumSet:
    """Prescribed marginal spectra ``{A: mu_A}`` on ``n`` sites.

    Spectra are stored sorted in weakly decreasing order; missing trailing
    entries are zeros.
    """

    n: int
    spectra: Mapping[Subsystem, tuple[float, ...]]

    def __init__(self, n: int, spectra: Mapping[Iterable[int], Sequence[float]]):
        n = int(n)
        if n < 1:
            raise ValueError("n must be positive")
        clean: dict[Subsystem, tuple[float, ...]] = {}
        for a, mu in spectra.items():
            key = _subsystem(a)
            if key[0] < 0 or key[-1] >= n:
                raise ValueError(f"subsystem {key} is not contained in the {n} sites")
            if key in clean:
                raise ValueError(f"duplicate subsystem {key}")
            vals = np.asarray(mu, dtype=float).ravel()
            if vals.size == 0 or np.any(vals < 0) or not np.isfinite(vals).all():
                raise ValueError(f"spectrum for {key} must be nonempty and nonnegative")
            if abs(vals.sum() - 1.0) > SPECTRUM_TOL:
                raise ValueError(f"spectrum for {key} sums to {vals.sum():.15g}, not 1")
            clean[key] = tuple(float(v) for v in sorted(vals, reverse=True))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "spectra", dict(sorted(clean.items(), key=lambda kv: (len(kv[0]), kv[0]))))

    @property
    def subsystems(self) -> list[Subsystem]:
        return list(self.spectra)

    def __getitem__(self, a: Iterable[int]) -> tuple[float, ...]:
        return self.spectra[_subsystem(a)]

    def __hash__(self):
        return hash((self.n, tuple(self.spectra.items())))

    def rank(self, a: Iterable[int], tol: float = 0.0) -> int:
        return sum(1 for v in self[a] if v > tol)


def power_sum(mu: Sequence[float], ell: int) -> float:
    """``sum_i mu_i**ell``."""
    if ell < 1:
        raise ValueError("power must be at least 1")
    mu = np.asarray(mu, dtype=float)
    return float(np.sum(mu**ell))


@dataclass(frozen=True, order=True)
class Atom:
    """One cycle ``support[0] -> support[1] -> ...`` on the copies of every site in ``subsystem``."""

    subsystem: Subsystem
    support: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.support)


@dataclass(frozen=True)
class Generator:
    """A factorizing element of ``S_k^n``: atoms with pairwise disjoint copy supports.

    ``atoms == ()`` is the identity.  Atoms are kept sorted so equal
    generators compare equal.
    """

    k: int
    atoms: tuple[Atom, ...] = field(default=())

    def __post_init__(self):
        atoms = tuple(sorted(Atom(_subsystem(a.subsystem), tuple(int(c) for c in a.support))
                             for a in self.atoms))
        used: set[int] = set()
        for a in atoms:
            if len(a.support) < 2:
                raise ValueError("atom supports need at least two copies")
            if used.intersection(a.support) or len(set(a.support)) != len(a.support):
                raise ValueError("atom supports must be disjoint")
            if min(a.support) < 0 or max(a.support) >= self.k:
                raise ValueError(f"support {a.support} outside copies 0..{self.k - 1}")
            used.update(a.support)
        object.__setattr__(self, "atoms", atoms)

    @property
    def is_identity(self) -> bool:
        return not self.atoms

    def signature(self) -> tuple[tuple[int, Subsystem], ...]:
        """Conjugation-invariant label: sorted ``(length, subsystem)`` pairs."""
        return tuple(sorted((a.length, a.subsystem) for a in self.atoms))

    def label(self) -> str:
        if self.is_identity:
            return "id"
        return " ".join(f"({' '.join(str(c + 1) for c in a.support)})^{subsystem_label(a.subsystem)}"
                        for a in self.atoms)

    def encode(self) -> list:
        """JSON-friendly form with 1-based sites and copies."""
        return [[[s + 1 for s in a.subsystem], [c + 1 for c in a.support]] for a in self.atoms]

    @classmethod
    def decode(cls, k: int, data) -> "Generator":
        return cls(k, tuple(Atom(tuple(s - 1 for s in sub), tuple(c - 1 for c in sup))
                            for sub, sup in data))


def _canonical(k: int, signature: Sequence[tuple[int, Subsystem]]) -> Generator:
    atoms = []
    start = 0
    for length, sub in sorted(signature):
        atoms.append(Atom(sub, tuple(range(start, start + length))))
        start += length
    return Generator(k, tuple(atoms))


def enumerate_generators(subsystems: Iterable[Iterable[int]], k: int,
                         mode: str = "cycles") -> list[Generator]:
    """One representative per conjugacy class of constraint generators.

    ``mode="cycles"`` gives the identity and a single ``ell``-cycle atom per
    subsystem and ``2 <= ell <= k``.  ``mode="factorizing"`` gives every
    multiset of ``(ell, A)`` atoms whose lengths fit into ``k`` copies.
    Order: by number of atoms, then by the sorted ``(ell, A)`` signature.
    """
    if k < 1:
        raise ValueError("k must be positive")
    subs = sorted({_subsystem(a) for a in subsystems}, key=lambda a: (len(a), a))
    labels = [(ell, a) for ell in range(2, k + 1) for a in subs]
    if mode == "cycles":
        sigs = [()] + [((ell, a),) for ell, a in labels]
    elif mode == "factorizing":
        sigs = []
        for r in range(0, k // 2 + 1):
            for combo in itertools.combinations_with_replacement(labels, r):
                if sum(ell for ell, _ in combo) <= k:
                    sigs.append(tuple(sorted(combo)))
    else:
        raise ValueError(f"unknown mode {mode!r}; expected 'cycles' or 'factorizing'")
    sigs = sorted(set(sigs), key=lambda s: (len(s), s))
    return [_canonical(k, s) for s in sigs]


def generator_value(g: Generator, s: SpectrumSet) -> float:
    """Product over atoms of the power sums ``q_{A, ell}``."""
    value = 1.0
    for a in g.atoms:
        if a.subsystem not in s.spectra:
            raise ValueError(f"no spectrum prescribed for subsystem {a.subsystem}")
        value *= power_sum(s.spectra[a.subsystem], a.length)
    return value


def site_permutations(g: Generator, n: int) -> tuple[Permutation, ...]:
    """The tuple ``(sigma_1, ..., sigma_n)`` in ``S_k^n`` represented by ``g``."""
    cycles: list[list[tuple[int, ...]]] = [[] for _ in range(n)]
    for a in g.atoms:
        for site in a.subsystem:
            if site >= n:
                raise ValueError(f"site {site} outside 0..{n - 1}")
            cycles[site].append(a.support)
    return tuple(Permutation.from_cycles(g.k, c) for c in cycles)
