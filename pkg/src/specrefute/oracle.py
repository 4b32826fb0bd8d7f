"""Dense brute-force ground truth for small systems.

Everything here works with explicit operators on ``(C^d)^{(x) kn}`` and is
meant for tests and cross-checks, not for the main pipeline.  Tensor
factors are ordered copy-major: factor ``c * n + i`` is site ``i`` of copy
``c``, so ``rho^{(x)k}`` is a plain Kronecker power.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .assembler import CapacityError
from .marginals import SpectrumSet, enumerate_generators, generator_value, site_permutations
from .permrep import Permutation, all_permutations

__all__ = [
    "DenseOperator",
    "eta_dense",
    "random_density",
    "partial_trace",
    "brute_q",
    "dense_generator_operator",
    "dense_dual_minimize",
    "DenseVerdict",
]

DENSE_CAP = 4096
DUAL_CAP = 256


@dataclass(frozen=True)
class DenseOperator:
    matrix: np.ndarray
    n: int
    d: int
    k: int


def eta_dense(sigmas: Sequence[Permutation], d: int, cap: int = DENSE_CAP) -> DenseOperator:
    """Permutation operator ``eta_d(s_1) (x) ... (x) eta_d(s_n)`` (copy-major order).

    ``eta(s)`` sends the vector in copy ``c`` to copy ``s(c)``.
    """
    sigmas = tuple(sigmas)
    n = len(sigmas)
    k = sigmas[0].k
    dim = d ** (k * n)
    if dim > cap:
        raise CapacityError(f"dense dimension {dim} exceeds cap {cap}")
    # output axis (s_i(c), i) carries input axis (c, i)
    src = [0] * (k * n)
    for i, s in enumerate(sigmas):
        for c in range(k):
            src[s(c) * n + i] = c * n + i
    idx = np.arange(dim).reshape((d,) * (k * n))
    cols = np.transpose(idx, src).ravel()
    m = np.zeros((dim, dim))
    m[np.arange(dim), cols] = 1.0
    return DenseOperator(m, n, d, k)


def random_density(dims: Sequence[int], rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Hilbert-Schmidt random state (``G G^dag / tr``), optionally of fixed rank."""
    dim = int(np.prod(dims))
    r = dim if rank is None else rank
    g = rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    n = len(dims)
    keep = sorted(keep)
    t = rho.reshape(tuple(dims) * 2)
    trace_out = [i for i in range(n) if i not in keep]
    for offset, i in enumerate(trace_out):
        ax = i - offset
        t = np.trace(t, axis1=ax, axis2=ax + t.ndim // 2)
    m = int(np.prod([dims[i] for i in keep]))
    return t.reshape(m, m)


def brute_q(rho: np.ndarray, n: int, d: int, subsystem: Sequence[int], ell: int, k: int,
            cap: int = DENSE_CAP) -> tuple[float, float]:
    """``tr(eta(ell-cycle^A) rho^{(x)k})`` and ``tr(rho_A^ell)``, checked to agree."""
    if not 1 <= ell <= k:
        raise ValueError("need 1 <= ell <= k")
    cyc = Permutation.from_cycles(k, [tuple(range(ell))] if ell > 1 else [])
    sig = [cyc if i in subsystem else Permutation.identity(k) for i in range(n)]
    op = eta_dense(sig, d, cap).matrix
    big = rho
    for _ in range(k - 1):
        big = np.kron(big, rho)
    via_perm = float(np.real(np.trace(op @ big)))
    red = partial_trace(rho, [d] * n, subsystem)
    via_marginal = float(np.real(np.trace(np.linalg.matrix_power(red, ell))))
    if abs(via_perm - via_marginal) > 1e-10:
        raise AssertionError(f"evaluation paths disagree: {via_perm} vs {via_marginal}")
    return via_perm, via_marginal


def dense_generator_operator(g, n: int, d: int, cap: int = DENSE_CAP) -> np.ndarray:
    """Hermitian part of the conjugation-orbit average of ``eta(g)``."""
    sigmas = site_permutations(g, n)
    acc = None
    perms = all_permutations(g.k)
    for pi in perms:
        m = eta_dense([s.conjugate_by(pi) for s in sigmas], d, cap).matrix
        acc = m if acc is None else acc + m
    acc = acc / len(perms)
    return 0.5 * (acc + acc.T)


@dataclass(frozen=True)
class DenseVerdict:
    refuted: bool
    value: float
    y: np.ndarray
    status: str


def dense_dual_minimize(spectra: SpectrumSet, k: int, d: int, mode: str = "cycles",
                        cap: int = DUAL_CAP, tol: float = 1e-7) -> DenseVerdict:
    """Unreduced refutation program on the full ``d^{kn}``-dimensional space.

    Minimizes ``q . y`` subject to ``sum_g y_g Eta_g >= 0`` and
    ``tr(sum_g y_g Eta_g) / d^{kn} = 1``, solved with CVXPY/Clarabel.
    """
    import cvxpy as cp

    n = spectra.n
    dim = d ** (k * n)
    if dim > cap:
        raise CapacityError(f"dense dimension {dim} exceeds cap {cap}")
    gens = enumerate_generators(spectra.subsystems, k, mode)
    ops = [dense_generator_operator(g, n, d, cap) for g in gens]
    q = np.array([generator_value(g, spectra) for g in gens])
    y = cp.Variable(len(gens))
    f = sum(y[i] * ops[i] for i in range(len(gens)))
    cons = [0.5 * (f + f.T) >> 0, sum(y[i] * np.trace(ops[i]) for i in range(len(gens))) == dim]
    prob = cp.Problem(cp.Minimize(q @ y), cons)
    prob.solve(solver=cp.CLARABEL)
    value = float(prob.value)
    return DenseVerdict(refuted=value < -tol, value=value, y=np.asarray(y.value), status=prob.status)
