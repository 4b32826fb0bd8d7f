"""Solving the block SDP and checking the resulting certificates.

The solver minimizes ``q . y`` over coefficient vectors whose block
combination is positive semidefinite, with the normalized dense trace of
the witness fixed to one.  A negative optimum is rescaled to
``q . y = -1`` and handed to :func:`verify_certificate`; only certificates
that survive verification produce a ``REFUTED`` verdict.
"""
from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .assembler import BlockSDP, assemble
from .marginals import Generator, SpectrumSet

__all__ = [
    "Certificate",
    "Status",
    "Verdict",
    "VerificationReport",
    "refute",
    "verify_certificate",
    "dimension_free_flag",
    "random_states",
    "marginal_spectra",
    "CERTIFICATE_SCHEMA",
]

log = logging.getLogger(__name__)

CERTIFICATE_SCHEMA = "specrefute.certificate/1"
EPS_PSD = 1e-9
SWEEP_TOL = 1e-7
REFUTE_TOL = 1e-7


def dimension_free_flag(k: int, d: int) -> bool:
    """Certificates built with ``k <= d`` copies hold in every local dimension."""
    return k <= d


class Status(enum.Enum):
    REFUTED = "refuted"
    NOT_REFUTED = "not_refuted"
    SOLVER_INCONCLUSIVE = "solver_inconclusive"


@dataclass(frozen=True)
class Certificate:
    """Coefficients ``y`` with ``sum_g y_g q_g < 0`` and PSD blocks."""

    n: int
    d: int
    k: int
    mode: str
    generators: tuple[Generator, ...]
    y: tuple[float, ...]
    objective: float
    min_block_eig: float
    dimension_free: bool
    subsystems: tuple[tuple[int, ...], ...] = ()

    def as_dict(self) -> dict:
        return {
            "schema": CERTIFICATE_SCHEMA,
            "n": self.n, "d": self.d, "k": self.k, "mode": self.mode,
            "subsystems": [[s + 1 for s in a] for a in self.subsystems],
            "dimension_free": self.dimension_free,
            "objective": self.objective,
            "min_block_eig": self.min_block_eig,
            "generators": [{"atoms": g.encode(), "label": g.label(), "y": y}
                           for g, y in zip(self.generators, self.y)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Certificate":
        schema = data.get("schema")
        if schema != CERTIFICATE_SCHEMA:
            raise ValueError(f"unsupported certificate schema {schema!r}")
        k = int(data["k"])
        gens = tuple(Generator.decode(k, g["atoms"]) for g in data["generators"])
        return cls(n=int(data["n"]), d=int(data["d"]), k=k, mode=data["mode"],
                   generators=gens, y=tuple(float(g["y"]) for g in data["generators"]),
                   objective=float(data["objective"]), min_block_eig=float(data["min_block_eig"]),
                   dimension_free=bool(data["dimension_free"]),
                   subsystems=tuple(tuple(s - 1 for s in a) for a in data.get("subsystems", [])))

    def dumps(self) -> str:
        return json.dumps(self.as_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "Certificate":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    checks: dict
    certificate: Certificate | None = None

    def failures(self) -> list[str]:
        return [f"{name}: {info}" for name, info in self.checks.items() if not info["passed"]]

    def summary(self) -> str:
        lines = []
        for name, info in self.checks.items():
            mark = "ok  " if info["passed"] else "FAIL"
            lines.append(f"[{mark}] {name}: {info['value']:.6g} ({info['detail']})")
        return "\n".join(lines)


@dataclass(frozen=True)
class Verdict:
    status: Status
    certificate: Certificate | None = None
    value: float = float("nan")
    diagnostics: dict = field(default_factory=dict)

    @property
    def refuted(self) -> bool:
        return self.status is Status.REFUTED

    def __str__(self):
        return f"{self.status.name} (k={self.diagnostics.get('k')}, value={self.value:.3e})"


# random states ---------------------------------------------------------------

def random_states(n_states: int, dims: Sequence[int], rng: np.random.Generator,
                  rank: int | str = "random") -> np.ndarray:
    """Batch of density matrices on ``prod(dims)`` dimensions.

    ``rank="random"`` draws each rank uniformly so pure states show up; an
    integer fixes it; ``rank="full"`` is the Hilbert-Schmidt ensemble.
    """
    dim = int(np.prod(dims))
    if rank == "full":
        ranks = np.full(n_states, dim)
    elif rank == "random":
        ranks = rng.integers(1, dim + 1, size=n_states)
    else:
        ranks = np.full(n_states, int(rank))
    g = rng.standard_normal((n_states, dim, dim)) + 1j * rng.standard_normal((n_states, dim, dim))
    mask = np.arange(dim)[None, None, :] < ranks[:, None, None]
    g = g * mask
    rho = g @ np.conj(np.swapaxes(g, 1, 2))
    tr = np.real(np.trace(rho, axis1=1, axis2=2))
    return rho / tr[:, None, None]


def marginal_spectra(rhos: np.ndarray, dims: Sequence[int], subsystem: Sequence[int]) -> np.ndarray:
    """Eigenvalues (descending) of the reduced states on ``subsystem``, batched."""
    n = len(dims)
    keep = sorted(subsystem)
    batch = rhos.shape[0]
    t = rhos.reshape((batch,) + tuple(dims) * 2)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for i in range(n):
        if i not in keep:
            col[i] = row[i]
    out = "Z" + "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    red = np.einsum("Z" + "".join(row) + "".join(col) + "->" + out, t)
    m = int(np.prod([dims[i] for i in keep]))
    red = red.reshape(batch, m, m)
    return np.linalg.eigvalsh(red)[:, ::-1].clip(min=0.0)


# verification ----------------------------------------------------------------

def _problem_for(cert: Certificate, spectra: SpectrumSet) -> BlockSDP:
    return assemble(spectra, cert.d, cert.k, cert.mode)


def verify_certificate(cert: Certificate, spectra: SpectrumSet, eps_psd: float = EPS_PSD,
                       cleanup: bool = True, n_samples: int = 1000, sweep_tol: float = SWEEP_TOL,
                       seed: int = 1234, problem: BlockSDP | None = None) -> VerificationReport:
    """Independent check of a certificate against prescribed spectra.

    Blocks are rebuilt from the generators, the smallest block eigenvalue
    is compared with ``-eps_psd``, and with ``cleanup`` the identity weight
    is raised by ``max(0, -min_eig)`` so the blocks are PSD up to rounding.
    The objective is re-evaluated from power sums and, if ``n_samples > 0``,
    ``sum_g y_g q_g(rho)`` is checked on random states of local dimension ``d``.
    """
    checks: dict = {}
    if cert.n != spectra.n:
        raise ValueError("certificate and spectra disagree on the number of sites")
    if problem is None:
        problem = _problem_for(cert, spectra)
    index = {g: i for i, g in enumerate(problem.generators)}
    y = np.zeros(problem.n_generators)
    unknown = [g for g in cert.generators if g not in index]
    if unknown:
        checks["generators"] = {"passed": False, "value": float(len(unknown)),
                                "detail": "generators outside the level-k set: "
                                          + ", ".join(g.label() for g in unknown)}
        return VerificationReport(False, checks)
    for g, v in zip(cert.generators, cert.y):
        y[index[g]] += v

    min_eig = problem.min_eigenvalue(y)
    delta = 0.0
    if cleanup and min_eig < 0:
        delta = -min_eig
        y[0] += delta  # identity generator maps to the identity in every block
        min_eig = problem.min_eigenvalue(y)
    checks["psd"] = {"passed": bool(min_eig >= -eps_psd), "value": min_eig,
                     "detail": f"min block eigenvalue vs -{eps_psd:g}, shift {delta:.3g}"}

    objective = sum(v * _independent_value(g, spectra) for g, v in zip(problem.generators, y))
    checks["objective"] = {"passed": bool(objective < 0), "value": float(objective),
                           "detail": "sum_g y_g q_g recomputed from power sums"}

    if n_samples > 0:
        worst = _sweep(problem.generators, y, spectra.n, cert.d, n_samples, seed)
        checks["random_states"] = {"passed": bool(worst >= -sweep_tol), "value": worst,
                                   "detail": f"min over {n_samples} random states vs -{sweep_tol:g}"}

    passed = all(c["passed"] for c in checks.values())
    cleaned = Certificate(cert.n, cert.d, cert.k, cert.mode, problem.generators, tuple(float(v) for v in y),
                          float(objective), float(min_eig), dimension_free_flag(cert.k, cert.d),
                          tuple(spectra.subsystems))
    return VerificationReport(passed, checks, cleaned)


def _independent_value(g: Generator, spectra: SpectrumSet) -> float:
    value = 1.0
    for a in g.atoms:
        value *= float(np.sum(np.asarray(spectra.spectra[a.subsystem]) ** len(a.support)))
    return value


def _sweep(gens: Sequence[Generator], y: np.ndarray, n: int, d: int, n_samples: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    dims = [d] * n
    subs = sorted({a.subsystem for g in gens for a in g.atoms})
    worst = np.inf
    batch = 200 if d ** n <= 64 else 50
    done = 0
    while done < n_samples:
        size = min(batch, n_samples - done)
        rhos = random_states(size, dims, rng)
        spec = {a: marginal_spectra(rhos, dims, a) for a in subs}
        total = np.zeros(size)
        for g, coef in zip(gens, y):
            term = np.full(size, coef)
            for a in g.atoms:
                term = term * np.sum(spec[a.subsystem] ** len(a.support), axis=1)
            total += term
        worst = min(worst, float(total.min()))
        done += size
    return worst


# solving ---------------------------------------------------------------------

@dataclass
class _Prepared:
    basis: np.ndarray          # columns span the complement of the kernel of y -> blocks
    q_kernel_dirs: np.ndarray  # kernel directions
    gs: list
    sizes: list


def _prepare(p: BlockSDP) -> _Prepared:
    cached = p._cache.get("prepared")
    if cached is not None:
        return cached
    m = p.n_generators
    gram = np.zeros((m, m))
    for b in p.blocks.values():
        flat = b.reshape(m, -1)
        gram += flat @ flat.T
    evals, evecs = np.linalg.eigh(gram)
    keep = evals > 1e-20 * evals[-1]
    basis = evecs[:, keep]
    kernel = evecs[:, ~keep]
    rank = basis.shape[1]
    gs = []
    sizes = []
    for b in p.blocks.values():
        size = b.shape[1]
        coeffs = np.tensordot(basis.T, b, axes=1)  # (rank, N, N)
        # cvxopt stores s = h - G x column-major; blocks are symmetric
        gs.append(-coeffs.reshape(rank, size * size).T)
        sizes.append(size)
    prep = _Prepared(basis, kernel, gs, sizes)
    p._cache["prepared"] = prep
    return prep


# tight first; cvxopt can stall in 'unknown' when the tight setting is unreachable
_CVXOPT_OPTIONS = (
    {"abstol": 1e-9, "reltol": 1e-8, "feastol": 1e-9, "maxiters": 100},
    {"abstol": 1e-7, "reltol": 1e-6, "feastol": 1e-7, "maxiters": 100},
)


def _solve_embedded(p: BlockSDP) -> tuple[str, np.ndarray | None, dict]:
    import cvxopt
    from cvxopt import solvers

    prep = _prepare(p)
    q = p.targets
    if prep.q_kernel_dirs.shape[1]:
        qk = prep.q_kernel_dirs @ (prep.q_kernel_dirs.T @ q)
        if np.linalg.norm(qk) > 1e-9:
            # linear relations among the block matrices that the targets violate:
            # y in the kernel gives F = 0 with q . y < 0
            return "kernel", -qk / float(q @ qk), {"kernel_violation": float(np.linalg.norm(qk))}
    basis = prep.basis
    c = cvxopt.matrix(basis.T @ q)
    a = cvxopt.matrix((basis.T @ p.weights).reshape(1, -1))
    b = cvxopt.matrix([1.0])
    gs = [cvxopt.matrix(g) for g in prep.gs]
    hs = [cvxopt.matrix(0.0, (s, s)) for s in prep.sizes]
    sol = None
    for opts in _CVXOPT_OPTIONS:
        try:
            sol = solvers.sdp(c, Gs=gs, hs=hs, A=a, b=b, options=dict(opts, show_progress=False))
        except (ValueError, ArithmeticError) as exc:
            log.debug("cvxopt failed with %s: %s", opts, exc)
            continue
        if sol["status"] == "optimal":
            break
    if sol is None:
        return "error", None, {"error": "cvxopt raised at every tolerance setting"}
    info = {k: sol.get(k) for k in ("status", "gap", "relative gap", "primal objective",
                                     "dual objective", "primal infeasibility", "dual infeasibility",
                                     "iterations")}
    if sol["x"] is None:
        return sol["status"], None, info
    y = basis @ np.array(sol["x"]).ravel()
    return sol["status"], y, info


def _solve_cvxpy(p: BlockSDP) -> tuple[str, np.ndarray | None, dict]:
    import cvxpy as cp

    prep = _prepare(p)
    q = p.targets
    if prep.q_kernel_dirs.shape[1]:
        qk = prep.q_kernel_dirs @ (prep.q_kernel_dirs.T @ q)
        if np.linalg.norm(qk) > 1e-9:
            return "kernel", -qk / float(q @ qk), {"kernel_violation": float(np.linalg.norm(qk))}
    w = cp.Variable(prep.basis.shape[1])
    y = prep.basis @ w
    cons = [p.weights @ y == 1]
    for b in p.blocks.values():
        mat = sum(y[i] * b[i] for i in range(p.n_generators))
        cons.append(0.5 * (mat + mat.T) >> 0)
    prob = cp.Problem(cp.Minimize(q @ y), cons)
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.SolverError as exc:
        return "error", None, {"error": str(exc)}
    status = "optimal" if prob.status == cp.OPTIMAL else prob.status
    if w.value is None:
        return status, None, {"status": prob.status}
    return status, prep.basis @ w.value, {"status": prob.status, "primal objective": prob.value}


def refute(p: BlockSDP, solver: str | Callable = "embedded", tol: float = REFUTE_TOL,
           verify: bool = True, n_samples: int = 1000, eps_psd: float = EPS_PSD) -> Verdict:
    """Search for an incompatibility certificate at the level of ``p``.

    ``solver`` is ``"embedded"`` (cvxopt), ``"cvxpy"`` (Clarabel), or a
    callable ``BlockSDP -> (status, y, info)`` such as the file-based
    bridge in :mod:`specrefute.sdpa`.
    """
    diag = {"n": p.n, "d": p.d, "k": p.k, "mode": p.mode, "generators": p.n_generators,
            "blocks": len(p.blocks)}
    if callable(solver):
        status, y, info = solver(p)
    elif solver == "embedded":
        status, y, info = _solve_embedded(p)
        if status not in ("optimal", "kernel"):
            # degenerate faces (rank-deficient spectra) can stall cvxopt
            diag["embedded_status"] = status
            status, y, info = _solve_cvxpy(p)
            diag["fallback"] = "clarabel"
    elif solver == "cvxpy":
        status, y, info = _solve_cvxpy(p)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    diag.update(solver_status=status, **{k: v for k, v in info.items() if v is not None})
    if y is None:
        return Verdict(Status.SOLVER_INCONCLUSIVE, value=float("nan"), diagnostics=diag)

    value = float(p.targets @ y)
    norm = float(p.weights @ y)
    diag["normalization"] = norm
    if status == "kernel" or value < -tol * max(1.0, abs(norm)):
        scale = -1.0 / value
        y_cert = y * scale
        cert = Certificate(p.n, p.d, p.k, p.mode, p.generators, tuple(float(v) for v in y_cert), -1.0,
                           p.min_eigenvalue(y_cert), dimension_free_flag(p.k, p.d),
                           tuple(p.spectra.subsystems))
        if not verify:
            return Verdict(Status.REFUTED, cert, value, diag)
        report = verify_certificate(cert, p.spectra, eps_psd=eps_psd, n_samples=n_samples, problem=p)
        diag["verification"] = {name: c["value"] for name, c in report.checks.items()}
        if report.passed:
            return Verdict(Status.REFUTED, report.certificate, value, diag)
        log.warning("certificate failed verification: %s", "; ".join(report.failures()))
        return Verdict(Status.SOLVER_INCONCLUSIVE, value=value, diagnostics=diag)
    if status == "optimal":
        return Verdict(Status.NOT_REFUTED, value=value, diagnostics=diag)
    return Verdict(Status.SOLVER_INCONCLUSIVE, value=value, diagnostics=diag)
