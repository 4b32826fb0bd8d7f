"""Experiment drivers: boundary scans, flat-spectra cells, size tables,
purity inequalities and the Kronecker preset.

These are plain functions returning data; :mod:`specrefute.cli` wraps
them and handles files.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .assembler import BlockSDP, assemble, size_report
from .marginals import Atom, Generator, SpectrumSet
from .permrep import Partition
from .problems import write_certificate
from .refuter import Certificate, Status, Verdict, _prepare, marginal_spectra, random_states, refute

__all__ = [
    "AB", "AC", "BC",
    "rank2_triple",
    "two_copy_lhs",
    "two_copy_boundary",
    "quartic_slice_root",
    "B_QUARTIC", "C_QUARTIC", "ALPHA",
    "ScanLine", "ScanJob", "BoundaryPoint",
    "scan_boundary", "scan_csv", "k2_lines", "diagonal_line",
    "FlatSpectraJob", "flat_spectra", "run_flat",
    "REFERENCE_DIMS_ROWS", "dims_table",
    "purity_k2", "purity_k4", "purity_check", "PurityReport",
    "stated_k4_witness", "qutrit_counterexample",
    "KroneckerJob", "kron_spectra", "run_kron",
]

AB, AC, BC = (0, 1), (0, 2), (1, 2)

# k=4 slice boundary 2x^2 - 2bx^4 = c, and the purity-inequality weight
B_QUARTIC = 0.393931
C_QUARTIC = 0.225380
ALPHA = 0.329107


# three-party rank-2 family ----------------------------------------------------

def rank2_triple(l_ab: float, l_ac: float, l_bc: float) -> SpectrumSet:
    """Two-body marginals with spectra ``(1 - l, l)`` on AB, AC and BC."""
    return SpectrumSet(3, {AB: (1 - l_ab, l_ab), AC: (1 - l_ac, l_ac), BC: (1 - l_bc, l_bc)})


def two_copy_lhs(l_ab: float, l_ac: float, l_bc: float) -> float:
    """Left side of the k=2 boundary; incompatible when it exceeds 1/4."""
    return (l_ab - 0.5) ** 2 + (l_ac - 0.5) ** 2 - (l_bc - 0.5) ** 2


def two_copy_boundary(l_ac: float, l_bc: float) -> float:
    """``l_ab`` in ``[0, 1/2]`` at which the k=2 condition is tight."""
    r = 0.25 - (l_ac - 0.5) ** 2 + (l_bc - 0.5) ** 2
    return 0.5 - math.sqrt(r)


def quartic_slice_root(b: float = B_QUARTIC, c: float = C_QUARTIC) -> float:
    """``lambda`` on the slice ``l_ab = l_ac, l_bc = 1/2`` where ``2x^2 - 2bx^4 = c`` (``x = 1/2 - lambda``)."""
    # smallest positive root in x^2
    u = (2 - math.sqrt(4 - 8 * b * c)) / (4 * b)
    return 0.5 - math.sqrt(u)


# boundary scans ----------------------------------------------------------------

@dataclass(frozen=True)
class ScanLine:
    """Segment ``start -> end`` in ``(l_ab, l_ac, l_bc)`` coordinates."""

    start: tuple[float, float, float]
    end: tuple[float, float, float]
    label: str = ""

    def __post_init__(self):
        for v in (*self.start, *self.end):
            if not 0.0 <= v <= 0.5:
                raise ValueError("scan coordinates must lie in [0, 1/2]")

    def point(self, t: float) -> tuple[float, float, float]:
        return tuple(a + t * (b - a) for a, b in zip(self.start, self.end))

    @property
    def length(self) -> float:
        return math.dist(self.start, self.end)


@dataclass(frozen=True)
class ScanJob:
    lines: tuple[ScanLine, ...]
    k: int = 2
    d: int = 2
    mode: str = "cycles"
    tol: float = 1e-3
    probes: int = 8
    solver: object = "embedded"
    threads: int = 1
    n_samples: int = 1000

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.probes < 1:
            raise ValueError("need at least one probe interval")


@dataclass(frozen=True)
class BoundaryPoint:
    line: ScanLine
    status: str                   # ok | no_crossing | multiple_crossings | inconclusive
    t: float = float("nan")
    bracket: tuple[float, float] = (float("nan"), float("nan"))
    certificate: Certificate | None = None
    refuted_point: tuple[float, float, float] | None = None
    detail: str = ""

    @property
    def point(self) -> tuple[float, float, float]:
        return self.line.point(self.t)


def _evaluate(template: BlockSDP, job: ScanJob, x: tuple[float, float, float]) -> Verdict:
    return refute(template.with_spectra(rank2_triple(*x)), solver=job.solver, n_samples=job.n_samples)


def _scan_line(template: BlockSDP, job: ScanJob, line: ScanLine) -> BoundaryPoint:
    ts = np.linspace(0.0, 1.0, job.probes + 1)
    verdicts = [_evaluate(template, job, line.point(t)) for t in ts]
    known = [(t, v) for t, v in zip(ts, verdicts) if v.status is not Status.SOLVER_INCONCLUSIVE]
    changes = [(a, b) for a, b in zip(known, known[1:]) if a[1].refuted != b[1].refuted]
    if not changes:
        return BoundaryPoint(line, "no_crossing", detail="all probes "
                             + ("refuted" if known and known[0][1].refuted else "not refuted"))
    if len(changes) > 1:
        where = ", ".join(f"[{a[0]:.3f}, {b[0]:.3f}]" for a, b in changes)
        return BoundaryPoint(line, "multiple_crossings", detail=f"status flips in {where}")
    (lo, v_lo), (hi, v_hi) = changes[0]
    refuted_is_lo = v_lo.refuted
    best = v_lo if refuted_is_lo else v_hi
    step = job.tol / max(line.length, 1e-300)
    while hi - lo > step:
        mid = 0.5 * (lo + hi)
        v = _evaluate(template, job, line.point(mid))
        if v.status is Status.SOLVER_INCONCLUSIVE:
            return BoundaryPoint(line, "inconclusive", bracket=(lo, hi), detail=f"solver inconclusive at t={mid:.6f}")
        if v.refuted == refuted_is_lo:
            lo = mid
            if v.refuted:
                best = v
        else:
            hi = mid
            if v.refuted:
                best = v
    t_ref = lo if refuted_is_lo else hi
    return BoundaryPoint(line, "ok", t=0.5 * (lo + hi), bracket=(lo, hi), certificate=best.certificate,
                         refuted_point=line.point(t_ref))


def scan_boundary(job: ScanJob) -> list[BoundaryPoint]:
    """Bisect every line of ``job`` for its refuted/not-refuted crossing.

    Each line is first probed at ``job.probes + 1`` evenly spaced points;
    lines whose status flips more than once are reported as
    ``multiple_crossings`` and not bisected.  Results come back in line order.
    """
    template = assemble(rank2_triple(*job.lines[0].start), job.d, job.k, job.mode)
    _prepare(template)  # shared by all lines
    if job.threads > 1:
        with ThreadPoolExecutor(job.threads) as pool:
            return list(pool.map(lambda ln: _scan_line(template, job, ln), job.lines))
    return [_scan_line(template, job, ln) for ln in job.lines]


SCAN_COLUMNS = ["line", "label", "start_ab", "start_ac", "start_bc", "end_ab", "end_ac", "end_bc",
                "status", "t", "boundary_ab", "boundary_ac", "boundary_bc", "bracket_width",
                "k", "d", "mode", "certificate", "detail"]


def scan_csv(points: Sequence[BoundaryPoint], job: ScanJob, cert_dir: str | Path | None = None) -> str:
    """CSV text for a scan; certificates are written to ``cert_dir`` when given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_COLUMNS)
    for i, bp in enumerate(points):
        cert_name = ""
        if bp.certificate is not None and cert_dir is not None:
            Path(cert_dir).mkdir(parents=True, exist_ok=True)
            cert_name = str(Path(cert_dir) / f"line{i:03d}.json")
            write_certificate(cert_name, bp.certificate, rank2_triple(*bp.refuted_point))
        ok = bp.status == "ok"
        pt = bp.point if ok else ("", "", "")
        width = (bp.bracket[1] - bp.bracket[0]) * bp.line.length if ok else ""
        w.writerow([i, bp.line.label, *bp.line.start, *bp.line.end, bp.status,
                    bp.t if ok else "", *(f"{v:.6f}" if ok else v for v in pt),
                    f"{width:.3g}" if ok else "", job.k, job.d, job.mode, cert_name, bp.detail])
    return buf.getvalue()


def k2_lines() -> tuple[ScanLine, ...]:
    """Ten lines along ``l_ab`` at fixed ``(l_ac, l_bc)``; each crosses the k=2 boundary once."""
    fixed = [(a, 0.5) for a in (0.05, 0.15, 0.25, 0.35, 0.45)]
    fixed += [(a, 0.4) for a in (0.05, 0.1, 0.2, 0.3, 0.35)]
    return tuple(ScanLine((0.0, a, b), (0.5, a, b), f"l_ac={a} l_bc={b}") for a, b in fixed)


def diagonal_line(l_bc: float = 0.5) -> ScanLine:
    return ScanLine((0.0, 0.0, l_bc), (0.5, 0.5, l_bc), f"l_ab=l_ac l_bc={l_bc}")


# flat spectra ------------------------------------------------------------------

@dataclass(frozen=True)
class FlatSpectraJob:
    """Flat two-body spectra of ranks ``ranks`` on AB, AC, BC (n=3) or AB, AC, AD (n=4)."""

    n: int
    ranks: tuple[int, int, int]
    d: int
    k: int = 4
    mode: str = "factorizing"
    pure: bool = True

    def __post_init__(self):
        if self.n not in (3, 4):
            raise ValueError("flat-spectra jobs use n = 3 or n = 4")
        if len(self.ranks) != 3 or min(self.ranks) < 1:
            raise ValueError("need three ranks >= 1")


def flat_spectra(job: FlatSpectraJob) -> SpectrumSet:
    pairs = [AB, AC, BC] if job.n == 3 else [(0, 1), (0, 2), (0, 3)]
    spectra = {a: [1.0 / r] * r for a, r in zip(pairs, job.ranks)}
    if job.pure:
        spectra[tuple(range(job.n))] = [1.0]
    return SpectrumSet(job.n, spectra)


def run_flat(job: FlatSpectraJob, solver="embedded", n_samples: int = 1000) -> Verdict:
    s = flat_spectra(job)
    return refute(assemble(s, job.d, job.k, job.mode), solver=solver, n_samples=n_samples)


# size table --------------------------------------------------------------------

# (system, n, d, k, N_naive (exact or None when printed rounded), N_sym, #blocks, max block)
REFERENCE_DIMS_ROWS = [
    ("2 qubits", 2, 2, 2, 136, 4, 4, 1),
    ("2 qubits", 2, 2, 3, 2080, 17, 4, 4),
    ("2 qubits", 2, 2, 4, 32896, 116, 9, 9),
    ("2 qubits", 2, 2, 5, 524800, 932, 9, 25),
    ("2 qubits", 2, 2, 6, None, 8912, 16, 81),
    ("2 qubits", 2, 2, 7, None, 92633, 16, 196),
    ("3 qubits", 3, 2, 2, 2080, 8, 8, 1),
    ("3 qubits", 3, 2, 3, 131328, 76, 8, 8),
    ("3 qubits", 3, 2, 4, None, 1480, 27, 27),
    ("3 qubits", 3, 2, 5, None, 37544, 27, 125),
    ("4 qubits", 4, 2, 2, 32896, 16, 16, 1),
    ("4 qubits", 4, 2, 3, None, 353, 16, 16),
    ("4 qubits", 4, 2, 4, None, 19856, 81, 81),
    ("5 qubits", 5, 2, 2, 524800, 32, 32, 1),
    ("5 qubits", 5, 2, 3, None, 1684, 32, 32),
    ("5 qubits", 5, 2, 4, None, 272800, 243, 243),
    ("2 qutrits", 2, 3, 3, 266085, 26, 9, 4),
    ("2 qutrits", 2, 3, 4, None, 305, 16, 9),
    ("2 qutrits", 2, 3, 5, None, 5525, 25, 36),
    ("2 qutrits", 2, 3, 6, None, 132885, 49, 256),
    ("3 qutrits", 3, 3, 3, None, 140, 27, 8),
    ("3 qutrits", 3, 3, 4, None, 6448, 64, 27),
    ("3 qutrits", 3, 3, 5, None, 550994, 125, 216),
    ("4 qutrits", 4, 3, 3, None, 776, 81, 16),
    ("4 qutrits", 4, 3, 4, None, 143201, 256, 81),
    ("2 ququarts", 2, 4, 4, None, 338, 25, 9),
    ("2 ququarts", 2, 4, 5, None, 7393, 36, 36),
    ("3 ququarts", 3, 4, 4, None, 7412, 125, 27),
    ("3 ququarts", 3, 4, 5, None, 850392, 216, 216),
    ("4 ququarts", 4, 4, 4, None, 170888, 625, 81),
]


def dims_table(rows=None) -> list[dict]:
    """Computed sizes for ``(system, n, d, k)`` rows, compared with the reference values."""
    out = []
    for row in rows if rows is not None else REFERENCE_DIMS_ROWS:
        system, n, d, k = row[:4]
        r = size_report(n, d, k)
        rec = {"system": system, "n": n, "d": d, "k": k, "n_naive": r.n_naive, "n_sym": r.n_sym,
               "blocks": r.block_count, "max_block": r.max_block}
        if len(row) == 8:
            naive, nsym, blocks, mx = row[4:]
            rec["match"] = ((naive is None or naive == r.n_naive) and nsym == r.n_sym
                            and blocks == r.block_count and mx == r.max_block)
        out.append(rec)
    return out


# purity inequalities -------------------------------------------------------------

def purity_k2(p2_ab, p2_ac, p2_bc):
    return 1 + p2_bc - p2_ab - p2_ac


def purity_k4(p2_ab, p2_ac, p2_bc, p4_ab, p4_ac, p4_bc, alpha: float = ALPHA):
    return 1 + (1 + alpha) * (p2_bc - p2_ab - p2_ac) - alpha * (p4_bc - p4_ab - p4_ac)


def stated_k4_witness(alpha: float = ALPHA) -> tuple[list[Generator], np.ndarray]:
    """Generators and coefficients of the operator form of the k=4 inequality."""
    def g(ell, a):
        return Generator(4, (Atom(a, tuple(range(ell))),))

    gens = [Generator(4), g(2, BC), g(2, AB), g(2, AC), g(4, BC), g(4, AB), g(4, AC)]
    y = np.array([1, 1 + alpha, -(1 + alpha), -(1 + alpha), -alpha, alpha, alpha])
    return gens, y


def qutrit_counterexample(t: float) -> np.ndarray:
    """Pure state ``sqrt(1-2t)|0,00> + sqrt(t)|1,10> + sqrt(t)|2,01>`` on C^3 (x) C^2 (x) C^2.

    Marginal spectra: AB, AC ``(1-t, t)``; BC ``(1-2t, t, t)``.
    """
    psi = np.zeros((3, 2, 2))
    psi[0, 0, 0] = math.sqrt(1 - 2 * t)
    psi[1, 1, 0] = math.sqrt(t)
    psi[2, 0, 1] = math.sqrt(t)
    v = psi.ravel()
    return np.outer(v, v)


@dataclass
class PurityReport:
    n_states: int
    min_k2: float
    min_k4: float
    per_dims: dict
    tol: float
    k2_certificate: np.ndarray | None = None
    k2_expected: tuple = (1.0, -1.0, -1.0, 1.0)
    k4_certificate: dict = field(default_factory=dict)
    k4_witness_min_eig: dict = field(default_factory=dict)
    counterexample: dict = field(default_factory=dict)

    @property
    def random_passed(self) -> bool:
        return self.min_k2 >= -self.tol and self.min_k4 >= -self.tol

    @property
    def k2_match(self) -> float:
        if self.k2_certificate is None:
            return float("nan")
        return float(np.max(np.abs(self.k2_certificate - np.array(self.k2_expected))))

    def lines(self) -> list[str]:
        out = [f"random states: {self.n_states}, local dimensions in {{2,3}}",
               f"  min k=2 value {self.min_k2:.3e}, min k=4 value {self.min_k4:.3e} (threshold -{self.tol:g})",
               f"  random-state check: {'PASS' if self.random_passed else 'FAIL'}"]
        for dims, (m2, m4) in sorted(self.per_dims.items()):
            out.append(f"    dims {dims}: min k=2 {m2:.3e}, min k=4 {m4:.3e}")
        if self.k2_certificate is not None:
            coeffs = ", ".join(f"{v:+.6f}" for v in self.k2_certificate)
            out.append(f"k=2 certificate (id, AB, AC, BC), scaled to id=1: {coeffs}; "
                       f"max deviation from (1,-1,-1,1): {self.k2_match:.2e}")
        if self.k4_certificate:
            out.append("k=4 certificate, scaled to id=1 (cycles mode):")
            for label, v in self.k4_certificate.items():
                out.append(f"    {label:>14}: {v:+.6f}")
        for d, e in sorted(self.k4_witness_min_eig.items()):
            out.append(f"k=4 operator witness, d={d}: min block eigenvalue {e:+.6f}"
                       + (" (not PSD)" if e < -1e-9 else ""))
        if self.counterexample:
            c = self.counterexample
            out.append(f"pure qutrit-qubit-qubit family at t={c['t']:.4f}: k=4 value {c['value']:+.6f}, "
                       f"k=2 value {c['k2']:+.6f}")
        return out


def _power_sums(rhos, dims, sub, ell):
    return np.sum(marginal_spectra(rhos, dims, sub) ** ell, axis=1)


def purity_check(n_states: int = 10_000, seed: int = 7, tol: float = 1e-9, alpha: float = ALPHA,
                 certificates: bool = True, solver="embedded") -> PurityReport:
    """Evaluate both purity inequalities on random tripartite states.

    States are split evenly over the eight local-dimension patterns in
    ``{2, 3}^3``, with uniformly random rank so pure states are included.
    With ``certificates`` the refuter is also run at the two levels and
    its witnesses are reported next to the stated coefficients.
    """
    rng = np.random.default_rng(seed)
    patterns = [(a, b, c) for a in (2, 3) for b in (2, 3) for c in (2, 3)]
    per_dims = {}
    lo2 = lo4 = np.inf
    for i, dims in enumerate(patterns):
        count = n_states // len(patterns) + (1 if i < n_states % len(patterns) else 0)
        rhos = random_states(count, dims, rng)
        p = {(s, ell): _power_sums(rhos, dims, s, ell) for s in (AB, AC, BC) for ell in (2, 4)}
        v2 = purity_k2(p[AB, 2], p[AC, 2], p[BC, 2])
        v4 = purity_k4(p[AB, 2], p[AC, 2], p[BC, 2], p[AB, 4], p[AC, 4], p[BC, 4], alpha)
        per_dims[dims] = (float(v2.min()), float(v4.min()))
        lo2, lo4 = min(lo2, v2.min()), min(lo4, v4.min())
    report = PurityReport(n_states, float(lo2), float(lo4), per_dims, tol)

    if certificates:
        v = refute(assemble(rank2_triple(0.0, 0.0, 0.5), 2, 2), solver=solver)
        if v.refuted:
            y = np.array(v.certificate.y)
            report.k2_certificate = y / y[0]
        v = refute(assemble(rank2_triple(0.15, 0.15, 0.5), 4, 4, "cycles"), solver=solver)
        if v.refuted:
            y = np.array(v.certificate.y)
            report.k4_certificate = {g.label(): float(c / y[0])
                                     for g, c in zip(v.certificate.generators, y)}
        gens, y = stated_k4_witness(alpha)
        for d in (2, 3, 4):
            p4 = assemble(rank2_triple(0.15, 0.15, 0.5), d, 4, "cycles")
            index = {g: i for i, g in enumerate(p4.generators)}
            full = np.zeros(p4.n_generators)
            for g, c in zip(gens, y):
                full[index[g]] = c
            report.k4_witness_min_eig[d] = p4.min_eigenvalue(full)

    t = 0.05
    rho = qutrit_counterexample(t)
    dims = (3, 2, 2)
    p = {(s, ell): float(_power_sums(rho[None], dims, s, ell)[0]) for s in (AB, AC, BC) for ell in (2, 4)}
    report.counterexample = {
        "t": t,
        "value": float(purity_k4(p[AB, 2], p[AC, 2], p[BC, 2], p[AB, 4], p[AC, 4], p[BC, 4], alpha)),
        "k2": float(purity_k2(p[AB, 2], p[AC, 2], p[BC, 2])),
    }
    return report


# Kronecker preset ------------------------------------------------------------------

@dataclass(frozen=True)
class KroneckerJob:
    lam: tuple[int, ...]
    mu: tuple[int, ...]
    nu: tuple[int, ...]

    def __post_init__(self):
        parts = [Partition(tuple(p)) for p in (self.lam, self.mu, self.nu)]
        if len({p.weight for p in parts}) != 1:
            raise ValueError("partitions must have equal weight")

    @property
    def m(self) -> int:
        return sum(self.lam)


def kron_spectra(job: KroneckerJob) -> SpectrumSet:
    m = job.m
    return SpectrumSet(2, {(0,): [x / m for x in job.lam], (1,): [x / m for x in job.mu],
                           (0, 1): [x / m for x in job.nu]})


def kron_default_d(job: KroneckerJob, k: int) -> int:
    """Smallest local dimension that fits the spectra, raised to ``k`` so certificates are dimension-free."""
    return max(k, len(job.lam), len(job.mu), math.ceil(math.sqrt(len(job.nu))))


def run_kron(job: KroneckerJob, k: int = 2, d: int | None = None, mode: str = "cycles",
             solver="embedded", n_samples: int = 1000) -> Verdict:
    """REFUTED means ``g(t lam, t mu, t nu) = 0`` for every ``t >= 1`` (when the certificate is dimension-free)."""
    d = kron_default_d(job, k) if d is None else d
    return refute(assemble(kron_spectra(job), d, k, mode), solver=solver, n_samples=n_samples)
