"""Acceptance criteria, one test per criterion.

Tolerances are pinned below; each test prints nothing and either passes or
fails as a unit.  Expensive computations shared between criteria (the
boundary scans feed the certificate-soundness check) are module fixtures.
"""
import itertools
import math
import time

import numpy as np
import pytest

from specrefute.assembler import assemble, size_report
from specrefute.experiments import (
    FlatSpectraJob,
    KroneckerJob,
    ScanJob,
    diagonal_line,
    k2_lines,
    purity_check,
    quartic_slice_root,
    rank2_triple,
    run_flat,
    run_kron,
    scan_boundary,
    two_copy_lhs,
)
from specrefute.marginals import SpectrumSet
from specrefute.oracle import dense_dual_minimize, dense_generator_operator
from specrefute.permrep import (
    all_permutations,
    character_mn,
    enumerate_partitions,
    hook_dimension,
    rep_matrix,
)
from specrefute.refuter import Status, refute, verify_certificate

# pinned tolerances
HOMOMORPHISM_TOL = 1e-12
ORTHOGONALITY_TOL = 1e-12
CHARACTER_TOL = 1e-10
PERMREP_RUNTIME_S = 30.0
SIZE_RUNTIME_S = 5.0
DENSE_BLOCK_EIG_TOL = 1e-8
BOUNDARY_TOL = 2e-3
BISECTION_TOL = 1e-3
SWEEP_SAMPLES = 1000
SWEEP_TOL = 1e-7
PURITY_TOL = 1e-9
PURITY_STATES = 10_000
FLAT_RUNTIME_S = 3600.0

AB, AC, BC = (0, 1), (0, 2), (1, 2)


@pytest.fixture(scope="module")
def k2_scan():
    job = ScanJob(k2_lines(), k=2, d=2, mode="cycles", tol=BISECTION_TOL)
    return job, scan_boundary(job)


@pytest.fixture(scope="module")
def k4_scan():
    job = ScanJob((diagonal_line(0.5),), k=4, d=4, mode="factorizing", tol=BISECTION_TOL)
    return job, scan_boundary(job)


@pytest.fixture(scope="module")
def discriminating_point():
    s = rank2_triple(0.15, 0.15, 0.5)
    return refute(assemble(s, 2, 2)), refute(assemble(s, 4, 4, "factorizing"))


def test_criterion_01_representation_engine(rng):
    start = time.perf_counter()
    for k in range(1, 6):
        perms = all_permutations(k)
        reps = {}
        for s in perms:
            reps.setdefault(s.cycle_type(), s)
        for lam in enumerate_partitions(k):
            for _ in range(200):
                s, t = (perms[i] for i in rng.integers(len(perms), size=2))
                rs = rep_matrix(lam, s)
                assert np.max(np.abs(rs @ rep_matrix(lam, t) - rep_matrix(lam, s * t))) <= HOMOMORPHISM_TOL
                assert np.max(np.abs(rs.T @ rs - np.eye(len(rs)))) <= ORTHOGONALITY_TOL
            for mu, s in reps.items():
                assert abs(np.trace(rep_matrix(lam, s)) - character_mn(lam, mu)) <= CHARACTER_TOL
    for k in range(1, 8):
        assert sum(hook_dimension(lam) ** 2 for lam in enumerate_partitions(k)) == math.factorial(k)
    assert time.perf_counter() - start < PERMREP_RUNTIME_S


def test_criterion_02_size_table():
    rows = {
        (2, 2, 2): (4, 4, 1), (2, 2, 3): (17, 4, 4), (2, 2, 4): (116, 9, 9), (2, 2, 5): (932, 9, 25),
        (3, 2, 2): (8, 8, 1), (3, 2, 3): (76, 8, 8), (3, 2, 4): (1480, 27, 27),
        (4, 2, 2): (16, 16, 1), (4, 2, 3): (353, 16, 16),
        (2, 3, 3): (26, 9, 4), (2, 3, 4): (305, 16, 9),
        (3, 3, 3): (140, 27, 8),
    }
    start = time.perf_counter()
    for (n, d, k), expected in rows.items():
        r = size_report(n, d, k)
        assert (r.n_sym, r.block_count, r.max_block) == expected, (n, d, k)
    assert time.perf_counter() - start < SIZE_RUNTIME_S


def _all_subsystems(n):
    return [a for r in range(1, n + 1) for a in itertools.combinations(range(n), r)]


def test_criterion_03_oracle_equivalence(rng):
    for n, k, d in [(2, 2, 2), (3, 2, 2), (2, 3, 2)]:
        subs = _all_subsystems(n)
        s = SpectrumSet(n, {a: [1.0] for a in subs})
        p = assemble(s, d, k)
        dense = np.stack([dense_generator_operator(g, n, d) for g in p.generators])
        for _ in range(50):
            y = rng.standard_normal(p.n_generators)
            block_min = p.min_eigenvalue(y)
            dense_min = float(np.linalg.eigvalsh(np.tensordot(y, dense, axes=1))[0])
            assert abs(block_min - dense_min) <= DENSE_BLOCK_EIG_TOL
    template = assemble(rank2_triple(0.1, 0.1, 0.1), 2, 2)
    for _ in range(20):
        s = rank2_triple(*rng.uniform(0, 0.5, size=3))
        assert refute(template.with_spectra(s)).refuted == dense_dual_minimize(s, 2, 2).refuted


def test_criterion_04_boundary_k2(k2_scan):
    _, points = k2_scan
    assert len(points) == 10
    for bp in points:
        assert bp.status == "ok", bp.detail
        l_ab, l_ac, l_bc = bp.point
        exact = 0.5 - math.sqrt(0.25 - (l_ac - 0.5) ** 2 + (l_bc - 0.5) ** 2)
        assert abs(l_ab - exact) <= BOUNDARY_TOL
        assert abs(two_copy_lhs(l_ab, l_ac, l_bc) - 0.25) <= BOUNDARY_TOL


def test_criterion_05_boundary_k4_factorizing(k4_scan):
    _, (bp,) = k4_scan
    assert bp.status == "ok", bp.detail
    assert abs(bp.point[0] - quartic_slice_root(0.393931, 0.225380)) <= BOUNDARY_TOL


def test_criterion_06_discriminating_point(discriminating_point):
    k2, k4 = discriminating_point
    assert k2.status is Status.NOT_REFUTED
    assert k4.status is Status.REFUTED


def test_criterion_07_certificate_soundness(k2_scan, k4_scan, discriminating_point):
    certs = []
    for _, points in (k2_scan, k4_scan):
        certs += [(bp.certificate, rank2_triple(*bp.refuted_point)) for bp in points]
    certs.append((discriminating_point[1].certificate, rank2_triple(0.15, 0.15, 0.5)))
    assert len(certs) == 12 and all(c is not None for c, _ in certs)
    for cert, spectra in certs:
        report = verify_certificate(cert, spectra, n_samples=SWEEP_SAMPLES, sweep_tol=SWEEP_TOL)
        assert report.passed, report.summary()
        assert report.checks["random_states"]["value"] >= -SWEEP_TOL


def test_criterion_08_purity_inequalities():
    report = purity_check(n_states=PURITY_STATES, tol=PURITY_TOL, certificates=False)
    assert report.n_states == PURITY_STATES
    assert report.min_k2 >= -PURITY_TOL
    assert report.min_k4 >= -PURITY_TOL


def test_criterion_09_flat_spectra():
    start = time.perf_counter()
    assert any(run_flat(FlatSpectraJob(4, (3, 2, 2), d, 4, "factorizing")).refuted for d in (2, 3))
    for d in (2, 3):
        for ranks in itertools.product(range(1, d + 1), repeat=3):
            if ranks[0] * ranks[1] < ranks[2]:
                v = run_flat(FlatSpectraJob(3, ranks, d, 4, "factorizing"))
                assert v.refuted, (ranks, d)
    assert run_flat(FlatSpectraJob(3, (2, 2, 2), 2, 4, "factorizing")).status is Status.NOT_REFUTED
    assert time.perf_counter() - start < FLAT_RUNTIME_S


def test_criterion_10_monotonicity():
    grid = [(a, b, c) for a in (0.02, 0.08, 0.14, 0.2, 0.3) for b in (0.02, 0.1, 0.2, 0.3, 0.45)
            for c in (0.5, 0.35)]
    assert len(grid) == 50
    templates = {(k, mode): assemble(rank2_triple(*grid[0]), 2, k, mode)
                 for k in (2, 4) for mode in ("cycles", "factorizing")}
    violations = []
    refuted_any = False
    for point in grid:
        s = rank2_triple(*point)
        r = {key: refute(t.with_spectra(s)) for key, t in templates.items()}
        assert all(v.status is not Status.SOLVER_INCONCLUSIVE for v in r.values()), point
        refuted_any |= r[2, "cycles"].refuted
        for mode in ("cycles", "factorizing"):
            if r[2, mode].refuted and not r[4, mode].refuted:
                violations.append((point, "k", mode))
        for k in (2, 4):
            if r[k, "cycles"].refuted and not r[k, "factorizing"].refuted:
                violations.append((point, "mode", k))
    assert refuted_any
    assert violations == []


def test_criterion_11_kronecker_presets():
    for m in (1, 2, 3, 4):
        assert run_kron(KroneckerJob((m,), (m,), (m,))).status is Status.NOT_REFUTED
    assert run_kron(KroneckerJob((1, 1), (2,), (2,)), k=2).status is Status.REFUTED
