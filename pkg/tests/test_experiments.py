import csv
import io
import math

import numpy as np
import pytest

from specrefute.experiments import (
    ALPHA,
    FlatSpectraJob,
    KroneckerJob,
    REFERENCE_DIMS_ROWS,
    ScanJob,
    ScanLine,
    dims_table,
    flat_spectra,
    k2_lines,
    kron_default_d,
    kron_spectra,
    purity_check,
    purity_k2,
    purity_k4,
    qutrit_counterexample,
    quartic_slice_root,
    run_flat,
    run_kron,
    scan_boundary,
    scan_csv,
    two_copy_boundary,
    two_copy_lhs,
)
from specrefute.refuter import Status, marginal_spectra


def test_two_copy_helpers():
    for a, b in [(0.05, 0.5), (0.3, 0.4)]:
        x = two_copy_boundary(a, b)
        assert two_copy_lhs(x, a, b) == pytest.approx(0.25)
    x = 0.5 - quartic_slice_root()
    assert 2 * x ** 2 - 2 * 0.393931 * x ** 4 == pytest.approx(0.225380)


def test_scan_line_validation():
    with pytest.raises(ValueError):
        ScanLine((0, 0, 0.6), (0.5, 0, 0.5))
    with pytest.raises(ValueError):
        ScanJob(k2_lines(), tol=0)


def test_scan_statuses_and_csv(tmp_path):
    lines = (
        ScanLine((0.0, 0.15, 0.5), (0.5, 0.15, 0.5), "crossing"),
        ScanLine((0.4, 0.4, 0.5), (0.5, 0.5, 0.5), "inside"),
    )
    job = ScanJob(lines, k=2, d=2, tol=1e-3)
    pts = scan_boundary(job)
    assert [p.status for p in pts] == ["ok", "no_crossing"]
    assert abs(pts[0].point[0] - two_copy_boundary(0.15, 0.5)) < 1e-3
    text = scan_csv(pts, job, tmp_path / "certs")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows[0]["status"] == "ok" and rows[0]["certificate"]
    assert rows[1]["boundary_ab"] == ""
    assert (tmp_path / "certs" / "line000.json").exists()


def test_scan_multiple_crossings():
    # refuted near both ends (lhs = 0.2525), compatible in the middle
    line = ScanLine((0.0, 0.45, 0.5), (0.45, 0.0, 0.5), "two crossings")
    assert two_copy_lhs(*line.point(0)) > 0.25 > two_copy_lhs(*line.point(0.5))
    pts = scan_boundary(ScanJob((line,), k=2, d=2, probes=8))
    assert pts[0].status == "multiple_crossings"
    assert math.isnan(pts[0].t)
    assert "status flips" in pts[0].detail


def test_scan_threads_deterministic():
    lines = k2_lines()[:3]
    a = scan_boundary(ScanJob(lines))
    b = scan_boundary(ScanJob(lines, threads=3))
    assert [p.t for p in a] == [p.t for p in b]


def test_flat_jobs():
    s = flat_spectra(FlatSpectraJob(4, (3, 2, 2), 2, 4))
    assert s.subsystems == [(0, 1), (0, 2), (0, 3), (0, 1, 2, 3)]
    with pytest.raises(ValueError):
        FlatSpectraJob(5, (1, 1, 1), 2)
    with pytest.raises(ValueError):
        FlatSpectraJob(3, (0, 1, 1), 2)
    assert run_flat(FlatSpectraJob(3, (2, 2, 2), 2, 2)).status is Status.NOT_REFUTED
    assert run_flat(FlatSpectraJob(3, (1, 1, 2), 2, 2)).refuted


def test_dims_table_all_rows():
    table = dims_table()
    assert len(table) == len(REFERENCE_DIMS_ROWS)
    assert all(r["match"] for r in table)
    custom = dims_table([("x", 2, 2, 2)])
    assert "match" not in custom[0] and custom[0]["n_sym"] == 4


def test_purity_formulas(rng):
    # pure product states saturate the k=2 inequality
    psi = np.zeros(8)
    psi[0] = 1
    rho = np.outer(psi, psi)[None]
    p = {s: np.sum(marginal_spectra(rho, [2, 2, 2], s) ** 2) for s in [(0, 1), (0, 2), (1, 2)]}
    assert purity_k2(p[(0, 1)], p[(0, 2)], p[(1, 2)]) == pytest.approx(0.0)
    assert purity_k4(1, 1, 1, 1, 1, 1) == pytest.approx(0.0)


def test_k4_inequality_fails_for_qutrit_a():
    # closed form: (2 - 10 alpha) t^2 + O(t^3); negative for small t since alpha > 1/5
    for t in (0.01, 0.05, 0.1):
        rho = qutrit_counterexample(t)
        assert np.isclose(np.trace(rho), 1)
        dims = (3, 2, 2)
        p = {(s, l): float(np.sum(marginal_spectra(rho[None], dims, s) ** l))
             for s in [(0, 1), (0, 2), (1, 2)] for l in (2, 4)}
        assert p[(0, 1), 2] == pytest.approx((1 - t) ** 2 + t ** 2)
        assert p[(1, 2), 2] == pytest.approx((1 - 2 * t) ** 2 + 2 * t ** 2)
        v4 = purity_k4(p[(0, 1), 2], p[(0, 2), 2], p[(1, 2), 2], p[(0, 1), 4], p[(0, 2), 4], p[(1, 2), 4])
        expected = -ALPHA + 2 * (1 + ALPHA) * t ** 2 - ALPHA * ((1 - 2 * t) ** 4 - 2 * (1 - t) ** 4)
        assert v4 == pytest.approx(expected, abs=1e-12)
        assert v4 < 0
        assert purity_k2(p[(0, 1), 2], p[(0, 2), 2], p[(1, 2), 2]) == pytest.approx(2 * t ** 2)


def test_purity_report_small():
    r = purity_check(n_states=400, certificates=False)
    assert r.random_passed
    assert len(r.per_dims) == 8
    assert r.counterexample["value"] < 0
    assert any("random-state check" in line for line in r.lines())


def test_kron():
    job = KroneckerJob((3,), (3,), (3,))
    assert run_kron(job).status is Status.NOT_REFUTED
    assert run_kron(KroneckerJob((1, 1), (2,), (2,))).refuted
    assert run_kron(KroneckerJob((3,), (2, 1), (1, 1, 1))).refuted
    with pytest.raises(ValueError):
        KroneckerJob((2,), (3,), (2,))
    assert kron_default_d(KroneckerJob((1, 1, 1), (2, 1), (3,)), 2) == 3
    s = kron_spectra(KroneckerJob((2, 1), (2, 1), (1, 1, 1)))
    assert s[(0, 1)] == pytest.approx((1 / 3,) * 3)


def test_k4_boundary_inside_k2():
    lines = k2_lines()[:3]
    k2 = scan_boundary(ScanJob(lines, k=2, d=2))
    k4 = scan_boundary(ScanJob(lines, k=4, d=2, mode="cycles"))
    for a, b in zip(k2, k4):
        assert a.status == b.status == "ok"
        # refuted side starts at l_ab = 0, so a larger crossing means a larger refuted set
        assert b.point[0] >= a.point[0] - 1e-3
