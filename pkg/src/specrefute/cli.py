"""Command-line interface.

Exit codes (all subcommands that produce a verdict):
  0  not refuted at the requested level
  1  refuted; a verified certificate was written
  2  error or solver inconclusive

The default solver can be set with the ``SPECREFUTE_SOLVER`` environment
variable (``embedded``, ``cvxpy`` or ``file:/path/to/solver``).
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from pathlib import Path

from . import __version__
from .assembler import CapacityError, assemble
from .experiments import (
    FlatSpectraJob,
    KroneckerJob,
    ScanJob,
    ScanLine,
    diagonal_line,
    dims_table,
    flat_spectra,
    k2_lines,
    kron_default_d,
    kron_spectra,
    purity_check,
    run_flat,
    run_kron,
    scan_boundary,
    scan_csv,
)
from .marginals import SpectrumSet
from .problems import load_problem, read_certificate, write_certificate
from .refuter import EPS_PSD, REFUTE_TOL, Status, Verdict, refute, verify_certificate
from .sdpa import export_sdpa, file_solver

log = logging.getLogger("specrefute")

EXIT = {Status.NOT_REFUTED: 0, Status.REFUTED: 1, Status.SOLVER_INCONCLUSIVE: 2}
ENV_SOLVER = "SPECREFUTE_SOLVER"


class UsageError(Exception):
    pass


def _solver(spec: str | None):
    spec = spec or os.environ.get(ENV_SOLVER) or "embedded"
    if spec in ("embedded", "cvxpy"):
        return spec
    if spec.startswith("file:") and len(spec) > 5:
        return file_solver(spec[5:])
    raise UsageError(f"unknown solver {spec!r}; use embedded, cvxpy or file:PATH")


def _ints(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(t) for t in text.replace(" ", "").split(",") if t)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _triple(text: str) -> tuple[float, float, float]:
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected three numbers, got {text!r}") from exc
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected three numbers, got {text!r}")
    return vals


def _fit_d(s: SpectrumSet) -> int:
    """Smallest local dimension whose subsystem dimensions hold every prescribed rank."""
    d = 1
    for a, mu in s.spectra.items():
        r = sum(1 for v in mu if v > 0)
        d = max(d, math.ceil(r ** (1.0 / len(a)) - 1e-12))
    return d


def _report(verdict: Verdict, out) -> None:
    print(f"verdict: {verdict.status.name}", file=out)
    print(f"value: {verdict.value:.9g}", file=out)
    diag = verdict.diagnostics
    print(f"level: n={diag.get('n')} d={diag.get('d')} k={diag.get('k')} mode={diag.get('mode')} "
          f"generators={diag.get('generators')} blocks={diag.get('blocks')}", file=out)
    if verdict.certificate is not None:
        c = verdict.certificate
        print(f"dimension-free: {c.dimension_free}", file=out)
        print("certificate:", file=out)
        for g, y in zip(c.generators, c.y):
            print(f"  {g.label():>24}  {y:+.9f}", file=out)
    elif verdict.status is Status.SOLVER_INCONCLUSIVE:
        print(f"solver status: {diag.get('solver_status')}", file=out)


def _emit_verdict(verdict: Verdict, spectra: SpectrumSet, cert_path: Path, out) -> int:
    _report(verdict, out)
    if verdict.refuted:
        write_certificate(cert_path, verdict.certificate, spectra)
        print(f"certificate written to {cert_path}", file=out)
    return EXIT[verdict.status]


# subcommands -----------------------------------------------------------------

def cmd_refute(args, out) -> int:
    spectra, defaults = load_problem(args.problem)
    k = args.k or int(defaults.get("k", 2))
    mode = args.mode or defaults.get("mode", "cycles")
    d = args.d or int(defaults.get("d", max(k, _fit_d(spectra))))
    p = assemble(spectra, d, k, mode, threads=args.threads)
    verdict = refute(p, solver=_solver(args.solver), tol=args.tol)
    cert = Path(args.output) if args.output else Path(args.problem).with_suffix(".cert.json")
    return _emit_verdict(verdict, spectra, cert, out)


def cmd_scan_boundary(args, out) -> int:
    if args.line:
        if len(args.line) % 2:
            raise UsageError("--line takes START END pairs")
        lines = tuple(ScanLine(a, b, f"line {i}") for i, (a, b) in
                      enumerate(zip(args.line[::2], args.line[1::2])))
    elif args.preset == "k2":
        lines = k2_lines()
    else:
        lines = (diagonal_line(args.bc),)
    k = args.k or 2
    d = args.d or max(k, 2)
    mode = args.mode or "cycles"
    job = ScanJob(lines, k=k, d=d, mode=mode, tol=args.scan_tol, probes=args.probes,
                  solver=_solver(args.solver), threads=args.threads)
    points = scan_boundary(job)
    if args.output:
        cert_dir = args.cert_dir or str(Path(args.output).with_suffix("")) + "_certs"
        Path(args.output).write_text(scan_csv(points, job, cert_dir))
        print(f"wrote {len(points)} rows to {args.output}; certificates in {cert_dir}", file=out)
    else:
        cert_dir = args.cert_dir or "scan_certs"
        out.write(scan_csv(points, job, cert_dir))
    bad = [bp for bp in points if bp.status in ("inconclusive", "multiple_crossings")]
    for bp in bad:
        print(f"warning: {bp.line.label}: {bp.status} {bp.detail}", file=sys.stderr)
    return 2 if bad else 0


def cmd_flat_spectra(args, out) -> int:
    k = args.k or 4
    job = FlatSpectraJob(args.n, args.ranks, args.d or 2, k, args.mode or "factorizing",
                         pure=not args.mixed)
    verdict = run_flat(job, solver=_solver(args.solver))
    name = f"flat-n{job.n}-{'-'.join(map(str, job.ranks))}-d{job.d}-k{job.k}.cert.json"
    return _emit_verdict(verdict, flat_spectra(job), Path(args.output or name), out)


def cmd_dims_table(args, out) -> int:
    rows = None
    if args.row:
        rows = [(f"n={n} d={d}", n, d, k) for n, d, k in args.row]
    table = dims_table(rows)
    buf = io.StringIO()
    fields = ["system", "n", "d", "k", "n_naive", "n_sym", "blocks", "max_block"]
    if rows is None:
        fields.append("match")
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    w.writerows(table)
    if args.output:
        Path(args.output).write_text(buf.getvalue())
    else:
        out.write(buf.getvalue())
    return 0


def cmd_purity_check(args, out) -> int:
    report = purity_check(n_states=args.states, seed=args.seed, solver=_solver(args.solver),
                          certificates=not args.no_certificates)
    text = "\n".join(report.lines()) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    out.write(text)
    return 0 if report.random_passed else 1


def cmd_kron(args, out) -> int:
    job = KroneckerJob(args.lam, args.mu, args.nu)
    k = args.k or 2
    d = args.d or kron_default_d(job, k)
    verdict = run_kron(job, k=k, d=d, mode=args.mode or "cycles", solver=_solver(args.solver))
    name = "kron-" + "_".join("-".join(map(str, p)) for p in (job.lam, job.mu, job.nu)) + ".cert.json"
    code = _emit_verdict(verdict, kron_spectra(job), Path(args.output or name), out)
    if verdict.refuted:
        if verdict.certificate.dimension_free:
            print("Kronecker coefficient g(t*lam, t*mu, t*nu) = 0 for every t >= 1", file=out)
        else:
            print(f"certificate holds for local dimension {d} only (k > d)", file=out)
    return code


def cmd_verify_cert(args, out) -> int:
    cert, spectra = read_certificate(args.certificate)
    if args.problem:
        spectra, _ = load_problem(args.problem)
    if spectra is None:
        raise UsageError("certificate carries no spectra; pass --problem")
    report = verify_certificate(cert, spectra, eps_psd=args.eps_psd, n_samples=args.samples)
    print(report.summary(), file=out)
    print("PASS" if report.passed else "FAIL", file=out)
    return 0 if report.passed else 1


def cmd_export_sdpa(args, out) -> int:
    spectra, defaults = load_problem(args.problem)
    k = args.k or int(defaults.get("k", 2))
    mode = args.mode or defaults.get("mode", "cycles")
    d = args.d or int(defaults.get("d", max(k, _fit_d(spectra))))
    p = assemble(spectra, d, k, mode, threads=args.threads)
    path = args.output or str(Path(args.problem).with_suffix(".dat-s"))
    prob = export_sdpa(p, path)
    print(f"wrote {path}: {prob.m} variables, {len(prob.block_struct)} blocks", file=out)
    return 0


# parser ------------------------------------------------------------------------

def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    def default(v):
        return argparse.SUPPRESS if suppress else v

    g = p.add_argument_group("level and solver")
    g.add_argument("--k", type=int, default=default(None), help="number of copies")
    g.add_argument("--d", type=int, default=default(None), help="height bound / local dimension")
    g.add_argument("--mode", choices=["cycles", "factorizing"], default=default(None))
    g.add_argument("--tol", type=float, default=default(REFUTE_TOL), help="refutation threshold on the optimum")
    g.add_argument("--solver", default=default(None), help="embedded | cvxpy | file:PATH")
    g.add_argument("--threads", type=int, default=default(1))
    g.add_argument("--output", "-o", default=default(None))
    g.add_argument("--verbose", "-v", action="count", default=default(0))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specrefute",
                                     description="Refute spectral marginal problems with a symmetry-reduced SDP.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        _add_globals(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("refute", cmd_refute, "search for an incompatibility certificate for a problem file")
    p.add_argument("problem")

    p = add("scan-boundary", cmd_scan_boundary, "bisect rank-2 three-party lines for the refutation boundary")
    p.add_argument("--preset", choices=["k2", "diagonal"], default="k2")
    p.add_argument("--bc", type=float, default=0.5, help="l_bc for the diagonal preset")
    p.add_argument("--line", type=_triple, nargs="+", metavar="AB,AC,BC",
                   help="explicit START END pairs of (l_ab, l_ac, l_bc)")
    p.add_argument("--scan-tol", type=float, default=1e-3, help="bisection tolerance (coordinate distance)")
    p.add_argument("--probes", type=int, default=8)
    p.add_argument("--cert-dir")

    p = add("flat-spectra", cmd_flat_spectra, "test flat two-body spectra of given ranks")
    p.add_argument("--n", type=int, choices=[3, 4], default=3)
    p.add_argument("--ranks", type=_ints, required=True, help="r_AB,r_AC,r_BC (n=3) or r_AB,r_AC,r_AD (n=4)")
    p.add_argument("--mixed", action="store_true", help="do not impose purity of the joint state")

    p = add("dims-table", cmd_dims_table, "variable counts of the dense and block-reduced programs")
    p.add_argument("--row", type=_ints, action="append", metavar="N,D,K")

    p = add("purity-check", cmd_purity_check, "check the two- and four-copy purity inequalities")
    p.add_argument("--states", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--no-certificates", action="store_true")

    p = add("kron", cmd_kron, "test vanishing of a Kronecker coefficient")
    p.add_argument("--lam", type=_ints, required=True)
    p.add_argument("--mu", type=_ints, required=True)
    p.add_argument("--nu", type=_ints, required=True)

    p = add("verify-cert", cmd_verify_cert, "re-verify a certificate file")
    p.add_argument("certificate")
    p.add_argument("--problem", help="problem file (if the certificate has no spectra)")
    p.add_argument("--eps-psd", type=float, default=EPS_PSD)
    p.add_argument("--samples", type=int, default=1000)

    p = add("export-sdpa", cmd_export_sdpa, "write the block program in SDPA sparse format")
    p.add_argument("problem")
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, out)
    except (ValueError, UsageError, CapacityError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
