"""SDPA sparse format (``.dat-s``) export/import and external solver bridge.

Exported program, in SDPA primal form
``minimize c.x  s.t.  sum_i x_i F_i - F_0 >= 0``:

* variable ``x_i`` is the coefficient ``y_i`` of generator ``i`` (the header
  comments list the generators in order);
* ``c_i`` is the target ``q_i``;
* blocks ``1..B`` hold the symmetry-reduced coefficient matrices, ``F_0 = 0``;
* the last block is a 2-entry diagonal block encoding the trace
  normalization ``sum_i w_i y_i = 1`` as two inequalities.

A negative optimum refutes.  Solutions are read in the CSDP layout (a line
with ``y`` followed by ``matno blkno i j value`` rows) or from SDPA's
``xVec = {...}`` output.
"""
from __future__ import annotations

import os
import re
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assembler import BlockSDP

__all__ = [
    "SDPAProblem",
    "export_sdpa",
    "write_sdpa",
    "read_sdpa",
    "read_solution",
    "solve_sdpa_problem",
    "file_solver",
]

_ZERO = 1e-15


@dataclass
class SDPAProblem:
    m: int
    block_struct: list[int]
    c: np.ndarray
    # entries[matno] -> list of (block, i, j, value), all 1-based
    entries: dict = field(default_factory=dict)
    comments: list[str] = field(default_factory=list)

    def matrices(self, matno: int) -> list[np.ndarray]:
        """Dense blocks of ``F_matno``; diagonal (LP) blocks come back as square diagonals."""
        mats = [np.zeros((abs(s), abs(s))) for s in self.block_struct]
        for blk, i, j, v in self.entries.get(matno, []):
            mats[blk - 1][i - 1, j - 1] = v
            mats[blk - 1][j - 1, i - 1] = v
        return mats


def _fmt(v: float) -> str:
    return repr(float(v))


def to_sdpa(p: BlockSDP) -> SDPAProblem:
    m = p.n_generators
    struct = [b.shape[1] for b in p.blocks.values()] + [-2]
    entries: dict = {0: [(len(struct), 1, 1, 1.0), (len(struct), 2, 2, -1.0)]}
    for g in range(m):
        rows = []
        for blk, b in enumerate(p.blocks.values(), start=1):
            mat = b[g]
            ii, jj = np.nonzero(np.triu(np.abs(mat) > _ZERO))
            rows.extend((blk, int(i) + 1, int(j) + 1, float(mat[i, j])) for i, j in zip(ii, jj))
        if p.weights[g] != 0:
            rows.append((len(struct), 1, 1, float(p.weights[g])))
            rows.append((len(struct), 2, 2, -float(p.weights[g])))
        entries[g + 1] = rows
    comments = [
        f"specrefute refutation program n={p.n} d={p.d} k={p.k} mode={p.mode}",
        "variables are generator coefficients y; negative optimum refutes",
    ]
    comments += [f"x{g + 1} = {gen.label()}" for g, gen in enumerate(p.generators)]
    comments += ["block " + str(i + 1) + " = " + "x".join(str(l.parts) for l in key)
                 for i, key in enumerate(p.blocks)]
    return SDPAProblem(m, struct, np.array(p.targets, dtype=float), entries, comments)


def write_sdpa(prob: SDPAProblem, path) -> None:
    with open(path, "w") as fh:
        for line in prob.comments:
            fh.write(f"* {line}\n")
        fh.write(f"{prob.m} = mDIM\n")
        fh.write(f"{len(prob.block_struct)} = nBLOCK\n")
        fh.write(" ".join(str(s) for s in prob.block_struct) + " = bLOCKsTRUCT\n")
        fh.write(" ".join(_fmt(v) for v in prob.c) + "\n")
        for matno in sorted(prob.entries):
            for blk, i, j, v in prob.entries[matno]:
                fh.write(f"{matno} {blk} {i} {j} {_fmt(v)}\n")


def export_sdpa(p: BlockSDP, path) -> SDPAProblem:
    """Write ``p`` as an SDPA sparse file; returns the in-memory form."""
    prob = to_sdpa(p)
    write_sdpa(prob, path)
    return prob


_SPLIT = re.compile(r"[\s,{}()]+")


def _numbers(line: str) -> list[str]:
    return [t for t in _SPLIT.split(line.split("=")[0].strip()) if t]


def read_sdpa(path) -> SDPAProblem:
    comments = []
    body = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line[0] in "*\"":
                comments.append(line[1:].strip())
                continue
            body.append(line)
    if len(body) < 4:
        raise ValueError(f"{path}: truncated SDPA file")
    m = int(_numbers(body[0])[0])
    nblock = int(_numbers(body[1])[0])
    struct = [int(float(t)) for t in _numbers(body[2])][:nblock]
    c = np.array([float(t) for t in _numbers(body[3])][:m])
    entries: dict = {}
    for line in body[4:]:
        tok = line.split()
        matno, blk, i, j = (int(t) for t in tok[:4])
        entries.setdefault(matno, []).append((blk, i, j, float(tok[4])))
    if len(struct) != nblock or c.size != m:
        raise ValueError(f"{path}: header does not match its contents")
    return SDPAProblem(m, struct, c, entries, comments)


def read_solution(path, m: int) -> np.ndarray:
    """Primal vector ``x`` (the generator coefficients) from a solver output file."""
    text = Path(path).read_text()
    match = re.search(r"xVec\s*=\s*\{([^}]*)\}", text)
    if match:
        vals = [float(t) for t in _SPLIT.split(match.group(1)) if t]
    else:
        first = next(line for line in text.splitlines() if line.strip())
        vals = [float(t) for t in first.split()]
    if len(vals) != m:
        raise ValueError(f"{path}: expected {m} values, found {len(vals)}")
    return np.array(vals)


def solve_sdpa_problem(prob: SDPAProblem) -> tuple[str, np.ndarray | None, float]:
    """Solve an imported SDPA problem with CVXPY/Clarabel; returns ``(status, x, value)``."""
    import cvxpy as cp

    x = cp.Variable(prob.m)
    mats = [prob.matrices(i) for i in range(prob.m + 1)]
    cons = []
    for blk, size in enumerate(prob.block_struct):
        expr = sum(x[i - 1] * mats[i][blk] for i in range(1, prob.m + 1)) - mats[0][blk]
        if size < 0:
            cons.append(cp.diag(expr) >= 0)
        else:
            cons.append(0.5 * (expr + expr.T) >> 0)
    problem = cp.Problem(cp.Minimize(prob.c @ x), cons)
    problem.solve(solver=cp.CLARABEL)
    if x.value is None:
        return problem.status, None, float("nan")
    return problem.status, np.asarray(x.value), float(problem.value)


def file_solver(executable: str, timeout: float | None = None):
    """Adapter running an external SDPA-format solver as ``executable IN OUT``.

    The returned callable fits the ``solver`` argument of
    :func:`specrefute.refuter.refute`.
    """
    def run(p: BlockSDP):
        with tempfile.TemporaryDirectory() as tmp:
            src = os.path.join(tmp, "problem.dat-s")
            out = os.path.join(tmp, "problem.sol")
            export_sdpa(p, src)
            try:
                proc = subprocess.run([executable, src, out], capture_output=True, text=True,
                                      timeout=timeout)
            except (OSError, subprocess.TimeoutExpired) as exc:
                return "error", None, {"error": str(exc)}
            info = {"returncode": proc.returncode}
            if not os.path.exists(out):
                info["stderr"] = proc.stderr[-2000:]
                return "error", None, info
            try:
                y = read_solution(out, p.n_generators)
            except (ValueError, StopIteration) as exc:
                info["error"] = str(exc)
                return "error", None, info
        status = "optimal" if proc.returncode == 0 else f"returncode {proc.returncode}"
        return status, y, info

    return run
