"""Higher levels of the hierarchy exclude more spectra.

At (l_AB, l_AC, l_BC) = (0.15, 0.15, 0.5) the two-copy condition
(l_AB - 1/2)^2 + (l_AC - 1/2)^2 - (l_BC - 1/2)^2 <= 1/4 holds, so k = 2
cannot decide.  Four copies with factorizing permutations refute it.
We then bisect the symmetric slice l_AB = l_AC at both levels.
"""
from specrefute import assemble, refute
from specrefute.experiments import ScanJob, diagonal_line, quartic_slice_root, rank2_triple, scan_boundary

spectra = rank2_triple(0.15, 0.15, 0.5)
for k, d, mode in [(2, 2, "cycles"), (4, 4, "cycles"), (4, 4, "factorizing")]:
    p = assemble(spectra, d=d, k=k, mode=mode)
    v = refute(p)
    print(f"k={k} d={d} {mode:>11}: {v.status.name:<13} optimum {v.value:+.5f}")

for k, d, mode in [(2, 2, "cycles"), (4, 4, "factorizing")]:
    (bp,) = scan_boundary(ScanJob((diagonal_line(),), k=k, d=d, mode=mode))
    print(f"slice boundary at k={k} {mode}: lambda = {bp.point[0]:.4f}")
print(f"closed-form k=4 boundary on this slice: {quartic_slice_root():.4f}")
