"""Pure states whose two-body marginals have flat spectra.

For a pure four-party state we fix the ranks of rho_AB, rho_AC, rho_AD and
ask whether flat spectra of those ranks can occur.  Purity enters as the
constraint that the full system has spectrum (1).  Rank pattern [3,2,2] is
excluded for four qubits from three copies on.
"""
from specrefute.experiments import FlatSpectraJob, run_flat

for n, ranks, d in [(3, (2, 2, 2), 2), (3, (1, 2, 3), 3), (4, (2, 2, 2), 2), (4, (3, 2, 2), 2)]:
    row = []
    for k in (2, 3, 4):
        v = run_flat(FlatSpectraJob(n, ranks, d, k, "factorizing"))
        row.append(f"k={k}: {'excluded' if v.refuted else '-':<8}")
    print(f"n={n} ranks={list(ranks)} d={d}  " + "  ".join(row))
