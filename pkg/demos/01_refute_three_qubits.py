"""Refuting a three-qubit marginal problem with two copies.

Two two-body marginals are pure (rank 1) while the third is maximally mixed.
If rho_AB and rho_AC are both pure, the joint state is a product
|a>|b>|c> and rho_BC must be pure as well, so these spectra are
incompatible.  The two-copy level already finds a certificate.
"""
from specrefute import assemble, refute, verify_certificate
from specrefute.experiments import rank2_triple

spectra = rank2_triple(0.0, 0.0, 0.5)
problem = assemble(spectra, d=2, k=2)
print(f"{problem.n_generators} generators, {len(problem.blocks)} blocks of sizes {problem.block_sizes()}")

verdict = refute(problem)
print(verdict)
for g, y in zip(verdict.certificate.generators, verdict.certificate.y):
    print(f"  {g.label():>10}: {y:+.6f}")

# The certificate can be checked without trusting the solver.
report = verify_certificate(verdict.certificate, spectra)
print(report.summary())

# Maximally mixed marginals everywhere are realized by a GHZ state.
print(refute(assemble(rank2_triple(0.5, 0.5, 0.5), d=2, k=2)))
