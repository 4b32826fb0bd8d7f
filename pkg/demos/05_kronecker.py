"""Vanishing Kronecker coefficients.

g(lam, mu, nu) is nonzero for some dilation exactly when the normalized
spectra lam/m, mu/m, nu/m are compatible as marginals of a bipartite state
(nu on the joint system).  A dimension-free certificate therefore shows
g(t lam, t mu, t nu) = 0 for every t.
"""
from specrefute.experiments import KroneckerJob, run_kron

for lam, mu, nu in [((2,), (2,), (2,)), ((1, 1), (2,), (2,)), ((3,), (2, 1), (1, 1, 1)),
                    ((2, 1), (2, 1), (1, 1, 1)), ((2, 2), (2, 2), (4,))]:
    v = run_kron(KroneckerJob(lam, mu, nu), k=2)
    tag = "vanishes for all dilations" if v.refuted and v.certificate.dimension_free else "not excluded at k=2"
    print(f"g({lam}, {mu}, {nu}): {tag}")
