"""Linear inequalities in marginal purities.

The k=2 refutation certificate is the inequality
1 + tr rho_BC^2 - tr rho_AB^2 - tr rho_AC^2 >= 0, valid in every dimension.
A four-copy refinement with alpha = 0.329107 holds on random states, but its operator
form is not positive, and a simple pure state with a qutrit on A violates it.
This script prints the full report.
"""
from specrefute.experiments import purity_check

report = purity_check(n_states=4000)
print("\n".join(report.lines()))
