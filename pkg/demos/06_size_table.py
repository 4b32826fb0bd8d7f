"""How much the symmetry reduction saves.

Compares the number of complex variables of the dense program on
(C^d)^(n k) with the block-diagonal one.
"""
from specrefute.experiments import dims_table

print(f"{'system':>11} {'k':>2} {'dense':>10} {'reduced':>8} {'blocks':>6} {'max':>4}")
for r in dims_table():
    print(f"{r['system']:>11} {r['k']:>2} {r['n_naive']:>10.3g} {r['n_sym']:>8} {r['blocks']:>6} {r['max_block']:>4}")
