"""
The green bin packing cost model
================================

Each bin costs 1 to open, plus beta per unit of space used above the green
level G. This script walks through costs, packings and the offline lower bound.
"""

# %%
from gbp.core import CostParams, Instance, bin_cost, make_packing, opt_lower_bound, validate

params = CostParams(beta=2.0, green=0.5)
print(params.regime)  # beta*G = 1 still counts as the small regime

# %%
# A bin filled to 0.7 pays 0.2 of black space at rate 2
for level in (0.3, 0.5, 0.7, 1.0):
    print(f"level {level:.1f} -> cost {bin_cost(level, params):.2f}")

# %%
# Build a packing by hand and check it
inst = Instance([0.6, 0.4, 0.3, 0.2])
packing = make_packing(inst, [[0, 1], [2, 3]], params)
print(validate(inst, packing), packing.cost())

# %%
# The lower bound on the offline optimum switches form at beta*G = 1
for beta in (0.5, 2.0, 4.0):
    p = CostParams(beta, 0.5)
    print(beta, opt_lower_bound(inst.total_size, p))
