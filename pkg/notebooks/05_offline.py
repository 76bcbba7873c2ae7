"""
Offline solvers
===============

Exact branch and bound for small inputs, and the asymptotic approximation
scheme for larger ones.
"""

# %%
import numpy as np

from gbp.core import CostParams, Instance, opt_lower_bound
from gbp.offline import aptas, exact_opt, structure_violations

rng = np.random.default_rng(3)
inst = Instance(rng.uniform(0.05, 0.7, 12))
params = CostParams(4.0, 0.5)

# %%
res = exact_opt(inst, params)
print("exact", res.cost, "nodes", res.nodes_explored, "proven", res.proven_optimal)
print("lower bound", opt_lower_bound(inst.total_size, params))
print("structure", structure_violations(inst, res.packing))

# %%
for eps in (0.3, 0.5):
    ap = aptas(inst, params, eps)
    print(f"aptas eps={eps}: cost {ap.cost:.3f}, groups {ap.groups}, bin types {ap.bin_types}")
