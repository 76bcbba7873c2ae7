"""
Online algorithms with a threshold
==================================

NextFit, WorstFit, FirstFit, BestFit and Harmonic(K) run against an effective
capacity G + tau. Items larger than that go alone into a sealed bin.
"""

# %%
import numpy as np

from gbp.algorithms import ALL_KINDS, OnlinePacker, FIRST_FIT, pack
from gbp.core import CostParams, Instance
from gbp.instancegen import rng_for, sample_weibull

params = CostParams(beta=8.0, green=0.5)
inst = Instance(sample_weibull(rng_for(1), 2000))

# %%
# Cost of each algorithm as the threshold grows from 0 to 1 - G
for kind in ALL_KINDS:
    costs = [pack(kind, float(t), inst, params).packing.cost() for t in np.linspace(0, 0.5, 6)]
    print(f"{kind.label:11s}", " ".join(f"{c:8.1f}" for c in costs))

# %%
# The streaming packer takes one item at a time and keeps a running cost
sp = OnlinePacker(FIRST_FIT, params, tau=0.0)
for x in inst.items[:10]:
    sp.add(float(x))
print(sp.running_cost, len(sp.packing().bins))

# %%
# Decision log: which bin each item went to
res = pack(FIRST_FIT, 0.0, Instance(inst.items[:5]), params, log=True)
for row in res.log:
    print(row)
