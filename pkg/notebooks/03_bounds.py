"""
Competitive ratio bounds
========================

Closed-form lower and upper bounds per algorithm, the threshold that
minimises each upper bound, and a heatmap over (beta, G).
"""

# %%
from pathlib import Path

import numpy as np

from gbp import bounds, harness

for alg in bounds.BOUND_ALGORITHMS:
    rep = bounds.report(alg, 1.0, 0.5)
    print(f"{alg:13s} lower {rep.lower:.4f} upper {rep.upper}")

# %%
# In the large regime each algorithm uses its own threshold
for alg in ("nextfit", "worstfit", "almostanyfit"):
    rep = bounds.report(alg, 16.0, 0.25)
    print(f"{alg:13s} tau {rep.tau_used:.4f} upper {rep.upper:.4f}")

# %%
# As beta goes to zero the classical ratios come back
for alg in ("nextfit", "worstfit", "almostanyfit", "harmonic"):
    print(alg, round(bounds.report(alg, 1e-9, 0.5).upper, 4))

# %%
rows = harness.sweep_bounds(np.linspace(0.1, 10, 25), np.linspace(0.05, 0.95, 25))
out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)
(out / "bounds_heatmap.svg").write_text(harness.sweep_svg(rows, "almostanyfit"))
print("wrote", out / "bounds_heatmap.svg")
