"""
Empirical competitive ratios
============================

Weibull items, several (beta, G) cells, every algorithm on the same trials.
The CSV is the record; the SVG is a quick look.
"""

# %%
from pathlib import Path

from gbp import harness

g = 0.75
config = harness.ExperimentConfig.from_dict({
    "algorithms": ["nextfit", "worstfit", "firstfit", "bestfit", "harmonic10"],
    "tau_rule": "empirical",
    "cells": [[x / g, g] for x in (2, 5, 10)],
    "n": 1000,
    "trials": 5,
})
records = harness.run_experiment(config)

# %%
for s in harness.summarize(records):
    print(f"{s['algorithm']:11s} bG={s['beta'] * s['green']:5.2f} mean {s['mean']:.4f} +- {s['stderr']:.4f}")

# %%
out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)
harness.emit_csv(records, out / "experiment.csv")
(out / "experiment.svg").write_text(harness.experiment_svg(records))
print("wrote", out / "experiment.csv")
