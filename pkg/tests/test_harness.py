import json
import math
import re

import pytest

from gbp import harness as H
from gbp.algorithms import FIRST_FIT, NEXT_FIT, WORST_FIT, AlgorithmKind
from gbp.core import CostParams, DomainError


def small_config(**kw):
    data = {"algorithms": ["nextfit", "firstfit"], "cells": [[1.0, 0.5], [4.0, 0.5]],
            "n": 200, "trials": 3, "seed": 11}
    data.update(kw)
    return H.ExperimentConfig.from_dict(data)


def test_csv_header_and_row_count():
    recs = H.run_experiment(small_config())
    text = H.records_csv(recs)
    lines = text.splitlines()
    assert lines[0] == "algorithm,beta,green,tau,trial,seed,cost,opt_lb,empirical_cr"
    assert len(lines) == 1 + 2 * 2 * 3


def test_records_are_sorted_and_consistent():
    recs = H.run_experiment(small_config())
    assert recs == sorted(recs, key=H.ExperimentRecord.sort_key)
    for r in recs:
        assert r.empirical_cr == pytest.approx(r.cost / r.opt_lb)
        assert r.empirical_cr >= 1 - 1e-12


def test_every_algorithm_sees_the_same_instances():
    recs = H.run_experiment(small_config())
    seeds = {}
    for r in recs:
        seeds.setdefault(r.algorithm, []).append((r.beta, r.trial, r.seed, r.opt_lb))
    a, b = seeds.values()
    assert a == b


def test_run_is_deterministic_and_parallel_matches_serial():
    cfg = small_config()
    one = H.records_csv(H.run_experiment(cfg))
    assert one == H.records_csv(H.run_experiment(cfg))
    assert one == H.records_csv(H.run_experiment(cfg, workers=2))


def test_seed_env_override(monkeypatch):
    monkeypatch.setenv("GBP_SEED", "5")
    assert small_config().seed == 5
    monkeypatch.delenv("GBP_SEED")
    assert small_config().seed == 11


def test_failing_cell_leaves_error_rows_and_run_continues():
    cfg = small_config(cells=[[1.0, 0.5], [1.0, 1.5]],
                       algorithms=[{"name": "nextfit", "tau_rule": {"fixed": 0.6}}, "firstfit"])
    recs = H.run_experiment(cfg)
    errors = [r for r in recs if r.error]
    good = [r for r in recs if not r.error]
    assert {(r.algorithm, r.green) for r in errors} == {("nextfit", 0.5), ("nextfit", 1.5),
                                                       ("firstfit", 1.5)}
    assert len(good) == 3 and all(r.algorithm == "firstfit" for r in good)
    assert all(math.isnan(r.cost) for r in errors)
    assert "nan" in H.records_csv(recs)


def test_csv_round_trip(tmp_path):
    recs = H.run_experiment(small_config())
    path = tmp_path / "out.csv"
    H.emit_csv(recs, path)
    back = H.read_csv(path)
    assert [(r.algorithm, r.trial, r.seed) for r in back] == [(r.algorithm, r.trial, r.seed) for r in recs]
    assert [r.cost for r in back] == pytest.approx([r.cost for r in recs], rel=1e-11)


def test_tau_rules():
    small, large = CostParams(1, 0.5), CostParams(8, 0.25)
    assert H.TauRule("full").resolve(FIRST_FIT, large) == 0.75
    assert H.TauRule("theory").resolve(FIRST_FIT, small) == 0.5
    assert H.TauRule("theory").resolve(NEXT_FIT, large) == pytest.approx(
        H.bounds.nextfit_tau_optimal(8, 0.25)[0])
    assert H.TauRule("empirical").resolve(FIRST_FIT, large) == 0.0
    assert H.TauRule("empirical").resolve(WORST_FIT, large) == pytest.approx(1 / 16)
    assert H.TauRule("empirical").resolve(AlgorithmKind.parse("harmonic"), large) == pytest.approx(1 / 8)
    assert H.TauRule("empirical").resolve(NEXT_FIT, small) == 0.5
    assert H.TauRule.parse(0.1) == H.TauRule("fixed", 0.1)
    with pytest.raises(DomainError):
        H.TauRule("fixed", 0.9).resolve(NEXT_FIT, small)
    with pytest.raises(DomainError):
        H.TauRule("magic")


def test_grids():
    g = H.small_bg_green_grid(2.0, 10)
    assert len(g) == 10 and max(g) == pytest.approx(0.5) and min(g) > 0
    assert all(2.0 * x <= 1 + 1e-12 for x in g)
    b = H.large_bg_beta_grid(0.5, 5, 1.5, 20)
    assert [x * 0.5 for x in b] == pytest.approx([1.5, 6.125, 10.75, 15.375, 20])
    cfg = H.ExperimentConfig.from_dict({"grid": {"kind": "beta-sweep", "green": 0.5, "num": 4}})
    assert len(cfg.cells) == 4 and all(bb * gg > 1 for bb, gg in cfg.cells)
    cfg = H.ExperimentConfig.from_dict({"betas": [1, 2], "greens": [0.1, 0.2, 0.3]})
    assert len(cfg.cells) == 6
    with pytest.raises(DomainError):
        H.ExperimentConfig.from_dict({"grid": {"kind": "spiral"}})


def test_config_load(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"algorithms": ["bestfit", {"name": "harmonic", "k": 6}],
                             "cells": [[1, 0.5]], "distribution": {"kind": "uniform"}}))
    cfg = H.ExperimentConfig.load(p)
    assert [k.label for k, _ in cfg.algorithms] == ["bestfit", "harmonic6"]
    assert cfg.n == 3000 and cfg.trials == 20


def test_summarize():
    recs = H.run_experiment(small_config())
    summ = H.summarize(recs)
    assert len(summ) == 4
    assert all(s["trials"] == 3 and s["stderr"] >= 0 for s in summ)


def test_sweep_bounds_columns():
    rows = H.sweep_bounds([1.0, 4.0], [0.25, 0.5])
    text = H.sweep_csv(rows)
    assert text.splitlines()[0] == "beta,green,algorithm,lower,upper,tau_opt"
    general = [ln for ln in text.splitlines() if ",general," in ln]
    assert general and all(ln.split(",")[4] == "" for ln in general)
    assert len(rows) == 2 * 2 * 5


def svg_ok(svg):
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert "href" not in svg and "<script" not in svg and "<image" not in svg


def test_experiment_svg_uses_polylines():
    svg = H.experiment_svg(H.run_experiment(small_config()))
    svg_ok(svg)
    assert svg.count("<polyline") == 2


def test_sweep_svg_uses_rects():
    rows = H.sweep_bounds([0.5, 1.0, 1.5], [0.2, 0.4, 0.6, 0.8])
    svg = H.sweep_svg(rows, "almostanyfit")
    svg_ok(svg)
    assert len(re.findall(r"<rect [^>]*><title>", svg)) == 12
