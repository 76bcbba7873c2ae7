"""Experiment harness: parameter grids, repeated trials, CSV and SVG output."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from . import bounds
from .algorithms import AlgorithmKind, pack
from .core import CostParams, DomainError, GBPError, opt_lower_bound
from .instancegen import GeneratorSpec, sample, trial_seed

log = logging.getLogger(__name__)

CSV_HEADER = ["algorithm", "beta", "green", "tau", "trial", "seed", "cost", "opt_lb", "empirical_cr"]
SWEEP_HEADER = ["beta", "green", "algorithm", "lower", "upper", "tau_opt"]
DEFAULT_SEED = 20240601


@dataclass(frozen=True)
class TauRule:
    """How the threshold is picked for a cell: fixed, full, theory or empirical."""

    kind: str
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("fixed", "full", "theory", "empirical"):
            raise DomainError(f"unknown tau rule {self.kind!r}")

    @classmethod
    def parse(cls, spec) -> "TauRule":
        if isinstance(spec, TauRule):
            return spec
        if isinstance(spec, (int, float)):
            return cls("fixed", float(spec))
        if isinstance(spec, dict):
            return cls("fixed", float(spec["fixed"]))
        return cls(str(spec))

    def resolve(self, kind: AlgorithmKind, params: CostParams) -> float:
        b, g = params.beta, params.green
        full = 1 - g
        if self.kind == "fixed":
            if not (0 <= self.value <= full + 1e-12):
                raise DomainError(f"fixed tau {self.value} outside [0, 1 - G] = [0, {full}]")
            return min(self.value, full)
        if self.kind == "full" or params.bg <= 1:
            return full
        if self.kind == "theory":
            name = "almostanyfit" if kind.name in ("firstfit", "bestfit") else kind.name
            return bounds.theory_tau(name, b, g)
        if kind.name in ("firstfit", "bestfit"):
            tau = 0.0
        elif kind.name == "worstfit":
            tau = 1 / (2 * b)
        else:
            tau = 1 / b
        return min(max(tau, 0.0), full)


@dataclass
class ExperimentConfig:
    algorithms: list  # of (AlgorithmKind, TauRule)
    cells: list  # of (beta, green)
    distribution: dict = field(default_factory=lambda: {"kind": "weibull", "shape": 3.0})
    n: int = 3000
    trials: int = 20
    seed: int = DEFAULT_SEED

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        default_rule = TauRule.parse(data.get("tau_rule", "theory"))
        algs = []
        for entry in data.get("algorithms", ["nextfit", "worstfit", "firstfit", "bestfit", "harmonic10"]):
            if isinstance(entry, str):
                algs.append((AlgorithmKind.parse(entry), default_rule))
            else:
                kind = AlgorithmKind.parse(entry["name"], entry.get("k"))
                algs.append((kind, TauRule.parse(entry.get("tau_rule", default_rule))))
        cells = _cells(data)
        seed = int(os.environ.get("GBP_SEED", data.get("seed", DEFAULT_SEED)))
        return cls(algs, cells, dict(data.get("distribution", {"kind": "weibull", "shape": 3.0})),
                   int(data.get("n", 3000)), int(data.get("trials", 20)), seed)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def small_bg_green_grid(beta: float, num: int = 30) -> list:
    """num greens evenly spaced in (0, min(1, 1/beta)]."""
    top = 1.0 if beta <= 1 else 1 / beta
    return [top * k / num for k in range(1, num + 1)]


def large_bg_beta_grid(green: float, num: int = 30, lo: float = 1.005, hi: float = 20.0) -> list:
    """num betas with beta*G evenly spaced in [lo, hi]."""
    return [x / green for x in np.linspace(lo, hi, num).tolist()]


def _cells(data: dict) -> list:
    if "cells" in data:
        return [(float(b), float(g)) for b, g in data["cells"]]
    if "grid" in data:
        grid = data["grid"]
        if grid["kind"] == "green-sweep":
            b = float(grid["beta"])
            return [(b, g) for g in small_bg_green_grid(b, int(grid.get("num", 30)))]
        if grid["kind"] == "beta-sweep":
            g = float(grid["green"])
            betas = large_bg_beta_grid(g, int(grid.get("num", 30)), float(grid.get("bg_min", 1.005)),
                                       float(grid.get("bg_max", 20.0)))
            return [(b, g) for b in betas]
        raise DomainError(f"unknown grid kind {grid['kind']!r}")
    return [(float(b), float(g)) for b in data["betas"] for g in data["greens"]]


@dataclass
class ExperimentRecord:
    algorithm: str
    beta: float
    green: float
    tau: float
    trial: int
    seed: int
    cost: float
    opt_lb: float
    empirical_cr: float
    error: str | None = None

    def sort_key(self):
        return (self.algorithm, self.beta, self.green, -1.0 if math.isnan(self.tau) else self.tau, self.trial)


def _instance(config: ExperimentConfig, trial: int):
    seed = trial_seed(config.seed, trial)
    d = config.distribution
    spec = GeneratorSpec(d.get("kind", "weibull"), config.n, seed, float(d.get("shape", 3.0)),
                         d.get("path"), bool(d.get("shuffle", d.get("kind") == "bpplib")))
    return seed, sample(spec)


def _run_cell(args) -> list:
    config, beta, green = args
    out = []
    instances = [_instance(config, t) for t in range(config.trials)]
    try:
        params = CostParams(beta, green)
    except GBPError as exc:
        for kind, _ in config.algorithms:
            out.append(_error_row(kind.label, beta, green, math.nan, 0, config.seed, exc))
        return out
    for kind, rule in config.algorithms:
        try:
            tau = rule.resolve(kind, params)
        except GBPError as exc:
            out.append(_error_row(kind.label, beta, green, math.nan, 0, config.seed, exc))
            continue
        for t, (seed, inst) in enumerate(instances):
            try:
                cost = pack(kind, tau, inst, params).packing.cost()
                lb = opt_lower_bound(inst.total_size, params)
                out.append(ExperimentRecord(kind.label, beta, green, tau, t, seed, cost, lb, cost / lb))
            except GBPError as exc:
                out.append(_error_row(kind.label, beta, green, tau, t, seed, exc))
    return out


def _error_row(alg, beta, green, tau, trial, seed, exc) -> ExperimentRecord:
    log.warning("cell %s beta=%s G=%s failed: %s", alg, beta, green, exc)
    nan = math.nan
    return ExperimentRecord(alg, beta, green, tau, trial, seed, nan, nan, nan, str(exc))


def run_experiment(config: ExperimentConfig, workers: int = 1) -> list:
    """Run every (cell, algorithm, trial) and return records in canonical order."""
    jobs = [(config, b, g) for b, g in config.cells]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            chunks = list(ex.map(_run_cell, jobs))
    else:
        chunks = [_run_cell(j) for j in jobs]
    records = [r for c in chunks for r in c]
    records.sort(key=ExperimentRecord.sort_key)
    return records


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.12g}"


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.algorithm, _fmt(r.beta), _fmt(r.green), _fmt(r.tau), r.trial, r.seed,
                    _fmt(r.cost), _fmt(r.opt_lb), _fmt(r.empirical_cr)])
    return buf.getvalue()


def emit_csv(records, path: str | Path) -> None:
    Path(path).write_text(records_csv(records))


def read_csv(path: str | Path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [ExperimentRecord(r["algorithm"], float(r["beta"]), float(r["green"]), float(r["tau"]),
                             int(r["trial"]), int(r["seed"]), float(r["cost"]), float(r["opt_lb"]),
                             float(r["empirical_cr"])) for r in rows]


def summarize(records) -> list:
    """Mean and standard error of the empirical ratio per (algorithm, beta, green, tau)."""
    groups: dict = {}
    for r in records:
        if r.error is None and not math.isnan(r.empirical_cr):
            groups.setdefault((r.algorithm, r.beta, r.green, r.tau), []).append(r.empirical_cr)
    out = []
    for key in sorted(groups):
        v = np.array(groups[key])
        se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
        out.append({"algorithm": key[0], "beta": key[1], "green": key[2], "tau": key[3],
                    "mean": float(v.mean()), "stderr": se, "trials": int(v.size)})
    return out


def sweep_bounds(betas, greens, algorithms=bounds.BOUND_ALGORITHMS) -> list:
    rows = []
    for b in betas:
        for g in greens:
            for alg in algorithms:
                try:
                    rep = bounds.report(alg, float(b), float(g))
                except GBPError as exc:
                    log.warning("bounds %s beta=%s G=%s: %s", alg, b, g, exc)
                    continue
                rows.append({"beta": float(b), "green": float(g), "algorithm": rep.algorithm,
                             "lower": rep.lower, "upper": rep.upper, "tau_opt": rep.tau_optimal})
    return rows


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        up = "" if r["upper"] is None else _fmt(r["upper"])
        w.writerow([_fmt(r["beta"]), _fmt(r["green"]), r["algorithm"], _fmt(r["lower"]), up,
                    _fmt(r["tau_opt"])])
    return buf.getvalue()


# SVG output (self-contained, no external assets)

PALETTE = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666")


def _scale(lo, hi, a, b):
    span = (hi - lo) or 1.0
    return lambda v: a + (v - lo) / span * (b - a)


def svg_lines(series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
              width: int = 640, height: int = 400) -> str:
    """Line chart: one polyline per named series of (x, y) points."""
    pts = [p for s in series.values() for p in s if all(map(math.isfinite, p))]
    if not pts:
        pts = [(0.0, 0.0), (1.0, 1.0)]
    xs, ys = zip(*pts)
    left, right, top, bottom = 60, width - 130, 30, height - 45
    sx = _scale(min(xs), max(xs), left, right)
    sy = _scale(min(ys), max(ys), bottom, top)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
             f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
             f'<line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}" stroke="black"/>']
    for v in np.linspace(min(xs), max(xs), 5):
        parts.append(f'<text x="{sx(v):.1f}" y="{bottom + 14}" text-anchor="middle">{v:.3g}</text>')
    for v in np.linspace(min(ys), max(ys), 5):
        parts.append(f'<text x="{left - 4}" y="{sy(v) + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    parts.append(f'<text x="{(left + right) / 2:.1f}" y="{height - 8}" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(f'<text x="14" y="{(top + bottom) / 2:.1f}" text-anchor="middle" '
                 f'transform="rotate(-90 14 {(top + bottom) / 2:.1f})">{escape(ylabel)}</text>')
    for i, (name, s) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        good = [(x, y) for x, y in s if math.isfinite(x) and math.isfinite(y)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in good)
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        ly = top + 14 * i
        parts.append(f'<line x1="{right + 10}" y1="{ly}" x2="{right + 28}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{right + 32}" y="{ly + 4}">{escape(str(name))}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def svg_heatmap(values, xs, ys, title: str = "", xlabel: str = "", ylabel: str = "",
                width: int = 520, height: int = 440) -> str:
    """Heatmap of ``values[i][j]`` at (xs[j], ys[i]); one rect per cell."""
    v = np.asarray(values, dtype=float)
    finite = v[np.isfinite(v)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    left, right, top, bottom = 60, width - 80, 30, height - 45
    cw = (right - left) / max(1, len(xs))
    ch = (bottom - top) / max(1, len(ys))
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>']
    for i in range(len(ys)):
        for j in range(len(xs)):
            val = v[i, j]
            fill = "#dddddd" if not math.isfinite(val) else _ramp((val - lo) / ((hi - lo) or 1.0))
            y = bottom - (i + 1) * ch
            parts.append(f'<rect x="{left + j * cw:.2f}" y="{y:.2f}" width="{cw:.2f}" height="{ch:.2f}" '
                         f'fill="{fill}"><title>{xs[j]:.4g}, {ys[i]:.4g}: {val:.4g}</title></rect>')
    parts.append(f'<text x="{left}" y="{bottom + 14}">{xs[0]:.3g}</text>')
    parts.append(f'<text x="{right}" y="{bottom + 14}" text-anchor="end">{xs[-1]:.3g}</text>')
    parts.append(f'<text x="{left - 4}" y="{bottom}" text-anchor="end">{ys[0]:.3g}</text>')
    parts.append(f'<text x="{left - 4}" y="{top + 8}" text-anchor="end">{ys[-1]:.3g}</text>')
    parts.append(f'<text x="{(left + right) / 2:.1f}" y="{height - 8}" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(f'<text x="14" y="{(top + bottom) / 2:.1f}" text-anchor="middle" '
                 f'transform="rotate(-90 14 {(top + bottom) / 2:.1f})">{escape(ylabel)}</text>')
    for k, frac in enumerate(np.linspace(0, 1, 6)):
        y = bottom - k * (bottom - top) / 6
        parts.append(f'<rect x="{right + 15}" y="{y - 14:.1f}" width="14" height="14" fill="{_ramp(frac)}"/>')
        parts.append(f'<text x="{right + 33}" y="{y - 3:.1f}">{lo + frac * (hi - lo):.3g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _ramp(t: float) -> str:
    t = min(1.0, max(0.0, t))
    r = int(255 * t)
    g = int(80 + 120 * (1 - abs(2 * t - 1)))
    b = int(255 * (1 - t))
    return f"#{r:02x}{g:02x}{b:02x}"


def experiment_svg(records) -> str:
    """Mean empirical ratio per algorithm against beta*G (or G when beta*G varies with G only)."""
    summary = summarize(records)
    betas = {s["beta"] for s in summary}
    use_green = len(betas) == 1
    series: dict = {}
    for s in summary:
        x = s["green"] if use_green else s["beta"] * s["green"]
        series.setdefault(s["algorithm"], []).append((x, s["mean"]))
    for v in series.values():
        v.sort()
    return svg_lines(series, "mean empirical ratio", "G" if use_green else "beta*G", "cost / OPT lower bound")


def sweep_svg(rows, algorithm: str = "almostanyfit", which: str = "upper") -> str:
    sel = [r for r in rows if r["algorithm"] == algorithm]
    xs = sorted({r["green"] for r in sel})
    ys = sorted({r["beta"] for r in sel})
    grid = np.full((len(ys), len(xs)), np.nan)
    for r in sel:
        val = r[which]
        grid[ys.index(r["beta"]), xs.index(r["green"])] = np.nan if val is None else val
    return svg_heatmap(grid, xs, ys, f"{algorithm} {which} bound", "G", "beta")
