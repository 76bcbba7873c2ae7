"""Worst-case input families with analytically known optimal costs.

Each generator returns an ``AdversaryInstance``: the item sequence, the
cost of a known optimal (or near-optimal) offline packing, and the ratio
the targeted online algorithm is expected to approach as ``n`` grows.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds
from .core import CostParams, DomainError, Instance, Regime, RegimeError

DEFAULT_EPS = 1e-7
MAX_ITEMS = 5_000_000


@dataclass(eq=False)
class AdversaryInstance:
    instance: Instance
    known_opt_cost: float
    target_ratio: float
    family: str
    params: CostParams
    tau: float
    n: int
    eps: float
    target_algorithm: str
    stages: list = field(default_factory=list)  # (prefix length, known opt cost)
    meta: dict = field(default_factory=dict)

    def sidecar(self) -> dict:
        return {
            "family": self.family,
            "params": self.params.to_dict(),
            "tau": self.tau,
            "n": self.n,
            "eps": self.eps,
            "target_algorithm": self.target_algorithm,
            "known_opt_cost": self.known_opt_cost,
            "target_ratio": self.target_ratio,
            "stages": [{"prefix": p, "known_opt_cost": c} for p, c in self.stages],
            "meta": self.meta,
        }


def write_adversary(adv: AdversaryInstance, path: str | Path) -> Path:
    """Write the instance as plain text plus a ``.json`` sidecar next to it."""
    from .core import write_instance

    path = Path(path)
    write_instance(adv.instance, path)
    side = path.with_suffix(path.suffix + ".json")
    side.write_text(json.dumps(adv.sidecar(), indent=1) + "\n")
    return side


def _eps(eps: float) -> float:
    if not (0 < eps < 0.01):
        raise DomainError(f"eps must lie in (0, 0.01), got {eps}")
    return eps


def _n(n: int, multiple: int = 1) -> int:
    if n < 1 or n % multiple:
        raise DomainError(f"n must be a positive multiple of {multiple}, got {n}")
    return int(n)


def _tau(tau: float | None, params: CostParams) -> float:
    full = 1 - params.green
    if tau is None:
        return full
    if not (-1e-12 <= tau <= full + 1e-12):
        raise DomainError(f"tau={tau} outside [0, 1 - G]")
    return min(max(tau, 0.0), full)


def _unit_opt(params: CostParams) -> float:
    if params.regime is Regime.SMALL_BG:
        return 1 + params.beta * (1 - params.green)
    return 1 / params.green


def sand_cost(volume: float, params: CostParams) -> float:
    """Cost of packing ``volume`` of infinitesimal items as cheaply as possible."""
    if volume <= 0:
        return 0.0
    if params.regime is Regime.SMALL_BG:
        m = max(1, math.ceil(volume - 1e-12))
        return m + params.beta * max(0.0, volume - m * params.green)
    return float(max(1, math.ceil(volume / params.green - 1e-12)))


def _check_items(count: int) -> None:
    if count > MAX_ITEMS:
        raise DomainError(f"family would emit {count} items (cap {MAX_ITEMS}); use a coarser grain")


def _make(items, family, params, tau, n, eps, opt, target, alg, meta=None) -> AdversaryInstance:
    inst = Instance(np.asarray(items, dtype=np.float64), label=family, source={"family": family})
    return AdversaryInstance(inst, opt, target, family, params, tau, n, eps, alg,
                             [(len(inst), opt)], meta or {})


def _pairs(a: float, b: float, n: int) -> np.ndarray:
    out = np.empty(2 * n)
    out[0::2] = a
    out[1::2] = b
    return out


def gen_nextfit_pairs(n: int, params: CostParams, eps: float = DEFAULT_EPS) -> AdversaryInstance:
    """(1, eps)^n: NextFit opens a bin per item, OPT pairs nothing."""
    n, eps = _n(n), _eps(eps)
    b, g = params.beta, params.green
    opt = n * (1 + b * (1 - g)) + sand_cost(n * eps, params)
    target = (2 + b * (1 - g)) / (1 + b * (1 - g))
    return _make(_pairs(1.0, eps, n), "nf-pairs", params, 1 - g, n, eps, opt, target, "nextfit")


def gen_worstfit_pairs(n: int, params: CostParams, eps: float = DEFAULT_EPS) -> AdversaryInstance:
    """(1/2, eps)^n: WorstFit spreads the halves one per bin."""
    n, eps = _n(n, 2), _eps(eps)
    b, g = params.beta, params.green
    opt = n / 2 * (1 + b * (1 - g)) + sand_cost(n * eps, params)
    target = (2 + b * max(0.0, 1 - 2 * g)) / (1 + b * (1 - g))
    return _make(_pairs(0.5, eps, n), "wf-pairs", params, 1 - g, n, eps, opt, target, "worstfit")


def gen_nextfit_tau_pairs(n: int, params: CostParams, tau: float,
                          eps: float = DEFAULT_EPS) -> AdversaryInstance:
    """(eps, G + tau)^n: NextFit with threshold alternates sand and full bins."""
    n, eps = _n(n), _eps(eps)
    tau = _tau(tau, params)
    b, g = params.beta, params.green
    opt = n * (1 + b * tau) + sand_cost(n * eps, params)
    target = (2 + tau * b) / (1 + tau * b)
    return _make(_pairs(eps, g + tau, n), "nf-tau-pairs", params, tau, n, eps, opt, target, "nextfit")


def sylvester_numbers(k: int) -> tuple:
    out = [2]
    while len(out) < k + 1:
        m = out[-1]
        out.append(m * (m - 1) + 1)
    return tuple(out)


def gen_sylvester(k: int, n: int, params: CostParams, eps: float = DEFAULT_EPS) -> AdversaryInstance:
    """k phases of n items, sizes 1/m + eps for Sylvester numbers m, smallest first.

    First Fit and Best Fit fill a bin per m - 1 items of a phase; OPT puts
    one item of each phase in each bin.
    """
    if not (1 <= k <= 4):
        raise DomainError(f"k must lie in 1..4, got {k}")
    eps = _eps(eps)
    ms = sylvester_numbers(k)[:k]
    n = _n(n, math.lcm(*[m - 1 for m in ms]))
    b, g = params.beta, params.green
    items = np.concatenate([np.full(n, 1 / m + eps) for m in reversed(ms)])
    level = math.fsum(1 / m for m in ms) + k * eps
    if level > 1:
        raise DomainError("eps too large: OPT bins would overflow")
    opt = n * (1 + b * max(0.0, level - g))
    alg = math.fsum((1 + b * max(0.0, (m - 1) / m - g)) / (m - 1) for m in ms)
    target = alg / (1 + b * max(0.0, level - k * eps - g))
    fam = "aaf-7142" if k == 4 else f"sylvester-{k}"
    return _make(items, fam, params, 1 - g, n, eps, opt, target, "firstfit", {"k": k, "m": list(ms)})


def gen_aaf_7142(n: int, params: CostParams, eps: float = DEFAULT_EPS) -> AdversaryInstance:
    """n items each of 1/43, 1/7, 1/3 and 1/2 (plus eps), in that order."""
    adv = gen_sylvester(4, n, params, eps)
    adv.target_ratio = bounds.aaf_harmonic_lb_raw(params.beta, params.green)
    return adv


def gen_sand(total: float, grain: float, params: CostParams,
             tau: float | None = None) -> AdversaryInstance:
    """ceil(total / grain) items of size ``grain``."""
    tau = _tau(tau, params)
    cap = params.green + tau
    if not (0 < grain <= cap + 1e-12):
        raise DomainError(f"grain {grain} must lie in (0, G + tau] = (0, {cap}]")
    if total <= 0:
        raise DomainError(f"total must be positive, got {total}")
    count = math.ceil(total / grain - 1e-9)
    _check_items(count)
    b, g = params.beta, params.green
    volume = count * grain
    opt = sand_cost(volume, params)
    target = (1 + b * max(0.0, cap - g)) / cap / _unit_opt(params)
    return _make(np.full(count, grain), "sand", params, tau, count, grain, opt, target, "nextfit",
                 {"total": total, "grain": grain})


def gen_taf_case1(n: int, params: CostParams, tau: float,
                  eps: float = DEFAULT_EPS) -> AdversaryInstance:
    """((G + tau + eps)/2)^n: two items never share a bin of capacity G + tau."""
    n, eps = _n(n, 2), _eps(eps)
    tau = _tau(tau, params)
    b, g = params.beta, params.green
    size = (g + tau + eps) / 2
    if 2 * size > 1 + 1e-12:
        raise DomainError("needs G + tau + eps <= 1")
    opt = n / 2 * (1 + b * max(0.0, 2 * size - g))
    target = 2 / (1 + tau * b)
    return _make(np.full(n, size), "taf-case1", params, tau, n, eps, opt, target, "firstfit")


def gen_taf_case2(f: int, params: CostParams, tau: float, eps: float = DEFAULT_EPS,
                  grain: float | None = None) -> AdversaryInstance:
    """Sand of total F(G - tau)/2, then F items of size (G + tau)/2 + eps.

    The algorithm fills bins to G + tau with sand, then opens a bin per big
    item; OPT gives each big item its own bin topped up with sand to G.
    ``grain`` is the sand size; by default ``eps`` unless that would emit
    more than a million sand items, in which case each OPT bin receives
    1000 sand items.
    """
    f, eps = _n(f), _eps(eps)
    tau = _tau(tau, params)
    b, g = params.beta, params.green
    if b > 0 and tau >= 1 / b:
        raise DomainError(f"needs tau < 1/beta = {1 / b}, got {tau}")
    half = (g - tau) / 2
    if grain is None:
        grain = eps if half * f / eps <= 1_000_000 else half / 1000
    e = round(half * f / grain) if half > 0 else 0
    _check_items(e + f)
    items = np.concatenate([np.full(e, grain), np.full(f, (g + tau) / 2 + eps)])
    volume = e * grain + f * ((g + tau) / 2 + eps)
    opt = f + b * max(0.0, volume - f * g)
    target = 1 + (g - tau) * (1 + tau * b) / (2 * (g + tau))
    return _make(items, "taf-case2", params, tau, f, eps, opt, target, "firstfit",
                 {"sand_items": e, "grain": grain})


def gen_nextfit_tau_mixed(n: int, params: CostParams, tau: float, m: int = 100,
                          eps: float = DEFAULT_EPS) -> AdversaryInstance:
    """(tau, eps, G, m sand items summing to tau)^n against NextFit with threshold."""
    n, eps = _n(n), _eps(eps)
    tau = _tau(tau, params)
    b, g = params.beta, params.green
    if g <= 0:
        raise DomainError("needs G > 0")
    if tau > 0:
        if m < 1:
            raise DomainError(f"m must be >= 1, got {m}")
        block = [tau, eps, g] + [tau / m] * m
    else:
        block = [eps, g]
    _check_items(n * len(block))
    items = np.tile(np.array(block), n)
    small = n * (2 * tau + eps)
    opt = n + math.ceil(small / g - 1e-9)
    target = g * (2 + tau * b) / (g + 2 * tau)
    return _make(items, "nf-tau-mixed", params, tau, n, eps, opt, target, "nextfit", {"m": m})


def general_lb_stage_sizes(params: CostParams, eps: float | None = None) -> tuple:
    """Item sizes of each stage and the per-stage OPT bins-per-item."""
    x = params.bg
    g = params.green
    if x <= 1:
        raise RegimeError("staged lower-bound family needs beta*G > 1")
    if x <= 4:
        return (g / 3, 2 * g / 3), (1 / 3, 1.0), None
    if x <= 48:
        return (g * (2 * x + 1) / (6 * x), g * (4 * x - 1) / (6 * x)), (1 / 2, 1.0), None
    lo, hi = 1 / (2 * x), 1 / 84 - 1 / (14 * x)
    if eps is None or not (lo < eps < hi):
        eps = (lo + hi) / 2
    return (g * (1 / 6 - 2 * eps), g * (1 / 3 + eps), g * (1 / 2 + eps)), (1 / 6, 1 / 2, 1.0), eps


def gen_general_lb_large(n: int, params: CostParams, eps: float | None = None) -> AdversaryInstance:
    """Staged sequence; the bound holds at the worst prefix for any algorithm."""
    sizes, opt_per_item, used_eps = general_lb_stage_sizes(params, eps)
    n = _n(n, 6)
    items = np.concatenate([np.full(n, s) for s in sizes])
    stages = [((j + 1) * n, n * r) for j, r in enumerate(opt_per_item)]
    target = bounds.general_lb_large_step(params.bg)
    adv = _make(items, "general-lb-large", params, 1 - params.green, n,
                used_eps if used_eps is not None else 0.0, stages[-1][1], target, "any",
                {"sizes": list(sizes)})
    adv.stages = stages
    return adv


def gen_partition_reduction(weights, eps: float, params: CostParams) -> AdversaryInstance:
    """Two items of 1 - eps plus the weights scaled to total 2*eps.

    The instance packs into two bins (cost 2 + 2 beta (1 - G)) iff the
    weights split into two equal halves.
    """
    w = [int(a) for a in weights]
    if any(a <= 0 for a in w):
        raise DomainError("weights must be positive integers")
    total = sum(w)
    if total % 2:
        raise DomainError(f"weights must sum to an even number, got {total}")
    b, g = params.beta, params.green
    limit = min(0.5, 1 / (2 * b) if b > 0 else math.inf, 1 - g)
    if not (0 < eps < limit):
        raise DomainError(f"eps must lie in (0, {limit})")
    s = total // 2
    items = [1 - eps, 1 - eps] + ([a * eps / s for a in w] if s else [])
    yes = 2 + 2 * b * (1 - g)
    no = 2 * (1.5 + b * (1 - eps - g))
    return _make(items, "partition", params, 1 - g, len(w), eps, yes, no / yes, "exact",
                 {"yes_cost": yes, "no_cost_floor": no, "weights": w})


FAMILIES = ("nf-pairs", "wf-pairs", "nf-tau-pairs", "aaf-7142", "sylvester", "sand",
            "taf-case1", "taf-case2", "nf-tau-mixed", "general-lb-large", "partition")


def generate(family: str, n: int, params: CostParams, tau: float | None = None,
             eps: float | None = None, **kw) -> AdversaryInstance:
    """Dispatch by family tag (used by the CLI)."""
    e = DEFAULT_EPS if eps is None else eps
    if family == "nf-pairs":
        return gen_nextfit_pairs(n, params, e)
    if family == "wf-pairs":
        return gen_worstfit_pairs(n, params, e)
    if family == "nf-tau-pairs":
        return gen_nextfit_tau_pairs(n, params, _tau(tau, params), e)
    if family == "aaf-7142":
        return gen_aaf_7142(n, params, e)
    if family == "sylvester":
        return gen_sylvester(int(kw.get("k", 4)), n, params, e)
    if family == "sand":
        grain = kw.get("grain") or (eps if eps is not None else 1e-3)
        return gen_sand(n * grain, grain, params, tau)
    if family == "taf-case1":
        return gen_taf_case1(n, params, _tau(tau, params), e)
    if family == "taf-case2":
        return gen_taf_case2(n, params, _tau(tau, params), e, kw.get("grain"))
    if family == "nf-tau-mixed":
        return gen_nextfit_tau_mixed(n, params, _tau(tau, params), int(kw.get("m", 100)), e)
    if family == "general-lb-large":
        return gen_general_lb_large(n, params, eps)
    if family == "partition":
        return gen_partition_reduction(kw["weights"], e if eps is not None else 0.1, params)
    raise DomainError(f"unknown family {family!r}; expected one of {FAMILIES}")
