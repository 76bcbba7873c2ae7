"""Offline solvers: exact branch and bound, an APTAS, and scripted optima.

The exact solver is for desk-scale instances (at most 14 items by default).
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .adversary import AdversaryInstance
from .algorithms import ALL_KINDS, pack
from .core import (EPS_FIT, CostParams, DomainError, GBPError, Instance, Packing, Regime,
                   make_packing, opt_lower_bound, packing_cost)

EXACT_CAP = 14
APTAS_MAX_GROUPS = 12
APTAS_MAX_TYPES = 50_000
APTAS_MAX_STATES = 200_000


class SolverLimitError(GBPError):
    pass


@dataclass
class ExactResult:
    packing: Packing
    cost: float
    nodes_explored: int
    proven_optimal: bool


def exact_opt(instance: Instance, params: CostParams, cap: int = EXACT_CAP,
              node_limit: int | None = None) -> ExactResult:
    """Minimum-cost packing by depth-first branch and bound.

    Items are placed largest first; an item goes into an existing bin or
    into one new bin (bins are interchangeable, so only one "new" branch is
    needed). Existing bins with equal level are tried once.
    """
    n = len(instance)
    if n > cap:
        raise SolverLimitError(f"instance has {n} items, exact solver cap is {cap}")
    if n == 0:
        return ExactResult(Packing((), params), 0.0, 0, True)
    sizes = instance.items.tolist()
    order = sorted(range(n), key=lambda i: -sizes[i])
    s = [sizes[i] for i in order]
    suffix = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + s[i]
    beta, g = params.beta, params.green
    unit = opt_lower_bound(1.0, params)
    cheapest = min(beta, unit)
    global_lb = opt_lower_bound(math.fsum(s), params)

    # incumbent: the best online packing over all algorithms at full capacity
    best_cost = math.inf
    best_groups = None
    for kind in ALL_KINDS:
        for tau in {1 - g, 0.0}:
            res = pack(kind, tau, instance, params)
            c = res.packing.cost()
            if c < best_cost - 1e-12:
                best_cost = c
                best_groups = [list(b.item_indices) for b in res.packing.bins]

    levels: list = []
    members: list = []
    nodes = 0
    aborted = False

    def cost_of(level):
        return 1 + beta * max(0.0, level - g)

    def bound(i, cur):
        green_room = sum(max(0.0, g - lv) for lv in levels)
        rest = max(0.0, suffix[i] - green_room)
        return max(cur + rest * cheapest, global_lb)

    def dfs(i, cur):
        nonlocal nodes, best_cost, best_groups, aborted
        nodes += 1
        if node_limit is not None and nodes > node_limit:
            aborted = True
            return
        if i == n:
            if cur < best_cost - 1e-12:
                best_cost = cur
                best_groups = [[order[k] for k in m] for m in members]
            return
        if bound(i, cur) >= best_cost - 1e-12:
            return
        x = s[i]
        tried = set()
        for j in range(len(levels)):
            lv = levels[j]
            if lv + x > 1 + EPS_FIT or lv in tried:
                continue
            tried.add(lv)
            delta = cost_of(lv + x) - cost_of(lv)
            levels[j] = lv + x
            members[j].append(i)
            dfs(i + 1, cur + delta)
            members[j].pop()
            levels[j] = lv
            if aborted:
                return
        levels.append(x)
        members.append([i])
        dfs(i + 1, cur + cost_of(x))
        levels.pop()
        members.pop()

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10 * n + 100))
    try:
        dfs(0, 0.0)
    finally:
        sys.setrecursionlimit(old)
    packing = make_packing(instance, best_groups, params)
    return ExactResult(packing, packing_cost(packing), nodes, not aborted)


def structure_violations(instance: Instance, packing: Packing) -> list:
    """Check the shape an optimal packing must have when beta*G > 1.

    Each bin holds at most one item of size >= G, and bins that hold one
    carry at most 1/beta of smaller items.
    """
    params = packing.params
    if params.regime is not Regime.LARGE_BG:
        raise DomainError("structure check applies to beta*G > 1 only")
    g, beta = params.green, params.beta
    sizes = instance.items
    out = []
    for j, b in enumerate(packing.bins):
        xs = sizes[list(b.item_indices)]
        large = xs >= g
        if large.sum() > 1:
            out.append(("two large items", f"bin {j}"))
        if large.any():
            small = math.fsum(xs[~large].tolist())
            if small > 1 / beta + 1e-9:
                out.append(("small volume with large item", f"bin {j}: {small:.6g} > 1/beta"))
    return out


# APTAS

@dataclass(frozen=True)
class AptasConfig:
    epsilon: float
    delta: float
    eps_prime: float
    groups_theory: float

    @classmethod
    def derive(cls, epsilon: float, params: CostParams) -> "AptasConfig":
        if not (0 < epsilon < 1):
            raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
        b, g = params.beta, params.green
        if params.regime is Regime.SMALL_BG:
            delta = epsilon / 2 if b == 0 else min(epsilon / 2, epsilon * (1 - g * b) / (2 * b))
        else:
            delta = epsilon / (4 * b * b)
        ep = epsilon / 3
        s = math.inf if delta <= 0 else (1 + b * (1 - g)) / (delta * ep)
        return cls(epsilon, delta, ep, s)


@dataclass
class AptasResult:
    packing: Packing
    cost: float
    config: AptasConfig
    groups: int
    bin_types: int


def _bundle_small(sizes, idx, delta):
    """Group small items (in input order) into bundles of total in [delta, 2 delta)."""
    bundles, cur, vol = [], [], 0.0
    for i in idx:
        cur.append(i)
        vol += sizes[i]
        if vol >= delta:
            bundles.append((vol, cur))
            cur, vol = [], 0.0
    if cur:
        bundles.append((vol, cur))
    return bundles


def _solve_rounded(counts, usizes, params, max_per_bin):
    """Optimal multiset of bin types covering ``counts`` items of sizes ``usizes``."""
    beta, g = params.beta, params.green
    k = len(counts)
    types = []

    def rec(j, vec, level, items):
        if j == k:
            if items:
                types.append((tuple(vec), 1 + beta * max(0.0, level - g)))
            return
        for c in range(counts[j] + 1):
            lv = level + c * usizes[j]
            if lv > 1 + EPS_FIT or items + c > max_per_bin:
                break
            vec.append(c)
            rec(j + 1, vec, lv, items + c)
            vec.pop()
            if len(types) > APTAS_MAX_TYPES:
                raise SolverLimitError(f"more than {APTAS_MAX_TYPES} bin types; raise epsilon")

    rec(0, [], 0.0, 0)
    by_first: dict = {}
    for vec, c in types:
        first = next(i for i, v in enumerate(vec) if v)
        by_first.setdefault(first, []).append((vec, c))

    states = 0

    @lru_cache(maxsize=None)
    def best(state):
        nonlocal states
        states += 1
        if states > APTAS_MAX_STATES:
            raise SolverLimitError(f"more than {APTAS_MAX_STATES} DP states; raise epsilon")
        first = next((i for i, v in enumerate(state) if v), None)
        if first is None:
            return 0.0, ()
        out = (math.inf, ())
        for vec, c in by_first.get(first, ()):
            if all(v <= r for v, r in zip(vec, state)):
                rest = tuple(r - v for v, r in zip(vec, state))
                sub, plan = best(rest)
                if c + sub < out[0]:
                    out = (c + sub, (vec,) + plan)
        return out

    cost, plan = best(tuple(counts))
    return cost, plan, len(types)


def aptas(instance: Instance, params: CostParams, epsilon: float,
          groups: int | None = None) -> AptasResult:
    """Asymptotic approximation: round large items into groups, solve exactly, add small ones.

    ``groups`` overrides the number of rounding groups. By default the
    theoretical count is used, capped by the number of large items (when
    every group is a single item, rounding changes nothing).
    """
    cfg = AptasConfig.derive(epsilon, params)
    sizes = instance.items.tolist()
    n = len(sizes)
    delta = cfg.delta
    small_bg = params.regime is Regime.SMALL_BG
    large = [i for i in range(n) if sizes[i] > delta]
    small = [i for i in range(n) if sizes[i] <= delta]

    # units handled by the rounding step: (size, [item indices])
    units = [(sizes[i], [i]) for i in large]
    if not small_bg and small:
        units += _bundle_small(sizes, small, delta)
        small = []
    units.sort(key=lambda u: u[0])

    m = len(units)
    if groups is None:
        s = m if cfg.groups_theory >= m else max(1, math.ceil(cfg.groups_theory))
    else:
        s = max(1, min(int(groups), m)) if m else 0
    if s > APTAS_MAX_GROUPS:
        raise SolverLimitError(f"{s} rounding groups exceed the cap {APTAS_MAX_GROUPS}; "
                               "raise epsilon or pass groups=")
    bins: list = []
    n_types = 0
    if m:
        chunks = [list(c) for c in np.array_split(np.arange(m), s) if len(c)]
        usizes = [units[c[-1]][0] for c in chunks]
        counts = [len(c) for c in chunks]
        per_bin = max(1, math.floor((1 + EPS_FIT) / units[0][0]))
        _, plan, n_types = _solve_rounded(counts, usizes, params, per_bin)
        pools = [list(c) for c in chunks]
        for vec in plan:
            b = []
            for j, c in enumerate(vec):
                for _ in range(c):
                    b.extend(units[pools[j].pop()][1])
            bins.append(b)

    levels = [math.fsum(sizes[i] for i in b) for b in bins]
    g = params.green
    for i in sorted(small, key=lambda i: sizes[i]):
        x = sizes[i]
        target = next((j for j, lv in enumerate(levels) if lv + x <= g + EPS_FIT), None)
        if target is None:
            target = next((j for j, lv in enumerate(levels) if lv + x <= 1 + EPS_FIT), None)
        if target is None:
            bins.append([])
            levels.append(0.0)
            target = len(bins) - 1
        bins[target].append(i)
        levels[target] += x
    packing = make_packing(instance, bins, params)
    return AptasResult(packing, packing_cost(packing), cfg, s, n_types)


# scripted optimal packings for the adversarial families

def _fill(indices, sizes, cap):
    """Next-fit the given items into bins of capacity ``cap``."""
    out, cur, lv = [], [], 0.0
    for i in indices:
        if cur and lv + sizes[i] > cap + EPS_FIT:
            out.append(cur)
            cur, lv = [], 0.0
        cur.append(i)
        lv += sizes[i]
    if cur:
        out.append(cur)
    return out


def _sand_cap(params):
    return 1.0 if params.regime is Regime.SMALL_BG else params.green


def scripted_opt(adv: AdversaryInstance, prefix: int | None = None) -> Packing:
    """The optimal packing described for the family (for the given prefix)."""
    params = adv.params
    inst = adv.instance if prefix is None else adv.instance.prefix(prefix)
    sizes = inst.items.tolist()
    n_items = len(sizes)
    fam = adv.family
    g = params.green
    idx = list(range(n_items))

    if fam in ("nf-pairs", "nf-tau-pairs"):
        big = 0 if fam == "nf-pairs" else 1
        singles = [[i] for i in idx if i % 2 == big]
        groups = singles + _fill([i for i in idx if i % 2 != big], sizes, _sand_cap(params))
    elif fam == "wf-pairs":
        halves = [i for i in idx if i % 2 == 0]
        groups = [halves[j:j + 2] for j in range(0, len(halves), 2)]
        groups += _fill([i for i in idx if i % 2 == 1], sizes, _sand_cap(params))
    elif fam == "aaf-7142" or fam.startswith("sylvester"):
        n = adv.n
        k = adv.meta["k"]
        groups = [[p * n + j for p in range(k)] for j in range(n)]
    elif fam == "sand":
        groups = _fill(idx, sizes, _sand_cap(params))
    elif fam == "taf-case1":
        groups = [idx[j:j + 2] for j in range(0, n_items, 2)]
    elif fam == "taf-case2":
        e = adv.meta["sand_items"]
        f = n_items - e
        sand = np.array_split(np.arange(e), f) if f else []
        groups = [[e + j] + [int(i) for i in sand[j]] for j in range(f)]
    elif fam == "nf-tau-mixed":
        width = 3 + adv.meta["m"] if adv.tau > 0 else 2
        g_pos = 2 if adv.tau > 0 else 1
        gs = [i for i in idx if i % width == g_pos]
        taus = [i for i in idx if adv.tau > 0 and i % width == 0]
        rest = [i for i in idx if i % width not in (0, g_pos)] if adv.tau > 0 else \
            [i for i in idx if i % width != g_pos]
        groups = [[i] for i in gs] + _first_fit(taus + rest, sizes, g)
    elif fam == "general-lb-large":
        n = adv.n
        stage = n_items // n
        x = params.bg
        per_stage = {1: 3, 2: 1} if x <= 4 else ({1: 2, 2: 1} if x <= 48 else {1: 6, 2: 2, 3: 1})
        k = per_stage[stage]
        # k items of every stage seen so far share a bin
        groups = [[p * n + b * k + t for p in range(stage) for t in range(k)] for b in range(n // k)]
    elif fam == "partition":
        raise DomainError("partition instances have no scripted packing; use exact_opt")
    else:
        raise DomainError(f"no scripted packing for family {fam!r}")
    return make_packing(inst, groups, params)


def _first_fit(order, sizes, cap):
    bins, levels = [], []
    for i in order:
        x = sizes[i]
        for j, lv in enumerate(levels):
            if lv + x <= cap + EPS_FIT:
                bins[j].append(i)
                levels[j] += x
                break
        else:
            bins.append([i])
            levels.append(x)
    return bins
