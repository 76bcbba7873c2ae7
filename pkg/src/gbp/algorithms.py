"""Online packers with a green threshold.

Every algorithm packs against an effective capacity ``C = G + tau``. Items
larger than ``C`` are put alone into a fresh bin that is never reused.

Two implementations share the same decision rules:

* ``pack`` runs a compiled kernel over a whole instance (fast path);
* ``OnlinePacker`` takes items one at a time and keeps its own state.

They are tested against each other.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .core import EPS_FIT, Bin, CostParams, DomainError, Instance, Packing, bin_cost

NEXTFIT, WORSTFIT, FIRSTFIT, BESTFIT, HARMONIC = range(5)
_NAMES = ("nextfit", "worstfit", "firstfit", "bestfit", "harmonic")
CLASS_TOL = 1e-9


@dataclass(frozen=True)
class AlgorithmKind:
    name: str
    k: int | None = None

    def __post_init__(self):
        if self.name not in _NAMES:
            raise DomainError(f"unknown algorithm {self.name!r}; expected one of {_NAMES}")
        if self.name == "harmonic":
            k = 10 if self.k is None else int(self.k)
            if k < 2:
                raise DomainError(f"harmonic needs K >= 2, got {k}")
            object.__setattr__(self, "k", k)
        elif self.k is not None:
            raise DomainError(f"{self.name} takes no K parameter")

    @property
    def code(self) -> int:
        return _NAMES.index(self.name)

    @property
    def label(self) -> str:
        return f"harmonic{self.k}" if self.name == "harmonic" else self.name

    @property
    def is_anyfit(self) -> bool:
        return self.name in ("worstfit", "firstfit", "bestfit")

    @classmethod
    def parse(cls, text: str, k: int | None = None) -> "AlgorithmKind":
        t = text.strip().lower().replace("_", "").replace("-", "")
        if t.startswith("harmonic"):
            rest = t[len("harmonic"):].strip("()")
            return cls("harmonic", int(rest) if rest else k)
        return cls(t)


NEXT_FIT = AlgorithmKind("nextfit")
WORST_FIT = AlgorithmKind("worstfit")
FIRST_FIT = AlgorithmKind("firstfit")
BEST_FIT = AlgorithmKind("bestfit")


def harmonic(k: int = 10) -> AlgorithmKind:
    return AlgorithmKind("harmonic", k)


ALL_KINDS = (NEXT_FIT, WORST_FIT, FIRST_FIT, BEST_FIT, harmonic(10))


@dataclass(frozen=True)
class ThresholdPolicy:
    tau: float

    def capacity(self, params: CostParams) -> float:
        check_tau(self.tau, params)
        return min(1.0, params.green + self.tau)

    @classmethod
    def full(cls, params: CostParams) -> "ThresholdPolicy":
        return cls(1.0 - params.green)


def check_tau(tau: float, params: CostParams) -> None:
    if not (-1e-12 <= tau <= 1.0 - params.green + 1e-12):
        raise DomainError(f"tau={tau} outside [0, 1 - G] = [0, {1.0 - params.green}]")


def harmonic_class(size: float, k: int, cap: float = 1.0) -> int:
    """Class i if size lies in (cap/(i+1), cap/i] for i < k, else k."""
    if size <= 0:
        raise DomainError(f"size must be positive, got {size}")
    return _harmonic_class(size, k, cap)


@njit(cache=True)
def _harmonic_class(size, k, cap):
    i = int(math.floor(cap / size * (1.0 + CLASS_TOL)))
    if i < 1:
        return 1
    if i > k:
        return k
    return i


@njit(cache=True)
def _pack_kernel(sizes, code, k, cap, eps):
    n = sizes.shape[0]
    assign = np.empty(n, np.int64)
    opened = np.zeros(n, np.bool_)
    levels = np.zeros(n, np.float64)
    bclass = np.full(n, -1, np.int64)  # -1 plain, 0 oversized, i harmonic class
    nbins = 0

    min_size = 2.0
    for t in range(n):
        if sizes[t] < min_size:
            min_size = sizes[t]

    # NextFit state
    current = -1
    # AnyFit state: open bins that can still take some item, in index order.
    # A bin is dropped once its room is below the smallest item of the
    # instance, so it could never be chosen; decisions are unaffected.
    active = np.empty(n, np.int64)
    n_active = 0
    # Harmonic state
    open_of = np.full(k + 1, -1, np.int64)
    count_of = np.zeros(k + 1, np.int64)

    for t in range(n):
        s = sizes[t]
        if s > cap + eps:
            b = nbins
            nbins += 1
            levels[b] = s
            bclass[b] = 0
            assign[t] = b
            opened[t] = True
            if code == 0:
                current = -1
            continue

        if code == 0:
            if current >= 0 and levels[current] + s <= cap + eps:
                b = current
            else:
                b = nbins
                nbins += 1
                opened[t] = True
                current = b
            levels[b] += s
            assign[t] = b

        elif code == 4:
            i = _harmonic_class(s, k, cap)
            b = open_of[i]
            if b >= 0 and levels[b] + s <= cap + eps:
                count_of[i] += 1
            else:
                b = nbins
                nbins += 1
                opened[t] = True
                bclass[b] = i
                open_of[i] = b
                count_of[i] = 1
            levels[b] += s
            assign[t] = b
            if i < k and count_of[i] >= i:
                open_of[i] = -1

        else:
            pos = -1
            if code == 2:
                for q in range(n_active):
                    if levels[active[q]] + s <= cap + eps:
                        pos = q
                        break
            elif code == 3:
                best = -1.0
                for q in range(n_active):
                    lv = levels[active[q]]
                    if lv + s <= cap + eps and lv > best:
                        best = lv
                        pos = q
            else:
                best = 3.0
                for q in range(n_active):
                    lv = levels[active[q]]
                    if lv + s <= cap + eps and lv < best:
                        best = lv
                        pos = q
            if pos >= 0:
                b = active[pos]
            else:
                b = nbins
                nbins += 1
                opened[t] = True
                active[n_active] = b
                pos = n_active
                n_active += 1
            levels[b] += s
            assign[t] = b
            if cap - levels[b] + eps < min_size:
                for q in range(pos, n_active - 1):
                    active[q] = active[q + 1]
                n_active -= 1

    return assign, opened, levels[:nbins].copy(), bclass[:nbins].copy()


@dataclass
class PackResult:
    packing: Packing
    assignment: np.ndarray
    opened_new: np.ndarray
    capacity: float
    log: list | None = None


def pack(kind: AlgorithmKind, policy: ThresholdPolicy | float, instance: Instance,
         params: CostParams, log: bool = False) -> PackResult:
    """Pack ``instance`` online with ``kind`` at threshold ``policy.tau``."""
    if not isinstance(policy, ThresholdPolicy):
        policy = ThresholdPolicy(float(policy))
    cap = policy.capacity(params)
    sizes = instance.items
    k = kind.k if kind.k is not None else 1
    assign, opened, _, bclass = _pack_kernel(sizes, kind.code, k, cap, EPS_FIT)
    packing = _to_packing(sizes, assign, bclass, params, kind)
    result = PackResult(packing, assign, opened, cap)
    if log:
        result.log = decision_log(sizes, assign, opened)
    return result


def _to_packing(sizes, assign, bclass, params, kind) -> Packing:
    nb = bclass.shape[0]
    if nb == 0:
        return Packing((), params)
    order = np.argsort(assign, kind="stable")
    counts = np.bincount(assign, minlength=nb)
    splits = np.split(order, np.cumsum(counts)[:-1])
    levels = np.bincount(assign, weights=sizes, minlength=nb)
    is_h = kind.name == "harmonic"
    bins = []
    for j in range(nb):
        c = int(bclass[j])
        idx = splits[j]
        idx.setflags(write=False)
        bins.append(Bin(idx, float(levels[j]), c if (is_h and c > 0) else None, c == 0))
    return Packing(tuple(bins), params)


def decision_log(sizes, assign, opened) -> list:
    running: dict = {}
    rows = []
    for t, (s, b, o) in enumerate(zip(sizes.tolist(), assign.tolist(), opened.tolist())):
        running[b] = running.get(b, 0.0) + s
        rows.append((t, s, b, bool(o), running[b]))
    return rows


def write_decision_log(rows, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "item_size", "chosen_bin", "opened_new", "level_after"])
        for step, size, b, o, lvl in rows:
            w.writerow([step, repr(size), b, int(o), f"{lvl:.12g}"])


@dataclass
class OnlinePacker:
    """Streaming packer: feed items with ``add``; state is the open bins."""

    kind: AlgorithmKind
    params: CostParams
    tau: float
    levels: list = field(default_factory=list)
    members: list = field(default_factory=list)
    klass: list = field(default_factory=list)
    usable: list = field(default_factory=list)
    running_cost: float = 0.0
    log: list = field(default_factory=list)

    def __post_init__(self):
        self.cap = ThresholdPolicy(self.tau).capacity(self.params)
        self._current = -1
        self._open_of: dict = {}
        self._count_of: dict = {}
        self._step = 0

    def _fits(self, b: int, s: float) -> bool:
        return self.usable[b] and self.levels[b] + s <= self.cap + EPS_FIT

    def _new_bin(self, klass: int) -> int:
        self.levels.append(0.0)
        self.members.append([])
        self.klass.append(klass)
        self.usable.append(klass != 0)
        return len(self.levels) - 1

    def add(self, s: float) -> int:
        if not (0.0 < s <= 1.0):
            raise DomainError(f"item size must lie in (0, 1], got {s}")
        name = self.kind.name
        opened = False
        if s > self.cap + EPS_FIT:
            b = self._new_bin(0)
            opened = True
            self._current = -1
        elif name == "nextfit":
            if self._current >= 0 and self._fits(self._current, s):
                b = self._current
            else:
                b = self._new_bin(-1)
                opened = True
                self._current = b
        elif name == "harmonic":
            k = self.kind.k
            i = harmonic_class(s, k, self.cap)
            b = self._open_of.get(i, -1)
            if b >= 0 and self._fits(b, s):
                self._count_of[i] += 1
            else:
                b = self._new_bin(i)
                opened = True
                self._open_of[i] = b
                self._count_of[i] = 1
            if i < k and self._count_of[i] >= i:
                self._open_of[i] = -1
                self.usable[b] = False
        else:
            cands = [j for j in range(len(self.levels)) if self.klass[j] != 0 and self._fits(j, s)]
            if not cands:
                b = self._new_bin(-1)
                opened = True
            elif name == "firstfit":
                b = cands[0]
            elif name == "bestfit":
                b = max(cands, key=lambda j: (self.levels[j], -j))
            else:
                b = min(cands, key=lambda j: (self.levels[j], j))
        before = bin_cost(self.levels[b], self.params) if not opened else 0.0
        self.levels[b] += s
        self.members[b].append(self._step)
        self.running_cost += bin_cost(self.levels[b], self.params) - before
        self.log.append((self._step, s, b, opened, self.levels[b]))
        self._step += 1
        return b

    def packing(self) -> Packing:
        bins = []
        for j, m in enumerate(self.members):
            c = self.klass[j]
            hc = c if (self.kind.name == "harmonic" and c > 0) else None
            bins.append(Bin(tuple(m), self.levels[j], hc, c == 0))
        return Packing(tuple(bins), self.params)
