"""Cost model, instances, packings and their plain-text / JSON formats.

A bin filled to level L costs ``1 + beta * max(0, L - G)``: the first ``G``
units of a unit-capacity bin are free ("green"), anything above costs
``beta`` per unit.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

EPS_FIT = 1e-9
LEVEL_TOL = 1e-9


class GBPError(Exception):
    pass


class DomainError(GBPError, ValueError):
    pass


class RegimeError(DomainError):
    """A formula was asked for outside the beta*G regime it holds in."""


class ValidationError(GBPError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        head = "; ".join(f"{kind}: {detail}" for kind, detail in self.violations[:5])
        super().__init__(f"invalid packing ({len(self.violations)} violations): {head}")


class Regime(enum.Enum):
    SMALL_BG = "small"  # beta*G <= 1
    LARGE_BG = "large"  # beta*G > 1


@dataclass(frozen=True)
class CostParams:
    beta: float
    green: float

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise DomainError(f"beta must be finite and >= 0, got {self.beta}")
        if not (0.0 <= self.green <= 1.0):
            raise DomainError(f"green must lie in [0, 1], got {self.green}")

    @property
    def bg(self) -> float:
        return self.beta * self.green

    @property
    def regime(self) -> Regime:
        return Regime.SMALL_BG if self.bg <= 1.0 else Regime.LARGE_BG

    def to_dict(self) -> dict:
        return {"beta": self.beta, "green": self.green}


@dataclass(frozen=True, eq=False)
class Instance:
    """An ordered item sequence. ``items`` is a read-only float64 array."""

    items: np.ndarray
    label: str = ""
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.array(self.items, dtype=np.float64).reshape(-1)
        if arr.size and not (np.all(arr > 0.0) and np.all(arr <= 1.0)):
            bad = arr[~((arr > 0.0) & (arr <= 1.0))][0]
            raise DomainError(f"item sizes must lie in (0, 1], got {bad!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "items", arr)

    def __len__(self) -> int:
        return int(self.items.size)

    @property
    def total_size(self) -> float:
        return math.fsum(self.items.tolist())

    def prefix(self, n: int, label: str | None = None) -> "Instance":
        return Instance(self.items[:n], label or self.label, dict(self.source))


@dataclass(frozen=True, eq=False)
class Bin:
    item_indices: tuple
    level: float
    harmonic_class: int | None = None
    oversized: bool = False


@dataclass(frozen=True, eq=False)
class Packing:
    bins: tuple
    params: CostParams

    @property
    def num_bins(self) -> int:
        return len(self.bins)

    def cost(self) -> float:
        return packing_cost(self)

    def assignment(self, n_items: int) -> np.ndarray:
        out = np.full(n_items, -1, dtype=np.int64)
        for j, b in enumerate(self.bins):
            out[list(b.item_indices)] = j
        return out


def bin_cost(level: float, params: CostParams) -> float:
    if not (-LEVEL_TOL <= level <= 1.0 + EPS_FIT):
        raise DomainError(f"bin level {level} outside [0, 1]")
    return 1.0 + params.beta * max(0.0, level - params.green)


def packing_cost(packing: Packing, instance: Instance | None = None) -> float:
    """Total cost; if ``instance`` is given the packing is validated first."""
    if instance is not None:
        result = validate(instance, packing)
        if result:
            raise ValidationError(result)
    return math.fsum(bin_cost(b.level, packing.params) for b in packing.bins)


def validate(instance: Instance, packing: Packing) -> list:
    """Return a list of ``(kind, detail)`` violations; empty means valid."""
    n = len(instance)
    sizes = instance.items
    seen = np.zeros(n, dtype=np.int64)
    problems = []
    for j, b in enumerate(packing.bins):
        idx = np.asarray(b.item_indices, dtype=np.int64)
        if idx.size == 0:
            problems.append(("empty bin", f"bin {j}"))
            continue
        if idx.min() < 0 or idx.max() >= n:
            problems.append(("unknown item", f"bin {j} references an index outside [0, {n})"))
            continue
        np.add.at(seen, idx, 1)
        actual = math.fsum(sizes[idx].tolist())
        if actual > 1.0 + EPS_FIT:
            problems.append(("overfull bin", f"bin {j} level {actual:.12g}"))
        if abs(actual - b.level) > LEVEL_TOL:
            problems.append(("level mismatch", f"bin {j} stores {b.level!r}, items sum to {actual!r}"))
    for i in np.flatnonzero(seen > 1)[:20]:
        problems.append(("duplicate item", f"item {i} packed {seen[i]} times"))
    for i in np.flatnonzero(seen == 0)[:20]:
        problems.append(("missing item", f"item {i} not packed"))
    return problems


def opt_lower_bound(total_size: float, params: CostParams) -> float:
    """Volume lower bound on the optimal cost of packing ``total_size``."""
    if total_size < 0:
        raise DomainError(f"total size must be >= 0, got {total_size}")
    if params.regime is Regime.SMALL_BG:
        return total_size * (1.0 + params.beta * (1.0 - params.green))
    return total_size / params.green


def make_packing(instance: Instance, groups: Sequence[Sequence[int]], params: CostParams) -> Packing:
    """Build a packing from index groups, computing exact levels."""
    sizes = instance.items
    bins = tuple(
        Bin(tuple(int(i) for i in g), math.fsum(sizes[list(g)].tolist())) for g in groups if len(g)
    )
    return Packing(bins, params)


# plain-text instances: one size per line, '#' starts a comment

def parse_instance_text(text: str, label: str = "") -> Instance:
    sizes = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            sizes.append(float(line))
        except ValueError:
            raise DomainError(f"line {lineno}: not a number: {line!r}") from None
    return Instance(np.array(sizes, dtype=np.float64), label)


def read_instance(path: str | Path) -> Instance:
    path = Path(path)
    return parse_instance_text(path.read_text(), label=path.stem)


def format_instance(instance: Instance) -> str:
    head = f"# {instance.label}\n" if instance.label else ""
    return head + "".join(f"{x!r}\n" for x in instance.items.tolist())


def write_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(format_instance(instance))


def packing_to_json(packing: Packing) -> dict:
    return {
        "params": packing.params.to_dict(),
        "bins": [[int(i) for i in b.item_indices] for b in packing.bins],
    }


def packing_from_json(data: dict, instance: Instance) -> Packing:
    params = CostParams(float(data["params"]["beta"]), float(data["params"]["green"]))
    return make_packing(instance, data["bins"], params)


def write_packing(packing: Packing, path: str | Path) -> None:
    Path(path).write_text(json.dumps(packing_to_json(packing), indent=1) + "\n")


def read_packing(path: str | Path, instance: Instance) -> Packing:
    return packing_from_json(json.loads(Path(path).read_text()), instance)

