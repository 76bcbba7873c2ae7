"""Random and file-based instance sources.

All randomness goes through numpy's PCG64 generator seeded explicitly, so
a (seed, spec) pair always produces the same items.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DomainError, Instance

MAX_ATTEMPTS = 1000
KINDS = ("weibull", "uniform", "bpplib")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int = 0
    seed: int = 0
    shape: float = 3.0
    path: str | None = None
    shuffle: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown generator {self.kind!r}; expected one of {KINDS}")
        if self.kind != "bpplib" and self.n < 0:
            raise DomainError(f"n must be >= 0, got {self.n}")
        if self.kind == "weibull" and not self.shape > 0:
            raise DomainError(f"shape must be positive, got {self.shape}")


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def trial_seed(base: int, trial: int) -> int:
    return int(base) ^ int(trial)


def weibull_variates(rng: np.random.Generator, n: int, shape: float = 3.0) -> np.ndarray:
    """Weibull(shape, scale 1) draws by inverse CDF, before any truncation."""
    u = 1.0 - rng.random(n)  # (0, 1]
    return (-np.log(u)) ** (1.0 / shape)


def sample_weibull(rng: np.random.Generator, n: int, shape: float = 3.0) -> np.ndarray:
    """n Weibull draws restricted to (0, 1] by rejection."""
    out = np.empty(n)
    filled = 0
    attempts = 0
    while filled < n:
        attempts += 1
        if attempts > MAX_ATTEMPTS:
            raise DomainError(f"weibull rejection sampling exceeded {MAX_ATTEMPTS} rounds")
        need = n - filled
        draw = weibull_variates(rng, max(need * 2, 16), shape)
        ok = draw[(draw > 0.0) & (draw <= 1.0)][:need]
        out[filled:filled + ok.size] = ok
        filled += ok.size
    return out


def sample_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    return 1.0 - rng.random(n)


def parse_bpplib(path: str | Path, shuffle_seed: int | None = None) -> Instance:
    """Read a BPPLIB file: item count, capacity, then one integer weight per line."""
    path = Path(path)
    tokens = [ln.split()[0] for ln in path.read_text().splitlines() if ln.strip()]
    try:
        nums = [int(t) for t in tokens]
    except ValueError as exc:
        raise DomainError(f"{path}: malformed BPPLIB file ({exc})") from None
    if len(nums) < 2:
        raise DomainError(f"{path}: missing header")
    n, cap = nums[0], nums[1]
    weights = nums[2:]
    if cap <= 0:
        raise DomainError(f"{path}: capacity must be positive, got {cap}")
    if len(weights) != n:
        raise DomainError(f"{path}: header says {n} items, found {len(weights)}")
    for w in weights:
        if w <= 0:
            raise DomainError(f"{path}: non-positive weight {w}")
        if w > cap:
            raise DomainError(f"{path}: weight {w} exceeds capacity {cap}")
    sizes = np.array(weights, dtype=np.float64) / cap
    if shuffle_seed is not None:
        sizes = rng_for(shuffle_seed).permutation(sizes)
    return Instance(sizes, label=path.stem, source={"kind": "bpplib", "path": str(path)})


def sample(spec: GeneratorSpec) -> Instance:
    if spec.kind == "bpplib":
        if not spec.path:
            raise DomainError("bpplib generator needs a path")
        return parse_bpplib(spec.path, spec.seed if spec.shuffle else None)
    rng = rng_for(spec.seed)
    if spec.kind == "weibull":
        sizes = sample_weibull(rng, spec.n, spec.shape)
    else:
        sizes = sample_uniform(rng, spec.n)
    label = f"{spec.kind}-n{spec.n}-s{spec.seed}"
    return Instance(sizes, label=label, source={"kind": spec.kind, "seed": spec.seed,
                                                 "shape": spec.shape})


def weibull_mean(shape: float = 3.0) -> float:
    return math.gamma(1 + 1 / shape)
