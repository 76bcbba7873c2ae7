"""Closed-form competitive-ratio bounds as functions of (beta, G, tau).

Functions named ``*_cr`` give tight ratios, ``*_lb`` / ``*_ub`` lower and
upper bounds. Results are clamped to at least 1, since no online algorithm
beats the optimum. Formulas valid only for one beta*G regime raise
``RegimeError`` outside it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from scipy.optimize import brentq

from .algorithms import harmonic_class
from .core import CostParams, DomainError, RegimeError

GENERAL_RATIO = Fraction(248, 161)
HARMONIC_INF = 1.691
TAU_TOL = 1e-12
# beta*G thresholds for the optimised threshold rule of the Any-Fit family
TAF_SWITCH_BG = 7 / 4 + math.sqrt(57) / 4
TAF_EXACT_BG = 1 + (2 + math.sqrt(44 / 27)) ** (1 / 3) + (2 - math.sqrt(44 / 27)) ** (1 / 3)


def _pos(x: float) -> float:
    return x if x > 0 else 0.0


def _clamp(x: float) -> float:
    return max(x, 1.0)


def _check(beta: float, green: float) -> None:
    CostParams(beta, green)


def _small(beta: float, green: float, what: str) -> None:
    _check(beta, green)
    if beta * green > 1:
        raise RegimeError(f"{what} holds for beta*G <= 1, got beta*G = {beta * green}")


def _large(beta: float, green: float, what: str) -> None:
    _check(beta, green)
    if beta * green <= 1:
        raise RegimeError(f"{what} holds for beta*G > 1, got beta*G = {beta * green}")


def _tau(beta: float, green: float, tau: float) -> float:
    if not (-TAU_TOL <= tau <= 1 - green + TAU_TOL):
        raise DomainError(f"tau={tau} outside [0, 1 - G]")
    return min(max(tau, 0.0), 1 - green)


def _at_full(green: float, tau: float) -> bool:
    return abs(tau - (1 - green)) <= TAU_TOL


# beta*G <= 1, tau = 1 - G

def nextfit_cr(beta: float, green: float) -> float:
    _small(beta, green, "nextfit_cr")
    return _clamp((2 + beta * (1 - green)) / (beta + 1 - beta * green))


def worstfit_cr(beta: float, green: float) -> float:
    _small(beta, green, "worstfit_cr")
    return _clamp((2 + beta * _pos(1 - 2 * green)) / (beta + 1 - beta * green))


def aaf_harmonic_lb_raw(beta: float, green: float) -> float:
    """Unclamped lower bound for Almost-Any-Fit and Harmonic (71/42 family)."""
    _check(beta, green)
    extra = (_pos(1 / 43 - green / 42) + _pos(1 / 7 - green / 6)
             + _pos(1 / 3 - green / 2) + _pos(1 / 2 - green))
    return (71 / 42 + beta * extra) / (1 + beta * (1 - green))


def aaf_harmonic_lb(beta: float, green: float) -> float:
    return _clamp(aaf_harmonic_lb_raw(beta, green))


def aaf_ub(beta: float, green: float) -> float:
    _small(beta, green, "aaf_ub")
    d = 1 + beta * (1 - green)
    if green <= 0.5:
        num = 7 / 4 + beta * (1 - 7 * green / 4)
    elif green < 2 / 3:
        num = 7 / 4 + beta * (1 / 2 - 3 * green / 4)
    else:
        num = 7 / 4
    return _clamp(num / d)


def harmonic_ub(beta: float, green: float) -> float:
    _small(beta, green, "harmonic_ub")
    h = HARMONIC_INF
    d = 1 + beta * (1 - green)
    if green <= 0.5:
        num = h - h * beta * green + beta
    elif green <= 2 / 3:
        num = h - (h - 1) * beta * green + beta / 2
    else:
        num = max(h + beta * (1 - green) / 6, 1.636 + beta * (1 - green) / 2)
    return _clamp(num / d)


def general_lb_small(beta: float, green: float) -> float:
    _small(beta, green, "general_lb_small")
    r = float(GENERAL_RATIO)
    return _clamp((r + beta * _pos(1 - r * green)) / (1 + beta * (1 - green)))


# beta*G > 1

def nextfit_tau_cr(beta: float, green: float, tau: float) -> float:
    _large(beta, green, "nextfit_tau_cr")
    t = _tau(beta, green, tau)
    g = green
    return _clamp(max(g * (1 + t * beta) / (g + t),
                      g * (2 + t * beta) / (g + 2 * t),
                      (2 + t * beta) / (1 + t * beta)))


def nextfit_tau_optimal(beta: float, green: float) -> tuple:
    """Return ``(tau*, ratio)`` minimising the NextFit threshold ratio."""
    _large(beta, green, "nextfit_tau_optimal")
    x = beta * green
    full = 1 - green
    if x <= 2:
        disc = 5 * x * x - 8 * x + 4
        tilde = (2 - x + math.sqrt(disc)) / (2 * beta * (x - 1))
        if tilde < full:
            return tilde, _clamp((3 * x - 2 + math.sqrt(disc)) / (x + math.sqrt(disc)))
        return full, _clamp((2 + beta * full) / (1 + beta * full))
    if x < 4:
        root = math.sqrt(green / beta)
        if root < full:
            return root, _clamp(math.sqrt(x))
        return full, _clamp((2 * green + x * full) / (2 - green))
    return 0.0, 2.0


def taf_lb(beta: float, green: float, tau: float) -> float:
    """Lower bound for threshold Any-Fit algorithms (and Harmonic)."""
    _large(beta, green, "taf_lb")
    t = _tau(beta, green, tau)
    g = green
    if _at_full(g, t):
        b = beta * (1 - g)
        return _clamp(max(aaf_harmonic_lb(beta, g), 1 + (2 * g - 1) * (1 + b) / 2, g * (1 + b)))
    return _clamp(max(2 / (1 + t * beta),
                      1 + (g - t) * (1 + t * beta) / (2 * (g + t)),
                      g * (1 + t * beta) / (g + t)))


def tau_hat(beta: float, green: float) -> float:
    """Threshold where the first two pieces of ``taf_lb`` cross.

    Root in (0, 1/beta) of ``-b^2 t^3 + b^2 G t^2 + (4bG - 3) t - G``.
    """
    _large(beta, green, "tau_hat")
    b, g = beta, green

    def f(t):
        return -b * b * t ** 3 + b * b * g * t * t + (4 * b * g - 3) * t - g

    return brentq(f, 0.0, 1.0 / b, xtol=1e-12, rtol=4 * 2.220446049250313e-16)


def worstfit_tau_ub(beta: float, green: float, tau: float) -> float:
    _large(beta, green, "worstfit_tau_ub")
    t = _tau(beta, green, tau)
    g = green
    return _clamp(max(2 * g / (g + t), g * (1 + t * beta) / (g + t)))


def taf_ub(beta: float, green: float, tau: float) -> float:
    """Upper bound for threshold Almost-Any-Fit algorithms and Harmonic."""
    _large(beta, green, "taf_ub")
    t = _tau(beta, green, tau)
    g = green
    if _at_full(g, t):
        b = beta * (1 - g)
        return _clamp(max((6 * g + 1) / 4, 1 + (2 * g - 1) * (1 + b) / 2, g * (1 + b)))
    return _clamp(max(2 / (1 + t * beta),
                      (7 * g + t) / (4 * (g + t)),
                      1 + (g - t) * (1 + t * beta) / (2 * (g + t)),
                      g * (1 + t * beta) / (g + t)))


@dataclass(frozen=True)
class TauChoice:
    tau: float
    ratio: float
    exact: bool


def taf_optimized_tau(beta: float, green: float) -> TauChoice:
    """Threshold choice for Almost-Any-Fit / Harmonic when beta*G > 1.

    ``exact`` says whether the choice is known to minimise ``taf_ub``.
    """
    _large(beta, green, "taf_optimized_tau")
    x = beta * green
    full = 1 - green
    one, half = 1 / beta, 1 / (2 * beta)
    at_one = 2 * x / (x + 1)
    at_half = (14 * x + 1) / (8 * x + 4)
    if beta * full >= 1:
        if x <= TAF_SWITCH_BG:
            return TauChoice(one, at_one, x <= TAF_EXACT_BG)
        return TauChoice(half, at_half, False)
    if 2 * beta * full >= 1:
        at_full = 1 + (2 * green - 1) * (1 + beta * full) / 2
        if at_half < at_full:
            return TauChoice(half, at_half, False)
        return TauChoice(full, at_full, False)
    return TauChoice(full, (6 * green + 1) / 4, False)


def general_lb_large_step(x: float) -> float:
    if x <= 1:
        raise RegimeError(f"step bound holds for beta*G > 1, got {x}")
    if x <= 1.5:
        return 3 * (x + 1) / (x + 5)
    if x <= 3:
        return 3 * (x + 3) / (x + 11)
    if x <= 4:
        return 9 / 7
    if x <= 48:
        return 4 / 3
    return 3 / 2


def general_lb_large(beta: float, green: float) -> float:
    _large(beta, green, "general_lb_large")
    r = float(GENERAL_RATIO)
    first = (r + 1 - green) / (1 + beta * (1 - green))
    return _clamp(max(first, general_lb_large_step(beta * green)))


def mu1(r: float, beta: float, green: float) -> float:
    _large(beta, green, "mu1")
    b, g = beta, green
    lin = 1 - g * b - 2 * r * b
    disc = (g * b + 2 * r * b - 1) ** 2 + 4 * b * (g - 2 * r)
    return (lin + math.sqrt(disc)) / (2 * b)


def mu2(r: float, beta: float, green: float) -> float:
    _large(beta, green, "mu2")
    return r / (beta * (green + r) - 1)


# weight functions used by the amortised analyses

def weight_aaf_small_g(x: float, beta: float, green: float) -> float:
    if x <= 0.5:
        return (1.5 * (1 - beta * green) + beta) * x
    return 1 + beta * _pos(x - green)


def weight_aaf_large_g(x: float, beta: float, green: float) -> float:
    if x <= 0.5:
        return 1.5 * x
    return 1 + beta * _pos(x - green)


def weight_aaf(x: float, beta: float, green: float) -> float:
    """The Almost-Any-Fit weight for the given G (small vs large variant)."""
    if green <= 2 / 3:
        return weight_aaf_small_g(x, beta, green)
    return weight_aaf_large_g(x, beta, green)


def weight_harmonic(x: float, beta: float, green: float) -> float:
    i = harmonic_class(x, 10 ** 9, 1.0)
    return (1 + beta * _pos(i * x - green)) / i


def weight_threshold(x: float, beta: float, green: float, tau: float, r: float) -> float:
    if not (-1e-15 <= r <= (green + tau) / 6 + 1e-15):
        raise DomainError(f"R={r} outside [0, (G + tau)/6]")
    return x if x <= (green + tau) / 2 else x + r


@dataclass
class BoundReport:
    algorithm: str
    regime: str
    lower: float
    upper: float | None
    tau_used: float
    tau_optimal: float
    pieces: dict = field(default_factory=dict)


BOUND_ALGORITHMS = ("nextfit", "worstfit", "almostanyfit", "harmonic", "general")
_ALIASES = {"firstfit": "almostanyfit", "bestfit": "almostanyfit", "aaf": "almostanyfit"}


def theory_tau(algorithm: str, beta: float, green: float) -> float:
    """Threshold the analysis recommends for ``algorithm``."""
    alg = _ALIASES.get(algorithm, algorithm)
    if alg.startswith("harmonic"):
        alg = "harmonic"
    if beta * green <= 1:
        return 1 - green
    if alg == "nextfit":
        return nextfit_tau_optimal(beta, green)[0]
    if alg == "worstfit":
        return min(1 / beta, 1 - green)
    if alg in ("almostanyfit", "harmonic"):
        return taf_optimized_tau(beta, green).tau
    if alg == "general":
        return 1 - green
    raise DomainError(f"unknown algorithm {algorithm!r}")


def report(algorithm: str, beta: float, green: float, tau: float | None = None) -> BoundReport:
    alg = _ALIASES.get(algorithm, algorithm)
    if alg.startswith("harmonic"):
        alg = "harmonic"
    if alg not in BOUND_ALGORITHMS:
        raise DomainError(f"unknown algorithm {algorithm!r}; expected one of {BOUND_ALGORITHMS}")
    _check(beta, green)
    t_opt = theory_tau(alg, beta, green)
    t = t_opt if tau is None else _tau(beta, green, tau)
    pieces: dict = {}
    if beta * green <= 1:
        regime = "small"
        if alg == "nextfit":
            lo = up = nextfit_cr(beta, green)
        elif alg == "worstfit":
            lo = up = worstfit_cr(beta, green)
        elif alg == "almostanyfit":
            lo, up = aaf_harmonic_lb(beta, green), aaf_ub(beta, green)
        elif alg == "harmonic":
            lo, up = aaf_harmonic_lb(beta, green), harmonic_ub(beta, green)
        else:
            lo, up = general_lb_small(beta, green), None
            pieces["aaf_harmonic_lb"] = aaf_harmonic_lb(beta, green)
    else:
        regime = "large"
        if alg == "nextfit":
            lo = up = nextfit_tau_cr(beta, green, t)
            g = green
            pieces = {"G(1+tb)/(G+t)": g * (1 + t * beta) / (g + t),
                      "G(2+tb)/(G+2t)": g * (2 + t * beta) / (g + 2 * t),
                      "(2+tb)/(1+tb)": (2 + t * beta) / (1 + t * beta)}
        elif alg == "worstfit":
            lo, up = taf_lb(beta, green, t), worstfit_tau_ub(beta, green, t)
        elif alg in ("almostanyfit", "harmonic"):
            lo, up = taf_lb(beta, green, t), taf_ub(beta, green, t)
            if t < 1 / beta:
                pieces["tau_hat"] = tau_hat(beta, green)
        else:
            lo, up = general_lb_large(beta, green), None
            pieces["step"] = general_lb_large_step(beta * green)
    return BoundReport(alg, regime, lo, up, t, t_opt, pieces)
