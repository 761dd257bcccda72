"""Closed-form laws of the Poisson process with intensity one, and comparison helpers."""

from __future__ import annotations

import math
from typing import Mapping

import numpy as np

from .functions import IntervalSet, TestFunction, as_intervals

__all__ = [
    "PoissonLaw",
    "poisson_pmf",
    "exponential_gap_cdf",
    "poisson_k_neighbor_cdf",
    "poisson_pair_value",
    "poisson_mixed_second",
    "moment_exists",
    "total_variation",
    "sup_distance",
]


class PoissonLaw:
    """Poisson distribution with parameter ``intensity`` (the window length)."""

    def __init__(self, intensity: float):
        if not intensity > 0:
            raise ValueError("intensity must be positive")
        self.intensity = float(intensity)

    def pmf(self, r: int) -> float:
        return poisson_pmf(r, self.intensity)

    def table(self, r_max: int) -> dict[tuple[int], float]:
        return {(r,): poisson_pmf(r, self.intensity) for r in range(r_max + 1)}


def poisson_pmf(r: int, length: float) -> float:
    """``e^{-length} length^r / r!``; log-space evaluation for ``r > 20``."""
    r = int(r)
    if r < 0:
        raise ValueError("r must be nonnegative")
    if not length > 0:
        raise ValueError("length must be positive")
    if r > 20:
        return math.exp(-length + r * math.log(length) - math.lgamma(r + 1))
    return math.exp(-length) * length ** r / math.factorial(r)


def exponential_gap_cdf(a):
    """``1 - e^{-a}``, the gap distribution of the unit-intensity Poisson process."""
    arr = np.asarray(a, dtype=float)
    if np.any(arr < 0):
        raise ValueError("a must be nonnegative")
    out = -np.expm1(-arr)
    return float(out) if out.ndim == 0 else out


def poisson_k_neighbor_cdf(a, k: int):
    """CDF of the distance to the k-th successor: ``1 - e^{-a} sum_{j<k} a^j/j!`` (Erlang(k, 1))."""
    arr = np.asarray(a, dtype=float)
    if np.any(arr < 0):
        raise ValueError("a must be nonnegative")
    if k == 1:
        return exponential_gap_cdf(arr)
    term = np.ones_like(arr)
    acc = np.ones_like(arr)
    for j in range(1, k):
        term = term * arr / j
        acc = acc + term
    out = 1.0 - np.exp(-arr) * acc
    return float(out) if out.ndim == 0 else out


def poisson_pair_value(f: TestFunction) -> float:
    """Limit of the pair correlation for Poisson-like sequences: ``int f``."""
    return f.integral()


def poisson_mixed_second(i1, i2) -> float:
    """``|I1 n I2| + |I1| |I2|``, the mixed second moment of Poisson counts."""
    i1, i2 = as_intervals(i1), as_intervals(i2)
    return i1.intersection_length(i2) + i1.length * i2.length


def moment_exists(s: float, rational: bool) -> bool:
    """Whether the limit process has a finite moment of order ``s``.

    Finite exactly for ``s < 2`` when the shift is rational and ``s < 3``
    otherwise; the critical exponents themselves diverge.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    return s < (2.0 if rational else 3.0)


def total_variation(p: Mapping, q: Mapping) -> float:
    """Total-variation distance between two discrete laws given as ``{outcome: mass}``."""
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def sup_distance(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))
