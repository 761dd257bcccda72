"""Empirical Diophantine exponents of scalars and planar vectors.

A number is Diophantine of type ``kappa`` when ``|k.xi + l| >= C |k|^-kappa``
for all nonzero integer ``k``.  The constant ``C`` is unknown, so a finite
search cannot read ``kappa`` off a single ratio ``log(1/d)/log|k|``: for
``sqrt(2)`` and ``k = 2`` that ratio is already 2.5.  The estimate used here
is the least-squares slope of ``log(1/d)`` against ``log|k|`` over the
successive minima ("records") of ``d(k) = dist(k.xi, Z)``, which is
insensitive to ``C``.  The raw maximum ratio over ``|k| >= 2`` is reported
alongside it and replaces the slope when fewer than two records with
``|k| >= 2`` exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "RationalInputError",
    "ContinuedFraction",
    "DiophantineReport",
    "RationalLineReport",
    "continued_fraction",
    "from_continued_fraction",
    "scalar_type_estimate",
    "vector_type_estimate",
    "rational_line_check",
]

MAX_CF_DEPTH = 60
CF_REMAINDER_TOL = 1e-12
RATIONAL_TOL = 1e-13
LINE_TOL = 1e-10


class RationalInputError(ValueError):
    """The input is rational (or rationally dependent) at machine precision."""


@dataclass(frozen=True)
class ContinuedFraction:
    quotients: list[int]
    terminated: bool  # True when the expansion ended before the requested depth


@dataclass
class DiophantineReport:
    kappa_estimate: float
    worst_witness: tuple  # (k, l, |k.xi + l|) with k an int or a pair
    search_bound: int
    kappa_ratio: float
    records: list[tuple[int, float]] = field(default_factory=list)
    c_proxy: float = float("nan")


@dataclass
class RationalLineReport:
    found: bool
    k: tuple[int, int] | None = None
    c: int | None = None
    meets_lattice: bool | None = None
    m: tuple[int, int] | None = None
    bound: int = 0

    def line(self) -> str:
        if not self.found:
            return "none"
        k1, k2 = self.k
        terms = []
        for coef, var in ((k1, "x"), (k2, "y")):
            if coef == 0:
                continue
            sign = "-" if coef < 0 else "+"
            mag = "" if abs(coef) == 1 else str(abs(coef))
            terms.append((sign, f"{mag}{var}"))
        text = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            text += f" {sign} {body}"
        return f"{text} = {self.c}"


def continued_fraction(omega, depth: int = 20) -> ContinuedFraction:
    """Partial quotients ``[a0; a1, a2, ...]`` of ``omega``.

    Works with floats, ``Fraction`` and ``mpmath.mpf``.  Doubles carry
    roughly 20-25 reliable quotients; ``depth`` is capped at 60.
    """
    depth = int(depth)
    if not 1 <= depth <= MAX_CF_DEPTH:
        raise ValueError(f"depth must be in [1, {MAX_CF_DEPTH}]")
    if isinstance(omega, float) and not math.isfinite(omega):
        raise ValueError("omega must be finite")
    x = omega
    a = math.floor(x)
    out = [int(a)]
    rem = x - a
    while len(out) < depth:
        if rem < CF_REMAINDER_TOL:
            return ContinuedFraction(out, True)
        x = 1 / rem
        a = math.floor(x)
        out.append(int(a))
        rem = x - a
    return ContinuedFraction(out, rem < CF_REMAINDER_TOL)


def from_continued_fraction(quotients: Sequence[int]) -> Fraction:
    value = Fraction(quotients[-1])
    for a in reversed(quotients[:-1]):
        value = a + 1 / value
    return value


def _dist(x: np.ndarray) -> np.ndarray:
    return np.abs(x - np.rint(x))


def _records(norms: np.ndarray, dists: np.ndarray) -> np.ndarray:
    """Indices where ``dists`` reaches a new strict minimum (``norms`` ascending)."""
    prev = np.minimum.accumulate(np.concatenate([[np.inf], dists[:-1]]))
    return np.nonzero(dists < prev)[0]


def _fit(rec_k: np.ndarray, rec_d: np.ndarray, fallback: float) -> float:
    use = rec_k >= 2  # log 1 = 0 carries no scaling information
    if use.sum() < 2:
        return fallback
    slope, _ = np.polyfit(np.log(rec_k[use].astype(float)), -np.log(rec_d[use]), 1)
    return float(slope)


def _report(norms, dists, witnesses, k_max) -> DiophantineReport:
    idx = _records(norms, dists)
    rec_k, rec_d = norms[idx], dists[idx]
    big = norms >= 2
    ratio = float(np.max(np.log(1 / dists[big]) / np.log(norms[big])))
    kappa = _fit(rec_k, rec_d, ratio)
    best = idx[-1]
    with np.errstate(over="ignore"):
        c_proxy = float(np.min(rec_d * rec_k.astype(float) ** kappa))
    return DiophantineReport(
        kappa_estimate=kappa,
        worst_witness=witnesses(best),
        search_bound=int(k_max),
        kappa_ratio=ratio,
        records=[(int(a), float(b)) for a, b in zip(rec_k, rec_d)],
        c_proxy=c_proxy,
    )


def scalar_type_estimate(omega: float, k_max: int) -> DiophantineReport:
    """Estimate the Diophantine type of a real number from ``1 <= k <= k_max``."""
    k_max = int(k_max)
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    if continued_fraction(omega, 30).terminated:
        raise RationalInputError(f"{omega!r} is rational: its continued fraction terminates")
    omega = float(omega)
    k = np.arange(1, k_max + 1, dtype=np.int64)
    kx = k * omega
    d = _dist(kx)
    if d.min() < RATIONAL_TOL:
        raise RationalInputError(f"{omega!r} is rational at machine precision (k = {int(k[np.argmin(d)])})")

    def witness(i):
        return (int(k[i]), int(-np.rint(kx[i])), float(d[i]))

    return _report(k, d, witness, k_max)


def _half_plane(k_max: int) -> tuple[np.ndarray, np.ndarray]:
    # one representative of each pair +-k, ordered by L1 norm then lexicographically
    k1, k2 = np.meshgrid(np.arange(0, k_max + 1), np.arange(-k_max, k_max + 1), indexing="ij")
    k1, k2 = k1.ravel(), k2.ravel()
    norm = np.abs(k1) + np.abs(k2)
    keep = (norm >= 1) & (norm <= k_max) & ((k1 > 0) | ((k1 == 0) & (k2 > 0)))
    k1, k2, norm = k1[keep], k2[keep], norm[keep]
    order = np.lexsort((k2, k1, norm))
    return k1[order], k2[order]


def vector_type_estimate(xi: Sequence[float], k_max: int) -> DiophantineReport:
    """Estimate the Diophantine type of ``xi in R^2`` over ``1 <= |k1| + |k2| <= k_max``."""
    k_max = int(k_max)
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    x1, x2 = (float(v) for v in xi)
    k1, k2 = _half_plane(k_max)
    kx = k1 * x1 + k2 * x2
    d = _dist(kx)
    bad = np.nonzero(d < RATIONAL_TOL)[0]
    if bad.size:
        i = bad[0]
        raise RationalInputError(
            f"xi = ({x1!r}, {x2!r}) is rationally dependent: k = ({k1[i]}, {k2[i]}) gives k.xi = {kx[i]!r}")
    norm = np.abs(k1) + np.abs(k2)
    # first (lexicographically smallest) minimiser within each L1 shell
    shell_first = np.searchsorted(norm, np.arange(1, k_max + 1))
    shell_best = np.empty(k_max, dtype=np.int64)
    shell_d = np.empty(k_max)
    for s in range(k_max):
        lo = shell_first[s]
        hi = shell_first[s + 1] if s + 1 < k_max else norm.size
        j = lo + int(np.argmin(d[lo:hi]))
        shell_best[s], shell_d[s] = j, d[j]
    shells = np.arange(1, k_max + 1)

    def witness(i):
        j = shell_best[i]
        return ((int(k1[j]), int(k2[j])), int(-np.rint(kx[j])), float(d[j]))

    return _report(shells, shell_d, witness, k_max)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), (1 if a >= 0 else -1), 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


def rational_line_check(xi: Sequence[float], bound: int) -> RationalLineReport:
    """Look for a rational line ``k.x = c`` (``c`` integer) through ``xi``.

    If one exists, report whether it meets ``Z^2``.  When it does, some
    translate ``xi + m`` lies on a rational line through the origin and
    ``m`` is returned; otherwise the shift is of the safe collinear kind.
    """
    bound = int(bound)
    if bound < 1:
        raise ValueError("bound must be >= 1")
    x1, x2 = (float(v) for v in xi)
    k1, k2 = _half_plane(2 * bound)
    keep = (np.abs(k1) <= bound) & (np.abs(k2) <= bound)
    k1, k2 = k1[keep], k2[keep]
    kx = k1 * x1 + k2 * x2
    hits = np.nonzero(_dist(kx) < LINE_TOL)[0]
    if not hits.size:
        return RationalLineReport(found=False, bound=bound)
    i = hits[0]
    a, b = int(k1[i]), int(k2[i])
    c = int(np.rint(kx[i]))
    g, u, v = _ext_gcd(a, b)
    meets = c % g == 0
    m = None
    if meets:
        f = -c // g
        m = (u * f, v * f)
    return RationalLineReport(found=True, k=(a, b), c=c, meets_lattice=meets, m=m, bound=bound)
