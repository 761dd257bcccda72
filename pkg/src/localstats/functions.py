"""Interval sets and piecewise-linear test functions.

Both are the "window" objects fed to the local statistics: an
:class:`IntervalSet` plays the role of a sharp window, a
:class:`TestFunction` the role of a smooth one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "IntervalSet",
    "TestFunction",
    "PiecewisePolynomial",
    "product",
    "correlation_convolution",
    "simpson_pieces",
]


@dataclass(frozen=True)
class IntervalSet:
    """One or more closed, bounded intervals ``[lo, hi]`` with ``lo < hi``.

    Membership and length refer to the union of the intervals.
    """

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ivs = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        if not ivs:
            raise ValueError("IntervalSet needs at least one interval")
        for lo, hi in ivs:
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise ValueError(f"unbounded interval ({lo}, {hi})")
            if not lo < hi:
                raise ValueError(f"interval needs lo < hi, got ({lo}, {hi})")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def of(cls, lo: float, hi: float) -> "IntervalSet":
        return cls(((lo, hi),))

    @classmethod
    def parse(cls, text: str) -> "IntervalSet":
        """Parse ``"a,b"`` or ``"a,b;c,d"``."""
        pairs = []
        for chunk in text.split(";"):
            lo, hi = chunk.split(",")
            pairs.append((float(lo), float(hi)))
        return cls(tuple(pairs))

    def pieces(self) -> list[tuple[float, float]]:
        """Disjoint, sorted pieces of the union."""
        out: list[list[float]] = []
        for lo, hi in sorted(self.intervals):
            if out and lo <= out[-1][1]:
                out[-1][1] = max(out[-1][1], hi)
            else:
                out.append([lo, hi])
        return [(lo, hi) for lo, hi in out]

    @property
    def length(self) -> float:
        return float(sum(hi - lo for lo, hi in self.pieces()))

    @property
    def lo(self) -> float:
        return min(lo for lo, _ in self.intervals)

    @property
    def hi(self) -> float:
        return max(hi for _, hi in self.intervals)

    def contains(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        inside = np.zeros(w.shape, dtype=bool)
        for lo, hi in self.intervals:
            inside |= (w >= lo) & (w <= hi)
        return inside

    def shifted(self, t: float) -> "IntervalSet":
        return IntervalSet(tuple((lo + t, hi + t) for lo, hi in self.intervals))

    def widened(self, theta: float) -> "IntervalSet":
        """Minkowski sum with ``[-theta, theta]``."""
        return IntervalSet(tuple((lo - theta, hi + theta) for lo, hi in self.intervals))

    def reflected(self) -> "IntervalSet":
        return IntervalSet(tuple((-hi, -lo) for lo, hi in self.intervals))

    def intersection_length(self, other: "IntervalSet") -> float:
        total = 0.0
        for a, b in self.pieces():
            for c, d in other.pieces():
                total += max(0.0, min(b, d) - max(a, c))
        return total

    def to_list(self) -> list[list[float]]:
        return [[lo, hi] for lo, hi in self.intervals]


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Continuous, nonnegative, piecewise-linear function of compact support.

    The function interpolates ``values`` at ``knots`` and vanishes outside
    ``[knots[0], knots[-1]]``; both end values must be zero.
    """

    __test__ = False  # keep pytest from collecting this class

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.ndim != 1 or k.shape != v.shape or k.size < 2:
            raise ValueError("knots and values must be 1-d arrays of equal length >= 2")
        if not np.all(np.isfinite(k)) or not np.all(np.isfinite(v)):
            raise ValueError("knots and values must be finite")
        if np.any(np.diff(k) <= 0):
            raise ValueError("knots must be strictly increasing")
        if np.any(v < 0):
            raise ValueError("test functions are nonnegative")
        if v[0] != 0 or v[-1] != 0:
            raise ValueError("value at first and last knot must be 0 (compact support)")
        k.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)

    # -- constructors -----------------------------------------------------
    @classmethod
    def hat(cls, center: float = 0.0, half_width: float = 1.0, height: float = 1.0) -> "TestFunction":
        return cls(np.array([center - half_width, center, center + half_width]),
                   np.array([0.0, height, 0.0]))

    @classmethod
    def plateau(cls, lo: float, hi: float, shoulder: float = 1e-6, height: float = 1.0) -> "TestFunction":
        """Height ``height`` on ``[lo, hi]`` with linear shoulders of width ``shoulder``."""
        if not lo < hi or shoulder <= 0:
            raise ValueError("plateau needs lo < hi and shoulder > 0")
        return cls(np.array([lo - shoulder, lo, hi, hi + shoulder]),
                   np.array([0.0, height, height, 0.0]))

    @classmethod
    def zero(cls, lo: float = -1.0, hi: float = 1.0) -> "TestFunction":
        return cls(np.array([lo, hi]), np.array([0.0, 0.0]))

    # -- evaluation -------------------------------------------------------
    def __call__(self, w):
        return np.interp(w, self.knots, self.values, left=0.0, right=0.0)

    @property
    def support(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    @property
    def breakpoints(self) -> np.ndarray:
        return self.knots

    degree = 1

    def integral(self) -> float:
        """Exact integral (trapezoid rule is exact on linear pieces)."""
        return float(np.sum(np.diff(self.knots) * (self.values[1:] + self.values[:-1]) / 2))

    def scaled(self, factor: float) -> "TestFunction":
        return TestFunction(self.knots, self.values * factor)

    def to_dict(self) -> dict:
        return {"knots": self.knots.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "TestFunction":
        return cls(np.array(d["knots"]), np.array(d["values"]))

    def __repr__(self):
        return f"TestFunction(knots={self.knots.tolist()}, values={self.values.tolist()})"


@dataclass(frozen=True)
class PiecewisePolynomial:
    """A callable that is a polynomial of degree <= ``degree`` between ``breakpoints``.

    Used for products and correlation-convolutions of test functions, which
    leave the piecewise-linear class but keep a known breakpoint set.
    """

    func: Callable[[np.ndarray], np.ndarray]
    breakpoints: np.ndarray
    degree: int
    support: tuple[float, float] = field(default=(0.0, 0.0))

    def __call__(self, w):
        return self.func(np.asarray(w, dtype=float))


def product(f1: TestFunction, f2: TestFunction) -> PiecewisePolynomial:
    """Pointwise product ``f1 * f2`` (piecewise quadratic)."""
    lo = max(f1.support[0], f2.support[0])
    hi = min(f1.support[1], f2.support[1])
    bps = np.union1d(f1.knots, f2.knots)
    if lo >= hi:
        lo = hi = 0.0
    return PiecewisePolynomial(lambda w: f1(w) * f2(w), bps, 2, (lo, hi))


def simpson_pieces(func: Callable[[np.ndarray], np.ndarray], edges: np.ndarray) -> float:
    """Integrate ``func`` over ``[edges[0], edges[-1]]`` piece by piece with Simpson's rule.

    Exact (up to round-off) when ``func`` is a polynomial of degree <= 3 on
    every piece ``[edges[i], edges[i+1]]``.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    h = b - a
    keep = h > 0
    a, b, h = a[keep], b[keep], h[keep]
    vals = func(np.concatenate([a, (a + b) / 2, b]))
    fa, fm, fb = np.split(vals, 3)
    return float(np.sum(h * (fa + 4 * fm + fb)) / 6)


def _conv_values(f1: TestFunction, f2: TestFunction, w: np.ndarray) -> np.ndarray:
    # For each w the integrand t -> f1(w+t) f2(t) is quadratic between the
    # merged knots {a_i - w} and {b_j}; Simpson per sub-piece is exact.
    w = np.atleast_1d(np.asarray(w, dtype=float))
    out = np.empty(w.shape, dtype=float)
    flat_w = w.ravel()
    res = out.ravel()
    chunk = 4096
    for start in range(0, flat_w.size, chunk):
        ww = flat_w[start:start + chunk, None]
        t = np.sort(np.concatenate([f1.knots[None, :] - ww,
                                    np.broadcast_to(f2.knots, (ww.shape[0], f2.knots.size))], axis=1),
                    axis=1)
        a, b = t[:, :-1], t[:, 1:]
        m = (a + b) / 2
        g = lambda s: f1(ww + s) * f2(s)
        res[start:start + chunk] = np.sum((b - a) * (g(a) + 4 * g(m) + g(b)), axis=1) / 6
    return out


def correlation_convolution(f1: TestFunction, f2: TestFunction) -> PiecewisePolynomial:
    """``(f1 *' f2)(w) = integral of f1(w + t) f2(t) dt``, evaluated exactly.

    The result is piecewise cubic with breakpoints at ``a_i - b_j``.
    """
    bps = np.unique(np.subtract.outer(f1.knots, f2.knots).ravel())
    lo = f1.support[0] - f2.support[1]
    hi = f1.support[1] - f2.support[0]
    return PiecewisePolynomial(lambda w: _conv_values(f1, f2, w), bps, 3, (lo, hi))


def as_intervals(obj: IntervalSet | Sequence[float] | Iterable) -> IntervalSet:
    if isinstance(obj, IntervalSet):
        return obj
    obj = list(obj)
    if len(obj) == 2 and np.isscalar(obj[0]):
        return IntervalSet.of(*obj)
    return IntervalSet(tuple(tuple(p) for p in obj))
