"""Local statistics of sequences modulo one in the Poisson scaling regime.

Conventions used throughout:

* ``X_N(x, I)`` counts pairs ``(n, m)`` with ``N (xi_n - x + m)`` in the
  closed set ``I``.  Endpoint conventions only matter on sets of ``x`` of
  measure zero.
* Integrals over ``x`` are with respect to Lebesgue measure on ``[0, 1)``.
  ``method="grid"`` uses the midpoint rule on ``x_grid_size`` points;
  ``method="exact"`` integrates the piecewise-constant (or piecewise
  polynomial) integrand exactly between its breakpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import reference_laws as laws
from ._parallel import map_chunks
from .functions import (
    IntervalSet,
    PiecewisePolynomial,
    TestFunction,
    as_intervals,
    correlation_convolution,
    product,
    simpson_pieces,
)
from .reports import CountField, HistogramReport
from .sequences import TorusSequence

__all__ = [
    "x_grid",
    "count_stat",
    "count_field",
    "smooth_stat",
    "smooth_field",
    "window_counts",
    "smooth_values",
    "CountProfile",
    "count_profile",
    "pair_correlation",
    "pair_correlation_naive",
    "pair_correlation_histogram",
    "scaled_differences",
    "lemma1_check",
    "gap_distribution",
    "gap_histogram",
    "k_neighbor_distribution",
    "moments",
    "restricted_moments",
    "empirical_counting_distribution",
    "gap_law_from_counting",
    "uniformity_check",
    "DEFAULT_GRID",
]

DEFAULT_GRID = 10_000
_SLACK = 1e-12


def x_grid(size: int) -> np.ndarray:
    """Midpoints of ``size`` equal cells of ``[0, 1)``."""
    size = int(size)
    if size < 1:
        raise ValueError("grid size must be >= 1")
    return (np.arange(size) + 0.5) / size


def _require_n(seq: TorusSequence, n_min: int, what: str = "statistic"):
    if seq.n_count < n_min:
        raise ValueError(f"{what} needs N >= {n_min}, got N = {seq.n_count}")


# ---------------------------------------------------------------------------
# counting variables


def count_stat(seq: TorusSequence, x: float, iv: IntervalSet | Sequence[float]) -> int:
    """``X_N(x, I)`` evaluated literally from its defining double sum."""
    iv = as_intervals(iv)
    _require_n(seq, 1, "count_stat")
    n = seq.n_count
    diff = seq.points - float(x)
    m_lo = math.floor(iv.lo / n) - 1
    m_hi = math.ceil(iv.hi / n) + 1
    total = 0
    for m in range(m_lo, m_hi + 1):
        total += int(np.count_nonzero(iv.contains(n * (diff + m))))
    return total


def _cumulative(sorted_pts: np.ndarray, t: np.ndarray, side: str) -> np.ndarray:
    # number of (n, m) with xi_n + m <= t (side="right") or < t (side="left"), up to a constant
    fl = np.floor(t)
    return fl.astype(np.int64) * sorted_pts.size + np.searchsorted(sorted_pts, t - fl, side=side)


def window_counts(sorted_pts: np.ndarray, xs: np.ndarray, iv: IntervalSet) -> np.ndarray:
    """``X_N(x, I)`` for every ``x`` in ``xs`` (``sorted_pts`` must be sorted)."""
    n = sorted_pts.size
    xs = np.asarray(xs, dtype=float)

    def work(chunk):
        out = np.zeros(chunk.size, dtype=np.int64)
        for lo, hi in iv.pieces():
            out += (_cumulative(sorted_pts, chunk + hi / n, "right")
                    - _cumulative(sorted_pts, chunk + lo / n, "left"))
        return out

    return map_chunks(work, xs)


def count_field(seq: TorusSequence, iv, x_grid_size: int = DEFAULT_GRID) -> CountField:
    iv = as_intervals(iv)
    _require_n(seq, 1, "count_field")
    xs = x_grid(x_grid_size)
    return CountField(xs, window_counts(seq.sorted_points(), xs, iv), seq.n_count, iv.to_list())


def smooth_values(sorted_pts: np.ndarray, xs: np.ndarray, func: Callable, support: tuple[float, float]) -> np.ndarray:
    """``X_N(x, f) = sum f(N (xi_n - x + m))`` for every ``x`` in ``xs``.

    ``func`` must vanish outside ``support``.
    """
    n = sorted_pts.size
    lo, hi = support
    xs = np.asarray(xs, dtype=float)
    if n == 0 or hi <= lo:
        return np.zeros(xs.size)
    m_lo = math.floor(lo / n) - 1
    m_hi = math.ceil(hi / n) + 1
    ext = np.concatenate([sorted_pts + m for m in range(m_lo, m_hi + 1)])

    def work(chunk):
        left = np.searchsorted(ext, chunk + lo / n - _SLACK, side="left")
        right = np.searchsorted(ext, chunk + hi / n + _SLACK, side="right")
        cnt = right - left
        total = int(cnt.sum())
        if total == 0:
            return np.zeros(chunk.size)
        owner = np.repeat(np.arange(chunk.size), cnt)
        start = np.repeat(np.cumsum(cnt) - cnt, cnt)
        idx = left[owner] + (np.arange(total) - start)
        vals = func(n * (ext[idx] - chunk[owner]))
        return np.bincount(owner, weights=vals, minlength=chunk.size)

    return map_chunks(work, xs, chunk=16384)


def smooth_stat(seq: TorusSequence, x: float, f: TestFunction) -> float:
    """``X_N(x, f)`` for a single ``x``."""
    _require_n(seq, 1, "smooth_stat")
    return float(smooth_values(seq.sorted_points(), np.array([float(x)]), f, f.support)[0])


def smooth_field(seq: TorusSequence, f: TestFunction, x_grid_size: int = DEFAULT_GRID) -> CountField:
    _require_n(seq, 1, "smooth_field")
    xs = x_grid(x_grid_size)
    return CountField(xs, smooth_values(seq.sorted_points(), xs, f, f.support), seq.n_count, f.to_dict())


# ---------------------------------------------------------------------------
# exact piecewise-constant profiles


@dataclass(eq=False)
class CountProfile:
    """Exact description of ``x -> (X_N(x, I_1), ..., X_N(x, I_m))`` on ``[0, 1)``.

    ``lengths[k]`` is the length of the k-th segment and ``counts[:, k]``
    the (constant) count vector on it.
    """

    lengths: np.ndarray
    counts: np.ndarray

    def integrate(self, s: Sequence[float], cap: int | None = None) -> float:
        s = np.asarray(s, dtype=float)
        integrand = np.ones(self.lengths.size)
        for j, sj in enumerate(s):
            integrand *= np.power(self.counts[j].astype(float), sj)
        if cap is not None:
            integrand = np.where(self.counts.max(axis=0) <= cap, integrand, 0.0)
        return float(np.sum(self.lengths * integrand))

    def distribution(self) -> dict[tuple[int, ...], float]:
        return _distribution(self.counts, self.lengths)


def _distribution(counts: np.ndarray, weights: np.ndarray) -> dict[tuple[int, ...], float]:
    counts = np.asarray(counts)
    if counts.shape[0] == 1:
        c = counts[0]
        probs = np.bincount(c, weights=weights)
        return {(int(r),): float(p) for r, p in enumerate(probs) if p > 0}
    keys, inverse = np.unique(counts.T, axis=0, return_inverse=True)
    probs = np.bincount(inverse.ravel(), weights=weights)
    return {tuple(int(v) for v in key): float(p) for key, p in zip(keys, probs) if p > 0}


def count_profile(seq: TorusSequence, boxes: Sequence[IntervalSet]) -> CountProfile:
    """Exact count profile: breakpoints sit at ``xi_n - lo/N`` and ``xi_n - hi/N`` (mod 1)."""
    boxes = [as_intervals(b) for b in boxes]
    _require_n(seq, 1, "count_profile")
    pts = seq.sorted_points()
    n = pts.size
    starts, ends = [], []
    for box in boxes:
        s_j, e_j = [], []
        for lo, hi in box.pieces():
            s_j.append(np.mod(pts - hi / n, 1.0))
            e_j.append(np.mod(pts - lo / n, 1.0))
        starts.append(np.sort(np.concatenate(s_j)))
        ends.append(np.sort(np.concatenate(e_j)))
    edges = np.sort(np.concatenate(starts + ends))
    edges = np.clip(edges, 0.0, 1.0)
    bounds = np.concatenate([[0.0], edges, [1.0]])
    lengths = np.diff(bounds)
    longest = int(np.argmax(lengths))
    probe = np.array([(bounds[longest] + bounds[longest + 1]) / 2])
    counts = np.empty((len(boxes), lengths.size), dtype=np.int64)
    for j, box in enumerate(boxes):
        running = np.empty(lengths.size, dtype=np.int64)
        running[0] = 0
        running[1:] = (np.searchsorted(starts[j], edges, side="right")
                       - np.searchsorted(ends[j], edges, side="right"))
        # fix the additive constant by evaluating the true count on the longest segment
        c0 = int(window_counts(pts, probe, box)[0]) - int(running[longest])
        counts[j] = running + c0
    return CountProfile(lengths, counts)


# ---------------------------------------------------------------------------
# pair correlation


def _support_radius(f) -> float:
    lo, hi = f.support
    return max(abs(lo), abs(hi))


def scaled_differences(seq: TorusSequence, radius: float) -> np.ndarray:
    """Scaled forward gaps ``N d`` over unordered circular pairs with ``N d <= radius``.

    Each unordered pair is reported once, through its shorter forward
    distance; ``radius < N/2`` guarantees there is no ambiguity.
    """
    n = seq.n_count
    if not radius < n / 2:
        raise ValueError(f"radius {radius} must be < N/2 = {n / 2}")
    s = seq.sorted_points()
    out = []
    limit = radius / n + _SLACK
    for k in range(1, n):
        d = np.roll(s, -k) - s
        d[n - k:] += 1.0
        hit = d <= limit
        if not hit.any():
            break
        out.append(n * d[hit])
    return np.concatenate(out) if out else np.empty(0)


def pair_correlation_naive(seq: TorusSequence, f) -> float:
    """Direct double sum over ordered pairs ``n1 != n2``; the O(N^2) oracle."""
    n = seq.n_count
    _require_n(seq, 2, "pair_correlation")
    lo, hi = f.support
    p = seq.points
    delta = p[:, None] - p[None, :]
    off = ~np.eye(n, dtype=bool)
    delta = delta[off]
    total = 0.0
    for m in range(math.floor(lo / n) - 1, math.ceil(hi / n) + 2):
        total += float(np.sum(f(n * (delta + m))))
    return total / n


def pair_correlation(seq: TorusSequence, f, method: str = "auto") -> float:
    """``R^2_N(f) = (1/N) sum_{n1 != n2, m} f(N (xi_n1 - xi_n2 + m))``.

    The sorted-scan path visits only pairs within the support of ``f`` and
    runs in ``O(N log N + output)``; ``method="naive"`` forces the double
    loop (used as the oracle for ``N <= 2000``).
    """
    _require_n(seq, 2, "pair_correlation")
    n = seq.n_count
    radius = _support_radius(f)
    if method == "naive" or (method == "auto" and not radius < n / 2):
        return pair_correlation_naive(seq, f)
    if method not in ("auto", "fast"):
        raise ValueError(f"unknown method {method!r}")
    d = scaled_differences(seq, radius)
    return float(np.sum(f(d)) + np.sum(f(-d))) / n


def pair_correlation_histogram(seq: TorusSequence, bin_edges) -> HistogramReport:
    """Pair-correlation density on bins: ``R^2_N(1_[a,b)) / (b - a)``, overlaid with 1."""
    _require_n(seq, 2, "pair_correlation")
    edges = np.asarray(bin_edges, dtype=float)
    n = seq.n_count
    radius = float(np.max(np.abs(edges)))
    d = scaled_differences(seq, radius)
    counts = np.zeros(edges.size - 1)
    for vals in (d, -d):
        idx = np.searchsorted(edges, vals, side="right") - 1
        ok = (idx >= 0) & (idx < edges.size - 1)
        counts += np.bincount(idx[ok], minlength=edges.size - 1)
    density = counts / n / np.diff(edges)
    return HistogramReport(edges, density, "density", overlay=np.ones_like(density),
                           meta={"statistic": "pair_correlation", "n_count": n})


def lemma1_check(seq: TorusSequence, f1: TestFunction, f2: TestFunction,
                 x_grid_size: int = DEFAULT_GRID, method: str = "exact") -> tuple[float, float]:
    """Both sides of the pair-correlation/second-moment identity.

    ``lhs = R^2_N(f1 *' f2)`` with the convolution evaluated exactly;
    ``rhs = int X_N(x,f1) X_N(x,f2) dx - int X_N(x, f1 f2) dx``.  With
    ``method="exact"`` the x-integrals are computed piece by piece between
    the breakpoints of the integrand (exact up to round-off); with
    ``method="grid"`` by the midpoint rule.
    """
    n = seq.n_count
    _require_n(seq, 2, "lemma1_check")
    conv = correlation_convolution(f1, f2)
    width = max(f1.support[1], f2.support[1]) - min(f1.support[0], f2.support[0])
    if not (width < n and _support_radius(conv) < n / 2):
        raise ValueError(f"N = {n} too small for the supports of f1 and f2 (need width {width:g} < N "
                         f"and convolution radius {_support_radius(conv):g} < N/2)")
    lhs = pair_correlation(seq, conv, method="fast")

    pts = seq.sorted_points()
    f12 = product(f1, f2)

    def x1(xs):
        return smooth_values(pts, xs, f1, f1.support)

    def x2(xs):
        return smooth_values(pts, xs, f2, f2.support)

    def x12(xs):
        return smooth_values(pts, xs, f12, f12.support)

    if method == "grid":
        xs = x_grid(x_grid_size)
        rhs = float(np.mean(x1(xs) * x2(xs)) - np.mean(x12(xs)))
        return lhs, rhs
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    edges = _x_breakpoints(pts, np.union1d(f1.knots, f2.knots))
    second = simpson_pieces(lambda xs: x1(xs) * x2(xs), edges)
    diag = simpson_pieces(x12, edges)
    return lhs, second - diag


def _x_breakpoints(sorted_pts: np.ndarray, knots: np.ndarray) -> np.ndarray:
    n = sorted_pts.size
    bp = np.mod(np.subtract.outer(sorted_pts, knots / n).ravel(), 1.0)
    return np.unique(np.concatenate([[0.0, 1.0], np.clip(bp, 0.0, 1.0)]))


# ---------------------------------------------------------------------------
# gaps and neighbors


def _neighbor_spacings(seq: TorusSequence, k: int) -> np.ndarray:
    n = seq.n_count
    s = seq.sorted_points()
    d = np.roll(s, -k) - s
    d[n - k:] += 1.0
    return n * d


def k_neighbor_distribution(seq: TorusSequence, k: int, a_grid) -> HistogramReport:
    """Fraction of ``n`` with ``xi'_{n+k} - xi'_n < a/N`` (circular continuation)."""
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k >= seq.n_count:
        raise ValueError(f"k = {k} must be < N = {seq.n_count}")
    a = np.asarray(a_grid, dtype=float)
    spacings = np.sort(_neighbor_spacings(seq, k))
    cdf = np.searchsorted(spacings, a, side="left") / seq.n_count
    overlay = laws.poisson_k_neighbor_cdf(np.maximum(a, 0.0), k)
    return HistogramReport(a, cdf, "cdf", overlay=overlay,
                           meta={"statistic": "k_neighbor", "k": k, "n_count": seq.n_count})


def gap_distribution(seq: TorusSequence, a_grid) -> HistogramReport:
    """Empirical gap CDF, including the circular gap ``1 + xi'_1 - xi'_N``."""
    _require_n(seq, 2, "gap_distribution")
    report = k_neighbor_distribution(seq, 1, a_grid)
    report.meta["statistic"] = "gap"
    return report


def gap_histogram(seq: TorusSequence, bin_edges) -> HistogramReport:
    """Density histogram of scaled gaps ``N (xi'_{n+1} - xi'_n)``, overlaid with bin-averaged ``e^{-a}``."""
    _require_n(seq, 2, "gap_histogram")
    edges = np.asarray(bin_edges, dtype=float)
    g = _neighbor_spacings(seq, 1)
    counts, _ = np.histogram(g, bins=edges)
    widths = np.diff(edges)
    density = counts / seq.n_count / widths
    lo, hi = np.maximum(edges[:-1], 0.0), np.maximum(edges[1:], 0.0)
    overlay = (np.exp(-lo) - np.exp(-hi)) / widths
    outside = 1.0 - counts.sum() / seq.n_count
    return HistogramReport(edges, density, "density", overlay=overlay, out_of_range=float(outside),
                           meta={"statistic": "gap_pdf", "n_count": seq.n_count})


# ---------------------------------------------------------------------------
# moments and counting distributions


def _check_moment_args(boxes, s):
    boxes = [as_intervals(b) for b in boxes]
    s = [float(v) for v in s]
    if not boxes or len(boxes) != len(s):
        raise ValueError("boxes and exponents must be nonempty lists of equal length")
    if any(v < 0 for v in s):
        raise ValueError("exponents must be nonnegative")
    return boxes, s


def _grid_counts(seq: TorusSequence, boxes, x_grid_size: int) -> np.ndarray:
    pts = seq.sorted_points()
    xs = x_grid(x_grid_size)
    return np.stack([window_counts(pts, xs, b) for b in boxes])


def _grid_integral(counts: np.ndarray, s, cap=None) -> float:
    integrand = np.ones(counts.shape[1])
    for j, sj in enumerate(s):
        integrand *= np.power(counts[j].astype(float), sj)
    if cap is not None:
        integrand = np.where(counts.max(axis=0) <= cap, integrand, 0.0)
    return float(np.mean(integrand))


def moments(seq: TorusSequence, boxes, s, x_grid_size: int = DEFAULT_GRID, method: str = "grid") -> float:
    """Mixed moment ``int prod_j X_N(x, I_j)^{s_j} dx`` (with ``0^0 = 1``)."""
    boxes, s = _check_moment_args(boxes, s)
    if method == "exact":
        return count_profile(seq, boxes).integrate(s)
    if method != "grid":
        raise ValueError(f"unknown method {method!r}")
    return _grid_integral(_grid_counts(seq, boxes, x_grid_size), s)


def restricted_moments(seq: TorusSequence, boxes, s, cap: int, x_grid_size: int = DEFAULT_GRID,
                       method: str = "grid") -> float:
    """As :func:`moments`, integrating only where ``max_j X_N(x, I_j) <= cap``."""
    boxes, s = _check_moment_args(boxes, s)
    cap = int(cap)
    if cap < 0:
        raise ValueError("cap must be >= 0")
    if method == "exact":
        return count_profile(seq, boxes).integrate(s, cap=cap)
    if method != "grid":
        raise ValueError(f"unknown method {method!r}")
    return _grid_integral(_grid_counts(seq, boxes, x_grid_size), s, cap=cap)


def empirical_counting_distribution(seq: TorusSequence, boxes, x_grid_size: int = DEFAULT_GRID,
                                    method: str = "grid") -> dict[tuple[int, ...], float]:
    """Joint law of ``(X_N(x, I_1), ..., X_N(x, I_m))`` for Lebesgue-random ``x``."""
    boxes = [as_intervals(b) for b in boxes]
    if not boxes:
        raise ValueError("need at least one box")
    if method == "exact":
        return count_profile(seq, boxes).distribution()
    if method != "grid":
        raise ValueError(f"unknown method {method!r}")
    if x_grid_size < 1000:
        raise ValueError("x_grid_size must be >= 1000")
    counts = _grid_counts(seq, boxes, x_grid_size)
    return _distribution(counts, np.full(counts.shape[1], 1.0 / counts.shape[1]))


def gap_law_from_counting(a_grid, void_probabilities) -> np.ndarray:
    """Gap CDF estimate ``1 + d/dA X(0, [0, A])`` by second-order finite differences."""
    a = np.asarray(a_grid, dtype=float)
    p = np.asarray(void_probabilities, dtype=float)
    if a.ndim != 1 or a.size < 3:
        raise ValueError("need at least 3 grid points")
    if a.shape != p.shape:
        raise ValueError("grid and values must have equal length")
    if np.any(np.diff(a) <= 0):
        raise ValueError("A-grid must be strictly increasing")
    return 1.0 + np.gradient(p, a, edge_order=2)


def uniformity_check(seq: TorusSequence, intervals) -> list[tuple[float, float]]:
    """Per interval ``[a, b)``: visit frequency and its deviation from ``b - a``."""
    _require_n(seq, 1, "uniformity_check")
    iv = as_intervals(intervals)
    p = seq.points
    out = []
    for a, b in iv.intervals:
        freq = float(np.count_nonzero((p >= a) & (p < b))) / seq.n_count
        out.append((freq, abs(freq - (b - a))))
    return out
