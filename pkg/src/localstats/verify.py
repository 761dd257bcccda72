"""Numerical verification suites, one per acceptance criterion.

Each suite returns a :class:`SuiteResult` listing its checks with the
measured value and threshold, so failures are reported with numbers.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import diophantine as dio
from . import lattice_space as ls
from . import reference_laws as laws
from . import statistics as st
from .constants import parse_vector
from .functions import IntervalSet, TestFunction
from .sequences import AffineLatticeSpec, TorusSequence, gen_arithmetic, gen_directions, gen_iud, gen_sqrt

__all__ = ["Check", "SuiteResult", "SUITES", "run_suite", "random_test_function", "random_sequence"]


@dataclass
class Check:
    name: str
    value: float
    threshold: float | tuple[float, float]
    op: str  # "<=", ">=" or "in"
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        v = self.value
        if not math.isfinite(v):
            return False
        if self.op == "<=":
            return v <= self.threshold
        if self.op == ">=":
            return v >= self.threshold
        lo, hi = self.threshold
        return lo <= v <= hi

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if self.op == "in":
            bound = f"in [{self.threshold[0]:g}, {self.threshold[1]:g}]"
        else:
            bound = f"{self.op} {self.threshold:g}"
        return f"{status}  {self.name}: {self.value:.6g} {bound}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


@dataclass
class SuiteResult:
    name: str
    checks: list[Check]
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def report(self) -> str:
        head = f"[{'PASS' if self.passed else 'FAIL'}] {self.name} ({self.seconds:.1f} s)"
        return "\n".join([head] + ["  " + c.line() for c in self.checks])

    def to_dict(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "seconds": self.seconds,
                "checks": [c.to_dict() for c in self.checks]}


def _override(checks: list[Check], tolerance: float | None) -> list[Check]:
    # a tolerance override replaces every upper bound in the suite
    if tolerance is not None:
        for c in checks:
            if c.op == "<=":
                c.threshold = float(tolerance)
    return checks


def random_test_function(rng: np.random.Generator, reach: float = 3.0) -> TestFunction:
    """Random nonnegative piecewise-linear function with 2-4 interior knots inside ``[-reach, reach]``."""
    k = int(rng.integers(2, 5))
    knots = np.sort(rng.uniform(-reach, reach, k + 2))
    while np.min(np.diff(knots)) < 1e-3:
        knots = np.sort(rng.uniform(-reach, reach, k + 2))
    values = np.concatenate([[0.0], rng.uniform(0.2, 2.0, k), [0.0]])
    return TestFunction(tuple(knots), tuple(values))


def random_sequence(rng: np.random.Generator, n_lo: int, n_hi: int) -> TorusSequence:
    n = int(rng.integers(n_lo, n_hi + 1))
    kind = rng.choice(["iud", "sqrt", "linear", "power"])
    if kind == "iud":
        return gen_iud(n, int(rng.integers(0, 2**31)))
    if kind == "sqrt":
        # T - floor(sqrt T) = n has a solution for every n
        t = n + math.isqrt(n)
        while t - math.isqrt(t) < n:
            t += 1
        return gen_sqrt(t)
    if kind == "linear":
        return gen_arithmetic("linear", math.sqrt(2) + rng.uniform(0, 1), n_max=n)
    return gen_arithmetic("power", rng.uniform(0.3, 0.7), n_max=n)


# ---------------------------------------------------------------- suites


def suite_lemma1(seed: int = 0, tolerance: float | None = None) -> list[Check]:
    """Pair correlation of the correlation-convolution equals the second-moment difference."""
    rng = np.random.default_rng(seed)
    worst, t0 = 0.0, time.perf_counter()
    for _ in range(50):
        seq = random_sequence(rng, 100, 2000)
        f1, f2 = random_test_function(rng), random_test_function(rng)
        lhs, rhs = st.lemma1_check(seq, f1, f2, method="exact")
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    elapsed = time.perf_counter() - t0
    return _override([Check("max relative error over 50 triples", worst, 1e-8, "<="),
                      Check("runtime seconds", elapsed, 30.0, "<=")], tolerance)


def suite_first_moment(seed: int = 0, tolerance: float | None = None) -> list[Check]:
    """``int X_N(x, I) dx = |I|`` on the exact path."""
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for _ in range(20):
        seq = random_sequence(rng, 100, 20000)
        lo = rng.uniform(-3, 3)
        iv = IntervalSet.of(lo, lo + rng.uniform(0.01, 4))
        worst = max(worst, abs(st.moments(seq, [iv], [1], method="exact") - iv.length))
    return _override([Check("max |int X dx - |I|| over 20 pairs", worst, 1e-10, "<=")], tolerance)


def _gap_sup(seq: TorusSequence, a_grid: np.ndarray) -> float:
    return st.gap_distribution(seq, a_grid).sup_deviation()


A_GRID = np.linspace(0.0, 5.0, 2001)


def suite_poisson_baseline(seed: int = 11, tolerance: float | None = None) -> list[Check]:
    """Independent uniform points at ``N = 10^5`` against the Poisson laws."""
    seq = gen_iud(100_000, seed)
    gap = _gap_sup(seq, A_GRID)
    dist = st.empirical_counting_distribution(seq, [IntervalSet.of(0, 1)], method="exact")
    tv = laws.total_variation(dist, laws.PoissonLaw(1.0).table(60))
    pc = abs(st.pair_correlation(seq, TestFunction.hat()) - 1.0)
    checks = [Check("gap CDF sup distance to 1 - e^-a", gap, 0.02, "<="),
              Check("counting law TV distance to Poisson(1)", tv, 0.02, "<="),
              Check("|R2(unit hat) - 1|", pc, 0.03, "<=")]
    return _override(checks, tolerance)


def suite_cube_root_gaps(seed: int = 0, tolerance: float | None = None) -> list[Check]:
    """Gaps of ``n^{1/3} mod 1`` are close to exponential."""
    t0 = time.perf_counter()
    seq = gen_arithmetic("power", 1 / 3, n_max=200_000)
    d = _gap_sup(seq, A_GRID)
    elapsed = time.perf_counter() - t0
    return _override([Check("gap CDF sup distance to exponential", d, 0.03, "<="),
                      Check("runtime seconds", elapsed, 10.0, "<=")], tolerance)


def suite_sqrt_gaps(seed: int = 0, tolerance: float | None = None) -> list[Check]:
    """Gaps of ``sqrt(n) mod 1`` are not exponential, and stable in ``T``."""
    small, large = gen_sqrt(100_000), gen_sqrt(200_000)
    c_small = st.gap_distribution(small, A_GRID)
    c_large = st.gap_distribution(large, A_GRID)
    dev = c_large.sup_deviation()
    drift = laws.sup_distance(c_small.masses, c_large.masses)
    checks = [Check("gap CDF sup distance to exponential (T = 2e5)", dev, 0.05, ">="),
              Check("sup distance between T = 1e5 and T = 2e5 CDFs", drift, 0.02, "<=")]
    return _override(checks, tolerance)


def suite_second_moment(seed: int = 0, tolerance: float | None = None) -> list[Check]:
    """Second and mixed moments of ``sqrt(n) mod 1`` at ``T = 2 10^5``."""
    seq = gen_sqrt(200_000)
    i1, i2 = IntervalSet.of(0, 1), IntervalSet.of(0.5, 1.5)
    m2 = st.moments(seq, [i1], [2], method="exact")
    mixed = st.moments(seq, [i1, i2], [1, 1], method="exact")
    return [Check("int X(x, [0,1])^2 dx", m2, (1.9, 2.1), "in"),
            Check("int X(x, [0,1]) X(x, [0.5,1.5]) dx", mixed, (1.45, 1.55), "in")]


CUBIC_XI = "cbrt(4),cbrt(2)"


def suite_direction_pairs(seed: int = 0, tolerance: float | None = None) -> list[Check]:
    """Pair correlation of directions in ``Z^2 + (cbrt 4, cbrt 2)`` is flat."""
    t0 = time.perf_counter()
    seq = gen_directions(AffineLatticeSpec(np.eye(2), parse_vector(CUBIC_XI)), 1000.0)
    hist = st.pair_correlation_histogram(seq, np.linspace(0, 4, 17))
    dev = float(np.max(np.abs(hist.masses - 1.0)))
    elapsed = time.perf_counter() - t0
    return _override([Check("max |density - 1| over 16 bins", dev, 0.15, "<="),
                      Check("runtime seconds", elapsed, 60.0, "<=")], tolerance)


def third_moment(xi, t_radius: float, iv=(-0.5, 0.5)) -> float:
    seq = gen_directions(AffineLatticeSpec(np.eye(2), xi), t_radius)
    return st.moments(seq, [IntervalSet.of(*iv)], [3], method="exact")


def suite_divergence(seed: int = 0, tolerance: float | None = None) -> list[Check]:
    """Third moments of directions: growth for ``(sqrt 2, sqrt 2)``, stability for ``(cbrt 4, cbrt 2)``."""
    checks = []
    for label, xi, op, thr in (("(sqrt2, sqrt2)", parse_vector("sqrt(2),sqrt(2)"), ">=", 1.5),
                               ("(cbrt4, cbrt2)", parse_vector(CUBIC_XI), "<=", 1.1)):
        m500, m2000 = third_moment(xi, 500.0), third_moment(xi, 2000.0)
        checks.append(Check(f"M(2000, 3) / M(500, 3) for xi = {label}", m2000 / m500, thr, op,
                            {"M500": m500, "M2000": m2000}))
    return checks


def suite_inequalities(seed: int = 0, tolerance: float | None = None) -> list[Check]:
    """Randomized sweeps of the cone, square-root, cusp and dominance bounds (violation counts)."""
    rng = np.random.default_rng(seed + 9)
    t = 2 * math.log(50.0)
    cone = 0
    for _ in range(200):
        spec = AffineLatticeSpec(ls.random_sl2(rng, 1.0, math.log(2.0)), rng.uniform(0, 1, 2))
        lo = rng.uniform(-1, 0.5)
        iv = (lo, lo + rng.uniform(0.05, 1.0))
        cone += not ls.cone_bound_check(spec, rng.uniform(0, 1), iv, t, vartheta=0.05, t0=50.0).holds
    t_max = 10_000
    seq = gen_sqrt(t_max)
    sq = sum(not ls.sqrt_bound_check(x, (0, 1), t_max, seq=seq).holds for x in rng.uniform(-0.5, 0.5, 200))
    window = t_max ** -0.5 / 3
    zero = 0
    for x in np.linspace(-window, window, 101):
        lo = rng.uniform(-1, 0.5)
        zero += not ls.sqrt_bound_check(x, (lo, lo + rng.uniform(0.05, 1.0)), t_max, seq=seq).zero_holds
    cusp = 0
    for _ in range(200):
        c = ls.IwasawaCoords(rng.uniform(-2, 2), math.exp(rng.uniform(0, 5)), rng.uniform(0, 2 * math.pi),
                             tuple(rng.normal(size=2)))
        cusp += not ls.cusp_bound_check(ls.from_iwasawa(c), ls.Disc(rng.uniform(0.2, 3.0))).holds
    dom = 0
    for _ in range(200):
        lo = rng.uniform(-1, 0.5)
        iv = (lo, lo + rng.uniform(0.1, 1.0))
        s = rng.uniform(0, 3)
        f, beta = ls.dominance_test_function(iv, s)
        r_cut = rng.uniform(1, 50)
        c = ls.IwasawaCoords(rng.uniform(-1, 1), r_cut * math.exp(rng.uniform(0, 3)), rng.uniform(0, 2 * math.pi),
                             tuple(rng.uniform(-1, 1, 2)))
        x = ls.lattice_count(ls.from_iwasawa(c), ls.TriangleRegion.of(iv, "sqrt"))
        dom += x ** s > ls.bounding_function(c, f, r_cut, beta).value * (1 + 1e-12)
    return [Check("cone bound violations (200 configurations, T = 50)", cone, 0, "<="),
            Check("sqrt bound violations (200 x, T = 1e4)", sq, 0, "<="),
            Check("zero-window violations (101 x)", zero, 0, "<="),
            Check("cusp bound violations (200 g, v >= 1)", cusp, 0, "<="),
            Check("dominance violations (200 g, v >= R)", dom, 0, "<=")]


def suite_oracles(seed: int = 0, tolerance: float | None = None) -> list[Check]:
    """Fast paths against brute force."""
    rng = np.random.default_rng(seed + 10)
    worst_pc = 0.0
    for _ in range(100):
        seq = random_sequence(rng, 20, 400)
        f = random_test_function(rng, reach=min(3.0, seq.n_count / 2 - 1))
        fast = st.pair_correlation(seq, f, method="fast")
        naive = st.pair_correlation_naive(seq, f)
        worst_pc = max(worst_pc, abs(fast - naive) / max(abs(naive), 1e-300) if naive else abs(fast))
    worst_lc = 0.0
    for i in range(100):
        g = ls.AffineGroupElement(ls.random_sl2(rng), rng.normal(size=2) * 3)
        region = [ls.Disc(rng.uniform(0.5, 8.0), tuple(rng.normal(size=2))),
                  ls.TriangleRegion(*np.sort(rng.normal(size=2)), "directions" if i % 2 else "sqrt"),
                  ls.Box(-1.0, rng.uniform(0, 5), -2.0, rng.uniform(-1, 4))][i % 3]
        a, b = ls.lattice_count(g, region), ls.lattice_count_bruteforce(g, region)
        worst_lc = max(worst_lc, abs(a - b) / max(b, 1))
    return _override([Check("pair correlation fast vs naive, max relative error", worst_pc, 1e-10, "<="),
                      Check("lattice_count vs brute force, max relative error", worst_lc, 1e-10, "<=")], tolerance)


def suite_iwasawa(seed: int = 0, tolerance: float | None = None) -> list[Check]:
    rng = np.random.default_rng(seed + 11)
    worst = 0.0
    for _ in range(1000):
        m = ls.random_sl2(rng)
        worst = max(worst, float(np.max(np.abs(ls.recompose(ls.iwasawa(m)) - m))))
    return _override([Check("max-entry recomposition error (1000 matrices)", worst, 1e-12, "<=")], tolerance)


def suite_diophantine(seed: int = 0, tolerance: float | None = None) -> list[Check]:
    k_sqrt2 = dio.scalar_type_estimate(math.sqrt(2), 10_000).kappa_estimate
    k_cubic = dio.vector_type_estimate(parse_vector(CUBIC_XI), 200).kappa_estimate
    line = dio.rational_line_check(parse_vector("sqrt(2)+1/2,sqrt(2)+1"), 10)
    found = float(line.found and line.k == (2, -2) and line.c == -1 and line.meets_lattice is False)
    return [Check("kappa estimate for sqrt(2), k_max = 1e4", k_sqrt2, (0.95, 1.05), "in"),
            Check("kappa estimate for (cbrt4, cbrt2), k_max = 200", k_cubic, (1.8, 2.3), "in"),
            Check("finds 2x - 2y = -1 missing Z^2", found, 1.0, ">=", {"line": line.line()})]


SUITES: dict[str, Callable[..., list[Check]]] = {
    "lemma1": suite_lemma1,
    "first-moment": suite_first_moment,
    "poisson-baseline": suite_poisson_baseline,
    "cube-root-gaps": suite_cube_root_gaps,
    "sqrt-gaps": suite_sqrt_gaps,
    "second-moment": suite_second_moment,
    "direction-pairs": suite_direction_pairs,
    "divergence": suite_divergence,
    "inequalities": suite_inequalities,
    "oracles": suite_oracles,
    "iwasawa": suite_iwasawa,
    "diophantine": suite_diophantine,
}


def run_suite(name: str, seed: int | None = None, tolerance: float | None = None) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    kwargs = {"tolerance": tolerance}
    if seed is not None:
        kwargs["seed"] = seed
    t0 = time.perf_counter()
    checks = SUITES[name](**kwargs)
    return SuiteResult(name, checks, time.perf_counter() - t0)
