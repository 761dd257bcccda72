"""The group SL(2,R) x| R^2 acting on row vectors, and counting in its orbits.

Elements are pairs ``(M, xi)`` with ``(M, xi)(M', xi') = (M M', xi M' + xi')``
acting by ``x -> x M + xi``.  ``Z^2 g`` is then the affine lattice
``(Z^2 + xi_0) M`` of the decomposition ``g = (1, xi_0)(M, 0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .functions import IntervalSet, TestFunction, as_intervals
from .sequences import AffineLatticeSpec, ResourceLimitError, TorusSequence, gen_directions, gen_sqrt
from .statistics import count_stat

__all__ = [
    "AffineGroupElement",
    "IwasawaCoords",
    "TriangleRegion",
    "Disc",
    "Box",
    "n_mat",
    "a_mat",
    "k_mat",
    "phi_mat",
    "n_tilde",
    "compose",
    "inverse",
    "apply_point",
    "iwasawa",
    "recompose",
    "affine_iwasawa",
    "from_iwasawa",
    "coordinate_action",
    "random_sl2",
    "lattice_count",
    "lattice_count_bruteforce",
    "BoundCheck",
    "cone_bound_check",
    "sqrt_bound_check",
    "CuspCheck",
    "cusp_bound_check",
    "BoundingValue",
    "coset_representatives",
    "bounding_function",
    "dominance_test_function",
    "horocycle_mass_experiment",
]

DET_TOL = 1e-10
IWASAWA_DET_TOL = 1e-8
DEFAULT_T0 = 100.0
DEFAULT_VARTHETA = 1e-3
DEFAULT_COUNT_CAP = 100_000_000


def _det(m: np.ndarray) -> float:
    return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def _inv(m: np.ndarray) -> np.ndarray:
    # det-1 inverse, exact up to rounding of the entries
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=float)


@dataclass(frozen=True, eq=False)
class AffineGroupElement:
    m: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float).reshape(2, 2)
        xi = np.array(self.xi, dtype=float).reshape(2)
        if not np.all(np.isfinite(m)) or not np.all(np.isfinite(xi)):
            raise ValueError("group element entries must be finite")
        if abs(_det(m) - 1.0) > DET_TOL:
            raise ValueError(f"matrix must have determinant 1 (got {_det(m)!r})")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "xi", xi)

    @classmethod
    def identity(cls) -> "AffineGroupElement":
        return cls(np.eye(2), np.zeros(2))

    @classmethod
    def matrix(cls, m) -> "AffineGroupElement":
        return cls(m, np.zeros(2))

    @classmethod
    def translation(cls, xi) -> "AffineGroupElement":
        return cls(np.eye(2), xi)

    def __matmul__(self, other: "AffineGroupElement") -> "AffineGroupElement":
        return compose(self, other)

    def __repr__(self):
        return f"AffineGroupElement(m={self.m.tolist()}, xi={self.xi.tolist()})"


def compose(g: AffineGroupElement, h: AffineGroupElement) -> AffineGroupElement:
    return AffineGroupElement(g.m @ h.m, g.xi @ h.m + h.xi)


def inverse(g: AffineGroupElement) -> AffineGroupElement:
    mi = _inv(g.m)
    return AffineGroupElement(mi, -g.xi @ mi)


def apply_point(x, g: AffineGroupElement) -> np.ndarray:
    """``x M + xi`` for a point or an ``(n, 2)`` array of points."""
    return np.asarray(x, dtype=float) @ g.m + g.xi


def n_mat(u: float) -> np.ndarray:
    return np.array([[1.0, u], [0.0, 1.0]])


def a_mat(v: float) -> np.ndarray:
    if not v > 0:
        raise ValueError("v must be positive")
    return np.array([[math.sqrt(v), 0.0], [0.0, 1.0 / math.sqrt(v)]])


def k_mat(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s], [s, c]])


def phi_mat(t: float) -> np.ndarray:
    return np.array([[math.exp(-t / 2), 0.0], [0.0, math.exp(t / 2)]])


def n_tilde(u: float) -> AffineGroupElement:
    """The one-parameter subgroup ``u -> (n(u), (u/2, u^2/4))``."""
    return AffineGroupElement(n_mat(u), (u / 2, u * u / 4))


@dataclass(frozen=True)
class IwasawaCoords:
    u: float
    v: float
    phi: float
    xi: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.v > 0:
            raise ValueError("v must be positive")
        object.__setattr__(self, "xi", tuple(float(c) for c in self.xi))

    @property
    def tau(self) -> complex:
        return complex(self.u, self.v)


def iwasawa(m) -> IwasawaCoords:
    """Unique ``(u, v, phi)`` with ``m = n(u) a(v) k(phi)``, ``phi`` in ``[0, 2 pi)``.

    The bottom row of ``m`` is ``v^{-1/2} (sin phi, cos phi)``, which fixes
    ``v`` and ``phi``; ``u`` is read off ``m k(phi)^{-1} = n(u) a(v)``.
    """
    m = np.asarray(m, dtype=float).reshape(2, 2)
    if abs(_det(m) - 1.0) > IWASAWA_DET_TOL:
        raise ValueError(f"matrix must have determinant 1 (got {_det(m)!r})")
    c, d = m[1]
    r2 = c * c + d * d
    v = 1.0 / r2
    phi = math.atan2(c, d) % (2 * math.pi)
    if phi >= 2 * math.pi:
        phi = 0.0
    # (a, b).(c, d) = u / v for m = n(u) a(v) k(phi)
    a, b = m[0]
    u = (a * c + b * d) / r2
    return IwasawaCoords(float(u), float(v), phi)


def recompose(coords: IwasawaCoords) -> np.ndarray:
    return n_mat(coords.u) @ a_mat(coords.v) @ k_mat(coords.phi)


def affine_iwasawa(g: AffineGroupElement) -> IwasawaCoords:
    """Coordinates ``(tau, phi; xi)`` with ``g = (1, xi) n(u) a(v) k(phi)``."""
    c = iwasawa(g.m)
    xi = g.xi @ _inv(g.m)
    return IwasawaCoords(c.u, c.v, c.phi, (xi[0], xi[1]))


def from_iwasawa(coords: IwasawaCoords) -> AffineGroupElement:
    m = recompose(coords)
    return AffineGroupElement(m, np.asarray(coords.xi) @ m)


def coordinate_action(g: AffineGroupElement, coords: IwasawaCoords) -> IwasawaCoords:
    """Left multiplication by ``g = (1, m)(gamma, 0)`` in Iwasawa coordinates.

    ``tau -> gamma tau``, ``phi -> phi + arg(c tau + d)`` and
    ``xi -> xi gamma^{-1} + m``.
    """
    (a, b), (c, d) = g.m
    m_vec = g.xi @ _inv(g.m)  # g = (1, m)(gamma, 0)
    tau = coords.tau
    den = c * tau + d
    if den == 0:
        raise ValueError("c tau + d vanishes")
    tau_g = (a * tau + b) / den
    phi_g = (coords.phi + math.atan2(den.imag, den.real)) % (2 * math.pi)
    x1, x2 = coords.xi
    xi_g = (d * x1 - c * x2 + m_vec[0], -b * x1 + a * x2 + m_vec[1])
    return IwasawaCoords(tau_g.real, tau_g.imag, phi_g, xi_g)


def random_sl2(rng: np.random.Generator, u_scale: float = 2.0, log_v_scale: float = math.log(4.0)) -> np.ndarray:
    """Random det-1 matrix ``n(u) a(v) k(phi)`` with moderate entries."""
    u = rng.uniform(-u_scale, u_scale)
    v = math.exp(rng.uniform(-log_v_scale, log_v_scale))
    return recompose(IwasawaCoords(u, v, rng.uniform(0, 2 * math.pi)))


# ---------------------------------------------------------------- regions


class Region(Protocol):
    def contains(self, pts: np.ndarray) -> np.ndarray: ...
    def bbox(self) -> tuple[float, float, float, float]: ...
    def line_interval(self, p0: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]: ...
    def radius(self) -> float: ...


def _halfplane_interval(cons, p0: np.ndarray, d: np.ndarray):
    """Parameter range of ``p0 + t d`` inside ``{p : a.p + b >= 0 for (a, b) in cons}``."""
    lo = np.full(p0.shape[0], -np.inf)
    hi = np.full(p0.shape[0], np.inf)
    for a, b in cons:
        s = a[0] * p0[:, 0] + a[1] * p0[:, 1] + b
        rate = a[0] * d[0] + a[1] * d[1]
        if rate > 0:
            lo = np.maximum(lo, -s / rate)
        elif rate < 0:
            hi = np.minimum(hi, -s / rate)
        else:
            scale = 1.0 + np.abs(s)
            hi = np.where(s < -1e-9 * scale, -np.inf, hi)
    return lo, hi


@dataclass(frozen=True)
class TriangleRegion:
    """``{(x, y) : 0 < x < x_max, y in 2 x [lo, hi]}`` with ``x_max`` 1 or 2."""

    lo: float
    hi: float
    variant: str = "directions"

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("triangle interval needs lo < hi")
        if self.variant not in ("directions", "sqrt"):
            raise ValueError("variant must be 'directions' or 'sqrt'")

    @classmethod
    def of(cls, iv, variant: str = "directions") -> "TriangleRegion":
        iv = as_intervals(iv)
        if len(iv.pieces()) != 1:
            raise ValueError("a triangle needs a single interval")
        return cls(iv.lo, iv.hi, variant)

    @property
    def x_max(self) -> float:
        return 1.0 if self.variant == "directions" else 2.0

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        x, y = pts[:, 0], pts[:, 1]
        return (x > 0) & (x < self.x_max) & (y >= 2 * x * self.lo) & (y <= 2 * x * self.hi)

    def _cons(self):
        return [((1.0, 0.0), 0.0), ((-1.0, 0.0), self.x_max),
                ((-2 * self.lo, 1.0), 0.0), ((2 * self.hi, -1.0), 0.0)]

    def line_interval(self, p0, d):
        return _halfplane_interval(self._cons(), p0, d)

    def bbox(self):
        ys = [0.0, 2 * self.x_max * self.lo, 2 * self.x_max * self.hi]
        return 0.0, self.x_max, min(ys), max(ys)

    def radius(self) -> float:
        return self.x_max * math.hypot(1.0, 2 * max(abs(self.lo), abs(self.hi)))


@dataclass(frozen=True)
class Disc:
    """Closed disc."""

    radius_: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.radius_ > 0:
            raise ValueError("radius must be positive")

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        dx, dy = pts[:, 0] - self.center[0], pts[:, 1] - self.center[1]
        return dx * dx + dy * dy <= self.radius_ ** 2

    def line_interval(self, p0, d):
        q = p0 - np.asarray(self.center)
        aa = d[0] ** 2 + d[1] ** 2
        bb = q[:, 0] * d[0] + q[:, 1] * d[1]
        cc = q[:, 0] ** 2 + q[:, 1] ** 2 - self.radius_ ** 2
        disc = bb * bb - aa * cc
        root = np.sqrt(np.maximum(disc, 0.0))
        lo = np.where(disc >= 0, (-bb - root) / aa, np.inf)
        hi = np.where(disc >= 0, (-bb + root) / aa, -np.inf)
        return lo, hi

    def bbox(self):
        cx, cy = self.center
        r = self.radius_
        return cx - r, cx + r, cy - r, cy + r

    def radius(self) -> float:
        return math.hypot(*self.center) + self.radius_


@dataclass(frozen=True)
class Box:
    """Closed axis-parallel rectangle."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x0 <= self.x1 and self.y0 <= self.y1):
            raise ValueError("box needs x0 <= x1 and y0 <= y1")

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        x, y = pts[:, 0], pts[:, 1]
        return (x >= self.x0) & (x <= self.x1) & (y >= self.y0) & (y <= self.y1)

    def line_interval(self, p0, d):
        cons = [((1.0, 0.0), -self.x0), ((-1.0, 0.0), self.x1), ((0.0, 1.0), -self.y0), ((0.0, -1.0), self.y1)]
        return _halfplane_interval(cons, p0, d)

    def bbox(self):
        return self.x0, self.x1, self.y0, self.y1

    def radius(self) -> float:
        return max(math.hypot(x, y) for x in (self.x0, self.x1) for y in (self.y0, self.y1))


# ---------------------------------------------------------------- counting


def _preimage_ranges(g: AffineGroupElement, region: Region, margin: int = 1):
    x0, x1, y0, y1 = region.bbox()
    corners = np.array([[x0, y0], [x0, y1], [x1, y0], [x1, y1]])
    pre = (corners - g.xi) @ _inv(g.m)
    lo = np.floor(pre.min(axis=0)).astype(np.int64) - margin
    hi = np.ceil(pre.max(axis=0)).astype(np.int64) + margin
    return lo, hi


def lattice_count(g: AffineGroupElement, region: Region, cap: int = DEFAULT_COUNT_CAP) -> int:
    """``#{m in Z^2 : m M + xi in S}`` for ``g = (M, xi)`` and a convex region ``S``.

    The outer index runs over the preimage bounding box; for each value the
    inner index set is an interval found by intersecting a line with ``S``,
    padded by one and filtered with the exact membership test.
    """
    lo, hi = _preimage_ranges(g, region)
    outer = 0 if hi[0] - lo[0] <= hi[1] - lo[1] else 1
    inner = 1 - outer
    rows = np.arange(lo[outer], hi[outer] + 1)
    if rows.size > cap:
        raise ResourceLimitError(f"lattice_count: {rows.size} rows exceeds cap {cap}")
    p0 = rows[:, None] * g.m[outer][None, :] + g.xi
    t_lo, t_hi = region.line_interval(p0, g.m[inner])
    ok = t_lo <= t_hi
    rows, t_lo, t_hi = rows[ok], t_lo[ok], t_hi[ok]
    if rows.size == 0:
        return 0
    start = np.floor(t_lo).astype(np.int64) - 1
    stop = np.ceil(t_hi).astype(np.int64) + 1
    sizes = stop - start + 1
    total = int(sizes.sum())
    if total > cap:
        raise ResourceLimitError(f"lattice_count: {total} candidates exceeds cap {cap}")
    row_idx = np.repeat(rows, sizes)
    offsets = np.arange(total) - np.repeat(np.cumsum(sizes) - sizes, sizes)
    col_idx = np.repeat(start, sizes) + offsets
    m = np.empty((total, 2))
    m[:, outer] = row_idx
    m[:, inner] = col_idx
    return int(np.count_nonzero(region.contains(apply_point(m, g))))


def lattice_count_bruteforce(g: AffineGroupElement, region: Region, cap: int = 10_000_000) -> int:
    """Oracle: test every integer point of a padded preimage box."""
    lo, hi = _preimage_ranges(g, region, margin=2)
    size = int(np.prod(hi - lo + 1))
    if size > cap:
        raise ResourceLimitError(f"brute force box of {size} points exceeds cap {cap}")
    m1, m2 = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1), indexing="ij")
    m = np.column_stack([m1.ravel(), m2.ravel()]).astype(float)
    return int(np.count_nonzero(region.contains(apply_point(m, g))))


# ---------------------------------------------------------------- bound checks


@dataclass
class BoundCheck:
    lhs: int
    rhs: int
    holds: bool
    zero_window: bool | None = None  # inside the window where the count must vanish
    zero_holds: bool | None = None


def _single_interval(iv) -> IntervalSet:
    iv = as_intervals(iv)
    if len(iv.pieces()) != 1:
        raise ValueError("bound checks need a single interval")
    return iv


def cone_bound_check(spec: AffineLatticeSpec, x: float, iv, t: float,
                     vartheta: float = DEFAULT_VARTHETA, t0: float = DEFAULT_T0,
                     seq: TorusSequence | None = None) -> BoundCheck:
    """Compare the direction count near ``x`` with a lattice count in a triangle.

    ``T = e^{t/2}``.  The left side counts directions of ``(Z^2 + xi) M0``
    in the disc of radius ``T``; the right side counts points of
    ``Z^2 (1, xi) M0 k(2 pi x) Phi^t`` in the triangle over ``I`` widened by
    ``vartheta``.  Pass ``seq`` to reuse a generated direction sequence.
    """
    iv = _single_interval(iv)
    if not vartheta > 0:
        raise ValueError("vartheta must be positive")
    big_t = math.exp(t / 2)
    if big_t < t0 * (1 - 1e-12):
        raise ValueError(f"T = {big_t:.6g} is below T0 = {t0:.6g}")
    if seq is None:
        seq = gen_directions(spec, big_t)
    lhs = count_stat(seq, x, iv)
    m = spec.m0 @ k_mat(2 * math.pi * x) @ phi_mat(t)
    g = AffineGroupElement(m, np.asarray(spec.xi, dtype=float) @ m)
    rhs = lattice_count(g, TriangleRegion(iv.lo - vartheta, iv.hi + vartheta, "directions"))
    return BoundCheck(lhs, rhs, lhs <= rhs)


def sqrt_bound_check(x: float, iv, t_max: int, t0: float = DEFAULT_T0,
                     seq: TorusSequence | None = None) -> BoundCheck:
    """Compare the count of ``sqrt(n) mod 1`` (``n <= t_max``) near ``x`` with two triangle counts.

    The right side is ``X(n~(2x) Phi^t, D) + X(n~(-2x) Phi^t, D)`` with
    ``e^{t/2} = sqrt(t_max)`` and ``D`` the wide triangle over ``-I``.
    For ``|x| <= t_max^{-1/2} / 3`` the left side must vanish.
    """
    iv = _single_interval(iv)
    if not -0.5 <= x <= 0.5:
        raise ValueError("x must lie in [-1/2, 1/2]")
    t_max = int(t_max)
    if t_max < t0:
        raise ValueError(f"T = {t_max} is below T0 = {t0:.6g}")
    if seq is None:
        seq = gen_sqrt(t_max)
    lhs = count_stat(seq, x, iv)
    t = math.log(t_max)
    tri = TriangleRegion(-iv.hi, -iv.lo, "sqrt")
    phi = AffineGroupElement.matrix(phi_mat(t))
    rhs = sum(lattice_count(compose(n_tilde(u), phi), tri) for u in (2 * x, -2 * x))
    in_window = abs(x) <= t_max ** -0.5 / 3
    return BoundCheck(lhs, rhs, lhs <= rhs, in_window, (lhs == 0) if in_window else None)


@dataclass
class CuspCheck:
    lhs: int
    rhs: float
    holds: bool
    count_factor: int
    r: float
    v: float
    s: float | None = None
    lhs_power: float | None = None
    rhs_power: float | None = None
    holds_power: bool | None = None


def cusp_bound_check(g: AffineGroupElement, region: Region, s: float | None = None) -> CuspCheck:
    """Check ``X(g, S) <= (2 r v^{1/2} + 1) #((Z + xi1) n [-r v^{-1/2}, r v^{-1/2}])``.

    Requires ``v >= 1``.  With ``s`` given, also checks the power form, which
    needs ``v > 4 r^2`` so that the cardinality factor is 0 or 1.
    """
    c = affine_iwasawa(g)
    r = float(region.radius())
    if c.v < 1:
        raise ValueError(f"precondition v >= 1 fails (v = {c.v:.6g})")
    if s is not None:
        if s < 0:
            raise ValueError("s must be nonnegative")
        if not c.v > 4 * r * r:
            raise ValueError(f"precondition v > 4 r^2 fails (v = {c.v:.6g}, r = {r:.6g})")
    half = r / math.sqrt(c.v)
    xi1 = c.xi[0]
    count = max(0, math.floor(half - xi1) - math.ceil(-half - xi1) + 1)
    lhs = lattice_count(g, region)
    factor = 2 * r * math.sqrt(c.v) + 1
    rhs = factor * count
    out = CuspCheck(lhs, rhs, lhs <= rhs, count, r, c.v)
    if s is not None:
        if count not in (0, 1):
            raise AssertionError(f"cardinality factor {count} outside {{0, 1}}")
        out.s = float(s)
        out.lhs_power = float(lhs) ** s
        out.rhs_power = factor ** s * count
        out.holds_power = out.lhs_power <= out.rhs_power
    return out


# ---------------------------------------------------------------- bounding function


def coset_representatives(tau: complex, r_cut: float) -> list[tuple[int, int]]:
    """All primitive ``(c, d)`` (both signs) with ``v / |c tau + d|^2 >= r_cut``.

    ``|c tau + d|^2 >= c^2 v^2`` bounds ``c``; for each ``c`` the admissible
    ``d`` form an interval, so the list is complete.
    """
    u, v = tau.real, tau.imag
    lim = v / r_cut
    out = []
    c_top = math.floor(math.sqrt(lim) / v + 1e-12)
    for c in range(-c_top, c_top + 1):
        rest = lim - (c * v) ** 2
        if rest < 0:
            continue
        w = math.sqrt(rest)
        for d in range(math.ceil(-c * u - w - 1e-12), math.floor(-c * u + w + 1e-12) + 1):
            if math.gcd(c, d) == 1 and abs(c * tau + d) ** 2 <= lim:
                out.append((c, d))
    return out


def _f_sum(f: TestFunction, x1: np.ndarray, sv: np.ndarray) -> np.ndarray:
    """``sum_m f((x1 + m) sv)`` elementwise."""
    lo, hi = f.support
    m_lo = np.ceil(lo / sv - x1)
    count = np.floor(hi / sv - x1) - m_lo + 1
    width = int(max(0, np.max(count, initial=0)))
    total = np.zeros_like(x1, dtype=float)
    for j in range(width):
        w = (x1 + m_lo + j) * sv
        total += np.where(j < count, f(w), 0.0)
    return total


@dataclass
class BoundingValue:
    value: float
    cosets: list[tuple[int, int]]
    truncated: bool = False


def bounding_function(coords: IwasawaCoords, f: TestFunction, r_cut: float, beta: float,
                      c_max: int | None = None) -> BoundingValue:
    """``F_{R, beta}(tau; xi)`` summed over the cosets with ``v_gamma >= R``.

    The cutoff makes the coset sum finite and the enumeration exact; ``c_max``
    (if given) must cover every surviving coset or a ``ValueError`` is raised.
    """
    if not r_cut >= 1:
        raise ValueError("R must be >= 1")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    cosets = coset_representatives(coords.tau, r_cut)
    if c_max is not None:
        if c_max < 1:
            raise ValueError("c_max must be >= 1")
        need = max((max(abs(c), abs(d)) for c, d in cosets), default=0)
        if need > c_max:
            raise ValueError(f"c_max = {c_max} is too small: a surviving coset needs {need}")
    x1, x2 = coords.xi
    total = 0.0
    for c, d in cosets:
        vg = coords.v / abs(c * coords.tau + d) ** 2
        term = _f_sum(f, np.array([d * x1 - c * x2]), np.array([math.sqrt(vg)]))[0]
        total += term * vg ** beta
    return BoundingValue(float(total), cosets)


def dominance_test_function(iv, s: float, variant: str = "sqrt") -> tuple[TestFunction, float]:
    """Plateau ``f`` and ``beta = s/2`` with ``X(g, triangle(I))^s <= F_{R, beta}(g)`` for ``v >= R``.

    Height ``(2r + 1)^s max(1, (2r)^s)`` on ``[-r, r]`` with unit shoulders,
    ``r`` the radius of the triangle.
    """
    tri = TriangleRegion.of(iv, variant)
    r = tri.radius()
    height = (2 * r + 1) ** s * max(1.0, (2 * r) ** s)
    f = TestFunction((-r - 1, -r, r, r + 1), (0.0, height, height, 0.0))
    return f, s / 2


def _bounding_on_horocycle(f: TestFunction, r_cut: float, beta: float, v: float,
                           us: np.ndarray, xis: np.ndarray, u_span: tuple[float, float]) -> np.ndarray:
    """Vectorized ``F_{R, beta}`` at ``tau = u + i v`` with per-point ``xi``."""
    lim = v / r_cut
    out = np.zeros_like(us)
    c_top = math.floor(math.sqrt(lim) / v + 1e-12)
    w_max = math.sqrt(lim)
    for c in range(-c_top, c_top + 1):
        d_lo = math.ceil(min(-c * u_span[0], -c * u_span[1]) - w_max - 1)
        d_hi = math.floor(max(-c * u_span[0], -c * u_span[1]) + w_max + 1)
        for d in range(d_lo, d_hi + 1):
            if math.gcd(c, d) != 1:
                continue
            den = (c * us + d) ** 2 + (c * v) ** 2
            vg = v / den
            keep = vg >= r_cut
            if not keep.any():
                continue
            x1 = d * xis[keep, 0] - c * xis[keep, 1]
            sv = np.sqrt(vg[keep])
            out[keep] += _f_sum(f, x1, sv) * vg[keep] ** beta
    return out


def horocycle_mass_experiment(xi, f: TestFunction, beta: float, r_cut: float, v: float,
                              variant: str = "linear", u_grid: int = 20_001,
                              h: TestFunction | None = None, m=None,
                              theta: float = 0.5, eta: float = 0.5) -> float:
    """Midpoint quadrature of ``F_{R, beta}`` along an expanding horocycle.

    ``linear``: ``int F((1, xi) M n(u) a(v)) h(u) du`` over the support of
    ``h`` (default: unit hat on ``[-1, 1]``).
    ``nonlinear``: ``int F(n~(u) a(v)) du`` over ``[-1, 1]``, minus
    ``(-theta v^eta, theta v^eta)`` when ``beta >= 1``; ``xi`` is ignored.
    """
    if not v > 0:
        raise ValueError("v must be positive")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if not r_cut >= 1:
        raise ValueError("R must be >= 1")
    u_grid = int(u_grid)
    if u_grid < 1:
        raise ValueError("u_grid must be positive")
    av = AffineGroupElement.matrix(a_mat(v))
    if variant == "linear":
        h = h if h is not None else TestFunction.hat()
        base = compose(AffineGroupElement.translation(xi),
                       AffineGroupElement.matrix(np.eye(2) if m is None else m))
        lo, hi = h.support
        pieces = [(lo, hi)]
        weight = h
        shift = lambda u: base.xi @ _inv(base.m)  # noqa: E731
        mats = lambda u: base.m @ n_mat(u) @ av.m  # noqa: E731
    elif variant == "nonlinear":
        if not 0 < theta < 1:
            raise ValueError("theta must lie in (0, 1)")
        if eta < 0:
            raise ValueError("eta must be nonnegative")
        if beta >= 1.5:
            raise ValueError("beta must be below 3/2")
        if beta > 1 and not eta < beta / (2 * (beta - 1)):
            raise ValueError("eta must be below beta / (2 (beta - 1))")
        cut = theta * v ** eta if beta >= 1 else 0.0
        pieces = [(-1.0, -cut), (cut, 1.0)] if cut > 0 else [(-1.0, 1.0)]
        weight = None
        shift = lambda u: np.array([u / 2, u * u / 4])  # noqa: E731
        mats = lambda u: n_mat(u) @ av.m  # noqa: E731
    else:
        raise ValueError("variant must be 'linear' or 'nonlinear'")

    total = 0.0
    span = sum(b - a for a, b in pieces if b > a)
    for a, b in pieces:
        if b <= a:
            continue
        k = max(1, round(u_grid * (b - a) / span))
        du = (b - a) / k
        us = a + (np.arange(k) + 0.5) * du
        taus = np.empty(k)
        vs = np.empty(k)
        xis = np.empty((k, 2))
        for i, u in enumerate(us):
            c = iwasawa(mats(u))
            taus[i], vs[i] = c.u, c.v
            xis[i] = shift(u)
        if np.ptp(vs) > 1e-9 * vs.max():
            vals = np.array([_bounding_on_horocycle(f, r_cut, beta, vs[i], taus[i:i + 1], xis[i:i + 1],
                                                    (taus[i], taus[i]))[0] for i in range(k)])
        else:
            vals = _bounding_on_horocycle(f, r_cut, beta, float(vs[0]), taus, xis, (taus.min(), taus.max()))
        w = weight(us) if weight is not None else 1.0
        total += float(np.sum(vals * w) * du)
    return total
