"""Generators for sequences modulo one.

Every generator returns a :class:`TorusSequence` whose ``meta`` dictionary
fully determines the points, so a sequence can be regenerated bit for bit
from its descriptor (see :func:`regenerate`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "TorusSequence",
    "AffineLatticeSpec",
    "ResourceLimitError",
    "frac",
    "gen_sqrt",
    "gen_arithmetic",
    "gen_iud",
    "gen_directions",
    "regenerate",
    "write_csv",
    "read_csv",
]

DEFAULT_MAX_CANDIDATES = 400_000_000
ARITHMETIC_KINDS = ("linear", "quadratic", "power", "doubling", "geometric")


class ResourceLimitError(RuntimeError):
    """Raised when an enumeration would exceed its configured candidate cap."""


def frac(x) -> np.ndarray:
    """Fractional part in ``[0, 1)``; guards the ``-tiny mod 1 == 1.0`` rounding case."""
    r = np.mod(np.asarray(x, dtype=float), 1.0)
    return np.where(r >= 1.0, 0.0, r)


@dataclass(frozen=True, eq=False)
class TorusSequence:
    points: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.ascontiguousarray(self.points, dtype=float)
        if p.ndim != 1:
            raise ValueError("points must be one-dimensional")
        if p.size and (np.any(p < 0.0) or np.any(p >= 1.0) or not np.all(np.isfinite(p))):
            raise ValueError("points must lie in [0, 1)")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    @property
    def n_count(self) -> int:
        return int(self.points.size)

    def __len__(self):
        return self.n_count

    def sorted_points(self) -> np.ndarray:
        return np.sort(self.points, kind="stable")


@dataclass(frozen=True, eq=False)
class AffineLatticeSpec:
    """The affine lattice ``(Z^2 + xi) m0`` with ``det m0 = 1``."""

    m0: np.ndarray = field(default_factory=lambda: np.eye(2))
    xi: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        m0 = np.array(self.m0, dtype=float).reshape(2, 2)
        xi = np.array(self.xi, dtype=float).reshape(2)
        if abs(np.linalg.det(m0) - 1.0) > 1e-12:
            raise ValueError(f"m0 must have determinant 1, got {np.linalg.det(m0)!r}")
        if not np.all(np.isfinite(xi)):
            raise ValueError("xi must be finite")
        object.__setattr__(self, "m0", m0)
        object.__setattr__(self, "xi", xi)

    def to_dict(self) -> dict:
        return {"m0": self.m0.tolist(), "xi": self.xi.tolist()}


# ---------------------------------------------------------------------------
# generators


def _isqrt_array(n: np.ndarray) -> np.ndarray:
    r = np.floor(np.sqrt(n.astype(float))).astype(np.int64)
    # exact integer correction of the float estimate
    r -= (r * r > n)
    r += ((r + 1) * (r + 1) <= n)
    return r


def gen_sqrt(t_max: int) -> TorusSequence:
    """``sqrt(n) mod 1`` for ``1 <= n <= t_max`` with perfect squares removed."""
    t_max = int(t_max)
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    n = np.arange(1, t_max + 1, dtype=np.int64)
    r = _isqrt_array(n)
    keep = r * r != n
    n = n[keep]
    pts = frac(np.sqrt(n.astype(float)))
    return TorusSequence(pts, {"kind": "sqrt", "t_max": t_max})


def gen_arithmetic(kind: str, alpha: float, beta: float = 0.0, n_max: int = 1) -> TorusSequence:
    """Classical uniformly distributed sequences, for ``n = 1..n_max``.

    ``linear``: n*alpha, ``quadratic``: n^2*alpha, ``power``: n^alpha log^beta n,
    ``doubling``: 2^n*alpha, ``geometric``: alpha^n, all reduced mod 1.

    Double precision limits the last two: ``2^n alpha`` loses one bit per
    step and ``alpha^n`` stops carrying fractional information once it
    exceeds ``2**53``.
    """
    if kind not in ARITHMETIC_KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {ARITHMETIC_KINDS}")
    alpha, beta, n_max = float(alpha), float(beta), int(n_max)
    if not (math.isfinite(alpha) and math.isfinite(beta)):
        raise ValueError("alpha and beta must be finite")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    n = np.arange(1, n_max + 1, dtype=float)
    if kind == "linear":
        vals = n * alpha
    elif kind == "quadratic":
        vals = n * n * alpha
    elif kind == "power":
        vals = np.power(n, alpha)
        if beta != 0.0:
            with np.errstate(divide="ignore"):
                vals = vals * np.power(np.log(n), beta)
            vals[0] = 0.0  # log 1 = 0
    elif kind == "doubling":
        vals = np.empty(n_max)
        x = float(frac(alpha))
        for i in range(n_max):
            x = float(frac(2.0 * x))
            vals[i] = x
    else:
        if alpha <= 1.0:
            raise ValueError("geometric kind requires alpha > 1")
        with np.errstate(over="ignore"):
            vals = np.power(alpha, n)
        vals = np.where(np.isfinite(vals), vals, 0.0)
    meta = {"kind": kind, "alpha": alpha, "beta": beta, "n_max": n_max}
    return TorusSequence(frac(vals), meta)


def gen_iud(n_count: int, seed: int) -> TorusSequence:
    """Independent uniform points from numpy's PCG64 bit generator.

    The stream for ``seed`` is ``Generator(PCG64(SeedSequence(seed)))``;
    independent sub-streams, when needed, come from ``SeedSequence.spawn``.
    """
    n_count = int(n_count)
    if n_count < 1:
        raise ValueError("n_count must be >= 1")
    seed = int(seed)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    return TorusSequence(rng.random(n_count), {"kind": "iud", "n_count": n_count, "seed": seed})


def _candidate_ranges(m0inv: np.ndarray, xi: np.ndarray, radius: float) -> list[tuple[int, int]]:
    # |(y m0^-1)_j| <= |y|_inf * (column-sum norm), also bounded by row sums; take the max.
    c = max(np.abs(m0inv).sum(axis=0).max(), np.abs(m0inv).sum(axis=1).max())
    ranges = []
    for j in range(2):
        lo = math.floor(-radius * c - xi[j]) - 1
        hi = math.ceil(radius * c - xi[j]) + 1
        ranges.append((lo, hi))
    return ranges


def gen_directions(spec: AffineLatticeSpec, t_radius: float,
                   max_candidates: int = DEFAULT_MAX_CANDIDATES) -> TorusSequence:
    """Directions, in turns, of the nonzero affine-lattice points in the open disc of radius ``t_radius``.

    Points are emitted in the order of the integer preimage ``(m1, m2)``
    (row-major), with multiplicity.
    """
    t_radius = float(t_radius)
    if not t_radius > 0:
        raise ValueError("t_radius must be positive")
    m0 = spec.m0
    xi = spec.xi
    (a1, b1), (a2, b2) = _candidate_ranges(np.linalg.inv(m0), xi, t_radius)
    n_cand = (b1 - a1 + 1) * (b2 - a2 + 1)
    if n_cand > max_candidates:
        raise ResourceLimitError(
            f"direction enumeration needs {n_cand} candidates (cap {max_candidates}); reduce t_radius")
    m2 = np.arange(a2, b2 + 1, dtype=float) + xi[1]
    r2max = t_radius * t_radius
    rows_per_chunk = max(1, 4_000_000 // m2.size)
    chunks = []
    for start in range(a1, b1 + 1, rows_per_chunk):
        m1 = np.arange(start, min(start + rows_per_chunk, b1 + 1), dtype=float) + xi[0]
        p1 = m1[:, None] * m0[0, 0] + m2[None, :] * m0[1, 0]
        p2 = m1[:, None] * m0[0, 1] + m2[None, :] * m0[1, 1]
        r2 = p1 * p1 + p2 * p2
        ok = (r2 < r2max) & (r2 > 0.0)
        chunks.append(np.arctan2(p2[ok], p1[ok]))
    angles = np.concatenate(chunks) if chunks else np.empty(0)
    pts = frac(angles / (2.0 * math.pi))
    meta = {"kind": "directions", "T": t_radius, **spec.to_dict()}
    return TorusSequence(pts, meta)


def regenerate(meta: dict) -> TorusSequence:
    """Rebuild a sequence from its generator descriptor."""
    kind = meta["kind"]
    if kind == "sqrt":
        return gen_sqrt(meta["t_max"])
    if kind == "iud":
        return gen_iud(meta["n_count"], meta["seed"])
    if kind == "directions":
        return gen_directions(AffineLatticeSpec(np.array(meta["m0"]), np.array(meta["xi"])), meta["T"])
    if kind in ARITHMETIC_KINDS:
        return gen_arithmetic(kind, meta["alpha"], meta.get("beta", 0.0), meta["n_max"])
    raise ValueError(f"cannot regenerate sequence of kind {kind!r}")


# ---------------------------------------------------------------------------
# CSV


def write_csv(seq: TorusSequence, path: str | Path, extra_meta: dict | None = None) -> Path:
    """One point per line with 17 significant digits, after a ``#``-prefixed JSON header."""
    path = Path(path)
    header = dict(seq.meta)
    header["n_count"] = seq.n_count
    if extra_meta:
        header.update(extra_meta)
    try:
        with path.open("w") as fh:
            fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
            np.savetxt(fh, seq.points, fmt="%.17g")
    except OSError as exc:
        raise OSError(f"cannot write sequence to {path}: {exc}") from exc
    return path


def read_csv(path: str | Path) -> TorusSequence:
    path = Path(path)
    try:
        fh = path.open()
    except OSError as exc:
        raise OSError(f"cannot read sequence file {path}: {exc}") from exc
    with fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValueError(f"{path}:1: missing '#' JSON header line")
        try:
            meta = json.loads(first[1:])
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}:1: malformed JSON header: {exc}") from exc
        values = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(float(line.split(",")[0]))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: expected a number, got {line!r}") from None
    pts = np.array(values, dtype=float)
    if "n_count" in meta and meta["n_count"] != pts.size:
        raise ValueError(f"{path}: header says n_count={meta['n_count']} but file has {pts.size} rows")
    if pts.size and (np.any(pts < 0) or np.any(pts >= 1)):
        bad = int(np.argmax((pts < 0) | (pts >= 1)))
        raise ValueError(f"{path}:{bad + 2}: point outside [0, 1)")
    return TorusSequence(pts, meta)
