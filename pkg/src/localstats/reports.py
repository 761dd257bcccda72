"""Report containers and their CSV / gnuplot serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["HistogramReport", "CountField", "write_table"]

NORMALIZATIONS = ("probability", "density", "cdf")


def write_table(path: str | Path, columns: dict[str, np.ndarray], meta: dict, gnuplot: bool = False) -> Path:
    """Write columns as CSV (or whitespace-separated for gnuplot) under a ``#`` JSON header."""
    path = Path(path)
    names = list(columns)
    data = np.column_stack([np.asarray(columns[k], dtype=float) for k in names])
    sep = " " if gnuplot else ","
    try:
        with path.open("w") as fh:
            fh.write("# " + json.dumps(meta, sort_keys=True, default=_jsonable) + "\n")
            fh.write(("# " if gnuplot else "") + sep.join(names) + "\n")
            np.savetxt(fh, data, fmt="%.17g", delimiter=sep)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if hasattr(obj, "to_list"):
        return obj.to_list()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


@dataclass(eq=False)
class HistogramReport:
    """Binned (or CDF-sampled) empirical distribution with an optional reference overlay.

    For ``normalization == "cdf"`` the ``bin_edges`` are the sample points
    and ``masses[i]`` is the CDF at ``bin_edges[i]``.
    """

    bin_edges: np.ndarray
    masses: np.ndarray
    normalization: str
    overlay: np.ndarray | None = None
    meta: dict = field(default_factory=dict)
    out_of_range: float = 0.0

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=float)
        self.masses = np.asarray(self.masses, dtype=float)
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
        if np.any(np.diff(self.bin_edges) <= 0):
            raise ValueError("bin edges must be increasing")
        expected = self.bin_edges.size if self.normalization == "cdf" else self.bin_edges.size - 1
        if self.masses.size != expected:
            raise ValueError(f"expected {expected} masses, got {self.masses.size}")
        if np.any(self.masses < 0):
            raise ValueError("masses must be nonnegative")
        if self.normalization == "probability" and self.masses.sum() > 1 + 1e-12:
            raise ValueError("probability masses sum to more than 1")
        if self.overlay is not None:
            self.overlay = np.asarray(self.overlay, dtype=float)
            if self.overlay.shape != self.masses.shape:
                raise ValueError("overlay must match masses in shape")

    @property
    def centers(self) -> np.ndarray:
        if self.normalization == "cdf":
            return self.bin_edges
        return (self.bin_edges[:-1] + self.bin_edges[1:]) / 2

    def sup_deviation(self) -> float:
        if self.overlay is None:
            raise ValueError("no overlay to compare against")
        return float(np.max(np.abs(self.masses - self.overlay)))

    def columns(self) -> dict[str, np.ndarray]:
        if self.normalization == "cdf":
            cols = {"a": self.bin_edges, "cdf": self.masses}
        else:
            cols = {"lo": self.bin_edges[:-1], "hi": self.bin_edges[1:], self.normalization: self.masses}
        if self.overlay is not None:
            cols["reference"] = self.overlay
        return cols

    def write(self, path: str | Path, gnuplot: bool = False) -> Path:
        meta = {"normalization": self.normalization, "out_of_range": self.out_of_range, **self.meta}
        if gnuplot:
            cols = {"x": self.centers, "y": self.masses}
            if self.overlay is not None:
                cols["reference"] = self.overlay
            return write_table(path, cols, meta, gnuplot=True)
        return write_table(path, self.columns(), meta)


@dataclass(eq=False)
class CountField:
    """Values of a counting statistic on an x-grid."""

    x_grid: np.ndarray
    counts: np.ndarray
    n_count: int
    window: object = None

    def mean(self) -> float:
        return float(np.mean(self.counts))

    def write(self, path: str | Path, gnuplot: bool = False) -> Path:
        meta = {"n_count": self.n_count, "window": self.window}
        return write_table(path, {"x": self.x_grid, "count": self.counts}, meta, gnuplot=gnuplot)
