"""Terminal-value sample sets: grid snapping, cell counts, CSV ingestion."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IngestError
from .torus import TorusGrid


def snap_index(values, grid: TorusGrid) -> np.ndarray:
    """Nearest grid node for values in [lower, upper); half ties round down.

    A value exactly between two nodes is assigned the lower index (the
    wrap pair upper-most/0 counts the upper-most node as lower).
    """
    u = (np.asarray(values, dtype=float) - grid.lower) / grid.h
    return (np.ceil(u - 0.5).astype(int)) % grid.n


@dataclass
class SampleSet:
    """Samples on the torus together with their snapped grid cells.

    cell_counts[i] is the number of samples whose nearest node is x_i, so
    cell_counts.sum() == len(values).  `raw` optionally keeps the pre-wrap
    real-line values and `jump_counts` the per-path jump totals when the
    set came from a simulator.
    """

    values: np.ndarray
    snapped_index: np.ndarray
    cell_counts: np.ndarray
    grid: TorusGrid
    raw: np.ndarray | None = field(default=None, repr=False)
    jump_counts: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def from_values(cls, values, grid: TorusGrid, raw=None,
                    jump_counts=None) -> "SampleSet":
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("need a non-empty 1-d array of samples")
        if np.any(values < grid.lower) or np.any(values >= grid.upper):
            raise ValueError("samples must lie in [lower, upper); wrap first")
        idx = snap_index(values, grid)
        counts = np.bincount(idx, minlength=grid.n)
        return cls(values=values, snapped_index=idx, cell_counts=counts,
                   grid=grid, raw=raw, jump_counts=jump_counts)


def ingest_samples(path) -> np.ndarray:
    """Read raw sample values from a CSV file: one decimal per line, '#' comments.

    Returns the unwrapped values; projection onto a grid happens later.
    """
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise IngestError(
                    f"{path}: malformed value {text!r} at line {lineno}") from None
    if not values:
        raise IngestError(f"{path}: no sample values found")
    return np.asarray(values, dtype=float)


def write_samples_csv(path, values, metadata: dict | None = None) -> None:
    """Write one value per line with '#'-prefixed metadata header lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for key, val in (metadata or {}).items():
            fh.write(f"# {key} = {val}\n")
        for v in np.asarray(values, dtype=float):
            fh.write(f"{float(v)!r}\n")
