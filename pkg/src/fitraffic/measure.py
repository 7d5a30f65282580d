"""Velocity statistics, flow and cyclic block frequencies of a configuration."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .lattice import CellsLike, Configuration, as_cells, cyclic_gaps


class UndefinedDensityError(ValueError):
    """Raised for quantities that need at least one car."""


@dataclass(frozen=True)
class VelocityHistogram:
    counts: tuple[int, ...]  # counts[k] = cars moving k sites, k = 0..m
    N: int
    L: int

    @property
    def m(self) -> int:
        return len(self.counts) - 1

    def total_displacement(self) -> int:
        return sum(k * n for k, n in enumerate(self.counts))


@dataclass(frozen=True)
class FlowSample:
    t: int
    mean_velocity: float
    flow: float
    block_prob: float


def velocity_histogram(config: Configuration, m: int) -> VelocityHistogram:
    if m < 1:
        raise ValueError("m must be >= 1")
    v = np.minimum(cyclic_gaps(config.positions(), config.L), m)
    counts = np.bincount(v, minlength=m + 1)
    return VelocityHistogram(tuple(int(c) for c in counts), int(v.size), config.L)


def mean_velocity(config: Configuration, m: int) -> float:
    h = velocity_histogram(config, m)
    if h.N == 0:
        raise UndefinedDensityError("mean velocity is undefined on an empty ring")
    return h.total_displacement() / h.N


def block_count(config: Configuration, block: CellsLike) -> int:
    """Number of the ``L`` cyclic windows equal to ``block``."""
    b = as_cells(block)
    if not 1 <= b.size <= config.L:
        raise ValueError(f"block length must be in [1, L={config.L}]")
    cells = config.cells
    ext = np.concatenate([cells, cells[: b.size - 1]])
    windows = np.lib.stride_tricks.sliding_window_view(ext, b.size)
    return int((windows == b).all(axis=1).sum())


def block_frequency(config: Configuration, block: CellsLike) -> float:
    return block_count(config, block) / config.L


def zero_block_count(gaps: np.ndarray, n_cars: int, L: int, length: int) -> int:
    """Cyclic windows of ``length`` zeros, counted from the gap list.

    A gap of ``g`` empty sites holds ``max(g - length + 1, 0)`` such windows.
    """
    if n_cars == 0:
        return L
    return int(np.maximum(gaps - (length - 1), 0).sum())


def flow(config: Configuration, m: int) -> float:
    """Density times mean velocity, i.e. total displacement per site; 0 on an empty ring."""
    return velocity_histogram(config, m).total_displacement() / config.L


def flow_sample(t: int, gaps: np.ndarray, L: int, m: int) -> FlowSample:
    """Measurements from a gap list (the fast path used during simulation)."""
    n = gaps.size
    moved = int(np.minimum(gaps, m).sum())
    zeros = zero_block_count(gaps, n, L, m + 1)
    return FlowSample(
        t=t,
        mean_velocity=moved / n if n else 0.0,
        flow=moved / L,
        block_prob=zeros / L,
    )


def measure(config: Configuration, m: int, t: int = 0) -> FlowSample:
    return flow_sample(t, cyclic_gaps(config.positions(), config.L), config.L, m)


SAMPLE_COLUMNS = ("t", "mean_velocity", "flow", "block_prob")


def samples_to_csv(samples: Iterable[FlowSample], header: Sequence[str] = ()) -> str:
    """CSV with one row per sample; ``header`` lines are emitted as ``#`` comments."""
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SAMPLE_COLUMNS)
    for s in samples:
        w.writerow([s.t, repr(s.mean_velocity), repr(s.flow), repr(s.block_prob)])
    return buf.getvalue()


def samples_from_csv(text: str) -> list[FlowSample]:
    rows = csv.DictReader(line for line in text.splitlines() if not line.startswith("#"))
    return [
        FlowSample(int(r["t"]), float(r["mean_velocity"]), float(r["flow"]), float(r["block_prob"]))
        for r in rows
    ]
