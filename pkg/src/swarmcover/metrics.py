"""Coverage completeness, coverage uniformity and per-run observables."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from swarmcover.bodies import TICK_S
from swarmcover.world import Arena, CoverageGrid


def _visits(grid) -> np.ndarray:
    return np.asarray(grid.visits if isinstance(grid, CoverageGrid) else grid, dtype=float).ravel()


def completeness(grid) -> float:
    """Percentage of cells visited at least once."""
    v = _visits(grid)
    return 100.0 * np.count_nonzero(v > 0) / v.size


def uniformity(grid) -> float:
    """Mean square-root absolute deviation of cell occupancy from its median.

    ``grid`` is a CoverageGrid or any array of per-cell times; 0 means every
    cell got the same time. For an even number of cells the median is the
    midpoint of the two central values.
    """
    v = _visits(grid)
    if v.size == 0:
        raise ValueError("uniformity needs at least one cell")
    return float(np.sqrt(np.abs(v - np.median(v))).sum() / v.size)


def uniformity_seconds(grid, tick_s: float = TICK_S) -> float:
    """Same statistic with occupancy converted from ticks to seconds."""
    return uniformity(_visits(grid) * tick_s)


def distance_per_sqm(odometers, arena: Arena = Arena()) -> float:
    return float(sum(odometers)) / arena.area


@dataclass
class MetricsSeries:
    """Per-tick observables of one run.

    Completeness and the cumulative counters are sampled every tick;
    uniformity every ``p_every`` ticks.
    """

    arena: Arena = field(default_factory=Arena)
    p_every: int = 500
    ticks: list[int] = field(default_factory=list)
    completeness: list[float] = field(default_factory=list)
    messages_total: list[int] = field(default_factory=list)
    collisions_total: list[int] = field(default_factory=list)
    distance_total: list[float] = field(default_factory=list)
    p_ticks: list[int] = field(default_factory=list)
    p_values: list[float] = field(default_factory=list)

    def record(self, tick: int, grid: CoverageGrid, messages: int, collisions: int, distance: float) -> None:
        self.ticks.append(tick)
        self.completeness.append(completeness(grid))
        self.messages_total.append(messages)
        self.collisions_total.append(collisions)
        self.distance_total.append(distance)
        if tick % self.p_every == 0:
            self.p_ticks.append(tick)
            self.p_values.append(uniformity(grid))

    def at(self, tick: int) -> dict:
        """Row for ``tick`` (clamped to the recorded range)."""
        i = int(np.searchsorted(self.ticks, tick, side="right")) - 1
        i = min(max(i, 0), len(self.ticks) - 1)
        return {
            "tick": self.ticks[i],
            "completeness": self.completeness[i],
            "messages_total": self.messages_total[i],
            "collisions_total": self.collisions_total[i],
            "distance_total": self.distance_total[i],
        }

    def distance_per_sqm(self) -> list[float]:
        return [d / self.arena.area for d in self.distance_total]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["tick", "completeness", "messages_total", "collisions_total", "distance_total"])
            for row in zip(
                self.ticks, self.completeness, self.messages_total, self.collisions_total, self.distance_total
            ):
                w.writerow([row[0], f"{row[1]:.6f}", row[2], row[3], f"{row[4]:.6f}"])
