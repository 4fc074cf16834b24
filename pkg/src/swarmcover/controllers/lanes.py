"""Offline boustrophedon decomposition into column lanes."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from swarmcover.errors import InvalidCount
from swarmcover.world import Arena


@dataclass
class Lane:
    columns: tuple[int, ...]
    # sweep waypoints, first entry is the lane start
    waypoints: list[tuple[float, float]]

    def reversed(self) -> "Lane":
        return Lane(self.columns, list(reversed(self.waypoints)))


@dataclass
class LanePlan:
    """Lanes and, once robots are assigned, their full waypoint programs.

    ``programs[robot_id]`` starts with the transit leg from the robot's start
    position to its lane start; ``transit`` records how many leading
    waypoints belong to that leg.
    """

    arena: Arena
    lanes: list[Lane]
    assignment: dict[int, int] = field(default_factory=dict)
    programs: dict[int, list[tuple[float, float]]] = field(default_factory=dict)
    transit: dict[int, int] = field(default_factory=dict)

    def widths(self) -> list[int]:
        return [len(l.columns) for l in self.lanes]

    def cells_of(self, lane_index: int) -> set[tuple[int, int]]:
        n = self.arena.grid_n
        return {(c, r) for c in self.lanes[lane_index].columns for r in range(n)}

    def to_dict(self) -> dict:
        robots = []
        for rid in sorted(self.programs):
            robots.append(
                {
                    "robot": rid,
                    "lane_columns": list(self.lanes[self.assignment[rid]].columns),
                    "waypoints": [[round(x, 6), round(y, 6)] for x, y in self.programs[rid]],
                }
            )
        return {"lanes": [list(l.columns) for l in self.lanes], "robots": robots}

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))


def lane_widths(n_robots: int, grid_n: int) -> list[int]:
    """As-equal-as-possible split, wider lanes first."""
    base, extra = divmod(grid_n, n_robots)
    return [base + 1] * extra + [base] * (n_robots - extra)


def decompose_lanes(n_robots: int, arena: Arena = Arena()) -> LanePlan:
    """Split the columns into ``n_robots`` contiguous lanes with sweep waypoints."""
    if not isinstance(n_robots, (int, np.integer)) or not 1 <= n_robots <= arena.grid_n:
        raise InvalidCount(f"need 1..{arena.grid_n} robots, got {n_robots!r}")
    cell = arena.cell_m
    lo, hi = cell / 2, arena.side_m - cell / 2
    lanes, c = [], 0
    for w in lane_widths(int(n_robots), arena.grid_n):
        cols = tuple(range(c, c + w))
        c += w
        pts = []
        for k, col in enumerate(cols):
            x = (col + 0.5) * cell
            ys = (lo, hi) if k % 2 == 0 else (hi, lo)
            pts.append((x, ys[0]))
            pts.append((x, ys[1]))
        lanes.append(Lane(cols, pts))
    return LanePlan(arena, lanes)


def assign_lanes(plan: LanePlan, starts: dict[int, tuple[float, float]]) -> LanePlan:
    """Give each robot one lane and prepend the transit leg to the nearer lane end.

    The assignment minimizes the sum of squared transit lengths, which keeps
    the longest transit short without a separate bottleneck search.
    """
    ids = sorted(starts)
    if len(ids) != len(plan.lanes):
        raise InvalidCount(f"{len(ids)} robots for {len(plan.lanes)} lanes")

    def near_end(p, lane):
        a, b = lane.waypoints[0], lane.waypoints[-1]
        da, db = math.dist(p, a), math.dist(p, b)
        return (da, False) if da <= db else (db, True)

    cost = np.array([[near_end(starts[i], l)[0] ** 2 for l in plan.lanes] for i in ids])
    rows, cols = linear_sum_assignment(cost)
    for r, c in zip(rows, cols):
        rid = ids[r]
        lane = plan.lanes[c]
        if near_end(starts[rid], lane)[1]:
            lane = lane.reversed()
        plan.assignment[rid] = int(c)
        plan.programs[rid] = [tuple(starts[rid])] + list(lane.waypoints)
        plan.transit[rid] = 1
    return plan


def count_reversals(waypoints: list[tuple[float, float]]) -> int:
    """Number of times travel flips between up and down the columns."""
    signs = []
    for (x0, y0), (x1, y1) in zip(waypoints, waypoints[1:]):
        dy = y1 - y0
        if abs(dy) > 1e-9 and abs(dy) >= abs(x1 - x0):
            signs.append(1 if dy > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)
