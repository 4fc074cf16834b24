"""Arena geometry, randomized placement and the coverage analysis grid."""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from swarmcover.errors import PlacementInfeasible

OBSTACLE_HALF_SIDE = 0.02
OBSTACLE_BUFFER = 0.15
ROBOT_RADIUS = 0.025

_STREAM_IDS = {"placement": 0, "initial-poses": 1, "controller": 2}


def rng_stream(seed: int, stream_id: str) -> np.random.Generator:
    """Independent generator for one purpose of one run.

    Streams are keyed on ``(seed, stream_id)`` so that drawing extra numbers
    for controllers never shifts obstacle or start-pose placement.
    """
    key = _STREAM_IDS.get(stream_id)
    if key is None:
        key = zlib.crc32(stream_id.encode("utf-8")) + len(_STREAM_IDS)
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), key]))


@dataclass(frozen=True)
class Arena:
    side_m: float = 4.0
    grid_n: int = 16

    def __post_init__(self):
        if self.side_m <= 0 or self.grid_n < 1:
            raise ValueError(f"invalid arena {self.side_m} m / {self.grid_n} cells")

    @property
    def cell_m(self) -> float:
        return self.side_m / self.grid_n

    @property
    def n_cells(self) -> int:
        return self.grid_n * self.grid_n

    @property
    def area(self) -> float:
        return self.side_m * self.side_m

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return ((ix + 0.5) * self.cell_m, (iy + 0.5) * self.cell_m)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle ``[x0, x1] x [y0, y1]``."""

    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1


def default_start_region(arena: Arena, along_wall: float = 1.0, depth: float = 1.25) -> Rect:
    """Start rectangle against the west wall, centred on its midpoint."""
    mid = arena.side_m / 2
    return Rect(0.0, mid - along_wall / 2, depth, mid + along_wall / 2)


@dataclass(frozen=True)
class Obstacle:
    x: float
    y: float
    theta: float
    half_side: float = OBSTACLE_HALF_SIDE

    @property
    def half_diagonal(self) -> float:
        return self.half_side * math.sqrt(2.0)

    def corners(self) -> list[tuple[float, float]]:
        c, s = math.cos(self.theta), math.sin(self.theta)
        h = self.half_side
        return [
            (self.x + c * lx - s * ly, self.y + s * lx + c * ly)
            for lx, ly in ((h, h), (-h, h), (-h, -h), (h, -h))
        ]

    def closest_point(self, px: float, py: float) -> tuple[float, float]:
        """Closest point of the square footprint to ``(px, py)``."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        dx, dy = px - self.x, py - self.y
        lx = c * dx + s * dy
        ly = -s * dx + c * dy
        h = self.half_side
        lx = min(max(lx, -h), h)
        ly = min(max(ly, -h), h)
        return (self.x + c * lx - s * ly, self.y + s * lx + c * ly)

    def distance_to(self, px: float, py: float) -> float:
        qx, qy = self.closest_point(px, py)
        return math.hypot(px - qx, py - qy)

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "theta": self.theta, "half_side": self.half_side}


def _segment_distance(p, a, b) -> float:
    ax, ay = a
    bx, by = b
    vx, vy = bx - ax, by - ay
    L2 = vx * vx + vy * vy
    t = 0.0 if L2 == 0 else min(1.0, max(0.0, ((p[0] - ax) * vx + (p[1] - ay) * vy) / L2))
    return math.hypot(p[0] - ax - t * vx, p[1] - ay - t * vy)


def footprint_clearance(a: Obstacle, b: Obstacle) -> float:
    """Minimum distance between two square footprints (0 if they overlap)."""
    ca, cb = a.corners(), b.corners()
    if any(b.distance_to(*p) == 0.0 for p in ca) or any(a.distance_to(*p) == 0.0 for p in cb):
        return 0.0
    best = math.inf
    for poly_p, poly_e in ((ca, cb), (cb, ca)):
        for p in poly_p:
            for i in range(4):
                best = min(best, _segment_distance(p, poly_e[i], poly_e[(i + 1) % 4]))
    return best


def boundary_clearance(ob: Obstacle, arena: Arena) -> float:
    return min(min(x, y, arena.side_m - x, arena.side_m - y) for x, y in ob.corners())


class _ObstacleSet:
    """Hash grid over obstacle centres used while placing."""

    def __init__(self, pitch: float):
        self.pitch = pitch
        self.cells: dict[tuple[int, int], set[int]] = {}
        self.items: dict[int, Obstacle] = {}

    def _key(self, x, y):
        return (int(x // self.pitch), int(y // self.pitch))

    def add(self, idx: int, ob: Obstacle):
        self.items[idx] = ob
        self.cells.setdefault(self._key(ob.x, ob.y), set()).add(idx)

    def remove(self, idx: int):
        ob = self.items.pop(idx)
        self.cells[self._key(ob.x, ob.y)].discard(idx)

    def neighbours(self, x, y, skip=None):
        kx, ky = self._key(x, y)
        for i in range(kx - 1, kx + 2):
            for j in range(ky - 1, ky + 2):
                for idx in self.cells.get((i, j), ()):
                    if idx != skip:
                        yield self.items[idx]


def _fits(ob: Obstacle, others, buffer: float, arena: Arena) -> bool:
    if boundary_clearance(ob, arena) < buffer:
        return False
    near = buffer + 2 * ob.half_side
    far = buffer + 2 * ob.half_diagonal
    for other in others:
        d = math.hypot(ob.x - other.x, ob.y - other.y)
        if d >= far:
            continue
        if d < near or footprint_clearance(ob, other) < buffer:
            return False
    return True


def place_obstacles(
    rng: np.random.Generator,
    count: int,
    arena: Arena = Arena(),
    *,
    half_side: float = OBSTACLE_HALF_SIDE,
    buffer: float = OBSTACLE_BUFFER,
    max_rejections: int = 10**6,
    relax_sweeps: int = 40,
) -> list[Obstacle]:
    """Scatter ``count`` square obstacles with boundary and pairwise buffers.

    Sequential rejection sampling jams well below 300 obstacles at a 15 cm
    footprint gap, so placement starts from a random subset of a jittered
    hexagonal lattice (always feasible) and then runs ``relax_sweeps`` sweeps
    of hard-body Metropolis moves over position and orientation. Every
    accepted state satisfies both buffers; the chain's stationary law is the
    uniform distribution over feasible layouts.
    """
    if count < 0:
        raise ValueError("obstacle count must be non-negative")
    if count == 0:
        return []
    pitch = buffer + 2 * half_side * math.sqrt(2.0) + 1e-6
    lo = buffer + half_side * math.sqrt(2.0)
    hi = arena.side_m - lo
    if hi < lo:
        raise PlacementInfeasible(f"arena too small for a {buffer} m boundary buffer")
    row_h = pitch * math.sqrt(3.0) / 2
    sites = []
    n_rows = int((hi - lo) // row_h) + 1
    for r in range(n_rows):
        x0 = lo + (pitch / 2 if r % 2 else 0.0)
        n_cols = int((hi - x0) // pitch) + 1
        sites.extend((x0 + c * pitch, lo + r * row_h) for c in range(n_cols))
    if count > len(sites):
        raise PlacementInfeasible(
            f"{count} obstacles exceed the {len(sites)} that fit with a {buffer} m buffer"
        )
    chosen = rng.choice(len(sites), size=count, replace=False)
    thetas = rng.uniform(0.0, math.pi / 2, size=count)
    grid = _ObstacleSet(pitch)
    for i, (site, th) in enumerate(zip(chosen, thetas)):
        x, y = sites[int(site)]
        grid.add(i, Obstacle(float(x), float(y), float(th), half_side))

    step = pitch / 2
    rejections = 0
    for _ in range(relax_sweeps):
        order = rng.permutation(count)
        moves = rng.uniform(-1.0, 1.0, size=(count, 2)) * step
        turns = rng.uniform(0.0, math.pi / 2, size=count)
        accepted = 0
        for k, idx in enumerate(order):
            idx = int(idx)
            cur = grid.items[idx]
            cand = Obstacle(
                cur.x + float(moves[k, 0]), cur.y + float(moves[k, 1]), float(turns[k]), half_side
            )
            if _fits(cand, grid.neighbours(cand.x, cand.y, skip=idx), buffer, arena):
                grid.remove(idx)
                grid.add(idx, cand)
                accepted += 1
            else:
                rejections += 1
                if rejections > max_rejections:
                    raise PlacementInfeasible(
                        f"placement exceeded {max_rejections} rejected moves for {count} obstacles"
                    )
        # keep the acceptance rate in a useful band
        rate = accepted / count
        if rate < 0.3:
            step *= 0.8
        elif rate > 0.6:
            step = min(step * 1.25, pitch)
    return [grid.items[i] for i in range(count)]


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    theta: float


def place_robots(
    rng: np.random.Generator,
    n: int,
    region: Rect,
    arena: Arena = Arena(),
    *,
    radius: float = ROBOT_RADIUS,
    obstacles: list[Obstacle] = (),
    max_rejections: int = 10**6,
) -> list[Pose]:
    """Uniform non-overlapping start poses inside ``region``.

    Discs are kept fully inside both the region and the arena and clear of
    obstacle footprints; headings are uniform on ``[0, 2*pi)``.
    """
    if n < 1:
        raise ValueError("need at least one robot")
    x0 = max(region.x0, 0.0) + radius
    x1 = min(region.x1, arena.side_m) - radius
    y0 = max(region.y0, 0.0) + radius
    y1 = min(region.y1, arena.side_m) - radius
    if x1 < x0 or y1 < y0:
        raise PlacementInfeasible("start region is narrower than a robot")
    poses: list[Pose] = []
    rejections = 0
    while len(poses) < n:
        x = float(rng.uniform(x0, x1))
        y = float(rng.uniform(y0, y1))
        ok = all(math.hypot(x - p.x, y - p.y) >= 2 * radius for p in poses) and all(
            ob.distance_to(x, y) >= radius for ob in obstacles
        )
        if ok:
            poses.append(Pose(x, y, float(rng.uniform(0.0, 2 * math.pi))))
        else:
            rejections += 1
            if rejections > max_rejections:
                raise PlacementInfeasible(f"could not fit {n} robots in {region}")
    return poses


def cell_of(x: float, y: float, arena: Arena = Arena()) -> tuple[int, int] | None:
    """Grid cell containing a point, or ``None`` when outside the arena.

    Interior gridlines belong to the higher-index cell; the far arena edge
    belongs to the last cell.
    """
    s = arena.side_m
    if not (0.0 <= x <= s and 0.0 <= y <= s):
        return None
    n = arena.grid_n
    ix = min(int(math.floor(x / arena.cell_m)), n - 1)
    iy = min(int(math.floor(y / arena.cell_m)), n - 1)
    return ix, iy


@dataclass
class CoverageGrid:
    """Per-cell accumulated occupancy time, in ticks."""

    arena: Arena = field(default_factory=Arena)
    visits: np.ndarray = None

    def __post_init__(self):
        if self.visits is None:
            self.visits = np.zeros((self.arena.grid_n, self.arena.grid_n), dtype=np.int64)

    @property
    def visited(self) -> np.ndarray:
        return self.visits > 0

    def record_visit(self, cell: tuple[int, int], dt: int = 1) -> "CoverageGrid":
        if dt < 0:
            raise ValueError("dt must be non-negative")
        self.visits[cell] += dt
        return self

    def copy(self) -> "CoverageGrid":
        return CoverageGrid(self.arena, self.visits.copy())


def record_visit(grid: CoverageGrid, cell: tuple[int, int], dt: int = 1) -> CoverageGrid:
    return grid.record_visit(cell, dt)


def arena_to_dict(arena: Arena, obstacles: list[Obstacle]) -> dict:
    return {
        "side_m": arena.side_m,
        "grid_n": arena.grid_n,
        "obstacles": [ob.to_dict() for ob in obstacles],
    }


def arena_from_dict(doc: dict) -> tuple[Arena, list[Obstacle]]:
    arena = Arena(float(doc["side_m"]), int(doc["grid_n"]))
    obstacles = [
        Obstacle(float(o["x"]), float(o["y"]), float(o["theta"]), float(o["half_side"]))
        for o in doc.get("obstacles", [])
    ]
    return arena, obstacles


def save_arena(path: str | Path, arena: Arena, obstacles: list[Obstacle]) -> None:
    Path(path).write_text(json.dumps(arena_to_dict(arena, obstacles), indent=2))


def load_arena(path: str | Path) -> tuple[Arena, list[Obstacle]]:
    return arena_from_dict(json.loads(Path(path).read_text()))
