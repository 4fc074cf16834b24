"""Ground-robot and UAV kinematics, proximity sensing and collision counting."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

from swarmcover.world import ROBOT_RADIUS, Arena, Obstacle, Rect

CRUISE_SPEED = 0.068
WHEEL_BASE = 0.053
SENSE_RANGE = 0.05
N_SENSORS = 12
UAV_MAX_SPEED = 0.074
FOV_WIDTH = 1.5
FOV_HEIGHT = 1.75
TICK_S = 0.1
# rim speed of an in-place turn at cruise speed
TURN_RATE = 2 * CRUISE_SPEED / WHEEL_BASE
CONTACT_TOL = 1e-6


TWO_PI = 2 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap to ``(-pi, pi]``."""
    a = math.fmod(a + math.pi, TWO_PI)
    if a <= 0.0:
        a += TWO_PI
    return a - math.pi


class Kind(enum.Enum):
    BOUNDARY = "boundary"
    OBSTACLE = "obstacle"
    ROBOT = "robot"


class UavRole(enum.Enum):
    BRAIN = "brain"
    INNER = "inner"
    SUPERVISOR = "supervisor"


@dataclass(frozen=True)
class Detection:
    """One sensed surface.

    ``bearing`` is measured clockwise from the robot heading, so objects on
    the left have negative bearing. ``range`` is surface-to-surface distance.
    ``source`` identifies what was seen: a wall name, obstacle index or robot id.
    """

    kind: Kind
    bearing: float
    range: float
    source: object = None
    point: tuple[float, float] = (0.0, 0.0)
    # centre of the sensed body; None for walls
    center: tuple[float, float] | None = None

    def in_cone(self, half_angle: float = math.radians(60)) -> bool:
        return abs(self.bearing) <= half_angle + 1e-12


@dataclass
class GroundRobot:
    id: int
    x: float
    y: float
    theta: float
    body_radius: float = ROBOT_RADIUS
    wheel_base: float = WHEEL_BASE
    cruise_speed: float = CRUISE_SPEED
    sense_range: float = SENSE_RANGE
    n_sensors: int = N_SENSORS
    failed: bool = False
    odometer: float = 0.0
    # last commanded linear speed, for the speed-cap invariant
    speed: float = 0.0

    @property
    def pos(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def turn_rate(self) -> float:
        return 2 * self.cruise_speed / self.wheel_base


@dataclass
class Uav:
    id: int
    x: float
    y: float
    theta: float = 0.0
    max_speed: float = UAV_MAX_SPEED
    fov_w: float = FOV_WIDTH
    fov_h: float = FOV_HEIGHT
    role: UavRole = UavRole.SUPERVISOR
    # unlimited view for the centralized supervisor
    full_view: bool = False
    failed: bool = False
    vx: float = 0.0
    vy: float = 0.0

    @property
    def pos(self) -> tuple[float, float]:
        return (self.x, self.y)

    def fov(self) -> Rect:
        return Rect(
            self.x - self.fov_w / 2,
            self.y - self.fov_h / 2,
            self.x + self.fov_w / 2,
            self.y + self.fov_h / 2,
        )

    def sees(self, x: float, y: float) -> bool:
        if self.full_view:
            return True
        return abs(x - self.x) <= self.fov_w / 2 and abs(y - self.y) <= self.fov_h / 2

    def fly_towards(self, tx: float, ty: float, dt: float = TICK_S) -> None:
        dx, dy = tx - self.x, ty - self.y
        d = math.hypot(dx, dy)
        step = min(d, self.max_speed * dt)
        if d > 0:
            self.vx, self.vy = dx / d * step / dt, dy / d * step / dt
            self.x += dx / d * step
            self.y += dy / d * step
        else:
            self.vx = self.vy = 0.0


class Scene:
    """Static obstacles plus the live ground robots, with a spatial index."""

    def __init__(
        self,
        arena: Arena,
        obstacles: list[Obstacle],
        robots: list[GroundRobot] = (),
    ):
        self.arena = arena
        self.obstacles = list(obstacles)
        self.robots = list(robots)
        self._pitch = 0.25
        self._index: dict[tuple[int, int], list[int]] = {}
        reach = max((ob.half_diagonal for ob in self.obstacles), default=0.0)
        for i, ob in enumerate(self.obstacles):
            lo_x = int((ob.x - reach) // self._pitch)
            hi_x = int((ob.x + reach) // self._pitch)
            lo_y = int((ob.y - reach) // self._pitch)
            hi_y = int((ob.y + reach) // self._pitch)
            for kx in range(lo_x, hi_x + 1):
                for ky in range(lo_y, hi_y + 1):
                    self._index.setdefault((kx, ky), []).append(i)

    def obstacles_near(self, x: float, y: float, radius: float) -> set[int]:
        p = self._pitch
        found: set[int] = set()
        for kx in range(int((x - radius) // p), int((x + radius) // p) + 1):
            for ky in range(int((y - radius) // p), int((y + radius) // p) + 1):
                cell = self._index.get((kx, ky))
                if cell:
                    found.update(cell)
        return found

    def body_free(self, robot: GroundRobot, x: float, y: float) -> bool:
        """True when a disc of the robot's radius at ``(x, y)`` touches nothing."""
        r = robot.body_radius
        s = self.arena.side_m
        if x < r or y < r or x > s - r or y > s - r:
            return False
        for i in self.obstacles_near(x, y, r):
            if self.obstacles[i].distance_to(x, y) < r:
                return False
        for other in self.robots:
            if other is robot:
                continue
            if (other.x - x) ** 2 + (other.y - y) ** 2 < (r + other.body_radius) ** 2:
                return False
        return True


def _arc_pose(x, y, th, v, w, t):
    if abs(w) < 1e-12:
        return x + v * math.cos(th) * t, y + v * math.sin(th) * t, th
    nth = th + w * t
    return (
        x + v / w * (math.sin(nth) - math.sin(th)),
        y - v / w * (math.cos(nth) - math.cos(th)),
        nth,
    )


def _truncate(scene, robot, fn) -> float:
    """Largest fraction in [0, 1] of a motion ``fn`` that stays contact-free."""
    nx, ny = fn(1.0)
    if scene.body_free(robot, nx, ny):
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(40):
        mid = (lo + hi) / 2
        if scene.body_free(robot, *fn(mid)):
            lo = mid
        else:
            hi = mid
    return lo


def contact_normals(scene: Scene, robot: GroundRobot, x: float, y: float, tol: float = 1e-7):
    """Unit normals pointing from each touching surface towards the body centre."""
    r = robot.body_radius
    s = scene.arena.side_m
    out = []
    if x - r <= tol:
        out.append((1.0, 0.0))
    if s - x - r <= tol:
        out.append((-1.0, 0.0))
    if y - r <= tol:
        out.append((0.0, 1.0))
    if s - y - r <= tol:
        out.append((0.0, -1.0))
    for i in scene.obstacles_near(x, y, r + tol):
        qx, qy = scene.obstacles[i].closest_point(x, y)
        d = math.hypot(x - qx, y - qy)
        if 0 < d <= r + tol:
            out.append(((x - qx) / d, (y - qy) / d))
    for other in scene.robots:
        if other is robot:
            continue
        d = math.hypot(x - other.x, y - other.y)
        if 0 < d <= r + other.body_radius + tol:
            out.append(((x - other.x) / d, (y - other.y) / d))
    return out


def step_differential_drive(
    robot: GroundRobot, left_speed: float, right_speed: float, dt: float = TICK_S, scene: Scene | None = None
) -> GroundRobot:
    """Advance one tick by exact arc integration.

    Motion is cut at first contact. The unused part of the tick is spent
    swinging the body to lie along the touched surface, as a robot pushing
    into something at a slant does, capped at the in-place turn rate.
    """
    if robot.failed:
        robot.speed = 0.0
        return robot
    cap = robot.cruise_speed
    left = min(max(left_speed, -cap), cap)
    right = min(max(right_speed, -cap), cap)
    v = (left + right) / 2
    w = (right - left) / robot.wheel_base
    x, y, th = robot.x, robot.y, robot.theta
    frac = 1.0
    if v != 0.0 and scene is not None:
        frac = _truncate(scene, robot, lambda f: _arc_pose(x, y, th, v, w, dt * f)[:2])
    nx, ny, nth = _arc_pose(x, y, th, v, w, dt * frac)
    if frac < 1.0:
        nth = th + w * dt
        heading = nth if v > 0 else nth + math.pi
        best = None
        for cx, cy in contact_normals(scene, robot, nx, ny):
            # bearing of the contact point, clockwise-positive
            bearing = wrap_angle(heading - math.atan2(-cy, -cx))
            if abs(bearing) < math.pi / 2 and (best is None or abs(bearing) < abs(best)):
                best = bearing
        if best is not None:
            swing = min(math.pi / 2 - abs(best), robot.turn_rate * dt * (1.0 - frac))
            nth += math.copysign(swing, best)
    robot.x, robot.y, robot.theta = nx, ny, wrap_angle(nth)
    robot.odometer += abs(v) * dt * frac
    robot.speed = abs(v)
    return robot


def proximity_scan(robot: GroundRobot, scene: Scene) -> list[Detection]:
    """Every wall, obstacle and robot surface within sensing range, exact."""
    out: list[Detection] = []
    r = robot.body_radius
    reach = robot.sense_range
    x, y, th = robot.x, robot.y, robot.theta
    s = scene.arena.side_m

    def add(kind, px, py, rng, source, center=None):
        bearing = wrap_angle(th - math.atan2(py - y, px - x))
        out.append(Detection(kind, bearing, max(rng, 0.0), source, (px, py), center))

    for name, gap, px, py in (
        ("west", x - r, 0.0, y),
        ("east", s - x - r, s, y),
        ("south", y - r, x, 0.0),
        ("north", s - y - r, x, s),
    ):
        if gap <= reach:
            add(Kind.BOUNDARY, px, py, gap, name)
    for i in scene.obstacles_near(x, y, r + reach):
        ob = scene.obstacles[i]
        qx, qy = ob.closest_point(x, y)
        gap = math.hypot(qx - x, qy - y) - r
        if gap <= reach:
            add(Kind.OBSTACLE, qx, qy, gap, i, (ob.x, ob.y))
    for other in scene.robots:
        if other is robot:
            continue
        dx, dy = other.x - x, other.y - y
        if abs(dx) > 0.2 or abs(dy) > 0.2:
            continue
        d = math.hypot(dx, dy)
        gap = d - r - other.body_radius
        if gap <= reach and d > 0:
            add(
                Kind.ROBOT,
                x + dx / d * (d - other.body_radius),
                y + dy / d * (d - other.body_radius),
                gap,
                other.id,
                (other.x, other.y),
            )
    return out


def uav_visible_robots(uav: Uav, ground_robots: Iterable[GroundRobot]) -> set[int]:
    """Ids of live ground robots whose centres lie in the UAV's view."""
    if uav.failed:
        return set()
    return {g.id for g in ground_robots if not g.failed and uav.sees(g.x, g.y)}


def detect_collisions(
    robots: list[GroundRobot], previous_contacts: frozenset | set = frozenset()
) -> tuple[list[tuple[int, int]], frozenset]:
    """Edge-triggered robot-robot contact events.

    A pair is in contact when the centre distance is within ``CONTACT_TOL``
    of the sum of radii (bodies never interpenetrate, so touching is the
    limit). An event fires only when a pair enters contact.
    """
    contacts = set()
    n = len(robots)
    for i in range(n):
        a = robots[i]
        for j in range(i + 1, n):
            b = robots[j]
            lim = a.body_radius + b.body_radius + CONTACT_TOL
            dx = a.x - b.x
            if dx > lim or dx < -lim:
                continue
            dy = a.y - b.y
            if dx * dx + dy * dy < lim * lim:
                contacts.add((min(a.id, b.id), max(a.id, b.id)))
    events = sorted(contacts - set(previous_contacts))
    return events, frozenset(contacts)
