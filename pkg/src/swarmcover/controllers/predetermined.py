"""Waypoint following with fixed counterclockwise detours around blockers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from swarmcover.bodies import TICK_S, Detection, GroundRobot, Kind, wrap_angle
from swarmcover.controllers.decentralized import nearest_in_cone
from swarmcover.controllers.formation import steer_around

DETOUR_RADIUS = 0.08
# centre offset from the lane line beyond which an obstacle is passed without a detour
PASS_OFFSET = 0.06
ARRIVE_TOL = 0.01
LOOKAHEAD = 0.05
HEADING_GAIN = 4.0
ARC_STEP = math.radians(15)
# ticks without getting closer before a detour point is given up
STALL_TICKS = 30


@dataclass
class PredeterminedState:
    waypoints: list[tuple[float, float]]
    # index of the waypoint being driven towards
    index: int = 1
    detour: list[tuple[float, float]] = field(default_factory=list)
    detours_taken: int = 0
    stall: int = 0
    best_gap: float = math.inf
    # arena side, to keep detour points reachable
    side_m: float = 4.0

    @property
    def done(self) -> bool:
        return self.index >= len(self.waypoints) and not self.detour


def detour_arc(
    a: tuple[float, float],
    b: tuple[float, float],
    center: tuple[float, float],
    radius: float = DETOUR_RADIUS,
    pass_offset: float = PASS_OFFSET,
) -> list[tuple[float, float]] | None:
    """Counterclockwise arc around ``center`` from where segment ``a -> b`` enters the circle to where it leaves.

    Returns None when the blocker sits at least ``pass_offset`` off the
    segment's line (the robot clears it going straight) or is not between the
    ends of the segment.
    """
    ux, uy = b[0] - a[0], b[1] - a[1]
    length = math.hypot(ux, uy)
    if length < 1e-12:
        return None
    ux, uy = ux / length, uy / length
    cx, cy = center[0] - a[0], center[1] - a[1]
    along = cx * ux + cy * uy
    off = ux * cy - uy * cx
    if abs(off) >= min(radius, pass_offset) or along < -radius or along > length + radius:
        return None
    h = math.sqrt(radius * radius - off * off)
    p_in = (a[0] + ux * (along - h), a[1] + uy * (along - h))
    p_out = (a[0] + ux * (along + h), a[1] + uy * (along + h))
    a0 = math.atan2(p_in[1] - center[1], p_in[0] - center[0])
    a1 = math.atan2(p_out[1] - center[1], p_out[0] - center[0])
    sweep = (a1 - a0) % (2 * math.pi)
    n = max(2, math.ceil(sweep / ARC_STEP))
    pts = [
        (center[0] + radius * math.cos(a0 + sweep * k / n), center[1] + radius * math.sin(a0 + sweep * k / n))
        for k in range(n + 1)
    ]
    pts[0], pts[-1] = p_in, p_out
    return pts


def _drive_to(robot: GroundRobot, tx: float, ty: float, dt: float, scan=()) -> tuple[float, float]:
    dx, dy = tx - robot.x, ty - robot.y
    dist = math.hypot(dx, dy)
    if dist < 1e-9:
        return (0.0, 0.0)
    cap = robot.cruise_speed
    half_base = robot.wheel_base / 2
    # robots are passed reactively; for obstacles this only matters off the lane line
    err = wrap_angle(steer_around(robot, scan, math.atan2(dy, dx), min_angle=0.0, keep_side=False) - robot.theta)
    limit = min(cap / half_base, abs(err) / dt)
    omega = max(-limit, min(limit, HEADING_GAIN * err))
    v = min(cap, dist / dt) * max(0.0, math.cos(err)) ** 4
    v = min(v, cap - abs(omega) * half_base)
    return (v - omega * half_base, v + omega * half_base)


def _pursuit_point(robot, a, b):
    ux, uy = b[0] - a[0], b[1] - a[1]
    length = math.hypot(ux, uy)
    if length < 1e-12:
        return b
    s = ((robot.x - a[0]) * ux + (robot.y - a[1]) * uy) / length
    s = min(length, max(0.0, s) + LOOKAHEAD)
    return (a[0] + ux * s / length, a[1] + uy * s / length)


def predetermined_follower_step(
    robot: GroundRobot, scan: list[Detection], state: PredeterminedState, dt: float = TICK_S
) -> tuple[float, float]:
    """Follow the plan; a blocker on the current segment triggers the arc detour."""
    if state.detour:
        tx, ty = state.detour[0]
        gap = math.hypot(tx - robot.x, ty - robot.y)
        if gap < state.best_gap - 1e-6:
            state.best_gap, state.stall = gap, 0
        else:
            state.stall += 1
        if gap <= ARRIVE_TOL or state.stall > STALL_TICKS:
            state.detour.pop(0)
            state.best_gap, state.stall = math.inf, 0
            if not state.detour:
                return predetermined_follower_step(robot, scan, state, dt)
            tx, ty = state.detour[0]
        return _drive_to(robot, tx, ty, dt, scan)

    while state.index < len(state.waypoints):
        b = state.waypoints[state.index]
        if math.hypot(b[0] - robot.x, b[1] - robot.y) > ARRIVE_TOL:
            break
        state.index += 1
    if state.index >= len(state.waypoints):
        return (0.0, 0.0)

    a = state.waypoints[state.index - 1]
    b = state.waypoints[state.index]
    near = nearest_in_cone(scan, (Kind.OBSTACLE,))
    if near is not None:
        if math.hypot(b[0] - near.center[0], b[1] - near.center[1]) < DETOUR_RADIUS:
            # the waypoint sits against the obstacle: close enough, move on
            state.index += 1
            return predetermined_follower_step(robot, scan, state, dt)
        arc = detour_arc(a, b, near.center)
        if arc is not None:
            lo, hi = robot.body_radius, state.side_m - robot.body_radius
            state.detour = [(min(hi, max(lo, px)), min(hi, max(lo, py))) for px, py in arc]
            state.detours_taken += 1
            return predetermined_follower_step(robot, scan, state, dt)
    tx, ty = _pursuit_point(robot, a, b)
    return _drive_to(robot, tx, ty, dt, scan)
