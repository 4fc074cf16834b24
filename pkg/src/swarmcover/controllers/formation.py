"""Line-formation control shared by the hybrid (MNS) and centralized approaches."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from swarmcover.bodies import TICK_S, Detection, GroundRobot, Kind, Uav, wrap_angle
from swarmcover.controllers.decentralized import CONE, nearest_in_cone, turn_away
from swarmcover.controllers.sweep import SweepProgram

SLOT_GAIN = 2.0
HEADING_GAIN = 4.0
# centre-to-centre distance a follower keeps from a sensed body
CLEARANCE = 0.075
# headings this close to a sensed body are bent away, so a robot that has
# just turned clear of it does not swing straight back into the cone
PASS_ANGLE = CONE + math.radians(5)
# how far inside each end slot the outer UAVs sit
UAV_INSET = 0.72


@dataclass(frozen=True)
class Instruction:
    """Payload of a motion instruction: where the slot is and how it moves."""

    target: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)


def formation_follower_step(
    robot: GroundRobot, scan: list[Detection], instruction: Instruction | None, dt: float = TICK_S
) -> tuple[float, float]:
    """Wheel speeds for a ground robot holding its formation slot."""
    near = nearest_in_cone(scan, (Kind.OBSTACLE, Kind.ROBOT))
    if near is not None:
        return turn_away(near, robot.cruise_speed)
    if instruction is None:
        return (0.0, 0.0)
    dx = instruction.velocity[0] + SLOT_GAIN * (instruction.target[0] - robot.x)
    dy = instruction.velocity[1] + SLOT_GAIN * (instruction.target[1] - robot.y)
    want = math.hypot(dx, dy)
    if want < 1e-4:
        return (0.0, 0.0)
    cap = robot.cruise_speed
    half_base = robot.wheel_base / 2
    err = wrap_angle(steer_around(robot, scan, math.atan2(dy, dx)) - robot.theta)
    # rotation first, forward speed from what is left of the wheel budget
    limit = min(cap / half_base, abs(err) / dt)
    omega = max(-limit, min(limit, HEADING_GAIN * err))
    v = min(want, cap) * max(0.0, math.cos(err))
    v = min(v, cap - abs(omega) * half_base)
    return (v - omega * half_base, v + omega * half_base)


def steer_around(
    robot: GroundRobot,
    scan: list[Detection],
    heading: float,
    min_angle: float = PASS_ANGLE,
    keep_side: bool = True,
) -> float:
    """Bend ``heading`` so the robot goes round any sensed body instead of into it.

    A heading within the body's blocked sector is replaced by the sector edge.
    With ``keep_side`` the edge is taken on the side the robot already faces,
    and headings it could only reach by turning through the body count as
    blocked too; otherwise the edge nearer the wanted heading is used.
    """
    bodies = sorted(
        (d for d in scan if d.center is not None and d.kind in (Kind.OBSTACLE, Kind.ROBOT)), key=lambda d: d.range
    )
    for d in bodies:
        ox, oy = d.center[0] - robot.x, d.center[1] - robot.y
        dist = math.hypot(ox, oy)
        to_body = math.atan2(oy, ox)
        blocked = max(min_angle, math.asin(min(1.0, CLEARANCE / max(dist, 1e-9))))
        now = wrap_angle(robot.theta - to_body)
        want = wrap_angle(heading - to_body)
        if not keep_side:
            if abs(want) < blocked:
                heading = to_body + math.copysign(blocked, want if want != 0 else 1.0)
            continue
        side = 1.0 if now >= 0 else -1.0
        crosses = (want >= 0) != (now >= 0) and abs(want) + abs(now) < math.pi
        if abs(want) < blocked or crosses:
            heading = to_body + side * max(blocked, abs(now) if abs(now) < math.pi / 2 else blocked)
    return heading


def uav_station_offsets(n_uav: int, n_ground: int, pitch: float = 0.25) -> list[float]:
    """Lateral offsets of the UAVs along the line, evenly spread and inset from the ends."""
    if n_uav <= 0:
        return []
    span = max(0.0, pitch * (n_ground - 1) / 2 - UAV_INSET)
    if n_uav == 1:
        return [0.0]
    return list(np.linspace(-span, span, n_uav))


def relay_station_offsets(
    defaults: list[float], live_laterals: list[float], half_view: float, step: float = 0.02
) -> list[float] | None:
    """Station offsets that keep every live slot in view and chain the UAVs.

    Consecutive UAVs must share at least one live slot, since that shared
    robot is what links them. Among the layouts that satisfy this, the one
    closest to ``defaults`` (least squares) wins. Returns None when no
    layout works, e.g. two survivors further apart than one view.
    """
    n = len(defaults)
    if n <= 1 or not live_laterals:
        return list(defaults)
    lat = np.asarray(sorted(live_laterals))
    lo, hi = lat[0], lat[-1]
    cand = np.unique(np.concatenate([np.arange(lo - half_view, hi + half_view + step, step), defaults]))
    seen = np.abs(lat[None, :] - cand[:, None]) <= half_view + 1e-9
    share = (seen.astype(int) @ seen.T.astype(int)) > 0
    order = cand[:, None] <= cand[None, :]
    ok_first = cand - half_view <= lo + 1e-9
    ok_last = cand + half_view >= hi - 1e-9

    # dynamic programme over the ordered UAVs
    cost = np.where(ok_first, (cand - defaults[0]) ** 2, np.inf)
    back = []
    for k in range(1, n):
        trans = np.where(share & order, cost[:, None], np.inf)
        prev = trans.argmin(axis=0)
        cost = trans[prev, np.arange(len(cand))] + (cand - defaults[k]) ** 2
        back.append(prev)
    cost = np.where(ok_last, cost, np.inf)
    j = int(cost.argmin())
    if not np.isfinite(cost[j]):
        return None
    out = [j]
    for prev in reversed(back):
        out.append(int(prev[out[-1]]))
    return [float(cand[i]) for i in reversed(out)]


def relay_slots(
    slot_of: dict[int, int], laterals: list[float], defaults: list[float], half_view: float
) -> tuple[dict[int, int], list[float]]:
    """Pull survivors inwards until the UAV chain can link them all.

    While no station layout works, the robot next to the widest gap, on
    the side with fewer robots, steps one free slot into the gap.
    """
    slots = dict(slot_of)
    for _ in range(len(laterals) ** 2):
        lats = [laterals[k] for k in slots.values()]
        offsets = relay_station_offsets(defaults, lats, half_view)
        if offsets is not None or len(slots) < 2:
            return slots, offsets if offsets is not None else list(defaults)
        order = sorted(slots, key=slots.get)
        gaps = [laterals[slots[b]] - laterals[slots[a]] for a, b in zip(order, order[1:])]
        i = int(np.argmax(gaps))
        if i + 1 <= len(order) - i - 1:
            mover, step = order[i], 1
        else:
            mover, step = order[i + 1], -1
        slots[mover] += step
    return slots, list(defaults)


def frame_point(ref, heading: float, lateral: float, longitudinal: float = 0.0) -> tuple[float, float]:
    tx, ty = math.cos(heading), math.sin(heading)
    return (ref[0] + lateral * ty + longitudinal * tx, ref[1] - lateral * tx + longitudinal * ty)


def assign_slots(
    robots: dict[int, tuple[float, float]], free_slots: list[int], targets: np.ndarray
) -> dict[int, int]:
    """Minimum-total-distance assignment of robots to free slots."""
    ids = sorted(robots)
    if not ids or not free_slots:
        return {}
    cost = np.array(
        [[math.hypot(robots[i][0] - targets[s][0], robots[i][1] - targets[s][1]) for s in free_slots] for i in ids]
    )
    rows, cols = linear_sum_assignment(cost)
    return {ids[r]: free_slots[c] for r, c in zip(rows, cols)}


@dataclass
class SweepState:
    """Where the formation reference is in the circuit at a given tick."""

    program: SweepProgram
    tick: int = 0

    def _index(self) -> int:
        p = self.program
        if self.tick <= p.round_ticks:
            return self.tick
        return p.establish_ticks + (self.tick - p.establish_ticks) % (p.round_ticks - p.establish_ticks)

    @property
    def leg_index(self) -> int:
        """-1 during the establishment hold, then the index of the current piece."""
        t = self._index()
        if t <= self.program.establish_ticks:
            return -1
        for k, (a, b) in enumerate(self.program.legs):
            if a < t <= b:
                return k
        return len(self.program.legs) - 1

    @property
    def progress(self) -> float:
        k = self.leg_index
        t = self._index()
        if k < 0:
            return t / max(self.program.establish_ticks, 1)
        a, b = self.program.legs[k]
        return (t - a) / max(b - a, 1)

    @property
    def finished(self) -> bool:
        return self.tick >= self.program.round_ticks

    def advance(self) -> None:
        self.tick += 1


def uav_supervisor_step(
    uav: Uav,
    children: list[int],
    slot_of: dict[int, int],
    program: SweepProgram,
    clock: int,
    station: float,
    hold: set[int] = frozenset(),
) -> tuple[tuple[float, float], dict[int, Instruction]]:
    """Fly towards this UAV's station and instruct each linked ground child.

    ``clock`` is the program tick this UAV's reference corresponds to (the
    brain runs on the current tick, each hop down the spine adds one tick of
    relay latency). Children in ``hold`` are mid-handshake and get nothing.
    """
    ref, heading, targets = program.at(clock)
    _, _, ahead = program.at(clock + 1)
    sx, sy = frame_point(ref, heading, station)
    if not uav.full_view:
        uav.fly_towards(sx, sy)
    out = {}
    for g in children:
        if g in hold or g not in slot_of:
            continue
        k = slot_of[g]
        tgt = targets[k]
        vel = ((ahead[k][0] - tgt[0]) / TICK_S, (ahead[k][1] - tgt[1]) / TICK_S)
        out[g] = Instruction((float(tgt[0]), float(tgt[1])), vel)
    return (uav.vx, uav.vy), out
