"""Random-billiard diffusion with reactive obstacle avoidance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from swarmcover.bodies import CRUISE_SPEED, TICK_S, TURN_RATE, WHEEL_BASE, Detection, GroundRobot, Kind, wrap_angle

CONE = math.radians(60)

# inward normal of each wall
_INWARD = {"west": 0.0, "east": math.pi, "south": math.pi / 2, "north": -math.pi / 2}

CRUISE = "cruise"
BOUNDARY_TURN = "boundary_turn"
OBSTACLE_TURN = "obstacle_turn"


@dataclass
class DecentralizedState:
    mode: str = CRUISE
    target_heading: float = 0.0
    # +1 turns left (counter-clockwise), -1 turns right
    direction: int = 0
    wall: str | None = None
    bounces: int = 0


def nearest_in_cone(scan: list[Detection], kinds=None) -> Detection | None:
    best = None
    for d in scan:
        if abs(d.bearing) <= CONE + 1e-12 and (kinds is None or d.kind in kinds):
            if best is None or d.range < best.range:
                best = d
    return best


def turn_away(det: Detection, speed: float = CRUISE_SPEED) -> tuple[float, float]:
    """Spin in place away from the side the object is on."""
    if det.bearing < 0:
        # object on the left: turn right
        return (speed, -speed)
    return (-speed, speed)


def draw_bounce_heading(wall: str, rng: np.random.Generator) -> float:
    """Heading uniform over directions pointing into the arena from ``wall``."""
    normal = _INWARD[wall]
    # open interval: reject the measure-zero endpoints
    while True:
        u = rng.uniform(-math.pi / 2, math.pi / 2)
        if abs(u) < math.pi / 2:
            return wrap_angle(normal + u)


def inward_component(heading: float, wall: str) -> float:
    return math.cos(heading - _INWARD[wall])


def _rotate_towards(theta: float, target: float, dt: float = TICK_S) -> tuple[float, float]:
    err = wrap_angle(target - theta)
    rate = min(TURN_RATE, abs(err) / dt)
    rim = rate * WHEEL_BASE / 2
    return (-rim, rim) if err > 0 else (rim, -rim)


def decentralized_step(
    robot: GroundRobot,
    scan: list[Detection],
    state: DecentralizedState,
    rng: np.random.Generator,
    dt: float = TICK_S,
) -> tuple[tuple[float, float], DecentralizedState]:
    if state.mode == BOUNDARY_TURN:
        if abs(wrap_angle(state.target_heading - robot.theta)) < 1e-9:
            state.mode = CRUISE
        else:
            return _rotate_towards(robot.theta, state.target_heading, dt), state

    near = nearest_in_cone(scan)
    if near is None:
        state.mode = CRUISE
        return (CRUISE_SPEED, CRUISE_SPEED), state

    if near.kind is Kind.BOUNDARY:
        state.mode = BOUNDARY_TURN
        state.wall = near.source
        state.target_heading = draw_bounce_heading(near.source, rng)
        state.bounces += 1
        return _rotate_towards(robot.theta, state.target_heading, dt), state

    if state.mode != OBSTACLE_TURN:
        state.mode = OBSTACLE_TURN
        state.direction = -1 if near.bearing < 0 else 1
    # keep spinning the same way until the cone clears
    speed = CRUISE_SPEED
    return ((speed, -speed) if state.direction < 0 else (-speed, speed)), state
