import math

import pytest

from swarmcover.bodies import (
    GroundRobot,
    Kind,
    Scene,
    Uav,
    detect_collisions,
    proximity_scan,
    step_differential_drive,
    uav_visible_robots,
)
from swarmcover.world import Arena, Obstacle


def test_straight_line():
    r = step_differential_drive(GroundRobot(0, 1.0, 1.0, 0.0), 0.068, 0.068, 0.1)
    assert r.x == pytest.approx(1.0068)
    assert r.y == pytest.approx(1.0)
    assert r.theta == 0.0
    assert r.odometer == pytest.approx(0.0068)


def test_spin_in_place():
    r = step_differential_drive(GroundRobot(0, 1.0, 1.0, 0.0), -0.068, 0.068, 0.1)
    assert (r.x, r.y) == (1.0, 1.0)
    assert r.theta == pytest.approx(2 * 0.068 * 0.1 / 0.053)
    assert r.theta == pytest.approx(0.2566, abs=1e-4)
    assert r.odometer == 0.0


def test_wheel_speeds_are_capped():
    r = step_differential_drive(GroundRobot(0, 1.0, 1.0, 0.0), 1.0, 1.0, 0.1)
    assert r.x == pytest.approx(1.0068)


def test_truncated_at_wall():
    scene = Scene(Arena(), [])
    r = GroundRobot(0, 4.0 - 0.025 - 0.005, 2.0, 0.0)
    scene.robots = [r]
    step_differential_drive(r, 0.068, 0.068, 0.1, scene)
    assert r.x == pytest.approx(4.0 - 0.025, abs=1e-6)
    assert r.x <= 4.0 - 0.025 + 1e-9
    assert r.odometer == pytest.approx(0.005, abs=1e-6)


def test_failed_robot_does_not_move():
    r = GroundRobot(0, 1.0, 1.0, 0.0, failed=True)
    step_differential_drive(r, 0.068, 0.068)
    assert (r.x, r.y, r.odometer) == (1.0, 1.0, 0.0)


def test_scan_open_space():
    r = GroundRobot(0, 2.0, 2.0, 0.0)
    assert proximity_scan(r, Scene(Arena(), [], [r])) == []


def test_scan_obstacle_ahead():
    r = GroundRobot(0, 2.0, 2.0, 0.0)
    ob = Obstacle(2.0 + 0.025 + 0.03 + 0.02, 2.0, 0.0)
    (d,) = proximity_scan(r, Scene(Arena(), [ob], [r]))
    assert d.kind is Kind.OBSTACLE
    assert d.bearing == pytest.approx(0.0, abs=1e-9)
    assert d.range == pytest.approx(0.03)
    assert d.in_cone()


def test_scan_wall_to_the_side():
    # heading east, north wall 0.04 m from the body surface
    r = GroundRobot(0, 2.0, 4.0 - 0.025 - 0.04, 0.0)
    (d,) = proximity_scan(r, Scene(Arena(), [], [r]))
    assert d.kind is Kind.BOUNDARY
    assert abs(d.bearing) == pytest.approx(math.pi / 2)
    assert not d.in_cone()


def test_scan_robot_left_has_negative_bearing():
    a = GroundRobot(0, 2.0, 2.0, 0.0)
    b = GroundRobot(1, 2.06, 2.03, 0.0)
    (d,) = proximity_scan(a, Scene(Arena(), [], [a, b]))
    assert d.kind is Kind.ROBOT
    assert d.bearing < 0


def test_uav_view():
    uav = Uav(9, 2.0, 2.0)
    below = GroundRobot(0, 2.0, 2.0, 0.0)
    off = GroundRobot(1, 3.0, 2.0, 0.0)
    dead = GroundRobot(2, 2.1, 2.1, 0.0, failed=True)
    assert uav_visible_robots(uav, [below, off, dead]) == {0}


def test_uav_speed_cap():
    uav = Uav(9, 0.0, 0.0)
    uav.fly_towards(1.0, 0.0)
    assert uav.x == pytest.approx(0.0074)
    assert math.hypot(uav.vx, uav.vy) == pytest.approx(0.074)


def _pair(d):
    return [GroundRobot(0, 1.0, 1.0, 0.0), GroundRobot(1, 1.0 + d, 1.0, 0.0)]


def test_collision_edge_triggered():
    contacts = frozenset()
    total = 0
    for _ in range(5):
        ev, contacts = detect_collisions(_pair(0.05), contacts)
        total += len(ev)
    assert total == 1
    _, contacts = detect_collisions(_pair(0.2), contacts)
    ev, contacts = detect_collisions(_pair(0.05), contacts)
    assert total + len(ev) == 2


def test_obstacle_contact_is_not_a_collision():
    r = GroundRobot(0, 1.0, 1.0, 0.0)
    ev, _ = detect_collisions([r])
    assert ev == []
