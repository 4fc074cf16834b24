"""Property-based checks of the core invariants."""

import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from swarmcover import energy
from swarmcover.bodies import GroundRobot, Kind, Scene, Uav, detect_collisions, proximity_scan, step_differential_drive
from swarmcover.controllers.decentralized import draw_bounce_heading, inward_component
from swarmcover.controllers.lanes import decompose_lanes
from swarmcover.metrics import completeness, uniformity
from swarmcover.network import TrafficLedger, empty_mns, link_messages, mns_merge, mns_update_links, route_and_count
from swarmcover.world import Arena, CoverageGrid, Obstacle, cell_of

visits = arrays(np.int64, st.integers(1, 300), elements=st.integers(0, 10_000))
coords = st.floats(0.0, 4.0, allow_nan=False)


def brute_uniformity(v):
    s = sorted(v)
    n = len(s)
    med = s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2
    return sum(math.sqrt(abs(x - med)) for x in v) / n


@given(visits)
def test_uniformity_matches_reference(v):
    assert math.isclose(uniformity(v), brute_uniformity(v.tolist()), rel_tol=1e-12, abs_tol=1e-12)


@given(visits, st.randoms(use_true_random=False), st.integers(0, 1000))
def test_uniformity_permutation_and_shift(v, rnd, k):
    p = uniformity(v)
    w = v.tolist()
    rnd.shuffle(w)
    assert math.isclose(uniformity(w), p, rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(uniformity(v + k), p, rel_tol=1e-12, abs_tol=1e-12)
    assert p >= 0


@given(st.lists(st.tuples(st.integers(0, 15), st.integers(0, 15), st.integers(0, 3)), max_size=60))
def test_completeness_monotone(cells):
    g = CoverageGrid()
    last = 0.0
    for ix, iy, dt in cells:
        g.record_visit((ix, iy), dt)
        now = completeness(g)
        assert now >= last
        last = now
    assert g.visits.sum() == sum(dt for *_, dt in cells)


@given(coords, coords)
def test_cell_of_contains_point(x, y):
    ix, iy = cell_of(x, y)
    assert 0 <= ix < 16 and 0 <= iy < 16
    assert ix * 0.25 <= x and (x < (ix + 1) * 0.25 or ix == 15)
    assert iy * 0.25 <= y and (y < (iy + 1) * 0.25 or iy == 15)


@st.composite
def scenes(draw):
    obstacles = [
        Obstacle(draw(st.floats(0.3, 3.7)), draw(st.floats(0.3, 3.7)), draw(st.floats(0, math.pi / 2)))
        for _ in range(draw(st.integers(0, 12)))
    ]
    robots = []
    for i in range(draw(st.integers(1, 6))):
        x, y = draw(st.floats(0.03, 3.97)), draw(st.floats(0.03, 3.97))
        r = GroundRobot(i, x, y, draw(st.floats(-math.pi, math.pi)))
        free = all(o.distance_to(x, y) >= r.body_radius for o in obstacles) and all(
            math.hypot(x - q.x, y - q.y) >= 0.05 for q in robots
        )
        if free:
            robots.append(r)
    assume(robots)
    return Scene(Arena(), obstacles, robots)


def _penetration(scene, r):
    s = scene.arena.side_m
    worst = max(r.body_radius - r.x, r.body_radius - r.y, r.x + r.body_radius - s, r.y + r.body_radius - s)
    for o in scene.obstacles:
        worst = max(worst, r.body_radius - o.distance_to(r.x, r.y))
    for q in scene.robots:
        if q is not r:
            worst = max(worst, 0.05 - math.hypot(r.x - q.x, r.y - q.y))
    return worst


@settings(max_examples=60, deadline=None)
@given(scenes(), st.lists(st.tuples(st.floats(-0.1, 0.1), st.floats(-0.1, 0.1)), min_size=1, max_size=40))
def test_motion_never_penetrates(scene, wheels):
    for left, right in wheels:
        for r in scene.robots:
            odo = r.odometer
            step_differential_drive(r, left, right, scene=scene)
            assert r.speed <= r.cruise_speed + 1e-12
            assert r.odometer >= odo
            assert _penetration(scene, r) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(scenes())
def test_scan_matches_brute_force(scene):
    s = scene.arena.side_m
    for r in scene.robots:
        got = {(d.kind, d.source): d.range for d in proximity_scan(r, scene)}
        want = {}
        for name, gap in (("west", r.x), ("east", s - r.x), ("south", r.y), ("north", s - r.y)):
            if gap - r.body_radius <= r.sense_range:
                want[(Kind.BOUNDARY, name)] = gap - r.body_radius
        for i, o in enumerate(scene.obstacles):
            gap = o.distance_to(r.x, r.y) - r.body_radius
            if gap <= r.sense_range:
                want[(Kind.OBSTACLE, i)] = gap
        for q in scene.robots:
            gap = math.hypot(r.x - q.x, r.y - q.y) - 0.05
            if q is not r and gap <= r.sense_range:
                want[(Kind.ROBOT, q.id)] = gap
        assert got.keys() == want.keys()
        for k in got:
            assert math.isclose(got[k], max(want[k], 0.0), abs_tol=1e-12)


@given(coords, coords, coords, coords)
def test_uav_view_is_the_rectangle(ux, uy, gx, gy):
    inside = abs(gx - ux) <= 0.75 and abs(gy - uy) <= 0.875
    assert Uav(9, ux, uy).sees(gx, gy) == inside


@given(st.sampled_from(["west", "east", "south", "north"]), st.integers(0, 2**32))
def test_bounce_points_inwards(wall, seed):
    rng = np.random.default_rng(seed)
    for _ in range(20):
        assert inward_component(draw_bounce_heading(wall, rng), wall) > 0


@given(st.lists(st.tuples(coords, coords), min_size=2, max_size=8))
def test_collisions_are_edge_triggered(points):
    robots = [GroundRobot(i, x, y, 0.0) for i, (x, y) in enumerate(points)]
    first, contacts = detect_collisions(robots)
    again, same = detect_collisions(robots, contacts)
    assert again == [] and same == contacts
    assert len(first) == len(contacts)


@given(st.integers(1, 16))
def test_lanes_partition_the_grid(n):
    plan = decompose_lanes(n)
    cells = [plan.cells_of(k) for k in range(n)]
    assert sum(len(c) for c in cells) == 256
    assert set().union(*cells) == {(i, j) for i in range(16) for j in range(16)}
    widths = plan.widths()
    assert max(widths) - min(widths) <= 1


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.tuples(st.floats(0.2, 3.8), st.floats(0.2, 3.8)), min_size=1, max_size=6),
    st.lists(st.tuples(st.floats(0.1, 3.9), st.floats(0.1, 3.9)), min_size=1, max_size=12),
    st.integers(1, 4),
)
def test_mns_stays_a_caterpillar(uav_xy, ground_xy, rounds):
    uavs = [Uav(100 + i, x, y) for i, (x, y) in enumerate(uav_xy)]
    ground = [GroundRobot(i, x, y, 0.0) for i, (x, y) in enumerate(ground_xy)]
    topo = empty_mns([u.id for u in uavs], [g.id for g in ground])
    ledger = TrafficLedger()
    for t in range(rounds):
        topo = mns_merge(mns_update_links(uavs, ground, topo))
        assert topo.is_caterpillar()
        assert all(topo.degree(u.id) <= 5 for u in uavs)
        for root, members in topo.trees().items():
            assert root == min(m for m in members if m in topo.uavs)
        for c, p in topo.parent.items():
            if c not in topo.uavs:
                assert c in topo.visible[p]
        route_and_count(link_messages(topo, t), ledger, topo, tick=t)
        assert ledger.running_max <= 10
    assert sum(ledger.sent.values()) == sum(ledger.totals)
    assert ledger.running_max == max(ledger.max_per_robot)


@given(st.floats(1, 1e7), st.floats(0, 100), st.floats(0, 100), st.integers(0, 20), st.integers(0, 6))
def test_budget_runtime_homogeneous(budget, g, u, ng, nu):
    assume(ng * g + nu * u > 0)
    a = energy.budget_runtime(budget, g, u, ng, nu)
    assert math.isclose(energy.budget_runtime(2 * budget, g, u, ng, nu), 2 * a, rel_tol=1e-12)


@given(st.lists(st.floats(0, 10), min_size=2, max_size=20), st.floats(0, 1))
def test_curve_interpolation_bounded(steps, frac):
    ys = np.minimum(np.cumsum(steps), 100.0)
    xs = np.arange(len(ys), dtype=float)
    curve = energy.CompletenessCurve(xs, ys)
    x = frac * xs[-1]
    val = energy.completeness_at(curve, x)
    i = min(int(x), len(ys) - 2)
    assert ys[i] - 1e-9 <= val <= ys[i + 1] + 1e-9


@given(st.floats(0.5, 3.5), st.floats(0, 2))
def test_linear_crossover_is_analytic(x0, slope):
    # b climbs 10 points per unit faster than a and meets it at x0
    a = energy.CompletenessCurve((0.0, 4.0), (50.0, 50.0 + 4 * slope))
    b0 = 50.0 - 10 * x0
    b = energy.CompletenessCurve((0.0, 4.0), (b0, b0 + 4 * (slope + 10)))
    x = energy.pairwise_crossover(a, b)
    assert x is not None and math.isclose(x, x0, abs_tol=1e-6)
