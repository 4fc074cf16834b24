import itertools
import math

import numpy as np
import pytest

from swarmcover.errors import PlacementInfeasible
from swarmcover.world import (
    Arena,
    CoverageGrid,
    Rect,
    boundary_clearance,
    cell_of,
    default_start_region,
    footprint_clearance,
    load_arena,
    place_obstacles,
    place_robots,
    record_visit,
    rng_stream,
    save_arena,
)


def test_default_arena():
    a = Arena()
    assert a.n_cells == 256
    assert a.cell_m == 0.25
    assert a.cell_m * a.grid_n == a.side_m


def test_invalid_arena():
    with pytest.raises(ValueError):
        Arena(0.0, 16)


def test_streams_are_independent_and_repeatable():
    a = rng_stream(3, "placement").uniform(size=5)
    b = rng_stream(3, "placement").uniform(size=5)
    c = rng_stream(3, "controller").uniform(size=5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_no_obstacles():
    assert place_obstacles(rng_stream(1, "placement"), 0) == []


@pytest.mark.parametrize("count", [100, 300])
def test_obstacle_buffers(count):
    arena = Arena()
    obs = place_obstacles(rng_stream(1, "placement"), count, arena)
    assert len(obs) == count
    assert min(boundary_clearance(o, arena) for o in obs) >= 0.15
    for a, b in itertools.combinations(obs, 2):
        if math.hypot(a.x - b.x, a.y - b.y) < 0.3:
            assert footprint_clearance(a, b) >= 0.15


def test_obstacle_placement_deterministic():
    a = place_obstacles(rng_stream(1, "placement"), 300)
    b = place_obstacles(rng_stream(1, "placement"), 300)
    assert a == b


def test_overfull_arena_is_infeasible():
    with pytest.raises(PlacementInfeasible):
        place_obstacles(rng_stream(1, "placement"), 2000)


def test_place_nine_robots():
    arena = Arena()
    region = default_start_region(arena)
    assert (region.width, region.height) == (1.25, 1.0)
    poses = place_robots(rng_stream(0, "initial-poses"), 9, region, arena)
    assert len(poses) == 9
    for p in poses:
        assert region.contains(p.x, p.y)
        assert 0 <= p.theta < 2 * math.pi
    for p, q in itertools.combinations(poses, 2):
        assert math.hypot(p.x - q.x, p.y - q.y) >= 0.05
    again = place_robots(rng_stream(0, "initial-poses"), 9, region, arena)
    assert poses == again


def test_place_single_robot():
    region = Rect(1.0, 1.0, 1.2, 1.2)
    (p,) = place_robots(rng_stream(5, "initial-poses"), 1, region)
    assert region.contains(p.x, p.y)


def test_robots_that_cannot_fit():
    with pytest.raises(PlacementInfeasible):
        place_robots(rng_stream(0, "initial-poses"), 5, Rect(0, 0, 0.1, 0.1), max_rejections=1000)


@pytest.mark.parametrize(
    "point, cell",
    [((0.10, 0.10), (0, 0)), ((3.99, 3.99), (15, 15)), ((0.25, 0.25), (1, 1)), ((4.0, 4.0), (15, 15))],
)
def test_cell_of(point, cell):
    assert cell_of(*point) == cell


def test_cell_of_outside():
    assert cell_of(-0.01, 1.0) is None
    assert cell_of(1.0, 4.01) is None


def test_record_visit():
    g = record_visit(CoverageGrid(), (0, 0), 1)
    assert g.visits[0, 0] == 1
    assert g.visits.sum() == 1
    record_visit(g, (3, 4))
    record_visit(g, (3, 4))
    assert g.visits[3, 4] == 2
    with pytest.raises(ValueError):
        record_visit(g, (0, 0), -1)


def test_arena_json_round_trip(tmp_path):
    arena = Arena()
    obs = place_obstacles(rng_stream(2, "placement"), 20, arena)
    path = tmp_path / "arena.json"
    save_arena(path, arena, obs)
    a2, o2 = load_arena(path)
    assert a2 == arena
    assert o2 == obs
