import pytest

from swarmcover import energy
from swarmcover.errors import BeforeCurveStart, MissingField, ZeroConsumption, ZeroSpeed


@pytest.fixture(scope="module")
def specs():
    return energy.load_specs()


def test_dataset_shape(specs):
    assert len(specs) == 16
    assert sum(s.kind == "uav" for s in specs) == 5
    assert energy.implied_eur_rates() == {"EUR": 1.0, "CHF": 1.0, "USD": 0.836}


def test_epuck_distance(specs):
    d = energy.max_distance_per_charge(energy.spec_by_name("e-puck2", specs))
    assert d == pytest.approx(1663.2)


def test_spot_distance(specs):
    assert energy.max_distance_per_charge(energy.spec_by_name("Spot Explorer", specs)) == pytest.approx(8640)


def test_zero_speed_distance(specs):
    assert energy.max_distance_per_charge(energy.spec_by_name("e-puck2", specs), speed=0.0) == 0.0


def test_missing_speed(specs):
    with pytest.raises(MissingField):
        energy.max_distance_per_charge(energy.spec_by_name("U49WF FPV", specs))


def test_consumption_per_meter():
    assert round(energy.consumption_per_meter(2.9, 0.068)) == 43
    assert energy.consumption_per_meter(32.0, 0.068) == pytest.approx(470.6, abs=0.1)
    assert energy.consumption_per_meter(0.0, 0.068) == 0.0
    with pytest.raises(ZeroSpeed):
        energy.consumption_per_meter(1.0, 0.0)


def test_missing_consumption(specs):
    for name in ("ECA Group Cameleon C", "ASI Chaos"):
        with pytest.raises(MissingField):
            energy.spec_consumption_per_meter(energy.spec_by_name(name, specs))


def test_cost_per_meter(specs):
    epuck = energy.spec_by_name("e-puck2", specs)
    assert energy.spec_cost_per_meter(epuck, energy.implied_eur_rates()) == pytest.approx(850 / 1663.2)
    with pytest.raises(MissingField):
        energy.spec_cost_per_meter(energy.spec_by_name("SMP Rover S5 PTZ", specs))


def test_budget_runtime():
    assert energy.budget_runtime(200e3, 3, 6, 9, 0) == pytest.approx(7407.4, abs=0.1)
    assert energy.budget_runtime(200e3, 3, 6, 9, 3) == pytest.approx(4444.4, abs=0.1)
    assert energy.budget_runtime(400e3, 3, 6, 9, 3) == 2 * energy.budget_runtime(200e3, 3, 6, 9, 3)
    with pytest.raises(ZeroConsumption):
        energy.budget_runtime(200e3, 0, 0, 9, 3)


def test_spec_validation():
    with pytest.raises(ValueError):
        energy.RobotSpec("x", "ground", max_speed=-1.0)
    with pytest.raises(ValueError):
        energy.RobotSpec("x", "boat")


CURVE = energy.CompletenessCurve((0.0, 1.0, 2.0), (0.0, 50.0, 60.0))


def test_completeness_at():
    assert energy.completeness_at(CURVE, 1.0) == 50.0
    assert energy.completeness_at(CURVE, 0.5) == 25.0
    assert energy.completeness_at(CURVE, 1.5) == 55.0
    assert energy.completeness_at(CURVE, 9.0) == 60.0
    with pytest.raises(BeforeCurveStart):
        energy.completeness_at(CURVE, -0.1)


@pytest.mark.parametrize(
    "x, y",
    [((0, 0), (1, 2)), ((1, 0), (1, 2)), ((0, 1), (2, 1)), ((0, 1), (50, 101)), ((0,), ())],
)
def test_curve_validation(x, y):
    with pytest.raises(ValueError):
        energy.CompletenessCurve(x, y)


def test_curve_from_raw_series():
    c = energy.CompletenessCurve.from_series([0, 1, 1, 2], [0, 10, 5, 8])
    assert c.x == (0.0, 1.0, 2.0)
    assert c.y == (0.0, 10.0, 10.0)


def test_identical_curves_never_cross():
    assert energy.crossover_thresholds({"a": CURVE, "b": CURVE}) == []


def test_linear_crossing():
    a = energy.CompletenessCurve((0.0, 4.0), (20.0, 40.0))
    b = energy.CompletenessCurve((0.0, 4.0), (10.0, 50.0))
    # 20 + 5x = 10 + 10x at x = 2
    ((x, who),) = energy.crossover_thresholds({"a": a, "b": b})
    assert who == "b"
    assert x == pytest.approx(2.0, abs=1e-6)
    assert energy.pairwise_crossover(a, b) == pytest.approx(2.0, abs=1e-6)
    assert energy.pairwise_crossover(b, a) is None


def _piecewise(points):
    xs, ys = zip(*points)
    return energy.CompletenessCurve(xs, ys, "meters-per-sqm")


def test_reference_crossover_sequence():
    # curves shaped so the leader changes at 0.87, 1.64 and 2.61
    curves = {
        "decentralized": _piecewise([(0, 0), (0.87, 60), (1.64, 70), (2.61, 80), (4, 85)]),
        "centralized_formation": _piecewise([(0, 0), (0.87, 60), (1.64, 80), (2.61, 84), (4, 86)]),
        "predetermined": _piecewise([(0, 0), (0.87, 50), (1.64, 80), (2.61, 95), (4, 99)]),
        "hybrid_mns": _piecewise([(0, 0), (0.87, 40), (1.64, 60), (2.61, 80), (4, 90)]),
    }
    got = energy.crossover_thresholds(curves, eps=1e-9)
    assert [w for _, w in got] == ["centralized_formation", "predetermined"]
    assert [x for x, _ in got] == pytest.approx([0.87, 1.64], abs=1e-6)
    hyb = energy.pairwise_crossover(curves["decentralized"], curves["hybrid_mns"])
    assert hyb == pytest.approx(2.61, abs=1e-6)


def test_area_thresholds():
    assert energy.area_thresholds([0.87], distance=2000)[0] == pytest.approx(2298.85, abs=0.01)
    assert energy.area_thresholds([2.61], speed=0.15)[0] == pytest.approx(103.45, abs=0.01)
    assert energy.area_thresholds([1.0], distance=1000) == [1000.0]
    with pytest.raises(ValueError):
        energy.area_thresholds([1.0])


def test_area_buckets():
    b = energy.area_buckets(distance=2000)
    assert b.centralized_formation_top == (b.fully_centralized_top_below, b.decentralized_top_above)


def test_budget_completeness():
    curve = energy.CompletenessCurve((0, 10000, 20000), (0, 50, 100))
    # 200 kJ over 27 W lasts 7407 s, i.e. 74074 ticks
    assert energy.budget_completeness(curve, 200e3, 3, 6, 9, 0) == 100
    assert energy.budget_completeness(curve, 27e3, 3, 6, 9, 0) == pytest.approx(50)
    with pytest.raises(ValueError):
        energy.budget_completeness(_piecewise([(0, 0), (1, 1)]), 1, 1, 1, 1, 0)
