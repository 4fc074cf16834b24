"""Energy and cost calculators over simulated completeness curves.

The bundled ``robot_specs.json`` lists commercial ground robots and UAVs
with their catalogue figures. The calculators here turn those figures
into per-charge distances, joules per metre and cost per metre, and map
completeness curves onto environment sizes and energy budgets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np

from swarmcover.errors import BeforeCurveStart, MissingField, ZeroConsumption, ZeroSpeed

GROUND_REFERENCE_SPEED = 0.068
UAV_REFERENCE_SPEED = 0.074
UAV_FLIGHT_S = 1800.0
# crossover abscissas (m travelled per m^2) of the reference campaign
REFERENCE_CROSSOVERS = {
    "centralized_over_decentralized": 0.87,
    "predetermined_over_centralized": 1.64,
    "hybrid_over_decentralized": 2.61,
}


@dataclass(frozen=True)
class RobotSpec:
    name: str
    kind: str  # "ground" | "uav"
    max_speed: float | None = None
    operating_time: float | None = None  # seconds per charge
    consumption_rate: float | None = None  # J/s
    monetary_cost: float | None = None
    currency: str | None = None
    locomotion: str | None = None
    battery_mah: float | None = None
    battery_v: float | None = None
    charging_time: float | None = None
    printed: Mapping[str, str] = field(default_factory=dict)
    raw: Mapping[str, str] = field(default_factory=dict)
    notes: str = ""

    def __post_init__(self):
        if self.kind not in ("ground", "uav"):
            raise ValueError(f"unknown robot kind {self.kind!r}")
        for name in ("max_speed", "operating_time", "consumption_rate", "monetary_cost",
                     "battery_mah", "battery_v", "charging_time"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{self.name}: {name} must be positive when present")

    @property
    def reference_speed(self) -> float:
        return GROUND_REFERENCE_SPEED if self.kind == "ground" else UAV_REFERENCE_SPEED


def _num(doc: dict, key: str, scale: float = 1.0) -> float | None:
    v = doc.get(key)
    return None if v is None else float(v) * scale


def load_specs(path=None) -> list[RobotSpec]:
    """Read the robot dataset (bundled by default)."""
    if path is None:
        text = resources.files("swarmcover.data").joinpath("robot_specs.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    doc = json.loads(text)
    out = []
    for r in doc["robots"]:
        if "flight_time_min" in r:
            op = _num(r, "flight_time_min", 60.0)
        else:
            op = _num(r, "operating_time_h", 3600.0)
        out.append(RobotSpec(
            name=r["name"], kind=r["kind"],
            max_speed=_num(r, "max_speed"), operating_time=op,
            consumption_rate=_num(r, "consumption_rate"),
            monetary_cost=_num(r, "monetary_cost"), currency=r.get("currency"),
            locomotion=r.get("locomotion"),
            battery_mah=_num(r, "battery_mah"), battery_v=_num(r, "battery_v"),
            charging_time=_num(r, "charging_time_h", 3600.0),
            printed=dict(r.get("printed", {})),
            raw={k: v for k, v in r.items() if isinstance(v, str)},
            notes=r.get("notes", ""),
        ))
    return out


def implied_eur_rates(path=None) -> dict[str, float]:
    """Currency factors implied by the dataset's printed cost-per-metre values."""
    if path is None:
        text = resources.files("swarmcover.data").joinpath("robot_specs.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    rates = json.loads(text)["implied_eur_rates"]
    return {k: float(v) for k, v in rates.items() if k != "note"}


def spec_by_name(name: str, specs: Iterable[RobotSpec] | None = None) -> RobotSpec:
    for s in specs if specs is not None else load_specs():
        if s.name == name:
            return s
    raise KeyError(name)


# ---------------------------------------------------------------- calculators


def max_distance_per_charge(spec: RobotSpec, speed: float | None = None) -> float:
    """Metres one charge lasts at ``speed`` (the robot's top speed by default)."""
    v = spec.max_speed if speed is None else speed
    if v is None:
        raise MissingField(f"{spec.name}: no speed")
    if spec.operating_time is None:
        raise MissingField(f"{spec.name}: no operating time")
    return v * spec.operating_time


def consumption_per_meter(rate: float, speed: float) -> float:
    if speed <= 0:
        raise ZeroSpeed("consumption per metre needs a positive speed")
    return rate / speed


def spec_consumption_per_meter(spec: RobotSpec) -> float:
    if spec.consumption_rate is None:
        raise MissingField(f"{spec.name}: no consumption rate")
    return consumption_per_meter(spec.consumption_rate, spec.reference_speed)


def cost_per_meter(cost: float, distance: float, rate: float = 1.0) -> float:
    """Purchase cost spread over one charge's distance, times a currency factor."""
    if distance <= 0:
        raise ZeroSpeed("cost per metre needs a positive distance")
    return cost * rate / distance


def spec_cost_per_meter(spec: RobotSpec, rates: Mapping[str, float] | None = None) -> float:
    if spec.monetary_cost is None:
        raise MissingField(f"{spec.name}: no price")
    rate = 1.0 if rates is None else rates.get(spec.currency, 1.0)
    return cost_per_meter(spec.monetary_cost, spec_reference_distance(spec), rate)


def spec_reference_distance(spec: RobotSpec) -> float:
    """Ground robots at their top speed; UAVs hovering along at the sweep speed."""
    if spec.kind == "uav":
        return max_distance_per_charge(spec, speed=UAV_REFERENCE_SPEED)
    return max_distance_per_charge(spec)


def budget_runtime(budget: float, ground_rate: float, uav_rate: float, n_ground: int, n_uav: int) -> float:
    """Seconds a shared joule budget lasts for the whole team."""
    if ground_rate < 0 or uav_rate < 0:
        raise ValueError("consumption rates must be non-negative")
    draw = n_ground * ground_rate + n_uav * uav_rate
    if draw <= 0:
        raise ZeroConsumption("nothing draws from the budget")
    return budget / draw


# ---------------------------------------------------------------- curves


@dataclass(frozen=True)
class CompletenessCurve:
    x: tuple[float, ...]
    y: tuple[float, ...]
    kind: str = "ticks"  # or "meters-per-sqm"

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        y = tuple(float(v) for v in self.y)
        if len(x) != len(y) or not x:
            raise ValueError("curve needs matching, non-empty abscissa and values")
        if any(b <= a for a, b in zip(x, x[1:])):
            raise ValueError("abscissa must be strictly increasing")
        if any(b < a for a, b in zip(y, y[1:])):
            raise ValueError("completeness must be non-decreasing")
        if max(y) > 100.0 + 1e-9:
            raise ValueError("completeness cannot exceed 100")
        if self.kind not in ("ticks", "meters-per-sqm"):
            raise ValueError(f"unknown abscissa kind {self.kind!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_series(cls, xs: Sequence[float], ys: Sequence[float], kind: str = "ticks") -> "CompletenessCurve":
        """Build from raw samples: keeps the first sample per abscissa and a running max."""
        px, py = [], []
        best = -math.inf
        for x, y in zip(xs, ys):
            best = max(best, float(y))
            if px and x <= px[-1]:
                py[-1] = best
                continue
            px.append(float(x))
            py.append(best)
        return cls(tuple(px), tuple(py), kind)


def completeness_at(curve: CompletenessCurve, x: float) -> float:
    if x < curve.x[0]:
        raise BeforeCurveStart(f"{x} precedes the first sample at {curve.x[0]}")
    if x >= curve.x[-1]:
        return curve.y[-1]
    return float(np.interp(x, curve.x, curve.y))


def _leader(curves: Mapping[str, CompletenessCurve], names: list[str], x: float, eps: float,
            incumbent: str | None) -> str:
    vals = {n: completeness_at(curves[n], x) for n in names}
    top = max(vals.values())
    if incumbent is not None and vals[incumbent] >= top - eps:
        return incumbent
    return next(n for n in names if vals[n] == top)


def _bisect(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    flo = f(lo)
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0) and fm != 0:
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def crossover_thresholds(curves: Mapping[str, CompletenessCurve], eps: float = 1e-9) -> list[tuple[float, str]]:
    """Abscissas where the best-performing approach changes, in order.

    Each entry is ``(x, approach that takes the lead)``. Ties keep the
    incumbent, so identical curves yield nothing.
    """
    names = list(curves)
    if len(names) < 2:
        return []
    lo = max(c.x[0] for c in curves.values())
    knots = sorted({x for c in curves.values() for x in c.x if x >= lo})
    if not knots:
        return []
    out = []
    lead = _leader(curves, names, knots[0], eps, None)
    for a, b in zip(knots, knots[1:]):
        # between knots every curve is linear, so each pair crosses at most once
        nxt = _leader(curves, names, b, eps, lead)
        if nxt == lead:
            continue
        old = lead
        x = _bisect(lambda t: completeness_at(curves[nxt], t) - completeness_at(curves[old], t) - eps, a, b)
        out.append((x, nxt))
        lead = nxt
    return out


def pairwise_crossover(a: CompletenessCurve, b: CompletenessCurve) -> float | None:
    """First abscissa where ``b`` overtakes ``a``, or None."""
    lo = max(a.x[0], b.x[0])
    knots = sorted({x for x in a.x + b.x if x >= lo})
    diff = lambda t: completeness_at(b, t) - completeness_at(a, t)
    prev = knots[0]
    if diff(prev) > 0:
        return None
    for x in knots[1:]:
        if diff(x) > 0:
            return _bisect(diff, prev, x)
        prev = x
    return None


# ---------------------------------------------------------------- sizing


@dataclass(frozen=True)
class AreaBuckets:
    """Area per robot (m^2) separating the regimes of relative performance."""

    distance: float
    decentralized_top_above: float
    centralized_formation_top: tuple[float, float]
    fully_centralized_top_below: float
    hybrid_beats_decentralized_below: float


def area_thresholds(crossovers: Sequence[float], distance: float | None = None,
                    speed: float | None = None, uav_flight_s: float = UAV_FLIGHT_S) -> list[float]:
    """Per-robot area at which the distance budget equals each crossover."""
    if (distance is None) == (speed is None):
        raise ValueError("give exactly one of distance or speed")
    d = distance if distance is not None else speed * uav_flight_s
    return [d / c for c in crossovers]


def area_buckets(distance: float | None = None, speed: float | None = None,
                 crossovers: Mapping[str, float] = REFERENCE_CROSSOVERS,
                 uav_flight_s: float = UAV_FLIGHT_S) -> AreaBuckets:
    c = crossovers
    dec, cen, hyb = area_thresholds(
        [c["centralized_over_decentralized"], c["predetermined_over_centralized"], c["hybrid_over_decentralized"]],
        distance=distance, speed=speed, uav_flight_s=uav_flight_s)
    d = distance if distance is not None else speed * uav_flight_s
    return AreaBuckets(d, dec, (cen, dec), cen, hyb)


def budget_completeness(curve: CompletenessCurve, budget: float, ground_rate: float, uav_rate: float,
                        n_ground: int, n_uav: int, dt: float = 0.1) -> float:
    """Completeness reached before a shared budget runs out (tick-indexed curve)."""
    if curve.kind != "ticks":
        raise ValueError("budget analysis needs a tick-indexed curve")
    ticks = budget_runtime(budget, ground_rate, uav_rate, n_ground, n_uav) / dt
    return completeness_at(curve, max(ticks, curve.x[0]))
