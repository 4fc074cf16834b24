"""Experiment configuration and its JSON schema."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from swarmcover.errors import ConfigInvalid

APPROACHES = ("decentralized", "hybrid_mns", "centralized_formation", "predetermined")
DEFAULT_UAVS = {"decentralized": 0, "hybrid_mns": 3, "centralized_formation": 1, "predetermined": 1}
DECENTRALIZED_HORIZON = 11000
# (n_uav, n_ground) for the scalability campaign
PRESETS = {"2+4": (2, 4), "4+8": (4, 8), "6+12": (6, 12)}

SCHEMA = {
    "approach": f"one of {', '.join(APPROACHES)} (required)",
    "n_ground": "int >= 1, default 9",
    "n_uav": "int >= 0, default by approach (0/3/1/1)",
    "preset": f"optional, one of {', '.join(PRESETS)}; sets n_uav and n_ground",
    "obstacle_count": "int >= 0, default 100",
    "seed": "int, default 0",
    "seeds": "batch only: 'a..b' inclusive range or a list of ints",
    "horizon_ticks": "int or null; null runs to round end (decentralized: 11000)",
    "failures": "list of {tick, count} (seeded victims) or {tick, ids: [..]}",
    "reports": "bool, predetermined per-tick reports, default true",
    "side_m": "float, default 4.0",
    "grid_n": "int, default 16",
    "out_dir": "optional output directory",
}


def schema_text() -> str:
    return "experiment.json fields:\n" + "\n".join(f"  {k}: {v}" for k, v in SCHEMA.items())


@dataclass(frozen=True)
class ExperimentConfig:
    approach: str
    n_ground: int = 9
    n_uav: int | None = None
    obstacle_count: int = 100
    seed: int = 0
    horizon_ticks: int | None = None
    failures: tuple = ()
    reports: bool = True
    side_m: float = 4.0
    grid_n: int = 16
    out_dir: str | None = None

    def __post_init__(self):
        if self.approach not in APPROACHES:
            raise ConfigInvalid(f"unknown approach {self.approach!r}")
        if self.n_uav is None:
            object.__setattr__(self, "n_uav", DEFAULT_UAVS[self.approach])
        if self.n_ground < 1:
            raise ConfigInvalid("n_ground must be at least 1")
        if self.n_uav < 0:
            raise ConfigInvalid("n_uav must be non-negative")
        if self.approach == "decentralized" and self.n_uav:
            raise ConfigInvalid("the decentralized approach has no UAVs")
        if self.approach in ("centralized_formation", "predetermined") and self.n_uav != 1:
            raise ConfigInvalid(f"{self.approach} uses exactly one UAV hub")
        if self.approach == "hybrid_mns" and self.n_uav < 1:
            raise ConfigInvalid("hybrid_mns needs at least one UAV")
        if self.obstacle_count < 0:
            raise ConfigInvalid("obstacle_count must be non-negative")
        if self.horizon_ticks is not None and self.horizon_ticks < 1:
            raise ConfigInvalid("horizon_ticks must be positive")
        fails = tuple(_freeze_failure(f) for f in self.failures)
        object.__setattr__(self, "failures", fails)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=int(seed))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["failures"] = [dict(f) for f in self.failures]
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigInvalid("configuration must be a JSON object")
        doc = dict(doc)
        doc.pop("seeds", None)
        preset = doc.pop("preset", None)
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigInvalid(f"unknown preset {preset!r}")
            doc["n_uav"], doc["n_ground"] = PRESETS[preset]
        if "approach" not in doc:
            raise ConfigInvalid("missing field 'approach'")
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigInvalid(f"unknown fields: {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigInvalid(str(exc)) from exc


def _freeze_failure(f) -> tuple:
    if isinstance(f, tuple):
        f = dict(f)
    if not isinstance(f, dict) or "tick" not in f:
        raise ConfigInvalid(f"failure entry needs a tick: {f!r}")
    if ("count" in f) == ("ids" in f):
        raise ConfigInvalid(f"failure entry needs exactly one of count or ids: {f!r}")
    out = {"tick": int(f["tick"])}
    if "count" in f:
        out["count"] = int(f["count"])
    else:
        out["ids"] = tuple(int(i) for i in f["ids"])
    return tuple(sorted(out.items()))


def parse_seeds(spec) -> list[int]:
    """``'a..b'`` inclusive, a single int, or a list of ints."""
    if isinstance(spec, int):
        return [spec]
    if isinstance(spec, (list, tuple)):
        return [int(s) for s in spec]
    if isinstance(spec, str):
        if ".." in spec:
            a, b = spec.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ConfigInvalid(f"empty seed range {spec!r}")
            return list(range(lo, hi + 1))
        return [int(spec)]
    raise ConfigInvalid(f"cannot read seeds from {spec!r}")


def load_config(path: str | Path) -> tuple[ExperimentConfig, list[int] | None]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read {path}: {exc}") from exc
    seeds = parse_seeds(doc["seeds"]) if isinstance(doc, dict) and "seeds" in doc else None
    return ExperimentConfig.from_dict(doc), seeds
