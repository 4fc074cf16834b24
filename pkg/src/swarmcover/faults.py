"""Scheduled robot failures."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from swarmcover.errors import ConfigInvalid, UnknownRobot

PAPER_FAILURE_TICK = 400
PAPER_FAILURE_COUNTS = (1, 3, 5, 7, 8)


@dataclass(frozen=True)
class FailureSchedule:
    """``(tick, robot id)`` pairs; each robot fails at most once."""

    events: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        ids = [r for _, r in self.events]
        if len(ids) != len(set(ids)):
            raise ConfigInvalid(f"duplicate robot in failure schedule: {sorted(ids)}")
        if any(t < 0 for t, _ in self.events):
            raise ConfigInvalid("failure ticks must be non-negative")

    def at(self, tick: int) -> list[int]:
        return sorted(r for t, r in self.events if t == tick)

    def validate(self, horizon: int, robot_ids) -> None:
        known = set(robot_ids)
        for t, r in self.events:
            if r not in known:
                raise UnknownRobot(r)
            if t > horizon:
                raise ConfigInvalid(f"failure at tick {t} is past the horizon {horizon}")

    @classmethod
    def random(cls, rng: np.random.Generator, robot_ids, count: int, tick: int = PAPER_FAILURE_TICK):
        """``count`` victims drawn uniformly without replacement."""
        ids = sorted(robot_ids)
        if not 0 <= count <= len(ids):
            raise ConfigInvalid(f"cannot fail {count} of {len(ids)} robots")
        victims = rng.choice(ids, size=count, replace=False) if count else []
        return cls(tuple((tick, int(v)) for v in sorted(victims)))


def inject_failures(schedule: FailureSchedule, robots, tick: int) -> list[int]:
    """Mark the robots scheduled for ``tick`` as failed; returns their ids.

    ``robots`` is a sequence or mapping of bodies with ``id`` and ``failed``.
    """
    by_id = {r.id: r for r in (robots.values() if isinstance(robots, dict) else robots)}
    hit = []
    for rid in schedule.at(tick):
        if rid not in by_id:
            raise UnknownRobot(rid)
        body = by_id[rid]
        if not body.failed:
            body.failed = True
            if hasattr(body, "speed"):
                body.speed = 0.0
            hit.append(rid)
    return hit
