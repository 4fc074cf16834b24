"""Counterclockwise perimeter sweep for a line formation.

The brain UAV (or the centralized leader) carries a motion reference around
the arena with the formation line held perpendicular to the nearest wall.
The line's outer end rides the outermost cell centreline, so each leg sweeps
a band as wide as the formation. At a corner the line swings 90 degrees about
the reference while the reference dips towards the corner, which carries the
outer slot through the corner cell.

The program is a pure function of arena size and formation shape, so the
round length is the same in every run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from swarmcover.bodies import TICK_S

PITCH = 0.25
ZIGZAG = 0.125
SLOT_SPEED = 0.054
ESTABLISH_TICKS = 400
CORNER_DIP = 0.26


@dataclass(frozen=True)
class FormationSlot:
    """Offset of one slot from the motion reference.

    ``lateral`` points towards the wall being followed (right of travel),
    ``longitudinal`` along the travel direction.
    """

    index: int
    lateral: float
    longitudinal: float


def default_slots(n: int, pitch: float = PITCH, zigzag: float = ZIGZAG) -> list[FormationSlot]:
    """Line of ``n`` slots at ``pitch`` with alternating fore/aft stagger."""
    mid = (n - 1) / 2
    return [
        FormationSlot(k, (k - mid) * pitch, zigzag if k % 2 == 0 else -zigzag)
        for k in range(n)
    ]


def _half_span(slots) -> float:
    return max(abs(s.lateral) for s in slots)


@dataclass(frozen=True)
class SweepProgram:
    """Tick-indexed reference pose and slot targets for one circuit.

    ``ref[t]`` and ``heading[t]`` give the reference at tick ``t`` measured
    from the start of the run (the establishment hold included).
    ``targets[t, k]`` is slot ``k``'s world position.
    """

    side_m: float
    n_slots: int
    establish_ticks: int
    ref: np.ndarray
    heading: np.ndarray
    targets: np.ndarray
    margin: float
    legs: tuple = field(default=(), compare=False)

    @property
    def round_ticks(self) -> int:
        return len(self.ref) - 1

    @property
    def start_ref(self) -> tuple[float, float]:
        return tuple(self.ref[0])

    def at(self, tick: int):
        """Reference, heading and slot targets; repeats the circuit after a round."""
        if tick <= self.round_ticks:
            i = max(tick, 0)
        else:
            loop = self.round_ticks - self.establish_ticks
            i = self.establish_ticks + (tick - self.establish_ticks) % loop
        return self.ref[i], float(self.heading[i]), self.targets[i]

    def velocity(self, tick: int) -> tuple[float, float]:
        a, _, _ = self.at(tick)
        b, _, _ = self.at(tick + 1)
        return ((b[0] - a[0]) / TICK_S, (b[1] - a[1]) / TICK_S)


def _slot_world(ref, heading, slots, lo, hi):
    tx, ty = math.cos(heading), math.sin(heading)
    # right-hand normal of the travel direction points at the wall
    nx, ny = ty, -tx
    out = np.empty((len(slots), 2))
    for k, s in enumerate(slots):
        out[k, 0] = ref[0] + s.lateral * nx + s.longitudinal * tx
        out[k, 1] = ref[1] + s.lateral * ny + s.longitudinal * ty
    np.clip(out, lo, hi, out=out)
    return out


def _segments(side: float, w: float, dip: float):
    """Continuous pieces of the circuit as functions sigma -> (ref, heading)."""
    lo, hi, mid = w, side - w, side / 2
    pieces = []

    def leg(a, b, heading):
        return lambda u: ((a[0] + (b[0] - a[0]) * u, a[1] + (b[1] - a[1]) * u), heading)

    def corner(c, h0, diag):
        dx, dy = diag[0] / math.sqrt(2), diag[1] / math.sqrt(2)

        def f(u):
            d = dip * math.sin(math.pi * u)
            return (c[0] + d * dx, c[1] + d * dy), h0 + u * math.pi / 2

        return f

    south, east, north, west = -math.pi / 2, 0.0, math.pi / 2, math.pi
    pieces.append(leg((lo, mid), (lo, lo), south))
    pieces.append(corner((lo, lo), south, (-1, -1)))
    pieces.append(leg((lo, lo), (hi, lo), east))
    pieces.append(corner((hi, lo), east, (1, -1)))
    pieces.append(leg((hi, lo), (hi, hi), north))
    pieces.append(corner((hi, hi), north, (1, 1)))
    pieces.append(leg((hi, hi), (lo, hi), west))
    pieces.append(corner((lo, hi), west, (-1, 1)))
    pieces.append(leg((lo, hi), (lo, mid), -math.pi / 2 + 2 * math.pi))
    return pieces


@lru_cache(maxsize=32)
def build_sweep(
    side_m: float = 4.0,
    n_slots: int = 9,
    cell_m: float = 0.25,
    pitch: float = PITCH,
    zigzag: float = ZIGZAG,
    slot_speed: float = SLOT_SPEED,
    establish_ticks: int = ESTABLISH_TICKS,
    dip: float = CORNER_DIP,
    samples: int = 4000,
) -> SweepProgram:
    """Precompute one circuit, time-scaled so no slot target exceeds ``slot_speed``."""
    slots = default_slots(n_slots, pitch, zigzag)
    margin = cell_m / 2
    w = margin + _half_span(slots)
    lo, hi = margin, side_m - margin
    step = slot_speed * TICK_S

    ref_out = [(w, side_m / 2)] * (establish_ticks + 1)
    head_out = [-math.pi / 2] * (establish_ticks + 1)
    legs = []
    for piece in _segments(side_m, w, dip):
        # fine parameter grid and the slot path length along it
        us = np.linspace(0.0, 1.0, samples + 1)
        poses = [piece(u) for u in us]
        pts = np.array([_slot_world(p, h, slots, lo, hi) for p, h in poses])
        refs = np.array([p for p, _ in poses])
        # the reference itself must also respect the speed limit
        moves = np.maximum(
            np.linalg.norm(np.diff(pts, axis=0), axis=2).max(axis=1),
            np.linalg.norm(np.diff(refs, axis=0), axis=1),
        )
        clock = np.concatenate([[0.0], np.cumsum(moves)]) / step
        n_ticks = max(1, math.ceil(clock[-1] - 1e-9))
        start = len(ref_out) - 1
        for t in range(1, n_ticks + 1):
            u = float(np.interp(t * clock[-1] / n_ticks, clock, us))
            p, h = piece(u)
            ref_out.append(p)
            head_out.append(h)
        legs.append((start, len(ref_out) - 1))

    ref = np.array(ref_out)
    heading = np.array(head_out)
    targets = np.array([_slot_world(p, h, slots, lo, hi) for p, h in zip(ref, heading)])
    return SweepProgram(side_m, n_slots, establish_ticks, ref, heading, targets, margin, tuple(legs))
