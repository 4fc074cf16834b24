"""One simulation run: setup, the per-tick loop, and its result record."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from swarmcover.bodies import (
    GroundRobot,
    Scene,
    Uav,
    UavRole,
    detect_collisions,
    proximity_scan,
    step_differential_drive,
)
from swarmcover.controllers.decentralized import DecentralizedState, decentralized_step
from swarmcover.controllers.formation import (
    SweepState,
    assign_slots,
    relay_slots,
    formation_follower_step,
    uav_station_offsets,
    uav_supervisor_step,
)
from swarmcover.controllers.lanes import assign_lanes, decompose_lanes
from swarmcover.controllers.predetermined import PredeterminedState, predetermined_follower_step
from swarmcover.controllers.sweep import build_sweep, default_slots
from swarmcover.faults import FailureSchedule, inject_failures
from swarmcover.harness.config import DECENTRALIZED_HORIZON, ExperimentConfig
from swarmcover.metrics import MetricsSeries, completeness, uniformity, uniformity_seconds
from swarmcover.network import (
    Message,
    MessageKind,
    TrafficLedger,
    detect_permanent_disconnection,
    disconnected_uavs,
    empty_mns,
    link_messages,
    mns_merge,
    mns_update_links,
    route_and_count,
    star_topology,
)
from swarmcover.world import Arena, CoverageGrid, cell_of, default_start_region, place_obstacles, place_robots, rng_stream

# hard stop for the predetermined approach if some robot never finishes
PREDETERMINED_CAP = 20000
# lateral reach of a UAV view used when re-planning stations, with a margin
# for robots pushed off their slot by obstacles
RELAY_HALF_VIEW = 0.72


@dataclass
class RunResult:
    config: dict
    series: MetricsSeries
    round_tick: int
    completeness_at_round: float
    p_at_round: float
    p_at_round_s: float
    p_final: float
    final_tick: int
    establish_tick: int
    collision_ticks: list[int] = field(default_factory=list)
    failed: list[tuple[int, int]] = field(default_factory=list)
    permanent_disconnection: bool = False
    disconnection_tick: int | None = None
    max_messages_per_robot: int = 0
    final_visits: list = field(default_factory=list)
    p_at_11000: float | None = None

    def summary(self) -> dict:
        return {
            "approach": self.config["approach"],
            "seed": self.config["seed"],
            "obstacle_count": self.config["obstacle_count"],
            "n_ground": self.config["n_ground"],
            "n_uav": self.config["n_uav"],
            "round_tick": self.round_tick,
            "completeness_at_round": round(self.completeness_at_round, 6),
            "p_at_round": round(self.p_at_round, 6),
            "p_at_round_seconds": round(self.p_at_round_s, 6),
            "p_at_11000": None if self.p_at_11000 is None else round(self.p_at_11000, 6),
            "final_tick": self.final_tick,
            "completeness_final": round(self.series.completeness[-1], 6),
            "messages_total": self.series.messages_total[-1],
            "max_messages_per_robot": self.max_messages_per_robot,
            "collisions_total": self.series.collisions_total[-1],
            "distance_total": round(self.series.distance_total[-1], 6),
            "failed": [list(f) for f in self.failed],
            "permanent_disconnection": self.permanent_disconnection,
            "disconnection_tick": self.disconnection_tick,
        }

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{self.config['approach']}_o{self.config['obstacle_count']}_s{self.config['seed']}"
        csv_path = out / f"{stem}.csv"
        json_path = out / f"{stem}.json"
        self.series.to_csv(csv_path)
        json_path.write_text(json.dumps(self.summary(), indent=2, sort_keys=True))
        return csv_path, json_path


def formation_round_ticks(config: ExperimentConfig) -> int:
    return build_sweep(float(config.side_m), int(config.n_ground), cell_m=config.side_m / config.grid_n).round_ticks


def _failure_schedule(config: ExperimentConfig, rng: np.random.Generator, ground_ids) -> FailureSchedule:
    events = []
    for entry in config.failures:
        f = dict(entry)
        if "ids" in f:
            events.extend((f["tick"], i) for i in f["ids"])
        else:
            taken = {r for _, r in events}
            pool = [g for g in ground_ids if g not in taken]
            events.extend(FailureSchedule.random(rng, pool, f["count"], f["tick"]).events)
    return FailureSchedule(tuple(events))


class _MnsSupervision:
    """Bookkeeping the MNS UAVs share: sticky stations and slot claims."""

    def __init__(self, uavs: list[Uav], n_ground: int):
        self.uav_ids = [u.id for u in uavs]
        self.offsets = uav_station_offsets(len(uavs), n_ground)
        self.station: dict[int, float] = {}
        self.slot_of: dict[int, int] = {}
        self.laterals = [s.lateral for s in default_slots(n_ground)]
        self.live: frozenset | None = None
        # UAVs that have been part of a tree at least once
        self.joined: set[int] = set()

    def reconfigure(self, live_ids) -> None:
        """After ground failures, move the stations so the UAV chain still links up."""
        live = frozenset(live_ids)
        if self.live is None or live == self.live or len(self.station) < len(self.uav_ids):
            self.live = live
            return
        self.live = live
        order = sorted(self.station, key=self.station.get)
        claimed = {g: self.slot_of[g] for g in live if g in self.slot_of}
        slots, new = relay_slots(claimed, self.laterals, list(self.offsets), RELAY_HALF_VIEW)
        self.slot_of = {g: k for g, k in self.slot_of.items() if g not in live} | slots
        self.station = dict(zip(order, new))

    def stations(self, topo, uav_by_id, ref, heading) -> dict[int, float]:
        out = {}
        n = len(self.uav_ids)
        for root, members in topo.trees().items():
            if root not in uav_by_id:
                continue
            spine = topo.spine(root)
            if len(spine) >= 2:
                # orient the spine along the formation's lateral axis
                nx, ny = math.sin(heading), -math.cos(heading)
                first = uav_by_id[spine[0]]
                last = uav_by_id[spine[-1]]
                if (first.x - last.x) * nx + (first.y - last.y) * ny > 0:
                    spine = spine[::-1]
            if len(spine) == n and not any(u in self.station for u in spine):
                for k, u in enumerate(spine):
                    self.station[u] = self.offsets[k]
            shift = (n - len(spine)) // 2
            for k, u in enumerate(spine):
                out[u] = self.station.get(u, self.offsets[k + shift])
        return out

    def claim_slots(self, topo, robots_by_id, targets) -> None:
        for root, members in topo.trees().items():
            ground = sorted(m for m in members if m in robots_by_id)
            taken: dict[int, int] = {}
            for g in sorted(ground, key=lambda g: self._err(robots_by_id[g], g, targets)):
                k = self.slot_of.get(g)
                if k is None:
                    continue
                if k in taken.values():
                    del self.slot_of[g]
                else:
                    taken[g] = k
            loose = {g: robots_by_id[g].pos for g in ground if g not in taken}
            free = [k for k in range(len(targets)) if k not in taken.values()]
            self.slot_of.update(assign_slots(loose, free, targets))

    def _err(self, robot, g, targets) -> float:
        k = self.slot_of.get(g)
        if k is None:
            return math.inf
        return math.hypot(robot.x - targets[k][0], robot.y - targets[k][1])


def run_single(config: ExperimentConfig, observe: Callable | None = None) -> RunResult:
    """Execute one run: setup, then sense, network, control, move, record per tick.

    ``observe(tick, robots, uavs, topology, grid)`` is called at the end of
    every tick, for checking invariants from outside the loop.
    """
    arena = Arena(config.side_m, config.grid_n)
    obstacles = place_obstacles(rng_stream(config.seed, "placement"), config.obstacle_count, arena)
    pose_rng = rng_stream(config.seed, "initial-poses")
    region = default_start_region(arena)
    poses = place_robots(pose_rng, config.n_ground, region, arena, obstacles=obstacles)
    robots = [GroundRobot(i, p.x, p.y, p.theta) for i, p in enumerate(poses)]
    by_id = {r.id: r for r in robots}
    ctrl_rng = rng_stream(config.seed, "controller")
    schedule = _failure_schedule(config, ctrl_rng, [r.id for r in robots])

    approach = config.approach
    program = build_sweep(float(config.side_m), int(config.n_ground), cell_m=arena.cell_m)
    formation_round = program.round_ticks
    if config.horizon_ticks is not None:
        horizon = config.horizon_ticks
    elif approach == "decentralized":
        horizon = DECENTRALIZED_HORIZON
    elif approach == "predetermined":
        horizon = PREDETERMINED_CAP
    else:
        horizon = formation_round
    schedule.validate(horizon, by_id)

    uav_base = config.n_ground
    uavs: list[Uav] = []
    topo = None
    if approach == "hybrid_mns":
        for j in range(config.n_uav):
            x = float(pose_rng.uniform(region.x0, region.x1))
            y = float(pose_rng.uniform(region.y0, region.y1))
            uavs.append(Uav(uav_base + j, x, y))
        topo = empty_mns([u.id for u in uavs], by_id)
        mns = _MnsSupervision(uavs, config.n_ground)
    elif approach in ("centralized_formation", "predetermined"):
        ref = program.start_ref if approach == "centralized_formation" else (arena.side_m / 2, arena.side_m / 2)
        hub = Uav(uav_base, float(ref[0]), float(ref[1]), role=UavRole.BRAIN, full_view=True)
        uavs.append(hub)
        topo = star_topology(hub.id, by_id)
    uav_by_id = {u.id: u for u in uavs}

    scene = Scene(arena, obstacles, robots)
    grid = CoverageGrid(arena)
    series = MetricsSeries(arena)
    ledger = TrafficLedger()
    contacts = frozenset()
    collision_ticks: list[int] = []
    failed: list[tuple[int, int]] = []
    disc_history: list[tuple[int, frozenset]] = []

    dec_states = {r.id: DecentralizedState() for r in robots}
    sweep = SweepState(program)
    central_slots: dict[int, int] = {}
    pred_states: dict[int, PredeterminedState] = {}
    if approach == "predetermined":
        plan = assign_lanes(decompose_lanes(config.n_ground, arena), {r.id: r.pos for r in robots})
        pred_states = {rid: PredeterminedState(list(wps), side_m=arena.side_m) for rid, wps in plan.programs.items()}
    if approach == "centralized_formation":
        _, _, targets0 = program.at(0)
        central_slots = assign_slots({r.id: r.pos for r in robots}, list(range(config.n_ground)), targets0)

    round_tick = formation_round if approach != "predetermined" else None
    round_visits = None
    distance = 0.0
    t = 0
    while t < horizon:
        t += 1
        sweep.tick = t
        for rid in inject_failures(schedule, by_id, t):
            failed.append((t, rid))
        live = [r for r in robots if not r.failed]
        scans = {r.id: proximity_scan(r, scene) for r in live}

        # network
        instructions = {}
        messages: list[Message] = []
        if approach == "hybrid_mns":
            topo = mns_update_links(uavs, robots, topo)
            topo = mns_merge(topo)
            messages = link_messages(topo, t)
            ref, heading, targets = program.at(t)
            live_by_id = {r.id: r for r in live}
            mns.claim_slots(topo, live_by_id, targets)
            mns.reconfigure(live_by_id)
            stations = mns.stations(topo, uav_by_id, ref, heading)
            fresh_children = {c for _, c in topo.fresh}
            trees = topo.trees()
            for u in uavs:
                if u.failed:
                    continue
                alone = len(trees.get(topo.root_of(u.id), ())) <= 1
                if alone and u.id in mns.joined:
                    # no child and no UAV link left to take a reference from
                    continue
                if not alone:
                    mns.joined.add(u.id)
                kids = [c for c in topo.children(u.id) if c in live_by_id]
                clock = t - topo.depth(u.id)
                _, out = uav_supervisor_step(
                    u, kids, mns.slot_of, program, clock, stations.get(u.id, 0.0), fresh_children
                )
                instructions.update(out)
            disc_history.append(
                (t, disconnected_uavs(topo, min(uav_by_id), [u.id for u in uavs if not u.failed]))
            )
        elif approach == "centralized_formation":
            hub = uavs[0]
            kids = [r.id for r in live]
            _, instructions = uav_supervisor_step(hub, kids, central_slots, program, t, 0.0)
            messages = [Message(t, hub.id, g, MessageKind.INSTRUCTION) for g in kids]
            messages += [Message(t, g, hub.id, MessageKind.REPORT) for g in kids]
        elif approach == "predetermined":
            hub = uavs[0]
            kids = [r.id for r in live if not pred_states[r.id].done]
            if t == 1:
                messages = [Message(t, hub.id, r.id, MessageKind.INSTRUCTION) for r in live]
                if config.reports:
                    messages += [Message(t, g, hub.id, MessageKind.REPORT) for g in kids]
            elif config.reports:
                messages = [Message(t, g, hub.id, MessageKind.REPORT) for g in kids]
                messages += [Message(t, hub.id, g, MessageKind.INSTRUCTION) for g in kids]
        route_and_count(messages, ledger, topo, tick=t)

        # control and motion
        for r in live:
            if approach == "decentralized":
                l, rr = decentralized_step(r, scans[r.id], dec_states[r.id], ctrl_rng)[0]
            elif approach == "predetermined":
                l, rr = predetermined_follower_step(r, scans[r.id], pred_states[r.id])
            else:
                l, rr = formation_follower_step(r, scans[r.id], instructions.get(r.id))
            before = r.odometer
            step_differential_drive(r, l, rr, scene=scene)
            distance += r.odometer - before

        # record
        for r in live:
            c = cell_of(r.x, r.y, arena)
            if c is not None:
                grid.visits[c] += 1
        events, contacts = detect_collisions(robots, contacts)
        collision_ticks.extend([t] * len(events))
        series.record(t, grid, ledger.cumulative, len(collision_ticks), distance)
        if observe is not None:
            observe(t, robots, uavs, topo, grid)

        if approach == "predetermined" and round_tick is None:
            if all(pred_states[r.id].done for r in robots if not r.failed):
                round_tick = t
                if config.horizon_ticks is None:
                    horizon = t
        if round_tick is not None and t == round_tick:
            round_visits = grid.visits.copy()

    if round_tick is None or round_visits is None:
        round_tick = t
        round_visits = grid.visits.copy()
    p11000 = None
    if approach == "decentralized" and t >= DECENTRALIZED_HORIZON:
        p11000 = uniformity(grid)
    perm, perm_tick = detect_permanent_disconnection(disc_history, t)
    return RunResult(
        config=config.to_dict(),
        series=series,
        round_tick=int(round_tick),
        completeness_at_round=completeness(round_visits),
        p_at_round=uniformity(round_visits),
        p_at_round_s=uniformity_seconds(round_visits),
        p_final=uniformity(grid),
        final_tick=t,
        establish_tick=program.establish_ticks,
        collision_ticks=collision_ticks,
        failed=failed,
        permanent_disconnection=perm,
        disconnection_tick=perm_tick,
        max_messages_per_robot=ledger.running_max,
        final_visits=grid.visits.tolist(),
        p_at_11000=p11000,
    )
