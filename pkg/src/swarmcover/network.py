"""Communication topologies, message routing and traffic instrumentation.

Two topologies are modelled. A *star* is a fixed hub UAV linked to every
ground robot. An *MNS* is a self-organized forest: UAVs link when they can
see a common live ground robot, trees merge end-to-end so that the UAVs of a
tree always form a single path (the spine), and ground robots hang off UAVs
as leaves. Every tree is rooted at its brain, the UAV with the smallest id.
"""

from __future__ import annotations

import csv
import enum
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from swarmcover.bodies import GroundRobot, Uav, uav_visible_robots
from swarmcover.errors import IllegalRoute

# Links per UAV (children plus parent). Two messages per link per tick keeps
# every robot at or under ten messages.
MAX_UAV_DEGREE = 5
MAX_MESSAGES_PER_ROBOT = 10


class MessageKind(enum.Enum):
    INSTRUCTION = "motion_instruction"
    REPORT = "sensing_report"
    HANDSHAKE = "handshake"


@dataclass(frozen=True)
class Message:
    tick: int
    sender: int
    receiver: int
    kind: MessageKind


@dataclass
class NetworkTopology:
    """Directed parent -> child links over robot ids.

    ``parent`` maps each linked child to its parent. ``uavs`` lists the UAV
    ids; every other node is a ground robot. ``fresh`` holds links created on
    the current tick, which carry a handshake instead of payload traffic.
    """

    mode: str
    nodes: set[int]
    uavs: set[int]
    parent: dict[int, int] = field(default_factory=dict)
    hub: int | None = None
    fresh: set[tuple[int, int]] = field(default_factory=set)
    visible: dict[int, frozenset] = field(default_factory=dict)
    uav_adjacent: set[frozenset] = field(default_factory=set)

    # --- structure queries -------------------------------------------------
    def edges(self) -> list[tuple[int, int]]:
        return sorted((p, c) for c, p in self.parent.items())

    def children(self, node: int) -> list[int]:
        return sorted(c for c, p in self.parent.items() if p == node)

    def degree(self, node: int) -> int:
        return len(self.children(node)) + (1 if node in self.parent else 0)

    def linked(self, a: int, b: int) -> bool:
        return self.parent.get(a) == b or self.parent.get(b) == a

    def root_of(self, node: int) -> int:
        seen = set()
        while node in self.parent:
            if node in seen:
                raise IllegalRoute(f"cycle through {node}")
            seen.add(node)
            node = self.parent[node]
        return node

    def depth(self, node: int) -> int:
        d = 0
        while node in self.parent:
            node = self.parent[node]
            d += 1
        return d

    @property
    def brain(self) -> int | None:
        if self.mode == "star":
            return self.hub
        return min(self.uavs) if self.uavs else None

    def trees(self) -> dict[int, set[int]]:
        """Members of each tree keyed by its root; unlinked ground robots are skipped."""
        out: dict[int, set[int]] = defaultdict(set)
        for n in self.nodes:
            if n in self.parent or n in self.uavs:
                out[self.root_of(n)].add(n)
        return dict(out)

    def uav_neighbors(self, u: int) -> list[int]:
        nb = [c for c in self.children(u) if c in self.uavs]
        if self.parent.get(u) in self.uavs:
            nb.append(self.parent[u])
        return sorted(nb)

    def spine(self, root: int) -> list[int]:
        """UAVs of ``root``'s tree in path order, starting at the smaller-id end."""
        members = [n for n in self.trees().get(root, {root}) if n in self.uavs]
        if len(members) == 1:
            return members
        ends = sorted(u for u in members if len(self.uav_neighbors(u)) <= 1)
        if not ends:
            raise IllegalRoute(f"tree {root} has a UAV cycle")
        path, prev = [ends[0]], None
        while True:
            nxt = [v for v in self.uav_neighbors(path[-1]) if v != prev]
            if not nxt:
                break
            prev = path[-1]
            path.append(nxt[0])
        return path

    def is_caterpillar(self) -> bool:
        """Every tree's UAVs form a path and every ground robot is a leaf under a UAV."""
        for c, p in self.parent.items():
            if p not in self.uavs:
                return False
            if c not in self.uavs and self.children(c):
                return False
        for root, members in self.trees().items():
            us = [n for n in members if n in self.uavs]
            if any(len(self.uav_neighbors(u)) > 2 for u in us):
                return False
            if len(self.spine(root)) != len(us):
                return False
        return True

    def is_star(self) -> bool:
        if self.hub is None:
            return False
        return all(p == self.hub and c not in self.uavs for c, p in self.parent.items())

    def copy(self) -> "NetworkTopology":
        return NetworkTopology(
            self.mode,
            set(self.nodes),
            set(self.uavs),
            dict(self.parent),
            self.hub,
            set(self.fresh),
            dict(self.visible),
            set(self.uav_adjacent),
        )


def star_topology(hub: int, ground_ids: Iterable[int]) -> NetworkTopology:
    ground = sorted(ground_ids)
    return NetworkTopology(
        "star", set(ground) | {hub}, {hub}, {g: hub for g in ground}, hub=hub
    )


def empty_mns(uav_ids: Iterable[int], ground_ids: Iterable[int]) -> NetworkTopology:
    uavs = set(uav_ids)
    return NetworkTopology("mns", uavs | set(ground_ids), uavs)


def drop_failed(topology: NetworkTopology, failed: Iterable[int]) -> NetworkTopology:
    """Remove every link touching a failed node."""
    dead = set(failed)
    if not dead:
        return topology
    topo = topology.copy()
    topo.parent = {c: p for c, p in topo.parent.items() if c not in dead and p not in dead}
    return _reroot_fragments(topo)


def mns_update_links(
    uavs: list[Uav], ground_robots: list[GroundRobot], topology: NetworkTopology
) -> NetworkTopology:
    """Refresh visibility and keep only links whose enabling view still holds."""
    topo = topology.copy()
    topo.fresh = set()
    live_uavs = [u for u in uavs if not u.failed]
    topo.visible = {u.id: frozenset(uav_visible_robots(u, ground_robots)) for u in live_uavs}
    topo.uav_adjacent = set()
    for i, a in enumerate(live_uavs):
        for b in live_uavs[i + 1 :]:
            if topo.visible[a.id] & topo.visible[b.id]:
                topo.uav_adjacent.add(frozenset((a.id, b.id)))
    dead = {u.id for u in uavs if u.failed} | {g.id for g in ground_robots if g.failed}
    keep = {}
    for c, p in topo.parent.items():
        if c in dead or p in dead:
            continue
        if c in topo.uavs:
            if frozenset((c, p)) in topo.uav_adjacent:
                keep[c] = p
        elif c in topo.visible.get(p, ()):
            keep[c] = p
    topo.parent = keep
    return _reroot_fragments(topo)


def _reroot(topo: NetworkTopology, new_root: int) -> None:
    """Reverse parent links on the path from ``new_root`` up to its current root."""
    chain = [new_root]
    while chain[-1] in topo.parent:
        chain.append(topo.parent[chain[-1]])
    for child, par in zip(chain, chain[1:]):
        del topo.parent[child]
    for a, b in zip(chain, chain[1:]):
        topo.parent[b] = a


def _reroot_fragments(topo: NetworkTopology) -> NetworkTopology:
    """Make the smallest UAV id of every tree its brain."""
    for root, members in topo.trees().items():
        best = min(n for n in members if n in topo.uavs)
        if best != root:
            _reroot(topo, best)
    return topo


def _link(topo: NetworkTopology, parent: int, child: int) -> None:
    topo.parent[child] = parent
    topo.fresh.add((parent, child))


def _free_slot_for(topo: NetworkTopology, u: int) -> bool:
    """Make room for one more link on ``u``, shedding its highest-id ground child if full."""
    if topo.degree(u) < MAX_UAV_DEGREE:
        return True
    ground = [c for c in topo.children(u) if c not in topo.uavs]
    if not ground:
        return False
    del topo.parent[ground[-1]]
    return True


def mns_merge(topology: NetworkTopology) -> NetworkTopology:
    """One handshake round: join adjacent trees spine end to spine end, then attach leaves."""
    topo = topology.copy()
    while True:
        roots = sorted(r for r in topo.trees() if r in topo.uavs)
        ends = {}
        for r in roots:
            sp = topo.spine(r)
            ends[r] = sorted({sp[0], sp[-1]})
        candidates = []
        for i, ra in enumerate(roots):
            for rb in roots[i + 1 :]:
                for a in ends[ra]:
                    for b in ends[rb]:
                        if frozenset((a, b)) in topo.uav_adjacent:
                            candidates.append((ra, rb, a, b))
        merged = False
        for ra, rb, a, b in candidates:
            # ra < rb, so ra's brain wins; rb's tree hangs off endpoint a
            if not (_free_slot_for(topo, a) and _free_slot_for(topo, b)):
                continue
            _reroot(topo, b)
            _link(topo, a, b)
            merged = True
            break
        if not merged:
            break
    _attach_ground(topo)
    return topo


def _attach_ground(topo: NetworkTopology) -> None:
    seers: dict[int, list[int]] = defaultdict(list)
    for u in sorted(topo.visible):
        for g in topo.visible[u]:
            seers[g].append(u)
    loose = [g for g in seers if g not in topo.parent and g not in topo.uavs]
    # robots with the fewest options pick first
    loose.sort(key=lambda g: (len(seers[g]), g))
    for g in loose:
        for u in seers[g]:
            if topo.degree(u) < MAX_UAV_DEGREE or _hand_over_child(topo, u, seers):
                _link(topo, u, g)
                break


def _hand_over_child(topo: NetworkTopology, u: int, seers) -> bool:
    """Move one ground child of a full ``u`` to another UAV that sees it and has room."""
    for c in sorted(c for c in topo.children(u) if c not in topo.uavs):
        for other in seers.get(c, ()):
            if other != u and topo.degree(other) < MAX_UAV_DEGREE:
                _link(topo, other, c)
                return True
    return False


def link_messages(topology: NetworkTopology, tick: int, include_reports: bool = True) -> list[Message]:
    """Per-tick traffic: a handshake pair on new links, instruction and report otherwise."""
    out = []
    for p, c in topology.edges():
        if (p, c) in topology.fresh:
            out.append(Message(tick, p, c, MessageKind.HANDSHAKE))
            out.append(Message(tick, c, p, MessageKind.HANDSHAKE))
        else:
            out.append(Message(tick, p, c, MessageKind.INSTRUCTION))
            if include_reports:
                out.append(Message(tick, c, p, MessageKind.REPORT))
    return out


@dataclass
class TrafficLedger:
    """Running message counts.

    ``per_robot`` counts messages passed by a robot (sent plus received) on a
    given tick; ``sent`` accumulates messages sent per robot over the run.
    """

    ticks: list[int] = field(default_factory=list)
    totals: list[int] = field(default_factory=list)
    max_per_robot: list[int] = field(default_factory=list)
    sent: dict[int, int] = field(default_factory=lambda: defaultdict(int))
    running_max: int = 0
    cumulative: int = 0

    def total_until(self, tick: int) -> int:
        return sum(n for t, n in zip(self.ticks, self.totals) if t <= tick)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["tick", "total_messages", "max_per_robot"])
            for row in zip(self.ticks, self.totals, self.max_per_robot):
                w.writerow(row)


def route_and_count(
    messages: list[Message], ledger: TrafficLedger, topology: NetworkTopology | None = None, tick: int | None = None
) -> TrafficLedger:
    """Validate messages against the topology and append one tick to the ledger."""
    load: dict[int, int] = defaultdict(int)
    for m in messages:
        if topology is not None and not topology.linked(m.sender, m.receiver):
            raise IllegalRoute(f"{m.sender} -> {m.receiver} is not a link at tick {m.tick}")
        load[m.sender] += 1
        load[m.receiver] += 1
        ledger.sent[m.sender] += 1
    if tick is None:
        tick = messages[0].tick if messages else (ledger.ticks[-1] + 1 if ledger.ticks else 0)
    peak = max(load.values(), default=0)
    ledger.ticks.append(tick)
    ledger.totals.append(len(messages))
    ledger.cumulative += len(messages)
    ledger.max_per_robot.append(peak)
    ledger.running_max = max(ledger.running_max, peak)
    return ledger


def disconnected_uavs(topology: NetworkTopology, brain: int, live_uavs: Iterable[int]) -> frozenset:
    """Live UAVs with no path to ``brain``."""
    if brain not in topology.nodes:
        return frozenset(live_uavs)
    home = topology.root_of(brain)
    return frozenset(u for u in live_uavs if topology.root_of(u) != home)


def detect_permanent_disconnection(
    history: list[tuple[int, frozenset]], run_end: int | None = None
) -> tuple[bool, int | None]:
    """Whether some UAV lost its path to the brain and never got it back.

    ``history`` holds ``(tick, disconnected UAV ids)`` in tick order. Returns
    the flag and the tick at which the earliest unrecovered loss began.
    """
    if not history:
        return False, None
    if run_end is not None:
        history = [h for h in history if h[0] <= run_end]
    final = history[-1][1]
    if not final:
        return False, None
    first = None
    for u in final:
        start = history[-1][0]
        for tick, cut in reversed(history):
            if u not in cut:
                break
            start = tick
        first = start if first is None else min(first, start)
    return True, first
