"""Canned campaigns: the four-approach comparison, MNS scalability and failures."""

from __future__ import annotations

import statistics
from pathlib import Path
from typing import Sequence

from swarmcover.harness.batch import BatchItem, aggregate, run_configs, write_batch, write_csv
from swarmcover.harness.config import APPROACHES, PRESETS, ExperimentConfig

DENSITIES = (100, 200, 300)
SCALABILITY_TICK = 5000
FAULT_TICK = 400
FAULT_COUNTS = (0, 1, 3, 5, 7, 8)

SCALABILITY_FIELDS = (
    "preset", "n_uav", "n_ground", "runs", "errors", "messages_at_5000_mean", "max_messages_per_robot",
    "collisions_total_mean", "collisions_after_establishment", "establish_tick",
)
CURVE_FIELDS = ("approach", "obstacle_count", "tick", "distance_per_sqm", "completeness")
FAULT_FIELDS = (
    "failed_robots", "runs", "errors", "completeness_mean", "drop_from_baseline",
    "drop_per_robot", "runs_with_permanent_disconnection",
)


def table1_configs(seeds: Sequence[int], approaches: Sequence[str] = APPROACHES,
                   densities: Sequence[int] = DENSITIES) -> list[ExperimentConfig]:
    return [ExperimentConfig(approach=a, obstacle_count=o, seed=s)
            for a in approaches for o in densities for s in seeds]


def replicate_table1(seeds: Sequence[int], jobs: int | None = None, out_dir: str | Path | None = None,
                     **kw) -> tuple[list[BatchItem], list[dict]]:
    items = run_configs(table1_configs(seeds, **kw), jobs)
    rows = aggregate(items)
    if out_dir is not None:
        write_batch(out_dir, items, prefix="table1")
        write_csv(Path(out_dir) / "table1_curves.csv", mean_curves(items), CURVE_FIELDS)
    return items, rows


def mean_curves(items: Sequence[BatchItem], every: int = 10) -> list[dict]:
    """Seed-averaged completeness and distance per m^2 against ticks.

    Runs that ended early hold their last value, so every approach's curve
    spans the longest run in its group.
    """
    groups: dict[tuple, list] = {}
    for it in items:
        if it.result is not None:
            groups.setdefault((it.config.approach, it.config.obstacle_count), []).append(it.result)
    rows = []
    for (approach, obs), results in sorted(groups.items()):
        end = max(r.final_tick for r in results)
        for t in range(every, end + 1, every):
            at = [r.series.at(t) for r in results]
            area = results[0].series.arena.area
            rows.append({
                "approach": approach, "obstacle_count": obs, "tick": t,
                "distance_per_sqm": round(statistics.fmean(a["distance_total"] for a in at) / area, 6),
                "completeness": round(statistics.fmean(a["completeness"] for a in at), 6),
            })
    return rows


def scalability_configs(seeds: Sequence[int], presets: Sequence[str] = tuple(PRESETS)) -> list[ExperimentConfig]:
    out = []
    for name in presets:
        n_uav, n_ground = PRESETS[name]
        out += [ExperimentConfig(approach="hybrid_mns", n_uav=n_uav, n_ground=n_ground, obstacle_count=0,
                                 seed=s, horizon_ticks=SCALABILITY_TICK) for s in seeds]
    return out


def summarize_scalability(items: Sequence[BatchItem]) -> list[dict]:
    rows = []
    for name, (n_uav, n_ground) in PRESETS.items():
        group = [it for it in items if (it.config.n_uav, it.config.n_ground) == (n_uav, n_ground)]
        if not group:
            continue
        ok = [it.result for it in group if it.result is not None]
        late = sum(sum(1 for t in r.collision_ticks if t > r.establish_tick) for r in ok)
        rows.append({
            "preset": name, "n_uav": n_uav, "n_ground": n_ground, "runs": len(group),
            "errors": len(group) - len(ok),
            "messages_at_5000_mean": statistics.fmean(r.series.at(SCALABILITY_TICK)["messages_total"] for r in ok) if ok else "",
            "max_messages_per_robot": max((r.max_messages_per_robot for r in ok), default=""),
            "collisions_total_mean": statistics.fmean(len(r.collision_ticks) for r in ok) if ok else "",
            "collisions_after_establishment": late,
            "establish_tick": ok[0].establish_tick if ok else "",
        })
    return rows


def replicate_scalability(seeds: Sequence[int], jobs: int | None = None, out_dir: str | Path | None = None,
                          presets: Sequence[str] = tuple(PRESETS)) -> tuple[list[BatchItem], list[dict]]:
    items = run_configs(scalability_configs(seeds, presets), jobs)
    rows = summarize_scalability(items)
    if out_dir is not None:
        write_batch(out_dir, items, prefix="scalability")
        write_csv(Path(out_dir) / "scalability_summary.csv", rows, SCALABILITY_FIELDS)
    return items, rows


def fault_configs(seeds: Sequence[int], counts: Sequence[int] = FAULT_COUNTS,
                  obstacles: int = 100) -> list[ExperimentConfig]:
    out = []
    for k in counts:
        fails = ({"tick": FAULT_TICK, "count": k},) if k else ()
        out += [ExperimentConfig(approach="hybrid_mns", obstacle_count=obstacles, seed=s, failures=fails)
                for s in seeds]
    return out


def _failed_count(c: ExperimentConfig) -> int:
    return sum(dict(f).get("count", len(dict(f).get("ids", ()))) for f in c.failures)


def summarize_faults(items: Sequence[BatchItem]) -> list[dict]:
    by_k: dict[int, list[BatchItem]] = {}
    for it in items:
        by_k.setdefault(_failed_count(it.config), []).append(it)
    means = {}
    for k, group in by_k.items():
        ok = [it.result.completeness_at_round for it in group if it.result is not None]
        means[k] = statistics.fmean(ok) if ok else None
    base = means.get(0)
    rows = []
    for k in sorted(by_k):
        group = by_k[k]
        ok = [it.result for it in group if it.result is not None]
        drop = None if base is None or means[k] is None else base - means[k]
        rows.append({
            "failed_robots": k, "runs": len(group), "errors": len(group) - len(ok),
            "completeness_mean": means[k] if means[k] is not None else "",
            "drop_from_baseline": drop if drop is not None else "",
            "drop_per_robot": drop / k if drop is not None and k else "",
            "runs_with_permanent_disconnection": sum(r.permanent_disconnection for r in ok),
        })
    return rows


def replicate_faults(seeds: Sequence[int], jobs: int | None = None, out_dir: str | Path | None = None,
                     counts: Sequence[int] = FAULT_COUNTS) -> tuple[list[BatchItem], list[dict]]:
    items = run_configs(fault_configs(seeds, counts), jobs)
    rows = summarize_faults(items)
    if out_dir is not None:
        write_batch(out_dir, items, prefix="faults")
        write_csv(Path(out_dir) / "faults_summary.csv", rows, FAULT_FIELDS)
    return items, rows

