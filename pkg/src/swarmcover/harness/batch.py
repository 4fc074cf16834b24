"""Seeded batches of independent runs and their aggregate tables."""

from __future__ import annotations

import csv
import os
import statistics
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from swarmcover.harness.config import ExperimentConfig
from swarmcover.harness.runner import RunResult, run_single

SUMMARY_FIELDS = (
    "approach", "obstacle_count", "n_ground", "n_uav", "seed", "round_tick",
    "completeness_at_round", "p_at_round", "p_at_round_seconds", "p_at_11000",
    "final_tick", "completeness_final", "messages_total", "max_messages_per_robot",
    "collisions_total", "distance_total", "n_failed", "permanent_disconnection", "error",
)
AGGREGATE_FIELDS = (
    "approach", "obstacle_count", "n_ground", "n_uav", "runs", "errors",
    "completeness_mean", "completeness_median", "completeness_std",
    "p_mean", "p_median", "round_tick_mean", "completeness_final_mean",
)


@dataclass
class BatchItem:
    config: ExperimentConfig
    result: RunResult | None = None
    error: str | None = None

    def row(self) -> dict:
        c = self.config
        base = {"approach": c.approach, "obstacle_count": c.obstacle_count, "n_ground": c.n_ground,
                "n_uav": c.n_uav, "seed": c.seed}
        if self.result is None:
            return {**{k: "" for k in SUMMARY_FIELDS}, **base, "error": self.error}
        s = self.result.summary()
        row = {k: s.get(k, "") for k in SUMMARY_FIELDS}
        row["n_failed"] = len(self.result.failed)
        row["error"] = ""
        return row


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("SWARMCOVER_JOBS", "1")))
    except ValueError:
        return 1


def _run_guarded(config: ExperimentConfig) -> BatchItem:
    try:
        return BatchItem(config, run_single(config))
    except Exception as exc:  # one bad run must not sink the batch
        return BatchItem(config, error=f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}")


def run_configs(configs: Sequence[ExperimentConfig], jobs: int | None = None) -> list[BatchItem]:
    jobs = default_jobs() if jobs is None else max(1, jobs)
    if jobs == 1 or len(configs) <= 1:
        items = [_run_guarded(c) for c in configs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            items = list(pool.map(_run_guarded, configs, chunksize=1))
    key = lambda it: (it.config.approach, it.config.obstacle_count, it.config.n_uav, it.config.n_ground, it.config.seed)
    return sorted(items, key=key)


def run_batch(template: ExperimentConfig, seeds: Iterable[int], jobs: int | None = None) -> list[BatchItem]:
    seeds = list(seeds)
    if not seeds:
        raise ValueError("a batch needs at least one seed")
    return run_configs([template.with_seed(s) for s in seeds], jobs)


def aggregate(items: Sequence[BatchItem]) -> list[dict]:
    groups: dict[tuple, list[BatchItem]] = {}
    for it in items:
        c = it.config
        groups.setdefault((c.approach, c.obstacle_count, c.n_ground, c.n_uav), []).append(it)
    rows = []
    for (approach, obs, ng, nu), group in sorted(groups.items()):
        ok = [it.result for it in group if it.result is not None]
        comp = [r.completeness_at_round for r in ok]
        p = [r.p_at_round for r in ok]
        rows.append({
            "approach": approach, "obstacle_count": obs, "n_ground": ng, "n_uav": nu,
            "runs": len(group), "errors": len(group) - len(ok),
            "completeness_mean": _r(statistics.fmean(comp)) if comp else "",
            "completeness_median": _r(statistics.median(comp)) if comp else "",
            "completeness_std": _r(statistics.pstdev(comp)) if comp else "",
            "p_mean": _r(statistics.fmean(p)) if p else "",
            "p_median": _r(statistics.median(p)) if p else "",
            "round_tick_mean": _r(statistics.fmean(r.round_tick for r in ok)) if ok else "",
            "completeness_final_mean": _r(statistics.fmean(r.series.completeness[-1] for r in ok)) if ok else "",
        })
    return rows


def _r(x: float) -> float:
    return round(float(x), 6)


def write_csv(path: str | Path, rows: Sequence[dict], fields: Sequence[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(fields), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: row.get(k, "") for k in fields})
    return path


def write_batch(out_dir: str | Path, items: Sequence[BatchItem], prefix: str = "batch",
                per_run: bool = False) -> tuple[Path, Path]:
    out = Path(out_dir)
    runs = write_csv(out / f"{prefix}_runs.csv", [it.row() for it in items], SUMMARY_FIELDS)
    agg = write_csv(out / f"{prefix}_aggregate.csv", aggregate(items), AGGREGATE_FIELDS)
    if per_run:
        for it in items:
            if it.result is not None:
                it.result.write(out / "runs")
    return runs, agg
