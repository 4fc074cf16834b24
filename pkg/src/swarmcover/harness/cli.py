"""Command-line entry point: ``swarmcover <command> ...``.

Exit status is 0 on success, 1 for configuration or usage errors and 2
when obstacles cannot be placed at the requested density.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from swarmcover import energy
from swarmcover.errors import ConfigInvalid, PlacementInfeasible
from swarmcover.harness import campaigns
from swarmcover.harness.batch import AGGREGATE_FIELDS, run_batch, write_batch, write_csv
from swarmcover.harness.config import APPROACHES, PRESETS, ExperimentConfig, load_config, parse_seeds, schema_text
from swarmcover.harness.runner import run_single
from swarmcover.world import Arena, arena_to_dict, place_obstacles, rng_stream, save_arena

DISTANCE_LIMITS = (2000.0, 10000.0, 25000.0, 50000.0)
SPEED_LIMITS = (0.15, 0.5, 1.0, 10.0)
TABLE3_FIELDS = (
    "limit", "distance_m", "decentralized_top_above", "centralized_formation_top_from",
    "centralized_formation_top_to", "fully_centralized_top_below", "hybrid_beats_decentralized_below",
)
BUDGET_FIELDS = ("budget_j", "ground_rate", "uav_rate", "approach", "n_ground", "n_uav", "runtime_s", "completeness")


def _emit_csv(rows, fields) -> None:
    w = csv.DictWriter(sys.stdout, fieldnames=list(fields), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: r.get(k, "") for k in fields})


@click.group()
def main() -> None:
    """Deterministic multi-robot coverage simulator."""


@main.command()
@click.option("--approach", type=click.Choice(APPROACHES), required=True)
@click.option("--obstacles", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--preset", type=click.Choice(list(PRESETS)), default=None, help="UAV+ground team size.")
@click.option("--horizon", type=int, default=None, help="Ticks to run (default: round end).")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Write the per-tick CSV and summary JSON here.")
def simulate(approach, obstacles, seed, preset, horizon, out):
    """Run one simulation and print its summary JSON."""
    doc = {"approach": approach, "obstacle_count": obstacles, "seed": seed, "horizon_ticks": horizon}
    if preset:
        doc["preset"] = preset
    result = run_single(ExperimentConfig.from_dict(doc))
    if out:
        result.write(out)
    click.echo(json.dumps(result.summary(), indent=2, sort_keys=True))


@main.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), required=True)
@click.option("--seeds", default=None, help="Inclusive range a..b; overrides the file.")
@click.option("--jobs", type=int, default=None, help="Worker processes (default: $SWARMCOVER_JOBS or 1).")
@click.option("--out", type=click.Path(file_okay=False), default="results", show_default=True)
@click.option("--per-run/--no-per-run", default=False, help="Also keep every run's CSV and JSON.")
def batch(config_path, seeds, jobs, out, per_run):
    """Run one configuration over a range of seeds."""
    template, file_seeds = load_config(config_path)
    chosen = parse_seeds(seeds) if seeds is not None else file_seeds
    if not chosen:
        raise ConfigInvalid("no seeds given (use --seeds a..b or a 'seeds' field)")
    items = run_batch(template, chosen, jobs)
    runs, agg = write_batch(out, items, per_run=per_run)
    failed = sum(it.error is not None for it in items)
    click.echo(f"{len(items)} runs, {failed} errors -> {runs}, {agg}", err=True)
    _emit_csv([r for r in _read_csv(agg)], AGGREGATE_FIELDS)


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _seeds(runs: int, first: int) -> list[int]:
    if runs < 1:
        raise ConfigInvalid("--runs must be at least 1")
    return list(range(first, first + runs))


@main.command("replicate-table1")
@click.option("--runs", type=int, default=50, show_default=True, help="Seeds per approach and density.")
@click.option("--first-seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), default="results/table1", show_default=True)
def replicate_table1(runs, first_seed, jobs, out):
    """Four approaches at 100, 200 and 300 obstacles; prints the 12 aggregate rows."""
    _, rows = campaigns.replicate_table1(_seeds(runs, first_seed), jobs, out)
    _emit_csv(rows, AGGREGATE_FIELDS)


@main.command("replicate-scalability")
@click.option("--runs", type=int, default=10, show_default=True)
@click.option("--first-seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), default="results/scalability", show_default=True)
def replicate_scalability(runs, first_seed, jobs, out):
    """MNS with 2+4, 4+8 and 6+12 robots, no obstacles."""
    _, rows = campaigns.replicate_scalability(_seeds(runs, first_seed), jobs, out)
    _emit_csv(rows, campaigns.SCALABILITY_FIELDS)


@main.command("replicate-faults")
@click.option("--runs", type=int, default=10, show_default=True)
@click.option("--first-seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), default="results/faults", show_default=True)
def replicate_faults(runs, first_seed, jobs, out):
    """MNS at 100 obstacles with 0 to 8 ground robots failing at tick 400."""
    _, rows = campaigns.replicate_faults(_seeds(runs, first_seed), jobs, out)
    _emit_csv(rows, campaigns.FAULT_FIELDS)


def _load_curves(path, obstacles: int):
    rows = [r for r in _read_csv(path) if int(r["obstacle_count"]) == obstacles]
    if not rows:
        raise ConfigInvalid(f"{path} has no curves for {obstacles} obstacles")
    by_app: dict[str, list[dict]] = {}
    for r in rows:
        by_app.setdefault(r["approach"], []).append(r)
    ticks, dist = {}, {}
    for app, rs in by_app.items():
        rs.sort(key=lambda r: int(r["tick"]))
        comp = [float(r["completeness"]) for r in rs]
        ticks[app] = energy.CompletenessCurve.from_series([int(r["tick"]) for r in rs], comp, "ticks")
        dist[app] = energy.CompletenessCurve.from_series(
            [float(r["distance_per_sqm"]) for r in rs], comp, "meters-per-sqm")
    return ticks, dist


def _crossovers(dist) -> tuple[dict[str, float], str]:
    pairs = {
        "centralized_over_decentralized": ("decentralized", "centralized_formation"),
        "predetermined_over_centralized": ("centralized_formation", "predetermined"),
        "hybrid_over_decentralized": ("decentralized", "hybrid_mns"),
    }
    out = {}
    for key, (a, b) in pairs.items():
        x = energy.pairwise_crossover(dist[a], dist[b]) if a in dist and b in dist else None
        if x is None:
            return dict(energy.REFERENCE_CROSSOVERS), "reference"
        out[key] = x
    return out, "simulated"


@main.command("analyze-energy")
@click.option("--curves", type=click.Path(dir_okay=False, exists=True), default=None,
              help="table1_curves.csv from replicate-table1; omit to use the reference crossovers.")
@click.option("--obstacles", type=int, default=100, show_default=True)
@click.option("--budget", "budgets", type=float, multiple=True, default=(200e3, 300e3), show_default=True)
@click.option("--uav-rate", "uav_rates", type=float, multiple=True, default=(6.0,), show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="results/energy", show_default=True)
def analyze_energy(curves, obstacles, budgets, uav_rates, out):
    """Environment-size thresholds and budget-limited completeness."""
    out = Path(out)
    ticks = {}
    if curves:
        ticks, dist = _load_curves(curves, obstacles)
        cross, source = _crossovers(dist)
    else:
        cross, source = dict(energy.REFERENCE_CROSSOVERS), "reference"
    write_csv(out / "crossovers.csv", [{"crossover": k, "distance_per_sqm": v, "source": source} for k, v in cross.items()],
              ("crossover", "distance_per_sqm", "source"))

    rows = []
    for d in DISTANCE_LIMITS:
        rows.append(_bucket_row(f"{d / 1000:g} km", energy.area_buckets(distance=d, crossovers=cross)))
    for v in SPEED_LIMITS:
        rows.append(_bucket_row(f"{v:g} m/s", energy.area_buckets(speed=v, crossovers=cross)))
    write_csv(out / "table3.csv", rows, TABLE3_FIELDS)

    budget_rows = []
    teams = {"decentralized": (9, 0), "hybrid_mns": (9, 3), "centralized_formation": (9, 1), "predetermined": (9, 1)}
    for b in budgets:
        for u in uav_rates:
            for g in range(3, 71):
                for app, curve in sorted(ticks.items()):
                    ng, nu = teams.get(app, (9, 0))
                    runtime = energy.budget_runtime(b, g, u, ng, nu)
                    budget_rows.append({
                        "budget_j": b, "ground_rate": g, "uav_rate": u, "approach": app, "n_ground": ng, "n_uav": nu,
                        "runtime_s": round(runtime, 3),
                        "completeness": round(energy.budget_completeness(curve, b, g, u, ng, nu), 6),
                    })
    if budget_rows:
        write_csv(out / "budget.csv", budget_rows, BUDGET_FIELDS)
    _emit_csv(rows, TABLE3_FIELDS)


def _bucket_row(label: str, b: energy.AreaBuckets) -> dict:
    return {
        "limit": label, "distance_m": round(b.distance, 6),
        "decentralized_top_above": round(b.decentralized_top_above, 3),
        "centralized_formation_top_from": round(b.centralized_formation_top[0], 3),
        "centralized_formation_top_to": round(b.centralized_formation_top[1], 3),
        "fully_centralized_top_below": round(b.fully_centralized_top_below, 3),
        "hybrid_beats_decentralized_below": round(b.hybrid_beats_decentralized_below, 3),
    }


@main.command("export-arena")
@click.option("--obstacles", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="JSON file; stdout if omitted.")
def export_arena(obstacles, seed, out):
    """Write the obstacle layout a run with this seed would use."""
    arena = Arena()
    obs = place_obstacles(rng_stream(seed, "placement"), obstacles, arena)
    if out:
        save_arena(out, arena, obs)
    else:
        click.echo(json.dumps(arena_to_dict(arena, obs), indent=2))


def run(argv=None) -> int:
    """Entry point with the documented exit codes."""
    try:
        main.main(args=argv, prog_name="swarmcover", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        click.echo(schema_text(), err=True)
        return 1
    except (ConfigInvalid, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        click.echo(schema_text(), err=True)
        return 1
    except PlacementInfeasible as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except click.Abort:
        return 1
    return 0


def entry() -> None:
    sys.exit(run())


if __name__ == "__main__":
    entry()
