"""Command-line front end.

Subcommands::

    simulate --config cfg [--seed N] [--out DIR] [--strict]
    compare  --org cfg --nrc cfg --out DIR
    sweep    --config cfg --penetration 0,25,50,75,100 --out DIR [--jobs N]
    heatmap  --in edge_speeds.csv --out heatmap.csv

Exit codes: 0 success, 1 configuration error, 2 integrity fault. Every
command is bit-reproducible for a fixed seed; the report commands also
render a PNG next to each CSV unless ``--no-figures`` is given.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import engine, figures, reports
from .engine import SimulationIntegrityError
from .metrics import percent_change, summarize
from .scenario import ConfigError, ScenarioConfig, load_config

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INTEGRITY = 2

_COMPARE_CASES = [("ORG", False, 0.0), ("NRC", True, 0.0), ("ORG_CAV", False, 1.0), ("NRC_CAV", True, 1.0)]


def _run_and_write(config: ScenarioConfig, out_dir: Path, **overrides):
    scenario = config.build(**overrides)
    output = engine.run(scenario)
    summary = summarize(output)
    reports.write_run_outputs(out_dir, output, summary)
    return output, summary


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    out_dir = Path(args.out)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.strict:
        overrides["strict"] = True
    output, summary = _run_and_write(config, out_dir, **overrides)
    mean = "NA" if summary.mean_travel_time is None else f"{summary.mean_travel_time:.2f}s"
    print(
        f"simulated {len(output.trips)} vehicles in {output.steps} steps: "
        f"mean travel time {mean}, fuel {summary.fuel:.2f}l, "
        f"ttc events {summary.ttc_events}, unfinished {summary.unfinished}"
    )
    print(f"outputs written to {out_dir}")
    return EXIT_OK


def _check_comparable(org: ScenarioConfig, nrc: ScenarioConfig) -> None:
    def stripped(cfg: ScenarioConfig) -> dict[str, str]:
        return {
            key: value
            for key, value in cfg.raw.items()
            if not key.startswith("closure") and key != "demand.penetration"
        }

    if stripped(org) != stripped(nrc):
        raise ConfigError(
            "org and nrc configs may only differ in closure sections and demand.penetration",
            source=nrc.source,
        )


def cmd_compare(args: argparse.Namespace) -> int:
    org = load_config(args.org)
    nrc = load_config(args.nrc)
    _check_comparable(org, nrc)
    out_dir = Path(args.out)

    summaries = {}
    for label, use_nrc, penetration in _COMPARE_CASES:
        config = nrc if use_nrc else org
        _, summaries[label] = _run_and_write(config, out_dir / label.lower(), penetration=penetration)
        print(f"ran case {label}")

    baseline = summaries["ORG"]
    rows = [("ORG", baseline)]
    for label in ("NRC", "ORG_CAV", "NRC_CAV"):
        rows.append((label, percent_change(summaries[label], baseline)))
    reports.write_table_csv(out_dir / "table.csv", rows)
    if not args.no_figures:
        figures.render_compare(rows, out_dir / "table.png")
    print(f"comparison table written to {out_dir / 'table.csv'}")
    return EXIT_OK


def _parse_penetrations(raw: str) -> list[float]:
    try:
        values = [float(part) for part in raw.split(",") if part.strip() != ""]
    except ValueError:
        raise ConfigError(f"bad penetration list {raw!r}") from None
    if not values:
        raise ConfigError("empty penetration list")
    for value in values:
        if not 0.0 <= value <= 100.0:
            raise ConfigError(f"penetration {value} outside [0, 100]")
    return sorted(set(values))


def _sweep_point(payload: tuple[ScenarioConfig, float]):
    config, pct = payload
    scenario = config.build(penetration=pct / 100.0)
    output = engine.run(scenario)
    return pct, output, summarize(output)


def cmd_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    pens = _parse_penetrations(args.penetration)
    out_dir = Path(args.out)

    payloads = [(config, pct) for pct in pens]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_point, payloads))
    else:
        results = [_sweep_point(payload) for payload in payloads]

    points = []
    for pct, output, summary in sorted(results, key=lambda item: item[0]):
        reports.write_run_outputs(out_dir / f"pen_{int(round(pct)):03d}", output, summary)
        points.append((pct, summary))
        mean = "NA" if summary.mean_travel_time is None else f"{summary.mean_travel_time:.2f}s"
        print(f"penetration {pct:g}%: mean travel time {mean}")
    reports.write_sweep_csv(out_dir / "sweep.csv", points)
    if not args.no_figures:
        figures.render_sweep(points, out_dir / "sweep.png")
    print(f"sweep written to {out_dir / 'sweep.csv'}")
    return EXIT_OK


def cmd_heatmap(args: argparse.Namespace) -> int:
    try:
        records = reports.read_edge_speeds_csv(args.input)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    out_path = Path(args.out)
    reports.write_heatmap_csv(out_path, records)
    if not args.no_figures:
        figures.render_heatmap(records, out_path.with_suffix(".png"))
    print(f"heatmap written to {out_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="detoursim", description="road-closure traffic experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one scenario and write its CSV outputs")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_sim.add_argument("--out", default="out", help="output directory")
    p_sim.add_argument("--strict", action="store_true", help="halt on integrity faults")
    p_sim.set_defaults(func=cmd_simulate)

    p_cmp = sub.add_parser("compare", help="baseline vs closure at 0%% and 100%% automation")
    p_cmp.add_argument("--org", required=True, help="baseline scenario config")
    p_cmp.add_argument("--nrc", required=True, help="closure scenario config")
    p_cmp.add_argument("--out", default="out", help="output directory")
    p_cmp.add_argument("--no-figures", action="store_true")
    p_cmp.set_defaults(func=cmd_compare)

    p_swp = sub.add_parser("sweep", help="run a scenario across automation shares")
    p_swp.add_argument("--config", required=True)
    p_swp.add_argument("--penetration", default="0,25,50,75,100", help="comma list of percentages")
    p_swp.add_argument("--out", default="out", help="output directory")
    p_swp.add_argument("--jobs", type=int, default=1, help="parallel runs")
    p_swp.add_argument("--no-figures", action="store_true")
    p_swp.set_defaults(func=cmd_sweep)

    p_heat = sub.add_parser("heatmap", help="per-edge mean-speed map from edge_speeds.csv")
    p_heat.add_argument("--in", dest="input", required=True, help="edge_speeds.csv from a run")
    p_heat.add_argument("--out", default="heatmap.csv", help="output csv path")
    p_heat.add_argument("--no-figures", action="store_true")
    p_heat.set_defaults(func=cmd_heatmap)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationIntegrityError as exc:
        print(f"integrity fault: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY


if __name__ == "__main__":
    sys.exit(main())
