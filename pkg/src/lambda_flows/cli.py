"""
Command-line interface

    lambda-flows <command> [--config FILE] [flags]

Commands: classify, coalescent, lookdown, fv, eves, validate, speed.
Flags override the JSON config file, which overrides the defaults. Every
output file carries the config hash and the seed.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

from . import __version__
from .coalescent import block_count_curve, paths_frame, simulate_replicates, tmrca_frame
from .errors import ConfigError, LambdaFlowsError, UndecidedError
from .flemingviot import FvRun, draw_initial_types, extract_eves, simulate_fv, simulate_fv_adaptive
from .log import get_logger, setup_logging
from .lookdown import LookdownGraphN, graph_meta, sample_graph, trajectory_frame
from .measure import LambdaMeasure, cdi_speed, make_measure
from .models import Command, Regime, RunConfig
from .outputs import read_jsonl, run_meta, write_csv, write_json, write_jsonl
from .parallel import resolve_threads
from .validate import run_suite, speed_grid, suite_failed

logger = get_logger("cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNDECIDED = 2
EXIT_SUITE_FAILED = 3

# flag dest -> RunConfig key
_SCALAR_FLAGS = {
    "seed": "seed",
    "out": "out_dir",
    "replicates": "replicates",
    "n": "n",
    "horizon": "horizon",
    "window": "window",
    "epsilon": "epsilon",
    "graph_file": "graph_file",
    "run_file": "run_file",
    "tests": "tests",
    "t_grid": "t_grid",
    "max_time": "max_time",
}
_MEASURE_FLAGS = ("mass", "x", "alpha", "a", "b")


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="JSON run configuration")
    parent.add_argument("--seed", type=int, help="Root seed (unsigned 64-bit)")
    parent.add_argument("--out", help="Output directory")
    parent.add_argument("--replicates", type=int)
    parent.add_argument("--threads", type=int, help="Worker processes (default $LAMBDA_FLOWS_THREADS or 1)")
    parent.add_argument("--log-level", default="WARNING", help="DEBUG, INFO, WARNING or ERROR")
    parent.add_argument("-n", "--n", type=int, help="Number of levels / sample size")
    parent.add_argument("--horizon", type=float)
    parent.add_argument("--window", type=float, nargs=2, metavar=("S0", "S1"))
    parent.add_argument("--epsilon", type=float, help="Bridge-flow truncation")
    parent.add_argument("--max-time", type=float, help="Cap on adaptive horizons")
    measure = parent.add_argument_group("measure")
    measure.add_argument("--measure", choices=["dirac0", "dirac", "lebesgue", "beta", "custom"])
    measure.add_argument("--mass", type=float)
    measure.add_argument("--x", type=float)
    measure.add_argument("--alpha", type=float)
    measure.add_argument("--a", type=float)
    measure.add_argument("--b", type=float)
    return parent


def build_parser() -> argparse.ArgumentParser:
    parent = _common_options()
    parser = argparse.ArgumentParser(
        prog="lambda-flows",
        description="Lambda-coalescents, lookdown graphs and Lambda Fleming-Viot flows",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[parent], help="Regime of a measure as JSON")
    coalescent = sub.add_parser("coalescent", parents=[parent], help="Coalescent paths and TMRCA CSVs")
    coalescent.add_argument("--write-paths", action="store_true", default=None)
    coalescent.add_argument("--t-grid", type=float, nargs="+", help="Times for block-count curves")
    sub.add_parser("lookdown", parents=[parent], help="Lookdown graph JSONL and trajectory CSV")
    fv = sub.add_parser("fv", parents=[parent], help="Fleming-Viot path JSONL")
    fv.add_argument("--graph-file", help="Replay a saved graph JSONL")
    eves = sub.add_parser("eves", parents=[parent], help="Eve report as JSON")
    eves.add_argument("--run-file", help="Graph JSONL written by the fv command")
    validate = sub.add_parser("validate", parents=[parent], help="Validation suite")
    validate.add_argument("--tests", nargs="+", help="Test ids (default: every applicable test)")
    validate.add_argument("--negative-controls", action="store_true", default=None)
    validate.add_argument("--t-grid", type=float, nargs="+", help="Speed-test grid")
    speed = sub.add_parser("speed", parents=[parent], help="Block counts against v(t)")
    speed.add_argument("--t-grid", type=float, nargs="+")
    return parser


def _load_config_file(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    source = Path(path)
    try:
        with open(source, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"Cannot read config file {source}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Config file {source} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {source} must hold a JSON object")
    return data


def build_config(args: argparse.Namespace) -> RunConfig:
    """Flags over config file over defaults"""
    data = _load_config_file(args.config)
    data["command"] = args.command
    for dest, key in _SCALAR_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            data[key] = list(value) if isinstance(value, list) else value
    for dest in ("write_paths", "negative_controls"):
        if getattr(args, dest, None):
            data[dest] = True

    measure_overrides = {name: getattr(args, name) for name in _MEASURE_FLAGS if getattr(args, name) is not None}
    if args.measure is not None:
        data["measure"] = {"family": args.measure, **measure_overrides}
    elif measure_overrides:
        if not isinstance(data.get("measure"), dict):
            raise ConfigError("Measure parameters given without --measure or a config measure")
        data["measure"] = {**data["measure"], **measure_overrides}
    if "measure" not in data and data.get("run_file"):
        meta, _ = read_jsonl(data["run_file"])
        if meta.get("measure"):
            data["measure"] = meta["measure"]

    threads = args.threads if args.threads is not None else data.get("threads")
    data["threads"] = resolve_threads(threads)
    return RunConfig.model_validate(data)


# ---------------------------------------------------------------------------
# commands


def cmd_classify(config: RunConfig) -> int:
    m = make_measure(config.measure)
    report = m.classify()
    print(report.model_dump_json(indent=2))
    return EXIT_OK


def _seed(config: RunConfig) -> int:
    return config.seed if config.seed is not None else 0


def _window(config: RunConfig) -> Tuple[float, float]:
    if config.window is not None:
        return config.window
    return (0.0, config.horizon if config.horizon is not None else 1.0)


def cmd_coalescent(config: RunConfig) -> int:
    """Writes tmrca.csv, optionally paths.csv and block_counts.csv"""
    m = make_measure(config.measure)
    out = Path(config.out_dir)
    paths = simulate_replicates(m, config.n, config.replicates, _seed(config), config.horizon, config.threads)
    meta = run_meta(config)
    write_csv(tmrca_frame(paths), out / "tmrca.csv", meta)
    if config.write_paths:
        write_csv(paths_frame(paths, with_partitions=config.n <= 50), out / "paths.csv", meta)
    if config.t_grid:
        grid = sorted(config.t_grid)
        rows = [(path.replicate, t, count) for path in paths for t, count in zip(grid, block_count_curve(path, grid))]
        frame = pd.DataFrame(rows, columns=["replicate", "t", "block_count"])
        write_csv(frame, out / "block_counts.csv", meta)
    return EXIT_OK


def _suffix(config: RunConfig, replicate: int) -> str:
    return "" if config.replicates == 1 else f"_{replicate:04d}"


def cmd_lookdown(config: RunConfig) -> int:
    """Writes graph.jsonl (t, levels) and trajectory.csv (time, level, type) per replicate"""
    m = make_measure(config.measure)
    out = Path(config.out_dir)
    seed = _seed(config)
    for r in range(config.replicates):
        g = sample_graph(m, config.n, _window(config), seed=seed, replicate=r)
        initial = draw_initial_types(config.n, seed, r)
        meta = run_meta(config, **graph_meta(g), replicate=r, initial_types=list(initial))
        write_jsonl(out / f"graph{_suffix(config, r)}.jsonl", meta, g.to_records())
        write_csv(trajectory_frame(g, initial), out / f"trajectory{_suffix(config, r)}.csv", meta)
    return EXIT_OK


def _load_graph(path: str) -> Tuple[LookdownGraphN, Optional[Tuple[float, ...]], Dict[str, Any]]:
    meta, records = read_jsonl(path)
    g = LookdownGraphN.from_records(meta, records)
    initial = meta.get("initial_types")
    return g, (tuple(float(x) for x in initial) if initial is not None else None), meta


def cmd_fv(config: RunConfig) -> int:
    """Writes fv.jsonl ({t, atoms, dust} per event) and graph.jsonl per replicate"""
    m = make_measure(config.measure)
    out = Path(config.out_dir)
    seed = _seed(config)
    if config.graph_file is not None:
        g, initial, saved = _load_graph(config.graph_file)
        replicate = int(saved.get("replicate", 0))
        run = simulate_fv(m, g.n, g.window, seed=seed, replicate=replicate, initial_types=initial, graph=g)
        _write_fv(config, run, out, "")
        return EXIT_OK
    until_fixation = config.window is None and config.horizon is None and m.classify().regime == Regime.CDI
    for r in range(config.replicates):
        run = simulate_fv(
            m,
            config.n,
            _window(config),
            seed=seed,
            replicate=r,
            until_fixation=until_fixation,
            max_time=config.max_time,
        )
        _write_fv(config, run, out, _suffix(config, r))
    return EXIT_OK


def _write_fv(config: RunConfig, run: FvRun, out: Path, suffix: str) -> None:
    meta = run_meta(
        config,
        **graph_meta(run.graph),
        replicate=run.replicate,
        initial_types=list(run.initial_types),
        regime=run.regime.value,
    )
    records = [
        {"t": t, "atoms": [list(atom) for atom in state.atoms], "dust": state.dust} for t, state in run.path
    ]
    write_jsonl(out / f"fv{suffix}.jsonl", meta, records)
    write_jsonl(out / f"graph{suffix}.jsonl", meta, run.graph.to_records())


def cmd_eves(config: RunConfig) -> int:
    """Eve report of a saved run, or of a fresh adaptive run"""
    m = make_measure(config.measure)
    theta = config.thresholds.eve_theta
    if config.run_file is not None:
        g, initial, saved = _load_graph(config.run_file)
        run = simulate_fv(
            m,
            g.n,
            g.window,
            seed=int(saved.get("seed") or 0),
            replicate=int(saved.get("replicate", 0)),
            initial_types=initial,
            record_path=False,
            graph=g,
        )
        report = extract_eves(run, theta)
        meta = run_meta(config, seed=run.seed, replicate=run.replicate, run_file=config.run_file)
    else:
        horizon = config.horizon if config.horizon is not None else 1.0
        _, report = simulate_fv_adaptive(
            m, config.n, seed=_seed(config), horizon=horizon, theta=theta, max_time=config.max_time
        )
        meta = run_meta(config)
    payload = {"meta": meta, "report": report.model_dump(mode="json")}
    write_json(Path(config.out_dir) / "eves.json", payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_validate(config: RunConfig) -> int:
    m = make_measure(config.measure)
    reports = run_suite(config, m)
    payload = {"meta": run_meta(config), "reports": [report.model_dump(mode="json") for report in reports]}
    write_json(Path(config.out_dir) / "validation.json", payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_SUITE_FAILED if suite_failed(reports) else EXIT_OK


def speed_frame(m: LambdaMeasure, counts: np.ndarray, grid: List[float]) -> pd.DataFrame:
    """Rows t, v, mean_blocks, ratio"""
    speeds = [cdi_speed(m, t) for t in grid]
    means = counts.mean(axis=0) if counts.size else np.zeros(len(grid))
    return pd.DataFrame(
        {"t": grid, "v": speeds, "mean_blocks": means, "ratio": [mb / v for mb, v in zip(means, speeds)]},
        columns=["t", "v", "mean_blocks", "ratio"],
    )


def cmd_speed(config: RunConfig) -> int:
    """Writes speed.csv comparing mean block counts with v(t)"""
    m = make_measure(config.measure)
    grid = sorted(config.t_grid) if config.t_grid else speed_grid(m, config.n)
    # fail before simulating when the measure is not CDI
    cdi_speed(m, grid[0])
    paths = simulate_replicates(m, config.n, config.replicates, _seed(config), max(grid), config.threads)
    counts = np.array([block_count_curve(path, grid) for path in paths], dtype=float)
    write_csv(speed_frame(m, counts, grid), Path(config.out_dir) / "speed.csv", run_meta(config))
    return EXIT_OK


COMMANDS = {
    Command.CLASSIFY: cmd_classify,
    Command.COALESCENT: cmd_coalescent,
    Command.LOOKDOWN: cmd_lookdown,
    Command.FV: cmd_fv,
    Command.EVES: cmd_eves,
    Command.VALIDATE: cmd_validate,
    Command.SPEED: cmd_speed,
}


def main(args: Optional[List[str]] = None) -> int:
    parser = build_parser()
    parsed = parser.parse_args(args)
    setup_logging(parsed.log_level)
    try:
        config = build_config(parsed)
        logger.info("Running %s (seed=%s, n=%d)", config.command.value, config.seed, config.n)
        code = COMMANDS[config.command](config)
        logger.info("Finished %s with exit code %d", config.command.value, code)
        return code
    except UndecidedError as exc:
        if exc.report is not None and hasattr(exc.report, "model_dump_json"):
            print(exc.report.model_dump_json(indent=2))
        print(f"lambda-flows: undecided: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED
    except ValidationError as exc:
        first = exc.errors()[0] if exc.errors() else {"msg": str(exc)}
        where = ".".join(str(part) for part in first.get("loc", ()))
        print(f"lambda-flows: invalid configuration: {where} {first['msg']}".replace("  ", " "), file=sys.stderr)
        return EXIT_ERROR
    except (LambdaFlowsError, OSError) as exc:
        print(f"lambda-flows: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
