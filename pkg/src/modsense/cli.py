"""Command-line entry point: ``sensor <task> --config FILE [options]``.

Runs one configured sweep, writes ``<task>.csv`` and (when the sweep has at
least one axis) ``<task>.svg`` into the output directory, and prints a short
summary. Exit codes: 0 success, 2 configuration error, 3 computation
failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import ValidationError, NumericalError, ModsenseError
from .sweep import TASKS, SweepConfig, run_sweep
from .reporting import emit_csv, emit_svg

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTE = 3
EXIT_IO = 4

HEATMAP_TASKS = {"phase-diagram", "ssh-winding"}
LOG_SCALE_TASKS = {"qfi-scan", "collapse", "ssh-qfi"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensor",
        description="Modular quantum sensor sweeps: QFI scans, phase diagrams, "
        "scaling collapses, global sensing, and SSH topology.",
    )
    parser.add_argument("task", choices=TASKS, help="sweep task to run")
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument(
        "--workers", type=int, default=None, help="worker processes (overrides config)"
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config field by dotted path, e.g. model.inter_coupling=0.4",
    )
    return parser


def _load_config(args) -> SweepConfig:
    config = SweepConfig.from_json(args.config)
    overrides = [f"task={args.task}"]
    if args.out is not None:
        overrides.append(f"out_dir={args.out}")
    if args.workers is not None:
        overrides.append(f"workers={args.workers}")
    overrides.extend(args.overrides)
    return config.with_overrides(overrides)


def _figure_kind(config: SweepConfig) -> str | None:
    if not config.axes:
        return None
    if config.task in HEATMAP_TASKS and len(config.axes) == 2:
        return "heatmap"
    if len(config.axes) == 2 and config.task in ("ssh-qfi", "phase-diagram"):
        return "heatmap"
    return "lines"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args)
    except (ValidationError, OSError) as exc:
        print(f"sensor: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        table = run_sweep(config)
    except ValidationError as exc:
        print(f"sensor: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ModsenseError) as exc:
        print(f"sensor: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"sensor: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        os.makedirs(config.out_dir, exist_ok=True)
        csv_path = os.path.join(config.out_dir, f"{config.task}.csv")
        emit_csv(table, csv_path)
        outputs = [csv_path]
        kind = _figure_kind(config)
        if kind is not None:
            svg_path = os.path.join(config.out_dir, f"{config.task}.svg")
            emit_svg(table, kind, svg_path, log_scale=config.task in LOG_SCALE_TASKS)
            outputs.append(svg_path)
    except ValidationError as exc:
        print(f"sensor: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"sensor: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    n_failed = int(table.metadata.get("n_failed", "0"))
    summary = f"{table.n_rows} rows"
    if n_failed:
        summary += f" ({n_failed} failed)"
    extras = {
        k: v
        for k, v in table.metadata.items()
        if k in ("beta", "nu", "collapse_cost", "exponent_b", "exponent_b_err")
    }
    for key, value in sorted(extras.items()):
        summary += f", {key}={value}"
    print(f"sensor: {config.task}: {summary}")
    for path in outputs:
        print(f"sensor: wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
