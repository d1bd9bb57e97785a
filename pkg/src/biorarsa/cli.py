"""Command-line entry point: one subcommand per experiment.

    biorarsa sweep-delta --config sweep.json --out results/ --format csv

Outputs go into the ``--out`` directory together with ``config.json``, the
fully-resolved configuration (re-usable as ``--config``).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from biorarsa.config import EXPERIMENTS, FORMATS, ConfigError, RunConfig, dump_config, parse_config
from biorarsa.emit import (
    emit_results,
    gain_matrix_table,
    scaling_fit_table,
    stepsize_table,
    trajectory_table,
    trial_dump_table,
    degrees,
)
from biorarsa.harness import (
    Cell,
    ExperimentGrid,
    NonConvergenceError,
    channel_seed,
    run_grid,
    trial_seed,
)
from biorarsa.model import generate_channel
from biorarsa.schemes import SchemeKind, run_trial

log = logging.getLogger("biorarsa")


def build_grid(config: RunConfig) -> ExperimentGrid:
    return ExperimentGrid(
        schemes=config.schemes,
        node_counts=config.node_counts,
        delta0_values=config.delta0_values,
        c_stop_values=config.c_stop_values,
        n_channels=config.n_channels,
        n_sequences=config.n_sequences,
        base_seed=config.base_seed,
        amplitude_model=config.amplitude_model,
        power=config.power,
    )


def _single_trials(config: RunConfig):
    """Channel 0 / sequence 0 trial for every (scheme, n, delta0, c_stop)."""
    grid = build_grid(config)
    params = config.scheme_params()
    for cell in grid.cells():
        channel = generate_channel(
            cell.n_transmitters, grid.power, grid.amplitude_model,
            channel_seed(grid.base_seed, cell.n_transmitters, 0),
        )
        record = run_trial(
            cell.scheme,
            channel,
            replace(params, delta0=cell.delta0, c_stop=cell.c_stop),
            trial_seed(grid.base_seed, cell, 0, 0),
        )
        yield cell, record


def _trial_name(prefix: str, cell: Cell, config: RunConfig, ext: str) -> str:
    name = f"{prefix}_{cell.scheme.value}_n{cell.n_transmitters}_d0-{degrees(cell.delta0):g}"
    if len(config.c_stop_values) > 1:
        name += f"_c{cell.c_stop:g}"
    return f"{name}.{ext}"


def run_experiment(config: RunConfig) -> list[Path]:
    """Run ``config`` and write its output files; returns the paths written."""
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    ext = config.format
    written = []

    def emit(results, name):
        written.append(emit_results(results, config.format, out / f"{name}.{ext}"))

    if config.experiment in ("trajectory", "stepsize-trace"):
        to_table = trajectory_table if config.experiment == "trajectory" else stepsize_table
        prefix = "trajectory" if config.experiment == "trajectory" else "stepsize"
        for cell, record in _single_trials(config):
            if not record.converged:
                log.warning("%s did not converge within the cap", cell.cell_id)
            path = out / _trial_name(prefix, cell, config, ext)
            written.append(emit_results(to_table(record), config.format, path))
    else:
        stats = run_grid(
            build_grid(config),
            config.scheme_params(),
            keep_records=config.dump_trials,
            workers=config.workers,
            require_convergence=config.require_convergence,
        )
        if stats.n_nonconverged:
            log.warning("%d trials hit the transmission cap", stats.n_nonconverged)
        emit(stats, "cells")
        if config.dump_trials:
            emit(trial_dump_table(stats), "trials")
        if config.experiment == "sweep-nodes":
            emit(scaling_fit_table(stats, config.schemes[0], config.delta0), "scaling_fit")
        elif config.experiment == "gain-table":
            for c in config.c_stop_values:
                name = "gain_table" if len(config.c_stop_values) == 1 else f"gain_table_c{c:g}"
                emit(gain_matrix_table(stats, c), name)

    config_path = out / "config.json"
    config_path.write_text(dump_config(config), encoding="utf-8")
    written.append(config_path)
    return written


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biorarsa",
        description="One-bit feedback distributed beamforming experiments.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--seed", type=int, help="base seed")
        p.add_argument("--full-scale", action="store_true",
                       help="100 channels x 100 sequences at the large node counts")
        p.add_argument("--workers", type=int, help="process pool size")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else "{}"
        try:
            doc = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            raise ConfigError("<document>", f"invalid JSON ({exc})") from None
        if isinstance(doc, dict):
            overrides = {
                "output": args.out,
                "format": args.format,
                "base_seed": args.seed,
                "workers": args.workers,
            }
            doc.update({k: v for k, v in overrides.items() if v is not None})
            if args.full_scale:
                doc["full_scale"] = True
            text = json.dumps(doc)
        config = parse_config(text, args.experiment)
        written = run_experiment(config)
    except ConfigError as exc:
        print(f"biorarsa: config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, NonConvergenceError) as exc:
        print(f"biorarsa: {exc}", file=sys.stderr)
        return 1
    for path in written:
        log.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
