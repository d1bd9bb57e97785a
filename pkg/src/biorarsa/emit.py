"""Figure-ready CSV/JSON output.

Everything is written as a table: an ordered list of column names plus rows.
CSV gets one header row; JSON is a list of objects with the same keys in the
same order.  Floats are written with ``repr`` so output is byte-stable.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from biorarsa.harness import AggregateStats
from biorarsa.schemes import TrialRecord

CELL_COLUMNS = (
    "scheme",
    "n_transmitters",
    "delta0_deg",
    "c_stop",
    "mean",
    "stderr",
    "n_trials",
    "converged_fraction",
)
RECORD_COLUMNS = (
    "index",
    "scheme",
    "transmissions",
    "converged",
    "target_magnitude",
    "final_magnitude",
)


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple]

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row {row!r} does not match columns {self.columns}")


def degrees(radians: float) -> float:
    # strip float noise from the deg -> rad -> deg round trip (3.0000000000000004)
    return round(math.degrees(radians), 10)


def cell_table(stats: AggregateStats) -> Table:
    rows = [
        (
            s.cell.scheme.value,
            s.cell.n_transmitters,
            degrees(s.cell.delta0),
            s.cell.c_stop,
            s.mean,
            s.stderr,
            s.n_trials,
            s.converged_fraction,
        )
        for s in stats.cells
    ]
    return Table(CELL_COLUMNS, rows)


def record_table(records) -> Table:
    rows = [
        (i, r.kind.value, r.transmissions, r.converged, r.target_magnitude, r.final_magnitude)
        for i, r in enumerate(records)
    ]
    return Table(RECORD_COLUMNS, rows)


def trial_dump_table(stats: AggregateStats) -> Table:
    """One row per trial with its cell keys and (channel, sequence) indices."""
    if stats.records is None:
        raise ValueError("grid was run without keep_records")
    columns = (
        "scheme",
        "n_transmitters",
        "delta0_deg",
        "c_stop",
        "channel_index",
        "sequence_index",
        "transmissions",
        "converged",
    )
    n_seq = stats.grid.n_sequences
    rows = []
    for s in stats.cells:
        c = s.cell
        for i, r in enumerate(stats.records[c]):
            rows.append(
                (c.scheme.value, c.n_transmitters, degrees(c.delta0), c.c_stop,
                 i // n_seq, i % n_seq, r.transmissions, r.converged)
            )
    return Table(columns, rows)


def gain_matrix_table(stats: AggregateStats, c_stop: float | None = None, **kwargs) -> Table:
    """Gain (%) rows per initial stepsize, node counts across, plus an average row."""
    grid = stats.grid
    table = stats.gain_table(c_stop, **kwargs)
    average = stats.average_gain(c_stop, **kwargs)
    columns = ("delta0_deg", *(f"n={n}" for n in grid.node_counts))
    rows = [
        (degrees(d), *(table[d, n] for n in grid.node_counts)) for d in grid.delta0_values
    ]
    rows.append(("average gain", *(average[n] for n in grid.node_counts)))
    return Table(columns, rows)


def scaling_fit_table(stats: AggregateStats, scheme="biorarsa", delta0=None) -> Table:
    fits = stats.scaling_fit(scheme, delta0)
    rows = [(c, *fit) for c, fit in fits.items()]
    return Table(("c_stop", "slope", "intercept", "r_squared"), rows)


def trajectory_table(record: TrialRecord) -> Table:
    """Received magnitude per transmission; ``magnitude`` is the accepted (best) value."""
    probes = np.concatenate([[record.initial_magnitude], record.probe_magnitudes])
    best = np.maximum.accumulate(probes)
    rows = [
        (i, float(b), float(p), record.target_magnitude)
        for i, (b, p) in enumerate(zip(best, probes))
    ]
    return Table(("transmission", "magnitude", "probe_magnitude", "target_magnitude"), rows)


def stepsize_table(record: TrialRecord) -> Table:
    rows = [(epoch, delta, math.degrees(delta)) for epoch, delta in record.stepsize_trace]
    return Table(("epoch", "delta_radians", "delta_degrees"), rows)


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def render(table: Table, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.columns)
        writer.writerows([[_jsonable(v) for v in row] for row in table.rows])
        return buf.getvalue()
    if fmt == "json":
        objs = [dict(zip(table.columns, map(_jsonable, row))) for row in table.rows]
        return json.dumps(objs, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_results(results, fmt: str, path) -> Path:
    """Write aggregates, trial records or a prepared :class:`Table` to ``path``.

    Raises OSError if the path cannot be written.
    """
    if isinstance(results, AggregateStats):
        table = cell_table(results)
    elif isinstance(results, Table):
        table = results
    else:
        table = record_table(list(results))
    path = Path(path)
    text = render(table, fmt)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path
