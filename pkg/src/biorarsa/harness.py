"""Seeded Monte Carlo experiment grid.

A grid is the cartesian product schemes x node counts x initial stepsizes x
stopping fractions.  Every cell runs ``n_channels * n_sequences`` trials.
Channels depend only on (base_seed, node count, channel index), so every
scheme in a node-count column sees the same channels.  Perturbation streams
are seeded from a stable hash of the cell id and the (channel, sequence)
indices, so results do not depend on execution order or on which other
cells are in the grid.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from biorarsa.model import generate_channel
from biorarsa.schemes import SchemeKind, SchemeParams, TrialRecord, run_trial

_CHANNEL_STREAM = 0
_TRIAL_STREAM = 1


class NonConvergenceError(RuntimeError):
    """Raised when convergence is required and some trial hit the cap."""


@dataclass(frozen=True)
class Cell:
    scheme: SchemeKind
    n_transmitters: int
    delta0: float
    c_stop: float

    @property
    def cell_id(self) -> str:
        # repr() of a float round-trips exactly, so the id is stable across runs
        return f"{self.scheme.value}|n={self.n_transmitters}|d0={self.delta0!r}|c={self.c_stop!r}"

    @property
    def delta0_degrees(self) -> float:
        return math.degrees(self.delta0)


@dataclass(frozen=True)
class ExperimentGrid:
    schemes: tuple
    node_counts: tuple
    delta0_values: tuple
    c_stop_values: tuple
    n_channels: int = 20
    n_sequences: int = 20
    base_seed: int = 0
    amplitude_model: str = "rayleigh"
    power: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(SchemeKind(s) for s in self.schemes))
        object.__setattr__(self, "node_counts", tuple(int(n) for n in self.node_counts))
        object.__setattr__(self, "delta0_values", tuple(float(d) for d in self.delta0_values))
        object.__setattr__(self, "c_stop_values", tuple(float(c) for c in self.c_stop_values))
        for name in ("schemes", "node_counts", "delta0_values", "c_stop_values"):
            if not getattr(self, name):
                raise ValueError(f"{name} must not be empty")
        if min(self.node_counts) < 1:
            raise ValueError("node counts must be >= 1")
        if self.n_channels < 1 or self.n_sequences < 1:
            raise ValueError("n_channels and n_sequences must be >= 1")
        if self.base_seed < 0:
            raise ValueError("base_seed must be non-negative")

    def cells(self) -> list[Cell]:
        return [
            Cell(s, n, d, c)
            for s, n, d, c in itertools.product(
                self.schemes, self.node_counts, self.delta0_values, self.c_stop_values
            )
        ]

    @property
    def trials_per_cell(self) -> int:
        return self.n_channels * self.n_sequences


def stable_hash(text: str) -> int:
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


def channel_seed(base_seed: int, n_transmitters: int, channel_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([base_seed, _CHANNEL_STREAM, n_transmitters, channel_index])


def trial_seed(base_seed: int, cell: Cell, channel_index: int, sequence_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        [base_seed, _TRIAL_STREAM, stable_hash(cell.cell_id), channel_index, sequence_index]
    )


@dataclass(frozen=True)
class CellStats:
    cell: Cell
    mean: float
    stderr: float
    n_trials: int
    n_converged: int

    @property
    def converged_fraction(self) -> float:
        return self.n_converged / self.n_trials


@dataclass
class AggregateStats:
    grid: ExperimentGrid
    cells: list[CellStats]
    records: dict[Cell, list[TrialRecord]] | None = field(default=None, repr=False)

    def __getitem__(self, key) -> CellStats:
        """Look up a cell by a ``Cell`` or a (scheme, n, delta0, c_stop) tuple."""
        if not isinstance(key, Cell):
            scheme, n, d, c = key
            key = Cell(SchemeKind(scheme), int(n), float(d), float(c))
        for stats in self.cells:
            if stats.cell == key:
                return stats
        raise KeyError(key)

    @property
    def n_nonconverged(self) -> int:
        return sum(s.n_trials - s.n_converged for s in self.cells)

    def means_by_delta0(self, scheme, n_transmitters: int, c_stop: float) -> dict[float, float]:
        return {
            d: self[scheme, n_transmitters, d, c_stop].mean for d in self.grid.delta0_values
        }

    def gain_table(
        self,
        c_stop: float | None = None,
        baseline=SchemeKind.REVERSE_TRACKING,
        candidate=SchemeKind.BIORARSA,
    ) -> dict[tuple[float, int], float]:
        """Percent gain of ``candidate`` over ``baseline`` keyed by (delta0, n)."""
        c_stop = self.grid.c_stop_values[0] if c_stop is None else c_stop
        return {
            (d, n): gain_percent(
                self[baseline, n, d, c_stop].mean, self[candidate, n, d, c_stop].mean
            )
            for d in self.grid.delta0_values
            for n in self.grid.node_counts
        }

    def average_gain(self, c_stop: float | None = None, **kwargs) -> dict[int, float]:
        table = self.gain_table(c_stop, **kwargs)
        return {
            n: float(np.mean([table[d, n] for d in self.grid.delta0_values]))
            for n in self.grid.node_counts
        }

    def scaling_fit(self, scheme=SchemeKind.BIORARSA, delta0: float | None = None):
        """OLS of mean transmissions against node count, one fit per c_stop."""
        delta0 = self.grid.delta0_values[0] if delta0 is None else delta0
        return {
            c: linear_fit([(n, self[scheme, n, delta0, c].mean) for n in self.grid.node_counts])
            for c in self.grid.c_stop_values
        }


def _run_unit(grid: ExperimentGrid, params: SchemeParams, cell: Cell, channel_index: int, keep: bool):
    channel = generate_channel(
        cell.n_transmitters,
        grid.power,
        grid.amplitude_model,
        channel_seed(grid.base_seed, cell.n_transmitters, channel_index),
    )
    cell_params = replace(params, delta0=cell.delta0, c_stop=cell.c_stop)
    return [
        run_trial(
            cell.scheme,
            channel,
            cell_params,
            trial_seed(grid.base_seed, cell, channel_index, s),
            record=keep,
        )
        for s in range(grid.n_sequences)
    ]


def _run_unit_args(args):
    return _run_unit(*args)


def run_grid(
    grid: ExperimentGrid,
    params: SchemeParams | None = None,
    *,
    keep_records: bool = False,
    workers: int = 1,
    require_convergence: bool = False,
) -> AggregateStats:
    """Run every cell of ``grid``.

    ``params`` supplies hold_length, max_swim, alpha and the transmission cap;
    delta0 and c_stop come from the cell.  With ``workers > 1`` (channel, cell)
    units are spread over a process pool; the reduction is ordered, so the
    result is identical to a serial run.
    """
    params = SchemeParams() if params is None else params
    cells = grid.cells()
    units = [
        (grid, params, cell, ci, keep_records) for cell in cells for ci in range(grid.n_channels)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_unit_args, units, chunksize=1))
    else:
        results = [_run_unit_args(u) for u in units]

    stats, records = [], {}
    for i, cell in enumerate(cells):
        trials = [r for chunk in results[i * grid.n_channels:(i + 1) * grid.n_channels] for r in chunk]
        counts = np.array([t.transmissions for t in trials], dtype=float)
        n_conv = sum(t.converged for t in trials)
        stderr = float(counts.std(ddof=1) / math.sqrt(counts.size)) if counts.size > 1 else 0.0
        stats.append(CellStats(cell, float(counts.mean()), stderr, counts.size, n_conv))
        if keep_records:
            records[cell] = trials
    result = AggregateStats(grid, stats, records if keep_records else None)
    if require_convergence and result.n_nonconverged:
        bad = [s.cell.cell_id for s in stats if s.n_converged < s.n_trials]
        raise NonConvergenceError(f"{result.n_nonconverged} trials hit the cap in cells {bad}")
    return result


def gain_percent(n_baseline: float, n_candidate: float) -> float:
    """Relative saving of the candidate over the baseline, in percent."""
    if n_baseline == 0:
        raise ValueError("baseline transmission count must be non-zero")
    return (n_baseline - n_candidate) / n_baseline * 100.0


def linear_fit(points) -> tuple[float, float, float]:
    """Ordinary least squares y = slope * x + intercept; returns (slope, intercept, R^2)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise ValueError("need at least two (x, y) points")
    x, y = pts[:, 0], pts[:, 1]
    if np.ptp(x) == 0:
        raise ValueError("degenerate fit: all x values are equal")
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    ss_tot = float(np.sum((y - ym) ** 2))
    ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
    r_squared = 1.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
    return slope, intercept, r_squared


def robustness_spread(means_by_delta0) -> float:
    """max/min of mean transmissions across an initial-stepsize sweep."""
    values = list(dict(means_by_delta0).values())
    if len(values) < 2:
        raise ValueError("need at least two sweep entries")
    lo = min(values)
    if lo <= 0:
        raise ValueError("mean transmissions must be positive")
    return max(values) / lo
