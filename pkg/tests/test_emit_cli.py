import csv
import json
import math

import pytest

from biorarsa.cli import main, run_experiment
from biorarsa.config import parse_config
from biorarsa.emit import (
    CELL_COLUMNS,
    RECORD_COLUMNS,
    cell_table,
    emit_results,
    gain_matrix_table,
    render,
    stepsize_table,
    trajectory_table,
)
from biorarsa.harness import ExperimentGrid, run_grid
from biorarsa.model import generate_channel
from biorarsa.schemes import SchemeParams, run_trial


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def stats():
    grid = ExperimentGrid(
        ["reverse_tracking", "biorarsa"], [6, 10], [math.radians(1), math.radians(5)], [0.75],
        n_channels=2, n_sequences=2,
    )
    return run_grid(grid)


class TestEmit:
    def test_cell_csv(self, stats, tmp_path):
        path = emit_results(stats, "csv", tmp_path / "cells.csv")
        rows = read_csv(path)
        assert tuple(rows[0]) == CELL_COLUMNS
        assert len(rows) - 1 == len(stats.cells)
        assert rows[1][0] == "reverse_tracking" and float(rows[1][2]) == 1.0

    def test_json_mirrors_csv(self, stats, tmp_path):
        objs = json.loads((emit_results(stats, "json", tmp_path / "c.json")).read_text())
        assert len(objs) == len(stats.cells)
        assert tuple(objs[0]) == CELL_COLUMNS
        rows = read_csv(emit_results(stats, "csv", tmp_path / "c.csv"))
        assert [str(v) for v in objs[0].values()] == rows[1]

    def test_empty_records(self, tmp_path):
        rows = read_csv(emit_results([], "csv", tmp_path / "t.csv"))
        assert rows == [list(RECORD_COLUMNS)]

    def test_records_table(self, tmp_path):
        ch = generate_channel(5, 1.0, "unit", 0)
        recs = [run_trial("one_bit", ch, SchemeParams(), s) for s in range(3)]
        rows = read_csv(emit_results(recs, "csv", tmp_path / "t.csv"))
        assert len(rows) == 4

    def test_gain_matrix_layout(self, stats):
        table = gain_matrix_table(stats)
        assert table.columns == ("delta0_deg", "n=6", "n=10")
        assert [r[0] for r in table.rows] == [1.0, 5.0, "average gain"]

    def test_trajectory_and_stepsize_tables(self):
        ch = generate_channel(10, 1.0, "rayleigh", 0)
        rec = run_trial("biorarsa", ch, SchemeParams(hold_length=2), 1)
        traj = trajectory_table(rec)
        assert traj.columns[:2] == ("transmission", "magnitude")
        assert len(traj.rows) == rec.transmissions + 1
        assert {r[3] for r in traj.rows} == {rec.target_magnitude}
        steps = stepsize_table(rec)
        assert steps.columns == ("epoch", "delta_radians", "delta_degrees")
        assert steps.rows[0][2] == pytest.approx(3.0)

    def test_unwritable_path(self, stats, tmp_path):
        with pytest.raises(OSError):
            emit_results(stats, "csv", tmp_path / "missing" / "x.csv")

    def test_render_unknown_format(self, stats):
        with pytest.raises(ValueError):
            render(cell_table(stats), "xml")


SMALL = {"n_channels": 2, "n_sequences": 2, "node_counts": [6, 10]}


class TestCli:
    def test_gain_table_files(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(SMALL | {"delta0_deg": [1, 3, 5, 7, 9, 11]}))
        assert main(["gain-table", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
        rows = read_csv(tmp_path / "o" / "gain_table.csv")
        assert [r[0] for r in rows[1:]] == ["1.0", "3.0", "5.0", "7.0", "9.0", "11.0", "average gain"]
        assert rows[0] == ["delta0_deg", "n=6", "n=10"]
        cells = read_csv(tmp_path / "o" / "cells.csv")
        assert len(cells) - 1 == 2 * 2 * 6

    def test_trajectory_two_schemes(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"schemes": ["one_bit", "biorarsa"], "node_counts": [8], "delta0_deg": 3}))
        assert main(["trajectory", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
        files = sorted(p.name for p in (tmp_path / "o").glob("trajectory_*.csv"))
        assert files == ["trajectory_biorarsa_n8_d0-3.csv", "trajectory_one_bit_n8_d0-3.csv"]
        rows = read_csv(tmp_path / "o" / files[0])
        assert rows[0] == ["transmission", "magnitude", "probe_magnitude", "target_magnitude"]

    def test_stepsize_trace(self, tmp_path):
        out = tmp_path / "o"
        assert main(["stepsize-trace", "--out", str(out), "--format", "json"]) == 0
        objs = json.loads((out / "stepsize_biorarsa_n100_d0-9.json").read_text())
        assert objs[0]["epoch"] == 0 and objs[0]["delta_degrees"] == pytest.approx(9.0)

    def test_sweep_nodes_writes_fit(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(SMALL))
        assert main(["sweep-nodes", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
        rows = read_csv(tmp_path / "o" / "scaling_fit.csv")
        assert rows[0] == ["c_stop", "slope", "intercept", "r_squared"]
        assert len(rows) == 5

    def test_dump_trials(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(SMALL | {"dump_trials": True, "schemes": ["biorarsa"], "delta0_deg": 3}))
        assert main(["sweep-delta", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
        rows = read_csv(tmp_path / "o" / "trials.csv")
        assert len(rows) - 1 == 2 * 4

    def test_config_echo_round_trip(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(SMALL))
        main(["sweep-delta", "--config", str(cfg), "--out", str(tmp_path / "o"), "--seed", "4"])
        echoed = parse_config((tmp_path / "o" / "config.json").read_text())
        assert echoed.base_seed == 4
        assert echoed == parse_config(json.dumps(SMALL | {"base_seed": 4, "output": str(tmp_path / "o")}), "sweep-delta")

    def test_bad_config_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"c_stop": 1.5}')
        assert main(["sweep-delta", "--config", str(cfg), "--out", str(tmp_path)]) == 2
        assert "c_stop" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["sweep-delta", "--config", str(tmp_path / "nope.json")]) == 1

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert main(["sweep-delta", "--out", str(blocker / "sub")]) == 1

    def test_byte_identical_reruns(self, tmp_path):
        cfg = parse_config(json.dumps(SMALL | {"output": str(tmp_path / "a")}), "gain-table")
        first = run_experiment(cfg)
        second = run_experiment(cfg.__class__(**{**cfg.__dict__, "output": str(tmp_path / "b")}))
        for a, b in zip(first, second):
            if a.name != "config.json":
                assert a.read_bytes() == b.read_bytes()
