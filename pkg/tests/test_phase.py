"""Tests for the phase-transition sweep harness."""

import json
import math

import numpy as np
import pytest

import lrd.phase as phase
from lrd.errors import NumericalError, ParseError
from lrd.instances import make_mc_instance
from lrd.phase import (CSV_COLUMNS, GRID_SCHEMA_VERSION, PhaseGrid,
                       cell_samples, read_csv, run_grid, write_csv)
from lrd.rng import derive_seed
from lrd.solvers import SolverConfig, solve_mc_bidual

# Small enough to keep every sweep in this file under a second.
TINY_MC = dict(problem="mc", n=(16,), rank=(1,), ratio=(0.8, 8.0),
               sampler=("uniform", "bernoulli"), trials=3, max_iters=400,
               tol=1e-9, threshold=1e-4)


class TestPhaseGrid:
    def test_defaults_and_coercion(self):
        g = PhaseGrid(n=[20, 40], rank=[1], ratio=[2.0], sampler=["uniform"])
        assert g.n == (20, 40)
        assert isinstance(g.rank, tuple)
        assert g.problem == "mc"

    def test_validation(self):
        with pytest.raises(ValueError):
            PhaseGrid(problem="pca")
        with pytest.raises(ValueError):
            PhaseGrid(n=())
        with pytest.raises(ValueError):
            PhaseGrid(rank=(0,))
        with pytest.raises(ValueError):
            PhaseGrid(ratio=(0.0,))
        with pytest.raises(ValueError):
            PhaseGrid(sampler=("grid",))
        with pytest.raises(ValueError):
            PhaseGrid(trials=0)
        with pytest.raises(ValueError):
            PhaseGrid(threshold=0.0)

    def test_cell_enumeration_order(self):
        g = PhaseGrid(n=(10, 20), rank=(1, 2), ratio=(2.0,),
                      sampler=("uniform", "bernoulli"))
        cells = g.cells()
        assert [c["index"] for c in cells] == list(range(8))
        # sampler varies fastest, n slowest
        assert (cells[0]["n"], cells[0]["rank"], cells[0]["sampler"]) == \
            (10, 1, "uniform")
        assert cells[1]["sampler"] == "bernoulli"
        assert cells[2]["rank"] == 2
        assert cells[4]["n"] == 20

    def test_json_round_trip(self, tmp_path):
        g = PhaseGrid(**TINY_MC)
        path = str(tmp_path / "grid.json")
        with open(path, "w") as fh:
            json.dump(g.to_json_dict(), fh)
        assert PhaseGrid.from_json(path) == g

    def test_json_dict_has_schema_version(self):
        assert PhaseGrid().to_json_dict()["schema_version"] == \
            GRID_SCHEMA_VERSION

    def test_from_json_diagnostics(self, tmp_path):
        path = str(tmp_path / "bad.json")

        with open(path, "w") as fh:
            fh.write('{"problem": "mc",\n  "n": [10,]}\n')
        with pytest.raises(ParseError) as err:
            PhaseGrid.from_json(path)
        assert err.value.line == 2

        with open(path, "w") as fh:
            fh.write("[1, 2]")
        with pytest.raises(ParseError, match="JSON object"):
            PhaseGrid.from_json(path)

        with open(path, "w") as fh:
            json.dump({"schema_version": 99}, fh)
        with pytest.raises(ParseError, match="schema_version"):
            PhaseGrid.from_json(path)

        with open(path, "w") as fh:
            json.dump({"problem": "mc", "bogus": 3}, fh)
        with pytest.raises(ParseError, match="bogus"):
            PhaseGrid.from_json(path)

        with open(path, "w") as fh:
            json.dump({"trials": 0}, fh)
        with pytest.raises(ParseError, match="trials"):
            PhaseGrid.from_json(path)

        with pytest.raises(ParseError) as err:
            PhaseGrid.from_json(str(tmp_path / "missing.json"))
        assert err.value.line == 0


class TestCellSamples:
    def test_mc_formula(self):
        # ratio counts multiples of the rank-r degrees of freedom r(2n - r)
        assert cell_samples("mc", 16, 1, 8.0) == round(8.0 * 31)
        assert cell_samples("mc", 40, 2, 3.0) == round(3.0 * 2 * 78)

    def test_mc_clamps(self):
        assert cell_samples("mc", 10, 3, 100.0) == 100
        assert cell_samples("mc", 10, 1, 1e-9) == 1

    def test_rpca_fraction_of_entries(self):
        assert cell_samples("rpca", 30, 1, 0.01) == 9
        assert cell_samples("rpca", 10, 2, 0.5) == 50
        assert cell_samples("rpca", 10, 1, 2.0) == 100


class TestRunGrid:
    def test_rows_match_cell_order_and_transition(self):
        rows = run_grid(PhaseGrid(**TINY_MC), master_seed=3, jobs=1)
        assert len(rows) == 4
        assert [r["ratio"] for r in rows] == [0.8, 0.8, 8.0, 8.0]
        for r in rows[:2]:
            assert r["successes"] == 0
            assert r["mean_rel_error"] > 0.1
        for r in rows[2:]:
            assert r["successes"] == r["trials"] == 3
            assert r["success_rate"] == 1.0
            assert r["mean_rel_error"] < 1e-6
            assert r["errors"] == 0

    def test_jobs_do_not_change_rows(self):
        g = PhaseGrid(**TINY_MC)
        assert run_grid(g, master_seed=3, jobs=1) == \
            run_grid(g, master_seed=3, jobs=2)

    def test_rows_independent_of_other_cells(self):
        # same cell at the same index gets the same seeds regardless of
        # what the rest of the grid contains
        a = dict(TINY_MC)
        b = dict(TINY_MC)
        b["ratio"] = (0.8, 3.0)
        rows_a = run_grid(PhaseGrid(**a), master_seed=3, jobs=1)
        rows_b = run_grid(PhaseGrid(**b), master_seed=3, jobs=1)
        assert rows_a[0] == rows_b[0]
        assert rows_a[1] == rows_b[1]

    def test_documented_seed_derivation(self):
        g = PhaseGrid(problem="mc", n=(16,), rank=(1,), ratio=(8.0,),
                      sampler=("uniform",), trials=2, max_iters=400,
                      tol=1e-9, threshold=1e-4)
        row = run_grid(g, master_seed=11, jobs=1)[0]
        cfg = SolverConfig(max_iters=400, tol=1e-9)
        rels = []
        for trial in range(2):
            seed = derive_seed(11, 0, trial)
            inst = make_mc_instance(16, 16, 1, (1.0,), m=row["m"],
                                    sampler="uniform", seed=seed)
            rep = solve_mc_bidual(inst.obs, inst.obs_values, 1, cfg)
            rels.append(np.linalg.norm(rep.solution - inst.x_star)
                        / np.linalg.norm(inst.x_star))
        assert row["mean_rel_error"] == pytest.approx(np.mean(rels))

    def test_rpca_cells(self):
        g = PhaseGrid(problem="rpca", n=(30,), rank=(1,), ratio=(0.01,),
                      sampler=("uniform", "bernoulli"), trials=2,
                      max_iters=4000, tol=1e-9, threshold=1e-3)
        rows = run_grid(g, master_seed=3, jobs=1)
        for r in rows:
            assert r["m"] == 9
            assert r["success_rate"] == 1.0
            assert r["errors"] == 0

    def test_trial_error_is_counted_not_fatal(self, monkeypatch):
        calls = {"k": 0}
        real = phase.solve_mc_bidual

        def flaky(obs, values, r, cfg):
            calls["k"] += 1
            if calls["k"] == 1:
                raise NumericalError("injected")
            return real(obs, values, r, cfg)

        monkeypatch.setattr(phase, "solve_mc_bidual", flaky)
        g = PhaseGrid(problem="mc", n=(16,), rank=(1,), ratio=(8.0,),
                      sampler=("uniform",), trials=3, max_iters=400)
        row = run_grid(g, master_seed=1, jobs=1)[0]
        assert row["errors"] == 1
        assert row["successes"] == 2
        assert row["success_rate"] == pytest.approx(2 / 3)

    def test_all_trials_failing_yields_nan_means(self, monkeypatch):
        def boom(obs, values, r, cfg):
            raise NumericalError("injected")

        monkeypatch.setattr(phase, "solve_mc_bidual", boom)
        g = PhaseGrid(problem="mc", n=(16,), rank=(1,), ratio=(8.0,),
                      sampler=("uniform",), trials=2, max_iters=10)
        row = run_grid(g, master_seed=1, jobs=1)[0]
        assert row["errors"] == 2
        assert row["successes"] == 0
        assert math.isnan(row["mean_rel_error"])
        assert math.isnan(row["mean_iterations"])

    def test_jobs_validation(self):
        with pytest.raises(ValueError):
            run_grid(PhaseGrid(**TINY_MC), jobs=0)


class TestCsv:
    def _rows(self):
        g = PhaseGrid(problem="mc", n=(16,), rank=(1,), ratio=(8.0,),
                      sampler=("uniform",), trials=2, max_iters=400)
        return run_grid(g, master_seed=5, jobs=1)

    def test_round_trip(self, tmp_path):
        rows = self._rows()
        path = str(tmp_path / "sweep.csv")
        write_csv(path, rows)
        back = read_csv(path)
        assert len(back) == len(rows)
        for got, want in zip(back, rows):
            assert tuple(got) == CSV_COLUMNS
            assert got["problem"] == want["problem"]
            assert int(got["m"]) == want["m"]
            assert float(got["success_rate"]) == want["success_rate"]
            assert float(got["mean_rel_error"]) == want["mean_rel_error"]

    def test_header_first_line(self, tmp_path):
        path = str(tmp_path / "sweep.csv")
        write_csv(path, [])
        with open(path) as fh:
            lines = fh.read().splitlines()
        assert lines == [",".join(CSV_COLUMNS)]
        assert read_csv(path) == []

    def test_nan_survives_round_trip(self, tmp_path):
        row = {c: 0 for c in CSV_COLUMNS}
        row.update(problem="mc", sampler="uniform",
                   mean_rel_error=float("nan"), mean_iterations=float("nan"))
        path = str(tmp_path / "sweep.csv")
        write_csv(path, [row])
        back = read_csv(path)[0]
        assert math.isnan(float(back["mean_rel_error"]))

    def test_wrong_header_rejected(self, tmp_path):
        path = str(tmp_path / "sweep.csv")
        with open(path, "w") as fh:
            fh.write("problem,n1\nmc,10\n")
        with pytest.raises(ParseError, match="header"):
            read_csv(path)
