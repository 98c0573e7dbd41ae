"""Experiment harness tests: artifacts, aggregation, sweeps."""
from __future__ import annotations

import json
import math

import pytest

from sdcache.harness import (
    ExperimentSpec,
    aggregate,
    desk_config,
    make_solver,
    paper_config,
    run_experiment,
    sweep,
)
from sdcache.lyapunov import LyapunovConfig
from sdcache.metrics import MetricsTrace
from sdcache.types import DomainError


def _spec(**kw) -> ExperimentSpec:
    base = dict(
        name="exp",
        scenario=desk_config(seed=0, horizon_slots=12),
        lyapunov=LyapunovConfig(),
        solver="greedy",
        seeds=(0, 1),
    )
    base.update(kw)
    return ExperimentSpec(**base)


class TestPresets:
    def test_paper_scale(self):
        cfg = paper_config()
        assert cfg.n_rsus == 6 and cfg.n_regions == 16 and cfg.n_sds == 80

    def test_desk_scale_is_small(self):
        cfg = desk_config()
        assert cfg.n_rsus <= 3 and cfg.n_regions <= 4 and cfg.n_sds <= 12


class TestMakeSolver:
    def test_known_solvers(self):
        for name in ("bqpso", "exact", "greedy", "random"):
            assert callable(make_solver(name, seed=0,
                                        options={} if name != "bqpso"
                                        else {"particles": 5, "max_iterations": 2}))

    def test_unknown_rejected(self):
        with pytest.raises(DomainError):
            make_solver("oracle-of-delphi")


class TestRunExperiment:
    def test_artifacts_written(self, tmp_path):
        summary = run_experiment(_spec(), out_dir=tmp_path)
        for seed in (0, 1):
            assert (tmp_path / f"exp_seed{seed}.csv").exists()
            assert (tmp_path / f"exp_seed{seed}_timings.csv").exists()
        meta = json.loads((tmp_path / "exp.meta.json").read_text())
        assert meta["solver"] == "greedy"
        assert (tmp_path / "exp_summary.csv").exists()
        assert set(summary["per_seed"]) == {0, 1}

    def test_traces_reload(self, tmp_path):
        run_experiment(_spec(), out_dir=tmp_path)
        trace = MetricsTrace.from_csv(tmp_path / "exp_seed0.csv")
        assert len(trace) == 12

    def test_repeat_runs_byte_identical(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        run_experiment(_spec(), out_dir=a)
        run_experiment(_spec(), out_dir=b)
        assert (a / "exp_seed0.csv").read_bytes() == (b / "exp_seed0.csv").read_bytes()


class TestAggregate:
    def test_mean_and_std(self):
        rows = [{"m": 1.0}, {"m": 3.0}]
        agg = aggregate(rows)
        assert agg["m"]["mean"] == pytest.approx(2.0)
        assert agg["m"]["std"] == pytest.approx(1.0)

    def test_nan_tolerant(self):
        rows = [{"m": float("nan")}, {"m": 4.0}]
        assert aggregate(rows)["m"]["mean"] == pytest.approx(4.0)

    def test_all_nan(self):
        assert math.isnan(aggregate([{"m": float("nan")}])["m"]["mean"])


class TestSweep:
    def test_v_weight_sweep(self):
        results = sweep(_spec(), "v_weight", [1e-3, 8e-3])
        assert [r["sweep_value"] for r in results] == [1e-3, 8e-3]
        assert all("aggregate" in r for r in results)

    def test_congestion_sweep(self):
        results = sweep(_spec(), "congestion", ["none", "heavy"])
        assert len(results) == 2

    def test_unknown_parameter(self):
        with pytest.raises(DomainError):
            sweep(_spec(), "vibes", [1])
