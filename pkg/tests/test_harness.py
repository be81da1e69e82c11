import io
import math

import numpy as np
import pytest

from dmcflow import harness
from dmcflow.generators import DatasetSpec, generate_dataset, paper_symmetric_3x3, ternary_confusion
from dmcflow.simplex import sample_interior
from dmcflow.solvers import SolverConfig, run


@pytest.fixture(scope="module")
def tiny():
    return generate_dataset(DatasetSpec((2, 5), (0.0, 0.5, 1.0), 2, seed=7))


def test_default_tau_grid():
    grid = harness.default_tau_grid()
    assert len(grid) == 25
    assert grid[0] == 0.01 and grid[-1] == 30.0
    np.testing.assert_allclose(np.diff(grid), (30 - 0.01) / 24)


def test_start_point_is_shared_and_deterministic():
    a = harness.start_point("n005_s0.50_i00", 5, 0)
    assert a == harness.start_point("n005_s0.50_i00", 5, 0)
    assert a != harness.start_point("n005_s0.50_i01", 5, 0)
    assert a.is_interior()


class TestSweep:
    def test_record_count_and_order(self, tiny):
        taus = [0.5, 1.0, 2.0]
        recs = harness.sweep(tiny, taus)
        assert len(recs) == len(tiny) * len(taus) + len(tiny)
        assert recs == sorted(recs, key=harness.ExperimentRecord.sort_key)
        assert sum(r.method == "baa" for r in recs) == len(tiny)
        assert all(r.tau is None for r in recs if r.method == "baa")

    def test_default_grid_count(self, tiny):
        assert len(harness.sweep(tiny[:2])) == 2 * 25 + 2

    def test_relative_error_rules(self, tiny):
        for r in harness.sweep(tiny, [1.0]):
            assert r.absolute_error >= 0
            if r.ground_truth > harness.TRUTH_FLOOR:
                assert r.relative_error == pytest.approx(r.absolute_error / r.ground_truth)
            else:
                assert r.relative_error is None

    def test_tau_one_is_accurate(self, tiny):
        noisy = [r for r in harness.sweep(tiny, [1.0], method="mwu")
                 if r.tau == 1.0 and 0 < r.sigma < 1 and r.relative_error is not None]
        assert noisy and np.mean([r.relative_error for r in noisy]) <= 1e-4

    def test_csv_is_deterministic_and_versioned(self, tiny):
        a = harness.records_to_csv(harness.sweep(tiny, [1.0, 3.0]))
        b = harness.records_to_csv(harness.sweep(tiny, [1.0, 3.0]))
        assert a == b
        assert a.startswith("# dmcflow-records v1\n")
        assert "wall_time" not in a.splitlines()[1]

    def test_timing_column(self, tiny):
        recs = harness.sweep(tiny[:1], [1.0], timing=True)
        assert all(r.wall_time is not None and r.wall_time >= 0 for r in recs)
        assert "wall_time" in harness.records_to_csv(recs, timing=True).splitlines()[1]

    def test_workers_do_not_change_output(self, tiny):
        serial = harness.records_to_csv(harness.sweep(tiny, [1.0]))
        parallel = harness.records_to_csv(harness.sweep(tiny, [1.0], workers=2))
        assert serial == parallel

    def test_failures_are_recorded(self, tiny, monkeypatch):
        from dmcflow.errors import AllZero

        real = harness.run

        def flaky(ch, z0, cfg):
            if cfg.method == "euler_adjusted" and cfg.step_size > 2:
                raise AllZero("no positive mass")
            return real(ch, z0, cfg)

        monkeypatch.setattr(harness, "run", flaky)
        recs = harness.sweep(tiny[:3], [1.0, 5.0])
        assert len(recs) == 9
        bad = [r for r in recs if r.error]
        assert len(bad) == 3 and all(r.tau == 5.0 and "AllZero" in r.error for r in bad)
        assert all(math.isnan(r.capacity_estimate) and not r.converged for r in bad)


class TestCompare:
    def test_ratios_and_estimates(self, tiny):
        rows = harness.compare(tiny)
        assert len(rows) == len(tiny)
        for r in rows:
            assert abs(r["iterations_mwu"] - r["iterations_baa"]) <= 1
            assert abs(r["estimate_mwu"] - r["estimate_baa"]) <= 1e-6
            assert r["ratio"] == r["iterations_mwu"] / r["iterations_baa"]

    def test_csv(self, tiny):
        text = harness.dicts_to_csv("compare", harness.COMPARE_COLUMNS, harness.compare(tiny))
        kind, rows = harness.read_csv(io.StringIO(text))
        assert kind == "dmcflow-compare v1"
        assert list(rows[0]) == harness.COMPARE_COLUMNS


class TestTrajectory:
    def test_round_trip_objective(self, rng):
        ch = paper_symmetric_3x3()
        res = run(ch, sample_interior(3, rng), SolverConfig("euler_adjusted", record_trajectory=True))
        kind, rows = harness.read_csv(io.StringIO(harness.trajectory_csv(ch, res)))
        assert kind == "dmcflow-trajectory v1"
        for row in rows:
            z = [float(row[f"z{i}"]) for i in (1, 2, 3)]
            assert abs(harness.recompute_objective(ch, z) - float(row["objective"])) <= 1e-12

    def test_symmetric_final_row(self, rng):
        ch = paper_symmetric_3x3()
        res = run(ch, sample_interior(3, rng), SolverConfig("mwu", record_trajectory=True))
        header, rows = harness.trajectory_table(ch, res)
        assert header[-3:] == ["d1", "d2", "d3"]
        last = dict(zip(header, rows[-1]))
        assert np.abs(np.array([last["z1"], last["z2"], last["z3"]]) - 1 / 3).sum() < 1e-3
        assert last["objective"] == pytest.approx(0.23100652252696507, abs=1e-6)

    def test_baa_objective_non_decreasing(self, rng):
        ch = ternary_confusion()
        res = run(ch, sample_interior(3, rng), SolverConfig("baa", record_trajectory=True))
        header, rows = harness.trajectory_table(ch, res)
        obj = [r[header.index("objective")] for r in rows]
        assert all(b >= a - 1e-12 for a, b in zip(obj, obj[1:]))
        q = np.array([rows[-1][header.index("q1")], rows[-1][header.index("q2")]])
        assert np.abs(q - 0.5).sum() < 1e-3

    def test_no_direction_columns_for_other_sizes(self, rng):
        from dmcflow.generators import bsc

        ch = bsc(0.2)
        res = run(ch, [0.3, 0.7], SolverConfig("mwu", record_trajectory=True))
        header, _ = harness.trajectory_table(ch, res)
        assert header == ["iteration", "z1", "z2", "q1", "q2", "objective"]

    def test_requires_recording(self):
        res = run(ternary_confusion(), [0.2, 0.3, 0.5], SolverConfig("mwu"))
        with pytest.raises(ValueError):
            harness.trajectory_table(ternary_confusion(), res)


class TestDrift:
    def test_adjusted(self, rng):
        ch = paper_symmetric_3x3()
        res = run(ch, sample_interior(3, rng), SolverConfig("euler_adjusted", record_drift=True))
        text = harness.drift_csv(res)
        lines = text.splitlines()
        assert lines[0] == "# dmcflow-drift v1" and lines[1] == "iteration,correction,sum_error"
        assert lines[-1].startswith("# termination=tolerance")
        assert len(lines) == res.iterations + 3

    def test_classic_records_blow_up(self):
        from dmcflow.channel import load_channel

        ch = load_channel(np.random.default_rng(3).dirichlet(np.ones(4), size=4))
        res = run(ch, np.full(4, 0.25), SolverConfig("euler_classic", 30.0, record_drift=True))
        text = harness.drift_csv(res)
        assert f"iterations={res.iterations}" in text.splitlines()[-1]
        if res.termination_reason == "blow_up":
            assert not res.converged


def test_record_json_shape(tiny):
    out = harness.records_to_json(harness.sweep(tiny[:1], [1.0]))
    assert "wall_time" not in out[0]
    assert math.isfinite(out[0]["capacity_estimate"])
