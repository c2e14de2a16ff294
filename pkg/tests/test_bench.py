import math

from mppose.bench import (
    BenchConfig,
    bench_noise,
    bench_numeric,
    noise_trend_violations,
    run_trial,
    summarize_noise,
    summarize_numeric,
    worker_count,
)


def test_run_trial_fields():
    row = run_trial("p2l1", 0, 3)
    assert row.solver == "p2l1" and row.trial == 3 and row.status == "ok"
    assert row.n_solutions_cheiral <= row.n_solutions <= 4
    assert row.rot_err_deg < 1e-6 and row.solve_time_us > 0


def test_numeric_summary():
    rows = bench_numeric(BenchConfig(trials=10, seed=2))
    assert len(rows) == 20
    s = summarize_numeric(rows)
    assert set(s) == {"p1l2", "p2l1"}
    assert s["p2l1"]["recovered_fraction"] == 1.0
    assert sum(s["p1l2"]["n_solutions_hist"].values()) == 10


def test_noise_summary_and_trend():
    rows = bench_noise([0, 2], BenchConfig(trials=20, seed=1))
    assert len(rows) == 2 * 20 * 2
    s = summarize_noise(rows)
    for per in s.values():
        assert per[0]["rot_err_deg_mean"] < 1e-6
        assert per[1]["rot_err_deg_mean"] > per[0]["rot_err_deg_mean"]
    assert noise_trend_violations(s) == []


def test_trend_violation_detected():
    fake = {"x": [
        {"noise_px": 0, "rot_err_deg_mean": 5.0, "rot_err_deg_se": 0.1, "trans_err_mean": 1, "trans_err_se": 0.1},
        {"noise_px": 1, "rot_err_deg_mean": 1.0, "rot_err_deg_se": 0.1, "trans_err_mean": 1, "trans_err_se": 0.1},
    ]}
    assert noise_trend_violations(fake) == ["x rot_err_deg: 0 -> 1"]


def test_worker_count(monkeypatch):
    monkeypatch.delenv("MPPOSE_THREADS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("MPPOSE_THREADS", "3")
    assert worker_count() == 3
    assert worker_count(2) == 2
    monkeypatch.setenv("MPPOSE_THREADS", "lots")
    assert worker_count() == 1
