"""Grid runner: configs, cells, CSV schema, regions, variance, heatmaps."""

import json
import os

import numpy as np
import pytest

from entanglab import experiments as ex
from entanglab import shadows
from entanglab.measurement import EXACT_SHOTS


def test_config_validation():
    cfg = ex.ExperimentConfig(dims=[2], ns=[4], ss=[8], methods=[ex.SVM_SWAP])
    assert cfg.dims == (2,) and cfg.methods == (ex.SVM_SWAP,)
    for bad in (
        dict(dims=()),
        dict(dims=(1,)),
        dict(ns=(1,)),
        dict(ss=(-1,)),
        dict(methods=("svm_fancy",)),
        dict(test_count=0),
        dict(trials=0),
        dict(success_threshold=0.5),
        dict(success_threshold=1.2),
    ):
        with pytest.raises(ex.ConfigError):
            ex.ExperimentConfig(**bad)


def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(ex.ConfigError):
        ex.config_from_dict({"dims": [2], "n_train": [4]})


def test_load_config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"dims": [2], "ns": [4], "ss": [8], "trials": 1}))
    cfg = ex.load_config(str(path))
    assert cfg.dims == (2,) and cfg.trials == 1
    with pytest.raises(ex.ConfigError):
        ex.load_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    with pytest.raises(ex.ConfigError):
        ex.load_config(str(bad))


def test_variance_config_validation():
    with pytest.raises(ex.ConfigError):
        ex.VarianceConfig(modes=("three_copy",))
    with pytest.raises(ex.ConfigError):
        ex.VarianceConfig(ns=(8,))
    with pytest.raises(ex.ConfigError):
        ex.variance_config_from_dict({"d": 2, "mystery": 1})


def test_cell_seed_distinct_and_stable():
    s1 = ex.cell_seed(0, 2, 16, 64, ex.SVM_SWAP, 0)
    s2 = ex.cell_seed(0, 2, 16, 64, ex.SVM_SWAP, 1)
    s3 = ex.cell_seed(0, 2, 16, 64, ex.SVM_EXACT, 0)
    assert len({s1, s2, s3}) == 3
    assert s1 == ex.cell_seed(0, 2, 16, 64, ex.SVM_SWAP, 0)


def test_run_cell_deterministic():
    a = ex.run_cell(2, 4, 8, ex.SVM_SWAP, seed=99, test_count=10)
    b = ex.run_cell(2, 4, 8, ex.SVM_SWAP, seed=99, test_count=10)
    assert a.success_rate == b.success_rate
    assert a.cost.swap_tests == b.cost.swap_tests
    assert a.stderr == pytest.approx(
        np.sqrt(a.success_rate * (1 - a.success_rate) / 10)
    )


def test_run_cell_costs_svm():
    n, s, m = 4, 8, 6
    r = ex.run_cell(2, n, s, ex.SVM_SWAP, seed=1, test_count=m)
    train_pairs = (2 * n) * (2 * n - 1) // 2
    want_swaps = s * train_pairs + s * (2 * n) * m
    assert r.cost.swap_tests == want_swaps
    assert r.cost.state_copies == 2 * want_swaps


def test_run_cell_costs_meanest():
    n, s, m = 5, 8, 7
    r = ex.run_cell(2, n, s, ex.MEANEST_TWO, seed=2, test_count=m)
    pairs = n * (n - 1) // 2
    want = 2 * s * pairs + 2 * s * n * m
    assert r.cost.swap_tests == want
    assert r.cost.state_copies == 4 * want  # two copies of each state per test
    r1 = ex.run_cell(2, n, s, ex.MEANEST_SINGLE, seed=2, test_count=m)
    assert r1.cost.swap_tests == want
    assert r1.cost.state_copies == 2 * want


def test_run_cell_costs_shadow():
    n, s, m = 4, 300, 5
    r = ex.run_cell(2, n, s, ex.SVM_SHADOW, seed=3, test_count=m)
    n_u, n_m = shadows.shadow_plan(s, 4)
    assert r.cost.swap_tests == 0
    assert r.cost.state_copies == (2 * n + m) * n_u * n_m


def test_run_cell_exact_method_ignores_shots():
    a = ex.run_cell(2, 4, 123, ex.SVM_EXACT, seed=4, test_count=8)
    b = ex.run_cell(2, 4, 456, ex.SVM_EXACT, seed=4, test_count=8)
    assert a.success_rate == b.success_rate
    assert a.cost.swap_tests == 0


def test_run_grid_order_skips_and_dedupe():
    cfg = ex.ExperimentConfig(
        dims=(2,),
        ns=(4,),
        ss=(1, 8),
        methods=(ex.MEANEST_SINGLE, ex.SVM_EXACT),
        test_count=6,
        trials=2,
        base_seed=5,
    )
    run = ex.run_grid(cfg)
    # meanest_single rejects S=1 (U-statistic needs two shots) -> skip records
    assert len(run.skips) == 2  # one per trial
    assert all(sk.method == ex.MEANEST_SINGLE and sk.s == 1 for sk in run.skips)
    # svm_exact collapses the shots axis onto the sentinel
    exact_rows = [r for r in run.rows if r.method == ex.SVM_EXACT]
    assert len(exact_rows) == 2
    assert all(r.s == EXACT_SHOTS for r in exact_rows)
    keys = [r.sort_key() for r in run.rows]
    assert keys == sorted(keys)


def test_grid_parallel_matches_serial(monkeypatch):
    cfg = ex.ExperimentConfig(
        dims=(2,), ns=(4,), ss=(8,), methods=(ex.SVM_SWAP, ex.MEANEST_TWO),
        test_count=6, trials=2, base_seed=6,
    )
    monkeypatch.delenv(ex.WORKERS_ENV_VAR, raising=False)
    serial = ex.rows_to_csv(ex.run_grid(cfg).rows)
    monkeypatch.setenv(ex.WORKERS_ENV_VAR, "2")
    parallel = ex.rows_to_csv(ex.run_grid(cfg).rows)
    assert serial == parallel


def test_csv_roundtrip(tmp_path):
    cfg = ex.ExperimentConfig(
        dims=(2,), ns=(4,), ss=(8,), methods=(ex.SVM_SWAP,), test_count=5, trials=2
    )
    rows = ex.run_grid(cfg).rows
    text = ex.rows_to_csv(rows)
    assert text.splitlines()[0] == ex.CSV_HEADER
    parsed = ex.rows_from_csv_text(text)
    assert ex.rows_to_csv(parsed) == text
    path = tmp_path / "grid.csv"
    ex.write_csv(rows, str(path))
    assert ex.rows_to_csv(ex.read_csv(str(path))) == text
    with pytest.raises(ex.ConfigError):
        ex.rows_from_csv_text("not,a,grid\n1,2,3\n")
    with pytest.raises(ex.ConfigError):
        ex.read_csv(str(tmp_path / "absent.csv"))


def _fake_row(d, n, s, method, trial_seed, rate, stderr):
    from entanglab.measurement import CostReport

    cost = CostReport()
    cost.add("total", 0, 0)
    return ex.CellResult(d, n, s, method, trial_seed, rate, stderr, 0, cost)


def test_pool_trials_math():
    rows = [
        _fake_row(2, 4, 8, "svm_swap", 1, 0.9, 0.03),
        _fake_row(2, 4, 8, "svm_swap", 2, 1.0, 0.04),
    ]
    pooled = ex.pool_trials(rows)
    mean, se = pooled[(2, "svm_swap", 4, 8)]
    assert mean == pytest.approx(0.95)
    assert se == pytest.approx(np.sqrt(0.03**2 + 0.04**2) / 2)


def test_success_region_is_conservative():
    rows = [
        _fake_row(2, 4, 8, "m", 1, 1.0, 0.002),    # 1.0 - 0.002 >= 0.99: in
        _fake_row(2, 4, 16, "m", 1, 0.995, 0.01),  # 0.985 < 0.99: out
        _fake_row(2, 8, 8, "m", 1, 0.97, 0.001),   # below threshold: out
    ]
    region = ex.success_region(rows, 0.99)
    assert region[(2, "m")] == {(4, 8)}


def test_region_frontier():
    cells = {(4, 16), (4, 8), (8, 16), (16, 4)}
    assert ex.region_frontier(cells) == {4: 8, 8: 16, 16: 4}


def test_variance_sweep_shape():
    vc = ex.VarianceConfig(d=2, ns=(4, 8), ss=(4, 8), fixed_n=4, fixed_s=4, trials=60)
    sweep = ex.variance_sweep(vc)
    modes = vc.modes
    assert len(sweep["rows"]) == len(modes) * (2 + 3 * 2)
    for mode in modes:
        for key in ("train_vs_S", "train_vs_N", "test_vs_N", "score_vs_N"):
            assert f"{key}/{mode}" in sweep["slopes"]
    table = ex.variance_table_csv(sweep)
    assert table.startswith("quantity,mode,axis,point,variance\n")
    assert "slope,value" in table


def test_heatmaps_deterministic(tmp_path):
    rows = [
        _fake_row(2, 4, 0, "svm_exact", 1, 1.0, 0.001),   # exact sentinel row
        _fake_row(2, 4, 8, "svm_swap", 1, 0.8, 0.05),
        _fake_row(2, 4, 16, "svm_swap", 1, 1.0, 0.001),
        _fake_row(2, 8, 8, "svm_swap", 1, 0.9, 0.04),
        _fake_row(2, 8, 16, "svm_swap", 1, 1.0, 0.001),
    ]
    out1 = tmp_path / "p1"
    out2 = tmp_path / "p2"
    paths1 = ex.write_heatmaps(rows, str(out1), threshold=0.99)
    paths2 = ex.write_heatmaps(rows, str(out2), threshold=0.99)
    assert sorted(os.path.basename(p) for p in paths1) == [
        "success_d2_svm_exact.svg",
        "success_d2_svm_swap.svg",
    ]
    for p1, p2 in zip(sorted(paths1), sorted(paths2)):
        assert open(p1, "rb").read() == open(p2, "rb").read()
    ns_paths = ex.write_heatmaps(rows, str(tmp_path / "p3"), xaxis="NS")
    assert all(p.endswith("_ns.svg") for p in ns_paths)
    with pytest.raises(ex.ConfigError):
        ex.write_heatmaps(rows, str(tmp_path / "p4"), xaxis="Q")


def test_run_cell_rejects_unknown_method():
    with pytest.raises(ex.ConfigError):
        ex.run_cell(2, 4, 8, "svm_fancy", seed=1)
