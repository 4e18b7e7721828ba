import json

import numpy as np
import pytest

from covts.estimators import sample_cov
from covts.harness import (ExperimentConfig, build_truth, config_hash,
                           cv_threshold, make_process, run_experiment,
                           trend_report, worker_count)
from covts.processes import ProcessSpec, simulate


def small_config(**overrides):
    base = dict(
        estimator="threshold_cov",
        process={"kind": "modulated",
                 "base": {"kind": "var1", "a_matrix": 0.0, "burn_in": 0},
                 "cov_path": {"kind": "truth"}},
        truth={"kind": "identity"},
        grid={"lo": 0.05, "hi": 2.0, "count": 5},
        n_list=[150], p_list=[12], replications=2, master_seed=99)
    base.update(overrides)
    return ExperimentConfig(**base)


# ---------------------------------------------------------------------- #
# config


def test_config_validation():
    with pytest.raises(ValueError):
        small_config(estimator="no_such")
    with pytest.raises(ValueError):
        small_config(grid={"lo": 1.0, "hi": 0.5, "count": 3})
    with pytest.raises(ValueError):
        small_config(replications=0)
    with pytest.raises(ValueError):
        small_config(n_list=[])
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({**small_config().to_dict(),
                                    "bogus_key": 1})


def test_config_grid_and_bandwidth():
    cfg = small_config(grid={"lo": 0.1, "hi": 1.0, "count": 4})
    g = cfg.grid_values()
    assert g[0] == pytest.approx(0.1) and g[-1] == pytest.approx(1.0)
    assert np.all(np.diff(np.log(g)) > 0)
    assert small_config().bandwidth_at(3125) == pytest.approx(
        3125.0 ** -0.2)
    cfg2 = small_config(bandwidth={"value": 0.17})
    assert cfg2.bandwidth_at(10) == 0.17


def test_config_hash_tamper_detection():
    d = small_config().to_dict()
    h = config_hash(d)
    assert config_hash(json.loads(json.dumps(d))) == h
    d2 = dict(d)
    d2["master_seed"] = 100
    assert config_hash(d2) != h


def test_config_json_file_roundtrip(tmp_path):
    cfg = small_config()
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    cfg2 = ExperimentConfig.from_json_file(path)
    assert cfg2.to_dict() == cfg.to_dict()


# ---------------------------------------------------------------------- #
# truth builders and process templates


def test_build_truth_kinds():
    assert np.array_equal(build_truth({"kind": "identity"}, 4, 0), np.eye(4))
    rq = build_truth({"kind": "rational_quadratic", "K": 4, "tau_power": 1 / 3},
                     30, 5)
    assert np.all(np.diag(rq) == 1.0)
    ge = build_truth({"kind": "gamma_exponential", "theta": 1.0, "tau": 2.0},
                     30, 5)
    assert np.all(np.diag(ge) == 1.0)
    banded = build_truth({"kind": "banded", "rho": 0.4, "width": 1}, 10, 0)
    assert np.linalg.eigvalsh(banded)[0] > 0
    assert np.sum(banded != 0) == 10 + 2 * 9
    ce = build_truth({"kind": "counterexample", "eps": "max"}, 10, 0)
    assert ce[0, 1] == pytest.approx(3.0 ** -1)
    with pytest.raises(ValueError):
        build_truth({"kind": "mystery"}, 5, 0)


def test_truth_sites_depend_on_master_seed_and_p():
    a = build_truth({"kind": "rational_quadratic", "K": 4, "tau": 2.0}, 20, 1)
    b = build_truth({"kind": "rational_quadratic", "K": 4, "tau": 2.0}, 20, 2)
    assert not np.array_equal(a, b)
    assert np.array_equal(
        a, build_truth({"kind": "rational_quadratic", "K": 4, "tau": 2.0},
                       20, 1))


def test_make_process_colors_by_truth():
    sigma = build_truth({"kind": "banded", "rho": 0.4, "width": 1}, 8, 0)
    spec = make_process({"kind": "modulated",
                         "base": {"kind": "var1", "a_matrix": 0.0,
                                  "burn_in": 0},
                         "cov_path": {"kind": "truth"}}, sigma, 8, seed=3)
    z = simulate(spec, 40_000)
    assert np.allclose(sample_cov(z), sigma, atol=0.08)


def test_make_process_truth_scale_path():
    sigma = np.eye(3)
    spec = make_process({"kind": "modulated",
                         "base": {"kind": "var1", "a_matrix": 0.0,
                                  "burn_in": 0},
                         "cov_path": {"kind": "truth_scale", "offset": 1.0,
                                      "slope": 1.0}}, sigma, 3, seed=1)
    from covts.processes import truth_at
    assert np.allclose(truth_at(spec, 0.5), 1.5 * np.eye(3))


# ---------------------------------------------------------------------- #
# experiment runs


def test_row_bookkeeping():
    res = run_experiment(small_config(), workers=1)
    assert len(res.rows) == 2 * 5  # replications x grid
    cfg = small_config(n_list=[100, 150], p_list=[6, 12], replications=3)
    res = run_experiment(cfg, workers=1)
    assert len(res.rows) == 3 * 5 * 2 * 2


def test_zero_estimator_risk_against_identity():
    # a grid point above every sample entry thresholds to the zero matrix,
    # whose normalized risk against the identity is exactly 1/p
    cfg = small_config(grid={"lo": 0.05, "hi": 5.0, "count": 4})
    res = run_experiment(cfg, workers=1)
    top = [r for r in res.rows if r[3] == cfg.grid_values()[-1]]
    assert all(r[6] == 0 for r in top)          # kept
    assert all(r[4] == pytest.approx(1.0 / 12.0) for r in top)


def test_rerun_and_parallel_byte_identical():
    cfg = small_config()
    serial = run_experiment(cfg, workers=1)
    again = run_experiment(cfg, workers=1)
    parallel = run_experiment(cfg, workers=3)
    assert serial.rows_csv_bytes() == again.rows_csv_bytes()
    assert serial.rows_csv_bytes() == parallel.rows_csv_bytes()


def test_result_files_written(tmp_path):
    res = run_experiment(small_config(), workers=1)
    paths = res.write(tmp_path / "out")
    rows = (tmp_path / "out" / "rows.csv").read_text().splitlines()
    assert rows[0] == "n,p,rep,grid_value,frob_risk,spectral_err,kept,runtime_ms"
    assert len(rows) == 1 + len(res.rows)
    meta = json.loads((tmp_path / "out" / "meta.json").read_text())
    assert meta["config_hash"] == config_hash(meta["config"])
    assert meta["version"]
    agg = (tmp_path / "out" / "aggregate.csv").read_text().splitlines()
    assert len(agg) == 1 + len(res.aggregate)
    assert paths["rows"].endswith("rows.csv")


def test_estimator_failure_flagged_not_fatal():
    # bandwidth far below 1/n empties the kernel window whenever the
    # evaluation time misses every grid point m/n
    cfg = small_config(estimator="kernel_cov_threshold",
                       bandwidth={"value": 0.0001},
                       eval_times=[0.512],
                       n_list=[60], replications=1)
    res = run_experiment(cfg, workers=1)
    assert len(res.meta["flags"]) == 5
    assert all(np.isnan(r[4]) for r in res.rows)
    assert all(f["flag"] == "ValueError" for f in res.meta["flags"])


def test_glasso_estimator_rows():
    cfg = small_config(
        estimator="glasso",
        truth={"kind": "banded", "rho": 0.3, "width": 1},
        grid={"lo": 0.05, "hi": 0.5, "count": 3},
        n_list=[120], p_list=[6], replications=2)
    res = run_experiment(cfg, workers=1)
    assert len(res.rows) == 6
    assert all(np.isfinite(r[4]) for r in res.rows)
    # kept counts the nonzero precision entries
    assert all(6 <= r[6] <= 36 for r in res.rows)


def test_tv_glasso_estimator_runs():
    cfg = small_config(
        estimator="tv_glasso",
        truth={"kind": "identity"},
        process={"kind": "modulated",
                 "base": {"kind": "var1", "a_matrix": 0.0, "burn_in": 0},
                 "cov_path": {"kind": "truth_scale", "offset": 1.0,
                              "slope": 1.0}},
        grid={"lo": 0.02, "hi": 0.2, "count": 2},
        n_list=[400], p_list=[4], replications=1,
        eval_times=[0.3, 0.7])
    res = run_experiment(cfg, workers=1)
    assert len(res.rows) == 2
    assert all(np.isfinite(r[4]) for r in res.rows)


def test_pd_threshold_estimator_rows():
    cfg = small_config(estimator="pd_threshold_cov")
    res = run_experiment(cfg, workers=1)
    assert all(np.isfinite(r[4]) for r in res.rows)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("COVTS_WORKERS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("COVTS_WORKERS", "0")
    with pytest.raises(ValueError):
        worker_count()
    monkeypatch.delenv("COVTS_WORKERS")
    assert worker_count() >= 1


# ---------------------------------------------------------------------- #
# cross-validated threshold


def test_cv_threshold_single_point_grid():
    z = simulate(ProcessSpec.var1(0.0, p=4, seed=1, burn_in=0), 50)
    res = cv_threshold(z, [0.3], splits=4, seed=0)
    assert res.u == 0.3


def test_cv_threshold_deterministic():
    z = simulate(ProcessSpec.var1(0.2, p=6, seed=2, burn_in=0), 400)
    grid = np.exp(np.linspace(np.log(0.01), np.log(1.0), 10))
    a = cv_threshold(z, grid, splits=6, seed=5)
    b = cv_threshold(z, grid, splits=6, seed=5)
    assert a.u == b.u
    assert np.array_equal(a.scores, b.scores)


def test_cv_threshold_kills_pure_noise_entries():
    # iid identity-covariance data: the selected threshold should exceed
    # the 95th percentile of the off-diagonal sample covariances in at
    # least 80% of repetitions
    grid = np.exp(np.linspace(np.log(0.01), np.log(1.0), 14))
    hits = 0
    reps = 50
    for rep in range(reps):
        z = simulate(ProcessSpec.var1(0.0, p=20, seed=3000 + rep,
                                      burn_in=0), 2000)
        s = sample_cov(z)
        off = np.abs(s[~np.eye(20, dtype=bool)])
        res = cv_threshold(z, grid, splits=8, seed=rep)
        hits += res.u > np.quantile(off, 0.95)
    assert hits >= 0.8 * reps


def test_cv_threshold_validation():
    z = np.zeros((3, 3))
    with pytest.raises(ValueError):
        cv_threshold(z, [0.1], splits=2, seed=0)
    z = np.zeros((3, 10))
    with pytest.raises(ValueError):
        cv_threshold(z, [], splits=2, seed=0)
    with pytest.raises(ValueError):
        cv_threshold(z, [0.5, 0.1], splits=2, seed=0)


def test_cv_tie_break_toward_larger_threshold():
    # a grid entirely above every sample entry scores identically (the
    # thresholded matrix is zero); ties resolve to the largest threshold
    z = simulate(ProcessSpec.var1(0.0, p=3, seed=4, burn_in=0), 60)
    top = float(np.max(np.abs(sample_cov(z)))) * 2
    grid = [top, top * 2, top * 4]
    res = cv_threshold(z, grid, splits=3, seed=1)
    assert res.u == top * 4


# ---------------------------------------------------------------------- #
# trend verdicts


def test_trend_slope_near_minus_one_for_iid():
    cfg = small_config(
        truth={"kind": "banded", "rho": 0.4, "width": 1},
        grid={"lo": 0.03, "hi": 0.6, "count": 10},
        n_list=[200, 800], p_list=[20], replications=10)
    res = run_experiment(cfg, workers=2)
    verdict = trend_report([res], "risk_slope_vs_n", band=(-1.0, 0.4))
    assert verdict.passed
    assert verdict.detail["bootstrap_se"] < 0.5


def test_trend_ordering_claims():
    cfg_a = small_config(grid={"lo": 0.05, "hi": 0.5, "count": 4},
                         master_seed=5)
    cfg_b = small_config(grid={"lo": 0.05, "hi": 0.5, "count": 4},
                         master_seed=6)
    res_a = run_experiment(cfg_a, workers=1)
    res_b = run_experiment(cfg_b, workers=1)
    v = trend_report([res_a, res_b], "optimal_threshold_ordering")
    assert isinstance(v.passed, bool)
    assert len(v.detail["optimal_thresholds"]) == 2
    # identical result sets trivially satisfy the (non-strict) ordering
    same = trend_report([res_a, res_a], "optimal_threshold_ordering")
    assert same.passed
    assert same.statistic == 0.0
    with pytest.raises(ValueError):
        trend_report([res_a], "unknown_claim")
