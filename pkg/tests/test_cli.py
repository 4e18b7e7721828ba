import json

import numpy as np

from covts.cli import main
from covts.covmodels import load_data_csv, load_matrix_csv


def test_simulate_and_estimate_cov_roundtrip(tmp_path):
    data = tmp_path / "z.csv"
    assert main(["simulate", "--kind", "var1", "--p", "5", "--n", "300",
                 "--coeff", "0.4", "--seed", "3", "--out", str(data)]) == 0
    z = load_data_csv(data)
    assert z.shape == (5, 300)

    est = tmp_path / "t.csv"
    assert main(["estimate-cov", "--data", str(data), "--u", "0.2",
                 "--out", str(est)]) == 0
    t = load_matrix_csv(est)
    assert t.shape == (5, 5)
    assert np.all((np.abs(t) >= 0.2) | (t == 0.0))

    pd_est = tmp_path / "pd.csv"
    assert main(["estimate-cov", "--data", str(data), "--method", "pd",
                 "--u", "0.2", "--v", "0.05", "--out", str(pd_est)]) == 0
    assert np.linalg.eigvalsh(load_matrix_csv(pd_est))[0] >= 0.05 - 1e-10

    kern = tmp_path / "k.csv"
    assert main(["estimate-cov", "--data", str(data), "--method", "kernel",
                 "--t", "0.5", "--b", "0.2", "--u", "0.0",
                 "--out", str(kern)]) == 0
    assert load_matrix_csv(kern).shape == (5, 5)


def test_estimate_precision_outputs_json(tmp_path):
    data = tmp_path / "z.csv"
    main(["simulate", "--kind", "var1", "--p", "4", "--n", "200",
          "--coeff", "0.0", "--seed", "1", "--out", str(data)])
    out = tmp_path / "om.json"
    assert main(["estimate-precision", "--data", str(data), "--lam", "0.2",
                 "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["lambda"] == 0.2
    assert payload["kkt_residual"] <= 1e-6
    assert len(payload["omega"]) == 4

    out_corr = tmp_path / "omc.json"
    assert main(["estimate-precision", "--data", str(data), "--lam", "0.2",
                 "--variant", "corr", "--out", str(out_corr)]) == 0
    assert json.loads(out_corr.read_text())["meta"]["variant"] == "correlation"

    out_tv = tmp_path / "omtv.json"
    assert main(["estimate-precision", "--data", str(data), "--lam", "0.2",
                 "--t", "0.5", "--b", "0.3", "--out", str(out_tv)]) == 0
    assert json.loads(out_tv.read_text())["meta"]["t"] == 0.5

    mat_out = tmp_path / "om.csv"
    assert main(["estimate-precision", "--data", str(data), "--lam", "0.2",
                 "--out", str(tmp_path / "om2.json"),
                 "--matrix-out", str(mat_out)]) == 0
    omega = load_matrix_csv(mat_out)
    assert np.array_equal(
        omega, np.array(json.loads((tmp_path / "om2.json").read_text())["omega"]))


def test_rates_subcommand(capsys):
    assert main(["rates", "--n", "100", "--q", "4", "--alpha", "0.3",
                 "--solve", "u-diamond", "--u", "0.5"]) == 0
    out = capsys.readouterr().out
    assert "regime=weak" in out
    assert "u-diamond: root=" in out
    assert "residual=" in out


def test_rates_classify(capsys):
    assert main(["rates", "--n", "100", "--p", "200", "--q", "4",
                 "--alpha", "0.3", "--classify", "1.0", "200.0"]) == 0
    out = capsys.readouterr().out
    assert "case=iii" in out


def test_experiment_subcommand(tmp_path):
    cfg = {"estimator": "threshold_cov",
           "process": {"kind": "modulated",
                       "base": {"kind": "var1", "a_matrix": 0.0,
                                "burn_in": 0},
                       "cov_path": {"kind": "truth"}},
           "truth": {"kind": "identity"},
           "grid": {"lo": 0.05, "hi": 1.0, "count": 3},
           "n_list": [80], "p_list": [6], "replications": 2,
           "master_seed": 11}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out_dir = tmp_path / "results"
    assert main(["experiment", "--config", str(cfg_path), "--out",
                 str(out_dir), "--workers", "1"]) == 0
    rows = (out_dir / "rows.csv").read_text().splitlines()
    assert len(rows) == 1 + 2 * 3
    meta = json.loads((out_dir / "meta.json").read_text())
    assert meta["seed"] == 11


def test_cv_threshold_subcommand(tmp_path, capsys):
    data = tmp_path / "z.csv"
    main(["simulate", "--kind", "var1", "--p", "6", "--n", "400",
          "--coeff", "0.0", "--seed", "2", "--out", str(data)])
    assert main(["cv-threshold", "--data", str(data), "--grid",
                 "0.05,1.0,6", "--splits", "4", "--seed", "1"]) == 0
    assert "selected u=" in capsys.readouterr().out


def test_fig2_subcommand(tmp_path, capsys):
    assert main(["fig2", "--out", str(tmp_path / "figs"), "--seed", "5",
                 "--n", "100", "--p", "40"]) == 0
    out = capsys.readouterr().out
    assert "wrote 12 files" in out
    files = sorted(f.name for f in (tmp_path / "figs").iterdir())
    assert sum(f.endswith(".svg") for f in files) == 6
    assert sum(f.endswith(".csv") for f in files) == 6
    assert "fig2_meta.json" in files


def test_usage_error_exit_code_1(capsys):
    assert main(["no-such-command"]) == 1
    assert main(["simulate", "--bogus-flag"]) == 1
    err = capsys.readouterr().err
    assert "usage" in err


def test_runtime_error_exit_code_2(tmp_path, capsys):
    missing = tmp_path / "missing.csv"
    assert main(["estimate-cov", "--data", str(missing), "--u", "0.1",
                 "--out", str(tmp_path / "o.csv")]) == 2
    assert "FileNotFoundError" in capsys.readouterr().err


def test_estimate_cov_requires_one_input(tmp_path, capsys):
    assert main(["estimate-cov", "--u", "0.1",
                 "--out", str(tmp_path / "o.csv")]) == 1
