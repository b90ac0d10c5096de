import json
import math
import os

import numpy as np
import pytest

import volharness as vh


def test_daily_measures_example():
    m = vh.daily_measures([1.0, -2.0, 3.0], bv_skips=0)
    assert m["rv"] == 14.0
    assert m["rv_pos"] == 10.0
    assert m["sjv"] == 6.0
    assert m["bv"] == pytest.approx(math.pi / 2 * 1.5 * 8, abs=1e-12)


def test_errors_raise():
    with pytest.raises(vh.VolharnessError):
        vh.daily_measures([])
    with pytest.raises(ValueError):
        vh.build_design([1.0] * 10, [0.5] * 10, [0.5] * 10, [1.0] * 10, [0.0] * 10, "har-rv", 1)


def test_specs_and_design():
    specs = dict(vh.list_specs())
    assert len(specs) == 8
    assert specs["har-semirv"] == ["intercept", "rv_neg_lag1", "rv_pos_lag1", "rv_weekly", "rv_monthly"]
    n = 60
    rng = np.random.default_rng(3)
    rv = rng.uniform(0.5, 2.0, n)
    X, y, labels = vh.build_design(rv, rv / 2, rv / 2, rv, rng.normal(size=n), "har-rv-lev", 5)
    assert X.shape == (n - 21 - 5, 5)
    assert labels[-1] == "rv_lev"
    assert y[0] == pytest.approx(rv[22:27].mean())


def test_ols_and_wls():
    X = np.column_stack([np.ones(3), [1.0, 2.0, 3.0]])
    f = vh.ols(X, np.array([2.0, 4.0, 6.0]), labels=["intercept", "x"])
    assert f["coefficients"] == pytest.approx([0.0, 2.0], abs=1e-12)
    w = vh.wls_two_stage(X, np.array([2.0, 4.0, 6.0]))
    assert w["estimator"] == "WLS"
    assert w["coefficients"] == pytest.approx([0.0, 2.0], abs=1e-12)


def test_newey_west_lag_zero_is_hc0():
    rng = np.random.default_rng(1)
    X = np.column_stack([np.ones(50), rng.normal(size=(50, 2))])
    e = rng.normal(size=50)
    bread = np.linalg.inv(X.T @ X)
    hc0 = bread @ (X.T * e**2) @ X @ bread
    assert np.allclose(vh.newey_west(X, e, 0), hc0, atol=1e-14)


def test_helpers():
    assert vh.default_nw_lag(100) == 4
    assert vh.default_nw_lag(10000) == 11
    assert vh.significance(0.004) == "***"
    assert vh.significance(0.05) == "*"


def test_simulation():
    ts, px, days = vh.simulate_path({"sigma": 0.0, "days": 1, "forced_jumps": [{"day": 0, "step": 5, "size": 2.0}]})
    assert len(ts) == 288
    assert days[0]["jump_sq"] == 4.0
    assert vh.daily_measures(days[0]["returns"])["rv"] == pytest.approx(4.0)
    r = vh.convergence_report({"sigma": 1.0, "days": 300, "seed": 2})
    assert r["days"] == 300
    assert abs(r["rv"][0] - 1.0) < 0.05


def test_cli_pipeline(tmp_path):
    (tmp_path / "sim.json").write_text(json.dumps({"sigma": 1.0, "days": 80, "seed": 5, "entities": 2}))
    steps = [
        ["simulate", "--config", str(tmp_path / "sim.json"), "--out", str(tmp_path / "sim")],
        ["ingest", "--input", str(tmp_path / "sim" / "prices.csv"), "--asset-class", "crypto", "--out", str(tmp_path / "data")],
        ["estimate", "--data", str(tmp_path / "data"), "--out", str(tmp_path / "m" / "measures.csv")],
    ]
    for args in steps:
        code, _, err = vh.run_cli(args)
        assert code == 0, err
    rows = vh.fit_panel(tmp_path / "m" / "measures.csv", ["har-rv"], [1])
    assert [r["coef"] for r in rows] == ["intercept", "rv_lag1", "rv_weekly", "rv_monthly"]
    code, _, err = vh.run_cli(["fit", "--spec", "nonsense"])
    assert code == 1
