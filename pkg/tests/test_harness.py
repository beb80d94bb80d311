import json
import math

import numpy as np
import pytest

from blockboot import harness as H
from blockboot.errors import ConfigError, InfeasibleParameterError
from blockboot.harness import (
    ExperimentConfig,
    cumulant_check,
    kde_bias_oracle,
    mse_experiment,
    sensitivity_scan,
    true_cdf_oracle,
)
from blockboot.process import REFERENCE_MODEL, ProcessModel, simulate_many
from blockboot.resampler import Method, bootstrap_cdf, make_ebc_params, make_nbc_params, make_uns_params
from blockboot.rng import BOOTSTRAP, SERIES, generator, seed_sequence
from blockboot.tuning import variance_exact_iid

SMALL = dict(n=100, x0=1.0, y=0.15, h=1.8, B=300, R=30, master_seed=11, oracle_p=0.884243,
             k1_grid=list(np.geomspace(0.1, 10, 9)), c2_grid=list(np.geomspace(0.2, 20, 7)))


def small_cfg(**kw):
    return ExperimentConfig.from_dict({**SMALL, "grid_bl": [[5, 2], [10, 2]], **kw})


def test_config_validation():
    with pytest.raises(ConfigError, match="unknown config key 'bogus'"):
        ExperimentConfig.from_dict({**SMALL, "grid_bl": [[1, 1]], "bogus": 1})
    with pytest.raises(ConfigError, match="grid_bl"):
        ExperimentConfig.from_dict(SMALL)
    with pytest.raises(ConfigError, match="k1_grid"):
        small_cfg(k1_grid=[])
    with pytest.raises(ConfigError, match="B"):
        small_cfg(B=0)
    with pytest.raises(ConfigError, match="methods"):
        small_cfg(methods=["XYZ"])
    with pytest.raises(ConfigError, match="c0"):
        small_cfg(c0=1.5)
    cfg = small_cfg(k1_grid={"geomspace": [0.1, 1, 3]}, methods=["uns", "EBC"])
    assert cfg.k1_grid == pytest.approx((0.1, math.sqrt(0.1), 1.0))
    assert cfg.methods == (Method.EBC, Method.UNS)
    with pytest.raises(ConfigError, match="master_seed"):
        mse_experiment(small_cfg(master_seed=None))


def test_config_json_round_trip(tmp_path):
    cfg = small_cfg()
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg.to_dict()))
    assert ExperimentConfig.from_json(p) == cfg


def test_counts_match_bootstrap_cdf():
    cfg = small_cfg()
    plans = H._plan_cells(cfg)
    r = 4
    counts = H._replicate(cfg, plans, r)
    x = simulate_many(cfg.model, cfg.n, [seed_sequence(cfg.master_seed, SERIES, r)])[0]
    for ci, (b, ell) in enumerate(cfg.grid_bl):
        rng = lambda: generator(cfg.master_seed, BOOTSTRAP, r, ci)  # noqa: E731
        for j in (0, 4, 8):
            p = make_uns_params(b, ell, cfg.k1_grid[j])
            assert bootstrap_cdf(x, p, cfg.x0, cfg.y, cfg.B, rng=rng()).count == counts[(Method.UNS, ci)][j]
            for c in (0, 6):
                p = make_ebc_params(cfg.n, cfg.h, b, ell, cfg.k1_grid[j], cfg.c0, cfg.c2_grid[c])
                assert bootstrap_cdf(x, p, cfg.x0, cfg.y, cfg.B, rng=rng()).count == counts[(Method.EBC, ci)][j, c]
        p = make_nbc_params(cfg.n, cfg.h, b, ell, cfg.c0)
        assert bootstrap_cdf(x, p, cfg.x0, cfg.y, cfg.B, rng=rng()).count == counts[(Method.NBC, ci)]


def test_determinism_across_worker_counts():
    cfg = small_cfg(R=23)
    reps = [mse_experiment(cfg, w) for w in (1, 2, 3)]
    base = [r.row() for r in reps[0].records]
    for rep in reps[1:]:
        assert [r.row() for r in rep.records] == base
        for key, surf in reps[0].surfaces.items():
            assert np.array_equal(rep.surfaces[key], surf)


def test_mse_decomposition_and_argmin():
    rep = mse_experiment(small_cfg())
    for rec in rep.records:
        assert rec.mse >= 0
        assert abs(rec.mse - (rec.bias**2 + rec.variance)) < 1e-12
    for (method, b, ell), surf in rep.surfaces.items():
        rec = rep.record(method, b, ell)
        assert rec.mse == pytest.approx(float(np.min(surf)), abs=0)


def test_mse_matches_direct_average():
    cfg = small_cfg(R=12, methods=["UNS"])
    rep = mse_experiment(cfg)
    plans = H._plan_cells(cfg)
    p = np.array([H._replicate(cfg, plans, r)[(Method.UNS, 0)] for r in range(12)]) / cfg.B
    direct = ((p - cfg.oracle_p) ** 2).mean(axis=0)
    np.testing.assert_allclose(rep.surfaces[("UNS", 5, 2)], direct, rtol=1e-12, atol=1e-15)


def test_degenerate_zero_mse():
    cfg = small_cfg(grid_bl=[[1, 100]], y=1e9, oracle_p=1.0, R=5)
    rep = mse_experiment(cfg)
    for rec in rep.records:
        assert rec.mse == 0.0 and rec.variance == 0.0


def test_infeasible_cell_reported(tmp_path):
    rep = mse_experiment(small_cfg(grid_bl=[[5, 2], [1, 500]], R=3))
    bad = rep.record("UNS", 1, 500)
    assert not bad.feasible and math.isnan(bad.mse)
    csv_path, json_path = rep.write(tmp_path)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "method,b,ell,best_k1,best_c2,mse,bias,variance,mc_std_err"
    assert "UNS,1,500,,,,,," in lines
    side = json.loads(json_path.read_text())
    assert side["oracle_p"] == 0.884243 and side["config"]["master_seed"] == 11
    assert ["UNS", 1, 500, "block length exceeds sample"] in side["infeasible"]


def test_oracle_properties():
    a = true_cdf_oracle(REFERENCE_MODEL, 50, 0.5, 0.1, 0.5, oracle_R=3000, seed=5)
    b = true_cdf_oracle(REFERENCE_MODEL, 50, 0.5, 0.1, 0.5, oracle_R=3000, seed=5, workers=2)
    assert a == b
    assert a.std_err == pytest.approx(math.sqrt(a.p * (1 - a.p) / 3000))
    big = true_cdf_oracle(REFERENCE_MODEL, 50, 0.5, 0.1, 0.5, oracle_R=6000, seed=5)
    assert a.std_err / big.std_err == pytest.approx(math.sqrt(2), rel=0.05)
    with pytest.raises(ConfigError):
        true_cdf_oracle(REFERENCE_MODEL, 50, 0.5, 0.1, 0.5, oracle_R=50)


@pytest.mark.parametrize(
    "n, h, x0, expected, tol",
    [(100, 0.625, 1.0, -0.0021159, 0.0015), (100, 1.80, 1.0, -0.0179130, 0.002), (200, 0.82, 3.0, 0.0036446, 0.001)],
)
def test_kde_bias_oracle(n, h, x0, expected, tol):
    res = kde_bias_oracle(REFERENCE_MODEL, n, x0, h, oracle_R=100_000, seed=21)
    assert abs(res.p - expected) < tol


def test_cumulant_check_iid_and_mean():
    iid = ProcessModel(0.0, 0.0)
    rows = cumulant_check(iid, [400, 1600], -1 / 3, R=4000, seed=3, x0=0.5)
    for row in rows:
        assert abs(row["scaled_var"] - row["iid_exact_var"]) < 3 * row["scaled_var_std_err"]
        assert row["iid_exact_var"] == variance_exact_iid(iid, 0.5, row["h"])
    arma = cumulant_check(REFERENCE_MODEL, [500, 2000], -1 / 3, R=4000, seed=4)
    for row in arma:
        assert abs(row["mean"] - row["mean_leading"]) < 3 * row["mean_std_err"] + 2e-3
    with pytest.raises(ConfigError):
        cumulant_check(iid, [200, 100], -1 / 3, R=1000)
    with pytest.raises(ConfigError):
        cumulant_check(iid, [100], -1 / 3, R=10)


def test_cumulant_check_worker_independent():
    a = cumulant_check(REFERENCE_MODEL, [100, 200], lambda n: n ** -0.3, R=1000, seed=9, workers=1)
    b = cumulant_check(REFERENCE_MODEL, [100, 200], lambda n: n ** -0.3, R=1000, seed=9, workers=2)
    assert a == b


def test_sensitivity_scan_shapes(tmp_path):
    cfg = small_cfg(R=10)
    ebc = sensitivity_scan(cfg, (5, 2), "both", "EBC")
    assert ebc["mse"].shape == (9, 7)
    line = sensitivity_scan(cfg, (5, 2), "c2", "EBC")
    assert line["mse"].shape == (7,) and line["mse"].min() == ebc["mse"].min()
    H.write_scan_csv(ebc, tmp_path / "s.csv")
    assert (tmp_path / "s.csv").read_text().count("\n") == 64
    flat = sensitivity_scan(small_cfg(R=10, k1_grid=[0.8]), (5, 2), "k1", "UNS")
    assert flat["mse"].shape == (1,)
    with pytest.raises(ConfigError):
        sensitivity_scan(cfg, (5, 2), "c2", "UNS")
    with pytest.raises(InfeasibleParameterError):
        sensitivity_scan(cfg, (1, 500), "k1", "UNS")


@pytest.mark.slow
def test_uns_sensitivity_interior_minimum():
    cfg = ExperimentConfig(n=200, x0=3.0, y=0.1, h=0.82, grid_bl=((50, 4),), methods=(Method.UNS,),
                           B=1000, R=400, oracle_R=100_000, master_seed=2)
    scan = sensitivity_scan(cfg, (50, 4), "k1", "UNS")
    m = scan["mse"]
    assert m[0] > 1.5 * m.min() and m[-1] > 1.5 * m.min()


def test_dumps_17_digits():
    assert H.dumps({"a": 0.1, "b": [1, 2.5], "c": None, "d": True}) == '{"a": 0.10000000000000001, "b": [1, 2.5], "c": null, "d": true}'
    assert float(json.loads(H.dumps(1 / 3))) == 1 / 3
    assert H.dumps(3.0) == "3.0"


def test_resolve_workers(monkeypatch):
    monkeypatch.setenv("BLOCKBOOT_WORKERS", "3")
    assert H.resolve_workers(None) == 3
    assert H.resolve_workers(2) == 2
    monkeypatch.setenv("BLOCKBOOT_WORKERS", "x")
    with pytest.raises(ConfigError):
        H.resolve_workers(None)
    monkeypatch.delenv("BLOCKBOOT_WORKERS")
    assert H.resolve_workers(None) == 1
