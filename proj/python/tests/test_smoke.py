import json
import math

import numpy as np
import pytest

import qsoliton as qs

SMALL = {
    "grid": {"n_points": 128, "tau_window": 20.0},
    "stepper": {"d_zeta": 0.02},
    "xi_max": 1.0,
    "xi_planes": [0.5, 1.0],
    "cutoffs": [0.1, 0.2],
    "trajectories": 64,
    "batches": 8,
    "threads": 1,
}


def test_defaults_round_trip():
    d = qs.default_config()
    assert qs.normalize_config(d) == d
    assert qs.normalize_config({}) == d
    assert qs.config_hash(d) == qs.config_hash({})


def test_config_errors_name_the_field():
    with pytest.raises(qs.ConfigError, match="grid.n_pts: unknown key"):
        qs.normalize_config({"grid": {"n_pts": 256}})
    with pytest.raises(ValueError, match="grid.n_points"):
        qs.normalize_config({"grid": {"n_points": 100}})


def test_unit_conversion():
    assert qs.to_physical(0.125, "frequency", {"units": {"t0": 1e-12}}) == pytest.approx(125e9)
    assert qs.from_physical(125e9, "frequency", {"units": {"t0": 1e-12}}) == pytest.approx(0.125)
    with pytest.raises(ValueError):
        qs.to_physical(1.0, "colour")


def test_noiseless_soliton_is_stationary():
    cfg = dict(SMALL, noise=False, grid={"n_points": 512, "tau_window": 20.0},
               stepper={"d_zeta": 0.002})
    rec = qs.propagate(cfg)
    tau = rec["tau"]
    for phi in rec["phi"]:
        assert np.max(np.abs(np.abs(phi) - 1.0 / np.cosh(tau))) < 1e-5
    # Planes snap to whole steps.
    assert abs(rec["zeta"][-1] - math.pi / 2) <= 0.001 + 1e-12


def test_ensemble_reports():
    res = qs.run_ensemble(SMALL)
    assert res["trajectories"] == 64 and res["diverged"] == 0
    assert list(res["xi"]) == [0.5, 1.0]
    for plane in res["planes"]:
        assert plane["nu"].shape == (128,)
        assert np.all(np.diff(plane["nu"]) > 0)
        assert len(plane["filtered"]) == 2
        for f in plane["filtered"]:
            assert math.isfinite(f["fano_db"])


def test_linear_propagation_is_shot_noise_limited():
    res = qs.run_ensemble(dict(SMALL, nonlinearity=False))
    for plane in res["planes"]:
        for f in plane["filtered"]:
            assert f["fano_db"] == 0.0


def test_divergence_budget():
    cfg = dict(SMALL, n_bar=0.01, soliton_order=2.0, max_divergence_fraction=0.0,
               stepper={"d_zeta": 0.02, "divergence_threshold": 2000.0})
    with pytest.raises(qs.DivergenceError):
        qs.run_ensemble(cfg)


def test_simulate_writes_outputs(tmp_path):
    summary = qs.simulate(SMALL, tmp_path)
    assert summary["trajectories"] == 64
    assert (tmp_path / "manifest.json").exists()
    config = json.loads((tmp_path / "config.json").read_text())
    assert config["trajectories"] == 64
    arrays = sorted(tmp_path.rglob("*.f64"))
    assert arrays
    data = qs.read_array(arrays[0])
    assert data.dtype == np.float64 and data.size > 0


def test_thread_count_does_not_change_results():
    a = qs.run_ensemble(dict(SMALL, threads=1))
    b = qs.run_ensemble(dict(SMALL, threads=3))
    for pa, pb in zip(a["planes"], b["planes"]):
        np.testing.assert_array_equal(pa["var_spectrum"], pb["var_spectrum"])
