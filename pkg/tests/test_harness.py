import json
import math

import numpy as np
import pytest

from cutdg import harness
from cutdg.cli import main as cli_main
from cutdg.geom2d import RAMP_X0, beta_varying
from cutdg.harness import (ExperimentConfig, convergence_fit, error_norms_1d,
                           exact_solution, hat_coords, hat_speed,
                           run_mp_convergence)
from cutdg.mesh1d import Scenario1D, build_scenario_mesh
from cutdg.dg1d import project_1d


def test_exact_solution_reproduces_initial_data():
    x = np.linspace(0.01, 0.99, 17)
    np.testing.assert_array_equal(exact_solution(2, x, None, 0.0),
                                  np.sin(2 * np.pi * x))
    np.testing.assert_array_equal(exact_solution(3, x, None, 0.0),
                                  harness.step_data_1d(x))
    y = np.linspace(0.3, 0.9, 17)
    xh, _ = hat_coords(x, y, 30.0)
    np.testing.assert_array_equal(exact_solution(4, x, y, 0.0, 30.0, "V"),
                                  harness.test4_data(xh))
    np.testing.assert_array_equal(exact_solution(5, x, y, 0.0, 30.0, "V"),
                                  harness.test5_data(xh))
    with pytest.raises(ValueError):
        exact_solution(9, x, None, 0.0)
    with pytest.raises(ValueError):
        exact_solution(2, x, None, -1.0)


def test_full_period_returns_initial_data():
    x = np.linspace(0.0, 1.0, 101)
    np.testing.assert_allclose(exact_solution(2, x, None, 1.0),
                               np.sin(2 * np.pi * x), atol=1e-12)


def test_hat_speed_profile():
    # speed 1 on the ramp, dropping linearly to 0 at hat-distance 2
    assert hat_speed(np.array([0.0]), "V")[0] == 1.0
    assert hat_speed(np.array([2.0]), "V")[0] == 0.0
    assert np.all(hat_speed(np.array([0.3, 1.1]), "C") == 2.0)


def test_beta_field_consistent_with_hat_speed():
    gamma = 25.0
    beta = beta_varying(gamma)
    rng = np.random.default_rng(3)
    pts = rng.uniform(0, 1, size=(50, 2))
    rad = math.radians(gamma)
    direction = np.array([math.cos(rad), math.sin(rad)])
    _, yh = hat_coords(pts[:, 0], pts[:, 1], gamma)
    np.testing.assert_allclose(beta(pts) @ direction, hat_speed(yh, "V"),
                               atol=1e-13)
    # the transverse component vanishes: transport is ramp-parallel
    perp = np.array([-direction[1], direction[0]])
    np.testing.assert_allclose(beta(pts) @ perp, 0.0, atol=1e-13)


def test_error_norms_1d():
    mesh = build_scenario_mesh(Scenario1D("S3", 10))
    state = project_1d(mesh, lambda x: 2 * x - 1, degree=1)
    l1, linf = error_norms_1d(state, mesh, lambda x: 2 * x - 1)
    assert l1 <= 1e-14 and linf <= 1e-14
    zero = project_1d(mesh, lambda x: 0.0 * x, degree=0)
    l1, linf = error_norms_1d(zero, mesh, lambda x: np.ones_like(x))
    assert l1 == pytest.approx(1.0, abs=1e-13)
    assert linf == pytest.approx(1.0, abs=1e-15)


def test_convergence_fit():
    hs = [0.1, 0.05, 0.025, 0.0125]
    assert convergence_fit(hs, [h ** 2 for h in hs]) == pytest.approx(2.0)
    assert convergence_fit(hs, hs) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        convergence_fit(hs[:2], hs[:2])


def test_mp_convergence_ratio_between_levels(tmp_path):
    res = run_mp_convergence(str(tmp_path), scenario="S2", seed=42,
                             levels=(20, 40))
    l1_coarse = res["rows"][0][2]
    l1_fine = res["rows"][1][2]
    assert 3.0 <= l1_coarse / l1_fine <= 5.0  # about second order


def test_config_roundtrip(tmp_path):
    cfg = ExperimentConfig(test=4, gamma=15.0, beta_kind="C",
                           levels=(20, 40), out=str(tmp_path))
    path = tmp_path / "config.json"
    cfg.to_json(path)
    again = ExperimentConfig.from_json(path)
    assert again == cfg


def test_run_test_dispatch_writes_config(tmp_path):
    cfg = ExperimentConfig(test=3, N=20, T=0.1, limiter=True,
                           out=str(tmp_path))
    summary = harness.run_test(cfg)
    assert (tmp_path / "config.json").exists()
    assert (tmp_path / "tv.csv").exists()
    assert (tmp_path / "profile.csv").exists()
    assert summary["tv_increase_max"] <= 1e-12


def test_cli_test1(tmp_path):
    out = tmp_path / "t1"
    assert cli_main(["test1", "--out", str(out)]) == 0
    for name in ("eigen_unstabilized.csv", "eigen_ghost_penalty.csv",
                 "eigen_stabilized.csv", "profile_unstabilized.csv",
                 "profile_stabilized.csv", "config.json"):
        assert (out / name).exists()
    header = (out / "eigen_stabilized.csv").read_text().splitlines()[0]
    assert header == "alpha,rho,re,im,in_region"


def test_cli_monotone_grid(tmp_path):
    out = tmp_path / "mg"
    assert cli_main(["monotone-grid", "--out", str(out)]) == 0
    lines = (out / "monotone.csv").read_text().splitlines()
    assert lines[0] == "theta,lambda,alpha,min_entry,monotone"
    assert len(lines) == 10  # 3 thetas x 3 alphas + header


def test_cli_eigen_sweep(tmp_path):
    out = tmp_path / "eig"
    assert cli_main(["eigen-sweep", "--out", str(out),
                     "--alphas", "0.25", "0.125"]) == 0
    lines = (out / "eigen.csv").read_text().splitlines()
    assert lines[0] == "alpha,rho,re,im,in_region"
    assert len(lines) == 1 + 2 * 12  # two alphas, 12 dofs each


def test_cli_ramp_step_smoke(tmp_path):
    out = tmp_path / "t5"
    assert cli_main(["ramp-step", "--N", "20", "--gamma", "30",
                     "--degree", "0", "--T", "0.05", "--out", str(out)]) == 0
    assert (out / "solution.vtk").exists()
    assert (out / "boundary_profile.csv").read_text().startswith("s,u")
    assert (out / "tv.csv").exists()
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["test"] == 5 and cfg["N"] == 20


def test_cli_mp_convergence_small(tmp_path):
    out = tmp_path / "t2"
    assert cli_main(["mp-convergence", "--scenario", "S3",
                     "--levels", "20", "40", "80", "--out", str(out)]) == 0
    lines = (out / "errors_s3.csv").read_text().splitlines()
    assert lines[0] == "N,h,l1,linf"
    assert len(lines) == 4


def test_ramp_x0_matches_field_offset():
    assert RAMP_X0 == 0.2001


def test_all_emitted_csvs_are_plain_numeric(tmp_path):
    # every value must round-trip through float(); numpy scalar reprs must
    # never leak into the files
    cli_main(["test1", "--out", str(tmp_path / "t1")])
    cli_main(["mp-convergence", "--test", "3", "--T", "0.1",
              "--out", str(tmp_path / "t3")])
    cli_main(["ramp-step", "--N", "20", "--degree", "0", "--T", "0.05",
              "--out", str(tmp_path / "t5")])
    cli_main(["monotone-grid", "--out", str(tmp_path / "mg")])
    checked = 0
    for path in tmp_path.rglob("*.csv"):
        lines = path.read_text().splitlines()
        for line in lines[1:]:
            for field in line.split(","):
                float(field)  # raises on anything that is not a number
        checked += 1
    assert checked >= 8
