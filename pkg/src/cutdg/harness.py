"""End-to-end experiment drivers for the five verification tests.

Tests 1-3 live on the 1D split-cell meshes, tests 4-5 on the 2D ramp.
Every driver writes CSV/VTK reports plus a config echo, and returns a summary
dict so the test-suite can assert on the numbers directly.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import analysis, dg1d, dg2d, geom2d, timestep
from .blockmat import BlockMatrix
from .mesh1d import Mesh1D, Scenario1D, build_mp_mesh, build_scenario_mesh
from .operators import OperatorSet

RAMP_X0 = geom2d.RAMP_X0


@dataclass
class ExperimentConfig:
    test: int
    N: int = 20
    gamma: float = 30.0
    alpha: float = 0.001
    scenario: str = "S2"
    seed: int = 42
    degree: int = 1
    limiter: bool = False
    lam: float = 1.0 / 6.0
    rho: float = 0.5
    theta: float = 0.5
    T: float = 1.0
    beta_kind: str = "V"
    levels: tuple[int, ...] = ()
    out: str = "out"

    def __post_init__(self):
        if self.test not in (1, 2, 3, 4, 5):
            raise ValueError(f"unknown test id {self.test}")
        self.levels = tuple(int(n) for n in self.levels)

    def to_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(dataclasses.asdict(self), f, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as f:
            data = json.load(f)
        data["levels"] = tuple(data.get("levels", ()))
        return cls(**data)


# ---------------------------------------------------------------------------
# exact solutions

def step_data_1d(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.where((x >= 0.1) & (x <= 0.5), 1.0, 0.0)


def sine_data_1d(x: np.ndarray) -> np.ndarray:
    return np.sin(2.0 * math.pi * np.asarray(x, dtype=float))


def hat_coords(x, y, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    rad = math.radians(gamma)
    dx = np.asarray(x, dtype=float) - RAMP_X0
    y = np.asarray(y, dtype=float)
    return (math.cos(rad) * dx + math.sin(rad) * y,
            -math.sin(rad) * dx + math.cos(rad) * y)


def hat_speed(yh: np.ndarray, beta_kind: str) -> np.ndarray:
    """Transport speed along the ramp direction in the rotated frame."""
    yh = np.asarray(yh, dtype=float)
    if beta_kind.upper() == "C":
        return np.full_like(yh, 2.0)
    return 1.0 - 0.5 * yh


def test4_data(xh: np.ndarray) -> np.ndarray:
    return np.sin(math.sqrt(2.0) * math.pi * np.asarray(xh) / (1.0 - RAMP_X0))


def test5_data(xh: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(xh) < 4.0 / 15.0, 1.0, 0.0)


def exact_solution(test: int, x, y, t: float, gamma: float = 30.0,
                   beta_kind: str = "V") -> np.ndarray:
    """Characteristic solution of each test (beta = 1 and periodic in 1D)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if test in (1, 3):
        return step_data_1d(np.mod(np.asarray(x) - t, 1.0))
    if test == 2:
        return sine_data_1d(np.asarray(x) - t)
    if test in (4, 5):
        xh, yh = hat_coords(x, y, gamma)
        x0h = xh - hat_speed(yh, beta_kind) * t
        return test4_data(x0h) if test == 4 else test5_data(x0h)
    raise ValueError(f"unknown test id {test}")


# ---------------------------------------------------------------------------
# norms and rates

def error_norms_1d(state: dg1d.DGState1D, mesh: Mesh1D, exact,
                   n_quad: int = 5) -> tuple[float, float]:
    xq, wq = np.polynomial.legendre.leggauss(n_quad)
    l1, linf = 0.0, 0.0
    for j in range(mesh.n_cells):
        xl, xr = mesh.edges[j], mesh.edges[j + 1]
        hj = xr - xl
        x = 0.5 * (xl + xr) + 0.5 * hj * xq
        w = 0.5 * hj * wq
        uh = state.coeffs[j, 0] * np.ones_like(x)
        if state.degree == 1:
            uh = uh + state.coeffs[j, 1] * (x - 0.5 * (xl + xr)) / hj
        diff = np.abs(uh - exact(x))
        l1 += float(np.sum(w * diff))
        linf = max(linf, float(np.max(diff)))
    return l1, linf


def convergence_fit(hs, errors) -> float:
    """Least-squares slope through (log h, log err); needs >= 3 levels."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(hs) < 3:
        raise ValueError("need at least three mesh levels for a rate")
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


def _steps_for(T: float, dt_max: float) -> tuple[int, float]:
    n = max(1, math.ceil(T / dt_max - 1e-12))
    return n, T / n


def _write_errors_csv(path, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["N", "h", "l1", "linf"])
        for row in rows:
            w.writerow([row[0], repr(float(row[1])), repr(float(row[2])),
                        repr(float(row[3]))])


def _write_eigen_csv(path, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["alpha", "rho", "re", "im", "in_region"])
        for alpha, rho, z, inside in rows:
            w.writerow([repr(float(alpha)), repr(float(rho)), repr(float(z.real)),
                        repr(float(z.imag)), int(inside)])


def _write_profile_csv(path, x, u) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x", "u"])
        for xi, ui in zip(x, u):
            w.writerow([repr(float(xi)), repr(float(ui))])


def profile_points_1d(state: dg1d.DGState1D, mesh: Mesh1D
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Two trace samples per cell, for piecewise-linear profile plots."""
    xs, us = [], []
    for j in range(mesh.n_cells):
        for x in (mesh.edges[j], mesh.edges[j + 1]):
            xs.append(x)
            val = state.coeffs[j, 0]
            if state.degree == 1:
                val += state.coeffs[j, 1] * (x - mesh.centers[j]) / mesh.widths[j]
            us.append(val)
    return np.asarray(xs), np.asarray(us)


def observers_1d(mesh: Mesh1D, degree: int, periodic: bool = True):
    def wrap(coeffs):
        return dg1d.DGState1D(coeffs.reshape(mesh.n_cells, degree + 1))

    def minmax(coeffs, which):
        st = wrap(coeffs)
        if st.degree == 0:
            vals = st.means
        else:
            vals = np.concatenate([st.means - 0.5 * st.coeffs[:, 1],
                                   st.means + 0.5 * st.coeffs[:, 1]])
        return float(vals.min()) if which == "min" else float(vals.max())

    return {
        "tv_means": lambda c: analysis.total_variation_means(wrap(c), mesh, periodic),
        "l1": lambda c: analysis.l1_norm(wrap(c), mesh),
        "mass": lambda c: float(np.sum(wrap(c).means * mesh.widths)),
        "min": lambda c: minmax(c, "min"),
        "max": lambda c: minmax(c, "max"),
    }


# ---------------------------------------------------------------------------
# Test 1: single small cut cell, eigenvalues + trapezoidal overshoot

def run_test1(out_dir: str, alpha: float = 0.001, lam: float = 0.5,
              N: int = 20, k: int = 11) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    beta = 1.0
    mesh = build_mp_mesh(N=N, alpha=alpha, k=k)
    h = mesh.h_background
    dt = lam * h / beta
    ops = dg1d.assemble_1d(mesh, beta, degree=0, dt=dt, bc="periodic")
    eta = 1.0 - dg1d.capacity_1d(alpha, lam, 0.5)
    ghost = dg1d.assemble_ghost_penalty_1d(mesh, rho1=eta, rho2=eta, degree=0)
    empty = BlockMatrix(mesh.n_cells, 1)

    variants = {
        "unstabilized": dataclasses.replace(ops, stab=empty),
        "ghost_penalty": dataclasses.replace(ops, stab=ghost),
        "stabilized": ops,
    }
    summary = {"alpha": alpha, "lam": lam, "h": h}
    for name, op in variants.items():
        R = analysis.stability_matrix(op, dt)
        eig = analysis.eigenvalues(R)
        rows = [(alpha, 0.5, z, analysis.in_euler_region(z, tol=1e-9))
                for z in eig]
        _write_eigen_csv(os.path.join(out_dir, f"eigen_{name}.csv"), rows)
        summary[f"outside_euler_{name}"] = sum(
            1 for _, _, z, inside in rows if not inside)

    # one implicit-trapezoidal step from the discontinuous data
    k1 = mesh.cut_pairs[0][0]
    state0 = dg1d.project_1d(mesh, step_data_1d, degree=0)
    cfg = timestep.SchemeConfig(kind="theta", dt=dt, theta=0.5)
    for name in ("unstabilized", "stabilized"):
        y = timestep.step(state0.coeffs, variants[name], cfg)
        st = dg1d.DGState1D(y)
        x, u = profile_points_1d(st, mesh)
        _write_profile_csv(os.path.join(out_dir, f"profile_{name}.csv"), x, u)
        summary[f"cut_cell_value_{name}"] = float(st.means[k1])
    return summary


# ---------------------------------------------------------------------------
# Tests 2/3: 1D convergence and TV behavior

def _scenario_from_config(kind: str, N: int, alpha: float, seed: int) -> Scenario1D:
    kind = kind.upper()
    if kind == "S1":
        return Scenario1D("S1", N, alpha=alpha)
    if kind == "S2":
        return Scenario1D("S2", N, seed=seed)
    return Scenario1D("S3", N)


def _run_1d_to_time(mesh: Mesh1D, degree: int, lam: float, T: float,
                    u0, limiter: bool, rho: float = 0.5,
                    observers=None) -> tuple[dg1d.DGState1D, timestep.RunRecord]:
    beta = 1.0
    n_steps, dt = _steps_for(T, lam * mesh.h_background / beta)
    ops = dg1d.assemble_1d(mesh, beta, degree=degree, dt=dt,
                           config=dg1d.StabConfig1D(rho=rho), bc="periodic")
    state = dg1d.project_1d(mesh, u0, degree=degree)
    lim = None
    if limiter:
        def lim(coeffs):
            st = dg1d.DGState1D(coeffs.reshape(mesh.n_cells, degree + 1))
            return dg1d.limit_1d(st, mesh).coeffs
    cfg = timestep.SchemeConfig(kind="tvd_rk2", dt=dt,
                                apply_limiter=limiter, limiter=lim)
    y, rec = timestep.run(state.coeffs, ops, cfg, n_steps, observers)
    return dg1d.DGState1D(y.reshape(mesh.n_cells, degree + 1)), rec


def run_mp_convergence(out_dir: str, scenario: str = "S2", alpha: float = 0.1,
                       seed: int = 42, levels: tuple[int, ...] = (20, 40, 80, 160, 320),
                       lam: float = 1.0 / 6.0, T: float = 1.0,
                       degree: int = 1, limiter: bool = False) -> dict:
    """Test 2: smooth data, second-order convergence on split meshes."""
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for N in levels:
        mesh = build_scenario_mesh(_scenario_from_config(scenario, N, alpha, seed))
        state, _ = _run_1d_to_time(mesh, degree, lam, T, sine_data_1d, limiter)
        exact = lambda x: exact_solution(2, x, None, T)
        l1, linf = error_norms_1d(state, mesh, exact)
        rows.append((N, mesh.h_background, l1, linf))
    tag = scenario.lower() + (f"_{alpha:g}" if scenario.upper() == "S1" else "")
    _write_errors_csv(os.path.join(out_dir, f"errors_{tag}.csv"), rows)
    hs = [r[1] for r in rows]
    rates = {}
    if len(rows) >= 3:
        rates = {"l1": convergence_fit(hs, [r[2] for r in rows]),
                 "linf": convergence_fit(hs, [r[3] for r in rows])}
    return {"scenario": scenario, "alpha": alpha, "rows": rows, "rates": rates}


def run_mp_tv(out_dir: str, N: int = 20, seed: int = 42,
              lam: float = 1.0 / 6.0, T: float = 1.0,
              limiter: bool = True) -> dict:
    """Test 3: discontinuous data on the random-split mesh, TV diagnostics."""
    os.makedirs(out_dir, exist_ok=True)
    mesh = build_scenario_mesh(Scenario1D("S2", N, seed=seed))
    state, rec = _run_1d_to_time(mesh, 1, lam, T, step_data_1d, limiter,
                                 observers=observers_1d(mesh, 1))
    rec.write_csv(os.path.join(out_dir, "tv.csv"))
    x, u = profile_points_1d(state, mesh)
    _write_profile_csv(os.path.join(out_dir, "profile.csv"), x, u)
    tv = rec.series("tv_means")
    return {"tv_increase_max": float(np.max(np.diff(tv))) if len(tv) > 1 else 0.0,
            "tv_first": float(tv[0]), "tv_last": float(tv[-1])}


# ---------------------------------------------------------------------------
# eigenvalue sweep and monotonicity grid

def run_eigen_sweep(out_dir: str,
                    alphas=tuple(0.5 ** i for i in range(1, 11)),
                    rhos=(0.5,), N: int = 5, lam: float = 1.0 / 6.0) -> dict:
    """Spectrum of R = -dt M^{-1}(A+J) for the P1 split-cell problem with
    Dirichlet inflow, swept over alpha and rho."""
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    spectra = {}
    for rho in rhos:
        for alpha in alphas:
            mesh = build_mp_mesh(N=N, alpha=alpha, k=3)
            dt = lam * mesh.h_background
            # the closed-form study keeps eta = 1 - alpha/(2*lambda) without
            # the saturation, exactly as the symbolic setup does
            ops = dg1d.assemble_1d(mesh, 1.0, degree=1, dt=dt,
                                   config=dg1d.StabConfig1D(rho=rho,
                                                            saturate=False),
                                   bc="dirichlet", g=0.0)
            R = analysis.stability_matrix(ops, dt)
            eig = analysis.eigenvalues(R)
            spectra[(alpha, rho)] = eig
            rows.extend((alpha, rho, z, analysis.in_rk2_region(z, tol=1e-12))
                        for z in eig)
    _write_eigen_csv(os.path.join(out_dir, "eigen.csv"), rows)
    return {"spectra": spectra}


def run_monotone_grid(out_dir: str,
                      thetas=(0.0, 0.5, 1.0),
                      alphas=(0.5, 1e-2, 1e-8), N: int = 10, k: int = 5,
                      tol: float = 1e-12) -> dict:
    """Theta-scheme monotonicity: min entry of B^{-1}C over the paper grid;
    lambda = 0.9/(2(1-theta)), capped at 5 for the implicit Euler column."""
    os.makedirs(out_dir, exist_ok=True)
    results = []
    for theta in thetas:
        lam = 5.0 if theta == 1.0 else 0.9 / (2.0 * (1.0 - theta))
        for alpha in alphas:
            mesh = build_mp_mesh(N=N, alpha=alpha, k=k)
            dt = lam * mesh.h_background
            ops = dg1d.assemble_1d(mesh, 1.0, degree=0, dt=dt, bc="periodic")
            tm = analysis.build_theta_matrices(ops, dt, theta)
            ok, min_entry = analysis.check_monotone(tm, tol)
            results.append((theta, lam, alpha, min_entry, ok))
    with open(os.path.join(out_dir, "monotone.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["theta", "lambda", "alpha", "min_entry", "monotone"])
        for theta, lam, alpha, me, ok in results:
            w.writerow([repr(float(theta)), repr(float(lam)), repr(float(alpha)),
                        repr(float(me)), int(ok)])
    return {"results": results,
            "all_monotone": all(ok for *_, ok in results),
            "worst_entry": min(me for _, _, _, me, _ in results)}


# ---------------------------------------------------------------------------
# Tests 4/5: 2D ramp experiments

def _beta_field(beta_kind: str, gamma: float) -> geom2d.VelocityField:
    if beta_kind.upper() == "C":
        return geom2d.beta_constant(gamma)
    return geom2d.beta_varying(gamma)


def _ramp_observers(mesh: geom2d.CutCellMesh, degree: int):
    """Single batched diagnostics callable (shares the point evaluation)."""
    nloc = 1 if degree == 0 else 3
    volumes = np.array([c.volume for c in mesh.cells])
    pairs = np.array([(f.left, f.right) for f in mesh.faces
                      if f.tag == "internal"])
    # evaluation matrix at the volume quadrature points
    import scipy.sparse as sp

    rows, cols, vals = [], [], []
    npts = 0
    for c in mesh.cells:
        pts, _ = geom2d.polygon_quadrature(c.poly, 2)
        phi = dg2d._basis(c, pts, degree)
        for q in range(len(pts)):
            for m in range(nloc):
                rows.append(npts + q)
                cols.append(c.index * nloc + m)
                vals.append(phi[q, m])
        npts += len(pts)
    evalmat = sp.csr_matrix((vals, (rows, cols)),
                            shape=(npts, mesh.n_cells * nloc))

    def diagnostics(coeffs: np.ndarray) -> dict[str, float]:
        y = coeffs.reshape(-1)
        means = y.reshape(mesh.n_cells, nloc)[:, 0]
        pointvals = evalmat @ y
        return {
            "tv_means": float(np.sum(np.abs(means[pairs[:, 0]]
                                            - means[pairs[:, 1]]))),
            "l1": float(np.sum(volumes * np.abs(means))),
            "mass": float(np.sum(volumes * means)),
            "min": float(pointvals.min()),
            "max": float(pointvals.max()),
        }

    return diagnostics


def _run_ramp(mesh: geom2d.CutCellMesh, test: int, gamma: float,
              beta_kind: str, degree: int, limiter: bool, T: float,
              rho: float = 0.5, with_observers: bool = True
              ) -> tuple[dg2d.DGState2D, timestep.RunRecord,
                         OperatorSet, geom2d.FlowGeometry]:
    beta = _beta_field(beta_kind, gamma)
    flow = geom2d.classify_faces(mesh, beta)
    n_steps, dt = _steps_for(T, dg2d.cfl_timestep(mesh, beta, degree))

    def g(pts, t):
        return exact_solution(test, pts[:, 0], pts[:, 1], t, gamma, beta_kind)

    ops = dg2d.assemble_operators_2d(mesh, flow, degree, dt, rho=rho, g=g)
    u0 = lambda pts: exact_solution(test, pts[:, 0], pts[:, 1], 0.0, gamma,
                                    beta_kind)
    state = dg2d.project_2d(mesh, u0, degree)
    lim = None
    if limiter:
        def lim(coeffs):
            st = dg2d.DGState2D(coeffs.reshape(mesh.n_cells, -1))
            return dg2d.limit_2d(st, mesh).coeffs
    cfg = timestep.SchemeConfig(kind="tvd_rk2", dt=dt,
                                apply_limiter=limiter, limiter=lim)
    nloc = 1 if degree == 0 else 3
    observers = _ramp_observers(mesh, degree) if with_observers else None
    y, rec = timestep.run(state.coeffs, ops, cfg, n_steps, observers)
    return (dg2d.DGState2D(y.reshape(mesh.n_cells, nloc)), rec, ops, flow)


def run_ramp_convergence(out_dir: str, gamma: float = 30.0,
                         beta_kind: str = "V",
                         levels: tuple[int, ...] = (20, 40, 80, 160),
                         T: float = 0.5, degree: int = 1) -> dict:
    """Test 4: smooth data transported along the ramp, rates from a
    least-squares fit."""
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for N in levels:
        mesh = geom2d.build_ramp_mesh(N, gamma)
        state, _, _, _ = _run_ramp(mesh, 4, gamma, beta_kind, degree,
                                   limiter=False, T=T, with_observers=False)
        exact = lambda pts: exact_solution(4, pts[:, 0], pts[:, 1], T, gamma,
                                           beta_kind)
        l1, linf = dg2d.error_norms_2d(state, mesh, exact)
        rows.append((N, mesh.h, l1, linf))
    _write_errors_csv(os.path.join(out_dir, "errors.csv"), rows)
    hs = [r[1] for r in rows]
    rates = {}
    if len(rows) >= 3:
        rates = {"l1": convergence_fit(hs, [r[2] for r in rows]),
                 "linf": convergence_fit(hs, [r[3] for r in rows])}
        with open(os.path.join(out_dir, "rates.csv"), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["norm", "rate"])
            w.writerow(["l1", repr(float(rates["l1"]))])
            w.writerow(["linf", repr(float(rates["linf"]))])
    return {"gamma": gamma, "beta": beta_kind, "rows": rows, "rates": rates}


def run_ramp_step(out_dir: str, N: int = 30, gamma: float = 30.0,
                  degree: int = 0, limiter: bool = False, T: float = 0.4,
                  beta_kind: str = "V") -> dict:
    """Test 5: discontinuous data; bounds, boundary profile, VTK output, and
    for P0 the entrywise positivity of the explicit update matrix."""
    os.makedirs(out_dir, exist_ok=True)
    mesh = geom2d.build_ramp_mesh(N, gamma)
    state, rec, ops, flow = _run_ramp(mesh, 5, gamma, beta_kind, degree,
                                      limiter=limiter, T=T)
    rec.write_csv(os.path.join(out_dir, "tv.csv"))
    s, u = dg2d.boundary_profile(state, mesh)
    with open(os.path.join(out_dir, "boundary_profile.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["s", "u"])
        for si, ui in zip(s, u):
            w.writerow([repr(float(si)), repr(float(ui))])
    geom2d.write_vtk(mesh, os.path.join(out_dir, "solution.vtk"),
                     cell_scalars={"u_mean": state.means},
                     cell_vectors={"u_grad": state.gradients})
    lo, hi = dg2d.solution_extrema(state, mesh)
    summary = {"min": lo, "max": hi, "mass_first": rec.series("mass")[0],
               "mass_last": rec.series("mass")[-1]}
    if degree == 0:
        # explicit Euler update matrix B^{-1}C = I - dt M^{-1}(A+J)
        dt = ops.meta["dt"]
        upd = np.eye(ops.n_dofs) + analysis.stability_matrix(ops, dt)
        summary["update_matrix_min"] = float(upd.min())
    return summary


# ---------------------------------------------------------------------------
# dispatch

def run_test(config: ExperimentConfig) -> dict:
    """Run one of the paper tests from a config; emits report files plus a
    config echo and returns the summary."""
    os.makedirs(config.out, exist_ok=True)
    config.to_json(os.path.join(config.out, "config.json"))
    if config.test == 1:
        return run_test1(config.out, alpha=config.alpha, lam=config.lam)
    if config.test == 2:
        return run_mp_convergence(config.out, scenario=config.scenario,
                                  alpha=config.alpha, seed=config.seed,
                                  levels=config.levels or (20, 40, 80, 160, 320),
                                  lam=config.lam, T=config.T,
                                  degree=config.degree, limiter=config.limiter)
    if config.test == 3:
        return run_mp_tv(config.out, N=config.N, seed=config.seed,
                         lam=config.lam, T=config.T, limiter=config.limiter)
    if config.test == 4:
        return run_ramp_convergence(config.out, gamma=config.gamma,
                                    beta_kind=config.beta_kind,
                                    levels=config.levels or (20, 40, 80, 160),
                                    T=config.T, degree=config.degree)
    return run_ramp_step(config.out, N=config.N, gamma=config.gamma,
                         degree=config.degree, limiter=config.limiter,
                         T=config.T, beta_kind=config.beta_kind)
