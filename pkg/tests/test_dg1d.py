import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutdg.analysis import eigenvalues, in_euler_region, stability_matrix
from cutdg.dg1d import (DGState1D, StabConfig1D, assemble_1d,
                        assemble_ghost_penalty_1d, capacity_1d, evaluate_1d,
                        limit_1d, minmod, project_1d)
from cutdg.mesh1d import Mesh1D, Scenario1D, build_mp_mesh, build_scenario_mesh


def equidistant(n):
    return Mesh1D(np.linspace(0.0, 1.0, n + 1))


# ---------------------------------------------------------------------------
# capacity

def test_capacity_values():
    assert capacity_1d(0.001, 0.5, 0.5) == pytest.approx(0.001)
    assert capacity_1d(0.5, 0.25, 0.5) == 1.0
    assert capacity_1d(0.2, 0.5, 1.0) == pytest.approx(0.4)


def test_capacity_rejects_nonpositive():
    for args in [(0.0, 0.5, 0.5), (0.1, -1.0, 0.5), (0.1, 0.5, 0.0)]:
        with pytest.raises(ValueError):
            capacity_1d(*args)


# ---------------------------------------------------------------------------
# assembly

def test_p0_periodic_equidistant_is_circulant():
    mesh = equidistant(4)
    ops = assemble_1d(mesh, beta=1.0, degree=0, dt=0.1, bc="periodic")
    A = ops.upwind.to_dense()
    expected = np.eye(4) - np.roll(np.eye(4), 1, axis=1).T
    np.testing.assert_allclose(A, expected, atol=1e-15)


def test_assemble_rejects_bad_args():
    mesh = equidistant(4)
    with pytest.raises(ValueError):
        assemble_1d(mesh, beta=-1.0, degree=0, dt=0.1)
    with pytest.raises(ValueError):
        assemble_1d(mesh, beta=1.0, degree=2, dt=0.1)
    with pytest.raises(ValueError):
        assemble_1d(mesh, beta=1.0, degree=0, dt=0.1, bc="neumann")
    with pytest.raises(ValueError):
        assemble_1d(mesh, beta=1.0, degree=0, dt=0.1,
                    config=StabConfig1D(lam=0.9))


def test_p0_small_cell_update_matches_paper_formula():
    # explicit Euler on the stabilized pair: the small cell averages its own
    # value with the inflow neighbor when alpha < 2*lambda
    mesh = build_mp_mesh(N=20, alpha=0.001, k=11)
    lam, beta = 0.5, 1.0
    dt = lam * mesh.h_background / beta
    ops = assemble_1d(mesh, beta, degree=0, dt=dt, bc="periodic")
    rng = np.random.default_rng(3)
    u = rng.normal(size=mesh.n_cells)
    k1 = mesh.cut_pairs[0][0]
    k2, p = k1 + 1, k1 - 1
    alpha = mesh.cut_pairs[0][1]
    unew = u + dt * ops.rhs(u, 0.0)
    assert unew[k1] == pytest.approx(0.5 * u[k1] + 0.5 * u[p], abs=1e-11)
    expected_k2 = ((1 - lam / (1 - alpha)) * u[k2]
                   + alpha / (2 * (1 - alpha)) * u[k1]
                   + (lam - alpha / 2) / (1 - alpha) * u[p])
    assert unew[k2] == pytest.approx(expected_k2, abs=1e-11)
    assert unew[p] == pytest.approx(u[p] - lam * (u[p] - u[p - 1]), abs=1e-11)


def test_p1_mean_update_matches_paper_formula():
    mesh = build_mp_mesh(N=20, alpha=0.001, k=11)
    lam, beta = 0.5, 1.0
    h = mesh.h_background
    dt = lam * h / beta
    ops = assemble_1d(mesh, beta, degree=1, dt=dt, bc="periodic")
    rng = np.random.default_rng(4)
    c = rng.normal(size=(mesh.n_cells, 2))
    k1 = mesh.cut_pairs[0][0]
    p = k1 - 1
    xcut = mesh.edges[k1 + 1]
    y = (c.reshape(-1) + dt * ops.rhs(c.reshape(-1), 0.0)).reshape(-1, 2)

    def local(j, x):
        return c[j, 0] + c[j, 1] * (x - mesh.centers[j]) / mesh.widths[j]

    grad_p = c[p, 1] / mesh.widths[p]
    expected = (c[k1, 0] - 0.5 * (local(k1, xcut) - local(p, xcut))
                - lam * h * grad_p)
    assert y[k1, 0] == pytest.approx(expected, abs=1e-11)


def test_stab_vanishes_when_capacity_saturates():
    # alpha >= 2*omega*lambda means eta = 0: no blocks at all
    mesh = build_mp_mesh(N=10, alpha=0.5, k=5)
    dt = 0.2 * mesh.h_background
    ops = assemble_1d(mesh, 1.0, degree=1, dt=dt, bc="periodic")
    assert ops.stab.blocks == {}


def test_stab_block_structure():
    mesh = build_scenario_mesh(Scenario1D("S2", 20, seed=11))
    dt = mesh.h_background / 6.0
    ops = assemble_1d(mesh, 1.0, degree=1, dt=dt, bc="periodic")
    rows = ops.stab.row_cells()
    cols = ops.stab.col_cells()
    stab = mesh.stabilized
    assert rows <= stab | {k + 1 for k in stab}
    assert cols <= stab | {k - 1 for k in stab}


def test_stab_conservation_identity():
    # testing J u against the indicator of {k1, k2} gives zero
    mesh = build_scenario_mesh(Scenario1D("S2", 20, seed=5))
    dt = mesh.h_background / 6.0
    for degree in (0, 1):
        ops = assemble_1d(mesh, 1.0, degree=degree, dt=dt, bc="periodic")
        J = ops.stab.to_csr()
        rng = np.random.default_rng(degree)
        for _ in range(5):
            u = rng.normal(size=ops.n_dofs)
            v = (J @ u).reshape(mesh.n_cells, degree + 1)
            scale = ops.stab.frobenius() * np.linalg.norm(u) + 1e-30
            for k1, _ in mesh.cut_pairs:
                assert abs(v[k1, 0] + v[k1 + 1, 0]) <= 1e-13 * scale


def test_dirichlet_boundary_vector():
    mesh = equidistant(4)
    ops = assemble_1d(mesh, beta=2.0, degree=1, dt=0.01, bc="dirichlet", g=3.0)
    b = ops.boundary_at(0.0)
    np.testing.assert_allclose(b[:2], [-6.0, 3.0])  # -beta*g*[1, -1/2]
    assert np.all(b[2:] == 0.0)


# ---------------------------------------------------------------------------
# ghost penalty

def test_ghost_penalty_zero_weights():
    mesh = build_mp_mesh(N=20, alpha=0.001, k=11)
    J = assemble_ghost_penalty_1d(mesh, 0.0, 0.0)
    assert np.allclose(J.to_dense(), 0.0)


def test_ghost_penalty_p0_blocks():
    mesh = build_mp_mesh(N=20, alpha=0.001, k=11)
    rho1, rho2 = 0.7, 0.3
    J = assemble_ghost_penalty_1d(mesh, rho1, rho2)
    k1 = mesh.cut_pairs[0][0]
    p, k2 = k1 - 1, k1 + 1
    sym = np.array([[1.0, -1.0], [-1.0, 1.0]])
    got_left = np.array([[J.get(a, b)[0, 0] for b in (p, k1)] for a in (p, k1)])
    got_cut = np.array([[J.get(a, b)[0, 0] for b in (k1, k2)] for a in (k1, k2)])
    # the (k1,k1) entry carries both faces
    np.testing.assert_allclose(got_left - np.diag([0, rho2 * 1.0]),
                               rho1 * sym, atol=1e-15)
    np.testing.assert_allclose(got_cut - np.diag([rho1 * 1.0, 0]),
                               rho2 * sym, atol=1e-15)


def test_ghost_penalty_has_outlier_eigenvalue():
    # Test-1 parameters: one eigenvalue of dt*L escapes the Euler region
    mesh = build_mp_mesh(N=20, alpha=0.001, k=11)
    lam = 0.5
    dt = lam * mesh.h_background
    ops = assemble_1d(mesh, 1.0, degree=0, dt=dt, bc="periodic")
    eta = 1.0 - capacity_1d(0.001, lam, 0.5)
    import dataclasses

    ghost = dataclasses.replace(
        ops, stab=assemble_ghost_penalty_1d(mesh, eta, eta))
    ev = eigenvalues(stability_matrix(ghost, dt))
    assert any(not in_euler_region(z, tol=1e-9) for z in ev)


# ---------------------------------------------------------------------------
# minmod and limiter

def test_minmod_examples():
    assert minmod(1.0, 2.0, 3.0) == 1.0
    assert minmod(1.0, -2.0, 3.0) == 0.0
    assert minmod(-1.0, -4.0) == -1.0
    with pytest.raises(ValueError):
        minmod()


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=5))
def test_minmod_properties(vals):
    m = minmod(*vals)
    assert abs(m) <= min(abs(v) for v in vals) + 1e-12
    if m != 0.0:
        assert all(np.sign(v) == np.sign(m) for v in vals)


def test_limiter_keeps_linear_data_on_equidistant_cells():
    mesh = equidistant(10)
    state = project_1d(mesh, lambda x: 2.0 * x + 1.0, degree=1)
    limited = limit_1d(state, mesh)
    # interior cells keep the exact slope (periodic wrap clips the ends)
    np.testing.assert_allclose(limited.coeffs[1:-1], state.coeffs[1:-1],
                               atol=1e-13)
    np.testing.assert_allclose(limited.means, state.means, atol=0)


def test_limiter_flattens_extrema():
    mesh = equidistant(5)
    coeffs = np.zeros((5, 2))
    coeffs[:, 0] = [0.0, 0.0, 1.0, 0.0, 0.0]
    coeffs[2, 1] = 0.4
    limited = limit_1d(DGState1D(coeffs), mesh)
    assert limited.coeffs[2, 1] == 0.0


def test_limiter_cut_cell_clip():
    # inflow neighbor of a small cell: reconstruction at the cut point must
    # stay between the two means; the admissible slope is (mean_k1-mean_p)/d
    mesh = build_mp_mesh(N=10, alpha=0.2, k=5)
    k1 = mesh.cut_pairs[0][0]
    p = k1 - 1
    coeffs = np.zeros((mesh.n_cells, 2))
    coeffs[:, 0] = np.linspace(1.0, 0.4, mesh.n_cells)
    coeffs[p, 0], coeffs[k1, 0] = 1.0, 0.0
    coeffs[p, 1] = -10.0 * mesh.widths[p]  # steep candidate slope
    limited = limit_1d(DGState1D(coeffs), mesh)
    xcut = mesh.edges[k1 + 1]
    recon = (limited.coeffs[p, 0] + limited.coeffs[p, 1]
             * (xcut - mesh.centers[p]) / mesh.widths[p])
    assert 0.0 - 1e-12 <= recon <= 1.0 + 1e-12
    assert abs(limited.coeffs[p, 1]) < abs(coeffs[p, 1])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_limiter_idempotent_and_conservative(seed):
    mesh = build_scenario_mesh(Scenario1D("S2", 20, seed=123))
    rng = np.random.default_rng(seed)
    state = DGState1D(rng.normal(size=(mesh.n_cells, 2)))
    once = limit_1d(state, mesh)
    twice = limit_1d(once, mesh)
    np.testing.assert_allclose(once.coeffs, twice.coeffs, atol=1e-14)
    np.testing.assert_array_equal(once.means, state.means)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_limited_slope_ratio_property(seed):
    # 0 <= grad / ((2/h_j)(ubar_{j+1}-ubar_j)) <= 1 after limiting, both sides
    mesh = build_scenario_mesh(Scenario1D("S2", 30, seed=77))
    rng = np.random.default_rng(seed)
    state = limit_1d(DGState1D(rng.normal(size=(mesh.n_cells, 2))), mesh)
    ubar = state.means
    grad = state.slopes(mesh)
    n = mesh.n_cells
    for j in range(n):
        for d in (ubar[(j + 1) % n] - ubar[j], ubar[j] - ubar[(j - 1) % n]):
            denom = 2.0 / mesh.widths[j] * d
            if abs(denom) > 1e-14:
                r = grad[j] / denom
                assert -1e-12 <= r <= 1.0 + 1e-12


def test_projection_and_evaluation_roundtrip():
    mesh = build_mp_mesh(N=10, alpha=0.3, k=4)
    state = project_1d(mesh, lambda x: 3.0 * x - 0.5, degree=1)
    x = np.linspace(0.01, 0.99, 37)
    np.testing.assert_allclose(evaluate_1d(state, mesh, x), 3.0 * x - 0.5,
                               atol=1e-13)
