import math

import numpy as np
import pytest

from cutdg import dg2d, geom2d
from cutdg.dg1d import StabConfig1D, assemble_1d
from cutdg.dg2d import (DGState2D, assemble_mass_2d, assemble_operators_2d,
                        assemble_stab_2d, assemble_upwind_2d, boundary_profile,
                        cfl_timestep, error_norms_2d, limit_2d,
                        precompute_trajectories, precompute_trajectory,
                        project_2d, solution_extrema, stab_cell_blocks)
from cutdg.geom2d import (beta_constant, beta_varying, build_ramp_mesh,
                          classify_faces, compute_capacities,
                          polygon_quadrature)
from cutdg.mesh1d import build_mp_mesh
from helpers_slab import build_slab_mesh


def ramp_setup(N=30, gamma=30.0, kind="C"):
    mesh = build_ramp_mesh(N, gamma)
    beta = beta_constant(gamma) if kind == "C" else beta_varying(gamma)
    flow = classify_faces(mesh, beta)
    return mesh, beta, flow


def slab_setup(alpha=0.01, lam=0.25, N=10, k=5, beta_val=1.0):
    mesh1 = build_mp_mesh(N=N, alpha=alpha, k=k)
    slab = build_slab_mesh(mesh1)
    beta = geom2d.VelocityField(
        lambda p: np.broadcast_to(np.array([beta_val, 0.0]), p.shape).copy(),
        name="slab")
    flow = classify_faces(slab, beta)
    dt = lam * mesh1.h_background / beta_val
    return mesh1, slab, beta, flow, dt


# ---------------------------------------------------------------------------
# trajectory operator

def test_trajectory_preserves_constants():
    mesh, beta, flow = ramp_setup()
    for cidx in mesh.stabilized:
        traj = precompute_trajectory(mesh, flow, cidx)
        coeffs = traj.apply_trace({f: np.array([1.0, 0.0])
                                   for f in traj.inflow_faces})
        pts, _ = polygon_quadrature(mesh.cells[cidx].poly, 2)
        vals = dg2d._basis_p1(mesh.cells[cidx], pts) @ coeffs
        assert np.max(np.abs(vals - 1.0)) <= 1e-12


def test_trajectory_matches_analytic_backtracing():
    # constant beta, single inflow face: T(w)(x) = w(x - s(x) * bhat) exactly
    mesh, beta, flow = ramp_setup()
    bvec = beta(np.zeros((1, 2)))[0]
    bhat = bvec / np.linalg.norm(bvec)
    grad = np.array([3.0, 2.0])
    checked = 0
    for cidx in mesh.stabilized:
        cell = mesh.cells[cidx]
        if len(cell.poly) != 3:
            continue
        traj = precompute_trajectory(mesh, flow, cidx)
        if len(traj.inflow_faces) != 1:
            continue
        f = mesh.faces[traj.inflow_faces[0]]
        n_in = mesh.cell_normal(cidx, f)
        mid = 0.5 * (f.v0 + f.v1)
        tau = (f.v1 - f.v0) / np.linalg.norm(f.v1 - f.v0)
        face_coeffs = np.array([grad @ mid + 1.0, grad @ tau])
        cell_coeffs = traj.apply_trace({f.index: face_coeffs})
        pts, _ = polygon_quadrature(cell.poly, 4)
        vals = dg2d._basis_p1(cell, pts) @ cell_coeffs
        t_in = ((pts - f.v0) @ n_in) / (n_in @ bhat)
        x0 = pts - t_in[:, None] * bhat[None, :]
        exact = x0 @ grad + 1.0
        assert np.max(np.abs(vals - exact)) <= 1e-11
        checked += 1
    assert checked >= 3


def test_trajectory_length_matches_analytic_distance():
    mesh, beta, flow = ramp_setup()
    bvec = beta(np.zeros((1, 2)))[0]
    bhat = bvec / np.linalg.norm(bvec)
    for cidx in mesh.stabilized:
        cell = mesh.cells[cidx]
        traj = precompute_trajectory(mesh, flow, cidx)
        outs = [g for g in flow.cell_outflow[cidx] if flow.face_sign[g] != 0]
        if len(cell.poly) != 3 or len(traj.inflow_faces) != 1 or len(outs) != 1:
            continue
        fi, fo = mesh.faces[traj.inflow_faces[0]], mesh.faces[outs[0]]
        n_in = mesh.cell_normal(cidx, fi)
        n_out = mesh.cell_normal(cidx, fo)
        pts, _ = polygon_quadrature(cell.poly, 4)
        t_in = ((pts - fi.v0) @ n_in) / (n_in @ bhat)
        t_out = ((fo.v0 - pts) @ n_out) / (n_out @ bhat)
        lens = dg2d._basis_p1(cell, pts) @ traj.length_coeffs
        assert np.max(np.abs(lens - (t_in + t_out))) <= 1e-11


def test_trajectory_length_nonnegative():
    mesh, beta, flow = ramp_setup(kind="V")
    for cidx, traj in precompute_trajectories(mesh, flow).items():
        cell = mesh.cells[cidx]
        pts, _ = polygon_quadrature(cell.poly, 2)
        for fid in flow.cell_outflow[cidx]:
            f = mesh.faces[fid]
            fp, _ = geom2d.face_quadrature(f.v0, f.v1, 2)
            pts = np.vstack([pts, fp])
        lens = dg2d._basis_p1(cell, pts) @ traj.length_coeffs
        assert np.min(lens) >= -1e-14


def test_trajectory_requires_flux_faces():
    mesh, beta, flow = ramp_setup()
    still = geom2d.VelocityField(lambda p: np.zeros_like(p), name="still")
    flow0 = classify_faces(mesh, still)
    cidx = next(iter(mesh.stabilized))
    with pytest.raises(geom2d.GeometryError):
        precompute_trajectory(mesh, flow0, cidx)


# ---------------------------------------------------------------------------
# upwind form

def test_constants_are_steady_in_the_interior():
    mesh, beta, flow = ramp_setup(kind="V")
    A, _ = assemble_upwind_2d(mesh, flow, degree=1)
    n = mesh.n_cells
    u = np.zeros((n, 3))
    u[:, 0] = 1.0
    v = (A.to_csr() @ u.reshape(-1)).reshape(n, 3)
    for c in mesh.cells:
        if c.is_cut:
            continue
        i, j = c.ij
        if i in (0, mesh.meta["N"] - 1) or j in (0, mesh.meta["N"] - 1):
            continue  # boundary rows carry the outflow terms
        assert np.max(np.abs(v[c.index])) <= 1e-13


def test_single_cell_face_integrals_by_hand():
    mesh1 = build_mp_mesh(N=10, alpha=0.25, k=5)
    slab = build_slab_mesh(mesh1)
    gamma = 30.0
    beta = beta_constant(gamma)
    flow = classify_faces(slab, beta)
    A, _ = assemble_upwind_2d(slab, flow, degree=0)
    rad = math.radians(gamma)
    bx, by = 2 * math.cos(rad), 2 * math.sin(rad)
    # interior slab cell j: vertical faces of height 1, horizontal of width h_j
    j = 1
    h_j = mesh1.widths[j]
    # A[j,j] = outflow flux: right face bx*1 + top face by*h_j
    assert A.get(j, j)[0, 0] == pytest.approx(bx + by * h_j, rel=1e-13)
    assert A.get(j, j - 1)[0, 0] == pytest.approx(-bx, rel=1e-13)


def test_slab_reduces_to_1d_upwind():
    # the 2D x-mode is h_c times the 1D slope mode, so blocks map through
    # diag(1, h_row) . B . diag(1, h_col)
    mesh1, slab, beta, flow, dt = slab_setup()
    ops1 = assemble_1d(mesh1, 1.0, degree=1, dt=dt, bc="dirichlet", g=0.0)
    A2, _ = assemble_upwind_2d(slab, flow, degree=1)
    for (r, c), blk1 in ops1.upwind.blocks.items():
        hr, hc = mesh1.widths[r], mesh1.widths[c]
        scale = np.outer([1.0, hr], [1.0, hc])
        np.testing.assert_allclose(A2.get(r, c)[:2, :2], blk1 * scale,
                                   atol=1e-13)


def test_slab_stabilization_reduces_to_1d():
    for rho in (0.5, 0.25):
        mesh1, slab, beta, flow, dt = slab_setup()
        ops1 = assemble_1d(mesh1, 1.0, degree=1, dt=dt,
                           config=StabConfig1D(rho=rho), bc="dirichlet", g=0.0)
        caps = compute_capacities(slab, flow, dt)
        trajs = precompute_trajectories(slab, flow)
        J2 = assemble_stab_2d(slab, flow, caps, trajs, degree=1, rho=rho)
        assert ops1.stab.blocks, "1D stabilization expected to be active"
        for (r, c), blk1 in ops1.stab.blocks.items():
            hr, hc = mesh1.widths[r], mesh1.widths[c]
            scale = np.outer([1.0, hr], [1.0, hc])
            np.testing.assert_allclose(J2.get(r, c)[:2, :2], blk1 * scale,
                                       atol=1e-12)


def test_slab_p0_stabilization_reduces_to_1d():
    mesh1, slab, beta, flow, dt = slab_setup()
    ops1 = assemble_1d(mesh1, 1.0, degree=0, dt=dt, bc="dirichlet", g=0.0)
    caps = compute_capacities(slab, flow, dt)
    trajs = precompute_trajectories(slab, flow)
    J2 = assemble_stab_2d(slab, flow, caps, trajs, degree=0)
    for (r, c), blk1 in ops1.stab.blocks.items():
        np.testing.assert_allclose(J2.get(r, c), blk1, atol=1e-13)


# ---------------------------------------------------------------------------
# stabilization properties on the ramp

def test_conservation_lemma_per_stabilized_cell():
    mesh, beta, flow = ramp_setup(kind="V")
    dt = cfl_timestep(mesh, beta, 1)
    caps = compute_capacities(mesh, flow, dt)
    trajs = precompute_trajectories(mesh, flow)
    rng = np.random.default_rng(8)
    J = assemble_stab_2d(mesh, flow, caps, trajs, degree=1)
    scale_J = J.frobenius()
    for cidx in mesh.stabilized:
        blocks = stab_cell_blocks(mesh, flow, cidx, caps[cidx], trajs[cidx],
                                  degree=1)
        patch = {cidx}
        for fid in flow.cell_outflow[cidx]:
            if flow.face_sign[fid] != 0:
                f = mesh.faces[fid]
                patch.add(f.right if f.left == cidx else f.left)
        for _ in range(20):
            u = rng.normal(size=(mesh.n_cells, 3))
            total = 0.0
            for (r, c), blk in blocks.items():
                assert r in patch
                total += (blk @ u[c])[0]
            assert abs(total) <= 1e-12 * scale_J * np.linalg.norm(u)


def test_stab_sparsity_pattern():
    mesh, beta, flow = ramp_setup(kind="V")
    dt = cfl_timestep(mesh, beta, 1)
    caps = compute_capacities(mesh, flow, dt)
    trajs = precompute_trajectories(mesh, flow)
    J = assemble_stab_2d(mesh, flow, caps, trajs, degree=1)
    allowed_rows, allowed_cols = set(), set()
    for cidx in mesh.stabilized:
        allowed_rows.add(cidx)
        allowed_cols.add(cidx)
        for fid in flow.cell_outflow[cidx]:
            if flow.face_sign[fid] != 0:
                f = mesh.faces[fid]
                allowed_rows.add(f.right if f.left == cidx else f.left)
        for fid in flow.cell_inflow[cidx]:
            f = mesh.faces[fid]
            allowed_cols.add(f.right if f.left == cidx else f.left)
    assert J.row_cells() <= allowed_rows
    assert J.col_cells() <= allowed_cols


def test_stab_zero_when_eta_zero():
    mesh, beta, flow = ramp_setup(kind="V")
    # a generous time step makes every capacity saturate
    caps = compute_capacities(mesh, flow, dt=1e-12)
    trajs = precompute_trajectories(mesh, flow)
    J = assemble_stab_2d(mesh, flow, caps, trajs, degree=1)
    assert J.blocks == {}


# ---------------------------------------------------------------------------
# limiter

def test_limiter_keeps_global_linears_on_cartesian_patch():
    mesh1 = build_mp_mesh(N=10, alpha=0.25, k=5)
    slab = build_slab_mesh(mesh1)
    state = project_2d(slab, lambda p: 2.0 * p[:, 0] + 0.5, degree=1)
    limited = limit_2d(state, slab)
    inner = [c.index for c in slab.cells if 0 < c.index < slab.n_cells - 1
             and not c.is_cut]
    np.testing.assert_allclose(limited.coeffs[inner], state.coeffs[inner],
                               atol=1e-12)
    np.testing.assert_array_equal(limited.means, state.means)


def test_limiter_kills_isolated_spike():
    mesh, beta, flow = ramp_setup()
    coeffs = np.zeros((mesh.n_cells, 3))
    spike = next(c.index for c in mesh.cells if not c.is_cut)
    coeffs[spike, 0] = 1.0
    coeffs[spike, 1:] = [0.7, -0.3]
    limited = limit_2d(DGState2D(coeffs), mesh)
    np.testing.assert_allclose(limited.coeffs[spike, 1:], 0.0, atol=1e-15)


def test_limiter_requires_degree1():
    mesh, beta, flow = ramp_setup()
    with pytest.raises(ValueError):
        limit_2d(DGState2D(np.zeros((mesh.n_cells, 1))), mesh)


# ---------------------------------------------------------------------------
# CFL, projection, norms

def test_cfl_examples():
    mesh, _, _ = ramp_setup(N=20, gamma=30.0)
    two = geom2d.VelocityField(
        lambda p: np.broadcast_to(np.array([2.0, 0.0]), p.shape).copy())
    dt1 = cfl_timestep(mesh, two, 1)
    assert dt1 == pytest.approx(0.6 * (1 / 3) * 0.5 * 0.05 / 2.0, rel=1e-12)
    dt0 = cfl_timestep(mesh, two, 0)
    assert dt0 == pytest.approx(3 * dt1, rel=1e-12)
    bc = beta_constant(30.0)
    assert cfl_timestep(mesh, bc, 1) == pytest.approx(
        0.6 * (1 / 3) * 0.25 * mesh.h, rel=1e-12)
    still = geom2d.VelocityField(lambda p: np.zeros_like(p))
    with pytest.raises(ValueError):
        cfl_timestep(mesh, still, 1)


def test_projection_reproduces_linears_and_error_norms():
    mesh, beta, flow = ramp_setup()
    f = lambda p: 0.3 * p[:, 0] - 1.2 * p[:, 1] + 0.7
    state = project_2d(mesh, f, degree=1)
    l1, linf = error_norms_2d(state, mesh, f)
    assert l1 <= 1e-13 and linf <= 1e-13


def test_error_norms_constant_mismatch():
    # u_h = 0 against u = 1 on the full unit square: L1 = 1, Linf = 1
    mesh1 = build_mp_mesh(N=10, alpha=0.25, k=5)
    slab = build_slab_mesh(mesh1)
    state = DGState2D(np.zeros((slab.n_cells, 1)))
    l1, linf = error_norms_2d(state, slab, lambda p: np.ones(len(p)))
    assert l1 == pytest.approx(1.0, abs=1e-13)
    assert linf == pytest.approx(1.0, abs=1e-15)


def test_mass_matrix_moment_structure():
    mesh, _, _ = ramp_setup()
    M = assemble_mass_2d(mesh, degree=1)
    for c in mesh.cells:
        blk = M.get(c.index, c.index)
        assert blk[0, 0] == pytest.approx(c.volume, rel=1e-13)
        # moment basis: linear modes have zero average
        assert abs(blk[0, 1]) <= 1e-14 * c.volume ** 0.5
        assert abs(blk[0, 2]) <= 1e-14 * c.volume ** 0.5
        assert np.all(np.linalg.eigvalsh(blk) > 0)


def test_boundary_profile_orders_by_arclength():
    mesh, beta, flow = ramp_setup()
    state = project_2d(mesh, lambda p: p[:, 0], degree=1)
    s, u = boundary_profile(state, mesh)
    assert np.all(np.diff(s) > 0)
    assert len(s) == sum(1 for f in mesh.faces if f.tag == "ramp")


def test_solution_extrema_bounds_projection():
    mesh, beta, flow = ramp_setup()
    state = project_2d(mesh, lambda p: np.clip(p[:, 0], 0.2, 0.8), degree=0)
    lo, hi = solution_extrema(state, mesh)
    assert 0.19 <= lo <= hi <= 0.81


def test_interior_pulse_conserves_total_mass():
    # zero inflow data and a pulse that never reaches the boundary: the total
    # mass stays constant, stabilization included
    from cutdg import timestep
    from cutdg.dg2d import total_mass

    mesh, beta, flow = ramp_setup(N=30, kind="V")
    dt = cfl_timestep(mesh, beta, 1)
    ops = assemble_operators_2d(mesh, flow, degree=1, dt=dt, g=None)

    def bump(p):
        r2 = ((p[:, 0] - 0.55) ** 2 + (p[:, 1] - 0.6) ** 2) / 0.01
        return np.where(r2 < 1.0, (1.0 - r2) ** 2, 0.0)

    state = project_2d(mesh, bump, degree=1)
    mass0 = total_mass(state, mesh)
    cfg = timestep.SchemeConfig(kind="tvd_rk2", dt=dt)
    # the numerical stencil widens by two cells per step; four steps keep the
    # support strictly away from every outflow boundary
    y, _ = timestep.run(state.coeffs, ops, cfg, 4)
    mass1 = total_mass(DGState2D(y.reshape(mesh.n_cells, 3)), mesh)
    assert abs(mass1 - mass0) <= 1e-11 * max(1.0, abs(mass0))


def test_capacity_zero_inflow_cell():
    # a still field has no inflow anywhere: alpha saturates, eta vanishes
    mesh, beta, flow = ramp_setup()
    still = geom2d.VelocityField(lambda p: np.zeros_like(p), name="still")
    flow0 = classify_faces(mesh, still)
    entry = geom2d.capacity_2d(mesh, flow0, next(iter(mesh.stabilized)),
                               dt=0.01)
    assert entry.alpha == 1.0 and entry.eta == 0.0


def test_operator_assembly_end_to_end_smoke():
    mesh, beta, flow = ramp_setup(N=20, kind="V")
    dt = cfl_timestep(mesh, beta, 1)
    ops = assemble_operators_2d(mesh, flow, degree=1, dt=dt,
                                g=lambda pts, t: np.ones(len(pts)))
    assert ops.n_dofs == 3 * mesh.n_cells
    b = ops.boundary_at(0.0)
    assert b.shape == (ops.n_dofs,)
    assert np.any(b != 0.0)
