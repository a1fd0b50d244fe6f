"""2D DG discretization: upwind transport, penalty stabilization built on
per-cell trajectory operators, Barth-Jespersen limiting, CFL rule.

Local basis on a cell with centroid (xc, yc): {1, x-xc, y-yc}.  The linear
modes have zero cell average and are not rescaled, so gradient coefficients
are plain derivatives.  The trajectory operator of a stabilized cell solves a
single-element upwind problem in P1 (m = 1): inflow-face data enters through
the upwind flux, outflow is natural.  Its matrix maps the coefficients of a
face polynomial {1, s} (s the arclength from the face midpoint) to in-cell
P1 coefficients; the trajectory length is obtained from the reversed-flow
transport problem with unit source and then carried into the cell by the
same trajectory map.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .blockmat import BlockMatrix
from .geom2d import (CapacityEntry, CutCellMesh, Face, FlowGeometry,
                     GeometryError, VelocityField, compute_capacities,
                     face_quadrature, polygon_quadrature)
from .operators import OperatorSet


@dataclass
class DGState2D:
    """Per-cell coefficients, shape (n_cells, 1) for P0 or (n_cells, 3)."""
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.ndim == 1:
            self.coeffs = self.coeffs.reshape(-1, 1)
        if self.coeffs.shape[1] not in (1, 3):
            raise ValueError("expected 1 or 3 local coefficients")

    @property
    def degree(self) -> int:
        return 0 if self.coeffs.shape[1] == 1 else 1

    @property
    def means(self) -> np.ndarray:
        return self.coeffs[:, 0]

    @property
    def gradients(self) -> np.ndarray:
        if self.degree == 0:
            return np.zeros((self.coeffs.shape[0], 2))
        return self.coeffs[:, 1:3]

    def copy(self) -> "DGState2D":
        return DGState2D(self.coeffs.copy())


def _basis_p1(cell, pts: np.ndarray) -> np.ndarray:
    """Values of {1, x-xc, y-yc} at pts, shape (npts, 3)."""
    pts = np.atleast_2d(pts)
    out = np.empty((len(pts), 3))
    out[:, 0] = 1.0
    out[:, 1] = pts[:, 0] - cell.centroid[0]
    out[:, 2] = pts[:, 1] - cell.centroid[1]
    return out


def _basis(cell, pts: np.ndarray, degree: int) -> np.ndarray:
    full = _basis_p1(cell, pts)
    return full[:, :1] if degree == 0 else full


def evaluate_cell(state: DGState2D, mesh: CutCellMesh, cell: int,
                  pts: np.ndarray) -> np.ndarray:
    return _basis(mesh.cells[cell], pts, state.degree) @ state.coeffs[cell]


# ---------------------------------------------------------------------------
# trajectory operator

@dataclass
class TrajectoryOperator:
    cell: int
    inflow_faces: tuple[int, ...]
    trace_maps: dict[int, np.ndarray]   # face id -> (3, 2)
    length_coeffs: np.ndarray           # P1 coefficients of l_T on the cell

    def apply_trace(self, face_coeffs: dict[int, np.ndarray]) -> np.ndarray:
        out = np.zeros(3)
        for fid, c in face_coeffs.items():
            out += self.trace_maps[fid] @ c
        return out


def _face_frame(face: Face) -> tuple[np.ndarray, np.ndarray]:
    tau = face.v1 - face.v0
    return face.midpoint, tau / np.linalg.norm(tau)


def _face_poly_projection(face: Face, values_at: Callable[[np.ndarray], np.ndarray],
                          quad_order: int = 2) -> np.ndarray:
    """L2 projection onto {1, s} of a function given by point evaluation."""
    pts, w = face_quadrature(face.v0, face.v1, quad_order)
    mid, tau = _face_frame(face)
    s = (pts - mid) @ tau
    vals = values_at(pts)
    length = face.length
    c0 = float(np.sum(w * vals)) / length
    c1 = float(np.sum(w * s * vals)) / (length ** 3 / 12.0)
    return np.array([c0, c1])


def _face_trace_matrix(face: Face, cell, degree: int) -> np.ndarray:
    """(2, nloc) matrix of face-polynomial coefficients of each basis trace."""
    nloc = 1 if degree == 0 else 3
    cols = []
    for n in range(nloc):
        def tr(pts, n=n):
            return _basis(cell, pts, degree)[:, n]
        cols.append(_face_poly_projection(face, tr))
    return np.array(cols).T


def _face_dirderiv_matrix(face: Face, cell, beta: VelocityField) -> np.ndarray:
    """(2, 3) matrix projecting <grad(phi_n), beta>/|beta| onto {1, s}."""
    grads = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    cols = []
    for n in range(3):
        def dd(pts, n=n):
            b = beta(pts)
            return (b @ grads[n]) / np.linalg.norm(b, axis=1)
        cols.append(_face_poly_projection(face, dd))
    return np.array(cols).T


def _local_upwind_matrix(mesh: CutCellMesh, flow: FlowGeometry, cell: int,
                         reverse: bool = False, quad_order: int = 2
                         ) -> np.ndarray:
    """Single-element upwind matrix for the trajectory problems (P1 space)."""
    cobj = mesh.cells[cell]
    beta = flow.beta
    sign = -1.0 if reverse else 1.0
    K = np.zeros((3, 3))
    pts, w = polygon_quadrature(cobj.poly, quad_order)
    phi = _basis_p1(cobj, pts)
    b = beta(pts)
    # -int phi_n <beta', grad phi_m>; gradient rows m = 1, 2
    for m, comp in ((1, 0), (2, 1)):
        K[m, :] -= np.sum(w[:, None] * (sign * b[:, comp])[:, None] * phi, axis=0)
    for fid, orient in cobj.face_ids:
        f = mesh.faces[fid]
        fpts, fw = face_quadrature(f.v0, f.v1, quad_order)
        bn = sign * (beta(fpts) @ f.normal) * orient
        up = np.maximum(bn, 0.0)  # outflow part of beta'.n
        if np.max(up) <= 0.0:
            continue
        fphi = _basis_p1(cobj, fpts)
        K += np.einsum("q,qm,qn->mn", fw * up, fphi, fphi)
    return K


def precompute_trajectory(mesh: CutCellMesh, flow: FlowGeometry, cell: int,
                          quad_order: int = 2) -> TrajectoryOperator:
    """Trace-to-cell maps and trajectory length of one stabilized cell."""
    beta = flow.beta
    cobj = mesh.cells[cell]
    inflow = [fid for fid in flow.cell_inflow[cell]
              if flow.face_sign[fid] != 0]
    outflow = [fid for fid in flow.cell_outflow[cell]
               if flow.face_sign[fid] != 0]
    if not inflow:
        raise GeometryError(f"stabilized cell {cell} has no inflow face")
    if not outflow:
        raise GeometryError(f"stabilized cell {cell} has no outflow face")

    K = _local_upwind_matrix(mesh, flow, cell, reverse=False,
                             quad_order=quad_order)
    try:
        Kinv = np.linalg.inv(K)
    except np.linalg.LinAlgError as exc:
        raise GeometryError(f"singular trajectory system on cell {cell}") from exc

    maps: dict[int, np.ndarray] = {}
    for fid in inflow:
        f = mesh.faces[fid]
        orient = 1 if f.left == cell else -1
        fpts, fw = face_quadrature(f.v0, f.v1, quad_order)
        bn = (beta(fpts) @ f.normal) * orient
        mid, tau = _face_frame(f)
        s = (fpts - mid) @ tau
        psi = np.stack([np.ones_like(s), s], axis=1)
        fphi = _basis_p1(cobj, fpts)
        # rhs[m, p] = int_f (beta.n)^- psi_p phi_m
        rhs = np.einsum("q,qm,qp->mp", fw * np.maximum(-bn, 0.0), fphi, psi)
        maps[fid] = Kinv @ rhs

    # reversed transport with unit source gives the distance to the outflow
    Krev = _local_upwind_matrix(mesh, flow, cell, reverse=True,
                                quad_order=quad_order)
    pts, w = polygon_quadrature(cobj.poly, quad_order)
    speed = np.linalg.norm(beta(pts), axis=1)
    rhs_len = np.sum(w[:, None] * speed[:, None] * _basis_p1(cobj, pts), axis=0)
    ltilde = np.linalg.solve(Krev, rhs_len)

    # restrict to the inflow faces, then push back into the cell
    face_coeffs = {}
    for fid in inflow:
        f = mesh.faces[fid]

        def lvals(p):
            return _basis_p1(cobj, p) @ ltilde

        face_coeffs[fid] = _face_poly_projection(f, lvals)
    length = np.zeros(3)
    for fid, c in face_coeffs.items():
        length += maps[fid] @ c

    return TrajectoryOperator(cell=cell, inflow_faces=tuple(inflow),
                              trace_maps=maps, length_coeffs=length)


def precompute_trajectories(mesh: CutCellMesh, flow: FlowGeometry
                            ) -> dict[int, TrajectoryOperator]:
    return {c: precompute_trajectory(mesh, flow, c) for c in mesh.stabilized}


# ---------------------------------------------------------------------------
# upwind form

def assemble_upwind_2d(mesh: CutCellMesh, flow: FlowGeometry, degree: int,
                       g: Callable[[np.ndarray, float], np.ndarray]
                       | None = None, quad_order: int = 2
                       ) -> tuple[BlockMatrix, Callable[[float], np.ndarray]]:
    """Upwind stiffness matrix and the inflow boundary vector b(t)."""
    if degree not in (0, 1):
        raise ValueError("only degrees 0 and 1 are supported")
    nloc = 1 if degree == 0 else 3
    beta = flow.beta
    n = mesh.n_cells
    A = BlockMatrix(n, nloc)

    if degree == 1:
        for c in mesh.cells:
            pts, w = polygon_quadrature(c.poly, quad_order)
            phi = _basis(c, pts, degree)
            b = beta(pts)
            blk = np.zeros((nloc, nloc))
            for m, comp in ((1, 0), (2, 1)):
                blk[m, :] = -np.sum(w[:, None] * b[:, comp][:, None] * phi,
                                    axis=0)
            A.add(c.index, c.index, blk)

    inflow_pts: list[np.ndarray] = []
    inflow_rows: list[int] = []
    inflow_vals: list[float] = []
    inflow_cols: list[int] = []
    for f in mesh.faces:
        pts, w = face_quadrature(f.v0, f.v1, quad_order)
        bn = beta(pts) @ f.normal
        if f.right is None:
            up = np.maximum(bn, 0.0)
            if np.max(up) > 0.0:
                phi = _basis(mesh.cells[f.left], pts, degree)
                A.add(f.left, f.left,
                      np.einsum("q,qm,qn->mn", w * up, phi, phi))
            down = np.minimum(bn, 0.0)
            if np.min(down) < 0.0:
                phi = _basis(mesh.cells[f.left], pts, degree)
                for q in range(len(pts)):
                    col = len(inflow_pts)
                    inflow_pts.append(pts[q])
                    for m in range(nloc):
                        inflow_rows.append(f.left * nloc + m)
                        inflow_cols.append(col)
                        inflow_vals.append(w[q] * down[q] * phi[q, m])
            continue
        sign = flow.face_sign[f.index]
        uw = f.left if sign >= 0 else f.right
        phi_uw = _basis(mesh.cells[uw], pts, degree)
        phi_l = _basis(mesh.cells[f.left], pts, degree)
        phi_r = _basis(mesh.cells[f.right], pts, degree)
        A.add(f.left, uw, np.einsum("q,qm,qn->mn", w * bn, phi_l, phi_uw))
        A.add(f.right, uw, -np.einsum("q,qm,qn->mn", w * bn, phi_r, phi_uw))

    # b(t) = scatter @ g(points, t); the scatter matrix holds w*(beta.n)^- phi
    pts_all = (np.array(inflow_pts) if inflow_pts else np.zeros((0, 2)))
    scatter = sp.csr_matrix((inflow_vals, (inflow_rows, inflow_cols)),
                            shape=(n * nloc, len(inflow_pts)))

    def boundary(t: float) -> np.ndarray:
        if g is None or pts_all.shape[0] == 0:
            return np.zeros(n * nloc)
        return scatter @ np.asarray(g(pts_all, t), dtype=float)

    return A, boundary


# ---------------------------------------------------------------------------
# stabilization

def stab_cell_blocks(mesh: CutCellMesh, flow: FlowGeometry, cell: int,
                     cap: CapacityEntry, traj: TrajectoryOperator,
                     degree: int, rho: float = 0.5, quad_order: int = 2
                     ) -> dict[tuple[int, int], np.ndarray]:
    """Blocks of J^{0,E} + J^{1,E} for one stabilized cell E.

    Column cells are E and its inflow neighbors, row cells E and its outflow
    neighbors.  For degree 0 the gradient part J^1 vanishes identically.
    """
    eta = cap.eta
    if eta <= 0.0:
        return {}
    nloc = 1 if degree == 0 else 3
    beta = flow.beta
    cobj = mesh.cells[cell]

    source0: dict[int, np.ndarray] = {}
    source1: dict[int, np.ndarray] = {}

    def accum(d, col, mat):
        d[col] = d.get(col, np.zeros((3, nloc))) + mat

    for fid in traj.inflow_faces:
        f = mesh.faces[fid]
        if f.right is None:
            raise GeometryError(
                f"stabilized cell {cell} has an external inflow face")
        nbr = f.right if f.left == cell else f.left
        theta = traj.trace_maps[fid]
        accum(source0, nbr, theta @ _face_trace_matrix(f, mesh.cells[nbr], degree))
        accum(source0, cell, -theta @ _face_trace_matrix(f, cobj, degree))
        if degree == 1:
            accum(source1, nbr,
                  theta @ _face_dirderiv_matrix(f, mesh.cells[nbr], beta))
            accum(source1, cell,
                  -theta @ _face_dirderiv_matrix(f, cobj, beta))

    blocks: dict[tuple[int, int], np.ndarray] = {}

    def blk(r, c):
        return blocks.setdefault((r, c), np.zeros((nloc, nloc)))

    if degree == 1:
        pts, w = polygon_quadrature(cobj.poly, quad_order)
        phi1 = _basis_p1(cobj, pts)
        b = beta(pts)
        lT = phi1 @ traj.length_coeffs
        for col in source0:
            g0 = phi1 @ source0[col]                       # (nq, nloc)
            g1 = phi1 @ source1[col]
            vol_integrand = g0 + rho * lT[:, None] * g1
            for m, comp in ((1, 0), (2, 1)):
                blk(cell, col)[m, :] -= eta * np.sum(
                    (w * b[:, comp])[:, None] * vol_integrand, axis=0)

    flux_out = [fid for fid in flow.cell_outflow[cell]
                if flow.face_sign[fid] != 0]
    if not flux_out:
        raise GeometryError(f"stabilized cell {cell} has no outflow face")
    for fid in flux_out:
        f = mesh.faces[fid]
        if f.right is None:
            raise GeometryError(
                f"stabilized cell {cell} has an external outflow face")
        nbr = f.right if f.left == cell else f.left
        orient = 1.0 if f.left == cell else -1.0
        pts, w = face_quadrature(f.v0, f.v1, quad_order)
        bn = (beta(pts) @ f.normal) * orient
        phi1 = _basis_p1(cobj, pts)
        phi_self = _basis(cobj, pts, degree)
        phi_nbr = _basis(mesh.cells[nbr], pts, degree)
        lT = phi1 @ traj.length_coeffs
        for col in source0:
            vals = phi1 @ source0[col]
            if degree == 1:
                vals = vals + lT[:, None] * (phi1 @ source1[col])
            coef = eta * w * bn
            blk(cell, col)[:, :] += np.einsum("q,qm,qn->mn", coef, phi_self, vals)
            blk(nbr, col)[:, :] -= np.einsum("q,qm,qn->mn", coef, phi_nbr, vals)
    return blocks


def assemble_stab_2d(mesh: CutCellMesh, flow: FlowGeometry,
                     caps: dict[int, CapacityEntry],
                     trajs: dict[int, TrajectoryOperator], degree: int,
                     rho: float = 0.5) -> BlockMatrix:
    nloc = 1 if degree == 0 else 3
    J = BlockMatrix(mesh.n_cells, nloc)
    for cell in sorted(caps):
        cap = caps[cell]
        if not cap.active:
            continue
        for (r, c), blkv in stab_cell_blocks(mesh, flow, cell, cap,
                                             trajs[cell], degree, rho).items():
            J.add(r, c, blkv)
    return J


def assemble_mass_2d(mesh: CutCellMesh, degree: int,
                     quad_order: int = 2) -> BlockMatrix:
    nloc = 1 if degree == 0 else 3
    M = BlockMatrix(mesh.n_cells, nloc)
    for c in mesh.cells:
        if degree == 0:
            M.add(c.index, c.index, np.array([[c.volume]]))
        else:
            pts, w = polygon_quadrature(c.poly, quad_order)
            phi = _basis(c, pts, degree)
            M.add(c.index, c.index, np.einsum("q,qm,qn->mn", w, phi, phi))
    return M


def assemble_operators_2d(mesh: CutCellMesh, flow: FlowGeometry, degree: int,
                          dt: float, rho: float = 0.5,
                          g: Callable[[np.ndarray, float], np.ndarray]
                          | None = None, stabilize: bool = True
                          ) -> OperatorSet:
    """Full operator set M, A, J, b for a run with time step dt."""
    M = assemble_mass_2d(mesh, degree)
    A, boundary = assemble_upwind_2d(mesh, flow, degree, g)
    if stabilize and mesh.stabilized:
        caps = compute_capacities(mesh, flow, dt)
        trajs = {c: precompute_trajectory(mesh, flow, c)
                 for c in mesh.stabilized if caps[c].active}
        caps_active = {c: caps[c] for c in trajs}
        J = assemble_stab_2d(mesh, flow, caps_active, trajs, degree, rho)
    else:
        nloc = 1 if degree == 0 else 3
        J = BlockMatrix(mesh.n_cells, nloc)
    b = boundary if g is not None else boundary(0.0)
    return OperatorSet(mass=M, upwind=A, stab=J, boundary=b,
                       meta={"degree": degree, "dt": dt, "rho": rho,
                             "beta": flow.beta.name})


# ---------------------------------------------------------------------------
# limiter, CFL, projections

def limit_2d(state: DGState2D, mesh: CutCellMesh) -> DGState2D:
    """Barth-Jespersen: one scalar factor per cell scales the linear part so
    the reconstruction at every face-neighbor centroid stays within the local
    min/max of the cell's and the neighbors' means.  Means are unchanged."""
    if state.degree != 1:
        raise ValueError("limiting needs a degree-1 state")
    out = state.copy()
    means = state.means
    for c in mesh.cells:
        nbrs = mesh.neighbors(c.index)
        if not nbrs:
            continue
        local = np.append(means[list(nbrs)], means[c.index])
        lo, hi = float(local.min()), float(local.max())
        g = state.coeffs[c.index, 1:3]
        theta = 1.0
        for nb in nbrs:
            d = float(g @ (mesh.cells[nb].centroid - c.centroid))
            if d > 1e-300:
                theta = min(theta, max(0.0, (hi - means[c.index]) / d))
            elif d < -1e-300:
                theta = min(theta, max(0.0, (lo - means[c.index]) / d))
        out.coeffs[c.index, 1:3] = theta * g
    return out


def cfl_timestep(mesh: CutCellMesh, beta: VelocityField, degree: int) -> float:
    """dt = 0.6 * (1/(2k+1)) * 0.5h / max ||beta||, the maximum taken over
    all volume quadrature points."""
    vmax = 0.0
    for c in mesh.cells:
        pts, _ = polygon_quadrature(c.poly, 2)
        vmax = max(vmax, float(np.max(np.linalg.norm(beta(pts), axis=1))))
    if vmax <= 1e-300:
        raise ValueError("zero velocity field")
    return 0.6 * (1.0 / (2 * degree + 1)) * 0.5 * mesh.h / vmax


def project_2d(mesh: CutCellMesh, f: Callable[[np.ndarray], np.ndarray],
               degree: int, quad_order: int = 4) -> DGState2D:
    """Cellwise L2 projection using the higher-order polygon rule."""
    nloc = 1 if degree == 0 else 3
    coeffs = np.zeros((mesh.n_cells, nloc))
    for c in mesh.cells:
        pts, w = polygon_quadrature(c.poly, quad_order)
        phi = _basis(c, pts, degree)
        mloc = np.einsum("q,qm,qn->mn", w, phi, phi)
        rhs = np.einsum("q,q,qm->m", w, np.asarray(f(pts), dtype=float), phi)
        coeffs[c.index] = np.linalg.solve(mloc, rhs)
    return DGState2D(coeffs)


def error_norms_2d(state: DGState2D, mesh: CutCellMesh,
                   exact: Callable[[np.ndarray], np.ndarray],
                   quad_order: int = 4) -> tuple[float, float]:
    """(L1, Linf) of u_h - u; L1 by cell quadrature, Linf over the points."""
    l1 = 0.0
    linf = 0.0
    for c in mesh.cells:
        pts, w = polygon_quadrature(c.poly, quad_order)
        diff = np.abs(_basis(c, pts, state.degree) @ state.coeffs[c.index]
                      - np.asarray(exact(pts), dtype=float))
        l1 += float(np.sum(w * diff))
        linf = max(linf, float(np.max(diff)))
    return l1, linf


def solution_extrema(state: DGState2D, mesh: CutCellMesh,
                     quad_order: int = 2) -> tuple[float, float]:
    lo, hi = math.inf, -math.inf
    for c in mesh.cells:
        pts, _ = polygon_quadrature(c.poly, quad_order)
        vals = _basis(c, pts, state.degree) @ state.coeffs[c.index]
        lo = min(lo, float(np.min(vals)))
        hi = max(hi, float(np.max(vals)))
    return lo, hi


def total_mass(state: DGState2D, mesh: CutCellMesh) -> float:
    return float(sum(c.volume * state.coeffs[c.index, 0] for c in mesh.cells))


def boundary_profile(state: DGState2D, mesh: CutCellMesh
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Sample u_h at the midpoints of the ramp faces; the abscissa is the
    distance along the ramp from its foot."""
    if mesh.gamma is None:
        raise ValueError("mesh has no ramp")
    rad = math.radians(mesh.gamma)
    svals, uvals = [], []
    from .geom2d import RAMP_X0

    for f in mesh.faces:
        if f.tag != "ramp":
            continue
        mid = f.midpoint
        s = math.cos(rad) * (mid[0] - RAMP_X0) + math.sin(rad) * mid[1]
        svals.append(s)
        uvals.append(float(evaluate_cell(state, mesh, f.left, mid)[0]))
    order = np.argsort(svals)
    return np.asarray(svals)[order], np.asarray(uvals)[order]
