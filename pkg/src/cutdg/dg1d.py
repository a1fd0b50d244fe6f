"""1D upwind DG operators with penalty stabilization on split-cell meshes.

Conventions (beta > 0 throughout):
  * local basis on cell j: {1, (x - x_j)/h_j}; the first coefficient is the
    cell mean, the second is h_j times the physical slope,
  * jump over a face: [[v]] = v(x-) - v(x+)  (left trace minus right trace),
  * the stabilization of a pair (k1, k2) with inflow neighbor P reads

        J(u,w) = beta*eta*( [[u]] + a*[[u_x]] ) [[w]]_cut
               - int_{k1} beta*eta*( [[u]] + rho*a*[[u_x]] ) w_x dx

    with a = alpha*h the small-cell width, all jumps taken at the pair's left
    face, and eta = 1 - min(alpha/(2*lambda), 1) for omega = 1/2.

For piecewise constants the derivative jumps drop out and J reduces to
beta*eta*[[u]]*[[w]]_cut; when eta == 0 no blocks are stored at all.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .blockmat import BlockMatrix
from .mesh1d import Mesh1D
from .operators import OperatorSet


@dataclass
class DGState1D:
    """Per-cell coefficients, shape (n_cells, degree+1)."""
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.ndim == 1:  # bare means, P0
            self.coeffs = self.coeffs.reshape(-1, 1)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def means(self) -> np.ndarray:
        return self.coeffs[:, 0]

    def slopes(self, mesh: Mesh1D) -> np.ndarray:
        """Physical slopes d/dx of the local polynomials."""
        if self.degree == 0:
            return np.zeros(self.coeffs.shape[0])
        return self.coeffs[:, 1] / mesh.widths

    def copy(self) -> "DGState1D":
        return DGState1D(self.coeffs.copy())


@dataclass
class StabConfig1D:
    """omega and rho as in the penalty terms; lam is the CFL number
    beta*dt/h (checked against dt during assembly when given).

    saturate=False drops the min(.,1) in the capacity, which is what the
    closed-form eigenvalue study needs; time stepping keeps the default.
    """
    omega: float = 0.5
    rho: float = 0.5
    lam: float | None = None
    saturate: bool = True

    def __post_init__(self):
        if not (0 < self.omega <= 1):
            raise ValueError("omega must lie in (0, 1]")
        if self.lam is not None and self.lam <= 0:
            raise ValueError("lambda must be positive")


def capacity_1d(alpha: float, lam: float, omega: float) -> float:
    """Capacity min(omega*alpha/lam, 1) of a small cell of width alpha*h."""
    if alpha <= 0 or lam <= 0 or omega <= 0:
        raise ValueError("alpha, lambda, omega must be positive")
    return min(omega * alpha / lam, 1.0)


def _trace_left(d: int) -> np.ndarray:
    return np.array([1.0, -0.5])[: d + 1]


def _trace_right(d: int) -> np.ndarray:
    return np.array([1.0, 0.5])[: d + 1]


def assemble_1d(mesh: Mesh1D, beta: float, degree: int, dt: float,
                config: StabConfig1D | None = None,
                bc: str = "periodic",
                g: float | Callable[[float], float] = 0.0) -> OperatorSet:
    """Assemble mass, upwind and stabilization operators on a 1D mesh.

    bc is 'periodic' or 'dirichlet'; for Dirichlet the inflow value g enters
    the boundary vector (a constant or a callable of time).
    """
    if beta <= 0:
        raise ValueError("the 1D reduction assumes beta > 0")
    if degree not in (0, 1):
        raise ValueError("only degrees 0 and 1 are supported")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if bc not in ("periodic", "dirichlet"):
        raise ValueError(f"unknown boundary condition {bc!r}")
    config = config or StabConfig1D()
    h = mesh.h_background
    lam = beta * dt / h
    if config.lam is not None and abs(config.lam - lam) > 1e-12 * lam:
        raise ValueError(f"config.lam={config.lam} inconsistent with beta*dt/h={lam}")

    n = mesh.n_cells
    nloc = degree + 1
    widths = mesh.widths

    M = BlockMatrix(n, nloc)
    A = BlockMatrix(n, nloc)
    J = BlockMatrix(n, nloc)

    tr_l = _trace_left(degree)
    tr_r = _trace_right(degree)

    for j in range(n):
        mj = np.diag([widths[j], widths[j] / 12.0][:nloc])
        M.add(j, j, mj)
        if degree == 1:
            # -int beta * phi_n * phi_m' dx; only the slope test row is hit
            vol = np.zeros((2, 2))
            vol[1, 0] = -beta
            A.add(j, j, vol)

    # interior upwind faces: beta * u_L(x_f) * (w_L(x_f) - w_R(x_f))
    for j in range(n - 1):
        A.add(j, j, beta * np.outer(tr_r, tr_r))
        A.add(j + 1, j, -beta * np.outer(tr_l, tr_r))

    time_dependent = callable(g)
    b0 = np.zeros(n * nloc)
    if bc == "periodic":
        A.add(n - 1, n - 1, beta * np.outer(tr_r, tr_r))
        A.add(0, n - 1, -beta * np.outer(tr_l, tr_r))
        boundary = b0
    else:
        A.add(n - 1, n - 1, beta * np.outer(tr_r, tr_r))

        def inflow_vec(t: float) -> np.ndarray:
            gval = g(t) if time_dependent else g
            b = np.zeros(n * nloc)
            b[:nloc] = -beta * gval * tr_l
            return b

        boundary = inflow_vec if time_dependent else inflow_vec(0.0)

    for k1, alpha in mesh.cut_pairs:
        if k1 not in mesh.stabilized:
            continue
        if config.saturate:
            eta = 1.0 - capacity_1d(alpha, lam, config.omega)
            if eta <= 0.0:
                continue  # cell can absorb its inflow, no blocks stored
        else:
            eta = 1.0 - config.omega * alpha / lam
        p = mesh.inflow_neighbor(k1)
        k2 = k1 + 1
        a_cut = widths[k1]
        # trial-side functionals at the pair's left face
        if degree == 0:
            q_face = {p: np.array([1.0]), k1: np.array([-1.0])}
            q_vol = q_face
            t_vol = None
        else:
            q_face = {p: np.array([1.0, 0.5 + a_cut / widths[p]]),
                      k1: -np.array([1.0, -0.5 + 1.0])}
            q_vol = {p: np.array([1.0, 0.5 + config.rho * a_cut / widths[p]]),
                     k1: -np.array([1.0, -0.5 + config.rho])}
            t_vol = np.array([0.0, -1.0])  # -int_{k1} dw/dx = -(w_R - w_L)
        t_face = {k1: tr_r, k2: -tr_l}
        for r, tvec in t_face.items():
            for c, qvec in q_face.items():
                J.add(r, c, beta * eta * np.outer(tvec, qvec))
        if t_vol is not None:
            for c, qvec in q_vol.items():
                J.add(k1, c, beta * eta * np.outer(t_vol, qvec))

    return OperatorSet(mass=M, upwind=A, stab=J, boundary=boundary,
                       meta={"bc": bc, "beta": beta, "dt": dt, "lam": lam,
                             "degree": degree, "rho": config.rho,
                             "omega": config.omega})


def assemble_ghost_penalty_1d(mesh: Mesh1D, rho1: float, rho2: float,
                              degree: int = 0) -> BlockMatrix:
    """Symmetric jump penalties rho1*[[u]][[w]] at the pair's left face and
    rho2*[[u]][[w]] at the cut face (comparison runs only; requires the
    single-pair model-problem mesh)."""
    if len(mesh.cut_pairs) != 1:
        raise ValueError("ghost penalty comparison expects exactly one cut pair")
    nloc = degree + 1
    J = BlockMatrix(mesh.n_cells, nloc)
    k1, _ = mesh.cut_pairs[0]
    p, k2 = k1 - 1, k1 + 1
    tr_l = _trace_left(degree)
    tr_r = _trace_right(degree)
    for (left, right), rho in (((p, k1), rho1), ((k1, k2), rho2)):
        jump = {left: tr_r, right: -tr_l}
        for r, tv in jump.items():
            for c, qv in jump.items():
                J.add(r, c, rho * np.outer(tv, qv))
    return J


def minmod(*values: float) -> float:
    """Sign-unanimous minimum magnitude, else 0."""
    if not values:
        raise ValueError("minmod of an empty list")
    signs = np.sign(values)
    s = signs.sum() / len(values)
    if abs(s) != 1.0:
        return 0.0
    return float(s * min(abs(v) for v in values))


def limit_1d(state: DGState1D, mesh: Mesh1D) -> DGState1D:
    """MC-type limiter with the extra clip on inflow neighbors of small cells.

    Slopes become minmod(slope, 2*(ubar_{j+1}-ubar_j)/h_j,
    2*(ubar_j-ubar_{j-1})/h_j) with periodic neighbor wrap; afterwards the
    slope of each cell directly left of a stabilized cell is clipped so its
    reconstruction at the cut point stays between the two adjacent means.
    Means are never touched.
    """
    if state.degree != 1:
        raise ValueError("limiting needs a degree-1 state")
    n = mesh.n_cells
    ubar = state.means
    widths = mesh.widths
    slopes = state.slopes(mesh)
    new = np.empty(n)
    for j in range(n):
        jm, jp = (j - 1) % n, (j + 1) % n
        d_plus = 2.0 * (ubar[jp] - ubar[j]) / widths[j]
        d_minus = 2.0 * (ubar[j] - ubar[jm]) / widths[j]
        new[j] = minmod(slopes[j], d_plus, d_minus)
    for k1, _ in mesh.cut_pairs:
        if k1 not in mesh.stabilized:
            continue
        p = mesh.inflow_neighbor(k1)
        dist = 0.5 * widths[p] + widths[k1]  # center of P to the cut point
        new[p] = minmod(new[p], (ubar[k1] - ubar[p]) / dist)
    out = state.copy()
    out.coeffs[:, 1] = new * widths
    return out


def project_1d(mesh: Mesh1D, f: Callable[[np.ndarray], np.ndarray],
               degree: int, n_quad: int = 5) -> DGState1D:
    """L2 projection of f onto the DG space (Gauss quadrature per cell)."""
    xq, wq = np.polynomial.legendre.leggauss(n_quad)
    coeffs = np.zeros((mesh.n_cells, degree + 1))
    for j in range(mesh.n_cells):
        xl, xr = mesh.edges[j], mesh.edges[j + 1]
        hj = xr - xl
        x = 0.5 * (xl + xr) + 0.5 * hj * xq
        w = 0.5 * hj * wq
        fv = f(x)
        coeffs[j, 0] = np.sum(w * fv) / hj
        if degree == 1:
            phi1 = (x - 0.5 * (xl + xr)) / hj
            coeffs[j, 1] = np.sum(w * fv * phi1) / (hj / 12.0)
    return DGState1D(coeffs)


def evaluate_1d(state: DGState1D, mesh: Mesh1D, x: np.ndarray) -> np.ndarray:
    """Evaluate the piecewise polynomial at points x (cell-interior lookup)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    idx = np.clip(np.searchsorted(mesh.edges, x, side="right") - 1, 0,
                  mesh.n_cells - 1)
    vals = state.coeffs[idx, 0].copy()
    if state.degree == 1:
        vals += state.coeffs[idx, 1] * (x - mesh.centers[idx]) / mesh.widths[idx]
    return vals
