"""Cut-cell meshes for the ramp geometry.

A Cartesian N x N grid on the unit square is clipped against the half-plane
above the line y = tan(gamma) * (x - 0.2001).  Clipping is exact (straight
line against convex polygons), so the geometry carries no sampling error.
Cells keep their polygon, volume, centroid and volume fraction; faces are
canonical objects shared by their two cells, with the normal pointing from
the left cell to the right cell (outward on the boundary).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

RAMP_X0 = 0.2001


class GeometryError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# polygon utilities

def polygon_area_centroid(poly: np.ndarray) -> tuple[float, np.ndarray]:
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * float(np.sum(cross))
    if abs(area) < 1e-300:
        return 0.0, poly.mean(axis=0)
    cx = float(np.sum((x + xn) * cross)) / (6.0 * area)
    cy = float(np.sum((y + yn) * cross)) / (6.0 * area)
    return area, np.array([cx, cy])


def is_convex_ccw(poly: np.ndarray, tol: float = 1e-12) -> bool:
    n = len(poly)
    if n < 3:
        return False
    scale = float(np.max(np.abs(poly))) + 1.0
    for i in range(n):
        a, b, c = poly[i], poly[(i + 1) % n], poly[(i + 2) % n]
        u, v = b - a, c - b
        if u[0] * v[1] - u[1] * v[0] < -tol * scale * scale:
            return False
    return True


def clip_polygon_halfplane(poly: np.ndarray, normal: np.ndarray,
                           offset: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a polygon against {x : normal.x >= offset}."""
    out: list[np.ndarray] = []
    n = len(poly)
    d = poly @ normal - offset
    for i in range(n):
        j = (i + 1) % n
        if d[i] >= 0.0:
            out.append(poly[i])
        if (d[i] > 0.0 > d[j]) or (d[j] > 0.0 > d[i]):
            t = d[i] / (d[i] - d[j])
            out.append(poly[i] + t * (poly[j] - poly[i]))
    return np.array(out) if out else np.zeros((0, 2))


_TRI_RULES = {
    # barycentric coordinates and weights (weights sum to 1)
    2: ([(0.5, 0.5, 0.0), (0.0, 0.5, 0.5), (0.5, 0.0, 0.5)],
        [1 / 3, 1 / 3, 1 / 3]),
    4: ([(0.445948490915965, 0.445948490915965, 0.108103018168070),
         (0.445948490915965, 0.108103018168070, 0.445948490915965),
         (0.108103018168070, 0.445948490915965, 0.445948490915965),
         (0.091576213509771, 0.091576213509771, 0.816847572980459),
         (0.091576213509771, 0.816847572980459, 0.091576213509771),
         (0.816847572980459, 0.091576213509771, 0.091576213509771)],
        [0.223381589678011, 0.223381589678011, 0.223381589678011,
         0.109951743655322, 0.109951743655322, 0.109951743655322]),
}


def polygon_quadrature(poly: np.ndarray, order: int = 2
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature on a convex polygon: triangulate from the centroid and map
    a triangle rule exact to the requested total degree (2 or 4)."""
    poly = np.asarray(poly, dtype=float)
    if not is_convex_ccw(poly):
        raise GeometryError("polygon quadrature needs a convex CCW polygon")
    if order not in _TRI_RULES:
        raise ValueError(f"no triangle rule of order {order}")
    bary, wts = _TRI_RULES[order]
    _, c = polygon_area_centroid(poly)
    pts, weights = [], []
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        u, v = b - a, c - a
        tri_area = 0.5 * (u[0] * v[1] - u[1] * v[0])
        if tri_area <= 0.0:
            continue  # degenerate fan triangle (collinear with centroid)
        for (l1, l2, l3), w in zip(bary, wts):
            pts.append(l1 * a + l2 * b + l3 * c)
            weights.append(w * tri_area)
    return np.array(pts), np.array(weights)


_GAUSS_1D = {
    2: (np.array([-1.0, 1.0]) / math.sqrt(3.0), np.array([1.0, 1.0])),
    3: (np.array([-math.sqrt(3.0 / 5.0), 0.0, math.sqrt(3.0 / 5.0)]),
        np.array([5.0, 8.0, 5.0]) / 9.0),
}


def face_quadrature(v0: np.ndarray, v1: np.ndarray, order: int = 2
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Gauss points and weights on the segment (v0, v1)."""
    xi, wi = _GAUSS_1D[order]
    v0, v1 = np.asarray(v0, dtype=float), np.asarray(v1, dtype=float)
    mid, half = 0.5 * (v0 + v1), 0.5 * (v1 - v0)
    pts = mid[None, :] + xi[:, None] * half[None, :]
    return pts, wi * 0.5 * float(np.linalg.norm(v1 - v0))


# ---------------------------------------------------------------------------
# mesh types

@dataclass
class Cell:
    index: int
    ij: tuple[int, int]
    poly: np.ndarray
    volume: float
    centroid: np.ndarray
    volume_fraction: float
    is_cut: bool
    face_ids: list[tuple[int, int]] = field(default_factory=list)  # (face, orient)


@dataclass
class Face:
    index: int
    v0: np.ndarray
    v1: np.ndarray
    normal: np.ndarray           # unit, left -> right (outward on boundary)
    left: int
    right: int | None            # None for boundary faces
    tag: str                     # 'internal' | 'external' | 'ramp'

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.v1 - self.v0))

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.v0 + self.v1)


@dataclass
class CutCellMesh:
    cells: list[Cell]
    faces: list[Face]
    h: float
    gamma: float | None = None   # ramp angle in degrees, None for plain grids
    stabilized: frozenset[int] = frozenset()
    meta: dict = field(default_factory=dict)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def neighbors(self, cell: int) -> list[int]:
        out = []
        for fid, _ in self.cells[cell].face_ids:
            f = self.faces[fid]
            other = f.right if f.left == cell else f.left
            if other is not None:
                out.append(other)
        return out

    def cell_normal(self, cell: int, face: Face) -> np.ndarray:
        return face.normal if face.left == cell else -face.normal

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["cell_index", "i", "j", "volume", "volume_fraction",
                        "is_cut", "is_stabilized", "centroid_x", "centroid_y"])
            for c in self.cells:
                w.writerow([c.index, c.ij[0], c.ij[1], repr(float(c.volume)),
                            repr(float(c.volume_fraction)), int(c.is_cut),
                            int(c.index in self.stabilized),
                            repr(float(c.centroid[0])),
                            repr(float(c.centroid[1]))])


# ---------------------------------------------------------------------------
# ramp mesh construction

def _ramp_phi(gamma_rad: float):
    """Signed distance-like level function; the domain is phi >= 0."""
    sg, cg = math.sin(gamma_rad), math.cos(gamma_rad)
    normal = np.array([-sg, cg])
    offset = -sg * RAMP_X0

    def phi(p: np.ndarray) -> np.ndarray:
        return p @ normal - offset

    return normal, offset, phi


def build_ramp_mesh(N: int, gamma: float, threshold: float = 0.1) -> CutCellMesh:
    """Unit-square Cartesian mesh with the ramp cut out.

    gamma is the ramp angle in degrees.  Cells fully below the ramp line are
    removed, intersected cells are clipped, full cells keep their exact
    Cartesian squares.  The stabilized set uses the volume-fraction threshold.
    """
    if N < 10:
        raise ValueError("need N >= 10")
    if not (5.0 <= gamma <= 45.0):
        raise ValueError("gamma must lie in [5, 45] degrees")
    rad = math.radians(gamma)
    normal, offset, phi = _ramp_phi(rad)
    h = 1.0 / N
    area_tol = 1e-14 * h * h
    len_tol = 1e-12 * h

    cells: list[Cell] = []
    index_of: dict[tuple[int, int], int] = {}
    for j in range(N):
        for i in range(N):
            square = np.array([(i * h, j * h), ((i + 1) * h, j * h),
                               ((i + 1) * h, (j + 1) * h), (i * h, (j + 1) * h)])
            d = phi(square)
            if np.all(d >= 0.0):
                poly, cut = square, False
            elif np.all(d <= 0.0):
                continue
            else:
                poly = clip_polygon_halfplane(square, normal, offset)
                if len(poly) < 3:
                    continue
                cut = True
            area, centroid = polygon_area_centroid(poly)
            if area <= area_tol:
                continue  # degenerate sliver, filtered
            idx = len(cells)
            cells.append(Cell(index=idx, ij=(i, j), poly=poly, volume=area,
                              centroid=centroid, volume_fraction=area / (h * h),
                              is_cut=cut))
            index_of[(i, j)] = idx

    faces: list[Face] = []

    def add_face(v0, v1, normal_f, left, right, tag):
        fid = len(faces)
        faces.append(Face(index=fid, v0=np.asarray(v0, dtype=float),
                          v1=np.asarray(v1, dtype=float),
                          normal=np.asarray(normal_f, dtype=float),
                          left=left, right=right, tag=tag))
        cells[left].face_ids.append((fid, +1))
        if right is not None:
            cells[right].face_ids.append((fid, -1))

    def clipped_segment(p0, p1):
        p0, p1 = np.asarray(p0, dtype=float), np.asarray(p1, dtype=float)
        d0, d1 = float(phi(p0)), float(phi(p1))
        if d0 <= 0.0 and d1 <= 0.0:
            return None
        if d0 >= 0.0 and d1 >= 0.0:
            return p0, p1
        t = d0 / (d0 - d1)
        cut = p0 + t * (p1 - p0)
        return (p0, cut) if d0 > 0.0 else (cut, p1)

    # internal Cartesian faces
    for j in range(N):
        for i in range(N - 1):
            la, ra = index_of.get((i, j)), index_of.get((i + 1, j))
            if la is None or ra is None:
                continue
            seg = clipped_segment(((i + 1) * h, j * h), ((i + 1) * h, (j + 1) * h))
            if seg is None or np.linalg.norm(seg[1] - seg[0]) <= len_tol:
                continue
            add_face(seg[0], seg[1], (1.0, 0.0), la, ra, "internal")
    for j in range(N - 1):
        for i in range(N):
            la, ra = index_of.get((i, j)), index_of.get((i, j + 1))
            if la is None or ra is None:
                continue
            seg = clipped_segment((i * h, (j + 1) * h), ((i + 1) * h, (j + 1) * h))
            if seg is None or np.linalg.norm(seg[1] - seg[0]) <= len_tol:
                continue
            add_face(seg[0], seg[1], (0.0, 1.0), la, ra, "internal")

    # boundary faces on the square
    sides = {
        "left": (lambda i, j: i == 0, lambda i, j: ((0.0, j * h), (0.0, (j + 1) * h)), (-1.0, 0.0)),
        "right": (lambda i, j: i == N - 1, lambda i, j: ((1.0, j * h), (1.0, (j + 1) * h)), (1.0, 0.0)),
        "bottom": (lambda i, j: j == 0, lambda i, j: ((i * h, 0.0), ((i + 1) * h, 0.0)), (0.0, -1.0)),
        "top": (lambda i, j: j == N - 1, lambda i, j: ((i * h, 1.0), ((i + 1) * h, 1.0)), (0.0, 1.0)),
    }
    for cell in cells:
        i, j = cell.ij
        for name, (pred, segfn, nvec) in sides.items():
            if not pred(i, j):
                continue
            seg = clipped_segment(*segfn(i, j))
            if seg is None or np.linalg.norm(seg[1] - seg[0]) <= len_tol:
                continue
            add_face(seg[0], seg[1], nvec, cell.index, None, "external")

    # ramp faces: chord of the line inside each cut cell's square
    tg = math.tan(rad)
    ramp_normal = np.array([math.sin(rad), -math.cos(rad)])  # outward
    for cell in cells:
        if not cell.is_cut:
            continue
        i, j = cell.ij
        xa = max(i * h, RAMP_X0 + (j * h) / tg)
        xb = min((i + 1) * h, RAMP_X0 + ((j + 1) * h) / tg)
        if xb - xa <= len_tol:
            continue
        p0 = (xa, tg * (xa - RAMP_X0))
        p1 = (xb, tg * (xb - RAMP_X0))
        add_face(p0, p1, ramp_normal, cell.index, None, "ramp")

    mesh = CutCellMesh(cells=cells, faces=faces, h=h, gamma=gamma,
                       meta={"N": N, "gamma": gamma, "x0": RAMP_X0,
                             "threshold": threshold})
    mesh.stabilized = stabilized_set(mesh, threshold)
    return mesh


def stabilized_set(mesh: CutCellMesh, threshold: float) -> frozenset[int]:
    """Cells with volume fraction below the threshold.  The stabilization
    assumes at most one of two neighboring cells is stabilized; violations
    raise with the offending pair."""
    if not (0.0 < threshold < 1.0):
        raise ValueError("threshold must lie in (0, 1)")
    chosen = frozenset(c.index for c in mesh.cells
                       if c.volume_fraction < threshold)
    for f in mesh.faces:
        if f.tag == "internal" and f.left in chosen and f.right in chosen:
            raise GeometryError(
                f"stabilized cells {f.left} and {f.right} share a face")
    return chosen


# ---------------------------------------------------------------------------
# velocity fields and face classification

@dataclass
class VelocityField:
    fn: Callable[[np.ndarray], np.ndarray]
    divergence_free: bool = True
    name: str = ""

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return self.fn(np.atleast_2d(pts))


def beta_constant(gamma: float) -> VelocityField:
    """Ramp-parallel field of speed 2."""
    rad = math.radians(gamma)
    coef = 2.0 / math.sqrt(1.0 + math.tan(rad) ** 2)
    direction = np.array([1.0, math.tan(rad)])

    def fn(p):
        return np.broadcast_to(coef * direction, p.shape).copy()

    return VelocityField(fn, divergence_free=True, name="constant")


def beta_varying(gamma: float) -> VelocityField:
    """Ramp-parallel field whose speed decays with the distance to the ramp
    (speed 1 on the ramp itself)."""
    rad = math.radians(gamma)
    coef = 1.0 / (2.0 * math.sqrt(1.0 + math.tan(rad) ** 2))
    direction = np.array([1.0, math.tan(rad)])
    sg = math.sin(rad)
    cg_pi = math.cos(rad + math.pi)

    def fn(p):
        scal = 2.0 + (p[:, 0] - RAMP_X0) * sg + p[:, 1] * cg_pi
        return coef * direction[None, :] * scal[:, None]

    return VelocityField(fn, divergence_free=True, name="varying")


@dataclass
class FlowGeometry:
    """Per-face flow direction: sign +1 means the flux follows the stored
    face normal, -1 opposes it, 0 marks a characteristic face."""
    beta: VelocityField
    face_sign: np.ndarray
    cell_inflow: list[list[int]]
    cell_outflow: list[list[int]]

    def external_inflow_faces(self, mesh: CutCellMesh) -> list[int]:
        return [f.index for f in mesh.faces
                if f.right is None and self.face_sign[f.index] < 0]


def classify_faces(mesh: CutCellMesh, beta: VelocityField,
                   quad_order: int = 2) -> FlowGeometry:
    """Label every face of every cell inflow (beta.n_E < 0) or outflow.

    beta.n is sampled at the face quadrature points; a sign change within one
    face is unsupported geometry and raises.
    """
    signs = np.zeros(len(mesh.faces), dtype=int)
    for f in mesh.faces:
        pts, _ = face_quadrature(f.v0, f.v1, quad_order)
        vals = beta(pts) @ f.normal
        scale = float(np.max(np.abs(beta(pts)))) + 1e-30
        tol = 1e-12 * scale
        if np.all(np.abs(vals) <= tol):
            signs[f.index] = 0
        elif np.all(vals >= -tol):
            signs[f.index] = 1
        elif np.all(vals <= tol):
            signs[f.index] = -1
        else:
            raise GeometryError(
                f"beta.n changes sign across face {f.index} at {f.midpoint}")
    cell_in: list[list[int]] = [[] for _ in mesh.cells]
    cell_out: list[list[int]] = [[] for _ in mesh.cells]
    for c in mesh.cells:
        for fid, orient in c.face_ids:
            if signs[fid] * orient < 0:
                cell_in[c.index].append(fid)
            else:
                cell_out[c.index].append(fid)  # includes characteristic faces
    return FlowGeometry(beta=beta, face_sign=signs,
                        cell_inflow=cell_in, cell_outflow=cell_out)


# ---------------------------------------------------------------------------
# capacity

@dataclass
class CapacityEntry:
    alpha: float        # capacity at the requested omega
    alpha_half: float   # capacity at omega = 1/2
    eta: float          # 1 - alpha_half

    @property
    def active(self) -> bool:
        return self.eta > 0.0


def capacity_2d(mesh: CutCellMesh, flow: FlowGeometry, cell: int, dt: float,
                omega: float = 0.5, quad_order: int = 2) -> CapacityEntry:
    """Capacity min(omega |E| / (dt * integral of (beta.n)^-), 1); cells with
    no inflow need no stabilization (alpha = 1, eta = 0)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not (0 < omega <= 1):
        raise ValueError("omega must lie in (0, 1]")
    c = mesh.cells[cell]
    influx = 0.0
    for fid, orient in c.face_ids:
        f = mesh.faces[fid]
        pts, w = face_quadrature(f.v0, f.v1, quad_order)
        bn = (flow.beta(pts) @ f.normal) * orient
        influx += float(np.sum(w * np.maximum(-bn, 0.0)))
    if influx <= 1e-300:
        return CapacityEntry(alpha=1.0, alpha_half=1.0, eta=0.0)
    alpha = min(omega * c.volume / (dt * influx), 1.0)
    alpha_half = min(0.5 * c.volume / (dt * influx), 1.0)
    return CapacityEntry(alpha=alpha, alpha_half=alpha_half,
                         eta=1.0 - alpha_half)


def compute_capacities(mesh: CutCellMesh, flow: FlowGeometry, dt: float,
                       omega: float = 0.5) -> dict[int, CapacityEntry]:
    return {c: capacity_2d(mesh, flow, c, dt, omega) for c in mesh.stabilized}


# ---------------------------------------------------------------------------
# export

def write_vtk(mesh: CutCellMesh, path, cell_scalars: dict[str, np.ndarray]
              | None = None, cell_vectors: dict[str, np.ndarray] | None = None
              ) -> None:
    """Legacy-VTK polygon export with cell data arrays."""
    cell_scalars = dict(cell_scalars or {})
    cell_scalars.setdefault(
        "volume_fraction", np.array([c.volume_fraction for c in mesh.cells]))
    cell_scalars.setdefault(
        "stabilized", np.array([float(c.index in mesh.stabilized)
                                for c in mesh.cells]))
    cell_vectors = cell_vectors or {}
    points, polys = [], []
    for c in mesh.cells:
        start = len(points)
        points.extend(c.poly.tolist())
        polys.append([len(c.poly)] + list(range(start, start + len(c.poly))))
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 3.0\ncutdg mesh\nASCII\n")
        f.write("DATASET POLYDATA\n")
        f.write(f"POINTS {len(points)} double\n")
        for x, y in points:
            f.write(f"{x:.16g} {y:.16g} 0.0\n")
        size = sum(len(p) for p in polys)
        f.write(f"POLYGONS {len(polys)} {size}\n")
        for p in polys:
            f.write(" ".join(str(v) for v in p) + "\n")
        f.write(f"CELL_DATA {len(polys)}\n")
        for name, arr in cell_scalars.items():
            f.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            for v in arr:
                f.write(f"{float(v):.16g}\n")
        for name, arr in cell_vectors.items():
            f.write(f"VECTORS {name} double\n")
            for v in arr:
                f.write(f"{float(v[0]):.16g} {float(v[1]):.16g} 0.0\n")
