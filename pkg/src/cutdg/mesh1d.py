"""1D meshes for the split-cell model problem and its scenario variants.

The model problem takes an equidistant mesh on (0,1) and replaces one cell of
width h by a pair (alpha*h, (1-alpha)*h).  The scenario constructors split
every cell between x=0.1 and x=0.9 that way, either with one fixed fraction
(S1), with random fractions alpha_k = 0.1*X_k + 1e-6 (S2), or not at all (S3).
The small (left) cell of every pair is flagged for stabilization.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Mesh1D:
    """Cell partition of (0,1) given by its edge coordinates.

    cut_pairs lists ``(left_cell_index, alpha)`` for every split pair (indices
    are 0-based and refer to the final cell ordering); ``stabilized`` holds the
    small cells.  Cut-pair membership is stored explicitly so nothing has to be
    classified from floating-point widths later.
    """
    edges: np.ndarray
    cut_pairs: tuple[tuple[int, float], ...] = ()
    stabilized: frozenset[int] = frozenset()
    h_background: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        if self.edges.ndim != 1 or len(self.edges) < 2:
            raise ValueError("edges must be a 1D array with at least two entries")
        if np.any(np.diff(self.edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        if abs(self.edges[0]) > 1e-14 or abs(self.edges[-1] - 1.0) > 1e-14:
            raise ValueError("mesh must cover (0,1)")
        for k1, alpha in self.cut_pairs:
            if not (0 < alpha <= 0.5):
                raise ValueError(f"cut pair fraction {alpha} outside (0, 1/2]")
            if k1 + 1 >= self.n_cells:
                raise ValueError("cut pair has no right cell")
        stab = sorted(self.stabilized)
        for a, b in zip(stab, stab[1:]):
            if b == a + 1:
                raise ValueError(f"stabilized cells {a} and {b} are adjacent")
        if self.h_background <= 0.0:
            # plain meshes: the widest cell is the background width
            self.h_background = float(self.widths.max())

    @property
    def n_cells(self) -> int:
        return len(self.edges) - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def inflow_neighbor(self, k1: int) -> int:
        """Cell directly left of a stabilized cell (flow runs left to right)."""
        if k1 == 0:
            raise ValueError("stabilized cell on the inflow boundary")
        return k1 - 1

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["cell_index", "x_left", "x_right", "is_stabilized"])
            for j in range(self.n_cells):
                w.writerow([j, repr(float(self.edges[j])),
                            repr(float(self.edges[j + 1])),
                            int(j in self.stabilized)])


@dataclass
class Scenario1D:
    """Test-2/3 mesh family: kind is 'S1' (fixed alpha), 'S2' (random alpha),
    or 'S3' (no splitting)."""
    kind: str
    N: int
    alpha: float | None = None
    seed: int | None = None

    def __post_init__(self):
        self.kind = self.kind.upper()
        if self.kind not in ("S1", "S2", "S3"):
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.kind == "S1" and self.alpha is None:
            raise ValueError("S1 needs a fraction alpha")
        if self.kind == "S2" and self.seed is None:
            raise ValueError("S2 needs an RNG seed")


def build_mp_mesh(N: int, alpha: float, k: int) -> Mesh1D:
    """Equidistant mesh with N cells where cell k (1-based) is split into
    widths (alpha*h, (1-alpha)*h).  Returns N+1 cells; the small cell is
    stabilized."""
    if N < 4:
        raise ValueError("need N >= 4 background cells")
    if not (0 < alpha <= 0.5):
        raise ValueError("alpha must lie in (0, 1/2]")
    if not (1 < k < N):
        raise ValueError("split cell must be interior (1 < k < N)")
    h = 1.0 / N
    edges = [j * h for j in range(k)]          # left edges of cells 1..k
    edges.append((k - 1) * h + alpha * h)      # the cut point
    edges.extend(j * h for j in range(k, N + 1))
    edges[-1] = 1.0
    k1 = k - 1  # 0-based index of the small cell
    return Mesh1D(np.array(edges), cut_pairs=((k1, alpha),),
                  stabilized=frozenset({k1}), h_background=h,
                  meta={"family": "mp", "N": N, "alpha": alpha, "k": k})


def build_scenario_mesh(scenario: Scenario1D) -> Mesh1D:
    """Mesh for Test 2/3: split every cell with left edge in [0.1, 0.9)."""
    N = scenario.N
    if N % 10 != 0:
        raise ValueError("N must be a multiple of 10 so 0.1 and 0.9 are edges")
    h = 1.0 / N
    split = [j for j in range(N) if 0.1 - 1e-12 <= j * h < 0.9 - 1e-12]
    if scenario.kind == "S3":
        alphas = []
        split = []
    elif scenario.kind == "S1":
        alphas = [scenario.alpha] * len(split)
    else:
        rng = np.random.default_rng(scenario.seed)
        alphas = list(0.1 * rng.uniform(size=len(split)) + 1e-6)

    edges = [0.0]
    cut_pairs = []
    alpha_it = iter(alphas)
    for j in range(N):
        left = j * h
        if j in split:
            a = next(alpha_it)
            k1 = len(edges) - 1
            edges.append(left + a * h)
            edges.append((j + 1) * h)
            cut_pairs.append((k1, a))
        else:
            edges.append((j + 1) * h)
    edges[-1] = 1.0
    stabilized = frozenset(k1 for k1, _ in cut_pairs)
    meta = {"family": "scenario", "kind": scenario.kind, "N": N}
    if scenario.kind == "S1":
        meta["alpha"] = scenario.alpha
    if scenario.kind == "S2":
        meta["seed"] = scenario.seed
    return Mesh1D(np.array(edges), cut_pairs=tuple(cut_pairs),
                  stabilized=stabilized, h_background=h, meta=meta)
