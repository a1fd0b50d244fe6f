"""Block-sparse matrices keyed by (row_cell, col_cell).

The stabilization couples cells that do not share a face (e.g. the outflow
neighbor of a small cell to that cell's inflow neighbor), so a plain
face-stencil layout is not enough.  Blocks are dense ``(nloc, nloc)`` arrays;
``nloc`` is the number of local degrees of freedom per cell.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass
class BlockMatrix:
    n_cells: int
    nloc: int
    blocks: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)

    @property
    def n_dofs(self) -> int:
        return self.n_cells * self.nloc

    def add(self, row_cell: int, col_cell: int, block: np.ndarray) -> None:
        block = np.asarray(block, dtype=float)
        if block.shape != (self.nloc, self.nloc):
            raise ValueError(f"block shape {block.shape}, expected {(self.nloc, self.nloc)}")
        key = (row_cell, col_cell)
        if key in self.blocks:
            self.blocks[key] = self.blocks[key] + block
        else:
            self.blocks[key] = block.copy()

    def get(self, row_cell: int, col_cell: int) -> np.ndarray:
        return self.blocks.get((row_cell, col_cell), np.zeros((self.nloc, self.nloc)))

    def __add__(self, other: "BlockMatrix") -> "BlockMatrix":
        if (self.n_cells, self.nloc) != (other.n_cells, other.nloc):
            raise ValueError("incompatible block matrices")
        out = BlockMatrix(self.n_cells, self.nloc)
        for (r, c), b in self.blocks.items():
            out.add(r, c, b)
        for (r, c), b in other.blocks.items():
            out.add(r, c, b)
        return out

    def to_dense(self) -> np.ndarray:
        m = np.zeros((self.n_dofs, self.n_dofs))
        k = self.nloc
        for (r, c), b in self.blocks.items():
            m[r * k:(r + 1) * k, c * k:(c + 1) * k] += b
        return m

    def to_csr(self) -> sp.csr_matrix:
        k = self.nloc
        rows, cols, vals = [], [], []
        for (r, c), b in self.blocks.items():
            for i in range(k):
                for j in range(k):
                    rows.append(r * k + i)
                    cols.append(c * k + j)
                    vals.append(b[i, j])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.n_dofs, self.n_dofs))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.to_csr() @ v

    def frobenius(self) -> float:
        return float(np.sqrt(sum(float(np.sum(b * b)) for b in self.blocks.values())))

    def row_cells(self) -> set[int]:
        return {r for (r, _) in self.blocks}

    def col_cells(self) -> set[int]:
        return {c for (_, c) in self.blocks}

    def write_csv(self, path) -> None:
        """Dense dump as ``row,col,value`` (debugging aid)."""
        m = self.to_dense()
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["row", "col", "value"])
            for i in range(m.shape[0]):
                for j in range(m.shape[1]):
                    if m[i, j] != 0.0:
                        w.writerow([i, j, repr(float(m[i, j]))])


def block_diag_inverse(mat: BlockMatrix) -> np.ndarray:
    """Inverses of the diagonal blocks, stacked as (n_cells, nloc, nloc).

    Only valid for block-diagonal matrices (mass matrices); off-diagonal
    blocks are rejected.
    """
    for (r, c) in mat.blocks:
        if r != c:
            raise ValueError("matrix is not block-diagonal")
    out = np.zeros((mat.n_cells, mat.nloc, mat.nloc))
    for r in range(mat.n_cells):
        out[r] = np.linalg.inv(mat.get(r, r))
    return out
