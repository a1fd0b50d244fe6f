"""Shared container for the assembled semi-discrete system.

The method of lines gives  M u' = -(A + J) u - b(t);  both the 1D and the 2D
assemblies produce this type so one time-stepping driver serves both.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp

from .blockmat import BlockMatrix, block_diag_inverse

BoundaryTerm = Union[np.ndarray, Callable[[float], np.ndarray]]


@dataclass
class OperatorSet:
    mass: BlockMatrix
    upwind: BlockMatrix
    stab: BlockMatrix
    boundary: BoundaryTerm
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self._minv = None
        self._K = None

    @property
    def n_cells(self) -> int:
        return self.mass.n_cells

    @property
    def nloc(self) -> int:
        return self.mass.nloc

    @property
    def n_dofs(self) -> int:
        return self.mass.n_dofs

    def transport_csr(self) -> sp.csr_matrix:
        """A + J as a CSR matrix (cached)."""
        if self._K is None:
            self._K = (self.upwind + self.stab).to_csr()
        return self._K

    def boundary_at(self, t: float) -> np.ndarray:
        if callable(self.boundary):
            return self.boundary(t)
        return self.boundary

    def apply_minv(self, v: np.ndarray) -> np.ndarray:
        """Solve M x = v using precomputed diagonal-block inverses."""
        if self._minv is None:
            self._minv = block_diag_inverse(self.mass)
        vb = v.reshape(self.n_cells, self.nloc)
        return np.einsum("cij,cj->ci", self._minv, vb).reshape(-1)

    def rhs(self, y: np.ndarray, t: float) -> np.ndarray:
        """F(y) = M^{-1} ( -(A+J) y - b(t) )."""
        return self.apply_minv(-(self.transport_csr() @ y) - self.boundary_at(t))
