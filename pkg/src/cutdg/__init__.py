"""Penalty-stabilized discontinuous Galerkin transport on cut-cell meshes."""

from .mesh1d import Mesh1D, Scenario1D, build_mp_mesh, build_scenario_mesh
from .dg1d import (DGState1D, StabConfig1D, assemble_1d,
                   assemble_ghost_penalty_1d, capacity_1d, limit_1d, minmod)
from .operators import OperatorSet
from .timestep import SchemeConfig, run, step
from .geom2d import (CutCellMesh, VelocityField, beta_constant, beta_varying,
                     build_ramp_mesh, capacity_2d, classify_faces,
                     face_quadrature, polygon_quadrature, stabilized_set)
from .dg2d import (DGState2D, TrajectoryOperator, assemble_stab_2d,
                   assemble_upwind_2d, cfl_timestep, limit_2d,
                   precompute_trajectory)

__all__ = [
    "Mesh1D", "Scenario1D", "build_mp_mesh", "build_scenario_mesh",
    "DGState1D", "StabConfig1D", "assemble_1d", "assemble_ghost_penalty_1d",
    "capacity_1d", "limit_1d", "minmod", "OperatorSet", "SchemeConfig",
    "run", "step", "CutCellMesh", "VelocityField", "beta_constant",
    "beta_varying", "build_ramp_mesh", "capacity_2d", "classify_faces",
    "face_quadrature", "polygon_quadrature", "stabilized_set", "DGState2D",
    "TrajectoryOperator", "assemble_stab_2d", "assemble_upwind_2d",
    "cfl_timestep", "limit_2d", "precompute_trajectory",
]
