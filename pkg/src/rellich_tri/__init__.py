"""Neumann data of Dirichlet eigenfunctions on planar triangles.

On a triangle ``T`` every L2-normalised Dirichlet eigenfunction of
``-h**2 Lap u = u`` has ``int_S |h d_nu u|**2 dS = |S| / Area(T)`` on each
side ``S``. This package computes eigenfunctions (closed form or finite
element), extracts their Neumann traces, and checks that identity together
with the commutator relations behind it.
"""

from .analytic import (
    equilateral_eigenfunction,
    evaluate,
    right_isosceles_eigenfunction,
    square_eigenfunction,
    square_mass_scaling_demo,
    square_neumann_mass,
)
from .fem import EigenPair, assemble, normalize, solve_lowest_eigenpairs
from .geometry import (
    CanonicalFrame,
    SideFrame,
    Triangle,
    canonicalize,
    predicted_neumann_mass,
    side_frames,
    triangle_from_vertices,
)
from .mesh import Mesh, refine_mesh, write_off
from .rellich import (
    IdentityReport,
    RellichPairing,
    identity_report,
    master_derivative_checks,
    rellich_pairing,
    solve_masses_from_master,
)
from .trace import (
    NeumannTrace,
    SideMass,
    analytic_trace,
    fem_trace_direct,
    fem_trace_variational,
    side_mass,
)

__all__ = [
    "CanonicalFrame", "EigenPair", "IdentityReport", "Mesh", "NeumannTrace", "RellichPairing",
    "SideFrame", "SideMass", "Triangle", "analytic_trace", "assemble", "canonicalize",
    "equilateral_eigenfunction", "evaluate", "fem_trace_direct", "fem_trace_variational",
    "identity_report", "master_derivative_checks", "normalize", "predicted_neumann_mass",
    "refine_mesh", "rellich_pairing", "right_isosceles_eigenfunction", "side_frames",
    "side_mass", "solve_lowest_eigenpairs", "solve_masses_from_master", "square_eigenfunction",
    "square_mass_scaling_demo", "square_neumann_mass", "triangle_from_vertices", "write_off",
]
