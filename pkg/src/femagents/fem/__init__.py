"""Reference linear-elasticity solver used to check generated solutions."""

from .fields import (
    MAGIC,
    FieldFormatError,
    IncomparableFieldsError,
    NodalField,
    compare_fields,
    hole_mask,
    probe_grid,
    read_field,
    write_field,
)
from .material import PLANE_STRAIN, PLANE_STRESS, Material, constitutive_matrix, lame_parameters
from .mesh import DegenerateMeshError, Mesh, build_square_mesh, punch_hole
from .solver import (
    AssemblyError,
    BCSpec,
    EdgeCondition,
    InsufficientConstraintsError,
    affine_bcs,
    assemble_stiffness,
    solve_dirichlet,
    solve_step,
    step_problem,
    stress_xy,
)

__all__ = [
    "MAGIC", "FieldFormatError", "IncomparableFieldsError", "NodalField", "compare_fields",
    "hole_mask", "probe_grid", "read_field", "write_field", "PLANE_STRAIN", "PLANE_STRESS",
    "Material", "constitutive_matrix", "lame_parameters", "DegenerateMeshError", "Mesh",
    "build_square_mesh", "punch_hole", "AssemblyError", "BCSpec", "EdgeCondition",
    "InsufficientConstraintsError", "affine_bcs", "assemble_stiffness", "solve_dirichlet",
    "solve_step", "step_problem", "stress_xy",
]
