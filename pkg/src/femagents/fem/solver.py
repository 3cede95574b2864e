"""Constant-strain-triangle assembly, Dirichlet solve and shear-stress recovery."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fields import NodalField
from .material import Material, constitutive_matrix, lame_parameters
from .mesh import Mesh, build_square_mesh, punch_hole

MIN_AREA = 1e-14
RESIDUAL_TOL = 1e-10

Displacement = Union[tuple[float, float], Callable[[float, float], tuple[float, float]]]


class AssemblyError(ValueError):
    pass


class InsufficientConstraintsError(RuntimeError):
    pass


@dataclass
class EdgeCondition:
    tag: str
    mask: tuple[bool, bool] = (True, True)
    value: Displacement = (0.0, 0.0)

    def at(self, x: float, y: float) -> tuple[float, float]:
        if callable(self.value):
            return tuple(self.value(x, y))
        return self.value


@dataclass
class BCSpec:
    """Ordered list of edge conditions; on shared nodes the first listed wins."""

    conditions: list[EdgeCondition] = field(default_factory=list)

    def add(self, tag, value=(0.0, 0.0), mask=(True, True)) -> "BCSpec":
        self.conditions.append(EdgeCondition(tag, tuple(mask), value))
        return self

    def constrained_dofs(self, mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
        """Return (dof indices, prescribed values) after resolving corner conflicts."""
        fixed: dict[int, float] = {}
        claimed: set[int] = set()
        for cond in self.conditions:
            for node in mesh.nodes_tagged(cond.tag):
                if node in claimed:
                    continue
                claimed.add(node)
                val = cond.at(*mesh.nodes[node])
                for comp in (0, 1):
                    if cond.mask[comp]:
                        fixed[2 * node + comp] = float(val[comp])
        dofs = np.array(sorted(fixed), dtype=int)
        return dofs, np.array([fixed[d] for d in dofs], dtype=float)


def strain_matrices(mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """Per-element B matrices (M, 3, 6) and signed areas (M,)."""
    p = mesh.nodes[mesh.triangles]
    x, y = p[..., 0], p[..., 1]
    area = 0.5 * ((x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0]))
    bad = np.flatnonzero(area < MIN_AREA)
    if len(bad):
        raise AssemblyError(f"degenerate or inverted triangle {bad[0]} (area {area[bad[0]]:.3e})")
    # shape-function gradients: dN_i/dx = b_i / 2A, dN_i/dy = c_i / 2A
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    B = np.zeros((len(area), 3, 6))
    B[:, 0, 0::2] = b
    B[:, 1, 1::2] = c
    B[:, 2, 0::2] = c
    B[:, 2, 1::2] = b
    B /= (2.0 * area)[:, None, None]
    return B, area


def assemble_stiffness(mesh: Mesh, mat: Material) -> sp.csr_matrix:
    """Global stiffness K = sum_e A_e B_e^T D B_e, dof order (ux0, uy0, ux1, ...)."""
    B, area = strain_matrices(mesh)
    D = constitutive_matrix(mat)
    Ke = np.einsum("e,eki,kl,elj->eij", area, B, D, B)
    Ke = 0.5 * (Ke + Ke.transpose(0, 2, 1))
    dofs = np.empty((mesh.n_triangles, 6), dtype=int)
    dofs[:, 0::2] = 2 * mesh.triangles
    dofs[:, 1::2] = 2 * mesh.triangles + 1
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    n = 2 * mesh.n_nodes
    return sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def _check_rigid_modes(mesh: Mesh, fixed: np.ndarray) -> None:
    # The kernel of K on a connected mesh is the 3 rigid modes; they must all
    # be visible at the constrained dofs or the reduced system is singular.
    node, comp = np.divmod(np.asarray(fixed, dtype=int), 2)
    x, y = mesh.nodes[node, 0], mesh.nodes[node, 1]
    R = np.column_stack([comp == 0, comp == 1, np.where(comp == 0, -y, x)]).astype(float)
    if len(fixed) < 3 or np.linalg.matrix_rank(R) < 3:
        raise InsufficientConstraintsError(
            "constraints do not remove all rigid-body modes"
        )


def solve_dirichlet(K: sp.spmatrix, bcs: BCSpec, mesh: Mesh) -> NodalField:
    """Eliminate prescribed dofs and solve the reduced symmetric system."""
    n = K.shape[0]
    fixed, values = bcs.constrained_dofs(mesh)
    free = np.setdiff1d(np.arange(n), fixed)
    u = np.zeros(n)
    u[fixed] = values
    if len(free):
        _check_rigid_modes(mesh, fixed)
        K = K.tocsr()
        Kff = K[free][:, free].tocsc()
        rhs = -(K[free][:, fixed] @ values)
        with np.errstate(all="ignore"):
            try:
                uf = spla.spsolve(Kff, rhs)
            except RuntimeError as exc:  # "Factor is exactly singular"
                raise InsufficientConstraintsError(str(exc)) from exc
        res = np.linalg.norm(Kff @ uf - rhs)
        scale = max(np.linalg.norm(rhs), np.finfo(float).tiny)
        if not np.all(np.isfinite(uf)) or (np.linalg.norm(rhs) > 0 and res / scale > RESIDUAL_TOL):
            raise InsufficientConstraintsError(
                "reduced system is singular; constraints do not remove all rigid-body modes"
            )
        u[free] = uf
    return NodalField(mesh.nodes.copy(), u.reshape(-1, 2), mesh=mesh)


def stress_xy(mesh: Mesh, field: NodalField, mat: Material) -> NodalField:
    """Nodal shear stress, area-weighted average of the constant element values."""
    if field.values.shape != (mesh.n_nodes, 2):
        raise ValueError("displacement field does not match mesh")
    B, area = strain_matrices(mesh)
    _, mu = lame_parameters(mat)
    ue = field.values[mesh.triangles].reshape(-1, 6)
    gamma = np.einsum("ej,ej->e", B[:, 2, :], ue)
    sxy_e = mu * gamma
    num = np.zeros(mesh.n_nodes)
    den = np.zeros(mesh.n_nodes)
    for k in range(3):
        np.add.at(num, mesh.triangles[:, k], area * sxy_e)
        np.add.at(den, mesh.triangles[:, k], area)
    return NodalField(mesh.nodes.copy(), (num / den)[:, None], mesh=mesh)


HOLE_CENTER = (0.5, 0.5)
HOLE_RADIUS = 0.2
PULL = 0.1


def step_problem(step: int, n: int = 50, shear_y_only: bool = False) -> tuple[Mesh, BCSpec]:
    """Geometry and boundary conditions of one of the four query steps."""
    if step not in (1, 2, 3, 4):
        raise ValueError(f"step must be 1..4, got {step}")
    mesh = build_square_mesh(n)
    bcs = BCSpec().add("left", (0.0, 0.0))
    if step == 1:
        bcs.add("right", (PULL, 0.0))
    elif shear_y_only:
        bcs.add("right", (0.0, PULL), mask=(False, True))
    else:
        bcs.add("right", (0.0, PULL))
    if step >= 3:
        mesh = punch_hole(mesh, HOLE_CENTER, HOLE_RADIUS)
    return mesh, bcs


def solve_step(
    step: int,
    n: int = 50,
    mat: Material | None = None,
    shear_y_only: bool = False,
) -> tuple[NodalField, NodalField | None]:
    """Reference solution of a query step: displacement, plus shear stress for step 4."""
    mat = mat or Material()
    mesh, bcs = step_problem(step, n, shear_y_only)
    u = solve_dirichlet(assemble_stiffness(mesh, mat), bcs, mesh)
    sxy = stress_xy(mesh, u, mat) if step == 4 else None
    return u, sxy


def affine_bcs(A: Sequence[Sequence[float]], b: Sequence[float], tags=("left", "right", "bottom", "top")) -> BCSpec:
    """Prescribe u = A x + b on the listed edges."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    bcs = BCSpec()
    for tag in tags:
        bcs.add(tag, lambda x, y: tuple(A @ (x, y) + b))
    return bcs
