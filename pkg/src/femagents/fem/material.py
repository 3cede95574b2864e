"""Isotropic linear-elastic material and its Lame constants."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PLANE_STRAIN = "plane_strain"
PLANE_STRESS = "plane_stress"


@dataclass(frozen=True)
class Material:
    E: float = 1e9
    nu: float = 0.3
    formulation: str = PLANE_STRAIN

    def __post_init__(self):
        if not self.E > 0:
            raise ValueError(f"Young's modulus must be positive, got {self.E}")
        if not 0 <= self.nu < 0.5:
            raise ValueError(f"Poisson ratio must lie in [0, 0.5), got {self.nu}")
        if self.formulation not in (PLANE_STRAIN, PLANE_STRESS):
            raise ValueError(f"unknown formulation {self.formulation!r}")


def lame_parameters(mat: Material) -> tuple[float, float]:
    """Return ``(lam, mu)`` in Pa for the material's 2D formulation."""
    E, nu = mat.E, mat.nu
    mu = E / (2.0 * (1.0 + nu))
    if mat.formulation == PLANE_STRAIN:
        lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    else:
        lam = E * nu / (1.0 - nu * nu)
    return lam, mu


def constitutive_matrix(mat: Material) -> np.ndarray:
    """Voigt matrix mapping (exx, eyy, gxy) to (sxx, syy, sxy)."""
    lam, mu = lame_parameters(mat)
    return np.array(
        [
            [lam + 2 * mu, lam, 0.0],
            [lam, lam + 2 * mu, 0.0],
            [0.0, 0.0, mu],
        ]
    )
