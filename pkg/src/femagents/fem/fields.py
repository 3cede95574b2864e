"""Nodal fields, their text file format, and probe-grid comparison."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Any, Callable, Union

import numpy as np
from scipy.interpolate import LinearNDInterpolator

MAGIC = "femagents-field v1"


class FieldFormatError(ValueError):
    def __init__(self, path, line: int, msg: str):
        super().__init__(f"{path}:{line}: {msg}")
        self.line = line


class IncomparableFieldsError(ValueError):
    pass


@dataclass
class NodalField:
    points: np.ndarray  # (N, 2)
    values: np.ndarray  # (N, k), k = 2 for displacement, 1 for shear stress
    mesh: Any = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if len(self.points) != len(self.values):
            raise ValueError("points and values differ in length")

    @property
    def n_components(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other):
        if not isinstance(other, NodalField):
            return NotImplemented
        return np.array_equal(self.points, other.points) and np.array_equal(self.values, other.values)


def write_field(field: NodalField, path) -> None:
    k = field.n_components
    if k not in (1, 2):
        raise ValueError("field files hold 1 or 2 components")
    lines = [MAGIC, f"{len(field.points)} {k}"]
    for (x, y), vals in zip(field.points, field.values):
        lines.append(" ".join(f"{v:.17g}" for v in (x, y, *vals)))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field(path) -> NodalField:
    with open(path) as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].strip() != MAGIC:
        raise FieldFormatError(path, 1, f"expected header {MAGIC!r}")
    if len(lines) < 2:
        raise FieldFormatError(path, 2, "missing count line")
    try:
        count, k = (int(t) for t in lines[1].split())
    except ValueError:
        raise FieldFormatError(path, 2, "expected '<node_count> <component_count>'") from None
    if k not in (1, 2) or count < 0:
        raise FieldFormatError(path, 2, f"bad counts {lines[1]!r}")
    rows = lines[2:]
    if len(rows) != count:
        bad = min(len(rows), count) + 3
        raise FieldFormatError(path, bad, f"declared {count} rows, found {len(rows)}")
    data = np.empty((count, 2 + k))
    for i, row in enumerate(rows):
        parts = row.split()
        if len(parts) != 2 + k:
            raise FieldFormatError(path, i + 3, f"expected {2 + k} numbers, got {len(parts)}")
        try:
            data[i] = [float(p) for p in parts]
        except ValueError:
            raise FieldFormatError(path, i + 3, f"unparseable number in {row!r}") from None
    return NodalField(data[:, :2], data[:, 2:])


def probe_grid(m: int = 21) -> np.ndarray:
    t = np.linspace(0.0, 1.0, m)
    X, Y = np.meshgrid(t, t)
    return np.column_stack([X.ravel(), Y.ravel()])


def hole_mask(center=(0.5, 0.5), radius=0.2) -> Callable[[np.ndarray], np.ndarray]:
    cx, cy = center

    def inside(p):
        return (p[:, 0] - cx) ** 2 + (p[:, 1] - cy) ** 2 < radius * radius

    return inside


def _as_field(f: Union[NodalField, str, os.PathLike]) -> NodalField:
    return f if isinstance(f, NodalField) else read_field(f)


def _interpolate(f: NodalField, probes: np.ndarray) -> np.ndarray:
    return LinearNDInterpolator(f.points, f.values)(probes)


def compare_fields(a, b, probe: int | np.ndarray = 21, exclude=None, max_skipped: float = 0.5) -> float:
    """Relative L2 difference ||a - b|| / ||b|| sampled on a probe grid.

    Both fields are linearly interpolated over a Delaunay triangulation of
    their nodes. Probes outside either field, or inside ``exclude`` (a
    predicate over probe coordinates, e.g. a hole), are dropped for both.
    """
    fa, fb = _as_field(a), _as_field(b)
    if fa.n_components != fb.n_components:
        raise IncomparableFieldsError("fields have different component counts")
    probes = probe_grid(probe) if np.isscalar(probe) else np.asarray(probe, dtype=float)
    va = _interpolate(fa, probes)
    vb = _interpolate(fb, probes)
    ok = np.isfinite(va).all(axis=1) & np.isfinite(vb).all(axis=1)
    if exclude is not None:
        ok &= ~exclude(probes)
    if ok.sum() < (1.0 - max_skipped) * len(probes):
        raise IncomparableFieldsError(f"{len(probes) - ok.sum()} of {len(probes)} probe points skipped")
    diff = np.linalg.norm(va[ok] - vb[ok])
    return float(diff / max(np.linalg.norm(vb[ok]), 1e-30))
