"""Structured triangle meshes on the unit square, with optional circular holes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EDGE_TOL = 1e-12
EDGES = ("left", "right", "bottom", "top")


class DegenerateMeshError(ValueError):
    pass


@dataclass
class Mesh:
    nodes: np.ndarray  # (N, 2) coordinates in meters
    triangles: np.ndarray  # (M, 3) node indices, counterclockwise
    boundary_tags: list[frozenset[str]] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def centroids(self) -> np.ndarray:
        return self.nodes[self.triangles].mean(axis=1)

    def nodes_tagged(self, tag: str) -> np.ndarray:
        return np.array([i for i, t in enumerate(self.boundary_tags) if tag in t], dtype=int)


def _edge_tags(x: float, y: float) -> set[str]:
    tags = set()
    if abs(x) <= EDGE_TOL:
        tags.add("left")
    if abs(x - 1.0) <= EDGE_TOL:
        tags.add("right")
    if abs(y) <= EDGE_TOL:
        tags.add("bottom")
    if abs(y - 1.0) <= EDGE_TOL:
        tags.add("top")
    return tags


def build_square_mesh(n: int, pattern: str = "crossed") -> Mesh:
    """Crossed ("union jack") mesh of the unit square with ``n`` cells per side.

    Grid vertices come first in row-major order (index ``j*(n+1) + i`` for the
    vertex at ``(i/n, j/n)``), followed by one center node per cell.
    """
    if n < 1:
        raise ValueError("need at least one cell per side")
    if pattern != "crossed":
        raise ValueError(f"unsupported mesh pattern {pattern!r}")
    h = 1.0 / n
    ii, jj = np.meshgrid(np.arange(n + 1), np.arange(n + 1))
    grid = np.column_stack([ii.ravel() * h, jj.ravel() * h])
    # exact edge coordinates regardless of rounding in i*h
    grid[ii.ravel() == n, 0] = 1.0
    grid[jj.ravel() == n, 1] = 1.0
    ci, cj = np.meshgrid(np.arange(n), np.arange(n))
    ci, cj = ci.ravel(), cj.ravel()
    centers = np.column_stack([(ci + 0.5) * h, (cj + 0.5) * h])
    nodes = np.vstack([grid, centers])

    v = lambda i, j: j * (n + 1) + i  # noqa: E731
    sw, se = v(ci, cj), v(ci + 1, cj)
    nw, ne = v(ci, cj + 1), v(ci + 1, cj + 1)
    c = (n + 1) ** 2 + cj * n + ci
    tris = np.stack(
        [
            np.column_stack([sw, se, c]),
            np.column_stack([se, ne, c]),
            np.column_stack([ne, nw, c]),
            np.column_stack([nw, sw, c]),
        ],
        axis=1,
    ).reshape(-1, 3)
    tags = [frozenset(_edge_tags(x, y)) for x, y in nodes]
    return Mesh(nodes=nodes, triangles=tris, boundary_tags=tags)


def punch_hole(mesh: Mesh, center: tuple[float, float], radius: float) -> Mesh:
    """Drop triangles whose centroid is strictly inside the circle.

    Nodes left without triangles are removed and the rest renumbered in their
    original order. Surviving nodes that touched a removed triangle are tagged
    ``hole`` (they carry no constraint).
    """
    cen = mesh.centroids()
    d2 = ((cen - np.asarray(center, dtype=float)) ** 2).sum(axis=1)
    inside = d2 < radius * radius
    if not inside.any():
        return mesh
    kept = mesh.triangles[~inside]
    if len(kept) == 0:
        raise DegenerateMeshError("hole removes every triangle")
    used = np.zeros(mesh.n_nodes, dtype=bool)
    used[kept.ravel()] = True
    touched = np.zeros(mesh.n_nodes, dtype=bool)
    touched[mesh.triangles[inside].ravel()] = True

    new_index = np.full(mesh.n_nodes, -1, dtype=int)
    new_index[used] = np.arange(used.sum())
    tags = []
    for i in np.flatnonzero(used):
        t = mesh.boundary_tags[i]
        tags.append(t | {"hole"} if touched[i] else t)
    return Mesh(nodes=mesh.nodes[used], triangles=new_index[kept], boundary_tags=tags)
