import numpy as np
import pytest

from femagents.fem import (
    DegenerateMeshError,
    Material,
    build_square_mesh,
    lame_parameters,
    punch_hole,
)


def test_lame_plane_strain():
    lam, mu = lame_parameters(Material(1e9, 0.3, "plane_strain"))
    # 1e9*0.3/(1.3*0.4) and 1e9/2.6, evaluated by hand
    assert lam == pytest.approx(5.769230769230769e8, rel=1e-12)
    assert mu == pytest.approx(3.846153846153846e8, rel=1e-12)


def test_lame_plane_stress():
    lam, mu = lame_parameters(Material(1e9, 0.3, "plane_stress"))
    assert lam == pytest.approx(3.2967032967032966e8, rel=1e-12)
    assert mu == pytest.approx(3.846153846153846e8, rel=1e-12)


@pytest.mark.parametrize("form", ["plane_strain", "plane_stress"])
def test_lame_zero_poisson(form):
    assert lame_parameters(Material(1e9, 0.0, form)) == (0.0, 5e8)


@pytest.mark.parametrize("E, nu", [(0, 0.3), (-1, 0.3), (1e9, 0.5), (1e9, -0.1)])
def test_material_rejects_bad_values(E, nu):
    with pytest.raises(ValueError):
        Material(E, nu)


def test_single_cell_mesh():
    m = build_square_mesh(1)
    assert m.n_nodes == 5 and m.n_triangles == 4
    corners = [i for i, t in enumerate(m.boundary_tags) if len(t) == 2]
    assert len(corners) == 4
    assert m.boundary_tags[4] == frozenset()


def test_fifty_cell_counts():
    m = build_square_mesh(50)
    assert (m.n_nodes, m.n_triangles) == (51**2 + 50**2, 4 * 50**2) == (5101, 10000)


@pytest.mark.parametrize("n", [1, 2, 3, 7, 50])
def test_mesh_tiles_unit_square(n):
    m = build_square_mesh(n)
    areas = m.areas()
    assert np.all(areas > 0)
    assert areas.sum() == pytest.approx(1.0, abs=1e-12)
    assert set(np.unique(m.triangles)) == set(range(m.n_nodes))


@pytest.mark.parametrize("n", [1, 4, 9])
def test_tags_match_coordinates(n):
    m = build_square_mesh(n)
    for (x, y), tags in zip(m.nodes, m.boundary_tags):
        assert ("left" in tags) == (abs(x) <= 1e-12)
        assert ("right" in tags) == (abs(x - 1) <= 1e-12)
        assert ("bottom" in tags) == (abs(y) <= 1e-12)
        assert ("top" in tags) == (abs(y - 1) <= 1e-12)


def test_hole_radius_zero_is_noop():
    m = build_square_mesh(10)
    assert punch_hole(m, (0.5, 0.5), 0.0) is m


def test_hole_far_away_is_noop():
    m = build_square_mesh(10)
    h = punch_hole(m, (5, 5), 0.2)
    assert h.n_triangles == m.n_triangles and h.n_nodes == m.n_nodes


def test_hole_matches_brute_force_centroid_scan():
    m = build_square_mesh(50)
    removed = 0
    for tri in m.triangles:
        cx = sum(m.nodes[v][0] for v in tri) / 3
        cy = sum(m.nodes[v][1] for v in tri) / 3
        if (cx - 0.5) ** 2 + (cy - 0.5) ** 2 < 0.2**2:
            removed += 1
    h = punch_hole(m, (0.5, 0.5), 0.2)
    assert m.n_triangles - h.n_triangles == removed
    assert np.all(h.areas() > 0)
    assert set(np.unique(h.triangles)) == set(range(h.n_nodes))
    hole_nodes = h.nodes[h.nodes_tagged("hole")]
    r = np.hypot(hole_nodes[:, 0] - 0.5, hole_nodes[:, 1] - 0.5)
    assert len(hole_nodes) > 0 and r.min() > 0.15 and r.max() < 0.25


def test_hole_swallowing_mesh_is_an_error():
    with pytest.raises(DegenerateMeshError):
        punch_hole(build_square_mesh(4), (0.5, 0.5), 5.0)
