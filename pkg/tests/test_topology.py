import numpy as np
import pytest

from treewidth.builder import build_flat_torus, octahedron, polyhedron_mesh
from treewidth.topology import (
    boundary_loops,
    components,
    cut_along,
    is_disc,
    region_boundary,
    region_euler_characteristic,
    umbrella,
)

from conftest import glued


def test_umbrella_closed(sphere8):
    for v in range(0, sphere8.n_vertices, 37):
        fans = umbrella(sphere8, v)
        assert len(fans) == 1 and fans[0][2]
        assert sorted(fans[0][1]) == sorted(sphere8.vertex_faces[v])


def test_cut_along_tree_gives_disc():
    m = glued("hyperbolic", 2, 4)
    tagged = [e for e, t in enumerate(m.tags) if t and t.startswith("tree:")]
    d = cut_along(m, tagged)
    assert d.euler_characteristic == 1
    assert len(boundary_loops(d, range(d.n_faces))) == 1
    assert np.array_equal(d.areas, m.areas)
    assert np.allclose(d.lengths, m.lengths[d.edge_origin])


def test_cut_along_nothing_is_identity():
    t = build_flat_torus(4)
    c = cut_along(t, [])
    assert (c.n_vertices, c.n_edges, c.n_faces) == (t.n_vertices, t.n_edges, t.n_faces)


def test_regions():
    m = octahedron()
    assert is_disc(m, [0])
    assert not is_disc(m, range(8))
    assert region_euler_characteristic(m, [0]) == 1
    assert len(region_boundary(m, [0])) == 3
    assert len(components(m, range(8))) == 1
    assert len(components(m, range(8), blocked_edges=range(m.n_edges))) == 8


def test_annulus_is_not_disc(sphere8):
    z = sphere8.coords[sphere8.face_vertices].mean(axis=1)[:, 2]
    band = np.flatnonzero(np.abs(z) < 0.3)
    assert not is_disc(sphere8, band)
    assert len(boundary_loops(sphere8, band)) == 2


def test_open_square():
    m = polyhedron_mesh([(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)], [(0, 1, 2), (0, 2, 3)])
    assert is_disc(m, [0, 1]) and is_disc(m, [0])
