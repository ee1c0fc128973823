import math

import numpy as np
import pytest

from treewidth.builder import build_flat_torus, polyhedron_mesh
from treewidth.errors import DomainError, HomologyError, InfeasibleError
from treewidth.metric import diameter
from treewidth.subdivide import (
    CELL_EXPONENT,
    HomologyBasis,
    cut_to_disc,
    homology_basis,
    length_budget,
    n_iterations,
    shelling_order,
    split_disc,
    subdivide_half,
    verify_shelling,
)
from treewidth.topology import boundary_loops, is_disc, region_boundary


def square_grid(n):
    pts = [(i / n, j / n, 0.0) for j in range(n + 1) for i in range(n + 1)]
    idx = lambda i, j: j * (n + 1) + i  # noqa: E731
    tris = []
    for j in range(n):
        for i in range(n):
            tris += [(idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)), (idx(i, j), idx(i + 1, j + 1), idx(i, j + 1))]
    return polyhedron_mesh(pts, tris)


def test_sphere_basis_empty(sphere8):
    b = homology_basis(sphere8)
    assert b.rank == 0 and b.loops == []


def test_torus_basis(torus16):
    b = homology_basis(torus16)
    assert b.rank == 2 and b.independent
    assert min(b.lengths) == pytest.approx(1.0, rel=0.05)
    d = diameter(torus16).diameter
    for loop in b.loops:
        loop.check(torus16)
        assert b.basepoint in loop.vertices
        assert loop.length <= 2 * d + 2 * torus16.lengths.max()


def test_genus2_basis(genus2):
    b = homology_basis(genus2)
    assert b.rank == 4 and b.independent
    assert len(set(b.classes)) == 4


def test_basepoint_choice(torus16):
    assert homology_basis(torus16, basepoint=7).basepoint == 7
    with pytest.raises(DomainError):
        homology_basis(torus16, basepoint=-1)


def test_cut_torus(torus16):
    cd = cut_to_disc(torus16, homology_basis(torus16))
    assert cd.euler_characteristic == 1 and cd.n_boundary_loops == 1
    assert cd.disc.total_area == pytest.approx(torus16.total_area, abs=1e-12)
    d = diameter(torus16).diameter
    assert cd.boundary_length <= 4 * 2 * d + 1e-9


def test_cut_genus2(genus2):
    b = homology_basis(genus2)
    cd = cut_to_disc(genus2, b)
    assert cd.euler_characteristic == 1
    assert cd.boundary_length <= 4 * b.rank * diameter(genus2).diameter


def test_cut_rejects_bad_bases(torus16, sphere8):
    b = homology_basis(torus16)
    dup = HomologyBasis(b.basepoint, [b.loops[0], b.loops[0]], b.lengths, 2, [b.classes[0]] * 2)
    with pytest.raises(HomologyError):
        cut_to_disc(torus16, dup)
    with pytest.raises(DomainError):
        cut_to_disc(sphere8, homology_basis(sphere8))


def test_split_two_face_disc():
    m = polyhedron_mesh([(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)], [(0, 1, 2), (0, 2, 3)])
    s = split_disc(m)
    assert s.ratio == pytest.approx(m.areas.min() / m.total_area, rel=1e-12)
    assert s.length == pytest.approx(math.sqrt(2))


def test_split_round_cap(sphere8):
    z = sphere8.coords[sphere8.face_vertices].mean(axis=1)[:, 2]
    cap = np.flatnonzero(z > 0.4)
    assert is_disc(sphere8, cap)
    s = split_disc(sphere8, cap)
    assert s.balanced
    area = sphere8.areas[cap].sum()
    assert sum(s.areas) == pytest.approx(area, rel=1e-12)
    assert sorted(s.sides[0] + s.sides[1]) == sorted(cap.tolist())
    # shortest balanced arc is no longer than the path bound through the centre
    assert s.length <= s.target


def test_split_single_face():
    m = polyhedron_mesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)], [(0, 1, 2)])
    with pytest.raises(InfeasibleError):
        split_disc(m)


def test_shelling_single_cell():
    m = square_grid(2)
    assert shelling_order(m, [list(range(m.n_faces))]) == [0]


def quadrants(m, n):
    cells = [[], [], [], []]
    for f in range(m.n_faces):
        x, y = m_coords(m, f)
        cells[(x >= 0.5) + 2 * (y >= 0.5)].append(f)
    return cells


def m_coords(m, f):
    c = m.coords[m.face_vertices[f]].mean(axis=0)
    return c[0], c[1]


def test_shelling_grid():
    m = square_grid(4)
    cells = quadrants(m, 4)
    order = shelling_order(m, cells)
    assert all(verify_shelling(m, cells, order))
    # quadrants 0 and 3 meet only at the centre
    assert {order[0], order[1]} not in ({0, 3}, {1, 2})
    assert not all(verify_shelling(m, cells, [0, 3, 1, 2]))


def test_iteration_count():
    assert n_iterations(0.4999) == 1
    assert n_iterations(0.1) == 4
    for eps in (0.05, 0.1, 0.2):
        assert 2 ** n_iterations(eps) < eps ** (-CELL_EXPONENT)
    with pytest.raises(DomainError):
        n_iterations(0.5)
    assert CELL_EXPONENT == pytest.approx(1.70951, abs=1e-5)


def check_result(mesh, res, eps):
    M = mesh.total_area
    assert min(res.areas) >= (0.5 - eps) * M
    assert res.curve_length <= res.budget
    assert res.shelling_ok
    assert res.n_components == 2
    assert sorted(e for c in res.curve for e in c.edges) == sorted(region_boundary(mesh, res.region))


def test_subdivide_sphere(sphere8):
    res = subdivide_half(sphere8, 0.1)
    check_result(sphere8, res, 0.1)
    assert res.budget == pytest.approx(0.1 ** -CELL_EXPONENT * res.diameter)
    assert set(res.to_dict()) == {"epsilon", "genus", "diameter", "curve_length", "budget", "n_iter",
                                  "shelling_ok", "sides"}


def test_subdivide_torus(torus16):
    check_result(torus16, subdivide_half(torus16, 0.1), 0.1)


def test_subdivide_genus2(genus2):
    res = subdivide_half(genus2, 0.1)
    check_result(genus2, res, 0.1)
    assert res.budget == pytest.approx(length_budget(0.1, 0, res.diameter) + 16 * res.diameter)


def test_subdivide_coarse_epsilon():
    t = build_flat_torus(6)
    res = subdivide_half(t, 0.45)
    assert res.n_iter == 1
    assert min(res.areas) >= 0.05 * t.total_area
