import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treewidth.builder import bipyramid, build_flat_torus, octahedron, polyhedron_mesh
from treewidth.cuts import (
    CyclePath,
    cut_from_partition,
    cut_length,
    exact_balanced_cut,
    filling_area,
    find_balanced_cut,
    partition_boundary,
)
from treewidth.errors import DomainError, HomologyError, InfeasibleError, SizeError
from treewidth.subdivide import homology_basis
from treewidth.topology import components

from conftest import glued


def two_face(scale=1.0):
    return polyhedron_mesh([(0, 0, 0), (scale, 0, 0), (0, 1, 0)], [(0, 1, 2), (0, 2, 1)])


def brute_min_cut(mesh, tol):
    """Independent enumeration over every 2-colouring with connected sides."""
    F = mesh.n_faces
    best = math.inf
    M = mesh.total_area
    for bits in product((0, 1), repeat=F - 1):
        a = [0] + [i + 1 for i, b in enumerate(bits) if b == 0]
        if len(a) == F:
            continue
        b = [f for f in range(F) if f not in a]
        if abs(mesh.areas[a].sum() - M / 2) > tol + 1e-12 * M:
            continue
        if len(components(mesh, a)) != 1 or len(components(mesh, b)) != 1:
            continue
        best = min(best, cut_length(mesh, a))
    return best


def check_invariants(mesh, cut):
    assert sorted(cut.faces_a + cut.faces_b) == list(range(mesh.n_faces))
    assert cut.area_a + cut.area_b == pytest.approx(mesh.total_area, rel=1e-12)
    assert cut.boundary_edges == sorted(partition_boundary(mesh, cut.faces_a).tolist())
    assert cut.length == pytest.approx(cut_length(mesh, cut.faces_a), rel=1e-12)
    assert len(components(mesh, cut.faces_a)) == 1 and len(components(mesh, cut.faces_b)) == 1
    for c in cut.cycles:
        c.check(mesh)


def test_fill_of_equator(sphere8):
    z = sphere8.coords[sphere8.face_vertices].mean(axis=1)[:, 2]
    north = np.flatnonzero(z > 0)
    cyc = cut_from_partition(sphere8, north).cycles[0]
    fill = filling_area(sphere8, cyc)
    a = sphere8.areas[north].sum()
    assert fill == pytest.approx(min(a, sphere8.total_area - a), rel=1e-12)
    assert fill == pytest.approx(2 * math.pi, rel=0.05)


def test_fill_trivial_cases():
    m = octahedron()
    assert filling_area(m, CyclePath((), (), 0.0)) == 0.0
    tri = CyclePath.from_edges(m, m.faces[3])
    assert filling_area(m, tri) == pytest.approx(m.areas[3])


def test_fill_rejects_nontrivial_loop():
    t = build_flat_torus(6)
    loop = homology_basis(t).loops[0]
    with pytest.raises(HomologyError):
        filling_area(t, loop)


def test_octahedron_exact():
    m = octahedron()
    cut = exact_balanced_cut(m, balance_tol=0.0)
    assert len(cut.faces_a) == 4
    be = cut.boundary_edges
    assert len(be) == 4 and np.allclose(m.lengths[be], m.lengths[be][0])
    check_invariants(m, cut)


def test_two_face_exact():
    m = two_face()
    cut = exact_balanced_cut(m, balance_tol=0.0)
    assert cut.length == pytest.approx(m.lengths.sum())


def test_vacuous_balance_gives_global_min():
    m = bipyramid(6, 0.7)
    cut = exact_balanced_cut(m, balance_tol=m.total_area)
    assert cut.length == pytest.approx(brute_min_cut(m, m.total_area), rel=1e-12)


@pytest.mark.parametrize("mesh", [octahedron(), bipyramid(4, 0.5), bipyramid(5, 1.3), bipyramid(7, 0.8)])
def test_exact_matches_enumeration(mesh):
    tol = 0.1 * mesh.total_area
    assert exact_balanced_cut(mesh, tol).length == pytest.approx(brute_min_cut(mesh, tol), rel=1e-12)


def test_size_cap():
    with pytest.raises(SizeError):
        exact_balanced_cut(bipyramid(10))


def test_infeasible():
    m = two_face()
    m.areas[0] *= 2
    with pytest.raises(InfeasibleError):
        exact_balanced_cut(m, balance_tol=0.0)
    with pytest.raises(InfeasibleError):
        find_balanced_cut(m, balance_tol=0.0, restarts=1)


@pytest.mark.parametrize("mesh", [octahedron(), bipyramid(5, 0.5), glued("hyperbolic", 1, 1)])
def test_heuristic_matches_exact(mesh):
    tol = 0.01 * mesh.total_area
    ex = exact_balanced_cut(mesh, tol)
    heur = find_balanced_cut(mesh, tol, seed=3, restarts=4)
    assert heur.length == pytest.approx(ex.length, abs=1e-12)
    check_invariants(mesh, heur)


def test_round_sphere_cut():
    from treewidth.builder import build_round_sphere

    m = build_round_sphere(5)
    cut = find_balanced_cut(m, 0.01 * m.total_area, seed=0, restarts=16)
    assert cut.balance_dev <= 0.01 * m.total_area
    assert 2 * math.pi * 0.97 <= cut.length <= 1.05 * 2 * math.pi
    check_invariants(m, cut)


def test_deterministic():
    m = glued("hyperbolic", 1, 2)
    a = find_balanced_cut(m, seed=11, restarts=3)
    b = find_balanced_cut(m, seed=11, restarts=3)
    assert a.to_json(m) == b.to_json(m)


def test_json_keys():
    m = glued("flat_cone", 1, 2)
    d = find_balanced_cut(m, seed=0, restarts=2).to_dict(m)
    assert set(d) == {"variant", "h", "K_or_side", "R", "seed", "length", "areaA", "areaB", "balance_dev",
                      "m_l", "m_s", "L_s", "components", "faces_A"}


def test_disconnected_rejected():
    a = two_face()
    from treewidth.mesh import SurfaceMesh

    m = SurfaceMesh(6, np.r_[a.edges, a.edges + 3], np.r_[a.lengths, a.lengths],
                    np.r_[a.faces, a.faces + 3], np.r_[a.areas, a.areas])
    with pytest.raises(DomainError):
        find_balanced_cut(m)


@settings(max_examples=10, deadline=None)
@given(st.integers(3, 8), st.floats(0.3, 2.0))
def test_bipyramid_equivalence(n, height):
    m = bipyramid(n, height)
    tol = 0.05 * m.total_area
    try:
        ex = exact_balanced_cut(m, tol)
    except InfeasibleError:
        return
    heur = find_balanced_cut(m, tol, seed=1, restarts=3)
    assert heur.length == pytest.approx(ex.length, abs=1e-12)
