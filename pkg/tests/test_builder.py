import math
from dataclasses import replace

import numpy as np
import pytest

from treewidth.builder import (
    BuildConfig,
    bipyramid,
    build,
    build_flat_torus,
    build_genus_surface,
    normalize_diameter,
    octahedron,
    polyhedron_mesh,
)
from treewidth.errors import DomainError
from treewidth.hyperbolic import DiscSpec, disc_area, select_curvature
from treewidth.mesh import dumps, loads, validate_mesh
from treewidth.metric import diameter
from treewidth.topology import umbrella
from treewidth.tree import edge_count

from conftest import glued


def two_faces_per_edge(mesh):
    return set(np.bincount(mesh.faces.ravel(), minlength=mesh.n_edges).tolist()) == {2}


def tagged_subgraph(mesh):
    es = [e for e, t in enumerate(mesh.tags) if t and t.startswith("tree:")]
    vs = set(mesh.edges[es].ravel().tolist())
    return es, vs


def test_glued_h1_is_sphere():
    m = glued("hyperbolic", 1, 4)
    assert m.euler_characteristic == 2 and two_faces_per_edge(m)
    assert validate_mesh(m).valid


def test_glued_h2_area():
    K = select_curvature(2)
    m = build(BuildConfig("hyperbolic", h=2, K=K, R=8))
    assert m.total_area == pytest.approx(disc_area(DiscSpec(K)), rel=0.03)


@pytest.mark.parametrize("variant", ["hyperbolic", "flat_cone"])
@pytest.mark.parametrize("h", [1, 2])
def test_tree_chains(variant, h):
    R = 4
    m = glued(variant, h, R)
    chains = m.tree_chains()
    assert sorted(chains) == list(range(edge_count(h)))
    assert all(len(es) == R for es in chains.values())
    es, vs = tagged_subgraph(m)
    # connected and acyclic: a tree on its vertices
    assert len(es) == len(vs) - 1
    parent = {v: v for v in vs}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for e in es:
        a, b = (int(x) for x in m.edges[e])
        ra, rb = find(a), find(b)
        assert ra != rb
        parent[ra] = rb


def test_hyperbolic_chain_lengths():
    m = glued("hyperbolic", 2, 8)
    for es in m.tree_chains().values():
        assert m.lengths[es].sum() >= 0.75


def test_flat_cone_area():
    m = glued("flat_cone", 1, 4)
    assert m.total_area == pytest.approx(3 * math.sqrt(3) / 8, abs=1e-9)
    assert glued("flat_cone", 2, 2).euler_characteristic == 2


def test_flat_cone_area_independent_of_resolution():
    a = [glued("flat_cone", 1, R).total_area for R in (2, 4, 8)]
    assert max(a) - min(a) < 1e-12


def test_hyperbolic_area_stable_under_refinement():
    # cell areas are exact, so every resolution reproduces the closed form
    K = select_curvature(1)
    ref = disc_area(DiscSpec(K))
    errs = [abs(glued("hyperbolic", 1, R).total_area - ref) for R in (2, 4, 8)]
    assert all(e <= 1e-9 * ref for e in errs)


def test_apex_link_single_cycle():
    m = glued("flat_cone", 1, 4)
    apex = int(m.meta["apex"])
    fans = umbrella(m, apex)
    assert len(fans) == 1 and fans[0][2]
    assert len(fans[0][1]) == 2 * edge_count(1)


def test_reference_surfaces(sphere8, torus16, genus2):
    assert sphere8.total_area == pytest.approx(4 * math.pi, rel=0.02)
    assert torus16.euler_characteristic == 0
    assert genus2.euler_characteristic == -2
    for m in (sphere8, torus16, genus2, build_genus_surface(1, 4), octahedron(), bipyramid(5)):
        assert validate_mesh(m).valid


def test_bad_configs():
    with pytest.raises(DomainError):
        BuildConfig("nope")
    with pytest.raises(DomainError):
        BuildConfig("round_sphere", R=1)
    with pytest.raises(DomainError):
        BuildConfig("flat_cone", side=0)


def test_validation_catches_missing_face():
    m = octahedron()
    broken = replace(m, faces=m.faces[1:], areas=m.areas[1:], meta={})
    rep = validate_mesh(broken)
    assert not rep.valid and rep.bad_edges


def test_validation_catches_triangle_inequality():
    m = octahedron()
    L = m.lengths.copy()
    L[m.faces[0][0]] = 10.0
    rep = validate_mesh(replace(m, lengths=L))
    assert not rep.valid and 0 in rep.triangle_violations


def test_normalize():
    m = glued("hyperbolic", 2, 4)
    n = normalize_diameter(m)
    assert diameter(n).diameter == pytest.approx(1.0, abs=1e-9)
    again = normalize_diameter(n)
    assert np.allclose(again.lengths, n.lengths, rtol=1e-12, atol=0)
    lam = 2.5
    s = m.scaled(lam)
    assert s.total_area == pytest.approx(lam * lam * m.total_area, rel=1e-14)


def test_two_face_sphere():
    m = polyhedron_mesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)], [(0, 1, 2), (0, 2, 1)])
    assert m.n_faces == 2 and m.euler_characteristic == 2


@pytest.mark.parametrize("maker", [lambda: glued("hyperbolic", 1, 2), lambda: glued("flat_cone", 1, 2),
                                   lambda: build_flat_torus(3)])
def test_smesh_round_trip(maker):
    m = maker()
    text = dumps(m)
    back = loads(text)
    assert dumps(back) == text
    assert np.array_equal(back.lengths, m.lengths) and np.array_equal(back.areas, m.areas)
