import pytest
from hypothesis import given, strategies as st

from treewidth.errors import DomainError
from treewidth.tree import TreePoint, build_tree, edge_count, euler_tour, subtree_edge_count, tree_path


@pytest.mark.parametrize("h,n", [(0, 0), (2, 12), (3, 39)])
def test_edge_counts(h, n):
    assert build_tree(h).n_edges == n == edge_count(h)


def test_recursion():
    for h in range(8):
        assert edge_count(h + 1) == 3 * edge_count(h) + 3


def test_negative_height():
    with pytest.raises(DomainError):
        build_tree(-1)


def test_shape():
    t = build_tree(3)
    assert len(t.children[t.root]) == 3
    leaves = [v for v in range(t.n_vertices) if not t.children[v]]
    assert all(t.depth[v] == 3 for v in leaves)


@pytest.mark.parametrize("h,n", [(1, 6), (2, 24)])
def test_tour_length(h, n):
    assert len(euler_tour(build_tree(h))) == n


def test_empty_tour():
    with pytest.raises(DomainError):
        euler_tour(build_tree(0))


@pytest.mark.parametrize("h", [1, 2, 3])
def test_tour_structure(h):
    t = build_tree(h)
    tour = euler_tour(t)
    steps = tour.steps
    for i, j in enumerate(tour.pairing):
        assert j != i and tour.pairing[j] == i
        assert steps[i].edge == steps[j].edge and steps[i].down != steps[j].down
        assert (abs(i - j) - 1) % 2 == 0
    for a, b in zip(steps, steps[1:] + steps[:1]):
        assert a.end == b.start
    assert {s.start for s in steps} == set(range(t.n_vertices))


def test_subtree_counts():
    t = build_tree(2)
    leaf_edge = max(range(t.n_edges), key=lambda e: t.depth[e + 1])
    assert subtree_edge_count(t, leaf_edge) == 0
    # three children per non-leaf vertex (see decisions ledger)
    assert subtree_edge_count(t, 0) == 3
    for h in (1, 2, 3, 4):
        t = build_tree(h)
        assert sum(1 + subtree_edge_count(t, c - 1) for c in t.children[t.root]) == edge_count(h)


def test_tree_paths():
    t = build_tree(2)
    p = TreePoint(4, 0.5)
    assert tree_path(t, p, p).k == 0
    # edges 0 and 3 share the vertex 1 (edge 3 hangs below edge 0)
    assert tree_path(t, TreePoint(0, 0.5), TreePoint(3, 0.5)).k == 0
    # leaf edges under different root branches: the two root edges are whole
    a = TreePoint(t.children[1][0] - 1, 0.5)
    b = TreePoint(t.children[2][0] - 1, 0.5)
    assert tree_path(t, a, b).k == 2


@given(st.integers(0, 38), st.integers(0, 38))
def test_path_length_matches_depths(e1, e2):
    t = build_tree(3)
    a, b = TreePoint(e1, 1.0), TreePoint(e2, 1.0)
    u, v = e1 + 1, e2 + 1
    x, y = u, v
    while x != y:
        if t.depth[x] >= t.depth[y]:
            x = t.parent[x]
        else:
            y = t.parent[y]
    expect = t.depth[u] + t.depth[v] - 2 * t.depth[x]
    assert tree_path(t, a, b).length == pytest.approx(expect)
