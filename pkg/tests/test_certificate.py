import math

import numpy as np
import pytest

from treewidth.certificate import (
    LowerBoundConstants,
    area_gap_bound,
    calibrate,
    certify_cut,
    decompose_cycle,
    disc_arc,
    embed_tree,
    isoperimetric_samples,
    open_disc,
    paper_length_bound,
    predict_long_arc_area,
    sample_short_arcs,
    short_arc_check,
    subtree_interval_count,
)
from treewidth.cuts import CyclePath, find_balanced_cut
from treewidth.errors import DomainError
from treewidth.tree import build_tree, edge_count

from conftest import glued


def test_embedding_root():
    m = glued("hyperbolic", 2, 4)
    emb = embed_tree(m)
    assert len(set(emb.vertex)) == emb.tree.n_vertices
    for k in range(3):
        assert emb.chains[k][0] == emb.vertex[0]


def test_untagged_rejected(sphere8):
    with pytest.raises(DomainError):
        embed_tree(sphere8)


def test_cycle_off_tree():
    m = glued("hyperbolic", 2, 4)
    emb = embed_tree(m)
    on = set(emb.point)
    # boundary of a face with no tree vertex
    f = next(f for f in range(m.n_faces) if not set(m.face_vertices[f].tolist()) & on)
    d = decompose_cycle(m, emb.tree, CyclePath.from_edges(m, m.faces[f]), emb)
    assert len(d.arcs) == 1 and d.m_s == 0 and d.m_l == 0


def test_whole_chains_counted():
    m = glued("hyperbolic", 2, 4)
    emb = embed_tree(m)
    out, back = [], []
    for k in (0, 3):  # edge 3 continues edge 0 downwards
        out += emb.chain_edges[k]
    walk = out + out[::-1]
    cyc = CyclePath.from_edges(m, walk, start=emb.vertex[0])
    d = decompose_cycle(m, emb.tree, cyc, emb)
    assert d.m_s == 2 and d.m_l == 0
    assert d.eq3_holds()


def test_eq3_on_hyperbolic_cuts():
    for h in (1, 2):
        m = glued("hyperbolic", h, 4)
        cut = find_balanced_cut(m, seed=0, restarts=2)
        cert = certify_cut(m, cut)
        assert cut.length >= 0.75 * (cert["m_l"] + cert["m_s"])
        assert cut.certificate["m_l"] == cert["m_l"]


def test_open_disc_intervals():
    m = glued("hyperbolic", 2, 4)
    od = open_disc(m)
    assert od.n_intervals == 2 * edge_count(2)
    assert od.disc.euler_characteristic == 1


def test_long_arc_prediction_partition():
    m = glued("hyperbolic", 3, 8)
    od = open_disc(m)
    R = 8
    # an arc spanning one leaf subtree of height 1: 2 * 3 intervals + the 2 intervals of its edge
    tree = build_tree(3)
    e = tree.children[1][0] - 1
    assert subtree_interval_count(tree, e) == 6
    start = od.marks[8]
    arc = disc_arc(od, start, start + 8 * R)
    pred = predict_long_arc_area(m, None, arc, LowerBoundConstants(slack_per_arc=4.0))
    assert sum(pred.predicted) == pytest.approx(m.total_area * sum(arc.enclosed) / (2 * edge_count(3)))
    assert sum(arc.enclosed) == 2 * edge_count(3)
    assert pred.within


def test_short_arcs_and_isoperimetry():
    m = glued("hyperbolic", 2, 8)
    rng = np.random.default_rng(0)
    rows = short_arc_check(m, sample_short_arcs(open_disc(m), rng, 20))
    assert len(rows) >= 20 and all(ok for *_, ok in rows)
    samples = isoperimetric_samples(m, rng, n=20)
    assert len(samples) >= 20
    assert all(L >= 0.95 * K * A for L, A, K in samples)


def test_area_gap_bound():
    assert area_gap_bound(5, 2, 1.0) == pytest.approx(1.5 * 13 / 363)
    assert area_gap_bound(5, 2, 1.0) == pytest.approx(0.0537, abs=5e-5)
    assert area_gap_bound(6, 5, 2.0) == pytest.approx(1.5 * 2.0 / edge_count(6))
    vals = [area_gap_bound(7, m, 1.0) for m in range(1, 7)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(DomainError):
        area_gap_bound(4, 4, 1.0)


def test_paper_length_bound():
    L9 = paper_length_bound(9)
    assert 8 / 3 * L9 + math.log(L9 + 1, 3) == pytest.approx(9, abs=1e-9)
    assert L9 == pytest.approx(2.92, abs=0.015)
    vals = [paper_length_bound(h) for h in range(1, 12)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    big = [paper_length_bound(3, LowerBoundConstants(C1=c)) for c in (1, 10, 100, 1e6)]
    assert all(a >= b for a, b in zip(big, big[1:])) and big[-1] == 0.0


def test_calibrate_smallest_consistent_C1():
    m = glued("hyperbolic", 2, 4)
    cut = find_balanced_cut(m, seed=0, restarts=2)
    cal = calibrate([(m, cut, [])])
    c = cut.length
    lhs = 8 / 3 * c + math.log(cal.C1 * (c + 1), 3)
    assert lhs == pytest.approx(2, abs=1e-9)
    assert paper_length_bound(2, LowerBoundConstants(C1=cal.C1)) == pytest.approx(c, abs=1e-8)
