"""Acceptance criteria 1-11. Each test prints one PASS/FAIL line."""

import functools
import math
import time

import numpy as np
import pytest

from treewidth.builder import (
    BuildConfig,
    bipyramid,
    build,
    build_flat_torus,
    build_genus_surface,
    build_round_sphere,
    normalize_diameter,
    octahedron,
    polyhedron_mesh,
)
from treewidth.certificate import (
    certify_cut,
    isoperimetric_samples,
    open_disc,
    paper_length_bound,
    sample_short_arcs,
    short_arc_check,
)
from treewidth.cuts import exact_balanced_cut, find_balanced_cut
from treewidth.errors import InfeasibleError
from treewidth.hyperbolic import DiscSpec, check_conditions, disc_area, select_curvature
from treewidth.lemma import verify_lemma
from treewidth.mesh import validate_mesh
from treewidth.metric import chain_distance_table, diameter
from treewidth.subdivide import CELL_EXPONENT, subdivide_half
from treewidth.tree import build_tree, edge_count


def report(capsys, n, ok, detail, seconds, limit):
    ok = ok and seconds < limit
    with capsys.disabled():
        print(f"\ncriterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}  [{seconds:.1f}s / {limit:.0f}s]")
    return ok


def test_criterion_01_tree_formula(capsys):
    t0 = time.perf_counter()
    counts = [build_tree(h).n_edges for h in range(9)]
    ok = all(2 * c == 3 * (3**h - 1) for h, c in enumerate(counts))
    assert report(capsys, 1, ok, f"edge counts h=0..8: {counts}", time.perf_counter() - t0, 1)


def test_criterion_02_lemma_sweep(capsys):
    t0 = time.perf_counter()
    cells = hold = attained = 0
    for p in (3, 4, 5):
        sweep = verify_lemma(p, 10, 6)
        cells += len(sweep.results)
        hold += sum(r.holds for r in sweep.results)
        attained += sum(r.attained for r in sweep.results)
    ok = cells == hold == attained
    assert report(capsys, 2, ok, f"{cells} cells, {hold} hold, {attained} attain equality",
                  time.perf_counter() - t0, 30)


def test_criterion_03_curvature(capsys):
    t0 = time.perf_counter()
    ks = [select_curvature(h) for h in range(1, 7)]
    mono = all(a <= b for a, b in zip(ks, ks[1:]))
    cond = True
    for h, K in zip(range(1, 7), ks):
        chord, inner, frac = check_conditions(K, h)
        cond &= chord >= 0.75 - 1e-8 and inner <= frac + 1e-8
    detail = "K(h)=" + ", ".join(f"{k:.4f}" for k in ks)
    assert report(capsys, 3, mono and cond, detail, time.perf_counter() - t0, 1)


def test_criterion_04_mesh_validity(capsys):
    t0 = time.perf_counter()
    meshes = [build(BuildConfig(v, h=h, R=4)) for v in ("hyperbolic", "flat_cone") for h in (1, 2, 3)]
    meshes += [build_round_sphere(6), build_flat_torus(8), build_genus_surface(1, 4), build_genus_surface(2, 4),
               build_genus_surface(3, 3)]
    valid = [validate_mesh(m) for m in meshes]
    all_valid = all(r.valid for r in valid)
    chi_ok = all(r.euler_characteristic == 2 - 2 * int(float(m.meta.get("genus", 0))) for r, m in zip(valid, meshes))
    K = select_curvature(2)
    m = build(BuildConfig("hyperbolic", h=2, K=K, R=8))
    ref = disc_area(DiscSpec(K))
    rel = abs(m.total_area - ref) / ref
    ok = all_valid and chi_ok and validate_mesh(m).valid and rel <= 0.03
    assert report(capsys, 4, ok, f"{len(meshes) + 1} meshes valid={all_valid}; h=2 R=8 area rel err {rel:.2e}",
                  time.perf_counter() - t0, 10)


def test_criterion_05_diameter(capsys):
    t0 = time.perf_counter()
    rows = []
    ok = True
    for h in (1, 2, 3):
        d8 = diameter(build(BuildConfig("hyperbolic", h=h, R=8))).diameter
        d16 = diameter(build(BuildConfig("hyperbolic", h=h, R=16))).diameter
        m = normalize_diameter(build(BuildConfig("hyperbolic", h=h, R=8)))
        dn = diameter(m).diameter
        ok &= d8 <= 1.2 and d16 <= d8 and abs(dn - 1) <= 1e-9
        rows.append(f"h={h}: d(R=8)={d8:.4f} d(R=16)={d16:.4f}")
    assert report(capsys, 5, ok, "; ".join(rows), time.perf_counter() - t0, 60)


def _separation(mesh, h):
    tree = build_tree(h)
    table = chain_distance_table(mesh)
    vals = [d for (a, b), d in table.items() if not tree.adjacent(a, b)]
    return min(vals) if vals else None


def test_criterion_06_edge_separation(capsys):
    t0 = time.perf_counter()
    ok = True
    parts = []
    for h in (1, 2):
        m = build(BuildConfig("hyperbolic", h=h, K=select_curvature(h), R=8))
        sep = _separation(m, h)
        if sep is None:
            parts.append(f"h={h}: no non-adjacent pairs")
        else:
            ok &= sep >= 0.75 - 0.1
            parts.append(f"h={h}: min {sep:.4f}")
    flat = [_separation(build(BuildConfig("flat_cone", h=h, R=8)), h) for h in (2, 3)]
    parts.append("flat_cone (reported) h=2,3: " + ", ".join(f"{x:.4f}" for x in flat))
    assert report(capsys, 6, ok, "; ".join(parts), time.perf_counter() - t0, 60)


def oracle_corpus():
    corpus = [("octahedron", octahedron()),
              ("two-face", polyhedron_mesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)], [(0, 1, 2), (0, 2, 1)]))]
    for n in range(3, 10):
        for height in (0.5, 1.0, 1.5):
            corpus.append((f"bipyramid{n}@{height}", bipyramid(n, height)))
    corpus.append(("hyperbolic h=1 R=1", build(BuildConfig("hyperbolic", h=1, R=1))))
    corpus.append(("flat_cone h=1 R=1", build(BuildConfig("flat_cone", h=1, R=1))))
    return corpus


def test_criterion_07_oracle(capsys):
    t0 = time.perf_counter()
    meshes = checked = agree = 0
    bad = []
    for name, m in oracle_corpus():
        assert m.n_faces <= 18
        meshes += 1
        for frac in (0.01, 0.1):
            tol = frac * m.total_area
            try:
                ex = exact_balanced_cut(m, tol)
            except InfeasibleError:
                with pytest.raises(InfeasibleError):
                    find_balanced_cut(m, tol, seed=0, restarts=4)
                continue
            heur = find_balanced_cut(m, tol, seed=0, restarts=4)
            checked += 1
            if abs(heur.length - ex.length) <= 1e-12:
                agree += 1
            else:
                bad.append(name)
    ok = meshes >= 20 and agree == checked and checked > 0
    assert report(capsys, 7, ok, f"{meshes} meshes, {agree}/{checked} cuts equal to the exhaustive optimum {bad}",
                  time.perf_counter() - t0, 60)


def test_criterion_08_round_sphere(capsys):
    t0 = time.perf_counter()
    m = build_round_sphere(16)
    d = diameter(m).diameter
    cut = find_balanced_cut(m, 0.01 * m.total_area, seed=0)
    rd = d / math.pi - 1
    rc = cut.length / (2 * math.pi) - 1
    ok = abs(rd) <= 0.08 and rc <= 0.05 and rc >= -0.05
    assert report(capsys, 8, ok, f"R=16: diameter/pi-1={rd:+.4f}, cut/2pi-1={rc:+.5f}", time.perf_counter() - t0,
                  120)


@functools.lru_cache(maxsize=None)
def growth_cuts():
    out = {}
    for h in (1, 2, 3):
        t0 = time.perf_counter()
        m = build(BuildConfig("hyperbolic", h=h, R=8))
        cut = find_balanced_cut(m, 0.01 * m.total_area, seed=7, restarts=16)
        certify_cut(m, cut)
        out[h] = (m, cut, time.perf_counter() - t0)
    return out


def test_criterion_09_growth(capsys):
    t0 = time.perf_counter()
    cuts = growth_cuts()
    L = [cuts[h][1].length for h in (1, 2, 3)]
    slope = np.polyfit([1, 2, 3], L, 1)[0]
    bounds = [paper_length_bound(h) for h in (1, 2, 3)]
    ok = L[0] < L[1] < L[2] and slope > 0
    ok &= all(cuts[h][1].balance_dev <= 0.01 * cuts[h][0].total_area for h in (1, 2, 3))
    detail = ("lengths " + ", ".join(f"{x:.4f}" for x in L) + f"; slope {slope:.4f}; "
              "paper_length_bound " + ", ".join(f"{x:.4f}" for x in bounds))
    assert report(capsys, 9, ok, detail, time.perf_counter() - t0, 900)


def test_criterion_10_certificates(capsys):
    cuts = growth_cuts()
    t0 = time.perf_counter()
    eq3 = all(c.length >= 0.75 * (c.certificate["m_l"] + c.certificate["m_s"]) for _, c, _ in cuts.values())
    rng = np.random.default_rng(10)
    short_rows, iso = [], []
    for h in (1, 2, 3):
        m = cuts[h][0]
        short_rows += short_arc_check(m, sample_short_arcs(open_disc(m), rng, 20))
        iso += isoperimetric_samples(m, rng, n=20)
    short_ok = len(short_rows) >= 50 and all(ok for *_, ok in short_rows)
    iso_ok = len(iso) >= 50 and all(L >= 0.95 * K * A for L, A, K in iso)
    worst_iso = min(L / (K * A) for L, A, K in iso)
    detail = (f"eq3 {eq3}; short arcs {sum(o for *_, o in short_rows)}/{len(short_rows)}; "
              f"isoperimetric {len(iso)} samples, min length/(K fill) {worst_iso:.3f}")
    assert report(capsys, 10, eq3 and short_ok and iso_ok, detail, time.perf_counter() - t0, 300)


def test_criterion_11_subdivision(capsys):
    t0 = time.perf_counter()
    eps = 0.1
    C = eps ** (-CELL_EXPONENT)
    ok = True
    parts = []
    for name, m in (("sphere", build_round_sphere(8)), ("torus", build_flat_torus(16)),
                    ("genus2", build_genus_surface(2, 8))):
        res = subdivide_half(m, eps)
        g = int(round(m.genus))
        bound = (C + 8 * g) * res.diameter
        good = (min(res.areas) >= (0.5 - eps) * m.total_area and res.curve_length <= bound
                and res.shelling_ok and res.n_components == 2)
        ok &= good
        parts.append(f"{name}: min side {min(res.areas) / m.total_area:.3f}|M|, length {res.curve_length:.3f}"
                     f" <= {bound:.1f}")
    assert report(capsys, 11, ok, "; ".join(parts), time.perf_counter() - t0, 300)
