"""Area-halving curves on closed surfaces.

Pipeline: shortest independent loops at a base point, cutting the surface
open to a disc, repeated balanced splitting of the disc into small cells,
a shelling order of the cells, and a greedy prefix whose area is close to
half. The boundary of that prefix is the returned curve.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .cuts import CyclePath, find_balanced_cut
from .errors import DomainError, HomologyError, InfeasibleError, ShellingError
from .mesh import SurfaceMesh
from .metric import diameter, eccentricities
from .topology import (
    boundary_loops,
    components,
    cut_along,
    is_disc,
    region_boundary,
    region_euler_characteristic,
)

# 1 / log2(3/2): exponent of the cell-count term in the length budget
CELL_EXPONENT = 1.0 / math.log2(1.5)


def n_iterations(epsilon: float) -> int:
    """Rounds of 1/3-2/3 splitting that bring every cell below 2*epsilon of the area."""
    if not 0 < epsilon < 0.5:
        raise DomainError("epsilon must lie in (0, 1/2)")
    return math.floor(math.log(2 * epsilon) / math.log(2.0 / 3.0)) + 1


def length_budget(epsilon: float, genus: int, d: float) -> float:
    return (epsilon ** (-CELL_EXPONENT) + 8 * genus) * d


# --------------------------------------------------------------------------
# homology basis


@dataclass
class HomologyBasis:
    basepoint: int
    loops: list[CyclePath]
    lengths: list[float]
    rank: int
    classes: list[int] = field(default_factory=list)  # Z2 coordinates as bit masks

    @property
    def independent(self) -> bool:
        return _gf2_rank(self.classes) == len(self.classes)


def _gf2_rank(vectors) -> int:
    basis: dict[int, int] = {}
    for v in vectors:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


def _shortest_path_tree(mesh: SurfaceMesh, root: int):
    """Distances and the tree edge to each vertex's parent (-1 at the root)."""
    dist, pred = csgraph.dijkstra(mesh.graph, directed=False, indices=root, return_predecessors=True)
    if not np.all(np.isfinite(dist)):
        raise DomainError("mesh is disconnected")
    best: dict[tuple[int, int], int] = {}
    for e, (a, b) in enumerate(mesh.edges):
        key = (min(a, b), max(a, b))
        if key not in best or (mesh.lengths[e], e) < (mesh.lengths[best[key]], best[key]):
            best[key] = e
    parent_edge = np.full(mesh.n_vertices, -1, dtype=np.int64)
    for v in range(mesh.n_vertices):
        p = pred[v]
        if p >= 0:
            parent_edge[v] = best[min(p, v), max(p, v)]
    return dist, parent_edge


def _path_to_root(mesh: SurfaceMesh, parent_edge, v: int) -> tuple[list[int], list[int]]:
    edges, verts = [], [v]
    while parent_edge[v] >= 0:
        e = int(parent_edge[v])
        edges.append(e)
        v = mesh.other_end(e, v)
        verts.append(v)
    return edges, verts


def edge_classes(mesh: SurfaceMesh, tree_edges: set[int]) -> tuple[np.ndarray, int]:
    """Z2 homology coordinates of the loop closed by each non-tree edge.

    A spanning tree of the dual graph avoiding ``tree_edges`` is grown from
    face 0; each remaining edge gets its own coordinate bit, and a dual tree
    edge takes the sum of the other edges of the face it leads to, so every
    face boundary sums to zero. Tree edges carry zero.
    """
    ef = mesh.edge_faces
    F = mesh.n_faces
    parent = np.full(F, -1, dtype=np.int64)
    seen = np.zeros(F, dtype=bool)
    seen[0] = True
    order = [0]
    cotree: set[int] = set()
    for f in order:
        for e in mesh.faces[f]:
            e = int(e)
            if e in tree_edges or e in cotree:
                continue
            a, b = (int(x) for x in ef[e])
            g = b if a == f else a
            if g >= 0 and not seen[g]:
                seen[g] = True
                parent[g] = e
                cotree.add(e)
                order.append(g)
    if not seen.all():
        raise DomainError("mesh is disconnected")
    cls = np.zeros(mesh.n_edges, dtype=object)
    bit = 0
    for e in range(mesh.n_edges):
        if e not in tree_edges and e not in cotree:
            cls[e] = 1 << bit
            bit += 1
    for f in reversed(order[1:]):
        c = int(parent[f])
        v = 0
        for e in mesh.faces[f]:
            if int(e) != c:
                v ^= cls[int(e)]
        cls[c] = v
    return cls, bit


def homology_basis(mesh: SurfaceMesh, basepoint: int | None = None) -> HomologyBasis:
    """Greedy shortest Z2 basis of loops through ``basepoint``.

    Candidates close a shortest-path tree at the base point with one
    non-tree edge each; they are taken shortest first (edge id breaks ties)
    whenever independent of those already chosen.
    """
    if len(mesh.boundary_edges):
        raise DomainError("mesh has boundary")
    rank = 2 - mesh.euler_characteristic
    if basepoint is None:
        basepoint = int(np.argmin(eccentricities(mesh)))
    if not 0 <= basepoint < mesh.n_vertices:
        raise DomainError(f"vertex {basepoint} not in mesh")
    dist, parent_edge = _shortest_path_tree(mesh, basepoint)
    tree = set(int(e) for e in parent_edge if e >= 0)
    cls, n_bits = edge_classes(mesh, tree)
    if n_bits != rank:
        raise HomologyError(f"tree-cotree leaves {n_bits} edges, expected {rank}")
    cands = sorted(
        (float(dist[a] + mesh.lengths[e] + dist[b]), e)
        for e, (a, b) in enumerate(mesh.edges)
        if e not in tree and cls[e] != 0
    )
    pivots: dict[int, int] = {}
    loops, lengths, classes = [], [], []
    for length, e in cands:
        if len(loops) == rank:
            break
        v = int(cls[e])
        while v:
            top = v.bit_length() - 1
            if top not in pivots:
                break
            v ^= pivots[top]
        if not v:
            continue
        pivots[v.bit_length() - 1] = v
        a, b = (int(x) for x in mesh.edges[e])
        ea, va = _path_to_root(mesh, parent_edge, a)
        eb, vb = _path_to_root(mesh, parent_edge, b)
        edges = ea[::-1] + [e] + eb
        verts = va[::-1] + vb
        loops.append(CyclePath(tuple(edges), tuple(verts), math.fsum(mesh.lengths[edges])))
        lengths.append(loops[-1].length)
        classes.append(int(cls[e]))
    if len(loops) != rank:
        raise HomologyError(f"found {len(loops)} independent loops, expected {rank}")
    return HomologyBasis(basepoint, loops, lengths, rank, classes)


# --------------------------------------------------------------------------
# cutting to a disc


@dataclass
class CutDisc:
    disc: SurfaceMesh
    cut_edges: list[int]
    boundary_length: float
    euler_characteristic: int
    n_boundary_loops: int


def cut_to_disc(mesh: SurfaceMesh, basis: HomologyBasis) -> CutDisc:
    """Cut along the union of the basis loops and check that a disc results."""
    if basis.rank == 0:
        raise DomainError("an empty basis leaves nothing to cut")
    if not basis.independent:
        raise HomologyError("basis loops are not independent")
    cut = sorted({e for loop in basis.loops for e in loop.edges})
    disc = cut_along(mesh, cut)
    n_comp = len(components(disc, range(disc.n_faces)))
    chi = disc.euler_characteristic
    loops = boundary_loops(disc, range(disc.n_faces))
    if n_comp != 1 or chi != 1 or len(loops) != 1:
        raise HomologyError(
            f"cut complex is not a disc: {n_comp} components, chi {chi}, {len(loops)} boundary loops"
        )
    length = math.fsum(disc.lengths[disc.boundary_edges])
    return CutDisc(disc, cut, length, chi, len(loops))


# --------------------------------------------------------------------------
# splitting a disc


@dataclass
class DiscSplit:
    edges: list[int]
    vertices: list[int]
    length: float
    sides: tuple[list[int], list[int]]
    areas: tuple[float, float]
    ratio: float  # smaller side over the piece area
    window: tuple[float, float]
    target: float  # 2 * max distance to the boundary + delta
    evaluated: int

    @property
    def balanced(self) -> bool:
        return self.window[0] <= self.ratio <= self.window[1]


class _Piece:
    """Face subset of a complex with its interior edge graph precomputed."""

    def __init__(self, mesh: SurfaceMesh, faces):
        self.mesh = mesh
        self.faces = np.asarray(sorted(set(int(f) for f in faces)), dtype=np.int64)
        F = mesh.n_faces
        inside = np.zeros(F, dtype=bool)
        inside[self.faces] = True
        ef = mesh.edge_faces
        in0 = np.where(ef[:, 0] >= 0, inside[ef[:, 0]], False)
        in1 = np.where(ef[:, 1] >= 0, inside[ef[:, 1]], False)
        self.interior = np.flatnonzero(in0 & in1 & (ef[:, 0] != ef[:, 1]))
        self.boundary = np.flatnonzero(in0 ^ in1)
        self.bverts = np.unique(mesh.edges[self.boundary])
        self.area = math.fsum(mesh.areas[self.faces])
        local = np.full(F, -1, dtype=np.int64)
        local[self.faces] = np.arange(len(self.faces))
        self.local = local
        self.dual_a = local[ef[self.interior, 0]]
        self.dual_b = local[ef[self.interior, 1]]

    def sides(self, blocked: np.ndarray):
        keep = ~np.isin(self.interior, blocked)
        n = len(self.faces)
        g = sparse.coo_matrix((np.ones(int(keep.sum())), (self.dual_a[keep], self.dual_b[keep])), shape=(n, n))
        k, lab = csgraph.connected_components(g, directed=False)
        return k, lab


def _boundary_order(mesh: SurfaceMesh, faces, bverts) -> list[int]:
    loops = boundary_loops(mesh, faces)
    seen: set[int] = set()
    out = []
    for loop in loops:
        for v in loop.vertices[:-1]:
            if v not in seen:
                seen.add(v)
                out.append(v)
    for v in bverts:
        if int(v) not in seen:
            out.append(int(v))
    return out


def split_disc(mesh: SurfaceMesh, faces=None, delta: float = 0.0, max_sources: int = 32,
               max_evals: int = 4000) -> DiscSplit:
    """Shortest boundary-to-boundary arc through the interior with a 1/3-2/3 area split.

    Shortest interior paths are computed from up to ``max_sources`` boundary
    vertices spread along the boundary to every boundary vertex; candidates
    are evaluated shortest first and the first balanced one is returned. The
    ratio window is widened on both sides by the largest face area over the
    piece area. When nothing is balanced, InfeasibleError carries the
    candidate whose ratio came closest.
    """
    if faces is None:
        faces = range(mesh.n_faces)
    piece = _Piece(mesh, faces)
    if len(piece.faces) < 2:
        raise InfeasibleError("a single face cannot be split")
    tol = float(mesh.areas[piece.faces].max()) / piece.area
    window = (1.0 / 3.0 - tol, 2.0 / 3.0 + tol)
    V = mesh.n_vertices
    on_bnd = np.zeros(V, dtype=bool)
    on_bnd[piece.bverts] = True
    E = mesh.edges[piece.interior]
    L = mesh.lengths[piece.interior]
    # directed graph: never leave a boundary vertex except from the source
    rows, cols, w, eid = [], [], [], []
    for (a, b), l, e in zip(E, L, piece.interior):
        if not on_bnd[a]:
            rows.append(a), cols.append(b), w.append(l), eid.append(e)
        if not on_bnd[b]:
            rows.append(b), cols.append(a), w.append(l), eid.append(e)
    base = sparse.coo_matrix((w, (rows, cols)), shape=(V, V)).tocsr()
    best_edge: dict[tuple[int, int], int] = {}
    for (a, b), l, e in zip(E, L, piece.interior):
        key = (min(a, b), max(a, b))
        if key not in best_edge or (l, e) < (mesh.lengths[best_edge[key]], best_edge[key]):
            best_edge[key] = int(e)
    by_vertex: dict[int, list[int]] = {}
    for (a, b), e in zip(E, piece.interior):
        for x in (int(a), int(b)):
            if on_bnd[x]:
                by_vertex.setdefault(x, []).append(int(e))

    order = _boundary_order(mesh, piece.faces, piece.bverts)
    step = max(1, math.ceil(len(order) / max_sources))
    sources = order[::step]
    cands: dict[tuple[int, int], tuple[float, list[int]]] = {}
    for s in sources:
        out = by_vertex.get(s, [])
        if not out:
            continue
        r, c, ww = [], [], []
        for e in out:
            r.append(s), c.append(mesh.other_end(e, s)), ww.append(mesh.lengths[e])
        g = base + sparse.coo_matrix((ww, (r, c)), shape=(V, V)).tocsr()
        dist, pred = csgraph.dijkstra(g, directed=True, indices=s, return_predecessors=True)
        for t in piece.bverts:
            t = int(t)
            if t == s or not np.isfinite(dist[t]):
                continue
            key = (min(s, t), max(s, t))
            if key in cands and cands[key][0] <= dist[t]:
                continue
            verts = [t]
            while verts[-1] != s:
                verts.append(int(pred[verts[-1]]))
            cands[key] = (float(dist[t]), verts[::-1])
    ranked = sorted((l, key, verts) for key, (l, verts) in cands.items())
    # distance to the boundary inside the piece
    pg = sparse.coo_matrix((L, (E[:, 0], E[:, 1])), shape=(V, V))
    db = csgraph.dijkstra(pg, directed=False, indices=piece.bverts, min_only=True)
    pverts = np.unique(mesh.face_vertices[piece.faces])
    target = 2.0 * float(db[pverts].max()) + delta

    best = None
    for n_eval, (length, _, verts) in enumerate(ranked[:max_evals], start=1):
        edges = [best_edge[min(x, y), max(x, y)] for x, y in zip(verts, verts[1:])]
        k, lab = piece.sides(np.asarray(edges))
        if k != 2:
            continue
        side0 = piece.faces[lab == 0].tolist()
        side1 = piece.faces[lab == 1].tolist()
        a0 = math.fsum(mesh.areas[side0])
        a1 = math.fsum(mesh.areas[side1])
        ratio = min(a0, a1) / piece.area
        split = DiscSplit(edges, verts, math.fsum(mesh.lengths[edges]), (side0, side1), (a0, a1),
                          ratio, window, target, n_eval)
        if split.balanced:
            return split
        if best is None or abs(ratio - 0.5) < abs(best.ratio - 0.5):
            best = split
    raise InfeasibleError(
        f"no balanced arc; best ratio {best.ratio:.4f}" if best else "no splitting arc", best=best
    )


# --------------------------------------------------------------------------
# shelling


def _cell_adjacency(mesh: SurfaceMesh, cells) -> list[set[int]]:
    owner = np.full(mesh.n_faces, -1, dtype=np.int64)
    for i, c in enumerate(cells):
        owner[np.asarray(c, dtype=np.int64)] = i
    ef = mesh.edge_faces
    adj: list[set[int]] = [set() for _ in cells]
    for a, b in ef:
        if a >= 0 and b >= 0:
            ca, cb = owner[a], owner[b]
            if ca >= 0 and cb >= 0 and ca != cb:
                adj[ca].add(int(cb))
                adj[cb].add(int(ca))
    return adj


def _prefix_ok(mesh: SurfaceMesh, faces: list[int], total: int) -> bool:
    # the final union may be the whole closed surface
    if len(faces) == total and not len(mesh.boundary_edges):
        return True
    return is_disc(mesh, faces)


def verify_shelling(mesh: SurfaceMesh, cells, order) -> list[bool]:
    """Per prefix: is the union a disc (the whole closed surface passes as the last prefix)."""
    total = sum(len(c) for c in cells)
    out, faces = [], []
    for i in order:
        faces.extend(cells[i])
        out.append(_prefix_ok(mesh, faces, total))
    return out


def shelling_order(mesh: SurfaceMesh, cells, max_nodes: int = 20000) -> list[int]:
    """Order cells so every prefix union is a disc: greedy with backtracking."""
    cells = [list(c) for c in cells]
    n = len(cells)
    if n == 0:
        return []
    adj = _cell_adjacency(mesh, cells)
    total = sum(len(c) for c in cells)
    nodes = 0
    for first in range(n):
        if not _prefix_ok(mesh, cells[first], total):
            continue
        order = [first]
        faces = [list(cells[first])]
        tried: list[set[int]] = [set()]
        while order:
            if len(order) == n:
                return order
            used = set(order)
            frontier = sorted(set().union(*(adj[i] for i in order)) - used - tried[-1])
            advanced = False
            for c in frontier:
                nodes += 1
                if nodes > max_nodes:
                    raise ShellingError("backtracking budget exhausted")
                tried[-1].add(c)
                cand = faces[-1] + cells[c]
                if _prefix_ok(mesh, cand, total):
                    order.append(c)
                    faces.append(cand)
                    tried.append(set())
                    advanced = True
                    break
            if not advanced:
                order.pop()
                faces.pop()
                tried.pop()
    raise ShellingError("no shelling order exists for these cells")


# --------------------------------------------------------------------------
# pipeline


@dataclass
class SubdivisionResult:
    epsilon: float
    genus: int
    diameter: float
    curve: list[CyclePath]
    region: list[int]
    areas: tuple[float, float]
    curve_length: float
    budget: float
    n_iter: int
    split_ratios: list[float]
    cells: list[list[int]]
    shelling: list[int]
    shelling_ok: bool
    basis_lengths: list[float]
    cut_boundary_length: float
    n_components: int  # face graph minus curve edges

    @property
    def balanced(self) -> bool:
        total = sum(self.areas)
        return min(self.areas) >= (0.5 - self.epsilon) * total

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "genus": self.genus,
            "diameter": self.diameter,
            "curve_length": self.curve_length,
            "budget": self.budget,
            "n_iter": self.n_iter,
            "shelling_ok": self.shelling_ok,
            "sides": [self.areas[0], self.areas[1]],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _bootstrap_sphere(mesh: SurfaceMesh, epsilon: float, seed: int) -> list[list[int]]:
    tol = max(epsilon, 0.05) * mesh.total_area
    budget = max(5000, 10 * mesh.n_faces)
    try:
        cut = find_balanced_cut(mesh, balance_tol=tol, budget=budget, seed=seed, restarts=2, workers=1)
    except InfeasibleError as exc:
        if exc.best is None:
            raise
        cut = exc.best
    return [sorted(cut.faces_a), sorted(cut.faces_b)]


def subdivide_half(mesh: SurfaceMesh, epsilon: float, seed: int = 0,
                   basepoint: int | None = None) -> SubdivisionResult:
    """Closed curve splitting a closed surface into two sides of area >= (1/2 - epsilon)|M|."""
    n_iter = n_iterations(epsilon)
    total = mesh.total_area
    genus = int(round(mesh.genus))
    d = diameter(mesh).diameter
    basis = homology_basis(mesh, basepoint)
    if basis.rank:
        cd = cut_to_disc(mesh, basis)
        master, pieces, cut_len = cd.disc, [list(range(mesh.n_faces))], cd.boundary_length
    else:
        master, pieces, cut_len = mesh, _bootstrap_sphere(mesh, epsilon, seed), 0.0
    limit = 2 * epsilon * total
    ratios: list[float] = []
    for _ in range(n_iter):
        nxt = []
        for p in pieces:
            if math.fsum(mesh.areas[p]) <= limit or len(p) < 2:
                nxt.append(p)
                continue
            try:
                split = split_disc(master, p)
            except InfeasibleError as exc:
                split = exc.best
            if split is None:
                nxt.append(p)
                continue
            ratios.append(split.ratio)
            nxt.extend(split.sides)
        pieces = nxt
    order = shelling_order(master, pieces)
    shelling_ok = all(verify_shelling(master, pieces, order))

    # greedy prefix: first one within epsilon of half, else the closest
    region: list[int] = []
    best_region, best_gap = None, math.inf
    for i in order[:-1]:
        region = region + pieces[i]
        gap = abs(math.fsum(mesh.areas[region]) - total / 2)
        if gap < best_gap:
            best_region, best_gap = list(region), gap
        if gap <= epsilon * total:
            best_region = list(region)
            break
    region = sorted(best_region)
    inside = np.zeros(mesh.n_faces, dtype=bool)
    inside[region] = True
    a_in = math.fsum(mesh.areas[inside])
    a_out = math.fsum(mesh.areas[~inside])
    curve = [CyclePath(tuple(lp.edges), tuple(lp.vertices), lp.length) for lp in boundary_loops(mesh, region)]
    bnd = region_boundary(mesh, region)
    n_comp = len(components(mesh, range(mesh.n_faces), blocked_edges=bnd))
    return SubdivisionResult(
        epsilon=epsilon,
        genus=genus,
        diameter=d,
        curve=curve,
        region=region,
        areas=(a_in, a_out),
        curve_length=math.fsum(mesh.lengths[bnd]),
        budget=length_budget(epsilon, genus, d),
        n_iter=n_iter,
        split_ratios=ratios,
        cells=pieces,
        shelling=order,
        shelling_ok=shelling_ok,
        basis_lengths=basis.lengths,
        cut_boundary_length=cut_len,
        n_components=n_comp,
    )


__all__ = [
    "CELL_EXPONENT",
    "CutDisc",
    "DiscSplit",
    "HomologyBasis",
    "SubdivisionResult",
    "cut_to_disc",
    "edge_classes",
    "homology_basis",
    "length_budget",
    "n_iterations",
    "region_euler_characteristic",
    "shelling_order",
    "split_disc",
    "subdivide_half",
    "verify_shelling",
]
