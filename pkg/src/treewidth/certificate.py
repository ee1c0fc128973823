"""Lower-bound bookkeeping for balanced cuts on the glued spheres.

A cycle on a glued sphere splits into arcs at the tree: runs along tree
chains, and off-tree arcs through the disc. Off-tree arcs are short or long
by comparison with the threshold ``E``. Cutting the sphere open along the
tree gives back the disc, where arcs between boundary points are sampled to
compare enclosed areas with interval counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .cuts import CyclePath, CutResult, filling_area
from .hyperbolic import triangle_area
from .errors import DomainError, UnreachableError
from .mesh import SurfaceMesh
from .topology import boundary_loops, components, cut_along
from .tree import TernaryTree, TreePoint, build_tree, edge_count, subtree_edge_count

HYPERBOLIC_E = 0.75


@dataclass(frozen=True)
class LowerBoundConstants:
    C1: float = 1.0  # constant inside the final logarithm
    slack_per_arc: float = 1.0  # residual per long arc, in units of |M|/N(h)

    def __post_init__(self):
        if not (self.C1 > 0 and self.slack_per_arc > 0):
            raise DomainError("constants must be positive")


# --------------------------------------------------------------------------
# the tree inside a glued mesh


@dataclass
class TreeEmbedding:
    tree: TernaryTree
    vertex: list[int]  # mesh vertex of each tree vertex
    chains: dict[int, list[int]]  # tree edge -> mesh vertices from parent to child
    chain_edges: dict[int, list[int]]  # tree edge -> mesh edges from parent to child
    point: dict[int, TreePoint] = field(default_factory=dict)  # mesh vertex on the tree

    @property
    def tree_vertices(self) -> set[int]:
        return set(self.point)

    def chain_length(self, mesh: SurfaceMesh, k: int) -> float:
        return math.fsum(mesh.lengths[self.chain_edges[k]])


def _order_chain(mesh: SurfaceMesh, edges: list[int], start: int):
    verts, ordered = [start], []
    left = set(edges)
    while left:
        v = verts[-1]
        nxt = next((e for e in sorted(left) if v in mesh.edges[e]), None)
        if nxt is None:
            raise DomainError("tree chain is not a path from its parent end")
        left.discard(nxt)
        ordered.append(nxt)
        verts.append(mesh.other_end(nxt, v))
    return verts, ordered


def embed_tree(mesh: SurfaceMesh, tree: TernaryTree | None = None) -> TreeEmbedding:
    """Locate the tree of a glued mesh from its ``tree:k`` chains."""
    chains = mesh.tree_chains()
    if not chains:
        raise DomainError("mesh carries no tree tags")
    if tree is None:
        h = int(mesh.meta.get("h", 0))
        tree = build_tree(h)
    if sorted(chains) != list(range(edge_count(tree.height))):
        raise DomainError("tree tags do not match the tree")
    ends = {}
    for k, es in chains.items():
        deg: dict[int, int] = {}
        for e in es:
            for v in mesh.edges[e]:
                deg[int(v)] = deg.get(int(v), 0) + 1
        ends[k] = [v for v, d in deg.items() if d == 1]
        if len(ends[k]) != 2:
            raise DomainError(f"chain {k} is not a simple path")
    root = set(ends[0]) & set(ends[1]) & set(ends[2])
    if len(root) != 1:
        raise DomainError("root chains do not meet at one vertex")
    vertex = [-1] * tree.n_vertices
    vertex[0] = root.pop()
    chain_verts, chain_edges, point = {}, {}, {}
    for k in range(tree.n_edges):
        p, c = tree.edge_vertices(k)
        start = vertex[p]
        if start not in ends[k]:
            raise DomainError(f"chain {k} does not start at its parent vertex")
        verts, ordered = _order_chain(mesh, chains[k], start)
        vertex[c] = verts[-1]
        chain_verts[k], chain_edges[k] = verts, ordered
        n = len(ordered)
        for j, v in enumerate(verts):
            if j == 0 and v in point:
                continue
            point.setdefault(v, TreePoint(k, j / n))
    return TreeEmbedding(tree, vertex, chain_verts, chain_edges, point)


def threshold_E(mesh: SurfaceMesh) -> float:
    """Arc threshold: 3/4 on the hyperbolic variant, the side length on the flat cone."""
    if mesh.meta.get("variant") == "flat_cone":
        return float(mesh.meta.get("side", 0.5))
    return HYPERBOLIC_E


# --------------------------------------------------------------------------
# arc decomposition


@dataclass(frozen=True)
class Arc:
    edges: tuple[int, ...]
    ends: tuple[TreePoint | None, TreePoint | None]
    length: float
    kind: str  # "short" | "long" | "in_tree"


@dataclass
class ArcDecomposition:
    arcs: list[Arc]
    m_l: int
    m_s: int
    L_s: float
    E: float

    @property
    def length(self) -> float:
        return math.fsum(a.length for a in self.arcs)

    def eq3_holds(self, length: float | None = None) -> bool:
        """Cycle length at least ``(3/4)(m_l + m_s)``."""
        length = self.length if length is None else length
        return length >= 0.75 * (self.m_l + self.m_s)


def decompose_cycle(mesh: SurfaceMesh, tree: TernaryTree | None, cycle: CyclePath,
                    embedding: TreeEmbedding | None = None, E: float | None = None) -> ArcDecomposition:
    emb = embedding or embed_tree(mesh, tree)
    E = threshold_E(mesh) if E is None else E
    on_tree = emb.point
    tagged = [bool(t and t.startswith("tree:")) for t in mesh.tags]
    edges, verts = list(cycle.edges), list(cycle.vertices)
    L = mesh.lengths
    n = len(edges)
    if n == 0:
        return ArcDecomposition([], 0, 0, 0.0, E)
    # rotate so the walk starts at a tree vertex, if it touches the tree at all
    start = next((i for i in range(n) if verts[i] in on_tree), None)
    if start is None:
        length = math.fsum(L[edges])
        kind = "long" if length >= E else "short"
        arc = Arc(tuple(edges), (None, None), length, kind)
        return ArcDecomposition([arc], int(kind == "long"), 0, length if kind == "short" else 0.0, E)
    edges = edges[start:] + edges[:start]
    verts = verts[start:-1] + verts[:start] + [verts[start]]
    # pieces between consecutive visits to the tree; tree pieces are single tagged edges
    pieces: list[tuple[list[int], int, int, bool]] = []
    run, run_start = [], verts[0]
    for i, e in enumerate(edges):
        run.append(e)
        v = verts[i + 1]
        if v in on_tree:
            pieces.append((run, run_start, v, len(run) == 1 and tagged[e]))
            run, run_start = [], v
    arcs: list[Arc] = []
    merged: list[int] = []
    merged_start = None
    for run, a, b, in_tree in pieces:
        if in_tree:
            if not merged:
                merged_start = a
            merged += run
            merged_end = b
            continue
        if merged:
            arcs.append(_make_arc(mesh, merged, merged_start, merged_end, True, on_tree, E))
            merged = []
        arcs.append(_make_arc(mesh, run, a, b, False, on_tree, E))
    if merged:
        arcs.append(_make_arc(mesh, merged, merged_start, merged_end, True, on_tree, E))
    cyc = set(cycle.edges)
    m_s = sum(1 for es in emb.chain_edges.values() if all(e in cyc for e in es))
    m_l = sum(1 for a in arcs if a.kind == "long")
    L_s = math.fsum(a.length for a in arcs if a.kind == "short")
    return ArcDecomposition(arcs, m_l, m_s, L_s, E)


def _make_arc(mesh, run, a, b, in_tree, on_tree, E):
    length = math.fsum(mesh.lengths[run])
    kind = "in_tree" if in_tree else ("long" if length >= E else "short")
    return Arc(tuple(run), (on_tree.get(a), on_tree.get(b)), length, kind)


def certify_cut(mesh: SurfaceMesh, cut: CutResult, embedding: TreeEmbedding | None = None) -> dict:
    """Arc counts summed over the cycles of a cut; stored on the cut as well."""
    emb = embedding or embed_tree(mesh)
    m_l = m_s = 0
    L_s = 0.0
    for cyc in cut.cycles:
        d = decompose_cycle(mesh, emb.tree, cyc, emb)
        m_l += d.m_l
        m_s += d.m_s
        L_s += d.L_s
    cert = {"m_l": m_l, "m_s": m_s, "L_s": L_s, "E": threshold_E(mesh),
            "eq3": cut.length >= 0.75 * (m_l + m_s)}
    cut.certificate.update(cert)
    return cert


# --------------------------------------------------------------------------
# the disc behind a glued sphere


@dataclass
class OpenDisc:
    """The glued sphere cut open along its tree."""

    sphere: SurfaceMesh
    disc: SurfaceMesh
    loop: list[int]  # boundary vertices of the disc, in order (closed: loop[0] == loop[-1])
    interval: list[int]  # interval index of each boundary step (len(loop) - 1 entries)
    marks: list[int]  # loop positions of tree-vertex images; interval i spans marks[i]..marks[i+1]
    n_intervals: int


def open_disc(mesh: SurfaceMesh) -> OpenDisc:
    tagged = [e for e, t in enumerate(mesh.tags) if t and t.startswith("tree:")]
    if not tagged:
        raise DomainError("mesh carries no tree tags")
    emb = embed_tree(mesh)
    corners = set(emb.vertex)
    disc = cut_along(mesh, tagged)
    loops = boundary_loops(disc, range(disc.n_faces))
    if len(loops) != 1:
        raise DomainError("cutting along the tree did not give one boundary loop")
    verts = loops[0].vertices
    origin = disc.vertex_origin
    pos = [i for i, v in enumerate(verts[:-1]) if int(origin[v]) in corners]
    n = len(verts) - 1
    # rotate so the loop starts at a tree vertex image
    s = pos[0]
    verts = verts[s:-1] + verts[:s] + [verts[s]]
    marks = [p - s for p in pos] + [n]
    interval = []
    for i in range(len(marks) - 1):
        interval += [i] * (marks[i + 1] - marks[i])
    return OpenDisc(mesh, disc, verts, interval, marks, len(marks) - 1)


def _interior_path(od: OpenDisc, a_pos: int, b_pos: int):
    """Shortest path between two boundary points of the disc through its interior."""
    disc = od.disc
    bverts = set(od.loop)
    a, b = od.loop[a_pos], od.loop[b_pos]
    E = disc.edges
    ok = np.ones(disc.n_edges, dtype=bool)
    bmask = np.zeros(disc.n_vertices, dtype=bool)
    bmask[list(bverts)] = True
    inner_end = lambda x: (~bmask[x]) | (x == a) | (x == b)  # noqa: E731
    ok &= inner_end(E[:, 0]) & inner_end(E[:, 1])
    ok &= disc.edge_face_count == 2
    both_ends = (E[:, 0] == a) & (E[:, 1] == b) | (E[:, 0] == b) & (E[:, 1] == a)
    ok |= both_ends & (disc.edge_face_count == 2)
    idx = np.flatnonzero(ok)
    n = disc.n_vertices
    g = sparse.coo_matrix((disc.lengths[idx], (E[idx, 0], E[idx, 1])), shape=(n, n)).tocsr()
    d, pred = csgraph.dijkstra(g, directed=False, indices=a, return_predecessors=True)
    if not math.isfinite(d[b]):
        raise UnreachableError("no interior path")
    path_v = [b]
    while path_v[-1] != a:
        path_v.append(int(pred[path_v[-1]]))
    path_v.reverse()
    edges = []
    for x, y in zip(path_v, path_v[1:]):
        cand = [e for e in disc.vertex_edges[x] if disc.other_end(e, x) == y and ok[e]]
        edges.append(min(cand, key=lambda e: (disc.lengths[e], e)))
    return edges, float(d[b])


@dataclass
class DiscArc:
    start: int  # loop position
    end: int
    edges: list[int]  # disc edges
    length: float
    sides: tuple[list[int], list[int]]  # disc faces: side along loop start..end, other side
    areas: tuple[float, float]
    enclosed: tuple[int, int]  # whole intervals on each side


def disc_arc(od: OpenDisc, start: int, end: int) -> DiscArc:
    """Interior shortest arc between two loop positions and the two sides it cuts off."""
    if start == end:
        raise DomainError("arc endpoints coincide")
    edges, length = _interior_path(od, start, end)
    disc = od.disc
    comps = components(disc, range(disc.n_faces), blocked_edges=edges)
    if len(comps) != 2:
        raise DomainError("arc does not separate the disc")
    # the side containing the boundary edge that leaves loop position `start` forwards
    n = len(od.loop) - 1
    lo, hi = (start, end) if start < end else (end, start)
    x, y = od.loop[lo], od.loop[lo + 1]
    step_edge = next(e for e in disc.vertex_edges[x]
                     if disc.other_end(e, x) == y and disc.edge_face_count[e] == 1)
    f = int(disc.edge_faces[step_edge][0])
    first = comps[0] if f in set(comps[0]) else comps[1]
    second = comps[1] if first is comps[0] else comps[0]
    inside = sum(1 for i in range(od.n_intervals)
                 if od.marks[i] >= lo and od.marks[i + 1] <= hi)
    outside = sum(1 for i in range(od.n_intervals)
                  if od.marks[i + 1] <= lo or od.marks[i] >= hi)
    areas = (float(disc.areas[first].sum()), float(disc.areas[second].sum()))
    del n
    return DiscArc(lo, hi, edges, length, (first, second), areas, (inside, outside))


@dataclass
class AreaPrediction:
    enclosed: tuple[int, int]  # N' on each side
    predicted: tuple[float, float]
    measured: tuple[float, float]
    residual: float

    @property
    def within(self) -> bool:
        return all(abs(p - m) <= self.residual for p, m in zip(self.predicted, self.measured))

    @property
    def slack_needed(self) -> float:
        """Smallest slack_per_arc that would cover this arc."""
        unit = self.residual
        return max(abs(p - m) for p, m in zip(self.predicted, self.measured)) / unit if unit else math.inf


def predict_long_arc_area(mesh: SurfaceMesh, tree: TernaryTree | None, arc: DiscArc,
                          constants: LowerBoundConstants = LowerBoundConstants()) -> AreaPrediction:
    """Area on each side of a long arc as ``|M| N' / (2N)``, with residual ``slack |M| / N``."""
    h = int(mesh.meta["h"]) if tree is None else tree.height
    N = edge_count(h)
    if min(arc.areas) <= 0:
        raise DomainError("arc does not separate the disc")
    M = mesh.total_area
    pred = tuple(M * k / (2 * N) for k in arc.enclosed)
    return AreaPrediction(arc.enclosed, pred, arc.areas, constants.slack_per_arc * M / N)


def subtree_interval_count(tree: TernaryTree, edge: int) -> int:
    """Boundary intervals lying strictly under a tree edge (two per subtree edge)."""
    return 2 * subtree_edge_count(tree, edge)


# --------------------------------------------------------------------------
# sampling


def sample_disc_arcs(od: OpenDisc, rng: np.random.Generator, n: int, max_gap: int | None = None):
    """Random interior arcs between boundary points at most ``max_gap`` loop steps apart."""
    total = len(od.loop) - 1
    max_gap = max_gap or total // 2
    out = []
    tries = 0
    while len(out) < n and tries < 20 * n:
        tries += 1
        a = int(rng.integers(total))
        gap = int(rng.integers(2, max(3, max_gap + 1)))
        b = (a + gap) % total
        try:
            out.append(disc_arc(od, a, b))
        except (DomainError, UnreachableError):
            continue
    return out


def sample_short_arcs(od: OpenDisc, rng: np.random.Generator, n: int, E: float | None = None,
                      max_gap: int | None = None, max_tries: int = 40):
    """At least ``n`` interior arcs shorter than E (fewer if sampling runs dry)."""
    E = threshold_E(od.sphere) if E is None else E
    R = int(od.sphere.meta.get("R", 4))
    out = []
    for _ in range(max_tries):
        out += [a for a in sample_disc_arcs(od, rng, n, max_gap or R) if a.length < E]
        if len(out) >= n:
            break
    return out


def short_arc_check(mesh: SurfaceMesh, arcs, factor: float = 1.25, E: float | None = None):
    """Smaller side area against ``(|M|/N) |l|`` for each arc shorter than E."""
    E = threshold_E(mesh) if E is None else E
    N = edge_count(int(mesh.meta["h"]))
    unit = mesh.total_area / N
    rows = []
    for arc in arcs:
        if arc.length >= E:
            continue
        small = min(arc.areas)
        rows.append((arc.length, small, small <= factor * unit * arc.length))
    return rows


def resolved_faces(mesh: SurfaceMesh, rtol: float = 0.25) -> np.ndarray:
    """Faces whose stored area matches the geodesic triangle on their edge lengths.

    Near the rim the rings are coarse in angle, so a cell's exact area
    exceeds the triangle spanned by its chords; those faces are excluded.
    """
    K = float(mesh.meta["K"])
    ls = mesh.lengths[mesh.faces]
    geo = triangle_area(K, ls[:, 0], ls[:, 1], ls[:, 2])
    return np.abs(mesh.areas - geo) <= rtol * mesh.areas


def isoperimetric_samples(mesh: SurfaceMesh, rng: np.random.Generator, n: int = 60,
                          max_fraction: float = 0.05, rtol: float = 0.25):
    """Boundaries of random face clusters in the resolved region off the tree.

    Returns ``(length, fill, K)`` per cluster whose boundary is one loop.
    """
    K = float(mesh.meta["K"])
    tagged = np.array([bool(t) and t.startswith("tree:") for t in mesh.tags])
    fe = mesh.faces
    fv = mesh.face_vertices
    tree_verts = np.zeros(mesh.n_vertices, dtype=bool)
    tree_verts[mesh.edges[tagged].ravel()] = True
    good = resolved_faces(mesh, rtol) & ~tree_verts[fv].any(axis=1)
    ef = mesh.edge_faces
    pool = np.flatnonzero(good)
    out = []
    tries = 0
    M = float(mesh.areas[good].sum())
    while len(out) < n and tries < 50 * n and len(pool):
        tries += 1
        seed = int(pool[rng.integers(len(pool))])
        target = rng.uniform(0.002, max_fraction) * M
        region = [seed]
        inside = {seed}
        frontier = [seed]
        area = float(mesh.areas[seed])
        while frontier and area < target:
            f = frontier.pop(int(rng.integers(len(frontier))))
            for e in fe[f]:
                for g in ef[e]:
                    g = int(g)
                    if g >= 0 and good[g] and g not in inside:
                        inside.add(g)
                        region.append(g)
                        frontier.append(g)
                        area += float(mesh.areas[g])
        loops = boundary_loops(mesh, region)
        if len(loops) != 1:
            continue
        cyc = CyclePath(tuple(loops[0].edges), tuple(loops[0].vertices), loops[0].length)
        out.append((cyc.length, filling_area(mesh, cyc), K))
    return out


# --------------------------------------------------------------------------
# closing estimates


def area_gap_bound(h: int, m_prime: int, M_area: float) -> float:
    """Least possible ``| sum +-N(h_i) |M|/N(h) - |M|/2 |`` with ``m_prime`` terms, before slack."""
    if not 0 < m_prime < h:
        raise DomainError("need 0 < m_prime < h")
    return 1.5 * ((3 ** (h - m_prime) - 1) // 2) * M_area / edge_count(h)


def paper_length_bound(h: int, constants: LowerBoundConstants = LowerBoundConstants()) -> float:
    """Root L0 >= 0 of ``(8/3) L + log3(C1 (L + 1)) = h``."""
    if h < 1:
        raise DomainError("h must be >= 1")
    C1 = constants.C1

    def lhs(x):
        return 8.0 / 3.0 * x + math.log(C1 * (x + 1.0), 3)

    if lhs(0.0) >= h:
        return 0.0
    lo, hi = 0.0, 3.0 * h / 8.0 + 1.0
    while lhs(hi) < h:
        hi *= 2
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if lhs(mid) < h:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class Calibration:
    slack_per_arc: float  # smallest value covering every sampled long arc
    C1: float  # smallest C1 for which the closing inequality admits every observed cut
    arcs: int
    cuts: int


def calibrate(observations) -> Calibration:
    """Fit the constants from ``(mesh, cut, arcs)`` triples.

    ``slack_per_arc`` is the least value that covers the long-arc area
    predictions; ``C1`` is the least value for which every observed cut
    length satisfies ``(8/3)|c| + log3(C1 (|c| + 1)) >= h``.
    """
    slack = 0.0
    c1 = 0.0
    n_arcs = n_cuts = 0
    for mesh, cut, arcs in observations:
        h = int(mesh.meta["h"])
        E = threshold_E(mesh)
        for arc in arcs:
            if arc.length < E:
                continue
            pred = predict_long_arc_area(mesh, None, arc)
            slack = max(slack, pred.slack_needed)
            n_arcs += 1
        if cut is not None:
            c = cut.length
            c1 = max(c1, 3 ** (h - 8.0 / 3.0 * c) / (c + 1.0))
            n_cuts += 1
    return Calibration(slack, c1, n_arcs, n_cuts)
