"""Balanced separating cycles on closed meshes and filling areas.

A cut is a partition of the faces into two sides; its cycles are the edges
with one face on each side. ``exact_balanced_cut`` enumerates all partitions
of a small mesh. ``find_balanced_cut`` is a seeded multi-restart local search
over face moves that keep both sides connected.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import DomainError, HomologyError, InfeasibleError, SizeError
from .mesh import SurfaceMesh
from .metric import distances
from .topology import boundary_loops, components

EXACT_FACE_CAP = 18
DEFAULT_RESTARTS = 16
# faces at or below this count use a global connectivity test for moves the
# local test rejects
GLOBAL_CHECK_LIMIT = 400


@dataclass(frozen=True)
class CyclePath:
    """Closed edge walk; ``vertices`` has one more entry than ``edges`` and closes on itself."""

    edges: tuple[int, ...]
    vertices: tuple[int, ...]
    length: float

    @classmethod
    def from_edges(cls, mesh: SurfaceMesh, edges, start: int | None = None) -> "CyclePath":
        edges = tuple(int(e) for e in edges)
        if not edges:
            return cls((), (), 0.0)
        if start is None:
            a, b = (int(x) for x in mesh.edges[edges[0]])
            start = a
            if len(edges) > 1 and a not in mesh.edges[edges[1]]:
                pass
            elif len(edges) > 1:
                start = b if b not in mesh.edges[edges[1]] else a
        verts = [start]
        for e in edges:
            if verts[-1] not in mesh.edges[e]:
                raise DomainError(f"edge {e} does not continue the walk at vertex {verts[-1]}")
            verts.append(mesh.other_end(e, verts[-1]))
        if verts[-1] != verts[0]:
            raise DomainError("edge walk is not closed")
        return cls(edges, tuple(verts), math.fsum(mesh.lengths[list(edges)]))

    def check(self, mesh: SurfaceMesh) -> None:
        if not self.edges:
            return
        if self.vertices[0] != self.vertices[-1]:
            raise DomainError("cycle is not closed")
        for i, e in enumerate(self.edges):
            if {self.vertices[i], self.vertices[i + 1]} != {int(x) for x in mesh.edges[e]}:
                raise DomainError(f"edge {e} does not join its walk vertices")
        counts = np.bincount(np.asarray(self.edges), minlength=1)
        if counts.max() > 2:
            raise DomainError("an edge repeats more than twice")


def partition_boundary(mesh: SurfaceMesh, side_a) -> np.ndarray:
    """Edges with their two faces on different sides (sorted ids)."""
    mask = np.zeros(mesh.n_faces, dtype=bool)
    mask[np.asarray(list(side_a), dtype=np.int64)] = True
    ef = mesh.edge_faces
    two = (ef[:, 0] >= 0) & (ef[:, 1] >= 0)
    cut = two & (mask[ef[:, 0]] != mask[np.where(two, ef[:, 1], 0)])
    return np.flatnonzero(cut)


def cut_length(mesh: SurfaceMesh, side_a) -> float:
    return math.fsum(mesh.lengths[partition_boundary(mesh, side_a)])


@dataclass
class CutResult:
    faces_a: tuple[int, ...]
    faces_b: tuple[int, ...]
    cycles: list[CyclePath]
    length: float
    area_a: float
    area_b: float
    balance_dev: float
    seed: int | None = None
    certificate: dict = field(default_factory=dict)  # m_l, m_s, L_s when available

    @property
    def boundary_edges(self) -> list[int]:
        return sorted(e for c in self.cycles for e in c.edges)

    def to_dict(self, mesh: SurfaceMesh | None = None) -> dict:
        meta = mesh.meta if mesh is not None else {}
        k_or_side = meta.get("K", meta.get("side"))
        return {
            "variant": meta.get("variant"),
            "h": meta.get("h"),
            "K_or_side": None if k_or_side is None else float(k_or_side),
            "R": meta.get("R"),
            "seed": self.seed,
            "length": self.length,
            "areaA": self.area_a,
            "areaB": self.area_b,
            "balance_dev": self.balance_dev,
            "m_l": self.certificate.get("m_l"),
            "m_s": self.certificate.get("m_s"),
            "L_s": self.certificate.get("L_s"),
            "components": len(self.cycles),
            "faces_A": list(self.faces_a),
        }

    def to_json(self, mesh: SurfaceMesh | None = None) -> str:
        return json.dumps(self.to_dict(mesh), sort_keys=True)


def _canonical(mesh: SurfaceMesh, side_a) -> tuple[tuple[int, ...], tuple[int, ...]]:
    a = sorted(int(f) for f in side_a)
    b = sorted(set(range(mesh.n_faces)) - set(a))
    if b and (not a or b[0] < a[0]):
        a, b = b, a
    return tuple(a), tuple(b)


def cut_from_partition(mesh: SurfaceMesh, side_a, seed: int | None = None) -> CutResult:
    """Build a CutResult; side A is normalised to the side holding face 0."""
    a, b = _canonical(mesh, side_a)
    area_a = math.fsum(mesh.areas[list(a)]) if a else 0.0
    area_b = math.fsum(mesh.areas[list(b)]) if b else 0.0
    total = mesh.total_area
    cycles = []
    if a and b:
        for loop in boundary_loops(mesh, a):
            cycles.append(CyclePath(tuple(loop.edges), tuple(loop.vertices), loop.length))
    return CutResult(a, b, cycles, cut_length(mesh, a), area_a, area_b,
                     abs(area_a - total / 2), seed)


# --------------------------------------------------------------------------
# filling


def filling_area(mesh: SurfaceMesh, cycle) -> float:
    """Least area of a face set whose mod-2 boundary is the cycle.

    The boundary condition fixes the relative colour of the two faces of
    every edge; each free block of faces keeps the cheaper of its two
    colourings.
    """
    edges = cycle.edges if isinstance(cycle, CyclePath) else cycle
    odd = np.zeros(mesh.n_edges, dtype=np.int64)
    for e in edges:
        odd[int(e)] ^= 1
    if not odd.any():
        return 0.0
    ground = mesh.n_faces
    parent = list(range(mesh.n_faces + 1))
    parity = [0] * (mesh.n_faces + 1)  # colour relative to parent

    def find(x):
        path = []
        while parent[x] != x:
            path.append(x)
            x = parent[x]
        root = x
        acc = 0
        for y in reversed(path):
            acc ^= parity[y]
            parity[y] = acc
            parent[y] = root
        return root

    def union(x, y, p):
        rx, ry = find(x), find(y)
        px, py = parity[x] if x != rx else 0, parity[y] if y != ry else 0
        if rx == ry:
            if px ^ py != p:
                raise HomologyError("cycle is not a mod-2 boundary")
            return
        if ry == ground:
            rx, ry, px, py = ry, rx, py, px
        parent[ry] = rx
        parity[ry] = px ^ py ^ p

    ef = mesh.edge_faces
    for e in range(mesh.n_edges):
        f, g = int(ef[e, 0]), int(ef[e, 1])
        if g < 0:
            g = ground
        if f < 0:
            continue
        union(f, g, int(odd[e]))
    blocks: dict[int, list[float]] = {}
    for f in range(mesh.n_faces):
        r = find(f)
        c = parity[f] if f != r else 0
        blocks.setdefault(r, [0.0, 0.0])[c] += float(mesh.areas[f])
    total = 0.0
    for r, (a0, a1) in blocks.items():
        if r == ground:
            total += a1
        else:
            total += min(a0, a1)
    return total


# --------------------------------------------------------------------------
# exhaustive search


def _default_tol(mesh: SurfaceMesh, balance_tol):
    return 0.01 * mesh.total_area if balance_tol is None else float(balance_tol)


def _sides_connected(adj, mask: int, n: int) -> bool:
    full = (1 << n) - 1
    for part in (mask, full & ~mask):
        if part == 0:
            return False
        start = (part & -part).bit_length() - 1
        seen = 1 << start
        stack = [start]
        while stack:
            f = stack.pop()
            for g in adj[f]:
                bit = 1 << g
                if part & bit and not seen & bit:
                    seen |= bit
                    stack.append(g)
        if seen != part:
            return False
    return True


def exact_balanced_cut(mesh: SurfaceMesh, balance_tol: float | None = None,
                       cap: int = EXACT_FACE_CAP) -> CutResult:
    """Shortest cut over all partitions into two connected sides within the balance window."""
    F = mesh.n_faces
    if F > cap:
        raise SizeError(f"{F} faces exceed the exhaustive cap of {cap}")
    if F < 2:
        raise InfeasibleError("fewer than two faces")
    tol = _default_tol(mesh, balance_tol)
    total = mesh.total_area
    # face 0 always on side A: every partition appears once
    masks = (np.arange(1 << (F - 1), dtype=np.int64) << 1) | 1
    masks = masks[masks != (1 << F) - 1]
    bits = ((masks[:, None] >> np.arange(F)) & 1).astype(bool)
    area = bits @ mesh.areas
    ok = np.abs(area - total / 2) <= tol + 1e-12 * total
    if not ok.any():
        raise InfeasibleError("no partition meets the balance tolerance")
    masks, bits = masks[ok], bits[ok]
    ef = mesh.edge_faces
    inner = np.flatnonzero((ef[:, 0] >= 0) & (ef[:, 1] >= 0))
    length = np.zeros(len(masks))
    for e in inner:
        length += (bits[:, ef[e, 0]] != bits[:, ef[e, 1]]) * mesh.lengths[e]
    adj = [[] for _ in range(F)]
    for e in inner:
        f, g = int(ef[e, 0]), int(ef[e, 1])
        adj[f].append(g)
        adj[g].append(f)
    order = np.argsort(length, kind="stable")
    best = None
    for i in order:
        if best is not None and length[i] > best[0] + 1e-9 * max(best[0], 1.0):
            break
        m = int(masks[i])
        if not _sides_connected(adj, m, F):
            continue
        faces = [f for f in range(F) if m >> f & 1]
        cand = (cut_length(mesh, faces), tuple(faces))
        if best is None or cand < best:
            best = cand
    if best is None:
        raise InfeasibleError("no balanced partition has two connected sides")
    return cut_from_partition(mesh, best[1])


# --------------------------------------------------------------------------
# local search


class _Search:
    """Face-move local search state for one restart."""

    def __init__(self, mesh: SurfaceMesh, tol: float):
        self.mesh = mesh
        F = mesh.n_faces
        self.F = F
        self.tol = tol
        self.total = mesh.total_area
        ef = mesh.edge_faces
        fe = mesh.faces
        self.area = mesh.areas.tolist()
        L = mesh.lengths
        nbr = np.where(ef[fe, 0] == np.arange(F)[:, None], ef[fe, 1], ef[fe, 0])
        self.nbr = nbr.tolist()
        self.elen = L[fe].tolist()
        # vertex opposite each face edge
        fv = mesh.face_vertices
        E = mesh.edges
        opp = np.empty((F, 3), dtype=np.int64)
        for i in range(3):
            e = fe[:, i]
            a, b = E[e, 0], E[e, 1]
            opp[:, i] = np.where((fv[:, 0] != a) & (fv[:, 0] != b), fv[:, 0],
                                 np.where((fv[:, 1] != a) & (fv[:, 1] != b), fv[:, 1], fv[:, 2]))
        self.opp = opp.tolist()
        self.vfaces = [list(x) for x in mesh.vertex_faces]
        perim = L[fe].sum(axis=1)
        self.lam = 2.0 * float(np.quantile(perim / mesh.areas, 0.9))
        self.global_check = F <= GLOBAL_CHECK_LIMIT
        self.dual = None
        if self.global_check:
            self.dual = [[g for g in row if g >= 0] for row in self.nbr]

    # state ------------------------------------------------------------
    def load(self, side_mask: np.ndarray):
        side = side_mask.astype(np.int64).tolist()
        self.side = side
        self.count = [self.F - int(side_mask.sum()), int(side_mask.sum())]
        k = []
        length = 0.0
        for f in range(self.F):
            c = 0
            for g, l in zip(self.nbr[f], self.elen[f]):
                if g >= 0 and side[g] != side[f]:
                    c += 1
                    length += l
            k.append(c)
        self.k = k
        self.length = length / 2.0
        self.area_a = math.fsum(a for a, s in zip(self.area, side) if s == 1)
        self.bnd = [f for f in range(self.F) if k[f] > 0]
        self.pos = [-1] * self.F
        for i, f in enumerate(self.bnd):
            self.pos[f] = i

    def excess(self, area_a: float) -> float:
        return max(0.0, abs(area_a - self.total / 2) - self.tol)

    def feasible(self) -> bool:
        return abs(self.area_a - self.total / 2) <= self.tol + 1e-12 * self.total

    def _bnd_add(self, f):
        if self.pos[f] < 0:
            self.pos[f] = len(self.bnd)
            self.bnd.append(f)

    def _bnd_remove(self, f):
        i = self.pos[f]
        if i >= 0:
            last = self.bnd.pop()
            if last != f:
                self.bnd[i] = last
                self.pos[last] = i
            self.pos[f] = -1

    # moves ------------------------------------------------------------
    def valid(self, f: int) -> bool:
        s = self.side[f]
        if self.count[s] <= 1:
            return False
        kk = self.k[f]
        if kk == 2:
            return True
        if kk == 1:
            side = self.side
            nb = self.nbr[f]
            i = 0 if (nb[0] >= 0 and side[nb[0]] != s) else (1 if (nb[1] >= 0 and side[nb[1]] != s) else 2)
            if all(side[g] == s for g in self.vfaces[self.opp[f][i]]):
                return True
        if kk == 0 or not self.global_check:
            return False
        return self._connected_without(f)

    def _connected_without(self, f: int) -> bool:
        s = self.side[f]
        side = self.side
        start = next((g for g in self.dual[f] if side[g] == s), None)
        if start is None:
            return False
        seen = {f, start}
        stack = [start]
        while stack:
            x = stack.pop()
            for g in self.dual[x]:
                if side[g] == s and g not in seen:
                    seen.add(g)
                    stack.append(g)
        return len(seen) - 1 == self.count[s]

    def delta_length(self, f: int) -> float:
        s = self.side[f]
        d = 0.0
        for g, l in zip(self.nbr[f], self.elen[f]):
            if g >= 0:
                d += -l if self.side[g] != s else l
        return d

    def apply(self, f: int, dl: float):
        s = self.side[f]
        t = 1 - s
        self.side[f] = t
        self.count[s] -= 1
        self.count[t] += 1
        self.area_a += self.area[f] if t == 1 else -self.area[f]
        self.length += dl
        kf = 0
        for g in self.nbr[f]:
            if g < 0:
                continue
            if self.side[g] == t:
                self.k[g] -= 1
                if self.k[g] == 0:
                    self._bnd_remove(g)
            else:
                kf += 1
                self.k[g] += 1
                self._bnd_add(g)
        self.k[f] = kf
        if kf:
            self._bnd_add(f)
        else:
            self._bnd_remove(f)

    def area_after(self, f: int) -> float:
        return self.area_a + (self.area[f] if self.side[f] == 0 else -self.area[f])

    # best-state tracking ----------------------------------------------
    def record(self):
        if not self.feasible():
            return
        if self.best is None or self.length < self.best[0] - 1e-12 * max(self.best[0], 1.0):
            self.best = (self.length, list(self.side))

    def record_infeasible(self):
        key = (self.excess(self.area_a), self.length)
        if self.best_infeasible is None or key < self.best_infeasible[0]:
            self.best_infeasible = (key, list(self.side))

    # phases -----------------------------------------------------------
    def anneal(self, rng: np.random.Generator, iters: int, t0: float, t1: float):
        lam = self.lam
        chunk = 4096
        done = 0
        while done < iters:
            n = min(chunk, iters - done)
            picks = rng.random(n)
            coins = rng.random(n)
            for j in range(n):
                step = done + j
                T = t0 * (t1 / t0) ** (step / max(iters - 1, 1))
                bnd = self.bnd
                f = bnd[int(picks[j] * len(bnd))]
                if not self.valid(f):
                    continue
                dl = self.delta_length(f)
                na = self.area_after(f)
                delta = dl + lam * (self.excess(na) - self.excess(self.area_a))
                if delta <= 0 or coins[j] < math.exp(-delta / T):
                    self.apply(f, dl)
                    self.record()
            done += n

    def rebalance(self, max_moves: int | None = None):
        """Greedy moves from the heavier side until balanced."""
        max_moves = max_moves or self.F
        for _ in range(max_moves):
            if self.feasible():
                return
            heavy = 1 if self.area_a > self.total / 2 else 0
            best = None
            for f in self.bnd:
                if self.side[f] != heavy or not self.valid(f):
                    continue
                dl = self.delta_length(f)
                gain = abs(self.area_a - self.total / 2) - abs(self.area_after(f) - self.total / 2)
                if gain <= 0:
                    continue
                key = (dl / gain, f)
                if best is None or key < best[0]:
                    best = (key, f, dl)
            if best is None:
                return
            self.apply(best[1], best[2])
        self.record()

    def refine(self, passes: int = 4):
        """Fiduccia-Mattheyses passes on length plus balance penalty, keeping the best prefix."""
        lam = self.lam
        for _ in range(passes):
            start_obj = self.length + lam * self.excess(self.area_a)
            locked: set[int] = set()
            moves = []
            best_obj, best_len = start_obj, 0
            limit = max(8, min(len(self.bnd), 200))
            for _ in range(limit):
                cand = None
                for f in self.bnd:
                    if f in locked or not self.valid(f):
                        continue
                    dl = self.delta_length(f)
                    d = dl + lam * (self.excess(self.area_after(f)) - self.excess(self.area_a))
                    if cand is None or (d, f) < cand[0]:
                        cand = ((d, f), f, dl)
                if cand is None:
                    break
                f, dl = cand[1], cand[2]
                self.apply(f, dl)
                self.record()
                locked.add(f)
                moves.append((f, dl))
                obj = self.length + lam * self.excess(self.area_a)
                if obj < best_obj - 1e-12 * max(abs(best_obj), 1.0):
                    best_obj, best_len = obj, len(moves)
            for f, dl in reversed(moves[best_len:]):
                self.apply(f, -dl)
            if best_len == 0:
                break


def _dual_components(mesh: SurfaceMesh, mask: np.ndarray):
    ef = mesh.edge_faces
    two = (ef[:, 0] >= 0) & (ef[:, 1] >= 0)
    a, b = ef[two, 0], ef[two, 1]
    same = mask[a] == mask[b]
    a, b = a[same], b[same]
    F = mesh.n_faces
    g = sparse.coo_matrix((np.ones(len(a)), (a, b)), shape=(F, F))
    return csgraph.connected_components(g, directed=False)


def _make_connected(mesh: SurfaceMesh, mask: np.ndarray) -> np.ndarray:
    """Keep the largest component of each side, handing the rest across."""
    mask = mask.copy()
    for s in (True, False):
        n, lab = _dual_components(mesh, mask)
        side_labels = np.unique(lab[mask == s])
        if len(side_labels) <= 1:
            continue
        areas = np.bincount(lab, weights=mesh.areas, minlength=n)
        keep = side_labels[np.argmax(areas[side_labels])]
        move = (mask == s) & (lab != keep)
        mask[move] = not s
    return mask


def _level_set_starts(mesh: SurfaceMesh, rng: np.random.Generator, n_sources: int = 6):
    """Half-area sublevel sets of distance balls and bisectors from random sources."""
    fv = mesh.face_vertices
    src = rng.choice(mesh.n_vertices, size=min(n_sources, mesh.n_vertices), replace=False)
    D = np.asarray(distances(mesh, src))
    fields = [D[i][fv].mean(axis=1) for i in range(len(src))]
    fields += [fields[i] - fields[j] for i in range(len(src)) for j in range(i + 1, len(src))]
    half = mesh.total_area / 2
    out = []
    ef = mesh.edge_faces
    two = (ef[:, 0] >= 0) & (ef[:, 1] >= 0)
    for vals in fields:
        vals = vals + 1e-12 * rng.random(len(vals))
        order = np.argsort(vals, kind="stable")
        cum = np.cumsum(mesh.areas[order])
        k = int(np.searchsorted(cum, half))
        k = min(max(k, 1), mesh.n_faces - 1)
        if k > 1 and abs(cum[k - 2] - half) < abs(cum[k - 1] - half):
            k -= 1
        mask = np.zeros(mesh.n_faces, dtype=bool)
        mask[order[:k]] = True
        length = float(mesh.lengths[two & (mask[ef[:, 0]] != mask[np.where(two, ef[:, 1], 0)])].sum())
        out.append((length, mask))
    out.sort(key=lambda t: t[0])
    return out


def _hub_loops(mesh: SurfaceMesh, hub: int, keep: int = 80):
    """Short loops through ``hub`` with the face set each one encloses.

    With a shortest-path tree T from the hub, the edges outside T carry a
    spanning tree of the dual graph; the loop closed by a dual-tree edge
    bounds the dual subtree hanging below it. Returns ``(edge masks, face
    masks)`` for the shortest loops, one per band of enclosed area.
    """
    F, E = mesh.n_faces, mesh.n_edges
    d, pred = csgraph.dijkstra(mesh.graph, directed=False, indices=hub, return_predecessors=True)
    # tree edge per vertex: shortest edge to its predecessor
    ends = mesh.edges
    tree_edge = np.full(mesh.n_vertices, -1, dtype=np.int64)
    L = mesh.lengths
    for e in np.argsort(L, kind="stable")[::-1]:
        a, b = ends[e]
        if pred[b] == a:
            tree_edge[b] = e
        if pred[a] == b:
            tree_edge[a] = e
    in_tree = np.zeros(E, dtype=bool)
    in_tree[tree_edge[tree_edge >= 0]] = True
    ef = mesh.edge_faces
    co = np.flatnonzero(~in_tree & (ef[:, 0] >= 0) & (ef[:, 1] >= 0) & (ef[:, 0] != ef[:, 1]))
    g = sparse.coo_matrix((co + 1, (ef[co, 0], ef[co, 1])), shape=(F, F)).tocsr()
    g = g.maximum(g.T)
    order, fpred = csgraph.depth_first_order(g, 0, directed=False, return_predecessors=True)
    if len(order) != F:
        return [], []
    size = np.ones(F, dtype=np.int64)
    sub = mesh.areas.copy()
    for f in order[:0:-1]:
        size[fpred[f]] += size[f]
        sub[fpred[f]] += sub[f]
    tin = np.empty(F, dtype=np.int64)
    tin[order] = np.arange(F)
    child = order[1:]
    dual_edge = np.asarray(g[child, fpred[child]]).ravel().astype(np.int64) - 1
    u, v = ends[dual_edge, 0], ends[dual_edge, 1]
    approx = d[u] + d[v] + L[dual_edge]
    frac = sub[child] / mesh.total_area
    frac = np.minimum(frac, 1 - frac)
    band = np.round(frac * 500).astype(np.int64)
    pick = {}
    for i in np.lexsort((approx, band)):
        if band[i] > 0 and band[i] not in pick:
            pick[band[i]] = i
    chosen = sorted(pick.values(), key=lambda i: approx[i])[:keep]
    edge_masks, face_masks = [], []
    for i in chosen:
        em = np.zeros(E, dtype=bool)
        em[dual_edge[i]] = True
        for x in (u[i], v[i]):
            while x != hub:
                em[tree_edge[x]] ^= True
                x = pred[x]
        fm = np.zeros(F, dtype=bool)
        f = child[i]
        fm[order[tin[f]: tin[f] + size[f]]] = True
        edge_masks.append(em)
        face_masks.append(fm)
    return edge_masks, face_masks


def _loop_beam_starts(mesh: SurfaceMesh, tol: float, rng: np.random.Generator,
                      hubs: int = 2, width: int = 24, depth: int = 6):
    """Balanced face sets from XOR combinations of short hub loops."""
    total = mesh.total_area
    L, A = mesh.lengths, mesh.areas
    found = []
    for hub in rng.choice(mesh.n_vertices, size=min(hubs, mesh.n_vertices), replace=False):
        em, fm = _hub_loops(mesh, int(hub))
        if not em:
            continue
        EM, FM = np.array(em), np.array(fm)
        lens, areas = EM @ L, FM @ A
        beam = [(i,) for i in np.argsort(lens)[:width]]
        states = {b: (EM[b[0]], FM[b[0]]) for b in beam}
        for _ in range(depth):
            scored = []
            for key, (e, f) in states.items():
                ln, ar = float(e @ L), float(f @ A)
                dev = abs(ar - total / 2)
                if dev <= tol:
                    found.append((ln, f))
                scored.append((ln, dev, key))
            by_len = sorted(scored, key=lambda t: t[0] + 4.0 * max(0.0, t[1] - tol) / total * t[0])
            keepers = list(dict.fromkeys([k for *_, k in by_len[: width // 2]] +
                                         [k for *_, k in sorted(scored, key=lambda t: t[1])[: width // 2]]))
            nxt = {}
            for key in keepers:
                e, f = states[key]
                for j in range(len(em)):
                    if j in key:
                        continue
                    nk = tuple(sorted(key + (j,)))
                    if nk in nxt:
                        continue
                    nxt[nk] = (e ^ EM[j], f ^ FM[j])
            if not nxt:
                break
            # prune to the most promising expansions before the next round
            ranked = sorted(nxt, key=lambda k: (abs(float(nxt[k][1] @ A) - total / 2)
                                                 + float(nxt[k][0] @ L) * total / 8))
            states = {k: nxt[k] for k in ranked[: 4 * width]}
    found.sort(key=lambda t: t[0])
    return found


def _restart(mesh: SurfaceMesh, tol: float, budget: int, seed: int):
    rng = np.random.default_rng(seed)
    st = _Search(mesh, tol)
    st.best = None
    st.best_infeasible = None
    loops = _loop_beam_starts(mesh, tol, rng)
    levels = _level_set_starts(mesh, rng)
    picks = [mask for _, mask in loops[:3]] + [mask for _, mask in levels[:1]]
    per = max(1, budget // len(picks))
    mean_edge = float(np.mean(mesh.lengths))
    for mask in picks:
        mask = _make_connected(mesh, mask)
        if mask.all() or not mask.any():
            continue
        st.load(mask)
        st.record()
        st.rebalance()
        st.record()
        st.anneal(rng, per, t0=mean_edge, t1=1e-3 * mean_edge)
        st.refine()
        st.record()
        st.record_infeasible()
    if st.best is not None:
        st.load(np.asarray(st.best[1], dtype=bool))
        st.refine()
        st.record()
    if st.best is None:
        return None, st.best_infeasible
    side = st.best[1]
    faces = [f for f in range(mesh.n_faces) if side[f] == 1]
    a, _ = _canonical(mesh, faces)
    return (cut_length(mesh, a), a), None


def _workers(requested: int | None) -> int:
    cap = os.environ.get("TREEWIDTH_THREADS")
    n = requested if requested is not None else 1
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def find_balanced_cut(mesh: SurfaceMesh, balance_tol: float | None = None, budget: int | None = None,
                      seed: int = 0, restarts: int = DEFAULT_RESTARTS,
                      workers: int | None = None) -> CutResult:
    """Best balanced cut over ``restarts`` independent searches seeded ``seed + i``.

    ``budget`` is the annealing iteration count per restart. The winner is
    the shortest cut, ties broken by the lexicographically smallest side A,
    so the result does not depend on ``workers``.
    """
    if mesh.n_faces < 2:
        raise InfeasibleError("fewer than two faces")
    if len(components(mesh, range(mesh.n_faces))) != 1:
        raise DomainError("mesh is disconnected")
    tol = _default_tol(mesh, balance_tol)
    if budget is None:
        budget = max(20_000, 30 * mesh.n_faces)
    seeds = [seed + i for i in range(restarts)]
    n = _workers(workers)
    if n > 1 and restarts > 1:
        with ProcessPoolExecutor(max_workers=min(n, restarts)) as pool:
            results = list(pool.map(_restart, [mesh] * restarts, [tol] * restarts,
                                    [budget] * restarts, seeds))
    else:
        results = [_restart(mesh, tol, budget, s) for s in seeds]
    found = [r[0] for r in results if r[0] is not None]
    if not found:
        infeasible = [r[1] for r in results if r[1] is not None]
        best = None
        if infeasible:
            key, side = min(infeasible, key=lambda t: t[0])
            best = cut_from_partition(mesh, [f for f in range(mesh.n_faces) if side[f] == 1], seed)
        raise InfeasibleError("no balanced state found within the budget", best=best)
    length, faces = min(found)
    return cut_from_partition(mesh, faces, seed)
