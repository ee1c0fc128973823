"""Graph-geodesic distances on a mesh.

Distances are shortest paths in the edge graph. They overestimate the
geodesic distance of the underlying surface; accuracy comes from resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csgraph

from .errors import DomainError, UnreachableError
from .mesh import SurfaceMesh

# relative slack when comparing path lengths that should be equal
TIE_RTOL = 1e-12


def distances(mesh: SurfaceMesh, sources, multi_source: bool = False) -> np.ndarray:
    """Dijkstra from one or several sources; rows per source unless ``multi_source``."""
    idx = np.atleast_1d(np.asarray(sources, dtype=np.int64))
    if multi_source:
        return csgraph.dijkstra(mesh.graph, directed=False, indices=idx, min_only=True)
    return csgraph.dijkstra(mesh.graph, directed=False, indices=idx)


def shortest_path(mesh: SurfaceMesh, u: int, v: int) -> tuple[list[int], float]:
    """Shortest edge path from u to v.

    Among equal-length paths the lexicographically smallest vertex sequence
    wins; among parallel edges the smallest edge id.
    """
    for x in (u, v):
        if not 0 <= x < mesh.n_vertices:
            raise DomainError(f"vertex {x} not in mesh")
    if u == v:
        return [], 0.0
    dt = distances(mesh, v)[0]
    if not math.isfinite(dt[u]):
        raise UnreachableError(f"{v} is unreachable from {u}")
    L = mesh.lengths
    path = []
    x = u
    while x != v:
        best = None
        for e in mesh.vertex_edges[x]:
            y = mesh.other_end(e, x)
            if abs(L[e] + dt[y] - dt[x]) <= TIE_RTOL * max(dt[x], 1.0) and dt[y] < dt[x]:
                cand = (y, e)
                if best is None or cand < best:
                    best = cand
        if best is None:  # pragma: no cover - guards against inconsistent rounding
            raise UnreachableError("shortest-path reconstruction failed")
        path.append(best[1])
        x = best[0]
    return path, float(dt[u])


def path_vertices(mesh: SurfaceMesh, start: int, edges: list[int]) -> list[int]:
    verts = [start]
    for e in edges:
        verts.append(mesh.other_end(e, verts[-1]))
    return verts


@dataclass
class MetricSummary:
    diameter: float
    witness: tuple[int, int]
    eccentricity: dict[int, float] = field(default_factory=dict)
    approximate: bool = False
    upper_bound: float | None = None
    sources_searched: int = 0


def eccentricities(mesh: SurfaceMesh, sources=None, chunk: int = 256) -> np.ndarray:
    """Exact eccentricities of ``sources`` (default: all vertices)."""
    idx = np.arange(mesh.n_vertices) if sources is None else np.asarray(sources, dtype=np.int64)
    out = np.empty(len(idx))
    for s in range(0, len(idx), chunk):
        d = distances(mesh, idx[s : s + chunk])
        if not np.all(np.isfinite(d)):
            raise UnreachableError("mesh is disconnected")
        out[s : s + chunk] = d.max(axis=1)
    return out


def diameter(mesh: SurfaceMesh, approximate: bool | None = None, batch: int = 4) -> MetricSummary:
    """Exact graph diameter over vertices.

    Eccentricity bounds ``max(d(v,w), ecc(w) - d(v,w)) <= ecc(v) <= ecc(w) + d(v,w)``
    from every searched source ``w`` prune vertices that cannot exceed the
    current lower bound; the search stops when none remain, so the value is
    exact and independent of the source order. Above 200k vertices the
    default is an approximate mode (double sweep lower bound plus one
    landmark upper bound), flagged in the result.
    """
    n = mesh.n_vertices
    if n == 0:
        raise DomainError("empty mesh")
    if approximate is None:
        approximate = n > 200_000
    if approximate:
        return _approximate_diameter(mesh)
    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    done = np.zeros(n, dtype=bool)
    ecc: dict[int, float] = {}
    best, witness = -1.0, (0, 0)
    # start from a peripheral vertex found by one sweep from vertex 0
    d0 = distances(mesh, 0)[0]
    if not np.all(np.isfinite(d0)):
        raise UnreachableError("mesh is disconnected")
    pending = [int(np.argmax(d0)), 0]
    while True:
        srcs = [s for s in pending if not done[s]]
        if not srcs:
            break
        D = distances(mesh, srcs)
        for s, row in zip(srcs, D):
            e = float(row.max())
            done[s] = True
            ecc[s] = e
            lo[s] = hi[s] = e
            if e > best:
                best = e
                witness = (s, int(np.argmax(row)))
            np.maximum(lo, np.maximum(row, e - row), out=lo)
            np.minimum(hi, e + row, out=hi)
        open_ = (~done) & (hi > best * (1 + 1e-12) + 1e-15)
        if not open_.any():
            break
        cand = np.flatnonzero(open_)
        # alternate between the largest upper bound and the smallest lower bound
        by_hi = cand[np.lexsort((cand, -hi[cand]))][: batch // 2 or 1]
        by_lo = cand[np.lexsort((cand, lo[cand]))][: batch // 2 or 1]
        pending = list(dict.fromkeys(by_hi.tolist() + by_lo.tolist()))
    a, b = witness
    return MetricSummary(best, (min(a, b), max(a, b)), ecc, False, best, len(ecc))


def _approximate_diameter(mesh: SurfaceMesh) -> MetricSummary:
    d0 = distances(mesh, 0)[0]
    a = int(np.argmax(d0))
    da = distances(mesh, a)[0]
    b = int(np.argmax(da))
    db = distances(mesh, b)[0]
    lower = float(max(da.max(), db.max()))
    # landmark upper bound: every distance is at most ecc(m) + ecc(m)
    mid = int(np.argmin(np.maximum(da, db)))
    dm = distances(mesh, mid)[0]
    upper = float(2.0 * dm.max())
    return MetricSummary(lower, (min(a, b), max(a, b)), {a: float(da.max()), b: float(db.max())},
                         True, upper, 4)


def chain_vertices(mesh: SurfaceMesh, tag: str) -> list[int]:
    es = [e for e, t in enumerate(mesh.tags) if t == tag]
    if not es:
        raise DomainError(f"no edge carries tag {tag!r}")
    return sorted({int(v) for e in es for v in mesh.edges[e]})


def edge_set_distance(mesh: SurfaceMesh, tag_a, tag_b) -> float:
    """Minimum graph distance between the vertex sets of two tagged chains."""
    ta = tag_a if isinstance(tag_a, str) else f"tree:{tag_a}"
    tb = tag_b if isinstance(tag_b, str) else f"tree:{tag_b}"
    va, vb = chain_vertices(mesh, ta), chain_vertices(mesh, tb)
    if set(va) & set(vb):
        return 0.0
    d = distances(mesh, va, multi_source=True)
    return float(np.min(np.asarray(d)[vb]))


def chain_distance_table(mesh: SurfaceMesh) -> dict[tuple[int, int], float]:
    """Distances between all pairs of tree-edge chains (one search per chain)."""
    chains = {k: sorted({int(v) for e in es for v in mesh.edges[e]}) for k, es in mesh.tree_chains().items()}
    keys = sorted(chains)
    out = {}
    for i, a in enumerate(keys):
        d = np.asarray(distances(mesh, chains[a], multi_source=True))
        for b in keys[i + 1 :]:
            out[a, b] = 0.0 if set(chains[a]) & set(chains[b]) else float(d[chains[b]].min())
    return out
