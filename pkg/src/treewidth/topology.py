"""Combinatorial topology on meshes: umbrellas, cutting, face-set regions."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import ConstructionError
from .mesh import SurfaceMesh


def corner_edges(mesh: SurfaceMesh, f: int, v: int) -> tuple[int, int]:
    """The two edges of face f incident to its vertex v."""
    es = [int(e) for e in mesh.faces[f] if v in mesh.edges[e]]
    if len(es) != 2:
        raise ConstructionError(f"face {f} does not have exactly two edges at vertex {v}")
    return es[0], es[1]


def umbrella(mesh: SurfaceMesh, v: int) -> list[tuple[list[int], list[int], bool]]:
    """Fans of faces around v as ``(edges, faces, closed)``.

    Face ``faces[i]`` lies between ``edges[i]`` and ``edges[i+1]``; a closed
    fan repeats its first edge at the end. Manifold vertices have one fan.
    """
    ef = mesh.edge_faces
    faces = mesh.vertex_faces[v]
    seen: set[int] = set()
    fans = []
    at_v = {f: corner_edges(mesh, f, v) for f in faces}

    def other_face(e, f):
        a, b = ef[e]
        if a == f:
            return int(b)
        return int(a)

    def walk(f0, e0):
        edges, fs = [e0], []
        f, e = f0, e0
        while True:
            fs.append(f)
            seen.add(f)
            e1, e2 = at_v[f]
            e = e2 if e1 == e else e1
            edges.append(e)
            g = other_face(e, f)
            if g < 0 or g not in at_v:
                return edges, fs, False
            if g == f0 and e == e0:
                return edges, fs, True
            if g in seen:
                return edges, fs, g == f0
            f = g

    # open fans first: start at a boundary edge
    for f in faces:
        for e in at_v[f]:
            if f not in seen and other_face(e, f) < 0:
                fans.append(walk(f, e))
    for f in faces:
        if f not in seen:
            fans.append(walk(f, at_v[f][0]))
    return fans


def cut_along(mesh: SurfaceMesh, cut_edges) -> SurfaceMesh:
    """Cut a mesh open along a set of edges.

    Each vertex splits into one copy per sector of its umbrella between cut
    edges; each cut edge with two faces becomes two boundary edges. Face ids
    and face areas are preserved.
    """
    cut = set(int(e) for e in cut_edges)
    corner: dict[tuple[int, int], int] = {}
    origin = []
    for v in range(mesh.n_vertices):
        for edges, faces, closed in umbrella(mesh, v):
            k = len(faces)
            if closed:
                starts = [i for i in range(k) if edges[i] in cut]
                if not starts:
                    nid = len(origin)
                    origin.append(v)
                    for f in faces:
                        corner[f, v] = nid
                    continue
                s = starts[0]
                order = list(range(s, k)) + list(range(0, s))
            else:
                order = list(range(k))
            nid = None
            for i in order:
                if nid is None or edges[i] in cut:
                    nid = len(origin)
                    origin.append(v)
                corner[faces[i], v] = nid
    ef = mesh.edge_faces
    new_edges, lengths, tags, e_origin = [], [], [], []
    face_edges = np.array(mesh.faces)
    old = mesh.faces
    for e in range(mesh.n_edges):
        a, b = (int(x) for x in mesh.edges[e])
        incident = [int(f) for f in ef[e] if f >= 0]
        groups = [incident] if (e not in cut or len(incident) < 2) else [[f] for f in incident]
        for grp in groups:
            f = grp[0]
            ne = len(new_edges)
            new_edges.append((corner[f, a], corner[f, b]))
            lengths.append(mesh.lengths[e])
            tags.append(mesh.tags[e] or ("seam" if e in cut else None))
            e_origin.append(e)
            for g in grp:
                face_edges[g][old[g] == e] = ne
    out = SurfaceMesh(
        n_vertices=len(origin),
        edges=np.array(new_edges, dtype=np.int64),
        lengths=np.array(lengths),
        faces=face_edges,
        areas=mesh.areas.copy(),
        tags=tags,
        coords=None if mesh.coords is None else mesh.coords[np.array(origin)],
        meta={**mesh.meta, "cut_from": mesh.meta.get("variant", "mesh")},
        vertex_origin=np.array(origin, dtype=np.int64),
        edge_origin=np.array(e_origin, dtype=np.int64),
    )
    return out


# --------------------------------------------------------------------------
# face-set regions


def face_adjacency(mesh: SurfaceMesh) -> list[list[tuple[int, int]]]:
    """Per face: (neighbour face, shared edge) for each interior edge."""
    ef = mesh.edge_faces
    out: list[list[tuple[int, int]]] = [[] for _ in range(mesh.n_faces)]
    for e in range(mesh.n_edges):
        a, b = int(ef[e, 0]), int(ef[e, 1])
        if a >= 0 and b >= 0 and a != b:
            out[a].append((b, e))
            out[b].append((a, e))
    return out


def components(mesh: SurfaceMesh, faces, blocked_edges=()) -> list[list[int]]:
    """Connected components of a face set across edges not in ``blocked_edges``."""
    inside = set(int(f) for f in faces)
    blocked = set(int(e) for e in blocked_edges)
    adj = face_adjacency(mesh) if not hasattr(mesh, "_adj_cache") else mesh._adj_cache
    mesh._adj_cache = adj
    seen: set[int] = set()
    comps = []
    for f0 in sorted(inside):
        if f0 in seen:
            continue
        comp = [f0]
        seen.add(f0)
        q = deque([f0])
        while q:
            f = q.popleft()
            for g, e in adj[f]:
                if g in inside and g not in seen and e not in blocked:
                    seen.add(g)
                    comp.append(g)
                    q.append(g)
        comps.append(sorted(comp))
    return comps


def region_boundary(mesh: SurfaceMesh, faces) -> list[int]:
    """Edges with exactly one incident face in the region (mesh boundary edges included)."""
    inside = np.zeros(mesh.n_faces, dtype=bool)
    inside[list(faces)] = True
    ef = mesh.edge_faces
    a = np.where(ef[:, 0] >= 0, inside[ef[:, 0]], False)
    b = np.where(ef[:, 1] >= 0, inside[ef[:, 1]], False)
    return np.flatnonzero(a ^ b).tolist()


@dataclass
class Loop:
    """A closed edge walk: ``vertices[i]`` and ``vertices[i+1]`` bound ``edges[i]``."""

    edges: list[int]
    vertices: list[int]
    length: float


def boundary_loops(mesh: SurfaceMesh, faces) -> list[Loop]:
    """Boundary components of a face region, pairing edges through region faces at pinches."""
    inside = np.zeros(mesh.n_faces, dtype=bool)
    inside[list(faces)] = True
    ef = mesh.edge_faces
    bset = set(region_boundary(mesh, faces))
    used: set[int] = set()
    loops = []

    def inner_face(e):
        for f in ef[e]:
            if f >= 0 and inside[f]:
                return int(f)
        raise ConstructionError("boundary edge without an inside face")

    def next_edge(e, v):
        # rotate around v through inside faces until another boundary edge
        f = inner_face(e)
        cur = e
        for _ in range(4 * len(mesh.vertex_faces[v]) + 4):
            e1, e2 = corner_edges(mesh, f, v)
            nxt = e2 if e1 == cur else e1
            if nxt in bset:
                return nxt
            a, b = (int(x) for x in ef[nxt])
            f = b if a == f else a
            cur = nxt
        raise ConstructionError("rotation around a vertex did not close")

    for e0 in sorted(bset):
        if e0 in used:
            continue
        start = int(mesh.edges[e0][0])
        edges, verts = [], [start]
        e, v = e0, start
        while True:
            used.add(e)
            edges.append(e)
            v = mesh.other_end(e, v)
            verts.append(v)
            e = next_edge(e, v)
            if e == e0 and v == start:
                break
            if e in used:
                break
        loops.append(Loop(edges, verts, float(mesh.lengths[edges].sum())))
    return loops


def region_euler_characteristic(mesh: SurfaceMesh, faces) -> int:
    fs = np.asarray(sorted(set(int(f) for f in faces)), dtype=np.int64)
    if len(fs) == 0:
        return 0
    n_e = len(np.unique(mesh.faces[fs]))
    n_v = len(np.unique(mesh.face_vertices[fs]))
    return n_v - n_e + len(fs)


def _n_components(mesh: SurfaceMesh, mask: np.ndarray) -> int:
    ef = mesh.edge_faces
    two = (ef[:, 0] >= 0) & (ef[:, 1] >= 0)
    a, b = ef[two, 0], ef[two, 1]
    keep = mask[a] & mask[b]
    F = mesh.n_faces
    g = sparse.coo_matrix((np.ones(int(keep.sum())), (a[keep], b[keep])), shape=(F, F))
    n, lab = csgraph.connected_components(g, directed=False)
    return len(np.unique(lab[mask]))


def is_disc(mesh: SurfaceMesh, faces, require_complement_connected: bool = True) -> bool:
    """Region is a closed disc: connected, chi = 1, boundary a single simple cycle.

    A connected region with chi = 1 whose boundary vertices all have boundary
    degree 2 is an orientable surface of genus 0 with one boundary circle.
    """
    mask = np.zeros(mesh.n_faces, dtype=bool)
    mask[np.asarray(list(faces), dtype=np.int64)] = True
    if not mask.any():
        return False
    if _n_components(mesh, mask) != 1:
        return False
    if region_euler_characteristic(mesh, np.flatnonzero(mask)) != 1:
        return False
    bnd = region_boundary(mesh, np.flatnonzero(mask))
    if not bnd:
        return False
    deg = np.bincount(mesh.edges[bnd].ravel(), minlength=mesh.n_vertices)
    if np.any(deg[deg > 0] != 2):
        return False
    if require_complement_connected and not mask.all():
        if _n_components(mesh, ~mask) != 1:
            return False
    return True
