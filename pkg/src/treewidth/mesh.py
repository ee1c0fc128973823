"""Triangulated surfaces described by edge lengths and face areas.

A mesh is combinatorial: faces reference three edge ids, edges reference two
vertex ids. Parallel edges (two edges joining the same vertices) are allowed,
since gluing constructions produce them. Coordinates are advisory only.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import ConstructionError, ValidationError


@dataclass
class SurfaceMesh:
    n_vertices: int
    edges: np.ndarray  # (E, 2) vertex ids
    lengths: np.ndarray  # (E,)
    faces: np.ndarray  # (F, 3) edge ids, consecutive edges share a vertex
    areas: np.ndarray  # (F,)
    tags: list = field(default_factory=list)  # per edge: str or None
    coords: np.ndarray | None = None
    meta: dict = field(default_factory=dict)
    # for complexes cut out of another mesh: vertex -> vertex of the parent mesh
    vertex_origin: np.ndarray | None = None
    edge_origin: np.ndarray | None = None

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.lengths = np.asarray(self.lengths, dtype=float)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        self.areas = np.asarray(self.areas, dtype=float)
        if not self.tags:
            self.tags = [None] * len(self.edges)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    @property
    def genus(self) -> float:
        return (2 - self.euler_characteristic) / 2

    @cached_property
    def face_vertices(self) -> np.ndarray:
        """(F, 3) vertex ids; vertex i sits between face edges i-1 and i."""
        out = np.empty((self.n_faces, 3), dtype=np.int64)
        E = self.edges
        for f, (e0, e1, e2) in enumerate(self.faces):
            trip = []
            for a, b in ((e2, e0), (e0, e1), (e1, e2)):
                common = set(E[a]) & set(E[b])
                if not common:
                    raise ConstructionError(f"face {f}: edges {a} and {b} share no vertex")
                trip.append(min(common))
            out[f] = trip
        return out

    @cached_property
    def edge_faces(self) -> np.ndarray:
        """(E, 2) incident faces per edge, -1 where missing."""
        out = np.full((self.n_edges, 2), -1, dtype=np.int64)
        fill = np.zeros(self.n_edges, dtype=np.int64)
        for f, tri in enumerate(self.faces):
            for e in tri:
                k = fill[e]
                if k < 2:
                    out[e, k] = f
                fill[e] += 1
        self._edge_face_count = fill
        return out

    @cached_property
    def edge_face_count(self) -> np.ndarray:
        self.edge_faces  # noqa: B018  populates the counter
        return self._edge_face_count

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        return np.flatnonzero(self.edge_face_count == 1)

    @cached_property
    def graph(self) -> sparse.csr_matrix:
        """Symmetric weighted adjacency; parallel edges keep the shortest length."""
        n = self.n_vertices
        u, v = self.edges[:, 0], self.edges[:, 1]
        w = self.lengths
        order = np.lexsort((w, np.minimum(u, v), np.maximum(u, v)))
        a, b = np.minimum(u, v)[order], np.maximum(u, v)[order]
        keep = np.ones(len(order), dtype=bool)
        keep[1:] = (a[1:] != a[:-1]) | (b[1:] != b[:-1])
        a, b, ww = a[keep], b[keep], w[order][keep]
        m = sparse.coo_matrix((np.r_[ww, ww], (np.r_[a, b], np.r_[b, a])), shape=(n, n))
        return m.tocsr()

    @cached_property
    def vertex_edges(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for e, (a, b) in enumerate(self.edges):
            out[a].append(e)
            if b != a:
                out[b].append(e)
        return out

    @cached_property
    def vertex_faces(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for f, tri in enumerate(self.face_vertices):
            for v in set(tri.tolist()):
                out[v].append(f)
        return out

    def other_end(self, e: int, v: int) -> int:
        a, b = self.edges[e]
        return int(b if a == v else a)

    def tagged_edges(self, prefix: str) -> dict[str, list[int]]:
        out: dict[str, list[int]] = {}
        for e, t in enumerate(self.tags):
            if t and t.startswith(prefix):
                out.setdefault(t, []).append(e)
        return out

    def tree_chains(self) -> dict[int, list[int]]:
        """Edge ids per tree-edge tag ``tree:k``."""
        return {int(t.split(":")[1]): es for t, es in self.tagged_edges("tree:").items()}

    def scaled(self, factor: float) -> "SurfaceMesh":
        """Copy with lengths scaled by ``factor`` and areas by ``factor**2``."""
        meta = dict(self.meta)
        meta["scale"] = _fmt(float(meta.get("scale", 1.0)) * factor)
        return replace(
            self,
            lengths=self.lengths * factor,
            areas=self.areas * factor * factor,
            coords=None if self.coords is None else self.coords * factor,
            tags=list(self.tags),
            meta=meta,
        )


# --------------------------------------------------------------------------
# construction from triangles on pre-vertices


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        if p != x:
            root = self.find(p)
            self.parent[x] = root
            return root
        return p

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


class MeshAssembler:
    """Collects triangles over pre-vertices, then glues pre-edges pairwise.

    Pre-edges are keyed by their (sorted) pre-vertex pair. Gluing a directed
    pre-edge ``(a, b)`` onto ``(c, d)`` identifies ``a~c``, ``b~d`` and the two
    edges. Parallel edges survive as distinct ids after gluing.
    """

    def __init__(self):
        self.triangles: list[tuple[int, int, int]] = []
        self.tri_areas: list[float] = []
        self.lengths: dict[tuple[int, int], float] = {}
        self.tags: dict[tuple[int, int], str] = {}
        self.coords: dict[int, tuple[float, float, float]] = {}
        self._vuf = _UnionFind()
        self._euf = _UnionFind()
        self._n = 0

    def vertex(self, xyz=None) -> int:
        v = self._n
        self._n += 1
        self._vuf.find(v)
        if xyz is not None:
            self.coords[v] = tuple(float(c) for c in xyz)
        return v

    @staticmethod
    def key(a, b):
        return (a, b) if a < b else (b, a)

    def set_length(self, a, b, length):
        k = self.key(a, b)
        old = self.lengths.get(k)
        if old is not None and not math.isclose(old, length, rel_tol=1e-9, abs_tol=1e-15):
            raise ConstructionError(f"pre-edge {k} given two lengths {old} and {length}")
        self.lengths[k] = float(length)

    def triangle(self, a, b, c, area, lengths=None):
        if lengths is not None:
            for (x, y), ln in zip(((a, b), (b, c), (c, a)), lengths):
                self.set_length(x, y, ln)
        self.triangles.append((a, b, c))
        self.tri_areas.append(float(area))

    def tag(self, a, b, tag):
        self.tags[self.key(a, b)] = tag

    def glue(self, a, b, c, d):
        k1, k2 = self.key(a, b), self.key(c, d)
        l1, l2 = self.lengths.get(k1), self.lengths.get(k2)
        if l1 is None or l2 is None:
            raise ConstructionError(f"gluing unknown pre-edges {k1}, {k2}")
        if not math.isclose(l1, l2, rel_tol=1e-9, abs_tol=1e-15):
            raise ConstructionError(f"glued pre-edges {k1}, {k2} differ in length: {l1} vs {l2}")
        self._vuf.union(a, c)
        self._vuf.union(b, d)
        self._euf.union(k1, k2)

    def build(self, meta=None) -> SurfaceMesh:
        vclass: dict[int, int] = {}
        for v in range(self._n):
            r = self._vuf.find(v)
            if r not in vclass:
                vclass[r] = len(vclass)
        vid = [vclass[self._vuf.find(v)] for v in range(self._n)]

        eclass: dict = {}
        edges, lengths, tags = [], [], []
        face_edges = []
        for a, b, c in self.triangles:
            tri = []
            for x, y in ((a, b), (b, c), (c, a)):
                k = self.key(x, y)
                if k not in self.lengths:
                    raise ConstructionError(f"pre-edge {k} has no length")
                r = self._euf.find(k)
                if r not in eclass:
                    eclass[r] = len(edges)
                    edges.append((vid[k[0]], vid[k[1]]))
                    lengths.append(self.lengths[r])
                    tags.append(self.tags.get(r) or self.tags.get(k))
                e = eclass[r]
                if tags[e] is None and k in self.tags:
                    tags[e] = self.tags[k]
                tri.append(e)
            face_edges.append(tri)
        coords = None
        if self.coords:
            coords = np.zeros((len(vclass), 3))
            for v in range(self._n - 1, -1, -1):
                if v in self.coords:
                    coords[vid[v]] = self.coords[v]
        return SurfaceMesh(
            n_vertices=len(vclass),
            edges=np.array(edges, dtype=np.int64).reshape(-1, 2),
            lengths=np.array(lengths),
            faces=np.array(face_edges, dtype=np.int64).reshape(-1, 3),
            areas=np.array(self.tri_areas),
            tags=tags,
            coords=coords,
            meta=dict(meta or {}),
        )


# --------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    euler_characteristic: int
    declared_genus: float | None
    genus_consistent: bool
    edge_face_counts: dict[int, int]
    bad_edges: list[int]
    triangle_violations: list[int]
    degenerate_faces: list[int]
    nonpositive: list[str]
    connected: bool
    area_consistent: bool

    @property
    def valid(self) -> bool:
        return (
            self.genus_consistent
            and not self.bad_edges
            and not self.triangle_violations
            and not self.degenerate_faces
            and not self.nonpositive
            and self.connected
            and self.area_consistent
        )

    def summary(self) -> str:
        lines = [
            f"valid={self.valid}",
            f"chi={self.euler_characteristic}",
            f"declared_genus={self.declared_genus}",
            f"genus_consistent={self.genus_consistent}",
            f"edge_face_counts={dict(sorted(self.edge_face_counts.items()))}",
            f"connected={self.connected}",
            f"triangle_violations={len(self.triangle_violations)}",
            f"degenerate_faces={len(self.degenerate_faces)}",
        ]
        if self.nonpositive:
            lines.append("nonpositive=" + ",".join(self.nonpositive))
        return "\n".join(lines)


def validate_mesh(mesh: SurfaceMesh, rtol: float = 1e-12) -> ValidationReport:
    """Check the closed-surface invariants; failures are reported, never raised."""
    counts = np.zeros(mesh.n_edges, dtype=np.int64)
    for tri in mesh.faces:
        for e in tri:
            counts[e] += 1
    bad_edges = np.flatnonzero(counts != 2).tolist()

    tri_viol, degenerate = [], []
    L = mesh.lengths
    for f, (e0, e1, e2) in enumerate(mesh.faces):
        if len({e0, e1, e2}) < 3:
            degenerate.append(f)
            continue
        verts = set(mesh.edges[e0]) | set(mesh.edges[e1]) | set(mesh.edges[e2])
        if len(verts) != 3 or any(mesh.edges[e][0] == mesh.edges[e][1] for e in (e0, e1, e2)):
            degenerate.append(f)
            continue
        a, b, c = sorted((L[e0], L[e1], L[e2]))
        if c > (a + b) * (1 + rtol):
            tri_viol.append(f)

    nonpositive = []
    if mesh.n_edges and not np.all(mesh.lengths > 0):
        nonpositive.append("lengths")
    if mesh.n_faces and not np.all(mesh.areas > 0):
        nonpositive.append("areas")

    connected = False
    if mesh.n_vertices:
        ncomp, _ = csgraph.connected_components(mesh.graph, directed=False)
        used = np.zeros(mesh.n_vertices, dtype=bool)
        used[mesh.edges.ravel()] = True
        connected = ncomp == 1 and bool(used.all())

    chi = mesh.euler_characteristic
    declared = mesh.meta.get("genus")
    declared_genus = float(declared) if declared is not None else None
    if declared_genus is None:
        genus_ok = chi % 2 == 0 and chi <= 2
    else:
        genus_ok = chi == 2 - 2 * declared_genus

    area_ok = True
    if "total_area" in mesh.meta:
        area_ok = math.isclose(float(mesh.meta["total_area"]), mesh.total_area, rel_tol=1e-9)

    return ValidationReport(
        euler_characteristic=chi,
        declared_genus=declared_genus,
        genus_consistent=genus_ok,
        edge_face_counts=dict(Counter(counts.tolist())),
        bad_edges=bad_edges,
        triangle_violations=tri_viol,
        degenerate_faces=degenerate,
        nonpositive=nonpositive,
        connected=connected,
        area_consistent=area_ok,
    )


def require_valid(mesh: SurfaceMesh) -> ValidationReport:
    report = validate_mesh(mesh)
    if not report.valid:
        raise ValidationError("mesh failed validation:\n" + report.summary(), report)
    return report


# --------------------------------------------------------------------------
# SMESH v1 text format


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps(mesh: SurfaceMesh) -> str:
    out = ["SMESH 1"]
    if mesh.meta:
        out.append("meta " + " ".join(f"{k}={v}" for k, v in mesh.meta.items()))
    out.append(f"vertices {mesh.n_vertices}")
    for v in range(mesh.n_vertices):
        if mesh.coords is not None:
            x, y, z = mesh.coords[v]
            out.append(f"v {v} {_fmt(x)} {_fmt(y)} {_fmt(z)}")
        else:
            out.append(f"v {v}")
    out.append(f"edges {mesh.n_edges}")
    for e, ((a, b), ln) in enumerate(zip(mesh.edges, mesh.lengths)):
        line = f"e {e} {a} {b} {_fmt(ln)}"
        if mesh.tags[e]:
            line += f" tag={mesh.tags[e]}"
        out.append(line)
    out.append(f"faces {mesh.n_faces}")
    for f, ((e0, e1, e2), ar) in enumerate(zip(mesh.faces, mesh.areas)):
        out.append(f"f {f} {e0} {e1} {e2} {_fmt(ar)}")
    return "\n".join(out) + "\n"


def loads(text: str) -> SurfaceMesh:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0].split() != ["SMESH", "1"]:
        raise ValueError("not an SMESH v1 file")
    meta: dict[str, str] = {}
    i = 1
    if lines[i].startswith("meta"):
        for tok in lines[i].split()[1:]:
            k, _, v = tok.partition("=")
            meta[k] = v
        i += 1

    def section(name):
        nonlocal i
        head = lines[i].split()
        if head[0] != name:
            raise ValueError(f"expected section {name!r}, got {lines[i]!r}")
        n = int(head[1])
        body = lines[i + 1 : i + 1 + n]
        i += 1 + n
        return body

    vbody = section("vertices")
    coords = None
    if vbody and len(vbody[0].split()) == 5:
        coords = np.array([[float(t) for t in ln.split()[2:5]] for ln in vbody])
    edges, lengths, tags = [], [], []
    for ln in section("edges"):
        toks = ln.split()
        edges.append((int(toks[2]), int(toks[3])))
        lengths.append(float(toks[4]))
        tag = None
        for t in toks[5:]:
            if t.startswith("tag="):
                tag = t[4:]
        tags.append(tag)
    faces, areas = [], []
    for ln in section("faces"):
        toks = ln.split()
        faces.append((int(toks[2]), int(toks[3]), int(toks[4])))
        areas.append(float(toks[5]))
    return SurfaceMesh(
        n_vertices=len(vbody),
        edges=np.array(edges, dtype=np.int64).reshape(-1, 2),
        lengths=np.array(lengths),
        faces=np.array(faces, dtype=np.int64).reshape(-1, 3),
        areas=np.array(areas),
        tags=tags,
        coords=coords,
        meta=meta,
    )


def save(mesh: SurfaceMesh, path) -> None:
    Path(path).write_text(dumps(mesh), encoding="utf-8")


def load(path) -> SurfaceMesh:
    return loads(Path(path).read_text(encoding="utf-8"))
