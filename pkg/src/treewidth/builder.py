"""Mesh constructions.

* ``hyperbolic``: a hyperbolic disc meshed by concentric rings whose
  boundary intervals are glued along the Euler tour of a ternary tree.
* ``flat_cone``: ``2N(h)`` flat equilateral triangles around one apex,
  outer sides glued along the same tour.
* reference surfaces: round sphere, flat torus, genus-g polygon gluing.

Edge lengths are exact distances of the underlying model between the two
endpoints. Face areas of the hyperbolic disc are exact areas of the ring
cells they tile (see ``_ring_cell_area``), so the total is the closed-form
disc area at every resolution.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import hyperbolic as hyp
from .errors import ConstructionError, DomainError
from .mesh import MeshAssembler, SurfaceMesh, _fmt
from .tree import build_tree, edge_count, euler_tour

VARIANTS = ("hyperbolic", "flat_cone", "round_sphere", "flat_torus", "genus_g")


@dataclass(frozen=True)
class BuildConfig:
    variant: str
    h: int = 1
    K: float | None = None  # hyperbolic; default select_curvature(h)
    side: float = 0.5  # flat_cone
    R: int = 4
    genus: int = 2  # genus_g
    normalize_diameter: bool = False
    r: float = 0.5
    collar: float = 0.25

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"unsupported variant {self.variant!r}")
        # R = 1 is admitted for the glued variants to produce tiny test meshes
        min_R = 1 if self.variant in ("hyperbolic", "flat_cone") else 2
        if self.R < min_R:
            raise DomainError(f"resolution R must be >= {min_R} for {self.variant}")
        if self.variant in ("hyperbolic", "flat_cone") and self.h < 1:
            raise DomainError("glued variants need h >= 1")
        if self.variant == "flat_cone" and not self.side > 0:
            raise DomainError("side must be positive")
        if self.variant == "genus_g" and self.genus < 1:
            raise DomainError("genus_g needs genus >= 1")


def build(cfg: BuildConfig) -> SurfaceMesh:
    if cfg.variant == "hyperbolic":
        mesh = build_glued_sphere(cfg)
    elif cfg.variant == "flat_cone":
        mesh = build_flat_cone(cfg)
    else:
        mesh = build_reference(cfg)
    if cfg.normalize_diameter:
        mesh = normalize_diameter(mesh)
    return mesh


# --------------------------------------------------------------------------
# gluing boundary intervals along the tree tour


def _glue_tour(asm: MeshAssembler, boundary: list[int], h: int, R: int):
    """Glue ``2N(h)`` intervals of ``R`` segments each along the Euler tour.

    ``boundary[t]`` is the pre-vertex at boundary position ``t`` (cyclic).
    Interval ``i`` runs over positions ``iR .. (i+1)R``; paired intervals are
    glued head-to-tail so that the quotient of the boundary is the tree.
    """
    tree = build_tree(h)
    tour = euler_tour(tree)
    n = len(boundary)
    if n != 2 * tree.n_edges * R:
        raise ConstructionError("boundary length does not match 2N(h)R")
    for i, step in enumerate(tour.steps):
        for t in range(R):
            a, b = boundary[i * R + t], boundary[(i * R + t + 1) % n]
            asm.tag(a, b, f"tree:{step.edge}")
    for i, j in enumerate(tour.pairing):
        if not tour.steps[i].edge == tour.steps[j].edge:
            raise ConstructionError("tour pairing joins different edges")
        if tour.steps[i].down == tour.steps[j].down:
            raise ConstructionError("paired intervals must have opposite orientation")
        if i > j:
            continue
        for t in range(R):
            a = boundary[(i * R + t) % n]
            b = boundary[(i * R + t + 1) % n]
            c = boundary[((j + 1) * R - t) % n]
            d = boundary[((j + 1) * R - t - 1) % n]
            asm.glue(a, b, c, d)
    return tree, tour


# --------------------------------------------------------------------------
# hyperbolic disc


def ring_counts(K: float, r: float, n_rings: int, n_outer: int) -> list[int]:
    """Vertices per ring: proportional to circumference, capped by the boundary count."""
    spacing = r / n_rings
    counts = [1]
    for j in range(1, n_rings + 1):
        if j == n_rings:
            counts.append(n_outer)
            continue
        c = hyp.circumference(K, r * j / n_rings)
        counts.append(int(min(n_outer, max(3, math.ceil(c / spacing)))))
    for j in range(n_rings - 1, 0, -1):
        counts[j] = min(counts[j], counts[j + 1])
    return counts


def _ring_cell_area(K, w_a, w_b, pts):
    """Area of a zipper triangle, via the area-preserving chart (phi, w).

    ``w = (cosh(K rho) - 1)`` makes the hyperbolic area element
    ``dw dphi / K**2``; triangles are measured as planar triangles in that
    chart, so each annulus is tiled exactly.
    """
    (p1, q1), (p2, q2), (p3, q3) = pts
    return abs((p2 - p1) * (q3 - q1) - (p3 - p1) * (q2 - q1)) / (2.0 * K * K)


def build_disc(K: float, r: float, n_outer: int, n_rings: int, asm: MeshAssembler | None = None):
    """Mesh a hyperbolic disc; returns ``(assembler, boundary pre-vertices)``.

    Ring ``j`` sits at radius ``r*j/n_rings``; consecutive rings are joined by
    merging their vertices in angular order.
    """
    asm = asm or MeshAssembler()
    counts = ring_counts(K, r, n_rings, n_outer)
    radii = [r * j / n_rings for j in range(n_rings + 1)]
    w = [2.0 * math.sinh(0.5 * K * rho) ** 2 if 0.5 * K * rho < 350 else math.inf for rho in radii]
    rings: list[list[int]] = []
    angles: list[list[float]] = []
    for j, n in enumerate(counts):
        ids, angs = [], []
        for k in range(n):
            phi = 2.0 * math.pi * k / n if j else 0.0
            rho = radii[j]
            # advisory coordinates: Poincare disc model
            t = math.tanh(0.5 * K * rho)
            ids.append(asm.vertex((t * math.cos(phi), t * math.sin(phi), 0.0)))
            angs.append(phi)
        rings.append(ids)
        angles.append(angs)

    def length(j1, k1, j2, k2):
        return hyp.distance(K, radii[j1], angles[j1][k1], radii[j2], angles[j2][k2])

    centre = rings[0][0]
    n1 = counts[1]
    for k in range(n1):
        k2 = (k + 1) % n1
        dphi = 2.0 * math.pi / n1
        area = dphi * w[1] / (K * K)
        asm.triangle(
            centre, rings[1][k], rings[1][k2], area,
            (length(0, 0, 1, k), length(1, k, 1, k2), length(1, k2, 0, 0)),
        )
    for j in range(1, n_rings):
        ja, jb = j, j + 1
        na, nb = counts[ja], counts[jb]
        i = m = 0
        while i < na or m < nb:
            next_a = 2.0 * math.pi * (i + 1) / na
            next_b = 2.0 * math.pi * (m + 1) / nb
            ia, ma = i % na, m % nb
            pa = (2.0 * math.pi * i / na, w[ja])
            pb = (2.0 * math.pi * m / nb, w[jb])
            if m >= nb or (i < na and next_a < next_b - 1e-12):
                i2 = (i + 1) % na
                pts = (pa, (next_a, w[ja]), pb)
                asm.triangle(
                    rings[ja][ia], rings[ja][i2], rings[jb][ma], _ring_cell_area(K, w[ja], w[jb], pts),
                    (length(ja, ia, ja, i2), length(ja, i2, jb, ma), length(jb, ma, ja, ia)),
                )
                i += 1
            else:
                m2 = (m + 1) % nb
                pts = (pa, pb, (next_b, w[jb]))
                asm.triangle(
                    rings[ja][ia], rings[jb][ma], rings[jb][m2], _ring_cell_area(K, w[ja], w[jb], pts),
                    (length(ja, ia, jb, ma), length(jb, ma, jb, m2), length(jb, m2, ja, ia)),
                )
                m += 1
    return asm, rings[-1]


def build_glued_sphere(cfg: BuildConfig) -> SurfaceMesh:
    """Hyperbolic disc of radius r with boundary glued onto a ternary tree."""
    h, R = cfg.h, cfg.R
    K_min = hyp.select_curvature(h, r=cfg.r, collar=cfg.collar)
    K = K_min if cfg.K is None else float(cfg.K)
    if K < K_min * (1 - 1e-9):
        warnings.warn(f"K={K} is below select_curvature({h})={K_min}; separation conditions may fail")
    N = edge_count(h)
    n_rings = max(1, math.ceil(cfg.r * R / cfg.collar - 1e-9))
    asm, boundary = build_disc(K, cfg.r, 2 * N * R, n_rings)
    _glue_tour(asm, boundary, h, R)
    spec = hyp.DiscSpec(K, cfg.r, cfg.collar)
    meta = {
        "variant": "hyperbolic",
        "h": str(h),
        "K": _fmt(K),
        "R": str(R),
        "r": _fmt(cfg.r),
        "collar": _fmt(cfg.collar),
        "genus": "0",
        "rings": str(n_rings),
    }
    mesh = asm.build(meta)
    mesh.meta["total_area"] = _fmt(mesh.total_area)
    if not math.isclose(mesh.total_area, hyp.disc_area(spec), rel_tol=1e-9):
        raise ConstructionError("ring cells do not tile the disc")
    return mesh


# --------------------------------------------------------------------------
# flat cone


def build_flat_cone(cfg: BuildConfig) -> SurfaceMesh:
    """Fan of ``2N(h)`` equilateral triangles of side s around a common apex."""
    h, R, s = cfg.h, cfg.R, cfg.side
    N = edge_count(h)
    n_wedges = 2 * N
    asm = MeshAssembler()
    apex = asm.vertex((0.0, 0.0, 0.0))
    step = s / R
    small_area = math.sqrt(3.0) / 4.0 * step * step
    # spoke k: points at distance t*s/R from the apex, shared by wedges k-1 and k
    spokes = []
    for k in range(n_wedges):
        phi = 2.0 * math.pi * k / n_wedges
        spokes.append([apex] + [asm.vertex((t * step * math.cos(phi), t * step * math.sin(phi), 0.0))
                                for t in range(1, R + 1)])
    boundary = []
    for k in range(n_wedges):
        left, right = spokes[k], spokes[(k + 1) % n_wedges]
        phi0 = 2.0 * math.pi * k / n_wedges
        phi1 = 2.0 * math.pi * (k + 1) / n_wedges
        # grid point (a, b): a steps along the left spoke, b along the right
        grid = {}
        for a in range(R + 1):
            for b in range(R + 1 - a):
                if b == 0:
                    grid[a, b] = left[a]
                elif a == 0:
                    grid[a, b] = right[b]
                else:
                    x = (a * math.cos(phi0) + b * math.cos(phi1)) * step
                    y = (a * math.sin(phi0) + b * math.sin(phi1)) * step
                    grid[a, b] = asm.vertex((x, y, 0.0))
        for a in range(R):
            for b in range(R - a):
                asm.triangle(grid[a, b], grid[a + 1, b], grid[a, b + 1], small_area, (step, step, step))
                if a + b + 2 <= R:
                    asm.triangle(grid[a + 1, b], grid[a + 1, b + 1], grid[a, b + 1], small_area,
                                 (step, step, step))
        boundary.extend(grid[R - b, b] for b in range(R))
    _glue_tour(asm, boundary, h, R)
    meta = {
        "variant": "flat_cone",
        "h": str(h),
        "side": _fmt(s),
        "R": str(R),
        "genus": "0",
    }
    mesh = asm.build(meta)
    mesh.meta["apex"] = "0"
    mesh.meta["total_area"] = _fmt(mesh.total_area)
    return mesh


# --------------------------------------------------------------------------
# reference surfaces


def _heron(a, b, c):
    s = 0.5 * (a + b + c)
    return math.sqrt(max(s * (s - a) * (s - b) * (s - c), 0.0))


def polyhedron_mesh(points, triangles, meta: dict | None = None) -> SurfaceMesh:
    """Mesh of a closed polyhedral surface: chordal edge lengths, Heron areas.

    Triangles sharing a vertex pair share that edge, so ``[(0, 1, 2), (0, 2, 1)]``
    is the two-face sphere.
    """
    pts = np.asarray(points, dtype=float)
    asm = MeshAssembler()
    ids = [asm.vertex(p) for p in pts]
    for a, b, c in triangles:
        ls = tuple(float(np.linalg.norm(pts[x] - pts[y])) for x, y in ((a, b), (b, c), (c, a)))
        asm.triangle(ids[a], ids[b], ids[c], _heron(*ls), ls)
    mesh = asm.build({"variant": "polyhedron", **(meta or {})})
    mesh.meta["total_area"] = _fmt(mesh.total_area)
    return mesh


def octahedron() -> SurfaceMesh:
    pts = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    tris = [(4, 0, 2), (4, 2, 1), (4, 1, 3), (4, 3, 0), (5, 2, 0), (5, 1, 2), (5, 3, 1), (5, 0, 3)]
    return polyhedron_mesh(pts, tris, {"genus": "0"})


def bipyramid(n: int, height: float = 1.0) -> SurfaceMesh:
    """Two cones over a regular n-gon of circumradius 1."""
    if n < 3:
        raise DomainError("bipyramid needs n >= 3")
    pts = [(math.cos(2 * math.pi * i / n), math.sin(2 * math.pi * i / n), 0.0) for i in range(n)]
    pts += [(0.0, 0.0, height), (0.0, 0.0, -height)]
    tris = [(n, i, (i + 1) % n) for i in range(n)] + [(n + 1, (i + 1) % n, i) for i in range(n)]
    return polyhedron_mesh(pts, tris, {"genus": "0"})


def _icosahedron():
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
             (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
             (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    v = np.array(verts, dtype=float)
    return v / np.linalg.norm(v, axis=1, keepdims=True), faces


def build_round_sphere(R: int) -> SurfaceMesh:
    """Icosahedron with each face split into R*R triangles, projected to the unit sphere."""
    base, faces = _icosahedron()
    asm = MeshAssembler()
    index: dict[tuple, int] = {}
    points: dict[int, np.ndarray] = {}

    def point(p):
        p = p / np.linalg.norm(p)
        key = tuple(np.round(p, 12))
        if key not in index:
            v = asm.vertex(p)
            index[key] = v
            points[v] = p
        return index[key]

    def chord(a, b):
        return float(np.linalg.norm(points[a] - points[b]))

    for i, j, k in faces:
        A, B, C = base[i], base[j], base[k]
        grid = {}
        for a in range(R + 1):
            for b in range(R + 1 - a):
                c = R - a - b
                grid[a, b] = point((c * A + a * B + b * C) / R)
        for a in range(R):
            for b in range(R - a):
                for tri in ((grid[a, b], grid[a + 1, b], grid[a, b + 1]),
                            (grid[a + 1, b], grid[a + 1, b + 1], grid[a, b + 1]) if a + b + 2 <= R else None):
                    if tri is None:
                        continue
                    x, y, z = tri
                    ls = (chord(x, y), chord(y, z), chord(z, x))
                    asm.triangle(x, y, z, _heron(*ls), ls)
    mesh = asm.build({"variant": "round_sphere", "R": str(R), "genus": "0"})
    mesh.meta["total_area"] = _fmt(mesh.total_area)
    return mesh


def build_flat_torus(R: int) -> SurfaceMesh:
    """Unit square torus: R x R grid of squares, each split along one diagonal."""
    asm = MeshAssembler()
    step = 1.0 / R
    grid = {(i, j): asm.vertex((i * step, j * step, 0.0)) for i in range(R + 1) for j in range(R + 1)}
    diag = math.sqrt(2.0) * step
    half = 0.5 * step * step
    for i in range(R):
        for j in range(R):
            a, b, c, d = grid[i, j], grid[i + 1, j], grid[i + 1, j + 1], grid[i, j + 1]
            asm.triangle(a, b, c, half, (step, step, diag))
            asm.triangle(a, c, d, half, (diag, step, step))
    for t in range(R):
        asm.glue(grid[0, t], grid[0, t + 1], grid[R, t], grid[R, t + 1])
        asm.glue(grid[t, 0], grid[t + 1, 0], grid[t, R], grid[t + 1, R])
    mesh = asm.build({"variant": "flat_torus", "R": str(R), "genus": "1"})
    mesh.meta["total_area"] = _fmt(mesh.total_area)
    return mesh


def build_genus_surface(g: int, R: int) -> SurfaceMesh:
    """Regular 4g-gon (circumradius 1) glued by a1 b1 a1^-1 b1^-1 ... ag bg ag^-1 bg^-1.

    The polygon is fanned from its centre; each fan triangle is split into
    R*R triangles with Euclidean lengths.
    """
    n = 4 * g
    asm = MeshAssembler()
    corners = [np.array([math.cos(2 * math.pi * k / n), math.sin(2 * math.pi * k / n)]) for k in range(n)]
    centre = asm.vertex((0.0, 0.0, 0.0))
    pos = {centre: np.zeros(2)}

    def vert(p):
        v = asm.vertex((p[0], p[1], 0.0))
        pos[v] = p
        return v

    spokes = [[centre] + [vert(corners[k] * t / R) for t in range(1, R + 1)] for k in range(n)]
    sides = []
    for k in range(n):
        left, right = spokes[k], spokes[(k + 1) % n]
        P, Q = corners[k], corners[(k + 1) % n]
        grid = {}
        for a in range(R + 1):
            for b in range(R + 1 - a):
                if b == 0:
                    grid[a, b] = left[a]
                elif a == 0:
                    grid[a, b] = right[b]
                else:
                    grid[a, b] = vert((a * P + b * Q) / R)

        def dist(x, y):
            return float(np.linalg.norm(pos[x] - pos[y]))

        for a in range(R):
            for b in range(R - a):
                tris = [(grid[a, b], grid[a + 1, b], grid[a, b + 1])]
                if a + b + 2 <= R:
                    tris.append((grid[a + 1, b], grid[a + 1, b + 1], grid[a, b + 1]))
                for x, y, z in tris:
                    ls = (dist(x, y), dist(y, z), dist(z, x))
                    asm.triangle(x, y, z, _heron(*ls), ls)
        sides.append([grid[R - b, b] for b in range(R + 1)])
    for i in range(g):
        for s_from, s_to in ((4 * i, 4 * i + 2), (4 * i + 1, 4 * i + 3)):
            A, B = sides[s_from], sides[s_to]
            for t in range(R):
                asm.glue(A[t], A[t + 1], B[R - t], B[R - t - 1])
    mesh = asm.build({"variant": "genus_g", "R": str(R), "genus": str(g)})
    mesh.meta["total_area"] = _fmt(mesh.total_area)
    return mesh


def build_reference(cfg: BuildConfig) -> SurfaceMesh:
    if cfg.variant == "round_sphere":
        return build_round_sphere(cfg.R)
    if cfg.variant == "flat_torus":
        return build_flat_torus(cfg.R)
    if cfg.variant == "genus_g":
        return build_genus_surface(cfg.genus, cfg.R)
    raise DomainError(f"build_reference does not handle variant {cfg.variant!r}")


def normalize_diameter(mesh: SurfaceMesh, target: float = 1.0) -> SurfaceMesh:
    """Scale lengths so the graph diameter equals ``target``."""
    from .metric import diameter

    d = diameter(mesh).diameter
    if not d > 0:
        raise DomainError("cannot normalise a mesh of diameter 0")
    out = mesh.scaled(target / d)
    out.meta["normalized_diameter"] = _fmt(target)
    if "total_area" in out.meta:
        out.meta["total_area"] = _fmt(out.total_area)
    return out
