"""Ternary trees, their Euler tours, and paths between points on edges.

Every vertex above the last level gets three children, so the root has
degree 3 and other internal vertices degree 4; this is the attachment rule
that yields ``3 * (3**h - 1) / 2`` edges. Vertices are numbered in
breadth-first order with the root at 0, children in ascending order. Edge ``k`` joins ``parent[k + 1]`` to vertex ``k + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .errors import DomainError


def edge_count(h: int) -> int:
    """Number of edges ``3 * (3**h - 1) // 2`` of the ternary tree of height h."""
    if h < 0:
        raise DomainError("tree height must be >= 0")
    return 3 * (3**h - 1) // 2


@dataclass(frozen=True)
class TernaryTree:
    height: int
    parent: tuple[int, ...]  # parent[0] == -1
    children: tuple[tuple[int, ...], ...]
    depth: tuple[int, ...]

    root: int = 0

    @property
    def n_vertices(self) -> int:
        return len(self.parent)

    @property
    def n_edges(self) -> int:
        return len(self.parent) - 1

    def edge_vertices(self, edge: int) -> tuple[int, int]:
        """(parent vertex, child vertex) of an edge."""
        child = edge + 1
        return self.parent[child], child

    def parent_edge(self, vertex: int) -> int:
        if vertex == self.root:
            raise DomainError("the root has no parent edge")
        return vertex - 1

    def vertex_edges(self, vertex: int) -> list[int]:
        edges = [c - 1 for c in self.children[vertex]]
        if vertex != self.root:
            edges.insert(0, vertex - 1)
        return edges

    def adjacent(self, e1: int, e2: int) -> bool:
        """True when two distinct edges share a vertex."""
        return e1 != e2 and bool(set(self.edge_vertices(e1)) & set(self.edge_vertices(e2)))


def build_tree(h: int) -> TernaryTree:
    """Ternary tree of height h (three children per non-leaf vertex)."""
    if h < 0:
        raise DomainError("tree height must be >= 0")
    parent = [-1]
    depth = [0]
    children: list[list[int]] = [[]]
    frontier = [0]
    for level in range(1, h + 1):
        nxt = []
        for v in frontier:
            for _ in range(3):
                c = len(parent)
                parent.append(v)
                depth.append(level)
                children.append([])
                children[v].append(c)
                nxt.append(c)
        frontier = nxt
    return TernaryTree(
        height=h,
        parent=tuple(parent),
        children=tuple(tuple(c) for c in children),
        depth=tuple(depth),
    )


@dataclass(frozen=True)
class TourStep:
    edge: int
    down: bool  # True when moving from parent to child
    start: int  # vertex at the start of the step
    end: int


@dataclass(frozen=True)
class EulerTour:
    """Closed depth-first tour; step ``i`` is boundary interval ``i`` of the glued disc."""

    steps: tuple[TourStep, ...]
    pairing: tuple[int, ...]
    # relative orientation of paired intervals; always reversed for a tree tour
    reversed_pair: tuple[bool, ...] = field(default=())

    def __len__(self):
        return len(self.steps)

    @cached_property
    def first_step(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for i, s in enumerate(self.steps):
            out.setdefault(s.edge, i)
        return out


def euler_tour(tree: TernaryTree) -> EulerTour:
    if tree.height == 0:
        raise DomainError("a tree of height 0 has an empty tour")
    steps: list[TourStep] = []

    def visit(v):
        stack = [(v, iter(tree.children[v]))]
        while stack:
            u, it = stack[-1]
            c = next(it, None)
            if c is None:
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    steps.append(TourStep(u - 1, False, u, p))
                continue
            steps.append(TourStep(c - 1, True, u, c))
            stack.append((c, iter(tree.children[c])))

    visit(tree.root)
    pairing = [-1] * len(steps)
    seen: dict[int, int] = {}
    for i, s in enumerate(steps):
        if s.edge in seen:
            j = seen[s.edge]
            pairing[i], pairing[j] = j, i
        else:
            seen[s.edge] = i
    return EulerTour(tuple(steps), tuple(pairing), tuple(True for _ in steps))


def subtree_edge_count(tree: TernaryTree, edge: int) -> int:
    """Number of edges strictly below the child vertex of ``edge``."""
    if not 0 <= edge < tree.n_edges:
        raise DomainError(f"no edge {edge}")
    _, child = tree.edge_vertices(edge)
    count = 0
    stack = list(tree.children[child])
    while stack:
        v = stack.pop()
        count += 1
        stack.extend(tree.children[v])
    return count


@dataclass(frozen=True)
class TreePoint:
    """A point on ``edge`` at ``offset`` in [0, 1] measured from the parent end."""

    edge: int
    offset: float


@dataclass(frozen=True)
class TreePath:
    vertices: tuple[int, ...]  # tree vertices passed, in order (may be empty)
    whole_edges: tuple[int, ...]
    partial: tuple[tuple[int, float, float], ...]  # (edge, from_offset, to_offset)
    length: float  # in edge units

    @property
    def k(self) -> int:
        return len(self.whole_edges)


def _exits(tree: TernaryTree, p: TreePoint):
    """Ways to leave point p: (vertex, partial length, partial piece)."""
    par, child = tree.edge_vertices(p.edge)
    if p.offset <= 0.0:
        return [(par, 0.0, None)]
    if p.offset >= 1.0:
        return [(child, 0.0, None)]
    return [
        (par, p.offset, (p.edge, p.offset, 0.0)),
        (child, 1.0 - p.offset, (p.edge, p.offset, 1.0)),
    ]


def _vertex_path(tree: TernaryTree, u: int, v: int) -> list[int]:
    left, right = [u], [v]
    while left[-1] != right[-1]:
        a, b = left[-1], right[-1]
        if tree.depth[a] >= tree.depth[b]:
            left.append(tree.parent[a])
        else:
            right.append(tree.parent[b])
    return left + right[-2::-1]


def point_depth(tree: TernaryTree, p: TreePoint) -> float:
    par, _ = tree.edge_vertices(p.edge)
    return tree.depth[par] + p.offset


def tree_path(tree: TernaryTree, a: TreePoint, b: TreePoint) -> TreePath:
    """Unique simple path in the tree between two edge points."""
    for p in (a, b):
        if not (0 <= p.edge < tree.n_edges and 0.0 <= p.offset <= 1.0):
            raise DomainError(f"invalid tree point {p}")
    if a.edge == b.edge:
        return TreePath((), (), ((a.edge, a.offset, b.offset),) if a.offset != b.offset else (),
                        abs(a.offset - b.offset))
    best = None
    for va, la, pa in _exits(tree, a):
        for vb, lb, pb in _exits(tree, b):
            verts = _vertex_path(tree, va, vb)
            whole = []
            for x, y in zip(verts, verts[1:]):
                whole.append((x if tree.depth[x] > tree.depth[y] else y) - 1)
            # a simple path never re-enters the edge carrying an endpoint
            if (pa is not None and a.edge in whole) or (pb is not None and b.edge in whole):
                continue
            length = la + lb + len(whole)
            parts = []
            if pa is not None:
                parts.append(pa)
            if pb is not None:
                parts.append((pb[0], pb[2], pb[1]))
            cand = (length, len(whole), TreePath(tuple(verts), tuple(whole), tuple(parts), length))
            if best is None or cand[:2] < best[:2]:
                best = cand
    return best[2]
