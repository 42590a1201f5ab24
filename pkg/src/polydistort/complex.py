"""Cube-grid 1-skeleton with a small square at every grid vertex.

Two metrics are available.  ``exact`` treats each square as a flat convex
piece glued to the skeleton along the grid edges lying in its plane, which
gives the true intrinsic distance.  ``center`` attaches a square to the
skeleton only at its center; it can only over-estimate distances.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

Model = Literal["exact", "center"]
_AXES = np.eye(3)


@dataclass(frozen=True)
class EdgePoint:
    """Point on the grid edge ``v1 -> v2`` at fraction ``t`` from ``v1``."""

    v1: int
    v2: int
    t: float


@dataclass(frozen=True)
class SquarePoint:
    """Point of the square at ``vertex`` with local coordinates ``u, v`` in [0, 1]."""

    vertex: int
    u: float
    v: float


ComplexPoint = Union[EdgePoint, SquarePoint]


@dataclass(frozen=True, eq=False)
class SkeletonSquareComplex:
    N: int
    normals: np.ndarray  # per-vertex axis (0, 1, 2) normal to its square

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")
        n = np.asarray(self.normals, dtype=np.int64).reshape(-1)
        if n.shape != (self.N**3,) or np.any((n < 0) | (n > 2)):
            raise ValueError(f"need one normal axis in {{0,1,2}} per vertex ({self.N**3})")
        n.setflags(write=False)
        object.__setattr__(self, "normals", n)

    @property
    def spacing(self) -> float:
        return 1.0 / self.N

    @property
    def side(self) -> float:
        return float(self.N) ** -1.25

    @property
    def n_vertices(self) -> int:
        return self.N**3

    def index(self, i: int, j: int, k: int) -> int:
        return (i * self.N + j) * self.N + k

    @cached_property
    def grid(self) -> np.ndarray:
        """Integer lattice coordinates of every vertex."""
        r = np.arange(self.N)
        return np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)

    @cached_property
    def vertices(self) -> np.ndarray:
        return self.grid / self.N

    @cached_property
    def edges(self) -> np.ndarray:
        """Grid edges ``(v, w)`` with ``w`` one step along an axis from ``v``."""
        out = []
        g = self.grid
        for a in range(3):
            ok = g[:, a] < self.N - 1
            v = np.flatnonzero(ok)
            step = (self.N ** (2 - a))
            out.append(np.column_stack([v, v + step]))
        return np.vstack(out) if out else np.zeros((0, 2), dtype=np.int64)

    def edge_axis(self, v: int, w: int) -> int:
        d = self.grid[w] - self.grid[v]
        if np.abs(d).sum() != 1:
            raise ValueError(f"({v}, {w}) is not a grid edge")
        return int(np.flatnonzero(d)[0])

    def in_plane_axes(self, v: int) -> tuple[int, int]:
        n = int(self.normals[v])
        return tuple(a for a in range(3) if a != n)

    @property
    def total_square_area(self) -> float:
        # side**2 = N**-2.5 taken directly; squaring the rounded side loses the last bit at N=4
        return self.N**3 * float(self.N) ** -2.5

    @property
    def skeleton_length(self) -> float:
        return len(self.edges) * self.spacing

    def position(self, p: ComplexPoint) -> np.ndarray:
        if isinstance(p, SquarePoint):
            if not 0 <= p.vertex < self.n_vertices or not (0 <= p.u <= 1 and 0 <= p.v <= 1):
                raise ValueError(f"{p} is not on the complex")
            a, b = self.in_plane_axes(p.vertex)
            return self.vertices[p.vertex] + self.side * ((p.u - 0.5) * _AXES[a] + (p.v - 0.5) * _AXES[b])
        if isinstance(p, EdgePoint):
            if not (0 <= p.v1 < self.n_vertices and 0 <= p.v2 < self.n_vertices) or not 0 <= p.t <= 1:
                raise ValueError(f"{p} is not on the complex")
            self.edge_axis(p.v1, p.v2)
            return self.vertices[p.v1] + p.t * (self.vertices[p.v2] - self.vertices[p.v1])
        raise TypeError(f"not a complex point: {p!r}")


def vertex_point(X: SkeletonSquareComplex, v: int) -> SquarePoint:
    return SquarePoint(v, 0.5, 0.5)


class ComplexMetric:
    """Shortest paths on the complex under the chosen gluing model."""

    def __init__(self, X: SkeletonSquareComplex, model: Model = "exact"):
        if model not in ("exact", "center"):
            raise ValueError(f"unknown model {model!r}")
        self.X = X
        self.model = model
        nv = X.n_vertices
        coords = list(X.vertices)
        self.square_nodes: dict[int, list[int]] = {v: [v] for v in range(nv)}
        self.exit_node: dict[tuple[int, int, int], int] = {}
        us, vs, ws = [], [], []
        s2 = X.side / 2
        if model == "exact":
            has = set()
            for v, w in X.edges.tolist():
                a = X.edge_axis(v, w)
                has.add((v, a, 1))
                has.add((w, a, -1))
            for v in range(nv):
                for a in X.in_plane_axes(v):
                    for sgn in (1, -1):
                        if (v, a, sgn) in has:
                            self.exit_node[(v, a, sgn)] = len(coords)
                            self.square_nodes[v].append(len(coords))
                            coords.append(X.vertices[v] + sgn * s2 * _AXES[a])
        self.coords = np.array(coords).reshape(-1, 3)
        if model == "exact":
            for v, nodes in self.square_nodes.items():
                for i in range(len(nodes)):
                    for j in range(i + 1, len(nodes)):
                        us.append(nodes[i])
                        vs.append(nodes[j])
        self.segments: dict[tuple[int, int], tuple[int, int]] = {}
        for v, w in X.edges.tolist():
            a = X.edge_axis(v, w)
            nv_end = self.exit_node.get((v, a, 1), v)
            nw_end = self.exit_node.get((w, a, -1), w)
            self.segments[(v, w)] = (nv_end, nw_end)
            us.append(nv_end)
            vs.append(nw_end)
        self.u = np.array(us, dtype=np.int64)
        self.v = np.array(vs, dtype=np.int64)
        self.w = np.linalg.norm(self.coords[self.u] - self.coords[self.v], axis=1)
        self._cell_cache: dict = {}

    def _cell(self, p: ComplexPoint):
        """(cell key, position, [(node, distance), ...]) for a point."""
        X = self.X
        x = X.position(p)
        if isinstance(p, SquarePoint):
            nodes = self.square_nodes[p.vertex]
            return ("sq", p.vertex), x, [(n, float(np.linalg.norm(self.coords[n] - x))) for n in nodes]
        v1, v2, t = p.v1, p.v2, p.t
        if v1 > v2:
            v1, v2, t = v2, v1, 1.0 - t
        a = X.edge_axis(v1, v2)
        h, s2 = X.spacing, X.side / 2
        if self.model == "exact":
            for v, along in ((v1, t * h), (v2, (1 - t) * h)):
                if a in X.in_plane_axes(v) and along <= s2:
                    nodes = self.square_nodes[v]
                    return ("sq", v), x, [(n, float(np.linalg.norm(self.coords[n] - x))) for n in nodes]
        n1, n2 = self.segments[(v1, v2)]
        return ("seg", v1, v2), x, [(n, float(np.linalg.norm(self.coords[n] - x))) for n in (n1, n2)]

    @cached_property
    def _graph(self):
        n = len(self.coords)
        return coo_matrix((self.w, (self.u, self.v)), shape=(n, n)).tocsr()

    def _attachments(self, qs):
        """Cell keys, positions, and (M, 5) attachment node / distance arrays, inf-padded."""
        cache = self._cell_cache
        cells = []
        for q in qs:
            c = cache.get(q)
            if c is None:
                c = cache[q] = self._cell(q)
            cells.append(c)
        M = len(cells)
        nodes = np.zeros((M, 5), dtype=np.int64)
        dist = np.full((M, 5), np.inf)
        for k, (_, _, att) in enumerate(cells):
            nodes[k, : len(att)] = [n for n, _ in att]
            dist[k, : len(att)] = [d for _, d in att]
        xyz = np.array([c[1] for c in cells]).reshape(-1, 3)
        return [c[0] for c in cells], xyz, nodes, dist

    def distances_from(self, p: ComplexPoint, qs: list[ComplexPoint]) -> np.ndarray:
        """Shortest path lengths from ``p`` to each of ``qs``.

        Query points hang off their cell's graph nodes by straight segments;
        cells are convex, so no shortest path passes through a query point
        and a search from p's attachment nodes suffices.
        """
        if not len(qs):
            return np.zeros(0)
        (key0,), x0, pn, pd = self._attachments([p])
        ok = np.isfinite(pd[0])
        src = pn[0][ok]
        D = dijkstra(self._graph, directed=False, indices=src)
        dp = (D + pd[0][ok][:, None]).min(axis=0)
        keys, xyz, qn, qd = self._attachments(qs)
        out = (dp[qn] + qd).min(axis=1)
        direct = np.linalg.norm(xyz - x0, axis=1)
        same = np.array([k == key0 for k in keys])
        out[same] = np.minimum(out[same], direct[same])
        out[direct == 0.0] = 0.0
        return out


def complex_distance(X: SkeletonSquareComplex, p: ComplexPoint, q: ComplexPoint, model: Model = "exact") -> float:
    return float(ComplexMetric(X, model).distances_from(p, [q])[0])


def sample_complex_points(X: SkeletonSquareComplex, n: int, rng: np.random.Generator) -> list[ComplexPoint]:
    """Half on grid edges (uniform by length), half in squares (uniform by area)."""
    pts: list[ComplexPoint] = []
    n_edge = n // 2 if len(X.edges) else 0
    if n_edge:
        e = rng.integers(len(X.edges), size=n_edge)
        t = rng.random(n_edge)
        pts += [EdgePoint(int(X.edges[i, 0]), int(X.edges[i, 1]), float(tt)) for i, tt in zip(e, t)]
    m = n - n_edge
    v = rng.integers(X.n_vertices, size=m)
    uv = rng.random((m, 2))
    pts += [SquarePoint(int(vi), float(a), float(b)) for vi, (a, b) in zip(v, uv)]
    return pts
