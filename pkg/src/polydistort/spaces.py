"""Uniform access to the three kinds of space: fans, general meshes, X_N.

A space knows where its points sit in R^3, how far apart they are
intrinsically, which candidate points to search by default, and how to
cut itself into small flat triangles for area estimates.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from typing import Any, NamedTuple, Sequence

import numpy as np

from .complex import ComplexMetric, ComplexPoint, EdgePoint, SkeletonSquareComplex, SquarePoint, Model
from .geometry import TriangleFan, TriangleMesh, mesh_area
from .intrinsic import FanMetric, SteinerGraph, SurfacePoint, fan_apex, fan_vertex, steiner_graph_distance

# covering radius of a triangle by its vertices is at most longest edge / sqrt(3)
_COVER = 1.0 / math.sqrt(3.0)


class CandidateSet(NamedTuple):
    points: list
    h: float  # every point of the space is within intrinsic distance h of some candidate


class Space(ABC):
    method: str = ""
    exact: bool = False

    @abstractmethod
    def position(self, p) -> np.ndarray: ...

    def positions(self, pts: Sequence) -> np.ndarray:
        return np.array([self.position(p) for p in pts], dtype=float).reshape(-1, 3)

    @abstractmethod
    def distances_from(self, p, qs: Sequence) -> np.ndarray: ...

    def distance(self, p, q) -> float:
        return float(self.distances_from(p, [q])[0])

    def prepare(self, pts: Sequence):
        """Targets for repeated ``distances_from`` calls; engines may precompute here."""
        return list(pts)

    def history(self, p, q) -> tuple[float, ...]:
        """Convergence history of the intrinsic estimate (one entry for exact engines)."""
        return (self.distance(p, q),)

    @property
    @abstractmethod
    def area(self) -> float: ...

    @abstractmethod
    def candidates(self) -> CandidateSet: ...

    @abstractmethod
    def sample(self, n: int) -> CandidateSet:
        """Deterministic sample refined ``n`` times per face (or per edge and square)."""

    @abstractmethod
    def area_pieces(self, n: int) -> tuple[list, np.ndarray]:
        """Points and index triples of flat triangles tiling the 2-D part."""

    def describe(self) -> dict[str, Any]:
        return {"method": self.method, "exact": self.exact}


def barycentric_grid(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric coordinates of an n-fold subdivided triangle and its small triangles."""
    idx = {}
    coords = []
    for i in range(n + 1):
        for j in range(n + 1 - i):
            idx[(i, j)] = len(coords)
            coords.append((n - i - j, i, j))
    tris = []
    for i in range(n):
        for j in range(n - i):
            tris.append((idx[(i, j)], idx[(i + 1, j)], idx[(i, j + 1)]))
            if i + j < n - 1:
                tris.append((idx[(i + 1, j)], idx[(i + 1, j + 1)], idx[(i, j + 1)]))
    return np.array(coords, dtype=float) / n, np.array(tris, dtype=np.int64)


class _TriangulatedSpace(Space):
    mesh: TriangleMesh

    def position(self, p: SurfacePoint) -> np.ndarray:
        return p.position(self.mesh)

    @property
    def area(self) -> float:
        return mesh_area(self.mesh)

    def _vertex_points(self) -> list[SurfacePoint]:
        raise NotImplementedError

    def candidates(self) -> CandidateSet:
        """Vertices followed by face barycenters."""
        pts = self._vertex_points()
        pts += [SurfacePoint(f, (1 / 3, 1 / 3, 1 / 3)) for f in range(self.mesh.n_faces)]
        return CandidateSet(pts, self._longest_edge() * _COVER)

    def sample(self, n: int) -> CandidateSet:
        pts, _ = self.area_pieces(n)
        return CandidateSet(pts, self._longest_edge() / n * _COVER)

    def area_pieces(self, n: int):
        bary, tris = barycentric_grid(max(int(n), 1))
        pts, out = [], []
        for f in range(self.mesh.n_faces):
            base = len(pts)
            pts += [SurfacePoint(f, tuple(b)) for b in bary]
            out.append(tris + base)
        return pts, np.vstack(out)

    def _longest_edge(self) -> float:
        V = self.mesh.vertices
        E = self.mesh.edges
        return float(np.linalg.norm(V[E[:, 0]] - V[E[:, 1]], axis=1).max())


class _Polar(NamedTuple):
    points: list
    t: np.ndarray
    phi: np.ndarray

    def __len__(self):
        return len(self.points)


class FanSpace(_TriangulatedSpace):
    """A fan with its exact development metric."""

    method = "exact-cone"
    exact = True

    def __init__(self, fan: TriangleFan):
        self.fan = fan
        self.mesh = fan.mesh
        self.metric = FanMetric(fan)
        self._polar: dict[SurfacePoint, tuple[float, float]] = {}

    def polar(self, p: SurfacePoint) -> tuple[float, float]:
        got = self._polar.get(p)
        if got is None:
            got = self._polar[p] = self.metric.polar(p)
        return got

    def prepare(self, pts):
        if isinstance(pts, _Polar):
            return pts
        tq = np.array([self.polar(q) for q in pts], dtype=float).reshape(-1, 2)
        return _Polar(list(pts), tq[:, 0], tq[:, 1])

    def distances_from(self, p, qs) -> np.ndarray:
        if not len(qs):
            return np.zeros(0)
        tq = self.prepare(qs)
        return self.metric.distances_from(self.polar(p), tq.t, tq.phi)

    def _vertex_points(self):
        return [fan_apex(self.fan)] + [fan_vertex(self.fan, i) for i in range(self.fan.k)]


class MeshSpace(_TriangulatedSpace):
    """A general mesh with the refined-graph engine (an upper estimate)."""

    method = "graph-upper+history"
    exact = False

    def __init__(self, mesh: TriangleMesh, level: int = 3):
        self.mesh = mesh
        self.level = int(level)
        self.graph = SteinerGraph(mesh, self.level)

    def distances_from(self, p, qs) -> np.ndarray:
        if not len(qs):
            return np.zeros(0)
        return self.graph.distances(p, list(qs))

    def history(self, p, q):
        return steiner_graph_distance(self.mesh, p, q, self.level).history

    def _vertex_points(self):
        out = []
        F = self.mesh.faces
        for v in range(self.mesh.n_vertices):
            f, c = np.argwhere(F == v)[0]
            b = [0.0, 0.0, 0.0]
            b[c] = 1.0
            out.append(SurfacePoint(int(f), tuple(b)))
        return out

    def describe(self):
        return {**super().describe(), "level": self.level}


class ComplexSpace(Space):
    """The X_N complex; ``exact`` gluing gives true intrinsic distances."""

    def __init__(self, X: SkeletonSquareComplex, model: Model = "exact"):
        self.X = X
        self.model = model
        self.metric = ComplexMetric(X, model)
        self.method = f"complex-{model}"
        self.exact = model == "exact"

    def position(self, p: ComplexPoint) -> np.ndarray:
        return self.X.position(p)

    def distances_from(self, p, qs) -> np.ndarray:
        if not len(qs):
            return np.zeros(0)
        return self.metric.distances_from(p, list(qs))

    @property
    def area(self) -> float:
        return self.X.total_square_area

    def candidates(self) -> CandidateSet:
        """Square centers, i.e. the grid vertices (the squares' barycenters)."""
        X = self.X
        pts = [SquarePoint(v, 0.5, 0.5) for v in range(X.n_vertices)]
        h = max(X.spacing / 2 if len(X.edges) else 0.0, X.side / math.sqrt(2))
        return CandidateSet(pts, h)

    def sample(self, n: int) -> CandidateSet:
        X = self.X
        n = max(int(n), 1)
        pts: list = []
        t = np.arange(1, n) / n
        for v, w in X.edges.tolist():
            pts += [EdgePoint(v, w, float(s)) for s in t]
        g = np.linspace(0.0, 1.0, n + 1)
        for v in range(X.n_vertices):
            pts += [SquarePoint(v, float(a), float(b)) for a in g for b in g]
        h = max(X.spacing / (2 * n) if len(X.edges) else 0.0, X.side / n / math.sqrt(2))
        return CandidateSet(pts, h)

    def area_pieces(self, n: int):
        n = max(int(n), 1)
        g = np.linspace(0.0, 1.0, n + 1)
        pts, tris = [], []
        for v in range(self.X.n_vertices):
            base = len(pts)
            pts += [SquarePoint(v, float(a), float(b)) for a in g for b in g]
            for i in range(n):
                for j in range(n):
                    a = base + i * (n + 1) + j
                    tris += [(a, a + n + 1, a + 1), (a + 1, a + n + 1, a + n + 2)]
        return pts, np.array(tris, dtype=np.int64)

    def describe(self):
        return {**super().describe(), "model": self.model, "N": self.X.N}


def space_for(obj, level: int = 3, model: Model = "exact") -> Space:
    if isinstance(obj, Space):
        return obj
    if isinstance(obj, TriangleFan):
        return FanSpace(obj)
    if isinstance(obj, TriangleMesh):
        return MeshSpace(obj, level)
    if isinstance(obj, SkeletonSquareComplex):
        return ComplexSpace(obj, model)
    raise TypeError(f"no space for {type(obj).__name__}")
