"""Embedded polyhedral objects: triangle meshes, triangle fans and balls.

Points are plain ``numpy`` arrays of shape ``(3,)``; sequences of points
are ``(n, 3)`` float arrays.  All objects are immutable after construction
and every transform returns a new object.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

DEGENERACY_RATIO = 1e-14


class MeshError(ValueError):
    """Raised when mesh data violates a structural invariant."""


def as_point3(p) -> np.ndarray:
    a = np.asarray(p, dtype=float).reshape(-1)
    if a.shape != (3,):
        raise ValueError(f"expected 3 coordinates, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite coordinate in {a}")
    return a


def as_points(points) -> np.ndarray:
    a = np.asarray(points, dtype=float)
    if a.ndim != 2 or a.shape[1] != 3:
        raise ValueError(f"expected an (n, 3) point array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite coordinate in point array")
    return a


def triangle_areas(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=-1)


def vector_angle(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Angle between vectors, stable near 0 and pi."""
    cross = np.linalg.norm(np.cross(u, v), axis=-1)
    dot = np.sum(u * v, axis=-1)
    return np.arctan2(cross, dot)


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("ball radius must be non-negative")

    def contains(self, points, tol: float = 1e-12) -> bool:
        d = np.linalg.norm(np.atleast_2d(points) - self.center, axis=1)
        return bool(np.all(d <= self.radius * (1 + tol) + tol))


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Validated simplicial surface.  Build through :func:`build_mesh`."""

    vertices: np.ndarray
    faces: np.ndarray
    edge_faces: dict = field(repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted index pairs, in a stable order."""
        return np.array(sorted(self.edge_faces), dtype=np.int64).reshape(-1, 2)

    @cached_property
    def boundary_edges(self) -> list[tuple[int, int]]:
        return [e for e, fs in sorted(self.edge_faces.items()) if len(fs) == 1]

    @cached_property
    def face_areas(self) -> np.ndarray:
        v = self.vertices[self.faces]
        return triangle_areas(v[:, 0], v[:, 1], v[:, 2])

    def face_points(self, face: int) -> np.ndarray:
        return self.vertices[self.faces[face]]

    def transformed(self, scale: float = 1.0, shift=(0.0, 0.0, 0.0)) -> "TriangleMesh":
        """Return ``scale * (vertices + shift)`` with the same combinatorics."""
        v = (self.vertices + np.asarray(shift, dtype=float)) * scale
        return build_mesh(v, self.faces)


def build_mesh(vertices, faces) -> TriangleMesh:
    """Validate vertex/face data and compute edge adjacency.

    Raises
    ------
    MeshError
        On an out-of-range or repeated index, a duplicate or degenerate face,
        or an edge shared by more than two faces.
    """
    v = as_points(vertices)
    f = np.asarray(faces, dtype=np.int64)
    if f.size == 0:
        f = f.reshape(0, 3)
    if f.ndim != 2 or f.shape[1] != 3:
        raise MeshError(f"faces must be index triples, got shape {f.shape}")

    n = len(v)
    edge_faces: dict[tuple[int, int], list[int]] = {}
    seen: dict[tuple[int, ...], int] = {}
    for fi, (i, j, k) in enumerate(f.tolist()):
        for idx in (i, j, k):
            if not 0 <= idx < n:
                raise MeshError(f"face {fi} index {idx} out of range [0, {n})")
        if len({i, j, k}) < 3:
            raise MeshError(f"face {fi} has a repeated index: {(i, j, k)}")
        key = tuple(sorted((i, j, k)))
        if key in seen:
            raise MeshError(f"face {fi} duplicates face {seen[key]}")
        seen[key] = fi
        for a, b in ((i, j), (j, k), (k, i)):
            e = (a, b) if a < b else (b, a)
            edge_faces.setdefault(e, []).append(fi)

    for e, fs in edge_faces.items():
        if len(fs) > 2:
            raise MeshError(f"non-manifold edge {e} shared by faces {fs}")

    if len(f):
        p = v[f]
        areas = triangle_areas(p[:, 0], p[:, 1], p[:, 2])
        lengths = np.linalg.norm(p - np.roll(p, 1, axis=1), axis=2)
        bad = np.flatnonzero((areas < DEGENERACY_RATIO * lengths.max(axis=1) ** 2) | (areas == 0))
        if bad.size:
            fi = int(bad[0])
            raise MeshError(f"degenerate face {fi}: {tuple(f[fi])} area {areas[fi]:.3g}")

    v.setflags(write=False)
    f.setflags(write=False)
    return TriangleMesh(v, f, {e: tuple(fs) for e, fs in edge_faces.items()})


def mesh_area(mesh: TriangleMesh) -> float:
    return float(mesh.face_areas.sum())


def extrinsic_diameter(points) -> float:
    p = as_points(points)
    if len(p) < 2:
        return 0.0
    from scipy.spatial.distance import pdist

    return float(pdist(p).max())


@dataclass(frozen=True, eq=False)
class TriangleFan:
    """Triangles sharing an apex, glued along consecutive apex rays.

    ``boundary[i]`` is the link vertex y_i; face ``i`` is the triangle
    (apex, y_i, y_{i+1}), with y_k identified with y_0 when ``closed``.
    """

    apex: np.ndarray
    boundary: np.ndarray
    closed: bool

    def __post_init__(self):
        apex = as_point3(self.apex)
        b = as_points(self.boundary)
        object.__setattr__(self, "apex", apex)
        object.__setattr__(self, "boundary", b)
        apex.setflags(write=False)
        b.setflags(write=False)
        k = len(b)
        if k < 2 or (self.closed and k < 3):
            raise ValueError(f"fan needs at least {3 if self.closed else 2} boundary vertices")
        if np.any(self.radii <= 0):
            raise ValueError("degenerate fan: a boundary vertex coincides with the apex")
        th = self.angles
        if np.any(th <= 0) or np.any(th >= np.pi):
            i = int(np.flatnonzero((th <= 0) | (th >= np.pi))[0])
            raise ValueError(f"apex angle of face {i} is {th[i]!r}, outside (0, pi)")

    @property
    def k(self) -> int:
        return len(self.boundary)

    @property
    def n_faces(self) -> int:
        return self.k if self.closed else self.k - 1

    @cached_property
    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.boundary - self.apex, axis=1)

    @cached_property
    def angles(self) -> np.ndarray:
        d = self.boundary - self.apex
        nxt = np.roll(d, -1, axis=0)[: self.n_faces]
        return vector_angle(d[: self.n_faces], nxt)

    @cached_property
    def cumulative(self) -> np.ndarray:
        """Developed angle of each y_i; length k+1 for closed fans (y_k = y_0)."""
        return np.concatenate([[0.0], np.cumsum(self.angles)])

    @property
    def total_angle(self) -> float:
        return float(self.angles.sum())

    @property
    def R(self) -> float:
        return float(self.radii.max())

    @property
    def is_triangular(self) -> bool:
        r = self.radii
        return bool(np.ptp(r) <= 1e-9 * r.max())

    def face(self, i: int) -> tuple[int, int]:
        """Boundary indices (i, i+1 mod k) of face ``i``."""
        if not 0 <= i < self.n_faces:
            raise IndexError(f"face {i} out of range")
        return i, (i + 1) % self.k

    @cached_property
    def mesh(self) -> TriangleMesh:
        """Vertex 0 is the apex; vertex i+1 is y_i."""
        k = self.k
        faces = [(0, i + 1, (i + 1) % k + 1) for i in range(self.n_faces)]
        return build_mesh(np.vstack([self.apex, self.boundary]), faces)

    def extended(self, R: float | None = None) -> "TriangleFan":
        """Push every y_i along its apex ray to distance ``R`` (default max radius)."""
        R = self.R if R is None else float(R)
        d = (self.boundary - self.apex) / self.radii[:, None]
        return TriangleFan(self.apex, self.apex + R * d, self.closed)

    def scaled_about_apex(self, lam: float) -> "TriangleFan":
        return TriangleFan(self.apex, self.apex + lam * (self.boundary - self.apex), self.closed)


def vertex_star_fan(mesh: TriangleMesh, vertex: int) -> TriangleFan:
    """Collect the faces around ``vertex`` into a fan with that vertex as apex.

    The link is walked across shared edges, so the boundary vertices come out
    in cyclic order.  Raises ``MeshError`` when the star is not a single fan.
    """
    if not 0 <= vertex < mesh.n_vertices:
        raise MeshError(f"vertex {vertex} out of range")
    star = [fi for fi, f in enumerate(mesh.faces.tolist()) if vertex in f]
    if not star:
        raise MeshError(f"vertex {vertex} has no incident faces")

    # each incident face contributes a link edge (a, b)
    link = {}
    for fi in star:
        a, b = [x for x in mesh.faces[fi].tolist() if x != vertex]
        link[fi] = (a, b)
    nbrs: dict[int, list[int]] = {}
    for a, b in link.values():
        nbrs.setdefault(a, []).append(b)
        nbrs.setdefault(b, []).append(a)

    ends = [v for v, ns in nbrs.items() if len(ns) == 1]
    if any(len(ns) > 2 for ns in nbrs.values()) or len(ends) not in (0, 2):
        raise MeshError(f"star of vertex {vertex} is not a single fan")
    closed = not ends
    start = min(ends) if ends else min(nbrs)
    order, prev = [start], None
    while True:
        cur = order[-1]
        nxt = sorted(x for x in nbrs[cur] if x != prev)
        if not nxt or nxt[0] == start:
            break
        prev = cur
        order.append(nxt[0])
        if len(order) > len(nbrs):
            break
    if len(order) != len(nbrs):
        raise MeshError(f"star of vertex {vertex} has several components")
    return TriangleFan(mesh.vertices[vertex], mesh.vertices[order], closed)


def minimal_enclosing_ball(points) -> Ball:
    """Smallest enclosing ball by randomized incremental construction.

    The visiting order is a fixed shuffle, so results are reproducible.
    The reported radius is the exact max distance to the computed center.
    """
    p = as_points(points)
    if len(p) == 0:
        raise ValueError("minimal enclosing ball of an empty set")
    p = np.unique(p, axis=0)
    order = np.random.default_rng(0x5EED).permutation(len(p))
    p = p[order]
    scale = max(float(np.abs(p).max()), 1.0)
    eps = 1e-13 * scale

    def outside(c, r, x):
        return np.linalg.norm(x - c) > r + eps

    c, r = p[0].copy(), 0.0
    for i in range(1, len(p)):
        if not outside(c, r, p[i]):
            continue
        c, r = _ball_on([p[i]])
        for j in range(i):
            if not outside(c, r, p[j]):
                continue
            c, r = _ball_on([p[i], p[j]])
            for m in range(j):
                if not outside(c, r, p[m]):
                    continue
                c, r = _ball_on([p[i], p[j], p[m]])
                for q in range(m):
                    if outside(c, r, p[q]):
                        c, r = _ball_on([p[i], p[j], p[m], p[q]])
    r = float(np.linalg.norm(p - c, axis=1).max())
    return Ball(c, r)


def _ball_on(support) -> tuple[np.ndarray, float]:
    """Smallest ball with all ``support`` points on its boundary."""
    a = support[0]
    if len(support) == 1:
        return a.copy(), 0.0
    if len(support) == 2:
        c = 0.5 * (a + support[1])
        return c, float(np.linalg.norm(support[1] - c))
    # center = a + E^T x with E the difference vectors: solve Gram system
    E = np.array([s - a for s in support[1:]])
    G = E @ E.T
    rhs = 0.5 * np.sum(E * E, axis=1)
    try:
        x = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        x = np.linalg.lstsq(G, rhs, rcond=None)[0]
    c = a + E.T @ x
    return c, float(max(np.linalg.norm(s - c) for s in support))


def normalize_to_unit_ball(mesh: TriangleMesh) -> TriangleMesh:
    """Translate the enclosing-ball center to the origin and scale its radius to 1.

    By Jung's theorem the result has extrinsic diameter at least
    ``jung_constant(3)``, and the intrinsic diameter is at least as large.
    """
    ball = minimal_enclosing_ball(mesh.vertices)
    if ball.radius <= 0:
        raise ValueError("cannot normalize a mesh whose enclosing ball has zero radius")
    return mesh.transformed(1.0 / ball.radius, -ball.center)
