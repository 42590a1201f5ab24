"""Intrinsic distances on fans (exact, by planar development) and on
general meshes (graph shortest paths through edge subdivision points)."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .geometry import TriangleFan, TriangleMesh

TWO_PI = 2.0 * np.pi
_ANGLE_EPS = 1e-12


@dataclass(frozen=True)
class SurfacePoint:
    """A point of a mesh given by face index and barycentric coordinates."""

    face: int
    bary: tuple[float, float, float]

    def __post_init__(self):
        b = tuple(float(x) for x in self.bary)
        if len(b) != 3 or min(b) < -1e-12 or abs(sum(b) - 1.0) > 1e-9:
            raise ValueError(f"invalid barycentric coordinates {self.bary}")
        object.__setattr__(self, "bary", b)

    def position(self, mesh: TriangleMesh) -> np.ndarray:
        if not 0 <= self.face < mesh.n_faces:
            raise ValueError(f"point on face {self.face}, mesh has {mesh.n_faces} faces")
        return np.asarray(self.bary) @ mesh.face_points(self.face)


def fan_vertex(fan: TriangleFan, i: int) -> SurfacePoint:
    """Surface point at boundary vertex y_i."""
    if not 0 <= i < fan.k:
        raise IndexError(f"boundary index {i} out of range [0, {fan.k})")
    if i < fan.n_faces:
        return SurfacePoint(i, (0.0, 1.0, 0.0))
    return SurfacePoint(i - 1, (0.0, 0.0, 1.0))


def fan_apex(fan: TriangleFan) -> SurfacePoint:
    return SurfacePoint(0, (1.0, 0.0, 0.0))


# ---------------------------------------------------------------------------
# development
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Development:
    """Planar unrolling of consecutive fan faces around the apex at the origin."""

    indices: tuple[int, ...]
    points: np.ndarray  # (n, 2)
    cumulative: np.ndarray  # developed angle of each point
    radii: np.ndarray
    truncated: bool
    end_radius: float  # |y_j|, which a truncated walk never reaches

    apex = np.zeros(2)

    @property
    def total_angle(self) -> float:
        return float(self.cumulative[-1])

    @property
    def chord_length(self) -> float:
        return float(np.linalg.norm(self.points[-1] - self.points[0]))

    @cached_property
    def length(self) -> float:
        """Shortest path between the end points through the developed faces."""
        r0, r1 = float(self.radii[0]), self.end_radius
        if self.truncated or self.total_angle >= np.pi:
            return r0 + r1
        return chain_length(self.points)

    @property
    def chord_inside(self) -> bool:
        """True when the straight chord stays in the developed region."""
        return abs(self.length - self.chord_length) <= 1e-12 * max(self.length, 1e-300)


def develop_fan(fan: TriangleFan, i: int, j: int, direction: Literal["ccw", "cw"] = "ccw") -> Development:
    """Unroll the faces met walking from y_i to y_j in ``direction``.

    ``ccw`` walks increasing indices, ``cw`` decreasing ones, wrapping only on
    closed fans.  Faces are added while the developed angle stays at most
    2*pi; past that the development is truncated and its geodesic length is
    the path through the apex.
    """
    k = fan.k
    if not (0 <= i < k and 0 <= j < k) or i == j:
        raise ValueError(f"invalid boundary pair ({i}, {j}) for a fan with {k} vertices")
    if direction not in ("ccw", "cw"):
        raise ValueError(f"direction must be 'ccw' or 'cw', got {direction!r}")
    step = 1 if direction == "ccw" else -1
    if not fan.closed and (j - i) * step < 0:
        raise ValueError(f"open fan cannot be walked {direction} from {i} to {j}")

    idx, angs = [i], [0.0]
    cur, total, truncated = i, 0.0, False
    while cur != j:
        face = cur if step == 1 else (cur - 1) % k
        theta = float(fan.angles[face])
        if total + theta > TWO_PI:
            truncated = True
            break
        total += theta
        cur = (cur + step) % k
        idx.append(cur)
        angs.append(total)
    cum = np.array(angs)
    r = fan.radii[idx]
    pts = r[:, None] * np.column_stack([np.cos(cum), np.sin(cum)])
    return Development(tuple(idx), pts, cum, r, truncated, float(fan.radii[j]))


def chain_length(points: np.ndarray) -> float:
    """Length of the taut path from the first to the last planar point.

    The points are boundary vertices of a region that is star-shaped from
    the origin, listed in increasing angle over a span below pi.  The path
    is the part of their convex hull facing the origin, found with a
    Graham-style scan.
    """
    stack = [points[0]]
    for p in points[1:]:
        while len(stack) >= 2:
            a, v = stack[-2], stack[-1]
            side_v = _cross(p - a, v - a)
            side_o = _cross(p - a, -a)
            # keep v only when it pokes strictly into the origin side of a->p
            if side_v * side_o > 0 and abs(side_v) > 1e-15 * np.dot(p - a, p - a):
                break
            stack.pop()
        stack.append(p)
    s = np.asarray(stack)
    return float(np.linalg.norm(np.diff(s, axis=0), axis=1).sum())


def _cross(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def cone_distance(fan: TriangleFan, i: int, j: int) -> float:
    """Exact intrinsic distance between boundary vertices y_i and y_j."""
    if not (0 <= i < fan.k and 0 <= j < fan.k):
        raise ValueError(f"invalid boundary pair ({i}, {j})")
    if i == j:
        return 0.0
    if fan.closed:
        return min(develop_fan(fan, i, j, "ccw").length, develop_fan(fan, i, j, "cw").length)
    return develop_fan(fan, i, j, "ccw" if j > i else "cw").length


# ---------------------------------------------------------------------------
# arbitrary points of a fan
# ---------------------------------------------------------------------------


class FanMetric:
    """Exact intrinsic metric of a fan for points given in polar form.

    A fan point is developed to polar coordinates ``(t, phi)`` about the
    apex, with ``phi`` in ``[0, total_angle]``.
    """

    def __init__(self, fan: TriangleFan):
        self.fan = fan
        self.theta = fan.total_angle
        self.cum = fan.cumulative[: fan.k]  # angle of y_0..y_{k-1}
        self.radii = fan.radii
        self.triangular = fan.is_triangular

    def polar(self, p: SurfacePoint) -> tuple[float, float]:
        f = self.fan
        if not 0 <= p.face < f.n_faces:
            raise ValueError(f"point on face {p.face}, fan has {f.n_faces} faces")
        i, j = f.face(p.face)
        _, b, c = p.bary
        a0 = f.cumulative[p.face]
        a1 = f.cumulative[p.face + 1]
        x = b * self.radii[i] * np.cos(a0) + c * self.radii[j] * np.cos(a1)
        y = b * self.radii[i] * np.sin(a0) + c * self.radii[j] * np.sin(a1)
        t = float(np.hypot(x, y))
        if t == 0.0:
            return 0.0, 0.0
        # angle relative to the face's first ray keeps phi inside the face
        rel = np.arctan2(-np.sin(a0) * x + np.cos(a0) * y, np.cos(a0) * x + np.sin(a0) * y)
        return t, float(a0 + min(max(rel, 0.0), a1 - a0))

    def polar_many(self, pts) -> tuple[np.ndarray, np.ndarray]:
        tp = np.array([self.polar(p) for p in pts]).reshape(-1, 2)
        return tp[:, 0], tp[:, 1]

    def distance(self, p: tuple[float, float], q: tuple[float, float]) -> float:
        (tp, fp), (tq, fq) = p, q
        if tp == 0.0 or tq == 0.0:
            return tp + tq
        if fp > fq:
            (tp, fp), (tq, fq) = (tq, fq), (tp, fp)
        best = self._way(tp, tq, fq - fp, fp, fq, forward=True)
        if self.fan.closed:
            best = min(best, self._way(tp, tq, self.theta - (fq - fp), fp, fq, forward=False))
        return best

    def _way(self, tp, tq, alpha, fp, fq, forward: bool) -> float:
        if alpha >= np.pi:
            return tp + tq
        if self.triangular:
            return _law_of_cosines(tp, tq, alpha)
        if forward:
            sel = (self.cum > fp + _ANGLE_EPS) & (self.cum < fq - _ANGLE_EPS)
            mids = self.cum[sel] - fp
        else:
            up = self.cum[self.cum > fq + _ANGLE_EPS] - fq
            wrap = self.cum[self.cum < fp - _ANGLE_EPS] + self.theta - fq
            sel = np.concatenate([np.flatnonzero(self.cum > fq + _ANGLE_EPS), np.flatnonzero(self.cum < fp - _ANGLE_EPS)])
            mids = np.concatenate([up, wrap])
            # backward way starts at q
            tp, tq = tq, tp
        if not len(mids):
            return _law_of_cosines(tp, tq, alpha)
        ang = np.concatenate([[0.0], mids, [alpha]])
        rad = np.concatenate([[tp], self.radii[sel], [tq]])
        pts = rad[:, None] * np.column_stack([np.cos(ang), np.sin(ang)])
        return chain_length(pts)

    def distances_from(self, p: tuple[float, float], ts: np.ndarray, phis: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        phis = np.asarray(phis, dtype=float)
        tp, fp = p
        if not self.triangular:
            return np.array([self.distance(p, (t, f)) for t, f in zip(ts, phis)])
        alpha = np.abs(phis - fp)
        if self.fan.closed:
            alpha = np.minimum(alpha, self.theta - alpha)
        chord = np.sqrt(np.maximum(tp * tp + ts * ts - 2.0 * tp * ts * np.cos(alpha), 0.0))
        out = np.where(alpha >= np.pi, tp + ts, chord)
        return np.where((ts == 0.0) | (tp == 0.0), tp + ts, out)


def _law_of_cosines(a: float, b: float, alpha: float) -> float:
    return float(np.sqrt(max(a * a + b * b - 2.0 * a * b * np.cos(alpha), 0.0)))


# ---------------------------------------------------------------------------
# graph engine for general meshes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeodesicEstimate:
    value: float
    refinement_level: int
    history: tuple[float, ...] = field(default=())


class SteinerGraph:
    """Mesh vertices plus ``2**level - 1`` evenly spaced points per edge.

    Every pair of nodes on a common face is joined by the straight segment
    between them.  Subdivision parameters are dyadic and measured from the
    lower-indexed end of each edge, so node sets of coarser levels are
    reproduced bit-for-bit at finer levels.
    """

    def __init__(self, mesh: TriangleMesh, level: int):
        if level < 0:
            raise ValueError("refinement level must be non-negative")
        self.mesh = mesh
        self.level = level
        V = mesh.vertices
        E = mesh.edges
        m = 2**level - 1
        nv = len(V)
        t = np.arange(1, m + 1) / 2.0**level
        interior = V[E[:, 0]][:, None, :] + t[None, :, None] * (V[E[:, 1]] - V[E[:, 0]])[:, None, :]
        self.coords = np.vstack([V, interior.reshape(-1, 3)])

        edge_id = {tuple(e): n for n, e in enumerate(E.tolist())}
        face_nodes = []
        for f in mesh.faces.tolist():
            nodes = list(f)
            for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
                e = edge_id[(min(a, b), max(a, b))]
                nodes.extend(range(nv + e * m, nv + (e + 1) * m))
            face_nodes.append(nodes)
        self.face_nodes = np.array(face_nodes, dtype=np.int64).reshape(len(face_nodes), -1)

        M = self.face_nodes.shape[1]
        iu, ju = np.triu_indices(M, k=1)
        a = self.face_nodes[:, iu].ravel()
        b = self.face_nodes[:, ju].ravel()
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        key = np.unique(lo * len(self.coords) + hi)
        self.u = key // len(self.coords)
        self.v = key % len(self.coords)
        self.w = np.linalg.norm(self.coords[self.u] - self.coords[self.v], axis=1)

    @property
    def n_nodes(self) -> int:
        return len(self.coords)

    def _attach(self, pts: list[SurfacePoint]):
        """Node index for each point, adding new nodes where needed."""
        mesh = self.mesh
        extra_xyz, extra_edges, ids = [], [], []
        n0 = self.n_nodes
        for p in pts:
            x = p.position(mesh)
            faces = [p.face]
            b = p.bary
            f = mesh.faces[p.face].tolist()
            if min(b) <= 0.0:
                on = [f[i] for i in range(3) if b[i] > 0.0]
                if len(on) == 1:
                    ids.append(on[0])
                    continue
                e = tuple(sorted(on))
                faces = list(mesh.edge_faces[e])
            nodes = np.unique(self.face_nodes[faces].ravel())
            d = np.linalg.norm(self.coords[nodes] - x, axis=1)
            hit = np.flatnonzero(d == 0.0)
            if hit.size:
                ids.append(int(nodes[hit[0]]))
                continue
            nid = n0 + len(extra_xyz)
            extra_xyz.append(x)
            ids.append(nid)
            extra_edges.append((np.full(len(nodes), nid), nodes, d, faces))
        return ids, extra_xyz, extra_edges

    def distances(self, source: SurfacePoint, targets: list[SurfacePoint]) -> np.ndarray:
        ids, xyz, edges = self._attach([source, *targets])
        n = self.n_nodes + len(xyz)
        us, vs, ws = [self.u], [self.v], [self.w]
        for nid, nodes, d, _ in edges:
            us.append(nid)
            vs.append(nodes)
            ws.append(d)
        # a target sharing a face with the source sees it directly
        if edges and ids[0] >= self.n_nodes:
            src_faces = set(edges[0][3])
            for nid, _, _, faces in edges[1:]:
                if src_faces & set(faces):
                    dd = float(np.linalg.norm(xyz[0] - xyz[int(nid[0]) - self.n_nodes]))
                    if dd > 0:
                        us.append(np.array([ids[0]]))
                        vs.append(np.array([int(nid[0])]))
                        ws.append(np.array([dd]))
        u, v, w = (np.concatenate(x) for x in (us, vs, ws))
        g = coo_matrix((w, (u, v)), shape=(n, n)).tocsr()
        dist = dijkstra(g, directed=False, indices=ids[0])
        out = dist[ids[1:]]
        src = source.position(self.mesh)
        for k, t in enumerate(targets):
            if np.array_equal(t.position(self.mesh), src):
                out[k] = 0.0
        return out

    def node_distances(self, source: SurfacePoint) -> np.ndarray:
        """Graph distance from ``source`` to every base node."""
        ids, xyz, edges = self._attach([source])
        n = self.n_nodes + len(xyz)
        us, vs, ws = [self.u], [self.v], [self.w]
        for nid, nodes, d, _ in edges:
            us.append(nid)
            vs.append(nodes)
            ws.append(d)
        u, v, w = (np.concatenate(x) for x in (us, vs, ws))
        g = coo_matrix((w, (u, v)), shape=(n, n)).tocsr()
        return dijkstra(g, directed=False, indices=ids[0])[: self.n_nodes]


def steiner_graph_distance(mesh: TriangleMesh, p: SurfacePoint, q: SurfacePoint, level: int) -> GeodesicEstimate:
    """Upper estimate of the intrinsic distance with its refinement history.

    Node sets nest across levels, so each level can only shorten the graph
    path; the history records levels ``0..level``.
    """
    if level < 0:
        raise ValueError("refinement level must be non-negative")
    p.position(mesh), q.position(mesh)
    history = []
    for lev in range(level + 1):
        d = float(SteinerGraph(mesh, lev).distances(p, [q])[0])
        if history:
            d = min(d, history[-1])
        history.append(d)
    return GeodesicEstimate(history[-1], level, tuple(history))
