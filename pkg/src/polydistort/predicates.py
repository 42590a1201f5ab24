"""Triangle-triangle intersection tests for embedding validation.

Orientation signs are taken from floating-point determinants with a
relative zero band of ``COPLANAR_TOL``.  Rounding error in a 3x3
determinant of well-scaled inputs is a few ulps of ``L**3``, far inside
the band, so any sign reported outside the band is the exact sign.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .geometry import TriangleMesh

COPLANAR_TOL = 1e-12


class EmbeddingReport(NamedTuple):
    embedded: bool
    pair: tuple[int, int] | None


def _sign(x: float, band: float) -> int:
    if x > band:
        return 1
    if x < -band:
        return -1
    return 0


class _Predicates:
    """Orientation predicates bound to a length scale ``L``."""

    def __init__(self, L: float):
        self.band3 = COPLANAR_TOL * L**3
        self.band2 = COPLANAR_TOL * L**2

    def orient3(self, a, b, c, d) -> int:
        return _sign(float(np.dot(np.cross(b - a, c - a), d - a)), self.band3)

    def orient2(self, a, b, c) -> int:
        return _sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]), self.band2)

    # --- planar ---------------------------------------------------------

    def segments_meet_2d(self, p, q, a, b) -> bool:
        o1, o2 = self.orient2(p, q, a), self.orient2(p, q, b)
        o3, o4 = self.orient2(a, b, p), self.orient2(a, b, q)
        if o1 * o2 < 0 and o3 * o4 < 0:
            return True
        for o, x, s, t in ((o1, a, p, q), (o2, b, p, q), (o3, p, a, b), (o4, q, a, b)):
            if o == 0 and _on_box(x, s, t):
                return True
        return False

    def point_in_tri_2d(self, x, a, b, c) -> bool:
        s = (self.orient2(a, b, x), self.orient2(b, c, x), self.orient2(c, a, x))
        return not (min(s) < 0 < max(s))

    def tris_meet_2d(self, t1, t2) -> bool:
        for i in range(3):
            for j in range(3):
                if self.segments_meet_2d(t1[i], t1[(i + 1) % 3], t2[j], t2[(j + 1) % 3]):
                    return True
        return self.point_in_tri_2d(t1[0], *t2) or self.point_in_tri_2d(t2[0], *t1)

    def segment_tri_2d(self, p, q, t) -> bool:
        if self.point_in_tri_2d(p, *t) or self.point_in_tri_2d(q, *t):
            return True
        return any(self.segments_meet_2d(p, q, t[j], t[(j + 1) % 3]) for j in range(3))

    # --- spatial --------------------------------------------------------

    def segment_meets_tri(self, p, q, tri, drop: int) -> bool:
        a, b, c = tri
        op, oq = self.orient3(a, b, c, p), self.orient3(a, b, c, q)
        if op * oq > 0:
            return False
        if op == 0 and oq == 0:
            keep = [i for i in range(3) if i != drop]
            return self.segment_tri_2d(p[keep], q[keep], [v[keep] for v in tri])
        s = (self.orient3(p, q, a, b), self.orient3(p, q, b, c), self.orient3(p, q, c, a))
        return not (min(s) < 0 < max(s))

    def tris_meet(self, t1, t2) -> bool:
        """General position test for triangles with no shared vertex."""
        o2 = [self.orient3(*t1, x) for x in t2]
        if min(o2) > 0 or max(o2) < 0:
            return False
        o1 = [self.orient3(*t2, x) for x in t1]
        if min(o1) > 0 or max(o1) < 0:
            return False
        n = np.cross(t1[1] - t1[0], t1[2] - t1[0])
        drop = int(np.argmax(np.abs(n)))
        if not any(o2) and not any(o1):
            keep = [i for i in range(3) if i != drop]
            return self.tris_meet_2d([v[keep] for v in t1], [v[keep] for v in t2])
        n2 = np.cross(t2[1] - t2[0], t2[2] - t2[0])
        drop2 = int(np.argmax(np.abs(n2)))
        for i in range(3):
            if self.segment_meets_tri(t1[i], t1[(i + 1) % 3], t2, drop2):
                return True
            if self.segment_meets_tri(t2[i], t2[(i + 1) % 3], t1, drop):
                return True
        return False

    def wedges_meet(self, v, e1, e2, f1, f2) -> bool:
        """Triangles (v, v+e1, v+e2) and (v, v+f1, v+f2) meet beyond v?

        Both triangles are convex and contain v, so they share more than v
        exactly when their corner wedges at v share a ray.
        """
        n1 = np.cross(e1, e2)
        if self.orient3(v, v + e1, v + e2, v + f1) == 0 and self.orient3(v, v + e1, v + e2, v + f2) == 0:
            # coplanar: circular arcs below pi overlap iff one holds an end ray of the other
            return any(_in_wedge(u, e1, e2, n1) for u in (f1, f2)) or any(
                _in_wedge(u, f1, f2, n1) for u in (e1, e2)
            )
        n2 = np.cross(f1, f2)
        d = np.cross(n1, n2)
        return any(
            _in_wedge(u, e1, e2, n1) and _in_wedge(u, f1, f2, n2)
            for u in (d, -d)
        )


def _on_box(x, s, t) -> bool:
    return min(s[0], t[0]) <= x[0] <= max(s[0], t[0]) and min(s[1], t[1]) <= x[1] <= max(s[1], t[1])


def _in_wedge(u, e1, e2, n) -> bool:
    # closed wedge spanned by e1, e2 (angle < pi) in the plane with normal n;
    # all directions normalized so the band is an angular tolerance
    un = np.linalg.norm(u)
    if un == 0:
        return False
    u, e1, e2, n = u / un, _unit(e1), _unit(e2), _unit(n)
    s1 = float(np.dot(np.cross(e1, u), n))
    s2 = float(np.dot(np.cross(u, e2), n))
    return s1 >= -COPLANAR_TOL and s2 >= -COPLANAR_TOL and float(np.dot(u, e1 + e2)) > 0


def _unit(v):
    return v / np.linalg.norm(v)


def faces_intersect(mesh: TriangleMesh, f: int, g: int, pred: _Predicates | None = None) -> bool:
    """Do faces ``f`` and ``g`` meet outside their shared vertices/edge?"""
    V = mesh.vertices
    F, G = mesh.faces[f].tolist(), mesh.faces[g].tolist()
    if pred is None:
        pred = _Predicates(_scale(V[F + G]))
    shared = set(F) & set(G)
    if not shared:
        return pred.tris_meet([V[i] for i in F], [V[i] for i in G])
    if len(shared) == 1:
        (s,) = shared
        e = [V[i] - V[s] for i in F if i != s]
        h = [V[i] - V[s] for i in G if i != s]
        return pred.wedges_meet(V[s], e[0], e[1], h[0], h[1])
    u, w = sorted(shared)
    (a,) = [i for i in F if i not in shared]
    (b,) = [i for i in G if i not in shared]
    if pred.orient3(V[u], V[w], V[a], V[b]) != 0:
        return False
    # coplanar across the shared edge: folded onto each other iff same side
    axis = V[w] - V[u]
    return float(np.dot(np.cross(axis, V[a] - V[u]), np.cross(axis, V[b] - V[u]))) > 0


def _scale(V: np.ndarray) -> float:
    return max(float(np.ptp(V, axis=0).max()), 1e-300)


def _candidate_pairs(mesh: TriangleMesh, chunk: int = 250_000):
    """Face pairs (lexicographic) that the cheap vectorized tests cannot clear.

    A pair is cleared when bounding boxes are apart (no shared vertex) or
    when one face's unshared vertices lie strictly on one side of the
    other's plane, so the faces can meet only in shared vertices or edge.
    The band uses a per-pair scale at least as large as the exact test's,
    so nothing the exact test would flag is cleared here.
    """
    V = mesh.vertices
    F = mesh.faces
    tris = V[F]
    lo, hi = tris.min(axis=1), tris.max(axis=1)
    N = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    D = np.einsum("ij,ij->i", N, tris[:, 0])
    size = np.ptp(tris, axis=1).max(axis=1)
    n = len(F)
    iu, ju = np.triu_indices(n, k=1)
    for s0 in range(0, len(iu), chunk):
        f, g = iu[s0 : s0 + chunk], ju[s0 : s0 + chunk]
        eq = F[f][:, :, None] == F[g][:, None, :]
        shared = eq.sum(axis=(1, 2))
        L = np.maximum.reduce([size[f], size[g], np.abs(hi[f] - lo[g]).max(axis=1), np.abs(hi[g] - lo[f]).max(axis=1)])
        L = np.maximum(L, 1e-300)
        band = COPLANAR_TOL * L**3
        pad = (COPLANAR_TOL * L)[:, None]
        apart = (shared == 0) & (np.any(lo[f] > hi[g] + pad, axis=1) | np.any(lo[g] > hi[f] + pad, axis=1))
        cleared = apart | _side(N, D, tris, f, g, ~eq.any(axis=1), band)
        lone = ~cleared & (shared <= 1)
        cleared[lone] = _side(N, D, tris, g[lone], f[lone], ~eq[lone].any(axis=2), band[lone])
        for a, b in zip(f[~cleared].tolist(), g[~cleared].tolist()):
            yield a, b


def _side(N, D, tris, f, g, mask, band) -> np.ndarray:
    """Unshared vertices of g (``mask``) all strictly on one side of f's plane."""
    o = np.stack([np.einsum("ij,ij->i", N[f], tris[g, t]) - D[f] for t in range(3)], axis=1)
    pos = np.where(mask, o > band[:, None], True).all(axis=1)
    neg = np.where(mask, o < -band[:, None], True).all(axis=1)
    return (pos | neg) & mask.any(axis=1)


def validate_embedding(mesh: TriangleMesh) -> EmbeddingReport:
    """Check that no two faces meet except along shared vertices or edges.

    Returns the first violating face pair in lexicographic order.
    """
    for f, g in _candidate_pairs(mesh):
        if faces_intersect(mesh, f, g):
            return EmbeddingReport(False, (f, g))
    return EmbeddingReport(True, None)
