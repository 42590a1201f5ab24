"""Certification for fans: angle sums, the pi/3 distance bound, the area
threshold, the greedy vertex selection, radial reduction and the transfer
of a certificate to a surface containing the fan's 1-skeleton."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .generators import sector_embedded
from .geometry import TriangleFan, TriangleMesh, mesh_area
from .intrinsic import SurfacePoint, cone_distance, fan_vertex
from .packing import shell_packing_upper_bound
from .predicates import validate_embedding
from .search import TIE_BAND, DistortionCertificate
from .spaces import FanSpace

log = logging.getLogger(__name__)

PI_3 = math.pi / 3
# angle budget one selection step can consume: just under pi/3 plus one face below pi
STEP_BUDGET = 4 * math.pi / 3
SKELETON_TOL = 1e-9


class Rejection(Exception):
    """Hypothesis not met; ``deficit`` says by how much."""

    def __init__(self, msg: str, deficit: float, **info):
        super().__init__(msg)
        self.deficit = float(deficit)
        self.info = info


class InconsistencyError(RuntimeError):
    """A guaranteed outcome did not occur; some precondition must be violated."""


@dataclass(frozen=True)
class SelectionTrace:
    indices: tuple[int, ...]
    psi: tuple[float, ...]  # consecutive forward angle sums
    closing_psi: float | None  # forward sum from the last pick back to the first (closed fans)
    dropped_last: bool
    R: float
    delta: float
    c: float
    beta_upper: int

    def __post_init__(self):
        if any(p < PI_3 - 1e-12 for p in self.psi):
            raise ValueError("selection step below pi/3")
        if self.closing_psi is not None and self.closing_psi < PI_3 - 1e-12:
            raise ValueError("closing sum below pi/3")

    @property
    def N(self) -> int:
        return len(self.indices)

    def to_dict(self) -> dict:
        return {
            "indices": list(self.indices),
            "psi": list(self.psi),
            "closing_psi": self.closing_psi,
            "dropped_last": self.dropped_last,
            "R": self.R,
            "delta": self.delta,
            "c": self.c,
            "beta_upper": self.beta_upper,
            "N": self.N,
        }


def _check_pair(fan: TriangleFan, i: int, j: int):
    if not (0 <= i < fan.k and 0 <= j < fan.k) or i == j:
        raise ValueError(f"invalid boundary pair ({i}, {j}) for {fan.k} vertices")


def forward_sum(fan: TriangleFan, i: int, j: int) -> float:
    """Angle sum walking up from y_i to y_j (wrapping on closed fans)."""
    cum = fan.cumulative
    if j >= i:
        return float(cum[j] - cum[i])
    if not fan.closed:
        raise ValueError("open fans cannot wrap")
    return float(fan.total_angle - cum[i] + cum[j])


def angle_sum_psi(fan: TriangleFan, i: int, j: int) -> float:
    """psi(i, j): the smaller of the two ways round on a closed fan, the only way on an open one."""
    _check_pair(fan, i, j)
    a, b = min(i, j), max(i, j)
    s = forward_sum(fan, a, b)
    return min(s, fan.total_angle - s) if fan.closed else s


def fan_distance_lower_bound(fan: TriangleFan, i: int, j: int) -> float:
    """Exact distance between y_i and y_j on a triangular fan; at least R once psi >= pi/3."""
    _check_pair(fan, i, j)
    if not fan.is_triangular:
        raise ValueError("the pi/3 bound needs equal radii")
    return cone_distance(fan, i, j)


def fan_triangle_area(R: float, theta: float) -> float:
    if not R > 0:
        raise ValueError("R must be positive")
    if not 0 < theta < math.pi:
        raise ValueError(f"apex angle {theta} outside (0, pi)")
    return 0.5 * R * R * math.sin(theta)


def area_threshold(R: float, delta: float, beta: int | None = None) -> float:
    """c(R, delta) = (R^2/2)(4 pi/3)(beta + 2).

    ``beta`` defaults to the shell bound for delta-separated points on the
    radius-R sphere about the apex, where the selected vertices live.
    """
    if not (R > 0 and delta > 0):
        raise ValueError("R and delta must be positive")
    if beta is None:
        beta = shell_packing_upper_bound(delta, R)
    return 0.5 * R * R * STEP_BUDGET * (beta + 2)


def select_vertices(fan: TriangleFan) -> tuple[list[int], list[float], float | None, bool]:
    """Greedy walk: next pick is the first later vertex with forward sum >= pi/3.

    On a closed fan the sum from the last pick forward to the first must
    also reach pi/3; if not, the last pick is dropped once.
    """
    cum = fan.cumulative
    picks = [0]
    while True:
        j = picks[-1]
        later = np.flatnonzero(cum[j + 1 : fan.k] - cum[j] >= PI_3)
        if not len(later):
            break
        picks.append(int(j + 1 + later[0]))
    psi = [float(cum[b] - cum[a]) for a, b in zip(picks, picks[1:])]
    if not fan.closed:
        return picks, psi, None, False
    dropped = False
    closing = float(fan.total_angle - cum[picks[-1]])
    if closing < PI_3 and len(picks) > 1:
        picks.pop()
        psi.pop()
        dropped = True
        closing = float(fan.total_angle - cum[picks[-1]])
    return picks, psi, closing, dropped


@dataclass(frozen=True, eq=False)
class Theorem2Result:
    certificate: DistortionCertificate
    trace: SelectionTrace
    extras: dict = field(default_factory=dict)


def theorem2_certify(fan: TriangleFan, delta: float, check_embedding: bool = True) -> Theorem2Result:
    """Certify K >= R/delta on a triangular fan whose area exceeds c(R, delta).

    Selected vertices are pairwise psi >= pi/3 apart both ways round, hence
    at least R apart intrinsically; there are more of them than fit delta
    apart on the sphere of radius R, so two are within delta in space.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not fan.is_triangular:
        raise ValueError("theorem 2 needs a triangular fan (equal radii)")
    if check_embedding and not (sector_embedded(fan) or validate_embedding(fan.mesh).embedded):
        raise ValueError("fan is not embedded")
    R = fan.R
    beta = shell_packing_upper_bound(delta, R)
    c = area_threshold(R, delta, beta)
    area = mesh_area(fan.mesh)
    if not area > c:
        raise Rejection(f"area {area:.6g} does not exceed c(R, delta) = {c:.6g}", c - area, area=area, c=c, beta_upper=beta)

    picks, psi, closing, dropped = select_vertices(fan)
    trace = SelectionTrace(tuple(picks), tuple(psi), closing, dropped, R, float(delta), c, beta)
    if closing is not None and closing < PI_3:
        raise InconsistencyError(f"closing sum {closing:.6g} below pi/3 after dropping; N = {len(picks)}")
    if len(picks) <= beta:
        raise InconsistencyError(f"selected {len(picks)} vertices, need more than {beta}")

    xyz = fan.boundary[picks]
    diff = xyz[:, None, :] - xyz[None, :, :]
    E = np.sqrt((diff * diff).sum(axis=-1))
    m = len(picks)
    best, best_pair = -1.0, None
    for a in range(m):
        for b in np.flatnonzero(E[a, a + 1 :] <= delta) + a + 1:
            i, j = picks[a], picks[int(b)]
            if E[a, b] == 0:
                raise InconsistencyError(f"vertices {i} and {j} coincide")
            ratio = cone_distance(fan, i, j) / E[a, b]
            if ratio > best * (1 + TIE_BAND):
                best, best_pair = ratio, (i, j)
    if best_pair is None:
        raise InconsistencyError(f"no pair of the {m} selected vertices is within delta = {delta}")
    i, j = best_pair
    d = cone_distance(fan, i, j)
    e = float(np.linalg.norm(fan.boundary[i] - fan.boundary[j]))
    if d < R * (1 - 1e-12) or e > delta:
        raise InconsistencyError(f"pair ({i}, {j}) has distance {d!r} and gap {e!r}")
    params = {
        "R": R,
        "delta": delta,
        "c": c,
        "area": area,
        "beta_upper": beta,
        "beta_kind": "sphere-shell",
        "fan_index": [i, j],
        "psi": angle_sum_psi(fan, i, j),
        "trace": trace.to_dict(),
    }
    cert = DistortionCertificate(
        p=fan_vertex(fan, i),
        q=fan_vertex(fan, j),
        p_xyz=fan.boundary[i].copy(),
        q_xyz=fan.boundary[j].copy(),
        intrinsic=d,
        method="exact-cone",
        extrinsic=e,
        K_lower=d / e,
        provenance="theorem2",
        history=(d,),
        certified=True,
        params=params,
    )
    return Theorem2Result(cert, trace)


def rtriangular_reduce(fan: TriangleFan, delta: float) -> Theorem2Result:
    """Certify an R-triangular fan through its radius-R extension.

    The certified pair of the extension is pulled back along its rays by
    lambda = min r_i / R; lambda times the extension lies inside the fan and
    distances between these points agree, so the ratio is unchanged.
    """
    R = fan.R
    ext = fan.extended(R)
    res = theorem2_certify(ext, delta, check_embedding=True)
    lam = float(fan.radii.min() / R)
    i, j = res.certificate.params["fan_index"]
    space = FanSpace(fan)
    pts = [_ray_point(fan, v, lam * R) for v in (i, j)]
    d = space.distance(pts[0], pts[1])
    xyz = [space.position(p) for p in pts]
    e = float(np.linalg.norm(xyz[0] - xyz[1]))
    ext_ratio = res.certificate.intrinsic / res.certificate.extrinsic
    if abs(d / e - ext_ratio) > 1e-12 * ext_ratio:
        raise InconsistencyError(f"ratio changed under scaling: {d / e!r} vs {ext_ratio!r}")
    params = {**res.certificate.params, "lambda": lam, "extension_ratio": ext_ratio}
    cert = DistortionCertificate(
        p=pts[0],
        q=pts[1],
        p_xyz=xyz[0],
        q_xyz=xyz[1],
        intrinsic=d,
        method="exact-cone",
        extrinsic=e,
        K_lower=d / e,
        provenance="rtriangular",
        history=(d,),
        certified=True,
        params=params,
    )
    return Theorem2Result(cert, res.trace, {"extension_certificate": res.certificate})


def _ray_point(fan: TriangleFan, i: int, t: float) -> SurfacePoint:
    """Point at distance t from the apex on the ray towards y_i."""
    s = t / float(fan.radii[i])
    v = fan_vertex(fan, i)
    b = [1.0 - s, 0.0, 0.0]
    b[v.bary.index(1.0)] = s
    return SurfacePoint(v.face, tuple(b))


def skeleton_transfer(base: DistortionCertificate, fan: TriangleFan, replacement: TriangleMesh) -> DistortionCertificate:
    """Carry a vertex-pair certificate over to a surface containing the skeleton.

    The replacement must keep the fan's apex and boundary as vertices
    ``0..k`` and contain every apex ray and boundary edge as a mesh edge of
    the same length.  Distances between these vertices can only grow, so
    the base ratio is a lower bound on the replacement.
    """
    k = fan.k
    V = replacement.vertices
    base_V = fan.mesh.vertices
    if replacement.n_vertices <= k:
        raise Rejection("replacement has fewer vertices than the fan", 0.0)
    edges = {tuple(e) for e in replacement.edges.tolist()}
    worst = 0.0
    for a, b in fan.mesh.edges.tolist():
        if (a, b) not in edges:
            raise Rejection(f"skeleton segment ({a}, {b}) is not an edge of the replacement", float("inf"))
        L0 = float(np.linalg.norm(base_V[a] - base_V[b]))
        L1 = float(np.linalg.norm(V[a] - V[b]))
        worst = max(worst, abs(L1 - L0))
    if worst > SKELETON_TOL:
        raise Rejection(f"skeleton segment lengths deviate by {worst:.3g}", worst)
    rep = validate_embedding(replacement)
    if not rep.embedded:
        raise Rejection(f"replacement self-intersects at faces {rep.pair}", 0.0)
    a0, a1 = mesh_area(fan.mesh), mesh_area(replacement)
    if a1 < a0 * (1 - 1e-12):
        raise Rejection(f"replacement area {a1:.6g} below fan area {a0:.6g}", a0 - a1)
    if "fan_index" not in base.params:
        raise ValueError("base certificate does not name fan vertices")
    i, j = base.params["fan_index"]
    p, q = (_mesh_vertex_point(replacement, v + 1) for v in (i, j))
    e = float(np.linalg.norm(V[i + 1] - V[j + 1]))
    if abs(e - base.extrinsic) > 1e-12 * max(base.extrinsic, 1.0):
        raise Rejection("certified vertices moved", abs(e - base.extrinsic))
    params = {**base.params, "base_area": a0, "replacement_area": a1, "skeleton_deviation": worst}
    return DistortionCertificate(
        p=p,
        q=q,
        p_xyz=V[i + 1].copy(),
        q_xyz=V[j + 1].copy(),
        intrinsic=base.intrinsic,
        method=f"{base.method}:lower-bound",
        extrinsic=base.extrinsic,
        K_lower=base.K_lower,
        provenance=f"theorem3<-{base.provenance}",
        history=base.history,
        certified=base.certified,
        params=params,
    )


def _mesh_vertex_point(mesh: TriangleMesh, v: int) -> SurfacePoint:
    f, c = np.argwhere(mesh.faces == v)[0]
    b = [0.0, 0.0, 0.0]
    b[c] = 1.0
    return SurfacePoint(int(f), tuple(b))
