"""Distortion K = intrinsic / extrinsic distance, separated nets, and the
pigeonhole search for pairs of points with large K."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .packing import ball_volume, jung_constant, packing_upper_bound
from .spaces import Space, space_for

log = logging.getLogger(__name__)

# ratios within this relative band count as ties; lowest (i, j) wins
TIE_BAND = 1e-12
_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class DistortionCertificate:
    """A pair of points with intrinsic and extrinsic distance and a bound on K.

    ``certified`` is true when the intrinsic value comes from an exact engine;
    graph estimates only over-estimate, so their ratios are empirical.
    """

    p: Any
    q: Any
    p_xyz: np.ndarray
    q_xyz: np.ndarray
    intrinsic: float
    method: str
    extrinsic: float
    K_lower: float
    provenance: str
    history: tuple[float, ...] = ()
    certified: bool = True
    params: dict = field(default_factory=dict)
    separation: dict | None = None

    def __post_init__(self):
        if self.extrinsic > self.intrinsic * (1 + _SLACK) + 1e-15:
            raise ValueError(f"extrinsic {self.extrinsic!r} exceeds intrinsic {self.intrinsic!r}")
        if self.extrinsic > 0 and self.K_lower > self.intrinsic / self.extrinsic * (1 + _SLACK):
            raise ValueError("K_lower exceeds the measured ratio")

    @property
    def ratio(self) -> float:
        return self.intrinsic / self.extrinsic if self.extrinsic > 0 else 1.0

    def with_fields(self, **kw) -> "DistortionCertificate":
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(kw)
        return DistortionCertificate(**d)

    def to_dict(self) -> dict:
        from .io import format_point

        return {
            "p": format_point(self.p),
            "q": format_point(self.q),
            "p_xyz": [float(x) for x in self.p_xyz],
            "q_xyz": [float(x) for x in self.q_xyz],
            "intrinsic": {"value": self.intrinsic, "method": self.method, "history": list(self.history)},
            "extrinsic": self.extrinsic,
            "K_lower": self.K_lower,
            "certified": self.certified,
            "provenance": self.provenance,
            "params": _jsonable(self.params),
            "separation": _jsonable(self.separation),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DistortionCertificate":
        from .io import parse_point

        return cls(
            p=parse_point(d["p"]),
            q=parse_point(d["q"]),
            p_xyz=np.array(d["p_xyz"], dtype=float),
            q_xyz=np.array(d["q_xyz"], dtype=float),
            intrinsic=float(d["intrinsic"]["value"]),
            method=d["intrinsic"]["method"],
            history=tuple(d["intrinsic"].get("history", ())),
            extrinsic=float(d["extrinsic"]),
            K_lower=float(d["K_lower"]),
            certified=bool(d.get("certified", True)),
            provenance=d["provenance"],
            params=d.get("params") or {},
            separation=d.get("separation"),
        )


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def ratio_K(space, p, q) -> float:
    """K(p, q); 1 on the diagonal."""
    sp = space_for(space)
    a, b = sp.position(p), sp.position(q)
    e = float(np.linalg.norm(a - b))
    if e == 0.0:
        return 1.0
    return sp.distance(p, q) / e


# ---------------------------------------------------------------------------
# nets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SeparatedNet:
    points: list
    r: float
    order: tuple[int, ...]  # candidate index of each net point, in insertion order
    maximal: bool
    distances: np.ndarray  # (len(points), n_candidates) intrinsic distances
    exact: bool

    @property
    def size(self) -> int:
        return len(self.points)

    def pair_distances(self) -> np.ndarray:
        return self.distances[:, list(self.order)]


def greedy_net(space, r: float, candidates: Sequence | None = None) -> SeparatedNet:
    """Maximal r-separated subset of the candidates, grown in candidate order.

    A candidate joins when its intrinsic distance to every earlier net point
    is at least ``r``; every candidate ends within ``r`` of the net.
    """
    sp = space_for(space)
    if not r > 0:
        raise ValueError("net radius must be positive")
    cands = list(sp.candidates().points if candidates is None else candidates)
    if not cands:
        raise ValueError("empty candidate set")
    n = len(cands)
    targets = sp.prepare(cands)
    nearest = np.full(n, np.inf)
    order, rows = [], []
    for i in range(n):
        if nearest[i] < r:
            continue
        row = sp.distances_from(cands[i], targets)
        row[i] = 0.0
        order.append(i)
        rows.append(row)
        np.minimum(nearest, row, out=nearest)
    # maximal: every candidate is a net point or closer than r to one
    maximal = bool(np.all(np.isin(np.arange(n), order) | (nearest < r)))
    return SeparatedNet([cands[i] for i in order], float(r), tuple(order), maximal, np.array(rows), sp.exact)


class _PairQueue:
    """Pairs i < j with 0 < E <= delta, best ratio first; ties go to the lowest (i, j).

    Pairs are listed once in lexicographic order, so the first tied entry
    is the lowest pair.  Removing points or pairs only clears mask bits.
    """

    def __init__(self, D: np.ndarray, E: np.ndarray, delta: float):
        ok = np.triu((E <= delta) & (E > 0), k=1)
        self.I, self.J = np.nonzero(ok)
        self.ratio = D[self.I, self.J] / E[self.I, self.J]
        self.live = np.ones(len(self.I), dtype=bool)

    def best(self) -> tuple[int, int] | None:
        if not self.live.any():
            return None
        r = np.where(self.live, self.ratio, -np.inf)
        top = r.max()
        k = int(np.argmax(r >= top * (1 - TIE_BAND)))
        return int(self.I[k]), int(self.J[k])

    def drop_point(self, v: int):
        self.live &= (self.I != v) & (self.J != v)

    def drop_pair(self, i: int, j: int):
        self.live &= (self.I != i) | (self.J != j)


def _best_pair(D: np.ndarray, E: np.ndarray, delta: float) -> tuple[int, int] | None:
    """Largest D/E over i < j with 0 < E <= delta; ties go to the lowest (i, j)."""
    return _PairQueue(D, E, delta).best()


def _extrinsic_matrix(xyz: np.ndarray) -> np.ndarray:
    d = xyz[:, None, :] - xyz[None, :, :]
    return np.sqrt((d * d).sum(axis=-1))


def _certificate(sp: Space, p, q, intrinsic: float, provenance: str, params: dict, history=None) -> DistortionCertificate:
    a, b = sp.position(p), sp.position(q)
    e = float(np.linalg.norm(a - b))
    hist = tuple(history) if history is not None else (intrinsic,)
    return DistortionCertificate(
        p=p,
        q=q,
        p_xyz=a,
        q_xyz=b,
        intrinsic=float(intrinsic),
        method=sp.method,
        extrinsic=e,
        K_lower=float(intrinsic) / e,
        provenance=provenance,
        history=hist,
        certified=sp.exact,
        params=params,
    )


def find_distorted_pair(space, r: float, delta: float, candidates: Sequence | None = None, net: SeparatedNet | None = None):
    """Net pair with extrinsic distance <= delta and the largest ratio, or None.

    Net points are r apart intrinsically, so any such pair has K >= r/delta.
    """
    if not (r > 0 and delta > 0):
        raise ValueError("r and delta must be positive")
    sp = space_for(space)
    net = net or greedy_net(sp, r, candidates)
    xyz = sp.positions(net.points)
    D = net.pair_distances()
    E = _extrinsic_matrix(xyz)
    pair = _best_pair(D, E, delta)
    if pair is None:
        return None
    i, j = pair
    params = {"r": r, "delta": delta, "net_size": net.size, "net_exact": net.exact, "net_index": [i, j]}
    hist = None if sp.exact else sp.history(net.points[i], net.points[j])
    return _certificate(sp, net.points[i], net.points[j], float(D[i, j]), "lemma1", params, hist)


# ---------------------------------------------------------------------------
# ball areas and the volume hypothesis
# ---------------------------------------------------------------------------


def clipped_areas(xyz: np.ndarray, tris: np.ndarray, values: np.ndarray, level: float) -> np.ndarray:
    """Area of each flat triangle where the linearly interpolated value is <= level."""
    P = xyz[tris]
    full = 0.5 * np.linalg.norm(np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]), axis=1)
    f = values[tris] - level
    inside = f <= 0
    n_in = inside.sum(axis=1)
    frac = np.zeros(len(tris))
    frac[n_in == 3] = 1.0

    def corner(fa, fb, fc):
        # fa has the opposite sign of fb and fc
        return (fa / (fa - fb)) * (fa / (fa - fc))

    for want, lone_inside in ((1, True), (2, False)):
        rows = np.flatnonzero(n_in == want)
        if not len(rows):
            continue
        sub = f[rows]
        ins = inside[rows]
        lone = np.argmax(ins if lone_inside else ~ins, axis=1)
        fa = sub[np.arange(len(rows)), lone]
        fb = sub[np.arange(len(rows)), (lone + 1) % 3]
        fc = sub[np.arange(len(rows)), (lone + 2) % 3]
        c = corner(fa, fb, fc)
        frac[rows] = c if lone_inside else 1.0 - c
    return full * frac


def ball_area(space, center, radius: float, subdivisions: int = 8) -> float:
    """Area of the intrinsic ball, from distances at a refined tiling."""
    sp = space_for(space)
    pts, tris = sp.area_pieces(subdivisions)
    xyz = sp.positions(pts)
    d = sp.distances_from(center, pts)
    return float(clipped_areas(xyz, tris, d, radius).sum())


def ball_area_sup(space, r: float, centers: Sequence, h: float, subdivisions: int = 8) -> float:
    """max over sampled centers of area(B(c, r + h)).

    When every point lies within h of a center, each r-ball sits inside the
    (r+h)-ball around its nearest center, so this bounds a_X(r, 2) from above
    up to the tiling error of the area estimate.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    if h >= r:
        raise ValueError(f"sample density h={h} must be below r={r}")
    sp = space_for(space)
    pts, tris = sp.area_pieces(subdivisions)
    xyz = sp.positions(pts)
    targets = sp.prepare(pts)
    best = 0.0
    for c in centers:
        d = sp.distances_from(c, targets)
        best = max(best, float(clipped_areas(xyz, tris, d, r + h).sum()))
    return best


@dataclass(frozen=True)
class VolumeVerdict:
    holds: bool
    area: float
    threshold: float  # C * beta_upper
    C: float
    beta_upper: int
    delta: float
    K_bound: float  # J_n / (3 delta), guaranteed when the hypothesis holds
    deficit: float  # threshold - area when rejected, else 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def certify_volume_hypothesis(area: float, n: int, m: int, delta: float, C: float | None = None) -> VolumeVerdict:
    """Check area > C * beta for the unit ball of R^n; then K >= J_n/(3 delta) somewhere."""
    if not (area > 0 and delta > 0) or n < 1 or m < 1:
        raise ValueError("area, delta, n, m must be positive")
    J = jung_constant(n)
    if C is None:
        C = ball_volume(m, J / 3)
    if not C > 0:
        raise ValueError("C must be positive")
    beta = packing_upper_bound(n, delta, 1.0)
    thr = C * beta
    holds = area > thr
    return VolumeVerdict(holds, float(area), thr, float(C), beta, float(delta), J / (3 * delta), 0.0 if holds else thr - area)


# ---------------------------------------------------------------------------
# well separated pairs
# ---------------------------------------------------------------------------


def product_separation(D: np.ndarray, a: tuple[int, int], b: tuple[int, int]) -> float:
    """Distance between unordered pairs in X x X with the sup metric."""
    (i, j), (k, l) = a, b
    return min(max(D[i, k], D[j, l]), max(D[i, l], D[j, k]))


class SeparationError(RuntimeError):
    def __init__(self, msg: str, achieved: int):
        super().__init__(msg)
        self.achieved = achieved


def count_separated_pairs(
    space,
    r: float,
    delta: float,
    N: int,
    epsilon: float | None = None,
    candidates: Sequence | None = None,
    n: int = 3,
    net: SeparatedNet | None = None,
) -> list[DistortionCertificate]:
    """N+1 high-distortion pairs, pairwise epsilon apart in X x X.

    Repeatedly takes the best delta-close pair among the remaining net
    points and then forgets its second point.  Pairs closer than epsilon
    to an earlier pair are passed over.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    eps = r / 2 if epsilon is None else float(epsilon)
    sp = space_for(space)
    net = net or greedy_net(sp, r, candidates)
    beta = packing_upper_bound(n, delta, 1.0)
    if net.size <= beta + N:
        raise SeparationError(f"net has {net.size} points, need more than beta + N = {beta + N}", 0)
    D = net.pair_distances()
    E = _extrinsic_matrix(sp.positions(net.points))
    queue = _PairQueue(D, E, delta)
    found: list[tuple[int, int]] = []
    while len(found) < N + 1:
        pair = queue.best()
        if pair is None:
            raise SeparationError(f"found {len(found)} separated pairs, need {N + 1}", len(found))
        if any(product_separation(D, pair, f) < eps for f in found):
            queue.drop_pair(*pair)
            continue
        found.append(pair)
        queue.drop_point(pair[1])
    out = []
    for idx, (i, j) in enumerate(found):
        seps = [product_separation(D, (i, j), f) for f in found if f != (i, j)]
        params = {"r": r, "delta": delta, "epsilon": eps, "N": N, "beta_upper": beta, "net_size": net.size}
        c = _certificate(sp, net.points[i], net.points[j], float(D[i, j]), "section5-count", params)
        out.append(c.with_fields(separation={"index": idx, "net_index": [i, j], "min_product_distance": float(min(seps)) if seps else None}))
    return out
