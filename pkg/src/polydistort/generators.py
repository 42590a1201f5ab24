"""Example families: embedded (pleated) fans, X_N complexes, tent surfaces."""

from __future__ import annotations

import logging

import numpy as np

from .complex import SkeletonSquareComplex
from .geometry import TriangleFan, TriangleMesh, build_mesh
from .predicates import validate_embedding

log = logging.getLogger(__name__)

ANGLE_TOL = 1e-9

# full pairwise triangle checks above this many faces are skipped; the
# sector argument in make_fan already proves embeddedness
FULL_CHECK_MAX_FACES = 160


class EmbeddingError(RuntimeError):
    pass


def _directions(beta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    cb = np.cos(beta)
    return np.column_stack([cb * np.cos(phi), cb * np.sin(phi), np.sin(beta)])


def _azimuth_steps(theta, beta, nxt):
    """Azimuth steps giving angle ``theta[i]`` between latitudes ``beta[i]``, ``beta[nxt[i]]``."""
    b0, b1 = beta[: len(theta)], beta[nxt]
    c = (np.cos(theta) - np.sin(b0) * np.sin(b1)) / (np.cos(b0) * np.cos(b1))
    return np.arccos(np.clip(c, -1.0, 1.0))


def _cone_latitudes(theta, k):
    """Convex cone: one common latitude with total azimuth 2*pi, by bisection."""
    nxt = (np.arange(len(theta)) + 1) % k
    top = (np.pi - float(theta.max())) / 2 * (1 - 1e-9)

    def excess(b):
        return float(_azimuth_steps(theta, np.full(k, b), nxt).sum()) - 2 * np.pi

    if excess(top) < 0:
        return None
    lo, hi = 0.0, top
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0:
            lo = mid
        else:
            hi = mid
    b = np.full(k, 0.5 * (lo + hi))
    d = _azimuth_steps(theta, b, nxt)
    return b, d * (2 * np.pi / d.sum())


def _next_latitude(beta, dphi, theta, up: bool):
    """Latitude at azimuth offset ``dphi`` making angle ``theta`` with latitude ``beta``."""
    A, B = np.cos(beta) * np.cos(dphi), np.sin(beta)
    R = np.hypot(A, B)
    c = np.cos(theta) / R
    if abs(c) > 1:
        return None
    g, a = np.arctan2(B, A), np.arccos(c)
    out = g + a if up else g - a
    return out if abs(out) < np.pi / 2 - 1e-9 else None


def _close_pair(u_prev, u_first, phi_prev, theta1, theta2):
    """Direction at angles ``theta1`` from ``u_prev`` and ``theta2`` from ``u_first``.

    Intersects two circles on the unit sphere; returns the solution whose
    azimuth lies strictly inside the remaining gap with both steps below pi.
    """
    g = float(u_prev @ u_first)
    n = np.cross(u_prev, u_first)
    nn = float(n @ n)
    if nn < 1e-24:
        return None
    c1, c2 = np.cos(theta1), np.cos(theta2)
    al = (c1 - g * c2) / nn
    ga = (c2 - g * c1) / nn
    base = al * u_prev + ga * u_first
    rest = 1.0 - float(base @ base)
    if rest < 0:
        return None
    eta = np.sqrt(rest / nn)
    for x in (base + eta * n, base - eta * n):
        beta = float(np.arcsin(np.clip(x[2], -1, 1)))
        if abs(beta) >= np.pi / 2 - 1e-9:
            continue
        phi = float(np.arctan2(x[1], x[0])) % (2 * np.pi)
        s1, s2 = phi - phi_prev, 2 * np.pi - phi
        if 0 < s1 < np.pi and 0 < s2 < np.pi:
            return beta, s1, s2
    return None


def _pleat(theta, closed, span, gap: float | None = None):
    """Alternating latitudes, propagated face by face in closed form.

    Azimuth steps are proportional to the angles (so each step is below its
    angle and the next latitude always exists).  A closed cycle is finished
    by a two-circle intersection for the last vertex inside an azimuth
    ``gap`` (default: the closing faces' proportional share).
    """
    m = len(theta)
    k = m if closed else m + 1
    free = m - 2 if closed else m
    dphi = np.empty(m)
    if closed:
        if gap is None:
            gap = span * (theta[-2] + theta[-1]) / theta.sum()
        dphi[:free] = (span - gap) * theta[:free] / theta[:free].sum()
    else:
        dphi[:] = span * theta / theta.sum()
    beta = np.zeros(k)
    beta[0] = -0.5 * min(theta[0], theta[-1])
    for i in range(free if closed else m):
        # head back towards the equator so latitudes stay clear of the poles
        up = beta[i] < 0
        b = _next_latitude(beta[i], dphi[i], theta[i], up)
        if b is None:
            b = _next_latitude(beta[i], dphi[i], theta[i], not up)
        if b is None:
            return None
        beta[i + 1] = b
    if not closed:
        return beta, dphi
    phi_prev = float(dphi[:free].sum())
    u = _directions(beta[[free, 0]], np.array([phi_prev, 0.0]))
    sol = _close_pair(u[0], u[1], phi_prev, theta[m - 2], theta[m - 1])
    if sol is None:
        return None
    beta[k - 1], dphi[m - 2], dphi[m - 1] = sol
    return beta, dphi


def sector_embedded(fan: TriangleFan, axis=(0.0, 0.0, 1.0)) -> bool:
    """Sufficient embedding test: faces project to disjoint angular sectors.

    With every boundary vertex off the axis through the apex and strictly
    increasing azimuth steps below pi that stay within one turn, each face
    projects into its own sector, so faces can only meet along shared edges
    or at the apex.
    """
    z = np.asarray(axis, dtype=float)
    z = z / np.linalg.norm(z)
    e1 = np.cross(z, [1.0, 0.0, 0.0])
    if np.linalg.norm(e1) < 1e-6:
        e1 = np.cross(z, [0.0, 1.0, 0.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(z, e1)
    d = fan.boundary - fan.apex
    x, y = d @ e1, d @ e2
    if np.any(np.hypot(x, y) <= 1e-12 * np.linalg.norm(d, axis=1)):
        return False
    phi = np.arctan2(y, x)
    steps = np.diff(phi if not fan.closed else np.append(phi, phi[0])) % (2 * np.pi)
    if np.any(steps <= 0) or np.any(steps >= np.pi):
        return False
    tot = steps.sum()
    return bool(abs(tot - 2 * np.pi) < 1e-9) if fan.closed else bool(tot < 2 * np.pi)


def make_fan(angles, radii=1.0, closed: bool = True, apex=(0.0, 0.0, 0.0), check: str = "auto") -> TriangleFan:
    """Build an embedded fan with prescribed apex angles.

    Boundary directions get strictly increasing azimuths and latitudes
    chosen so consecutive directions make the requested angles.  A total
    angle above 2*pi gives an accordion of alternating latitudes, below it
    a convex cone, exactly 2*pi a flat disc.  Every face projects to its own
    azimuth sector, which proves embeddedness (``sector_embedded``); with
    ``check="full"`` (or "auto" and few faces) the pairwise triangle test
    runs as well.

    Raises
    ------
    ValueError
        An angle outside (0, pi), a non-positive radius, or a bad ``check``.
    EmbeddingError
        The latitude profile cannot realise the angles.
    """
    if check not in ("auto", "full", "sectors"):
        raise ValueError(f"unknown check {check!r}")
    theta = np.atleast_1d(np.asarray(angles, dtype=float))
    if theta.size == 0 or np.any(theta <= 0) or np.any(theta >= np.pi):
        raise ValueError(f"apex angles must lie in (0, pi), got {theta}")
    k = len(theta) if closed else len(theta) + 1
    r = np.broadcast_to(np.asarray(radii, dtype=float), (k,)).copy()
    if np.any(r <= 0):
        raise ValueError("fan radii must be positive")
    total = float(theta.sum())
    apex = np.asarray(apex, dtype=float)
    if closed and k < 3:
        raise ValueError("a closed fan needs at least 3 faces")

    if closed:
        span = 2 * np.pi
        flat = abs(total - span) <= 1e-12 * span
    else:
        flat = total < 1.5 * np.pi
        span = total if flat else np.pi
    if flat:
        beta = np.zeros(k)
        dphi = theta * (span / total)
        sol = (beta, dphi)
    elif total < span:
        sol = _cone_latitudes(theta, k)
    else:
        sol = None
        # the closing pair is tried at each rotation of the cycle
        gaps = [None, *np.linspace(0.1, 1.9, 19) * np.pi] if closed else [None]
        tries = [(g, sh) for g in gaps for sh in range(k if closed else 1)]
        for gap, shift in tries:
            sol = _pleat(np.roll(theta, -shift), closed, span, gap)
            if sol is not None:
                b, d = sol
                # rotate back: vertex i of the rolled cycle is vertex i+shift
                sol = (np.roll(b, shift), np.roll(d, shift))
                break
    if sol is None:
        raise EmbeddingError(f"no latitude profile realises total angle {total:.6g} with k={k}")
    beta, dphi = sol
    phi = np.concatenate([[0.0], np.cumsum(dphi)])[:k]
    fan = TriangleFan(apex, apex + r[:, None] * _directions(beta, phi), closed)
    err = float(np.max(np.abs(fan.angles - theta)))
    if err > ANGLE_TOL:
        raise EmbeddingError(f"angle error {err:.2e} exceeds {ANGLE_TOL:g}")
    if not sector_embedded(fan):
        raise EmbeddingError("faces do not project to disjoint sectors")
    if check == "full" or (check == "auto" and fan.n_faces <= FULL_CHECK_MAX_FACES):
        rep = validate_embedding(fan.mesh)
        if not rep.embedded:
            raise EmbeddingError(f"faces {rep.pair} intersect")
    return fan


def make_rtriangular(angles, radii, closed: bool = True) -> TriangleFan:
    """Fan with per-vertex radii; ``fan.R`` is the largest radius."""
    return make_fan(angles, radii, closed=closed)


def make_xn(N: int, normals=None) -> SkeletonSquareComplex:
    """Grid of N**3 vertices with spacing 1/N and squares of side N**(-5/4).

    The default square at vertex (i, j, k) is normal to axis (i+j+k) mod 3.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if normals is None:
        r = np.arange(N)
        i, j, k = np.meshgrid(r, r, r, indexing="ij")
        normals = ((i + j + k) % 3).reshape(-1)
    elif np.isscalar(normals):
        normals = np.full(N**3, int(normals))
    return SkeletonSquareComplex(int(N), normals)


def _tent(fan: TriangleFan, h: float) -> TriangleMesh:
    base = fan.mesh
    V = base.vertices
    verts = [V]
    faces = []
    n = len(V)
    for fi, (a, b, c) in enumerate(base.faces.tolist()):
        P = V[[a, b, c]]
        nrm = np.cross(P[1] - P[0], P[2] - P[0])
        nrm /= np.linalg.norm(nrm)
        top = P.mean(axis=0) + h * nrm
        verts.append(top[None, :])
        t = n + fi
        faces += [(a, b, t), (b, c, t), (c, a, t)]
    return build_mesh(np.vstack(verts), faces)


def make_replacement_surface(fan: TriangleFan, h: float) -> TriangleMesh:
    """Replace each fan face by a tent over its barycenter lifted ``h`` along the normal.

    Vertices ``0..k`` are the fan's apex and boundary (as in ``fan.mesh``),
    so the fan's 1-skeleton sits unchanged inside the result.
    """
    if h < 0:
        raise ValueError("lift must be non-negative")
    mesh = _tent(fan, h)
    if validate_embedding(mesh).embedded:
        return mesh
    lo, hi = 0.0, float(h)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if validate_embedding(_tent(fan, mid)).embedded:
            lo = mid
        else:
            hi = mid
    raise EmbeddingError(f"tent with lift {h:g} self-intersects; largest feasible lift found {lo:.6g}")
