"""Jung constant, ball volumes and two-sided bounds on packing numbers.

``beta(n, delta, rho)`` is the largest number of points in the closed
radius-``rho`` ball of R^n with pairwise distances at least ``delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.spatial import cKDTree

# guards floor() against a product like 2.9999999999999996 for an exact 3
_FLOOR_SLACK = 1e-12


@dataclass(frozen=True)
class PackingBound:
    dimension: int
    delta: float
    ball_radius: float
    lower: int
    upper: int
    witness: np.ndarray | None = None

    def __post_init__(self):
        if not 1 <= self.lower <= self.upper:
            raise ValueError(f"inconsistent packing bounds {self.lower} > {self.upper}")


def jung_constant(n: int) -> float:
    """J_n = sqrt(2(n+1)/n): diameter lower bound for sets whose enclosing ball has radius 1."""
    if n < 1:
        raise ValueError("dimension must be at least 1")
    return math.sqrt(2.0 * (n + 1) / n)


def ball_volume(m: int, r: float) -> float:
    if m < 1:
        raise ValueError("dimension must be at least 1")
    if r < 0:
        raise ValueError("radius must be non-negative")
    return math.pi ** (m / 2) * r**m / math.gamma(m / 2 + 1)


def packing_upper_bound(n: int, delta: float, ball_radius: float) -> int:
    """floor((1 + 2 rho/delta)^n) from disjoint delta/2 balls in the inflated ball.

    Returns 1 when delta exceeds the diameter 2*rho, where no pair fits.
    """
    _check(n, delta, ball_radius)
    if delta > 2 * ball_radius:
        return 1
    return int(math.floor((1 + 2 * ball_radius / delta) ** n * (1 + _FLOOR_SLACK)))


def shell_packing_upper_bound(delta: float, radius: float) -> int:
    """Bound for delta-separated points on the sphere of ``radius`` in R^3.

    The delta/2 balls around such points are disjoint and lie in the shell
    between radii ``radius - delta/2`` and ``radius + delta/2``.
    """
    _check(3, delta, radius)
    if delta > 2 * radius:
        return 1
    a = 2 * radius / delta
    return int(math.floor(((a + 1) ** 3 - max(a - 1, 0.0) ** 3) * (1 + _FLOOR_SLACK)))


def packing_lower_bound_greedy(n: int, delta: float, ball_radius: float, spacing_ratio: int = 4) -> tuple[int, np.ndarray]:
    """Greedy delta-separated set over the lattice (delta/spacing_ratio) Z^n.

    Candidates inside the ball are visited in lexicographic order and kept
    when at least ``delta`` from every kept point.  Lattice points are
    handled in integer coordinates, so separation is decided exactly.

    Returns the count and the witness points (shape ``(count, n)``).
    """
    _check(n, delta, ball_radius)
    if n not in (2, 3):
        raise ValueError("greedy lattice packing is implemented for n in {2, 3}")
    q = int(spacing_ratio)
    h = delta / q
    M = int(math.floor(ball_radius / h * (1 + _FLOOR_SLACK)))
    lim2 = (ball_radius / h) ** 2 * (1 + _FLOOR_SLACK)
    side = 2 * M + 1
    blocked = np.zeros((side,) * n, dtype=bool)
    r = np.arange(-M, M + 1)
    grids = np.stack(np.meshgrid(*([r] * n), indexing="ij"), axis=-1)
    outside = (grids**2).sum(axis=-1) > lim2
    blocked |= outside
    # offsets closer than delta, i.e. squared integer length below q^2
    stencil = [d for d in product(range(-q, q + 1), repeat=n) if sum(x * x for x in d) < q * q]
    stencil = np.array(stencil, dtype=np.int64)
    kept = []
    flat = blocked.reshape(-1)
    for idx in range(flat.size):
        if flat[idx]:
            continue
        g = np.array(np.unravel_index(idx, blocked.shape))
        kept.append(g - M)
        cells = g + stencil
        ok = np.all((cells >= 0) & (cells < side), axis=1)
        blocked[tuple(cells[ok].T)] = True
    pts = np.array(kept, dtype=np.int64).reshape(-1, n)
    _verify_separated(pts, q)
    return len(pts), pts * h


def _verify_separated(g: np.ndarray, q: int):
    # any pair with |d|^2 < q^2 would sit inside the float radius q - 0.01
    if len(g) > 1 and cKDTree(g).query_pairs(q - 0.01):
        raise AssertionError("greedy packing produced a pair closer than delta")


def packing_bounds(n: int, delta: float, ball_radius: float) -> PackingBound:
    lower, pts = packing_lower_bound_greedy(n, delta, ball_radius)
    return PackingBound(n, float(delta), float(ball_radius), lower, packing_upper_bound(n, delta, ball_radius), pts)


def packing_bound_sweep(n: int, deltas, ball_radius: float) -> list[PackingBound]:
    """Bounds over several separations, with the lower bound carried downward.

    A set that is delta'-separated is delta-separated for every delta <=
    delta', so each entry's lower bound and witness is the best greedy set
    found at its own or any larger delta.  This makes the lower bound
    monotone in delta, which the plain greedy count is not.
    """
    order = sorted(set(float(d) for d in deltas), reverse=True)
    best, best_pts = 0, None
    out = {}
    for d in order:
        cnt, pts = packing_lower_bound_greedy(n, d, ball_radius)
        if cnt > best:
            best, best_pts = cnt, pts
        out[d] = PackingBound(n, d, float(ball_radius), best, packing_upper_bound(n, d, ball_radius), best_pts)
    return [out[float(d)] for d in deltas]


def _check(n, delta, rho):
    if n < 1:
        raise ValueError("dimension must be at least 1")
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not rho > 0:
        raise ValueError("ball radius must be positive")
