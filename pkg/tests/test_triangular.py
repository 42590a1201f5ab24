import math

import numpy as np
import pytest

from polydistort.generators import make_fan, make_replacement_surface, make_rtriangular
from polydistort.geometry import build_mesh, mesh_area
from polydistort.intrinsic import cone_distance
from polydistort.packing import shell_packing_upper_bound
from polydistort.triangular import (
    Rejection,
    angle_sum_psi,
    area_threshold,
    fan_distance_lower_bound,
    fan_triangle_area,
    forward_sum,
    rtriangular_reduce,
    select_vertices,
    skeleton_transfer,
    theorem2_certify,
)


@pytest.fixture(scope="module")
def big_fan():
    return make_fan([np.pi / 2] * 420)


@pytest.fixture(scope="module")
def base(big_fan):
    return theorem2_certify(big_fan, 0.5)


def test_angle_sums():
    fan = make_fan([np.pi / 6] * 3, closed=False)
    assert angle_sum_psi(fan, 0, 3) == pytest.approx(np.pi / 2)
    hexa = make_fan([np.pi / 3] * 6)
    assert forward_sum(hexa, 0, 4) == pytest.approx(4 * np.pi / 3)
    assert forward_sum(hexa, 4, 0) == pytest.approx(2 * np.pi / 3)
    sq = make_fan([np.pi / 2] * 4)  # flat, one way 3 pi/2
    assert angle_sum_psi(sq, 0, 3) == pytest.approx(np.pi / 2)
    assert angle_sum_psi(hexa, 2, 3) == pytest.approx(hexa.angles[2])


def test_distance_lower_bound_examples():
    fan = make_fan([np.pi / 6] * 2, closed=False)
    assert fan_distance_lower_bound(fan, 0, 2) == pytest.approx(1.0, rel=1e-12)
    thin = make_fan([0.1, 0.1], closed=False)
    assert fan_distance_lower_bound(thin, 0, 2) == pytest.approx(2 * math.sin(0.1), rel=1e-12)
    wide = make_fan([np.pi / 2] * 2, 2.0, closed=False)
    assert fan_distance_lower_bound(wide, 0, 2) == pytest.approx(4.0, rel=1e-12)
    with pytest.raises(ValueError):
        fan_distance_lower_bound(make_rtriangular([0.5, 0.5], [1, 0.5, 1], closed=False), 0, 2)


def test_triangle_area_examples():
    assert fan_triangle_area(1, np.pi / 2) == 0.5
    assert fan_triangle_area(1, np.pi / 6) == pytest.approx(0.25)
    assert fan_triangle_area(2, np.pi / 3) == pytest.approx(math.sqrt(3))
    with pytest.raises(ValueError):
        fan_triangle_area(1, np.pi)


def test_threshold():
    assert area_threshold(1.0, 0.3, beta=10) == pytest.approx(8 * np.pi)
    assert area_threshold(1.0, 0.5) == pytest.approx(0.5 * 4 * np.pi / 3 * (shell_packing_upper_bound(0.5, 1.0) + 2))


def test_selection_closing_drop():
    fan = make_fan([np.pi / 4] * 9)
    picks, psi, closing, dropped = select_vertices(fan)
    assert picks == [0, 2, 4, 6] and dropped
    assert closing == pytest.approx(3 * np.pi / 4)
    assert all(p >= np.pi / 3 for p in psi)


def test_theorem2_certificate(big_fan, base):
    cert = base.certificate
    i, j = cert.params["fan_index"]
    # independent re-check: chord formula on the developed angle, measured gap
    psi = angle_sum_psi(big_fan, i, j)
    d = 2 * math.sin(psi / 2) if psi < np.pi else 2.0
    e = float(np.linalg.norm(big_fan.boundary[i] - big_fan.boundary[j]))
    assert d >= 1.0 - 1e-12 and e <= 0.5
    assert cert.intrinsic == pytest.approx(d, rel=1e-12)
    assert cert.K_lower == pytest.approx(d / e, rel=1e-12)
    assert cert.K_lower >= 1.0 / 0.5
    assert base.trace.N > base.trace.beta_upper
    picks = base.trace.indices
    for a in range(len(picks)):
        for b in range(a + 1, len(picks)):
            assert angle_sum_psi(big_fan, picks[a], picks[b]) >= np.pi / 3 - 1e-12


def test_theorem2_best_pair_is_brute_force_best(big_fan, base):
    picks = base.trace.indices
    best, pair = -1.0, None
    for a in range(len(picks)):
        for b in range(a + 1, len(picks)):
            i, j = picks[a], picks[b]
            e = float(np.linalg.norm(big_fan.boundary[i] - big_fan.boundary[j]))
            if e <= 0.5:
                k = cone_distance(big_fan, i, j) / e
                if k > best * (1 + 1e-12):
                    best, pair = k, (i, j)
    assert tuple(base.certificate.params["fan_index"]) == pair


def test_flat_fan_rejected():
    fan = make_fan([np.pi / 3] * 6)
    with pytest.raises(Rejection) as exc:
        theorem2_certify(fan, 0.5)
    assert exc.value.deficit == pytest.approx(area_threshold(1.0, 0.5) - mesh_area(fan.mesh))
    assert exc.value.deficit > 0


def test_rtriangular_halves_distances(big_fan, base):
    fan = make_rtriangular([np.pi / 2] * 420, [0.5, 1.0] * 210)
    res = rtriangular_reduce(fan, 0.5)
    c = res.certificate
    assert c.params["lambda"] == pytest.approx(0.5, abs=1e-12)
    ext = res.extras["extension_certificate"]
    assert c.intrinsic == pytest.approx(ext.intrinsic / 2, rel=1e-12)
    assert c.extrinsic == pytest.approx(ext.extrinsic / 2, rel=1e-12)
    assert c.K_lower == pytest.approx(ext.K_lower, rel=1e-12)


def test_rtriangular_on_equal_radii_is_theorem2(big_fan, base):
    c = rtriangular_reduce(big_fan, 0.5).certificate
    assert c.params["lambda"] == pytest.approx(1.0, abs=1e-12)
    assert c.K_lower == pytest.approx(base.certificate.K_lower, rel=1e-12)


def test_transfer_identity_and_tent(big_fan, base):
    same = skeleton_transfer(base.certificate, big_fan, big_fan.mesh)
    assert same.K_lower == base.certificate.K_lower
    tent = make_replacement_surface(big_fan, 0.001)
    moved = skeleton_transfer(base.certificate, big_fan, tent)
    assert moved.K_lower == base.certificate.K_lower
    assert moved.params["replacement_area"] > moved.params["base_area"]


def test_transfer_rejects_shrunk_skeleton(big_fan, base):
    tent = make_replacement_surface(big_fan, 0.001)
    V = tent.vertices.copy()
    V[0] += 1e-3 * (V[5] - V[0])  # apex moves towards y_4: that ray shrinks
    bad = build_mesh(V, tent.faces)
    with pytest.raises(Rejection, match="deviate"):
        skeleton_transfer(base.certificate, big_fan, bad)
