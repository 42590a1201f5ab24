import math

import numpy as np
import pytest

from polydistort.complex import SquarePoint
from polydistort.generators import make_fan, make_xn
from polydistort.geometry import TriangleFan, build_mesh
from polydistort.intrinsic import SurfacePoint, fan_vertex
from polydistort.packing import jung_constant
from polydistort.search import (
    DistortionCertificate,
    SeparationError,
    ball_area,
    ball_area_sup,
    certify_volume_hypothesis,
    count_separated_pairs,
    find_distorted_pair,
    greedy_net,
    product_separation,
    ratio_K,
)
from polydistort.spaces import ComplexSpace, FanSpace, MeshSpace

R3 = jung_constant(3) / 3


@pytest.fixture(scope="module")
def big_fan():
    return make_fan([np.pi / 2] * 420)


def test_ratio_on_diagonal_and_flat_disc():
    fan = make_fan([np.pi / 3] * 6)
    sp = FanSpace(fan)
    p = fan_vertex(fan, 0)
    assert ratio_K(sp, p, p) == 1.0
    for j in range(1, 6):
        assert ratio_K(sp, p, fan_vertex(fan, j)) == pytest.approx(1.0, rel=1e-12)


def test_ratio_pleated_example():
    # y_1 at the pole, y_0 and y_2 at pi/4 from it and 0.9 apart: psi = pi/2
    s = math.sin(math.pi / 4)
    cg = 0.9 / (2 * s)
    sg = math.sqrt(1 - cg * cg)
    y0 = [-s * cg, s * sg, s]
    y2 = [s * cg, s * sg, s]
    fan = TriangleFan([0, 0, 0], [y0, [0, 0, 1], y2], closed=False)
    assert np.linalg.norm(fan.boundary[0] - fan.boundary[2]) == pytest.approx(0.9, rel=1e-15)
    got = ratio_K(FanSpace(fan), fan_vertex(fan, 0), fan_vertex(fan, 2))
    assert got == pytest.approx(math.sqrt(2) / 0.9, rel=1e-12)


def test_greedy_net_one_dimensional_sweep():
    # segment [0, 1] as a thin open strip of two triangles; candidates on its axis
    m = build_mesh([[0, -1e-3, 0], [1, -1e-3, 0], [1, 1e-3, 0], [0, 1e-3, 0]], [[0, 1, 2], [0, 2, 3]])
    sp = MeshSpace(m, level=0)
    cands = [SurfacePoint(0, (1 - t, t, 0.0)) for t in np.linspace(0, 1, 11)]
    net = greedy_net(sp, 0.35, cands)
    xs = sorted(round(float(sp.position(p)[0]), 9) for p in net.points)
    assert xs == [0.0, 0.4, 0.8]
    assert net.maximal


def test_net_extremes():
    fan = make_fan([np.pi / 3] * 6)
    sp = FanSpace(fan)
    cands = [fan_vertex(fan, i) for i in range(6)]
    assert greedy_net(sp, 10.0, cands).size == 1
    assert greedy_net(sp, 1e-9, cands).size == 6


def test_flat_disc_has_no_distorted_pair():
    fan = make_fan([np.pi / 3] * 6)
    for r, d in ((0.5, 0.3), (0.3, 0.2)):
        assert find_distorted_pair(FanSpace(fan), r, d) is None


def _brute_best(D, E, delta):
    best, pair = -1.0, None
    n = len(D)
    for i in range(n):
        for j in range(i + 1, n):
            if E[i, j] <= delta and E[i, j] > 0:
                k = D[i, j] / E[i, j]
                if k > best * (1 + 1e-12):
                    best, pair = k, (i, j)
    return pair


def test_lemma1_matches_brute_force(big_fan):
    sp = FanSpace(big_fan)
    net = greedy_net(sp, R3)
    cert = find_distorted_pair(sp, R3, 0.5, net=net)
    xyz = sp.positions(net.points)
    D = net.pair_distances()
    E = np.linalg.norm(xyz[:, None] - xyz[None], axis=-1)
    assert tuple(cert.params["net_index"]) == _brute_best(D, E, 0.5)
    assert cert.K_lower >= R3 / 0.5
    assert cert.extrinsic <= 0.5
    assert cert.certified and cert.method == "exact-cone"


def test_xn_vertex_candidates_bounded():
    sp = ComplexSpace(make_xn(3))
    assert find_distorted_pair(sp, 0.5, 0.2) is None


def test_certificate_round_trip(big_fan):
    cert = find_distorted_pair(FanSpace(big_fan), R3, 0.5)
    back = DistortionCertificate.from_dict(cert.to_dict())
    assert back.p == cert.p and back.q == cert.q
    assert back.K_lower == cert.K_lower and back.intrinsic == cert.intrinsic
    assert np.array_equal(back.p_xyz, cert.p_xyz)
    X = make_xn(2)
    c2 = DistortionCertificate(SquarePoint(0, 0.5, 0.5), SquarePoint(1, 0.5, 0.5), X.vertices[0], X.vertices[1], 0.5, "complex-exact", 0.5, 1.0, "test")
    assert DistortionCertificate.from_dict(c2.to_dict()).q == SquarePoint(1, 0.5, 0.5)


def test_certificate_invariants():
    with pytest.raises(ValueError):
        DistortionCertificate(None, None, np.zeros(3), np.ones(3), 1.0, "x", 2.0, 0.5, "t")
    with pytest.raises(ValueError):
        DistortionCertificate(None, None, np.zeros(3), np.ones(3), 2.0, "x", 1.0, 3.0, "t")


def test_volume_hypothesis():
    v = certify_volume_hypothesis(10000, 3, 2, 0.1, C=0.9308423)
    assert v.beta_upper == 9261
    assert v.threshold == pytest.approx(0.9308423 * 9261)
    assert v.holds and v.K_bound == pytest.approx(jung_constant(3) / 0.3)
    r = certify_volume_hypothesis(1, 3, 2, 0.1, C=0.9308423)
    assert not r.holds and r.deficit == pytest.approx(0.9308423 * 9261 - 1)
    big = certify_volume_hypothesis(1.0, 3, 2, 5.0)
    assert big.beta_upper == 1 and big.holds and big.K_bound < 1


def test_ball_area_flat_disc():
    fan = make_fan([np.pi / 3] * 6)
    sp = FanSpace(fan)
    apex = SurfacePoint(0, (1, 0, 0))
    for r in (0.3, 0.6):
        assert ball_area(sp, apex, r, 16) == pytest.approx(np.pi * r * r, rel=0.05)
    assert ball_area(sp, apex, 5.0, 4) == pytest.approx(sp.area, rel=1e-12)


def test_ball_area_cone_sector():
    fan = make_fan([np.pi / 4] * 12)  # total 3 pi
    sp = FanSpace(fan)
    apex = SurfacePoint(0, (1, 0, 0))
    r = 0.5
    assert ball_area(sp, apex, r, 12) == pytest.approx(fan.total_angle / 2 * r * r, rel=0.05)


def test_ball_area_sup_bounds_every_center():
    fan = make_fan([np.pi / 3] * 6)
    sp = FanSpace(fan)
    cand = sp.sample(4)
    r = 0.4
    up = ball_area_sup(sp, r, cand.points, cand.h, 8)
    rng = np.random.default_rng(0)
    for f, b in zip(rng.integers(0, 6, 10), rng.dirichlet([1, 1, 1], 10)):
        assert ball_area(sp, SurfacePoint(int(f), tuple(b)), r, 8) <= up + 1e-9
    with pytest.raises(ValueError):
        ball_area_sup(sp, 0.1, cand.points, 0.2)


def test_count_separated_pairs(big_fan):
    sp = FanSpace(big_fan)
    net = greedy_net(sp, R3)
    certs = count_separated_pairs(sp, R3, 0.5, 3, net=net)
    assert len(certs) == 4
    D = net.pair_distances()
    idx = [tuple(c.separation["net_index"]) for c in certs]
    for a in range(4):
        for b in range(a + 1, 4):
            assert product_separation(D, idx[a], idx[b]) >= R3 / 2
    assert all(c.K_lower >= R3 / 0.5 for c in certs)
    zero = count_separated_pairs(sp, R3, 0.5, 0, net=net)
    assert zero[0].params["N"] == 0
    assert tuple(zero[0].separation["net_index"]) == tuple(find_distorted_pair(sp, R3, 0.5, net=net).params["net_index"])


def test_count_separated_pairs_huge_epsilon(big_fan):
    sp = FanSpace(big_fan)
    with pytest.raises(SeparationError) as exc:
        count_separated_pairs(sp, R3, 0.5, 1, epsilon=100.0)
    assert exc.value.achieved == 1
    small = make_fan([np.pi / 3] * 6)
    with pytest.raises(SeparationError, match="net has"):
        count_separated_pairs(FanSpace(small), R3, 0.5, 3)
