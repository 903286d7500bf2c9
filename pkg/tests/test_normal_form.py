import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from corrmate.bers import build
from corrmate.correspondence import Correspondence, set_distance
from corrmate.normal_form import NormalFormError, bp_branches, bp_normalize
from corrmate.rational import RationalMap
from corrmate.sphere import INF, MobiusMap


@pytest.fixture(scope="module")
def res():
    return bp_normalize(build("c", 3, 1), 3)


def test_polynomial_model(res):
    assert np.allclose(res.R1.num, [0, -3, 0, 1], atol=1e-9)
    assert res.R1.is_polynomial and res.R1.degree == 3
    assert abs(res.a - 5) < 1e-9
    assert res.final_identity_residual < 1e-8


def test_coordinate_changes(res):
    assert res.M1.distance(MobiusMap(4, -1, 2, 1).normalized()) < 1e-12
    assert res.M2.distance(MobiusMap(4, -27, 2, 0).normalized()) < 1e-12
    for u in (0.3, -2.0 + 1j, 7.0):
        assert res.M3(u) == pytest.approx((u - 1) / (res.a - u))


def test_critical_data_of_cubic(res):
    d = P.polyder(res.R1.num)
    for u, v in ((1, -2), (-1, 2)):
        assert abs(P.polyval(u, d)) < 1e-9
        assert abs(P.polyval(u, res.R1.num) - v) < 1e-9


def test_involutions(res):
    assert abs(res.eta1(1 + 0j) - 1) < 1e-12
    assert abs(res.eta1(res.a) - res.a) < 1e-9
    assert res.eta2.distance(MobiusMap(1, 0, 0, -1).normalized()) < 1e-9


def test_branches_are_two_to_two(res):
    assert len(bp_branches(res, 0.4 + 0.3j)) == 2


def test_chain_commutes_with_forward(res):
    C = Correspondence(build("c", 3, 1))
    chart = res.chart
    rng = np.random.default_rng(11)
    for _ in range(100):
        z = complex(*rng.normal(size=2))
        back = [chart.inverse()(y) for y in bp_branches(res, chart(z))]
        assert set_distance(back, C.forward(z)) < 1e-7


def test_double_root_at_critical_point(res):
    # R1(2) = R1(-1) = 2 and -1 is critical, so u0 = 2 gives a double root at u = -1
    X = -res.M3(2 + 0j)
    Y = bp_branches(res, X)
    assert abs(Y[0] - Y[1]) < 1e-6
    assert abs(Y[0] - res.M3(-1 + 0j)) < 1e-6


@pytest.mark.parametrize("n", [4, 5])
def test_higher_order_inputs(n):
    r = bp_normalize(build("c", n, 1), n)
    assert r.R1.degree == n
    assert r.final_identity_residual < 1e-8
    assert len(bp_branches(r, 0.2 + 0.1j)) == n - 1


def test_rejects_wrong_family():
    with pytest.raises(NormalFormError):
        bp_normalize(build("a", 1, 4), 3)
    with pytest.raises(NormalFormError):
        bp_normalize(RationalMap([1, 0, 0, 1], [0, 1]), 3)


def test_json(res):
    doc = res.to_json()
    assert doc["a"] == pytest.approx([5, 0])
    assert len(doc["R1"]["num"]) == 4
