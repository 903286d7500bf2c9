import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P

from corrmate.bers import (
    FamilyAParams, FamilyBParams, FamilyCParams, build, critical_polynomial, dimension_matches, free_parameter_count,
    inversion_residual, validate_family,
)

CASES = [("a", 1, 4), ("a", 1, 6), ("a", 1, 8), ("b", 1, 5), ("b", 1, 7), ("c", 3, 1), ("c", 3, 2), ("c", 4, 1)]


def test_family_a_base_map():
    R = build("a", 1, 4)
    assert np.allclose(R.num, [1 / 3, 0, 0, 0, 1])
    assert np.allclose(R.den, [0, 0, 0, 1])


def test_family_c_hecke_map():
    R = build("c", 3, 1)
    assert np.allclose(R.num, [1 / 8, 3 / 4, 3 / 2, 1], atol=1e-14)
    assert np.allclose(R.den, [0, 0, 1])


def test_family_c_two_zeros():
    R = build("c", 3, 2)
    expect = P.polypow([0.2, 0, 1], 3)
    assert np.allclose(R.num, expect, atol=1e-14)
    assert np.allclose(R.den, [0, 0, 0, 0, 0, 1])


def test_family_a_linear_relations():
    a = FamilyAParams(3, (0.1,)).coefficients()
    assert a[2] == 0 and a[4] == 0
    assert a[3] == pytest.approx(-0.1 / 3)
    assert a[5] == pytest.approx(1 / 5)


def test_family_b_linear_relations():
    a = FamilyBParams(2, (0.3,)).coefficients()
    assert a[2] == pytest.approx(-0.15)
    assert a[3] == 0
    assert a[4] == pytest.approx(1 / 4)


@pytest.mark.parametrize("fam,n,p", CASES)
def test_structure(fam, n, p):
    R = build(fam, n, p)
    audit = validate_family(R, n, p)
    assert audit.ok, audit.failures
    assert audit.q_inversion_residual < 1e-10
    assert audit.q_at_one < 1e-10
    if p % 2 == 0:
        assert audit.q_at_minus_one < 1e-10
    assert audit.pole_order == n * p - 1
    assert dimension_matches(fam, n, p)


def test_branch_points_share_value():
    audit = validate_family(build("c", 3, 2), 3, 2)
    assert len(audit.branch_points) == 2
    assert max(abs(v) for v in audit.branch_values) < 1e-12


def test_degenerate_parameter_fails_audit():
    audit = validate_family(build("b", 1, 5, [1.0]), 1, 5)
    assert not audit.ok


def test_wrong_parameter_count():
    with pytest.raises(ValueError):
        FamilyAParams(3, ())
    with pytest.raises(ValueError):
        build("a", 1, 5)


@pytest.mark.parametrize("data", [(2.0, 0.5, -1.0), (1.0, 2.0, 3.0), (1.0, 0.0, 0.0)])
def test_bad_critical_data(data):
    with pytest.raises(ValueError):
        FamilyCParams(3, 3, data)


def test_family_c_from_pairs():
    params = FamilyCParams.from_pairs(3, 3, [0.5j])
    R = build("c", 3, 3, [0.5j])
    assert len(params.critical_data) == 3
    assert validate_family(R, 3, 3).q_inversion_residual < 1e-10


small = st.floats(-0.2, 0.2, allow_nan=False)


@given(st.builds(complex, small, small))
def test_family_a_symmetry_any_parameter(t):
    R = build("a", 1, 6, [t])
    Q = critical_polynomial(R, 1, 6)
    assert inversion_residual(Q) < 1e-10
    assert abs(P.polyval(1.0, Q)) < 1e-10 and abs(P.polyval(-1.0, Q)) < 1e-10


@given(st.builds(complex, small, small))
def test_family_b_symmetry_any_parameter(t):
    Q = critical_polynomial(build("b", 1, 5, [t]), 1, 5)
    assert inversion_residual(Q) < 1e-10
    assert abs(P.polyval(1.0, Q)) < 1e-10


@pytest.mark.parametrize("fam,n,p", CASES + [("a", 1, 10), ("b", 1, 9), ("c", 5, 3)])
def test_free_parameters_match_teichmuller_dimension(fam, n, p):
    assert dimension_matches(fam, n, p)
    assert free_parameter_count(fam, n, p) >= 0
