from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corrmate.group import (
    GroupData, OrbifoldSignature, build_group, orbifold_to_np, quotient_signature, side_pairing_residuals,
    teich_dimension,
)
from corrmate.sphere import MobiusMap

CASES = [(n, p) for n in range(1, 6) for p in range(1, 9) if n * p >= 3]


@pytest.mark.parametrize("n,p", CASES)
def test_side_pairing_relations(n, p):
    res = side_pairing_residuals(build_group(n, p))
    assert max(res.values()) < 1e-12


@pytest.mark.parametrize("n,p", [(1, 4), (3, 1), (4, 3)])
def test_generators_preserve_the_disk(n, p):
    G = build_group(n, p)
    for g in G.generators.values():
        for t in np.linspace(0, 1, 7):
            z = np.exp(2j * np.pi * t)
            assert abs(abs(g(z)) - 1) < 1e-12
        assert abs(g(0j)) < 1


def test_rotation_has_order_n():
    G = build_group(4, 3)
    R = MobiusMap.identity()
    for _ in range(4):
        R = G.rotation @ R
    assert R.is_identity(1e-12)


def test_middle_generator_is_involution_for_odd_p():
    G = build_group(1, 5)
    g = G.g(1, 3)
    assert (g @ g).is_identity(1e-12)


@pytest.mark.parametrize("n,p", [(1, 2), (2, 1), (1, 1), (0, 4)])
def test_small_groups_rejected(n, p):
    with pytest.raises(ValueError):
        build_group(n, p)


def test_json_schema_and_roundtrip():
    G = build_group(3, 2)
    doc = G.to_json()
    assert doc["schema"] == "corrmate/1"
    assert set(doc["generators"]) == {f"{r},{s}" for r in range(1, 4) for s in range(1, 3)}
    H = GroupData.from_json(doc)
    assert all(H.g(r, s).distance(G.g(r, s)) < 1e-15 for r in range(1, 4) for s in range(1, 3))


def test_arc_index_first_sector():
    G = build_group(1, 4)
    assert G.arc_index(0.1) == (1, 1)
    assert G.arc_index(0.6)[1] == 3


def test_modular_signature():
    sig = quotient_signature(3, 1, extended=True)
    assert (sig.punctures, sig.order2_points, sig.orderN_points) == (1, 1, 1)
    assert sig.euler_characteristic == Fraction(-1, 6)
    assert teich_dimension(3, 1) == 0


@pytest.mark.parametrize("n,p,dim", [(1, 4, 0), (1, 5, 1), (1, 6, 1), (1, 8, 2), (3, 1, 0), (3, 2, 0), (4, 3, 1)])
def test_teich_dimension(n, p, dim):
    assert teich_dimension(n, p) == dim


@pytest.mark.parametrize("n,p", CASES)
def test_non_extended_degree_identity(n, p):
    chi = quotient_signature(n, p).euler_characteristic
    assert 1 - 2 * chi == n * p - 1


@given(st.integers(1, 6), st.integers(0, 1), st.integers(0, 1), st.integers(3, 6))
def test_orbifold_to_np_identity(d1, d2, d3, nu):
    sig = OrbifoldSignature(d1, d2, d3, nu)
    chi = sig.euler_characteristic
    if chi >= 0:
        with pytest.raises(ValueError):
            orbifold_to_np(d1, d2, d3, nu if d3 else None)
        return
    n, p, d = orbifold_to_np(d1, d2, d3, nu if d3 else None)
    assert d == n * p - 1 == 1 - 2 * (nu if d3 else 1) * chi


def test_orbifold_needs_order_for_cone():
    with pytest.raises(ValueError):
        orbifold_to_np(2, 0, 1, None)
