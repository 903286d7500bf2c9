import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from corrmate.sphere import (
    ETA, INF, Geodesic, MobiusMap, SpherePoint, chordal, chordal_array, compose_reflections, halfplane_contains,
    is_inf, mobius_from_points, reflect_in_geodesic, to_sphere_coords,
)

coord = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
points = st.builds(complex, coord, coord)
turns = st.floats(0, 1, exclude_max=True)


def unit(t):
    return complex(math.cos(2 * math.pi * t), math.sin(2 * math.pi * t))


def test_chordal_reference_values():
    assert chordal(0, INF) == pytest.approx(2.0)
    assert chordal(1, -1) == pytest.approx(2.0)
    assert chordal(1, 1j) == pytest.approx(math.sqrt(2))
    assert chordal(INF, INF) == 0.0


@given(points, points)
def test_chordal_symmetric_and_bounded(z, w):
    d = chordal(z, w)
    assert d == pytest.approx(chordal(w, z))
    assert 0 <= d <= 2 + 1e-12


@given(points)
def test_chordal_matches_sphere_embedding(z):
    a, b = to_sphere_coords(np.array([z, INF]))
    assert np.linalg.norm(a - b) == pytest.approx(chordal(z, INF), abs=1e-12)


def test_chordal_array_broadcasts():
    z = np.array([0, 1, INF])
    assert chordal_array(z, np.array([0, 1, INF])).max() == 0


def test_eta_swaps_zero_and_infinity():
    assert is_inf(ETA(0j))
    assert ETA(INF) == 0
    assert ETA(2 + 0j) == pytest.approx(0.5)


def test_spherepoint_json_roundtrip():
    for p in (SpherePoint(1.5 - 2j), SpherePoint.infinity()):
        q = SpherePoint.from_json(p.to_json())
        assert q.close(p)
    assert SpherePoint.infinity().to_json() == "inf"


@given(points, points, points, points)
def test_mobius_inverse_roundtrip(a, b, c, d):
    assume(abs(a * d - b * c) > 1e-3 * (1 + abs(a) * abs(d) + abs(b) * abs(c)))
    M = MobiusMap(a, b, c, d)
    z = 0.3 - 0.7j
    assert chordal(M.inverse()(M(z)), z) < 1e-8
    assert (M @ M.inverse()).is_identity(1e-8)


def test_mobius_infinity_conventions():
    M = MobiusMap(2, 1, 1, 0)
    assert M(INF) == 2
    assert is_inf(M(0j))
    assert is_inf(MobiusMap(1, 0, 0, 1)(INF))


def test_mobius_degenerate_rejected():
    with pytest.raises(ValueError):
        MobiusMap(1, 2, 2, 4)


def test_mobius_normalized_and_distance():
    M = MobiusMap(2, 4, 6, 10)
    N = M.normalized()
    assert N.det == pytest.approx(1)
    assert M.distance(MobiusMap(-2, -4, -6, -10)) < 1e-12


@given(st.lists(points, min_size=6, max_size=6, unique=True))
def test_three_point_map(pts):
    src, dst = pts[:3], pts[3:]
    for group in (src, dst):
        assume(min(abs(x - y) for i, x in enumerate(group) for y in group[i + 1:]) > 1e-2)
    M = mobius_from_points(src, dst)
    for s, t in zip(src, dst):
        assert chordal(M(s), t) < 1e-7


def test_three_point_map_with_infinity():
    M = mobius_from_points([27 / 8, INF, 0], [-2, 2, INF])
    assert M.distance(MobiusMap(4, -27, 2, 0)) < 1e-12


def test_mobius_json_roundtrip():
    M = MobiusMap(1 + 2j, 3, -1j, 4)
    assert MobiusMap.from_json(M.to_json()).distance(M) < 1e-15


@given(turns, st.floats(0.02, 0.48), points)
def test_reflection_is_involution(t, width, z):
    G = Geodesic(unit(t), unit(t + width))
    w = reflect_in_geodesic(G, z)
    assume(not is_inf(w))
    assert chordal(reflect_in_geodesic(G, w), z) < 1e-9


@given(turns, st.floats(0.02, 0.48), turns)
def test_reflection_preserves_unit_circle(t, width, s):
    G = Geodesic(unit(t), unit(t + width))
    z = unit(s)
    assert abs(abs(reflect_in_geodesic(G, z)) - 1) < 1e-9
    assert abs(reflect_in_geodesic(G, G.u) - G.u) < 1e-12


def test_diameter_reflection():
    G = Geodesic(1 + 0j, -1 + 0j)
    assert G.is_diameter
    assert reflect_in_geodesic(G, 0.3 + 0.4j) == pytest.approx(0.3 - 0.4j)


@given(turns, turns, points)
def test_composed_reflections_match_pointwise(t, s, z):
    A = Geodesic(unit(t), unit(t + 0.2))
    B = Geodesic(unit(s), unit(s + 0.3))
    M = compose_reflections(A, B)
    w = reflect_in_geodesic(B, reflect_in_geodesic(A, z))
    assume(not is_inf(w) and abs(w) < 1e6)
    assert chordal(M(z), w) < 1e-8


def test_halfplane_sides():
    G = Geodesic(unit(0.0), unit(0.25))
    assert halfplane_contains(G, True, 0j) != halfplane_contains(G, True, 0.9 * unit(0.125))


def test_geodesic_requires_unit_endpoints():
    with pytest.raises(ValueError):
        Geodesic(2 + 0j, 1j)
