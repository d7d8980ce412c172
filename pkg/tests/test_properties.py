"""Property-based checks on the exact algebra and the convex-geometry helpers."""

from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import system
from thetasph.exppoly import (LaurentPoly, cherednik_poly_apply, delta_poly, divide_by_delta, is_invariant,
                              orbit_sum, weyl_act)
from thetasph.rootsys import orbit_hull

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)


def polys(rank, max_terms=4, spread=3):
    keys = st.tuples(*[st.integers(-spread, spread)] * rank)
    return st.dictionaries(keys, coeffs, max_size=max_terms).map(lambda d: LaurentPoly(d, rank))


@given(polys(2), polys(2), polys(2))
def test_ring_laws(f, g, h):
    assert f + g == g + f
    assert f * g == g * f
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert f - f == LaurentPoly.zero(2)
    assert f * LaurentPoly.const(1, 2) == f


@given(polys(2), st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
def test_shift_is_monomial_product(f, key):
    assert f.shift(key) == f * LaurentPoly.mono(key)


@given(polys(2))
def test_json_roundtrip(f):
    assert LaurentPoly.from_json(f.to_json(), 2) == f


@given(polys(2), st.sampled_from(["A2", "B2", "G2"]))
def test_weyl_action_is_a_ring_map(f, name):
    rs = system(name)
    g = LaurentPoly.mono((1, -1), Fraction(1, 2)) + 1
    for w in rs.weyl[:4]:
        assert weyl_act(rs, w, f * g) == weyl_act(rs, w, f) * weyl_act(rs, w, g)


@settings(max_examples=30, deadline=None)
@given(polys(2, max_terms=3, spread=2), st.sampled_from(["A2", "B2"]))
def test_division_by_delta_roundtrip(f, name):
    rs = system(name)
    assert divide_by_delta(rs, f * delta_poly(rs) ** 2, 2) == f


@settings(max_examples=25, deadline=None)
@given(polys(2, max_terms=3, spread=2), st.sampled_from([0, 2, 4]))
def test_cherednik_operators_commute(f, m):
    rs = system("A2")
    ab = cherednik_poly_apply(rs, m, {(1, 1): 1}, f)
    ba = cherednik_poly_apply(rs, m, {(1, 1): 1}, f, order=lambda fs: tuple(reversed(fs)))
    assert ab == ba


@given(st.tuples(st.integers(0, 3), st.integers(0, 3)), st.sampled_from(["A2", "B2", "G2"]))
def test_orbit_sums_are_invariant(key, name):
    assert is_invariant(system(name), orbit_sum(system(name), key))


vectors = st.lists(st.floats(-3, 3, allow_nan=False), min_size=2, max_size=2).map(np.array)


@given(vectors, vectors, st.floats(0, 4))
def test_support_function_sublinear_and_homogeneous(u, v, t):
    rs = system("A2")
    E = orbit_hull(rs, rs.fundamental_coweight(0))
    amb = np.array(rs.simple_roots, dtype=float).T
    a, b = amb @ u, amb @ v
    assert E.support(a + b) <= E.support(a) + E.support(b) + 1e-9
    assert abs(E.support(t * a) - t * E.support(a)) <= 1e-9 * (1 + abs(t * E.support(a)))
