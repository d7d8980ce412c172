import itertools
from fractions import Fraction

import numpy as np
import pytest

from conftest import system
from thetasph.multiplicity import MultiplicityFn
from thetasph.rootsys import (ConvexBody, RootSystemError, build_root_system, compose, cone_membership,
                              dual_cone_membership, enumerate_weyl, inverse, min_coset_reps, orbit_hull,
                              parse_theta, support_function)

SMALL = ("A1", "A2", "A3", "B2", "B3", "C3", "D3", "G2")


@pytest.mark.parametrize("name, n_roots, order", [("A1", 2, 2), ("A2", 6, 6), ("G2", 12, 12), ("B2", 8, 8),
                                                  ("B3", 18, 48), ("D4", 24, 192)])
def test_sizes(name, n_roots, order):
    rs = system(name)
    assert len(rs.roots) == n_roots
    assert len(rs.positive_roots) == n_roots // 2
    assert len(rs.weyl) == order


@pytest.mark.parametrize("family, rank", [("A", 0), ("B", 1), ("C", 1), ("D", 2), ("G2", 3), ("E", 6)])
def test_inadmissible(family, rank):
    with pytest.raises(RootSystemError):
        build_root_system(family, rank)


def test_a2_positive_roots():
    rs = system("A2")
    a1, a2 = rs.simple_roots
    assert set(rs.positive_roots) == {a1, a2, tuple(x + y for x, y in zip(a1, a2))}


def test_a1_weyl_and_longest():
    rs = system("A1")
    assert [w.length for w in rs.weyl] == [0, 1]
    assert system("A2").longest.length == 3


def test_weyl_cap():
    with pytest.raises(RootSystemError):
        enumerate_weyl(system("B3"), cap=10)


@pytest.mark.parametrize("name", SMALL)
def test_weyl_permutes_roots_and_lengths(name):
    rs = system(name)
    roots = set(rs.roots)
    pos = set(rs.positive_roots)
    for w in rs.weyl:
        images = [w.apply(a) for a in rs.roots]
        assert set(images) == roots
        assert w.length == sum(w.apply(a) not in pos for a in rs.positive_roots) == len(w.word)


@pytest.mark.parametrize("name", SMALL)
def test_reduced(name):
    rs = system(name)
    assert not any(rs.is_root(tuple(2 * x for x in a)) for a in rs.roots)


def test_weyl_group_closed():
    rs = system("B2")
    mats = {w.matrix for w in rs.weyl}
    for u, v in itertools.product(rs.weyl, repeat=2):
        assert compose(rs, u, v).matrix in mats
    assert all(compose(rs, w, inverse(rs, w)).is_identity for w in rs.weyl)


def test_lambda_alpha():
    a1 = system("A1")
    alpha = a1.positive_roots[0]
    assert a1.lambda_alpha(alpha, alpha) == 1
    assert a1.lambda_alpha(tuple(Fraction(1, 2) * x for x in alpha), alpha) == Fraction(1, 2)
    rs = system("A2")
    s1, s2 = rs.simple_roots
    assert rs.lambda_alpha(s1, tuple(x + y for x, y in zip(s1, s2))) == Fraction(1, 2)
    with pytest.raises(RootSystemError):
        rs.lambda_alpha(s1, tuple(2 * x for x in s1))


def test_min_coset_reps_examples():
    a2 = system("A2")
    assert [w.length for w in min_coset_reps(a2, a2.theta_all)] == [0]
    reps = min_coset_reps(a2, parse_theta(a2, "1"))
    assert len(reps) == 3
    a1 = system("A1")
    assert len(min_coset_reps(a1, a1.theta_empty)) == 2


@pytest.mark.parametrize("name", SMALL)
def test_coset_decomposition_bijective(name):
    rs = system(name)
    for k in range(rs.rank + 1):
        for idx in itertools.combinations(range(rs.rank), k):
            th = rs.theta(idx)
            reps = min_coset_reps(rs, th)
            assert len(reps) * len(th.theta_weyl) == len(rs.weyl)
            products = {compose(rs, u, v).matrix for u in reps for v in th.theta_weyl}
            assert len(products) == len(rs.weyl)
            for u in reps:
                coset = [compose(rs, u, v) for v in th.theta_weyl]
                assert u.length == min(w.length for w in coset)
                if not u.is_identity:
                    assert any(u.apply(rs.simple_roots[j]) not in rs.positive_roots
                               for j in th.complement_simple)


def test_cone_membership_examples():
    a1 = system("A1")
    H = a1.fundamental_coweight(0)
    assert a1.inner(a1.simple_roots[0], H) == 1
    assert cone_membership(a1, H, "a_theta", a1.theta_empty)
    b2 = system("B2")
    assert cone_membership(b2, (Fraction(-3), Fraction(7)), "a_theta", b2.theta_all)
    a2 = system("A2")
    th = parse_theta(a2, "1")
    assert cone_membership(a2, a2.fundamental_coweight(1), "C_theta", th)
    assert not cone_membership(a2, a2.fundamental_coweight(0), "C_theta", th)


def test_c_rx0():
    a1 = system("A1")
    X0 = a1.fundamental_coweight(0)
    th = a1.theta_empty
    inside = tuple(Fraction(3, 2) * x for x in X0)
    outside = tuple(Fraction(1, 4) * x for x in X0)
    assert cone_membership(a1, inside, "C_rX0", th, r=Fraction(1, 2), X0=X0)
    assert not cone_membership(a1, outside, "C_rX0", th, r=Fraction(1, 2), X0=X0)
    with pytest.raises(RootSystemError):
        cone_membership(a1, inside, "C_rX0", th, r=0, X0=X0)


def test_dual_cone_examples():
    a1 = system("A1")
    alpha = a1.positive_roots[0]
    th = a1.theta_empty
    assert dual_cone_membership(a1, (0, 0), th)
    assert dual_cone_membership(a1, alpha, th, MultiplicityFn.from_spec(a1, 2), with_m=True)
    assert not dual_cone_membership(a1, alpha, th, MultiplicityFn.from_spec(a1, 4), with_m=True)
    assert not dual_cone_membership(a1, tuple(-x for x in alpha), th)


def test_support_function_examples():
    a2 = system("A2")
    assert support_function(ConvexBody(((Fraction(0),) * 3,)), a2.simple_roots[0]) == 0
    H = a2.fundamental_coweight(0)
    lam = tuple(2 * x for x in H)  # lam(H) = <H, H> * 2
    E = ConvexBody((H, tuple(-x for x in H)))
    assert support_function(E, lam) == 2 * sum(x * x for x in H)
    hull = orbit_hull(a2, H)
    assert len(hull.generators) == 3  # the coweight has a stabilizer of order 2
    a1 = a2.simple_roots[0]
    assert support_function(hull, a1) == max(sum(x * y for x, y in zip(a1, w.apply(H))) for w in a2.weyl)
    with pytest.raises(RootSystemError):
        ConvexBody(())


@pytest.mark.parametrize("name", ("A2", "B2", "G2"))
def test_support_function_equivariance(name):
    rs = system(name)
    E = ConvexBody((rs.fundamental_coweight(0), tuple(Fraction(1, 3) * x for x in rs.fundamental_coweight(1))))
    lam = rs.simple_roots[1]
    for w in rs.weyl:
        assert E.transformed(w).support(lam) == E.support(inverse(rs, w).apply(lam))


def test_support_function_sublinear():
    rs = system("G2")
    E = orbit_hull(rs, rs.fundamental_coweight(0))
    rng = np.random.default_rng(0)
    for _ in range(50):
        u, v = rng.normal(size=(2, rs.dim))
        assert E.support(u + v) <= E.support(u) + E.support(v) + 1e-12


def test_chamber_images_disjoint():
    rs = system("A2")
    th = parse_theta(rs, "1")
    reps = min_coset_reps(rs, th)
    rng = np.random.default_rng(1)
    outside = np.array(th.outside_positive, dtype=float)
    for _ in range(1000):
        H = rng.normal(size=rs.dim)
        H -= H.mean()  # stay in the span of the roots
        hits = sum(np.all(outside @ inverse(rs, u).apply_float(H) > 0) for u in reps)
        assert hits <= 1


def test_theta_subset():
    rs = system("B3")
    th = parse_theta(rs, "1,2")
    assert len(th.theta_positive) == 3
    assert len(th.theta_weyl) == 6
    assert set(th.theta_positive) | set(th.outside_positive) == set(rs.positive_roots)
    with pytest.raises(RootSystemError):
        parse_theta(rs, "4")
