import itertools
from fractions import Fraction

import pytest

from conftest import system
from thetasph.exppoly import LaurentPoly, exp_key, lattice
from thetasph.multiplicity import (K_EPSILON_TABLES, KEpsilonEntry, MultiplicityError, MultiplicityFn, condition_A,
                                   condition_A2_roots, d_theta, delta_weight, k_epsilon_query, rho)
from thetasph.rootsys import parse_theta


def _scaled(v, c):
    return tuple(Fraction(c) * x for x in v)


def test_rho_examples():
    a1 = system("A1")
    alpha = a1.positive_roots[0]
    assert rho(a1, 2) == alpha
    assert rho(a1, 4) == _scaled(alpha, 2)
    a2 = system("A2")
    s1, s2 = a2.simple_roots
    # rho(2) = sum of positive roots = 2(alpha1 + alpha2)
    assert rho(a2, 2) == tuple(2 * (x + y) for x, y in zip(s1, s2))
    assert rho(a2, 1) == tuple(x + y for x, y in zip(s1, s2))


@pytest.mark.parametrize("name", ("A1", "A2", "A3", "B2", "B3", "C3", "D3", "G2"))
@pytest.mark.parametrize("m", (0, 2, 4, 8))
def test_rho_in_weight_lattice(name, m):
    rs = system(name)
    assert lattice(rs).in_lattice(rho(rs, m))


def test_delta_weight_examples():
    a1 = system("A1")
    alpha = a1.positive_roots[0]
    got = delta_weight(a1, 2)
    assert got == exp_key(a1, _scaled(alpha, 2)) - 2 + exp_key(a1, _scaled(alpha, -2))
    assert delta_weight(system("B2"), 0) == LaurentPoly.const(1, 2)
    with pytest.raises(MultiplicityError):
        delta_weight(a1, 1)


def test_d_theta_examples():
    a1, a2 = system("A1"), system("A2")
    assert d_theta(a2, a2.theta_all, 4) == 0
    assert d_theta(a1, a1.theta_empty, 2) == 1
    assert d_theta(a2, parse_theta(a2, "1"), 2) == 2


def test_multiplicity_spec():
    b2 = system("B2")
    m = MultiplicityFn.from_spec(b2, {"short": 0, "long": 2})
    short = [a for a in b2.positive_roots if not b2.is_long(a)]
    assert all(m[a] == 0 for a in short)
    assert MultiplicityFn.from_spec(b2, '{"all": 4}').constant == 4
    for bad in ({"short": 2}, {"all": 2, "long": 2}, {"odd": 2}, {"all": -2}, {"all": 3}):
        with pytest.raises(MultiplicityError):
            MultiplicityFn.from_spec(b2, bad)
    with pytest.raises(MultiplicityError):
        MultiplicityFn.from_spec(system("A2"), {"short": 2, "long": 4})


def test_condition_a_examples():
    g2 = system("G2")
    for j in range(2):
        assert not condition_A(g2, g2.theta([1 - j]), 4).holds_A2
    for name in ("A1", "A2", "A3"):
        rs = system(name)
        for j in range(rs.rank):
            assert condition_A(rs, rs.theta([i for i in range(rs.rank) if i != j]), 4).holds_A2


@pytest.mark.parametrize("name", ("A1", "A2", "A3", "B2", "B3", "C3", "D3", "G2"))
def test_condition_a1_at_m2(name):
    rs = system(name)
    for k in range(rs.rank + 1):
        for idx in itertools.combinations(range(rs.rank), k):
            assert condition_A(rs, rs.theta(idx), 2).holds_A1


@pytest.mark.parametrize("name, expected", [("A1", [0]), ("A2", [0, 1]), ("B2", [0, 1]), ("B3", [0, 2]),
                                            ("C3", [0, 2]), ("D3", [0, 1, 2]), ("D4", [0, 2, 3]), ("G2", [])])
def test_condition_a2_classifier(name, expected):
    # hand-checked: beta must pair nonnegatively with every positive root containing it
    assert condition_A2_roots(system(name)) == expected


def test_table_examples():
    (row,) = k_epsilon_query(g_name="su*(2n)", table="Riemannian")
    assert (row.sigma_family, row.m_value, row.sigma) == ("A", "4", "A_{n-1}")
    rows = k_epsilon_query(g_name="e6(-26)")
    assert {r.table for r in rows} == {"Riemannian", "NCC"}
    assert all((r.sigma, r.m_value) == ("A2", "8") for r in rows)
    (g2,) = k_epsilon_query(table="KepsII", sigma_family="G2")
    assert (g2.g_name, g2.h_name, g2.m_value) == ("(g2)_C", "g2(2)", "2")


def test_table_invariants():
    assert {e.table for e in K_EPSILON_TABLES} == {"Riemannian", "NCC", "KepsII"}
    assert all(e.m_value == "2" for e in K_EPSILON_TABLES if e.table == "KepsII")
    for e in K_EPSILON_TABLES:
        assert KEpsilonEntry(**e.to_dict()) == e


def test_parametrized_rows():
    (row,) = k_epsilon_query(g_name="su*(2n)", table="Riemannian")
    assert not row.admissible(n=1)
    assert row.admissible(n=3)
    inst = row.instantiate(n=3)
    assert inst["rank"] == 2 and inst["m"] == 4
