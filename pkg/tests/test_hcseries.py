import cmath
from fractions import Fraction

import numpy as np
import pytest

from conftest import system
from thetasph.exppoly import delta_poly
from thetasph.hcseries import (NotInChamber, SingularSpectral, a_mu_coeffs, b_coeffs, choose_c_r, d_mu_coeffs,
                               gamma_coeffs, gamma_residual, phi_series, psi_series, rank_one_flat,
                               rank_one_spectral, singular_distance, spectral_from_alpha_coords)
from thetasph.special import phi_theta_closed_rank1


def exact_rank_one(rs, x):
    return tuple(Fraction(x) * t for t in rs.positive_roots[0])


def chamber_point(rs, rng):
    return np.linalg.solve(rs.simple_ortho, rng.uniform(0.4, 1.5, rs.rank))


class TestGamma:
    def test_gamma_zero(self):
        rs = system("B2")
        assert gamma_coeffs(rs, 2, spectral_from_alpha_coords(rs, (0.3j, 0.2 + 1j)), 3)[(0, 0)] == 1

    def test_rank_one_m2_all_ones(self):
        a1 = system("A1")
        table = gamma_coeffs(a1, 2, exact_rank_one(a1, Fraction(1, 3)), 12)
        assert all(table[(k,)] == 1 for k in range(13))

    @pytest.mark.parametrize("x", [Fraction(3, 2), Fraction(5, 2), Fraction(-7, 3), Fraction(1, 5)])
    def test_rank_one_m4_first_coefficient(self, x):
        a1 = system("A1")
        assert gamma_coeffs(a1, 4, exact_rank_one(a1, x), 2)[(1,)] == 2 * (2 - x) / (1 - x)

    @pytest.mark.parametrize("name, m", [("A1", 4), ("A2", 2), ("B2", {"short": 2, "long": 4}), ("G2", 2)])
    def test_recursion_residual(self, name, m):
        rs = system(name)
        lam = spectral_from_alpha_coords(rs, [0.3 + 0.7j, -0.4 + 1.1j][: rs.rank])
        assert gamma_residual(rs, gamma_coeffs(rs, m, lam, 12)) < 1e-12

    def test_singular_spectral(self):
        a1 = system("A1")
        with pytest.raises(SingularSpectral):
            gamma_coeffs(a1, 4, exact_rank_one(a1, 1), 4)


class TestPhi:
    def test_m0_is_exponential(self):
        rs = system("A2")
        lam = spectral_from_alpha_coords(rs, (0.5 + 1j, -0.2))
        H = np.linalg.solve(rs.simple_ortho, [0.7, 0.4])
        assert phi_series(rs, 0, lam, H, N=1) == pytest.approx(cmath.exp(np.dot(np.asarray(lam.coords), H)),
                                                               rel=1e-14)

    def test_rank_one_m2(self):
        a1 = system("A1")
        x, z = 0.3 + 0.7j, 1.0
        got = phi_series(a1, 2, rank_one_spectral(a1, x), rank_one_flat(a1, z), N=40)
        assert abs(got / (cmath.exp(x * z) / (2 * np.sinh(z))) - 1) < 1e-10

    def test_rank_one_m4(self):
        a1 = system("A1")
        got = phi_series(a1, 4, rank_one_spectral(a1, 2.5), rank_one_flat(a1, 1.2), N=40)
        want = phi_theta_closed_rank1(4, "empty", 2.5, 1.2, normalization="hc")
        assert abs(got / want - 1) < 1e-8

    def test_tail_estimate_reported(self):
        a1 = system("A1")
        v = phi_series(a1, 4, rank_one_spectral(a1, 0.4j), rank_one_flat(a1, 0.8), N=30, with_tail=True)
        assert 0 <= v.tail < 1e-10 * abs(v.value) + 1e-12

    def test_outside_chamber(self):
        a1 = system("A1")
        with pytest.raises(NotInChamber):
            phi_series(a1, 2, rank_one_spectral(a1, 0.5j), rank_one_flat(a1, -0.3))


class TestAppendixCoefficients:
    def test_b_is_multinomial(self):
        a1 = system("A1")
        assert b_coeffs(a1, 4, 5) == {(0,): 1, (1,): -2, (2,): 1}
        a2 = system("A2")
        b = b_coeffs(a2, 2, 4)
        assert b[(0, 0)] == 1 and b[(1, 0)] == -1 and b[(2, 2)] == -1
        assert all(isinstance(v, Fraction) and v.denominator == 1 for v in b.values())

    def test_a_zero_and_complex_case(self):
        a1 = system("A1")
        a = a_mu_coeffs(a1, 2, rank_one_spectral(a1, 0.3 + 0.2j), 10).a_entries
        assert a[(0,)] == 1
        assert all(abs(complex(v)) == 0 for k, v in a.items() if k != (0,))

    def test_a_rank_one_m4_dual_route(self):
        a1 = system("A1")
        x = Fraction(1, 3)
        a = a_mu_coeffs(a1, 4, exact_rank_one(a1, x), 6).a_entries
        assert a[(1,)] == 2 / (1 - x)

    @pytest.mark.parametrize("name", ("A1", "A2"))
    def test_psi_is_delta_half_times_phi(self, name):
        rs = system(name)
        rng = np.random.default_rng(4)
        for _ in range(5):
            lam = spectral_from_alpha_coords(rs, rng.uniform(-1, 1, rs.rank) + 1j * rng.uniform(-2, 2, rs.rank))
            H = chamber_point(rs, rng)
            psi = psi_series(rs, 4, lam, H, N=40)
            phi = phi_series(rs, 4, lam, H, N=40)
            d = delta_poly(rs, 2).evaluate(rs, H)
            assert abs(psi - d * phi) <= 1e-10 * abs(psi)

    def test_d_coefficients(self):
        a1 = system("A1")
        c, r = choose_c_r(a1, 4)
        d = d_mu_coeffs(a1, 4, c, rank_one_flat(a1, 2.5), 10).d_entries
        assert d[(0,)] == 1
        assert all(v > 0 for v in d.values())
        zero = d_mu_coeffs(a1, 4, 0.0, rank_one_flat(a1, 1.0), 10).d_entries
        assert {k: v for k, v in zero.items() if v} == {(0,): 1}

    def test_d_rejects_small_shift(self):
        a1 = system("A1")
        c, _ = choose_c_r(a1, 4)
        with pytest.raises(ValueError):
            d_mu_coeffs(a1, 4, c, rank_one_flat(a1, 1.0), 5)

    def test_choose_c_r(self):
        a1 = system("A1")
        assert choose_c_r(a1, 2) == (0.0, 1.001)
        assert choose_c_r(a1, 0)[0] == 0.0
        c, r = choose_c_r(a1, 4)
        assert c == pytest.approx(0.501, abs=1e-12)
        assert c * (4 * c + 2) >= r * 2 > (c - 1e-3) * (4 * (c - 1e-3) + 2)


class TestSingularDistance:
    def test_examples(self):
        a1 = system("A1")
        assert singular_distance(a1, rank_one_spectral(a1, 1), 5) == pytest.approx(0, abs=1e-14)
        assert singular_distance(a1, rank_one_spectral(a1, 1j), 5) >= 1
        assert singular_distance(a1, rank_one_spectral(a1, 0.5), 5) == pytest.approx(0.5, abs=1e-14)
