"""One test per acceptance criterion; the terminal summary lists PASS/FAIL per criterion."""

import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import system, transformed_bump
from thetasph import cli
from thetasph import transform as tr
from thetasph.hcseries import (a_mu_coeffs, choose_c_r, d_mu_coeffs, gamma_coeffs, phi_series, rank_one_flat,
                               rank_one_spectral)
from thetasph.rootsys import ConvexBody
from thetasph.special import (c_plus_rho_rank1, eigen_residual, phi_theta_closed_rank1, phi_theta_series,
                              weyl_ortho)

LAMBDAS = [0.3 + 0.7j + 0.35 * j - 0.2j * j for j in range(10)]
ZS = np.linspace(0.5, 3.0, 10)
ROUNDTRIPS = [("A1", "Pi", 2), ("A1", "empty", 2), ("A1", "empty", 4), ("A2", "Pi", 2), ("A2", "1", 2)]


def test_c01_complex_rank_one_series(criterion):
    rs = system("A1")
    start = time.perf_counter()
    worst = 0.0
    for x in LAMBDAS:
        for z in ZS:
            got = phi_series(rs, 2, rank_one_spectral(rs, x), rank_one_flat(rs, z), N=40)
            want = np.exp(x * z) / (np.exp(z) - np.exp(-z))
            worst = max(worst, abs(got - want) / abs(want))
    elapsed = time.perf_counter() - start
    criterion(1, worst < 1e-10 and elapsed < 5, f"max rel err {worst:.2e}, {elapsed:.2f}s")


def test_c02_takahashi_formula(criterion):
    rs = system("A1")
    worst = 0.0
    for x in LAMBDAS:
        for z in ZS:
            got = phi_theta_series(rs, 2, rs.theta_all, rank_one_spectral(rs, x), rank_one_flat(rs, z), N=40)
            got /= c_plus_rho_rank1(2)
            want = np.sinh(x * z) / (x * np.sinh(z))
            worst = max(worst, abs(got - want) / abs(want))
    criterion(2, worst < 1e-10, f"max rel err {worst:.2e}")


def test_c03_rank_one_m4(criterion):
    rs = system("A1")
    alpha = rs.positive_roots[0]
    exact = []
    for x in (Fraction(3, 2), Fraction(5, 2)):
        lam = tuple(x * t for t in alpha)
        g = gamma_coeffs(rs, 4, lam, 2)[(1,)]
        exact.append(g == 2 * (2 - x) / (1 - x))
    worst = 0.0
    for x in LAMBDAS:
        for z in ZS:
            got = phi_series(rs, 4, rank_one_spectral(rs, x), rank_one_flat(rs, z), N=40)
            want = phi_theta_closed_rank1(4, "empty", x, z, normalization="hc")
            worst = max(worst, abs(got - want) / abs(want))
    criterion(3, all(exact) and worst < 1e-8, f"Gamma_2alpha exact: {exact}; series vs closed {worst:.2e}")


def test_c04_cherednik_commutativity(criterion):
    start = time.perf_counter()
    checks = [cli.check_cherednik_commute(s, m, 20, seed=4) for s in ("A2", "B2") for m in (0, 2, 4)]
    elapsed = time.perf_counter() - start
    failures = sum(c["failures"] for c in checks)
    criterion(4, failures == 0 and elapsed < 30, f"{failures} nonzero commutators, {elapsed:.1f}s")


def test_c05_shift_operator_dual_route(criterion):
    checks = [cli.check_shift_routes(s, 8) for s in ("A1", "A2")]
    n = sum(c["checked"] for c in checks)
    criterion(5, all(c["passed"] for c in checks), f"{n} invariant basis elements, exact")


def test_c06_dm_regularity(criterion):
    checks = [cli.check_dm_regular(s, m, 10) for s, m in (("A1", 2), ("A1", 4), ("A1", 6), ("A2", 2))]
    failures = sum(c["failures"] for c in checks)
    criterion(6, failures == 0, f"{failures} division failures over {sum(c['checked'] for c in checks)} inputs")


def test_c07_formula_identity(criterion):
    checks = [cli.check_formula_identity(m, 2) for m in (2, 4)]
    criterion(7, all(c["passed"] for c in checks), "lambda = 2 alpha, m in {2, 4}, both Theta, exact")


def test_c08_eigen_equation(criterion):
    rng = np.random.default_rng(8)
    a1, a2 = system("A1"), system("A2")
    r1 = r2 = 0.0
    for _ in range(10):
        x = complex(rng.uniform(-2, 2), rng.uniform(-3, 3))
        r1 = max(r1, eigen_residual(a1, 2, rank_one_spectral(a1, x), rank_one_flat(a1, rng.uniform(0.4, 2.5))))
        lam = rng.uniform(-2, 2, 2) + 1j * rng.uniform(-3, 3, 2)
        H = np.linalg.solve(a2.simple_ortho, rng.uniform(0.3, 1.5, 2))
        r2 = max(r2, eigen_residual(a2, 2, lam, H))
    criterion(8, r1 < 1e-5 and r2 < 1e-4, f"A1 {r1:.1e}, A2 {r2:.1e}")


def test_c09_inversion_round_trips(criterion):
    parts, ok = [], True
    for name, theta, m in ROUNDTRIPS:
        start = time.perf_counter()
        rs, th, C, f, T, sg, g = transformed_bump(name, theta, m)
        pts, vals = tr.eval_points(f, rs, th, 2 if rs.rank == 2 else None)
        rec = tr.invert_classical(rs, g, m, th, pts, tr.reference_k(rs), sg)
        err = float(np.max(np.abs(rec - vals)))
        elapsed = time.perf_counter() - start
        ok &= err < 1e-3 and elapsed < 60
        parts.append(f"{name}/{theta}/m={m}: {err:.1e} ({elapsed:.0f}s)")
    criterion(9, ok, "; ".join(parts))


def test_c10_shifted_contour(criterion):
    rs, th, C, f, T, sg, g = transformed_bump("A1", "empty", 4)
    pts, vals = tr.eval_points(f, rs, th)
    k = tr.reference_k(rs)
    outs = []
    for t in (2, 3):
        sgs = tr.SpectralGrid.make(rs, sg.L, sg.M, (-t, t))
        outs.append(tr.invert_shifted(rs, T.on_grid(sgs), 4, th, pts, k, sgs))
    independence = float(np.max(np.abs(outs[0] - outs[1])))
    classical = tr.invert_classical(rs, g, 4, th, pts, k, sg)
    agreement = float(np.max(np.abs(outs[0] - classical)))
    criterion(10, independence < 1e-6 and agreement < 1e-3,
              f"mu_alpha=-2 vs -3: {independence:.1e}; shifted vs classical {agreement:.1e}")


def _counterexample(rs):
    """(1/(lambda_alpha - 1) + 2/(lambda_alpha + 1)) h(lambda) with h = F_Pi(bump): decays, not P^av-entire."""
    _, _, C, _, Th, _, _ = transformed_bump("A1", "Pi", 4)

    def g(lam):
        x = tr._lambda_alpha(rs, np.atleast_2d(lam))[:, 0]
        return (1 / (x - 1) + 2 / (x + 1)) * Th(lam)

    return g, C


def test_c11_paley_wiener_forward(criterion):
    verdicts = []
    for name, theta, m in ROUNDTRIPS:
        rs, th, C, f, T, sg, _ = transformed_bump(name, theta, m)
        verdicts.append(tr.pw_membership(rs, T, C, m, th, regularized=T.regularized).verdict)
    rs = system("A1")
    g, C = _counterexample(rs)
    rep = tr.pw_membership(rs, g, C, 4, rs.theta_empty)
    cond1 = all(rep.decay_ok.values())
    ok = all(verdicts) and cond1 and rep.entire_test > 1e-6 and not rep.verdict
    criterion(11, ok, f"transform verdicts {verdicts}; counterexample decay {cond1}, "
                      f"entire test {rep.entire_test:.2f}, verdict {rep.verdict}")


def _orbit_body(rs, C):
    gens = np.array(C.generators, dtype=float)
    return ConvexBody(tuple(map(tuple, np.concatenate([gens @ weyl_ortho(rs, w).T for w in rs.weyl]))))


def test_c12_support_theorems(criterion):
    details, ok = [], True
    for name, theta, m in (("A1", "empty", 4), ("A2", "1", 2)):
        rs, th, C, f, T, sg, g = transformed_bump(name, theta, m)
        hull = _orbit_body(rs, C)
        n = 161 if rs.rank == 1 else 41
        axes = [np.linspace(-4.0, 4.0, n)] * rs.rank
        pts = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=-1)
        vals = np.abs(tr.wave_packet(rs, g, m, pts, sg))
        outside = ~tr._in_body(hull, pts, tol=0.05)
        ratio = float(vals[outside].max() / vals.max())
        ok &= ratio < 1e-4
        details.append(f"{name} outside conv(W C): {ratio:.1e}")
    # Theta = empty, alpha(C) = [0.5, 1.5], so C lies in C(r, X0) = {alpha(H) >= 0.5}
    # Near the wall the inverse divides by a power of Delta, which amplifies the
    # band-limit error of the default L = 40; L = 120 resolves it.
    rs, th, C, f, T, _, _ = transformed_bump("A1", "empty", 4)
    wide = tr.SpectralGrid.make(rs, 120, 2 ** 14)
    z = np.linspace(0.005, 3.0, 600)
    pts = (z / rs.simple_ortho[0, 0])[:, None]
    vals = np.abs(tr.invert_classical(rs, T.on_grid(wide), 4, th, pts, tr.reference_k(rs), wide))
    ratio = float(vals[z < 0.45].max() / vals.max())
    ok &= ratio < 1e-4
    details.append(f"A1 outside C(r, X0): {ratio:.1e}")
    criterion(12, ok, "; ".join(details))


def test_c13_condition_a_classifier(criterion):
    checks = cli.condition_a_suite(None, cli.CONDITION_A_SYSTEMS)
    bad = [f"{c['name'].split('/')[1]} computed {c['computed']} listed {c['listed']}"
           for c in checks if not c["passed"]]
    criterion(13, not bad, "matches the printed list" if not bad else "mismatch: " + "; ".join(bad))


def test_c14_tables_round_trip(criterion):
    checks = cli.tables_suite(None)
    criterion(14, all(c["passed"] for c in checks), ", ".join(f"{c['name']}={c['rows']} rows" for c in checks))


def test_c15_appendix_a_bound(criterion):
    rs = system("A1")
    c, _ = choose_c_r(rs, 4)
    d = d_mu_coeffs(rs, 4, c, rank_one_flat(rs, 2.5), 40).d_entries
    positive = all(v > 0 for v in d.values())
    rng = np.random.default_rng(15)
    low = high = 0.0
    for _ in range(10):
        x = complex(rng.uniform(-1, 1), rng.uniform(-3, 3))  # Re lambda_alpha < R = 1
        a = a_mu_coeffs(rs, 4, rank_one_spectral(rs, x), 40).a_entries
        p = 4 * (1 - x)  # p_R for A1, R = 1: the single hyperplane <2 alpha - 2 lambda, 2 alpha> = 0
        for key, val in a.items():
            ratio = abs(p * complex(val)) / (d[key] * (1 + abs(x)))
            if key[0] <= 20:
                low = max(low, ratio)
            else:
                high = max(high, ratio)
    criterion(15, positive and high <= low, f"d_mu > 0: {positive}; K fitted on heights <= 20: {low:.2f}, "
                                            f"max over 21..40: {high:.2f}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
