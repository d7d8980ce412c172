"""Harish-Chandra series and the coefficient recursions behind them.

An exponent ``mu = 2 sum_i n_i alpha_i`` of the series is stored by its
integer tuple ``n``; its height is ``2 sum n_i``, and truncation at ``N``
keeps ``sum n_i <= N``.

Spectral parameters are :class:`SpectralPoint` (complex orthonormal
coordinates) or exact ambient tuples of ``Fraction``; the latter keep every
coefficient rational.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .rootsys import RootSystemData


class SingularSpectral(ValueError):
    """The recursion denominator vanishes (or nearly so) at some exponent."""

    def __init__(self, where: str):
        super().__init__(f"spectral parameter is singular at {where}")
        self.where = where


class NotInChamber(ValueError):
    pass


class RouteMismatch(AssertionError):
    pass


EPS_SING = 1e-8


@dataclass(frozen=True)
class SpectralPoint:
    """Complex functional on the flat in orthonormal coordinates."""

    coords: tuple

    @classmethod
    def of(cls, x) -> "SpectralPoint":
        return x if isinstance(x, SpectralPoint) else cls(tuple(complex(t) for t in np.atleast_1d(x)))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=complex)


@dataclass(frozen=True)
class FlatPoint:
    """Point ``H`` of the flat (``log a``) in orthonormal coordinates."""

    coords: tuple

    @classmethod
    def of(cls, x) -> "FlatPoint":
        return x if isinstance(x, FlatPoint) else cls(tuple(float(t) for t in np.atleast_1d(x)))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


def spectral_from_alpha_coords(rs: RootSystemData, values) -> SpectralPoint:
    """The functional with ``lambda_{alpha_i} = values[i]``."""
    vals = np.atleast_1d(np.asarray(values, dtype=complex))
    S = rs.simple_ortho
    norms = np.array([float(rs.norm2(a)) for a in rs.simple_roots])
    return SpectralPoint(tuple(np.linalg.solve(S, vals * norms)))


def rank_one_spectral(rs: RootSystemData, x) -> SpectralPoint:
    """``lambda = x * alpha`` in rank one (so ``lambda_alpha = x``)."""
    if rs.rank != 1:
        raise ValueError("rank-one helper")
    return SpectralPoint((complex(x) * rs.simple_ortho[0, 0],))


def rank_one_flat(rs: RootSystemData, z) -> FlatPoint:
    """The point with ``alpha(H) = z`` in rank one."""
    return FlatPoint((float(z) / rs.simple_ortho[0, 0],))


# ---------------------------------------------------------------------------
# Shared structure


class _Frame:
    """Pairings needed by the recursions, exact or floating."""

    def __init__(self, rs: RootSystemData, m, lam=None):
        from .exppoly import lattice  # local import keeps module load light

        self.rs = rs
        self.l = rs.rank
        lat = lattice(rs)
        self.mv = lat.mult_values(m)
        self.pos = list(rs.positive_roots)
        self.acoef = [tuple(int(x) for x in rs.simple_coords(a)) for a in self.pos]
        self.exact = lam is not None and not isinstance(lam, SpectralPoint) and all(
            isinstance(x, (Fraction, int)) for x in lam)
        G = rs.gram
        if self.exact:
            conv = Fraction
            self.G = [[Fraction(x) for x in row] for row in G]
        else:
            conv = float
            self.G = [[float(x) for x in row] for row in G]
        self.conv = conv
        # <alpha_i, lambda>
        if lam is None:
            self.s = None
        elif self.exact:
            lam_t = tuple(Fraction(x) for x in lam)
            self.s = [rs.inner(a, lam_t) for a in rs.simple_roots]
        else:
            lam_a = SpectralPoint.of(lam).array
            self.s = list(rs.simple_ortho @ lam_a)
        # <alpha, alpha_j> per positive root
        self.a_G = [[sum(conv(a[i]) * self.G[i][j] for i in range(self.l)) for j in range(self.l)]
                    for a in self.acoef]
        self.norm_a = [sum(conv(a[j]) * self.a_G[k][j] for j in range(self.l)) for k, a in enumerate(self.acoef)]
        rho_coef = [sum(conv(self.mv[k]) * a[i] for k, a in enumerate(self.acoef)) / 2 for i in range(self.l)]
        self.rho_coef = rho_coef
        self.rho_a = [sum(rho_coef[i] * self.a_G[k][i] for i in range(self.l)) for k in range(len(self.pos))]

    def nGn(self, n) -> object:
        return sum(self.conv(n[i]) * self.G[i][j] * n[j] for i in range(self.l) for j in range(self.l))

    def n_dot_s(self, n):
        return sum(n[i] * self.s[i] for i in range(self.l))

    def n_dot_alpha(self, n, k):
        return sum(self.conv(n[i]) * self.a_G[k][i] for i in range(self.l))

    def lam_alpha_pair(self, k):
        return sum(self.acoef[k][i] * self.s[i] for i in range(self.l))


def _shells(l: int, N: int):
    for h in range(N + 1):
        for n in itertools.product(range(h + 1), repeat=l):
            if sum(n) == h:
                yield n


def _lower(n, a, k):
    t = tuple(x - k * y for x, y in zip(n, a))
    return t if all(x >= 0 for x in t) else None


@dataclass(frozen=True)
class GammaTable:
    m: object
    lam: object
    N: int
    entries: Mapping[tuple, object] = field(repr=False)

    def __getitem__(self, n):
        return self.entries.get(tuple(n), 0)


def gamma_coeffs(rs: RootSystemData, m, lam, N: int, eps_sing: float = EPS_SING) -> GammaTable:
    """Coefficients ``Gamma_mu(m; lambda)`` to height ``2N`` from

    ``<mu, mu - 2 lambda> Gamma_mu = 2 sum_alpha m_alpha sum_k Gamma_{mu - 2k alpha} <mu + rho - 2k alpha - lambda, alpha>``.
    """
    F = _Frame(rs, m, lam)
    entries: dict = {}
    zero = (0,) * F.l
    for n in _shells(F.l, N):
        if n == zero:
            entries[n] = F.conv(1)
            continue
        denom = 4 * F.nGn(n) - 4 * F.n_dot_s(n)
        scale = 4 * abs(F.nGn(n)) if not F.exact else 1
        if (denom == 0) if F.exact else (abs(denom) <= eps_sing * max(1.0, float(scale))):
            raise SingularSpectral(f"<mu, mu - 2 lambda> = 0 for mu = 2*{n} (simple-root coefficients)")
        rhs = 0
        for k_root, a in enumerate(F.acoef):
            mk = F.conv(F.mv[k_root])
            if mk == 0:
                continue
            mu_a = 2 * F.n_dot_alpha(n, k_root)
            lam_a = F.lam_alpha_pair(k_root)
            k = 1
            while True:
                low = _lower(n, a, k)
                if low is None:
                    break
                g = entries.get(low)
                if g:
                    rhs = rhs + g * (mu_a + F.rho_a[k_root] - 2 * k * F.norm_a[k_root] - lam_a) * mk
                k += 1
        entries[n] = 2 * rhs / denom
    return GammaTable(m, lam, N, entries)


def gamma_residual(rs: RootSystemData, table: GammaTable) -> float:
    """Largest relative residual of the recursion over the stored entries."""
    F = _Frame(rs, table.m, table.lam)
    worst = 0.0
    for n, val in table.entries.items():
        if sum(n) == 0:
            continue
        lhs = (4 * F.nGn(n) - 4 * F.n_dot_s(n)) * val
        rhs = 0
        scale = 0.0
        for k_root, a in enumerate(F.acoef):
            mk = F.conv(F.mv[k_root])
            mu_a = 2 * F.n_dot_alpha(n, k_root)
            lam_a = F.lam_alpha_pair(k_root)
            k = 1
            while (low := _lower(n, a, k)) is not None:
                term = 2 * mk * table[low] * (mu_a + F.rho_a[k_root] - 2 * k * F.norm_a[k_root] - lam_a)
                rhs = rhs + term
                scale += abs(complex(term))
                k += 1
        scale = max(scale, abs(complex(lhs)), 1e-300)
        worst = max(worst, abs(complex(lhs - rhs)) / scale)
    return worst


def _require_chamber(rs: RootSystemData, H: np.ndarray):
    if np.any(rs.simple_ortho @ H <= 0):
        raise NotInChamber("H must lie in the open positive chamber")


def _series_sum(rs: RootSystemData, coeffs: Mapping, H: np.ndarray):
    x = rs.simple_ortho @ H  # alpha_i(H)
    total = 0j
    shells: dict = {}
    for n, c in coeffs.items():
        t = complex(c) * math.exp(-2.0 * float(np.dot(n, x)))
        total += t
        h = sum(n)
        shells[h] = max(shells.get(h, 0.0), abs(t))
    return total, shells


def _tail(shells: dict, N: int) -> float:
    if N < 2 or N not in shells or (N - 1) not in shells:
        return float("nan")
    last, prev = shells[N], shells[N - 1]
    if prev == 0:
        return 0.0
    q = last / prev
    return float("inf") if q >= 1 else last * q / (1 - q)


@dataclass(frozen=True)
class SeriesValue:
    value: complex
    tail: float


def phi_series(rs: RootSystemData, m, lam, H, N: int = 40, with_tail: bool = False,
               table: GammaTable | None = None):
    """``Phi(m; lambda, exp H) = e^{(lambda - rho)(H)} sum Gamma_mu e^{-mu(H)}`` for ``H`` in the chamber."""
    Hh = FlatPoint.of(H).array
    _require_chamber(rs, Hh)
    if table is None:
        table = gamma_coeffs(rs, m, lam, N)
    lam_o = _lam_ortho(rs, lam)
    F = _Frame(rs, m)
    rho_o = sum(float(F.rho_coef[i]) * rs.simple_ortho[i] for i in range(rs.rank))
    s, shells = _series_sum(rs, table.entries, Hh)
    val = np.exp(np.dot(lam_o - rho_o, Hh)) * s
    if with_tail:
        return SeriesValue(complex(val), _tail(shells, N) * abs(np.exp(np.dot(lam_o - rho_o, Hh))))
    return complex(val)


def _lam_ortho(rs: RootSystemData, lam) -> np.ndarray:
    if isinstance(lam, SpectralPoint):
        return lam.array
    if all(isinstance(x, (Fraction, int)) for x in lam) and len(lam) == rs.dim:
        return rs.to_ortho([float(x) for x in lam]).astype(complex)
    return np.asarray(lam, dtype=complex)


def singular_distance(rs: RootSystemData, lam, N: int) -> float:
    """Distance proxy to the singular set: ``min |<mu, mu - 2 lambda>| / |mu|``
    over heights up to ``2N`` and ``min |lambda_alpha - n|`` over ``1 <= n <= N``."""
    F = _Frame(rs, 0, SpectralPoint.of(_lam_ortho(rs, lam)))
    best = float("inf")
    for n in _shells(F.l, N):
        if sum(n) == 0:
            continue
        val = 4 * F.nGn(n) - 4 * F.n_dot_s(n)
        best = min(best, abs(val) / (2 * math.sqrt(F.nGn(n))))
    for k in range(len(F.pos)):
        la = F.lam_alpha_pair(k) / F.norm_a[k]
        for n in range(1, N + 1):
            best = min(best, abs(la - n))
    return float(best)


# ---------------------------------------------------------------------------
# Appendix-style coefficient families


def b_coeffs(rs: RootSystemData, m, N: int) -> dict:
    """Exact integer coefficients of ``prod_{alpha>0} (1 - e^{-2 alpha})^{m_alpha/2}``."""
    F = _Frame(rs, m)
    out = {(0,) * F.l: Fraction(1)}
    for k_root, a in enumerate(F.acoef):
        half = F.mv[k_root] / 2
        if half.denominator != 1:
            raise ValueError("b coefficients need even multiplicities")
        half = int(half)
        new: dict = {}
        for n, c in out.items():
            for j in range(half + 1):
                t = tuple(x + j * y for x, y in zip(n, a))
                if sum(t) > N:
                    break
                new[t] = new.get(t, 0) + c * (-1) ** j * math.comb(half, j)
        out = {n: c for n, c in new.items() if c != 0}
    return out


@dataclass(frozen=True)
class CoeffTables:
    a_entries: Mapping[tuple, object] = field(default_factory=dict, repr=False)
    b_entries: Mapping[tuple, object] = field(default_factory=dict, repr=False)
    d_entries: Mapping[tuple, object] = field(default_factory=dict, repr=False)
    c_const: float | None = None
    r_const: float | None = None


def _a_recursion(rs: RootSystemData, m, lam, N: int) -> dict:
    """``<mu - 2 lambda, mu> a_mu = sum_alpha m_alpha (m_alpha - 2) <alpha, alpha> sum_k k a_{mu - 2k alpha}``."""
    F = _Frame(rs, m, lam)
    out: dict = {}
    zero = (0,) * F.l
    for n in _shells(F.l, N):
        if n == zero:
            out[n] = F.conv(1)
            continue
        denom = 4 * F.nGn(n) - 4 * F.n_dot_s(n)
        if (denom == 0) if F.exact else abs(denom) <= EPS_SING:
            raise SingularSpectral(f"<mu, mu - 2 lambda> = 0 for mu = 2*{n}")
        rhs = 0
        for k_root, a in enumerate(F.acoef):
            mk = F.conv(F.mv[k_root])
            fac = mk * (mk - 2) * F.norm_a[k_root]
            if fac == 0:
                continue
            k = 1
            while (low := _lower(n, a, k)) is not None:
                if out.get(low):
                    rhs = rhs + fac * k * out[low]
                k += 1
        out[n] = rhs / denom
    return out


def _a_convolution(rs: RootSystemData, m, lam, N: int) -> dict:
    g = gamma_coeffs(rs, m, lam, N).entries
    b = b_coeffs(rs, m, N)
    out: dict = {}
    for nb, cb in b.items():
        for ng, cg in g.items():
            t = tuple(x + y for x, y in zip(nb, ng))
            if sum(t) <= N:
                out[t] = out.get(t, 0) + cb * cg
    return out


def a_mu_coeffs(rs: RootSystemData, m, lam, N: int, rtol: float = 1e-10) -> CoeffTables:
    """``a_mu`` by the direct recursion, cross-checked against the Cauchy
    product of ``b`` and ``Gamma``."""
    rec = _a_recursion(rs, m, lam, N)
    conv = _a_convolution(rs, m, lam, N)
    for n in set(rec) | set(conv):
        x, y = rec.get(n, 0), conv.get(n, 0)
        if isinstance(x, Fraction) and isinstance(y, Fraction):
            if x != y:
                raise RouteMismatch(f"a_mu routes disagree at {n}: {x} vs {y}")
        elif abs(complex(x) - complex(y)) > rtol * max(1.0, abs(complex(x)), abs(complex(y))):
            raise RouteMismatch(f"a_mu routes disagree at {n}: {x} vs {y}")
    return CoeffTables(a_entries=rec, b_entries=b_coeffs(rs, m, N))


def psi_series(rs: RootSystemData, m, lam, H, N: int = 40) -> complex:
    """``Psi = e^{lambda(H)} sum a_mu e^{-mu(H)}``."""
    Hh = FlatPoint.of(H).array
    _require_chamber(rs, Hh)
    a = _a_recursion(rs, m, lam, N)
    s, _ = _series_sum(rs, a, Hh)
    return complex(np.exp(np.dot(_lam_ortho(rs, lam), Hh)) * s)


def d_mu_coeffs(rs: RootSystemData, m, c: float, H_shift, N: int) -> CoeffTables:
    """Coefficients of ``prod (1 - e^{-2 alpha})^{-c m_alpha / 2}`` from

    ``(<mu,mu> + mu(H)) d_mu = sum_alpha sum_k [2c m (alpha(H)/2 - c <rho, alpha>) + k c m (c m + 2) <alpha,alpha>] d_{mu - 2k alpha}``.

    ``H_shift`` must satisfy ``alpha(H) >= max(2c <rho(m), alpha>, 0)``.
    """
    F = _Frame(rs, m)
    Hh = FlatPoint.of(H_shift).array
    c = float(c)
    alpha_H = [float(rs.to_ortho([float(t) for t in a]) @ Hh) for a in F.pos]
    for k_root in range(len(F.pos)):
        if alpha_H[k_root] < max(2 * c * F.rho_a[k_root], 0.0) - 1e-12:
            raise ValueError("H_shift violates alpha(H) >= max(2c<rho, alpha>, 0)")
    simple_H = rs.simple_ortho @ Hh
    out: dict = {}
    zero = (0,) * F.l
    for n in _shells(F.l, N):
        if n == zero:
            out[n] = 1.0
            continue
        mu_mu = 4 * F.nGn(n)
        mu_H = 2 * float(np.dot(n, simple_H))
        rhs = 0.0
        for k_root, a in enumerate(F.acoef):
            mk = float(F.mv[k_root])
            first = 2 * c * mk * (alpha_H[k_root] / 2 - c * F.rho_a[k_root])
            k = 1
            while (low := _lower(n, a, k)) is not None:
                rhs += (first + k * c * mk * (c * mk + 2) * F.norm_a[k_root]) * out[low]
                k += 1
        out[n] = rhs / (mu_mu + mu_H)
    return CoeffTables(d_entries=out, c_const=c)


def choose_c_r(rs: RootSystemData, m, r: float = 1.001, step: float = 1e-3) -> tuple[float, float]:
    """Least ``c`` on a grid with ``c (c m_alpha + 2) >= r |m_alpha - 2|`` for every root
    with ``m_alpha > 0`` (reduced systems, so ``m_{2 alpha} = 0``)."""
    F = _Frame(rs, m)
    ms = [float(x) for x in F.mv if x > 0]
    if not ms or all(x == 2 for x in ms):
        return 0.0, r
    for i in range(int(round(1 / step))):
        c = i * step
        if all(c * (c * x + 2) >= r * abs(x - 2) for x in ms):
            return round(c, 12), r
    raise ValueError("no admissible c in [0, 1)")
