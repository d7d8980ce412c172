"""Exact algebra on the group ring of the lattice ``P``.

``P`` is the lattice of functionals ``mu`` with ``mu_alpha`` integral for all
roots.  It has the basis ``w_1 .. w_l`` dual to the simple roots in the sense
``<w_i, alpha_j>/<alpha_j, alpha_j> = delta_ij``, so an exponent is stored as
the integer tuple ``(mu_{alpha_1}, ..., mu_{alpha_l})``.

Derivatives are taken along ``h_j = alpha_j / <alpha_j, alpha_j>``, for which
``d(h_j) e^mu = mu_{alpha_j} e^mu``.  A point ``H`` of the flat is encoded for
differentiation by its coordinates ``c_j`` in that basis.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Mapping, Sequence

import numpy as np

from .rootsys import RootSystemData, WeylElement, solve_exact

Key = tuple  # tuple[int, ...]


class DivisionError(ArithmeticError):
    """Exact division left a nonzero remainder."""


# ---------------------------------------------------------------------------
# Lattice bookkeeping


class Lattice:
    """Integer-key description of ``P`` for one root system."""

    def __init__(self, rs: RootSystemData):
        self.rs = rs
        self.l = rs.rank
        G = [list(r) for r in rs.gram]
        self.d = [G[i][i] for i in range(self.l)]
        cols = [solve_exact(G, [Fraction(int(i == j)) for i in range(self.l)]) for j in range(self.l)]
        self.Ginv = [[cols[j][i] for j in range(self.l)] for i in range(self.l)]
        # <w_i, w_j> = d_i d_j Ginv_ij
        self.fund_gram = [[self.d[i] * self.d[j] * self.Ginv[i][j] for j in range(self.l)]
                          for i in range(self.l)]
        self.pos = list(rs.positive_roots)
        self.pos_keys = [self.key_of(a, exact=False) for a in self.pos]
        self.pos_key2 = [tuple(int(2 * x) for x in k) for k in self.pos_keys]
        # mu_alpha = sum_i k_i * alpha_coeff_i * d_i / <alpha, alpha>
        self.pos_dual = []
        for a in self.pos:
            n = rs.simple_coords(a)
            na = rs.norm2(a)
            self.pos_dual.append(tuple(n[i] * self.d[i] / na for i in range(self.l)))

    # -- conversions -------------------------------------------------------
    def key_of(self, lam, exact: bool = True) -> tuple:
        """Key of an ambient functional; with ``exact`` it must lie in ``P``."""
        k = tuple(self.rs.inner(tuple(Fraction(x) for x in lam), a) / di
                  for a, di in zip(self.rs.simple_roots, self.d))
        if exact:
            if any(x.denominator != 1 for x in k):
                raise ValueError(f"{lam} is not in the lattice P")
            return tuple(int(x) for x in k)
        return k

    def in_lattice(self, lam) -> bool:
        return all(x.denominator == 1 for x in self.key_of(lam, exact=False))

    def ambient_of(self, key) -> tuple:
        # w_i = sum_k d_i Ginv_ik alpha_k
        coeffs = [sum((Fraction(key[i]) * self.d[i] * self.Ginv[i][k] for i in range(self.l)), Fraction(0))
                  for k in range(self.l)]
        return self.rs.combo(coeffs)

    def key_inner(self, a, b) -> Fraction:
        return sum((Fraction(a[i]) * b[j] * self.fund_gram[i][j]
                    for i in range(self.l) for j in range(self.l)), Fraction(0))

    def mu_alpha(self, key, i: int):
        """``mu_alpha`` for the i-th positive root."""
        return sum((x * y for x, y in zip(self.pos_dual[i], key)), Fraction(0))

    def pairing_h(self, key, c) -> Fraction:
        """``mu(H)`` for ``H = sum_j c_j h_j``."""
        return sum((Fraction(k) * x for k, x in zip(key, c)), Fraction(0))

    def h_of_root(self, i: int) -> tuple:
        """h-coordinates of ``alpha/<alpha,alpha>`` for the i-th positive root."""
        return self.pos_dual[i]

    def h_of_ambient(self, H) -> tuple:
        """h-coordinates ``c_i = <w_i, H>`` of an ambient point."""
        return tuple(self.rs.inner(self.ambient_of(tuple(int(i == j) for j in range(self.l))), tuple(H))
                     for i in range(self.l))

    def alpha_h(self, i: int, c) -> Fraction:
        """``alpha(H)`` for the i-th positive root and ``H`` in h-coordinates."""
        return sum((Fraction(x) * y for x, y in zip(self.pos_keys[i], c)), Fraction(0))

    @cached_property
    def fund_ortho(self) -> np.ndarray:
        """Rows: orthonormal coordinates of the basis functionals ``w_i``."""
        rows = []
        for i in range(self.l):
            amb = self.ambient_of(tuple(int(i == j) for j in range(self.l)))
            rows.append(self.rs.to_ortho([float(x) for x in amb]))
        return np.array(rows)

    def key_to_ortho(self, key) -> np.ndarray:
        return np.asarray(key, dtype=float) @ self.fund_ortho

    def ortho_to_key(self, x) -> np.ndarray:
        """Real-valued key coordinates ``lambda_{alpha_i}`` of an ortho functional."""
        return np.linalg.solve(self.fund_ortho.T, np.asarray(x))

    # -- Weyl action ---------------------------------------------------------
    @cached_property
    def weyl_key_mats(self) -> list[tuple[tuple[int, ...], ...]]:
        mats = []
        basis_amb = [self.ambient_of(tuple(int(i == j) for j in range(self.l))) for i in range(self.l)]
        for w in self.rs.weyl:
            imgs = [self.key_of(w.apply(b)) for b in basis_amb]
            mats.append(tuple(tuple(imgs[j][i] for j in range(self.l)) for i in range(self.l)))
        return mats

    def weyl_mat(self, w: WeylElement):
        return self.weyl_key_mats[self.rs.weyl.index(w)]

    def reflect_key(self, key, i: int) -> Key:
        n = self.mu_alpha(key, i)
        return tuple(k - int(n) * t for k, t in zip(key, self.pos_key2[i]))

    def mult_values(self, m) -> list[Fraction]:
        """Multiplicity of each positive root, from a number, dict or callable."""
        if isinstance(m, (int, Fraction)):
            return [Fraction(m)] * len(self.pos)
        if hasattr(m, "of"):
            return [Fraction(m.of(a)) for a in self.pos]
        if isinstance(m, Mapping):
            long_ = {True: "long", False: "short"}
            out = []
            for a in self.pos:
                if "all" in m:
                    out.append(Fraction(m["all"]))
                else:
                    out.append(Fraction(m[long_[self.rs.is_long(a)]]))
            return out
        return [Fraction(m(a)) for a in self.pos]

    def rho_key2(self, m) -> tuple:
        """Key of ``2 rho(m) = sum m_alpha alpha`` (may be non-integral for odd m)."""
        mv = self.mult_values(m)
        return tuple(sum((mv[i] * self.pos_keys[i][j] for i in range(len(self.pos))), Fraction(0))
                     for j in range(self.l))


_LATTICES: dict[int, tuple[RootSystemData, Lattice]] = {}


def lattice(rs: RootSystemData) -> Lattice:
    hit = _LATTICES.get(id(rs))
    if hit is None or hit[0] is not rs:
        hit = (rs, Lattice(rs))
        _LATTICES[id(rs)] = hit
    return hit[1]


# ---------------------------------------------------------------------------
# Laurent polynomials


@dataclass(frozen=True, eq=False)
class LaurentPoly:
    """Finitely supported rational function on ``P`` (zero coefficients dropped)."""

    terms: Mapping[Key, Fraction]
    rank: int

    def __post_init__(self):
        clean = {tuple(int(x) for x in k): Fraction(v) for k, v in self.terms.items() if v != 0}
        object.__setattr__(self, "terms", clean)

    @classmethod
    def zero(cls, rank: int) -> "LaurentPoly":
        return cls({}, rank)

    @classmethod
    def const(cls, c, rank: int) -> "LaurentPoly":
        return cls({(0,) * rank: Fraction(c)}, rank)

    @classmethod
    def mono(cls, key, coeff=1) -> "LaurentPoly":
        return cls({tuple(key): Fraction(coeff)}, len(key))

    # arithmetic ------------------------------------------------------------
    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            return other
        return LaurentPoly.const(other, self.rank)

    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + v
        return LaurentPoly(t, self.rank)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({k: -v for k, v in self.terms.items()}, self.rank)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            c = Fraction(other)
            return LaurentPoly({k: c * v for k, v in self.terms.items()}, self.rank)
        t: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                t[k] = t.get(k, 0) + v1 * v2
        return LaurentPoly(t, self.rank)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not Laurent polynomials in general")
        out = LaurentPoly.const(1, self.rank)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.const(other, self.rank) if isinstance(other, (int, Fraction)) else None
            if other is None:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = [f"{v}*e^{list(k)}" for k, v in sorted(self.terms.items())]
        return " + ".join(parts)

    def shift(self, key) -> "LaurentPoly":
        return LaurentPoly({tuple(a + b for a, b in zip(k, key)): v for k, v in self.terms.items()}, self.rank)

    def map_keys(self, mat) -> "LaurentPoly":
        t: dict = {}
        for k, v in self.terms.items():
            nk = tuple(sum(mat[i][j] * k[j] for j in range(self.rank)) for i in range(self.rank))
            t[nk] = t.get(nk, 0) + v
        return LaurentPoly(t, self.rank)

    # analysis --------------------------------------------------------------
    def evaluate(self, rs: RootSystemData, H) -> complex:
        """Value at the point with orthonormal coordinates ``H``."""
        lat = lattice(rs)
        x = lat.fund_ortho @ np.asarray(H, dtype=float)
        return sum(float(v) * math.exp(float(np.dot(k, x))) for k, v in self.terms.items())

    def derivative(self, c) -> "LaurentPoly":
        """Directional derivative along ``H = sum c_j h_j``."""
        return LaurentPoly({k: v * sum((Fraction(a) * b for a, b in zip(k, c)), Fraction(0))
                            for k, v in self.terms.items()}, self.rank)

    def to_json(self) -> list:
        return [[list(k), v.numerator, v.denominator] for k, v in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, data: list, rank: int) -> "LaurentPoly":
        return cls({tuple(k): Fraction(n, d) for k, n, d in data}, rank)


def exp_key(rs: RootSystemData, lam) -> LaurentPoly:
    """``e^lam`` for an ambient functional in ``P``."""
    return LaurentPoly.mono(lattice(rs).key_of(lam))


def weyl_act(rs: RootSystemData, w: WeylElement, f: LaurentPoly) -> LaurentPoly:
    return f.map_keys(lattice(rs).weyl_mat(w))


def symmetrize(rs: RootSystemData, f: LaurentPoly, sign: bool = False) -> LaurentPoly:
    """``sum_w w f`` (or ``sum_w eps(w) w f``)."""
    lat = lattice(rs)
    out = LaurentPoly.zero(rs.rank)
    for w, M in zip(rs.weyl, lat.weyl_key_mats):
        g = f.map_keys(M)
        out = out + (g * w.sign if sign else g)
    return out


def orbit_sum(rs: RootSystemData, key) -> LaurentPoly:
    """Sum of ``e^nu`` over the distinct points of the orbit ``W key``."""
    lat = lattice(rs)
    pts = {tuple(sum(M[i][j] * key[j] for j in range(rs.rank)) for i in range(rs.rank))
           for M in lat.weyl_key_mats}
    return LaurentPoly({p: Fraction(1) for p in pts}, rs.rank)


def is_invariant(rs: RootSystemData, f: LaurentPoly, sign: bool = False) -> bool:
    lat = lattice(rs)
    return all(f.map_keys(M) == (f * w.sign if sign else f) for w, M in zip(rs.weyl, lat.weyl_key_mats))


def dominant_keys(rs: RootSystemData, max_height: int) -> list[Key]:
    """Dominant lattice keys ``mu`` with ``sum_i mu_{alpha_i} <= max_height``."""
    out = []
    for k in itertools.product(range(max_height + 1), repeat=rs.rank):
        if sum(k) <= max_height:
            out.append(k)
    return out


def invariant_basis(rs: RootSystemData, max_height: int, even: bool = False) -> list[LaurentPoly]:
    """Orbit sums of dominant keys (restricted to ``2P`` when ``even``)."""
    keys = dominant_keys(rs, max_height)
    if even:
        keys = [tuple(2 * x for x in k) for k in keys if 2 * sum(k) <= max_height]
    return [orbit_sum(rs, k) for k in keys]


# ---------------------------------------------------------------------------
# Delta and exact division


def delta_poly(rs: RootSystemData, m=1) -> LaurentPoly:
    """``prod_{alpha>0} (e^alpha - e^-alpha)^{m_alpha}`` for integral ``m``.

    Built as ``e^{sum m_alpha alpha} prod (1 - e^{-2 alpha})^{m_alpha}``.
    """
    lat = lattice(rs)
    mv = lat.mult_values(m)
    cache = lat.__dict__.setdefault("_delta_cache", {})
    if tuple(mv) in cache:
        return cache[tuple(mv)]
    if any(x.denominator != 1 or x < 0 for x in mv):
        raise ValueError("Delta(m) needs nonnegative integral multiplicities")
    lead = lat.rho_key2(m)
    if any(x.denominator != 1 for x in lead):
        raise ValueError("sum of m_alpha alpha is not in the lattice P")
    out = LaurentPoly.mono(tuple(int(x) for x in lead))
    for i, mi in enumerate(mv):
        fac = LaurentPoly.const(1, rs.rank) - LaurentPoly.mono(tuple(-x for x in lat.pos_key2[i]))
        out = out * fac ** int(mi)
    cache[tuple(mv)] = out
    return out


def divide_one_minus(rs: RootSystemData, f: LaurentPoly, i: int) -> LaurentPoly:
    """Exact quotient of ``f`` by ``1 - e^{-2 alpha}`` for the i-th positive root.

    On each line ``mu + 2Z alpha`` the quotient is the running sum of the
    coefficients from the top; the division is exact iff every line sums to 0.
    """
    lat = lattice(rs)
    step = lat.pos_key2[i]
    lines: dict = {}
    for k, v in f.terms.items():
        t = int(lat.mu_alpha(k, i))
        base = tuple(a - (t // 2) * s for a, s in zip(k, step))
        lines.setdefault((base, t % 2), []).append((t, v))
    out: dict = {}
    for (base, par), pts in lines.items():
        pts.sort(reverse=True)
        total = sum(v for _, v in pts)
        if total != 0:
            raise DivisionError(f"not divisible by (1 - e^(-2 alpha_{i}))")
        acc = Fraction(0)
        j = 0
        t = pts[0][0]
        low = pts[-1][0]
        while t > low:
            while j < len(pts) and pts[j][0] == t:
                acc += pts[j][1]
                j += 1
            if acc != 0:
                h = (t - par) // 2
                out[tuple(b + h * s for b, s in zip(base, step))] = acc
            t -= 2
    return LaurentPoly(out, rs.rank)


def divide_by_delta(rs: RootSystemData, f: LaurentPoly, power: int = 1) -> LaurentPoly:
    """``g`` with ``g * Delta**power == f``; raises :class:`DivisionError` otherwise."""
    if power < 1:
        raise ValueError("power must be >= 1")
    lat = lattice(rs)
    lead = lat.rho_key2(1)
    g = f
    for _ in range(power):
        for i in range(len(lat.pos)):
            g = divide_one_minus(rs, g, i)
        g = g.shift(tuple(-int(x) for x in lead))
    return g


def divide_by_delta_m(rs: RootSystemData, f: LaurentPoly, m) -> LaurentPoly:
    """Exact quotient by ``Delta(m)``."""
    lat = lattice(rs)
    mv = lat.mult_values(m)
    g = f
    for i, mi in enumerate(mv):
        for _ in range(int(mi)):
            g = divide_one_minus(rs, g, i)
    return g.shift(tuple(-int(x) for x in lat.rho_key2(m)))


# ---------------------------------------------------------------------------
# Dunkl-Cherednik operators


def _h_coords(rs: RootSystemData, H) -> tuple:
    """Accept h-coordinates directly or an ``("ambient", vec)`` pair."""
    if isinstance(H, tuple) and len(H) == 2 and H[0] == "ambient":
        return lattice(rs).h_of_ambient(H[1])
    return tuple(Fraction(x) for x in H)


def reflection_difference_quotient(rs: RootSystemData, f: LaurentPoly, i: int) -> LaurentPoly:
    """``(f - r_alpha f) / (1 - e^{-2 alpha})`` computed termwise."""
    lat = lattice(rs)
    step = lat.pos_key2[i]
    out: dict = {}
    for k, v in f.terms.items():
        n = int(lat.mu_alpha(k, i))
        if n > 0:
            for j in range(n):
                kk = tuple(a - j * s for a, s in zip(k, step))
                out[kk] = out.get(kk, 0) + v
        elif n < 0:
            for j in range(1, -n + 1):
                kk = tuple(a + j * s for a, s in zip(k, step))
                out[kk] = out.get(kk, 0) - v
    return LaurentPoly(out, rs.rank)


def cherednik_apply(rs: RootSystemData, m, H, f: LaurentPoly) -> LaurentPoly:
    """``T(m;H) f = d(H) f - rho(m)(H) f + sum m_alpha alpha(H) (f - r_alpha f)/(1 - e^{-2 alpha})``.

    ``H`` is given in h-coordinates (or as ``("ambient", vector)``); ``m`` may
    be rational.
    """
    lat = lattice(rs)
    c = _h_coords(rs, H)
    mv = lat.mult_values(m)
    ah = [lat.alpha_h(i, c) for i in range(len(lat.pos))]
    rho_h = sum((mi * a for mi, a in zip(mv, ah)), Fraction(0)) / 2
    out = f.derivative(c) - f * rho_h
    for i, mi in enumerate(mv):
        coef = mi * ah[i]
        if coef != 0:
            out = out + reflection_difference_quotient(rs, f, i) * coef
    return out


def cherednik_poly_apply(rs: RootSystemData, m, poly: Mapping[tuple, Fraction], f: LaurentPoly,
                         order: Callable[[tuple], Sequence[int]] | None = None) -> LaurentPoly:
    """``T(m;p) f`` for ``p = sum_c coef * prod_j h_j^{c_j}`` (multi-index keys).

    ``order`` optionally permutes the factor order within each monomial; the
    result must not depend on it.
    """
    l = rs.rank
    out = LaurentPoly.zero(l)
    for mono, coef in poly.items():
        factors = [j for j, e in enumerate(mono) for _ in range(e)]
        if order is not None:
            factors = list(order(tuple(factors)))
        g = f
        for j in reversed(factors):
            g = cherednik_apply(rs, m, tuple(int(i == j) for i in range(l)), g)
        out = out + g * Fraction(coef)
    return out


def laplace_poly(rs: RootSystemData) -> dict:
    """``p_L(lambda) = <lambda, lambda>`` as a polynomial in the h-basis.

    With ``lambda(h_j) = x_j`` one has ``<lambda,lambda> = sum_ij x_i x_j <w_i,w_j>``.
    """
    lat = lattice(rs)
    l = rs.rank
    out: dict = {}
    for i in range(l):
        for j in range(l):
            mono = tuple((int(i == k) + int(j == k)) for k in range(l))
            out[mono] = out.get(mono, 0) + lat.fund_gram[i][j]
    return out


def cherednik_q_apply(rs: RootSystemData, m, f: LaurentPoly) -> LaurentPoly:
    """``T(m; q(m)) f`` with ``q(m; lambda) = prod_{alpha>0} (lambda_alpha + m_alpha/2)``."""
    lat = lattice(rs)
    mv = lat.mult_values(m)
    g = f
    for i in range(len(lat.pos)):
        g = cherednik_apply(rs, m, lat.h_of_root(i), g) + g * (mv[i] / 2)
    return g


@dataclass(frozen=True)
class DiffReflTerm:
    numerator: LaurentPoly
    denominator: tuple[int, ...]  # power of (1 - e^{-2 alpha}) per positive root
    derivative: tuple  # h-coordinates of the direction, or () for none
    weyl: int  # index into rs.weyl


@dataclass(frozen=True)
class DiffReflOperator:
    """Sum of ``coef * d(H) o w`` with ``coef`` a Laurent polynomial over a
    product of ``(1 - e^{-2 alpha})``.  Application groups terms with the
    same denominator and divides exactly."""

    rs: RootSystemData
    terms: tuple[DiffReflTerm, ...]

    def apply(self, f: LaurentPoly) -> LaurentPoly:
        lat = lattice(self.rs)
        groups: dict = {}
        for t in self.terms:
            g = f.map_keys(lat.weyl_key_mats[t.weyl])
            if t.derivative:
                g = g.derivative(t.derivative)
            groups[t.denominator] = groups.get(t.denominator, LaurentPoly.zero(self.rs.rank)) + t.numerator * g
        out = LaurentPoly.zero(self.rs.rank)
        for den, num in groups.items():
            for i, p in enumerate(den):
                for _ in range(p):
                    num = divide_one_minus(self.rs, num, i)
            out = out + num
        return out


def cherednik_operator(rs: RootSystemData, m, H) -> DiffReflOperator:
    """``T(m;H)`` as an explicit differential-reflection operator."""
    lat = lattice(rs)
    c = _h_coords(rs, H)
    mv = lat.mult_values(m)
    ident = 0
    npos = len(lat.pos)
    no_den = (0,) * npos
    ah = [lat.alpha_h(i, c) for i in range(npos)]
    rho_h = sum((mi * a for mi, a in zip(mv, ah)), Fraction(0)) / 2
    one = LaurentPoly.const(1, rs.rank)
    terms = [DiffReflTerm(one, no_den, c, ident), DiffReflTerm(one * (-rho_h), no_den, (), ident)]
    refl_index = {}
    for i, a in enumerate(lat.pos):
        perm = tuple(rs.root_index[rs.reflect(a, r)] for r in rs.roots)
        refl_index[i] = rs.weyl.index(rs.weyl_by_perm[perm])
    for i in range(npos):
        coef = mv[i] * ah[i]
        if coef == 0:
            continue
        den = tuple(int(j == i) for j in range(npos))
        terms.append(DiffReflTerm(one * coef, den, (), ident))
        terms.append(DiffReflTerm(one * (-coef), den, (), refl_index[i]))
    return DiffReflOperator(rs, tuple(terms))


# ---------------------------------------------------------------------------
# Shift operators


def _check_invariant(rs, f):
    if not is_invariant(rs, f):
        raise ValueError("input is not W-invariant")


def shift2_plus_apply(rs: RootSystemData, m, f: LaurentPoly) -> LaurentPoly:
    """Raising shift ``G_+(2; m) f`` for W-invariant ``f``, via Cherednik operators.

    ``T(m; q(m)) f`` is W-skew; dividing by ``Delta`` gives a W-invariant
    polynomial.  The sign ``(-1)^{|Sigma+|}`` makes the rank-one case equal
    ``-Delta^{-1} d/dz``.
    """
    _check_invariant(rs, f)
    g = cherednik_q_apply(rs, m, f)
    sign = -1 if len(rs.positive_roots) % 2 else 1
    return divide_by_delta(rs, g) * sign


def shift2_minus_apply(rs: RootSystemData, m_plus_2, f: LaurentPoly) -> LaurentPoly:
    """Lowering shift ``G_-(-2; m+2) f = |W|^{-1} sum_v v(T(m; q(m)) (Delta f))``."""
    _check_invariant(rs, f)
    lat = lattice(rs)
    mv = [x - 2 for x in lat.mult_values(m_plus_2)]
    if any(x < 0 for x in mv):
        raise ValueError("G_-(-2; m) needs m_alpha >= 2")
    by_root = dict(zip(lat.pos, mv))
    g = cherednik_q_apply(rs, lambda a: by_root[a], delta_poly(rs) * f)
    return symmetrize(rs, g) * Fraction(1, len(rs.weyl))


def shift2_plus_closed(rs: RootSystemData, f: LaurentPoly) -> LaurentPoly:
    """Closed forms of ``G_+(2; m)``: rank one ``-Delta^{-1} d/dz`` (any m); for
    ``m = 0`` in any rank ``(-1)^{|Sigma+|} Delta^{-1} prod d(h_alpha)``."""
    lat = lattice(rs)
    g = f
    for i in range(len(lat.pos)):
        g = g.derivative(lat.h_of_root(i))
    sign = -1 if len(rs.positive_roots) % 2 else 1
    return divide_by_delta(rs, g) * sign


def shift2_minus_closed_rank_one(rs: RootSystemData, m, f: LaurentPoly) -> LaurentPoly:
    """``G_-(-2; m) = Delta d/dz + (m - 1)(e^z + e^{-z})`` in rank one."""
    if rs.rank != 1:
        raise ValueError("rank-one closed form")
    lat = lattice(rs)
    a = lat.pos_key2[0][0] // 2 if lat.pos_key2[0][0] % 2 == 0 else None
    if a is None:
        raise ValueError("alpha must lie in P")
    ez = LaurentPoly.mono((a,)) + LaurentPoly.mono((-a,))
    return delta_poly(rs) * f.derivative(lat.h_of_root(0)) + ez * (Fraction(m) - 1) * f


def shift2_minus_closed_complex(rs: RootSystemData, f: LaurentPoly) -> LaurentPoly:
    """``G_-(-2; 2) f = prod d(h_alpha) (Delta f)`` (multiplicity zero to two)."""
    lat = lattice(rs)
    g = delta_poly(rs) * f
    for i in range(len(lat.pos)):
        g = g.derivative(lat.h_of_root(i))
    return g


def D_m_apply(rs: RootSystemData, k: int, f: LaurentPoly) -> LaurentPoly:
    """``D_m f = Delta(m) G_+(2; m-2) ... G_+(2; 0) f`` for constant ``m = 2k``.

    Every intermediate division is exact; a remainder raises
    :class:`DivisionError`.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    g = f
    for j in range(k):
        g = shift2_plus_apply(rs, 2 * j, g)
    return delta_poly(rs, 2 * k) * g


# ---------------------------------------------------------------------------
# Spectral symbols: D e^nu = sum_mu P_mu(nu) e^{mu + nu}


Poly = dict  # multi-index over nu-coordinates -> Fraction


def _padd(p: Poly, q: Poly, c=1) -> Poly:
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0) + c * v
        if out[k] == 0:
            del out[k]
    return out


def _pmul_linear(p: Poly, const: Fraction, lin: Sequence[Fraction]) -> Poly:
    """``p * (const + sum_j lin_j nu_j)``."""
    out: dict = {}
    for k, v in p.items():
        if const:
            out[k] = out.get(k, 0) + v * const
        for j, cj in enumerate(lin):
            if cj:
                kk = tuple(e + (1 if t == j else 0) for t, e in enumerate(k))
                out[kk] = out.get(kk, 0) + v * cj
    return {k: v for k, v in out.items() if v != 0}


@dataclass(frozen=True)
class SpectralSymbol:
    """``sum_mu P_mu(nu) e^mu``, multiplying ``e^nu``; ``nu`` in key coordinates."""

    terms: Mapping[Key, Poly]
    rank: int

    @classmethod
    def one(cls, rank: int) -> "SpectralSymbol":
        return cls({(0,) * rank: {(0,) * rank: Fraction(1)}}, rank)

    def times(self, f: LaurentPoly) -> "SpectralSymbol":
        out: dict = {}
        for k1, p in self.terms.items():
            for k2, c in f.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = _padd(out.get(k, {}), p, c)
        return SpectralSymbol({k: v for k, v in out.items() if v}, self.rank)

    def derivative(self, c) -> "SpectralSymbol":
        """Apply ``d(H)`` for ``H`` in h-coordinates to ``symbol * e^nu``."""
        out = {}
        for k, p in self.terms.items():
            const = sum((Fraction(a) * b for a, b in zip(k, c)), Fraction(0))
            q = _pmul_linear(p, const, [Fraction(x) for x in c])
            if q:
                out[k] = q
        return SpectralSymbol(out, self.rank)

    def divide_delta(self, rs: RootSystemData) -> "SpectralSymbol":
        """Exact quotient by ``Delta`` coefficientwise in the nu-monomials."""
        monos = {mono for p in self.terms.values() for mono in p}
        out: dict = {}
        for mono in monos:
            f = LaurentPoly({k: p.get(mono, 0) for k, p in self.terms.items()}, self.rank)
            g = divide_by_delta(rs, f)
            for k, v in g.terms.items():
                out.setdefault(k, {})[mono] = v
        return SpectralSymbol(out, self.rank)

    def evaluate_poly(self, nu_key) -> LaurentPoly:
        """Substitute a rational ``nu`` (in key coordinates)."""
        out = {}
        for k, p in self.terms.items():
            s = Fraction(0)
            for mono, v in p.items():
                s += v * math.prod(Fraction(x) ** e for x, e in zip(nu_key, mono))
            out[k] = s
        return LaurentPoly(out, self.rank)

    def evaluate(self, rs: RootSystemData, nu_key, H) -> complex:
        """``(symbol e^nu)(H)`` numerically; ``nu_key`` complex key coordinates."""
        lat = lattice(rs)
        x = lat.fund_ortho @ np.asarray(H, dtype=float)
        nu = np.asarray(nu_key, dtype=complex)
        total = 0j
        for k, p in self.terms.items():
            s = sum(float(v) * np.prod(nu ** np.asarray(mono)) for mono, v in p.items())
            total += s * np.exp(np.dot(k, x))
        return total * np.exp(np.dot(nu, x))


def D_m_symbol(rs: RootSystemData, k: int) -> SpectralSymbol:
    """Symbol of ``D_m`` (``m = 2k``) on ``e^nu`` for arbitrary ``nu``.

    Available in rank one (any k), where ``G_+(2; m) = -Delta^{-1} d/dz``,
    and for ``k = 1`` in any rank, where ``D_2 = (-1)^{|Sigma+|} Delta prod d(h_alpha)``.
    In rank one the iterate ``S / Delta^j`` maps to
    ``-(S' Delta - j Delta' S) / Delta^{j+2}``, so ``D_m e^nu`` is the final
    numerator ``S``.
    """
    lat = lattice(rs)
    delta = delta_poly(rs)
    if k == 1:
        s = SpectralSymbol.one(rs.rank)
        for i in range(len(lat.pos)):
            s = s.derivative(lat.h_of_root(i))
        sign = -1 if len(rs.positive_roots) % 2 else 1
        return s.times(delta * sign)
    if rs.rank != 1:
        raise NotImplementedError("D_m symbol for m > 2 is only available in rank one")
    h = lat.h_of_root(0)
    d_delta = delta.derivative(h)
    s = SpectralSymbol.one(1)
    for j in range(0, 2 * k, 2):
        s_new = s.derivative(h).times(delta)
        corr = s.times(d_delta * (-j))
        merged = {}
        for key in set(s_new.terms) | set(corr.terms):
            p = _padd(s_new.terms.get(key, {}), corr.terms.get(key, {}))
            if p:
                merged[key] = {mm: -v for mm, v in p.items()}
        s = SpectralSymbol(merged, 1)
    return s


# ---------------------------------------------------------------------------
# Differential operators with Delta-power denominators (support operator)


@dataclass(frozen=True)
class RationalCoeff:
    """``num / Delta^delta_power``."""

    num: LaurentPoly
    delta_power: int


@dataclass(frozen=True)
class DiffOperator:
    """``sum_beta c_beta d^beta`` with ``d_j = d(h_j)`` and rational coefficients."""

    rs: RootSystemData
    terms: Mapping[tuple, RationalCoeff]

    @classmethod
    def multiplication(cls, rs: RootSystemData, num: LaurentPoly, delta_power: int = 0) -> "DiffOperator":
        return cls(rs, {(0,) * rs.rank: RationalCoeff(num, delta_power)})

    @classmethod
    def partial(cls, rs: RootSystemData, j: int) -> "DiffOperator":
        b = tuple(int(i == j) for i in range(rs.rank))
        return cls(rs, {b: RationalCoeff(LaurentPoly.const(1, rs.rank), 0)})

    def _lift(self, c: RationalCoeff, p: int) -> LaurentPoly:
        return c.num * delta_poly(self.rs) ** (p - c.delta_power)

    def _add_coeff(self, a: RationalCoeff, b: RationalCoeff) -> RationalCoeff:
        p = max(a.delta_power, b.delta_power)
        return RationalCoeff(self._lift(a, p) + self._lift(b, p), p)

    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        out = dict(self.terms)
        for b, c in other.terms.items():
            out[b] = self._add_coeff(out[b], c) if b in out else c
        return DiffOperator(self.rs, {b: c for b, c in out.items() if c.num})

    def scale(self, s) -> "DiffOperator":
        return DiffOperator(self.rs, {b: RationalCoeff(c.num * s, c.delta_power) for b, c in self.terms.items()})

    def compose(self, other: "DiffOperator") -> "DiffOperator":
        """``self o other`` by the Leibniz rule on the coefficients of ``other``."""
        out: dict = {}
        for b1, c1 in self.terms.items():
            for b2, c2 in other.terms.items():
                for g in itertools.product(*[range(e + 1) for e in b1]):
                    coef = math.prod(math.comb(e, t) for e, t in zip(b1, g))
                    dc = _deriv_rational(self.rs, c2, g)
                    b = tuple(e - t + u for e, t, u in zip(b1, g, b2))
                    term = RationalCoeff(c1.num * dc.num * coef, c1.delta_power + dc.delta_power)
                    out[b] = self._add_coeff(out[b], term) if b in out else term
        return DiffOperator(self.rs, {b: c for b, c in out.items() if c.num}).reduced()

    def reduced(self) -> "DiffOperator":
        """Cancel common powers of ``Delta`` in every coefficient."""
        out = {}
        for b, c in self.terms.items():
            num, p = c.num, c.delta_power
            while p > 0:
                try:
                    num = divide_by_delta(self.rs, num)
                except DivisionError:
                    break
                p -= 1
            while p < 0:
                num = num * delta_poly(self.rs)
                p += 1
            if num:
                out[b] = RationalCoeff(num, p)
        return DiffOperator(self.rs, out)

    def order(self) -> int:
        return max(sum(b) for b in self.terms)

    def pole_order(self) -> int:
        """Smallest ``k`` with ``Delta^k`` times every coefficient regular."""
        return max(c.delta_power for c in self.reduced().terms.values())

    def apply(self, f: LaurentPoly) -> tuple[LaurentPoly, int]:
        """``(numerator, p)`` with ``self f = numerator / Delta^p``."""
        p = max(c.delta_power for c in self.terms.values())
        out = LaurentPoly.zero(self.rs.rank)
        for b, c in self.terms.items():
            g = f
            for j, e in enumerate(b):
                for _ in range(e):
                    g = g.derivative(tuple(int(i == j) for i in range(self.rs.rank)))
            out = out + self._lift(c, p) * g
        return out, p


def _deriv_rational(rs: RootSystemData, c: RationalCoeff, g: tuple) -> RationalCoeff:
    """Mixed derivative ``d^g (num / Delta^p)`` as ``num' / Delta^{p + |g|}``."""
    delta = delta_poly(rs)
    num, p = c.num, c.delta_power
    for j, e in enumerate(g):
        h = tuple(int(i == j) for i in range(rs.rank))
        for _ in range(e):
            num = num.derivative(h) * delta - delta.derivative(h) * num * p
            p += 1
    return RationalCoeff(num, p)


def support_operator(rs: RootSystemData, m) -> DiffOperator:
    """``D(m; q)`` for ``q(lambda) = prod_{alpha in Sigma} prod_{|k| < m_alpha/2} (lambda_alpha - k)``.

    Built in rank one as ``Q(E + (m/2)^2)`` with ``E = d^2 + m coth d`` and
    ``q(lambda) = Q(lambda_alpha^2)``; in the complex case (``m = 2``) as
    ``Delta^{-1} o d(q) o Delta``.
    """
    lat = lattice(rs)
    mv = lat.mult_values(m)
    l = rs.rank
    if rs.rank == 1:
        mm = mv[0]
        if mm.denominator != 1 or mm % 2:
            raise ValueError("even multiplicity required")
        a = lat.pos_key2[0][0] // 2
        cothnum = LaurentPoly.mono((a,)) + LaurentPoly.mono((-a,))
        E = DiffOperator(rs, {(2,): RationalCoeff(LaurentPoly.const(1, 1), 0),
                              (1,): RationalCoeff(cothnum * mm, 1)})
        # lambda_alpha(h_1) = 1 in rank one so d = d(h_1).
        shifted = E + DiffOperator.multiplication(rs, LaurentPoly.const((mm / 2) ** 2, 1))
        n = int(mm) // 2
        op = DiffOperator.multiplication(rs, LaurentPoly.const(1, 1))
        for k in range(-n + 1, n):
            fac = shifted.scale(-1) + DiffOperator.multiplication(rs, LaurentPoly.const(k * k, 1))
            op = fac.compose(op)
        return op
    if all(x == 2 for x in mv):
        op = DiffOperator.multiplication(rs, delta_poly(rs))
        for i in range(len(lat.pos)):
            h = lat.h_of_root(i)
            dh = DiffOperator(rs, {tuple(int(t == j) for t in range(l)): RationalCoeff(LaurentPoly.const(h[j], l), 0)
                                   for j in range(l) if h[j] != 0})
            op = dh.compose(dh.compose(op))
        sign = -1 if len(lat.pos) % 2 else 1
        return DiffOperator.multiplication(rs, LaurentPoly.const(sign, l), 1).compose(op)
    raise NotImplementedError("support operator only in rank one or for m = 2")


def D_q_symbol(rs: RootSystemData, m) -> dict:
    """Order and factored principal symbol of ``D_q = Delta^k D(m; q)``.

    The order is ``sum_{alpha in Sigma} (m_alpha - 1)`` over all roots;
    ``k`` is the least power making the coefficients regular, found by exact
    division where the operator is constructible (``None`` otherwise).
    """
    lat = lattice(rs)
    mv = lat.mult_values(m)
    if any(x.denominator != 1 or x % 2 for x in mv):
        raise ValueError("even multiplicity required")
    order = 2 * sum(int(x) - 1 for x in mv)
    try:
        op = support_operator(rs, m)
        k = op.pole_order()
        if op.order() != order:
            raise AssertionError("support operator has unexpected order")
    except NotImplementedError:
        k = None
    return {
        "order": order,
        "k": k,
        "principal": "Delta^k(H) * prod over all roots alpha of lambda_(w alpha)^(m_alpha - 1)",
        "exponents_positive": [int(x) - 1 for x in mv],
    }
