"""c-functions, their polynomial relatives, and Theta-spherical functions.

Three evaluation routes for ``phi_Theta(m; lambda, H)``:

* ``series``: the defining ``W_Theta``-average of Harish-Chandra series,
  valid for ``H`` in the open chamber (extended to ``a_Theta`` by
  ``W_Theta``-invariance);
* ``kernel``: ``sum_{w in W_Theta} S(w lambda, H) e^{w lambda(H)}`` divided by
  ``pi e^- e^+ (lambda) Delta(m; H)``, where ``S`` is the symbol of ``D_m``.
  Available in rank one and for ``m = 2``;
* rank-one and ``m = 2`` closed forms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from .exppoly import D_m_symbol, LaurentPoly, SpectralSymbol, lattice
from .hcseries import (EPS_SING, FlatPoint, NotInChamber, SingularSpectral, SpectralPoint,
                       phi_series)
from .multiplicity import d_theta, delta_weight, rho
from .rootsys import RootSystemData, ThetaSubset, WeylElement, min_coset_reps

KINDS = ("c_plus", "c_minus", "c_plus_c", "e_minus", "e_plus", "pi", "q")


class PoleHit(ZeroDivisionError):
    def __init__(self, kind: str, root, offset: int):
        super().__init__(f"{kind}: factor for root {root} with offset {offset} vanishes")
        self.kind, self.root, self.offset = kind, root, offset


# ---------------------------------------------------------------------------
# Coordinates and the Weyl action in orthonormal coordinates


def weyl_ortho(rs: RootSystemData, w: WeylElement) -> np.ndarray:
    return _weyl_ortho_cached(rs, w.perm)


@lru_cache(maxsize=None)
def _weyl_ortho_cached(rs: RootSystemData, perm) -> np.ndarray:
    w = rs.weyl_by_perm[perm]
    B = rs.ortho_basis
    return float(rs.scale) * B.T @ np.asarray(w.matrix, dtype=float) @ B


def _as_ortho(rs: RootSystemData, lam) -> np.ndarray:
    if isinstance(lam, SpectralPoint):
        return lam.array
    if _is_exact(lam) and len(lam) == rs.dim:
        return rs.to_ortho([float(x) for x in lam]).astype(complex)
    return np.atleast_1d(np.asarray(lam, dtype=complex))


def _is_exact(lam) -> bool:
    return not isinstance(lam, (SpectralPoint, np.ndarray)) and all(
        isinstance(x, (Fraction, int)) for x in lam)


def lambda_alphas(rs: RootSystemData, lam) -> list:
    """``lambda_alpha`` for the positive roots; exact for rational ambient input."""
    if _is_exact(lam) and len(lam) == rs.dim:
        lam = tuple(Fraction(x) for x in lam)
        return [rs.lambda_alpha(lam, a) for a in rs.positive_roots]
    x = _as_ortho(rs, lam)
    norms = np.array([float(rs.norm2(a)) for a in rs.positive_roots])
    return list(rs.positive_ortho @ x / norms)


# ---------------------------------------------------------------------------
# Factor lists


@dataclass(frozen=True)
class PolyFactors:
    """Each kind is ``sign * prod (s lambda_alpha + k)^power`` over
    ``(positive root index, s, k, power)`` tuples."""

    theta: ThetaSubset
    m: object
    factors: dict
    signs: dict


def poly_factors(rs: RootSystemData, theta: ThetaSubset, m) -> PolyFactors:
    mv = lattice(rs).mult_values(m)
    inside = {rs.positive_roots.index(a) for a in theta.theta_positive}
    pos = range(len(rs.positive_roots))
    half = [int(Fraction(x) / 2) for x in mv]
    f: dict = {k: [] for k in KINDS}
    for i in pos:
        n = half[i]
        sym = [(i, 1, -k, 1) for k in range(-n + 1, n)]
        if i in inside:
            f["c_plus"] += [(i, 1, k, -1) for k in range(n)]
            f["e_plus"] += sym
        else:
            f["c_minus"] += [(i, -1, k, -1) for k in range(-n + 1, 1)]
            f["c_plus_c"] += [(i, 1, k, -1) for k in range(n)]
            f["e_minus"] += sym
        f["pi"].append((i, 1, 0, 1))
        f["q"] += sym + [(i, -1, -k, 1) for k in range(-n + 1, n)]
    e_plus_sign = -1 if sum(mv[i] for i in inside) / 2 % 2 else 1
    signs = {k: 1 for k in KINDS}
    signs["e_plus"] = e_plus_sign
    return PolyFactors(theta, m, {k: tuple(v) for k, v in f.items()}, signs)


def c_factors_eval(rs: RootSystemData, kind: str, theta: ThetaSubset, m, lam,
                   eps_sing: float = EPS_SING):
    """Evaluate one of ``c_plus, c_minus, c_plus_c, e_minus, e_plus, pi, q``."""
    if kind not in KINDS:
        raise ValueError(f"unknown factor kind {kind!r}; expected one of {KINDS}")
    pf = poly_factors(rs, theta, m)
    la = lambda_alphas(rs, lam)
    exact = isinstance(la[0], Fraction)
    val = Fraction(pf.signs[kind]) if exact else complex(pf.signs[kind])
    for i, s, k, p in pf.factors[kind]:
        t = s * la[i] + k
        if p < 0:
            if (t == 0) if exact else abs(t) <= eps_sing:
                raise PoleHit(kind, rs.positive_roots[i], k)
            val /= t
        else:
            val *= t
    return val


# ---------------------------------------------------------------------------
# Series route


def _theta_weyl_ortho(rs: RootSystemData, theta: ThetaSubset):
    return [(w, weyl_ortho(rs, w)) for w in theta.theta_weyl]


def to_chamber(rs: RootSystemData, theta: ThetaSubset, H) -> np.ndarray:
    """A ``W_Theta``-translate of ``H`` in the open positive chamber."""
    Hh = FlatPoint.of(H).array
    for _, M in _theta_weyl_ortho(rs, theta):
        x = M @ Hh
        if np.all(rs.simple_ortho @ x > 0):
            return x
    raise NotInChamber("no W_Theta-translate of H lies in the open chamber")


def phi_theta_series(rs: RootSystemData, m, theta: ThetaSubset, lam, H, N: int = 40) -> complex:
    """``c^-_Theta(lambda) sum_{w in W_Theta} c^+_Theta(w lambda) Phi(w lambda, H)``."""
    x = _as_ortho(rs, lam)
    Hc = to_chamber(rs, theta, H)
    total = 0j
    for _, M in _theta_weyl_ortho(rs, theta):
        wl = SpectralPoint(tuple(M @ x))
        cp = c_factors_eval(rs, "c_plus", theta, m, wl)
        total += cp * phi_series(rs, m, wl, Hc, N)
    return complex(c_factors_eval(rs, "c_minus", theta, m, SpectralPoint(tuple(x))) * total)


# ---------------------------------------------------------------------------
# Kernel route


def kernel_available(rs: RootSystemData, m) -> bool:
    k = _constant_half(rs, m)
    return k is not None and (k == 0 or rs.rank == 1 or k == 1)


def _constant_half(rs: RootSystemData, m):
    mv = set(lattice(rs).mult_values(m))
    if len(mv) != 1:
        return None
    v = mv.pop()
    if v % 2:
        return None
    return int(v // 2)


@lru_cache(maxsize=None)
def _symbol(rs: RootSystemData, k: int) -> SpectralSymbol:
    return D_m_symbol(rs, k)


@dataclass(frozen=True)
class KernelData:
    """Numeric form of ``S(nu, H) = sum_key e^{key(H)} sum_mono c nu^mono`` in ortho coordinates."""

    keys_ortho: np.ndarray   # (K, l): functional ``key`` in ortho coordinates
    monos: np.ndarray        # (T, l) exponents of nu-key monomials
    coef: np.ndarray         # (K, T)
    nu_key_map: np.ndarray   # (l, l): ortho -> key coordinates, key = map @ x


@lru_cache(maxsize=None)
def kernel_data(rs: RootSystemData, k: int) -> KernelData:
    lat = lattice(rs)
    l = rs.rank
    to_key = np.linalg.inv(lat.fund_ortho.T)
    if k == 0:
        return KernelData(np.zeros((1, l)), np.zeros((1, l), dtype=int), np.ones((1, 1)), to_key)
    sym = _symbol(rs, k)
    keys = sorted(sym.terms)
    monos = sorted({mono for p in sym.terms.values() for mono in p})
    coef = np.array([[float(sym.terms[key].get(mo, 0)) for mo in monos] for key in keys])
    return KernelData(np.array([lat.key_to_ortho(key) for key in keys]), np.array(monos, dtype=int),
                      coef, to_key)


def symbol_values(kd: KernelData, lam_ortho: np.ndarray) -> np.ndarray:
    """``P_key(lambda)`` for a batch of spectral points: shape ``(..., K)``."""
    nu = np.asarray(lam_ortho, dtype=complex) @ kd.nu_key_map.T
    powers = np.prod(nu[..., None, :] ** kd.monos, axis=-1)  # (..., T)
    return powers @ kd.coef.T


def regularizing_poly(rs: RootSystemData, theta: ThetaSubset, m, lam) -> complex:
    """``pi(lambda) e^-_Theta(lambda) e^+_Theta(lambda)``."""
    out = 1
    for kind in ("pi", "e_minus", "e_plus"):
        out = out * c_factors_eval(rs, kind, theta, m, lam)
    return out


def kernel_sum(rs: RootSystemData, m, theta: ThetaSubset, lam, H) -> complex:
    """``D_m (sum_{w in W_Theta} e^{w lambda})`` at ``H``."""
    k = _constant_half(rs, m)
    kd = kernel_data(rs, k)
    x = _as_ortho(rs, lam)
    Hh = FlatPoint.of(H).array
    total = 0j
    for _, M in _theta_weyl_ortho(rs, theta):
        wl = M @ x
        P = symbol_values(kd, wl)
        total += np.dot(P, np.exp(kd.keys_ortho @ Hh)) * np.exp(np.dot(wl, Hh))
    return complex(total)


def phi_theta_kernel(rs: RootSystemData, m, theta: ThetaSubset, lam, H) -> complex:
    """``phi_Theta`` as ``D_m(sum e^{w lambda}) / (pi e^- e^+ Delta(m))``; any regular ``H``."""
    if not kernel_available(rs, m):
        raise NotImplementedError("kernel route needs rank one or m = 2 (constant)")
    k = _constant_half(rs, m)
    num = kernel_sum(rs, m, theta, lam, H)
    if k == 0:
        return num
    den = complex(regularizing_poly(rs, theta, m, SpectralPoint.of(_as_ortho(rs, lam))))
    dm = delta_weight(rs, m).evaluate(rs, FlatPoint.of(H).array)
    if den == 0 or dm == 0:
        raise SingularSpectral("pi e^- e^+ (lambda) Delta(m; H) = 0")
    return num / (den * dm)


def phi_theta(rs: RootSystemData, m, theta: ThetaSubset, lam, H, route: str = "auto", N: int = 40) -> complex:
    if route == "auto":
        route = "kernel" if kernel_available(rs, m) else "series"
    if route == "kernel":
        return phi_theta_kernel(rs, m, theta, lam, H)
    if route == "series":
        return phi_theta_series(rs, m, theta, lam, H, N)
    raise ValueError(f"unknown route {route!r}")


# ---------------------------------------------------------------------------
# Rank-one closed forms


def _sinh_d_power(n: int, x, z: float) -> complex:
    """``((1/sinh z) d/dz)^n e^{x z}`` via ``g(u) e^{xz} / Delta^p``, ``u = e^z``.

    With ``Delta = u - 1/u``, ``d/dz [g e^{xz} / Delta^p] = [(theta g + x g) Delta - p g Delta'] e^{xz} / Delta^{p+1}``
    where ``theta`` is ``u d/du`` and ``Delta' = u + 1/u``; and ``1/sinh = 2/Delta``.
    """
    g, p = rank_one_numerator(n, x)
    u = math.exp(z)
    delta = u - 1 / u
    return sum(c * u ** j for j, c in g.items()) * cmath.exp(x * z) / delta ** p


def rank_one_numerator(n: int, x) -> tuple[dict, int]:
    """Coefficients ``g`` (powers of ``u``) and ``p`` with
    ``((1/sinh z) d/dz)^n e^{xz} = g(u) e^{xz} / Delta^p``.  Exact for rational ``x``."""
    g: dict = {0: x ** 0}
    p = 0
    for _ in range(n):
        new: dict = {}
        for j, c in g.items():
            a = (j + x) * c
            # a u^j * (u - 1/u) - p c u^j (u + 1/u)
            for jj, cc in ((j + 1, a - p * c), (j - 1, -a - p * c)):
                new[jj] = new.get(jj, 0) + 2 * cc
        g = {j: c for j, c in new.items() if c != 0}
        p += 2
    return g, p


def _falling(x, n: int):
    out = x ** 0
    for k in range(n):
        out *= x - k
    return out


def phi_theta_closed_rank1(m: int, theta: str, x, z: float, normalization: str = "theta") -> complex:
    """Rank-one closed forms in ``x = lambda_alpha`` and ``z = alpha(H)``.

    ``theta``: ``"empty"`` or ``"Pi"``.  ``normalization``:
    ``"hc"`` (``Theta`` empty only) returns ``Phi`` with leading coefficient 1;
    ``"theta"`` returns ``phi_Theta`` with the c-function weights;
    ``"spherical"`` divides ``phi_Theta`` by ``c^+_Pi(m; rho)`` (value 1 at ``z = 0`` for ``Pi``).
    """
    if m < 2 or m % 2:
        raise ValueError("m must be even and at least 2")
    if z == 0:
        raise ValueError("z = 0 is a wall; use the kernel route or a limit")
    n = m // 2
    x = complex(x)
    if theta == "empty":
        Phi = _sinh_d_power(n, x, z) / (2 ** n * _falling(x, n))
        if normalization == "hc":
            return Phi
        c_minus = 1 / math.prod(-x - j for j in range(n))
        val = c_minus * Phi
    elif theta == "Pi":
        if normalization == "hc":
            raise ValueError("'hc' normalization applies to Theta = empty")
        cosh_part = (_sinh_d_power(n, x, z) + _sinh_d_power(n, -x, z)) / 2
        val = 2 ** (1 - n) / math.prod(x * x - k * k for k in range(n)) * cosh_part
    else:
        raise ValueError("rank one has only Theta = 'empty' or 'Pi'")
    if normalization == "spherical":
        val /= c_plus_rho_rank1(m)
    elif normalization != "theta":
        raise ValueError(f"unknown normalization {normalization!r}")
    return val


def c_plus_rho_rank1(m: int) -> float:
    n = m // 2
    return 1 / math.prod(n + k for k in range(n))


# ---------------------------------------------------------------------------
# m = 2 closed form


def phi_theta_closed_complex(rs: RootSystemData, theta: ThetaSubset, lam, H,
                             offsets: tuple[float, float] = (1e-3, 5e-4)) -> complex:
    """``(-1)^{|Sigma+ minus <Theta>+|} / (pi(lambda) Delta(H)) sum_{W_Theta} eps(w) e^{w lambda(H)}``.

    At a wall (``Delta(H) = 0``) the value is extrapolated from two offsets
    along a fixed generic direction (Richardson, first order).
    """
    x = _as_ortho(rs, lam)
    pi_l = complex(c_factors_eval(rs, "pi", theta, 2, SpectralPoint(tuple(x))))
    if abs(pi_l) <= EPS_SING:
        raise SingularSpectral("pi(lambda) = 0")
    sign = -1 if len(theta.outside_positive) % 2 else 1
    Hh = FlatPoint.of(H).array

    def raw(Hp):
        s = sum(w.sign * np.exp(np.dot(M @ x, Hp)) for w, M in _theta_weyl_ortho(rs, theta))
        return sign * s / (pi_l * _delta_ortho(rs, Hp))

    if min(abs(rs.positive_ortho @ Hh)) > 1e-6:
        return complex(raw(Hh))
    direction = _generic_direction(rs.rank)
    h1, h2 = offsets
    v1, v2 = raw(Hh + h1 * direction), raw(Hh + h2 * direction)
    return complex((h1 * v2 - h2 * v1) / (h1 - h2))


def _generic_direction(l: int) -> np.ndarray:
    d = np.array([math.sqrt(2) ** (i + 1) + 0.3 * i for i in range(l)])
    return d / np.linalg.norm(d)


def _delta_ortho(rs: RootSystemData, H: np.ndarray, power: int = 1) -> float:
    return float(np.prod(2 * np.sinh(rs.positive_ortho @ H)) ** power)


# ---------------------------------------------------------------------------
# Identities and residuals


def functional_equation_residual(rs: RootSystemData, m, theta: ThetaSubset, lam, H,
                                 route: str = "auto", N: int = 40) -> float:
    """``|phi_Pi - (-1)^d sum_{u in W^Theta} phi_Theta(u^{-1} lambda)| / |phi_Pi|``."""
    x = _as_ortho(rs, lam)
    lhs = phi_theta(rs, m, rs.theta_all, SpectralPoint(tuple(x)), H, route, N)
    d = d_theta(rs, theta, m)
    rhs = 0j
    for u in min_coset_reps(rs, theta):
        ux = weyl_ortho(rs, u).T @ x  # orthogonal, so the transpose is the inverse
        rhs += phi_theta(rs, m, theta, SpectralPoint(tuple(ux)), H, route, N)
    rhs *= (-1) ** d
    return abs(lhs - rhs) / abs(lhs)


def rho_ortho(rs: RootSystemData, m) -> np.ndarray:
    return rs.to_ortho([float(t) for t in rho(rs, m)])


def radial_laplacian(rs: RootSystemData, m, f: Callable[[np.ndarray], complex], H, h_step: float = 1e-4) -> complex:
    """``L(m) f (H) = Laplacian f + sum_{alpha>0} m_alpha coth(alpha(H)) d(A_alpha) f`` by central differences."""
    if h_step < 1e-7:
        raise ValueError("h_step too small for central differences in double precision")
    Hh = FlatPoint.of(H).array
    l = rs.rank
    f0 = f(Hh)
    grad = np.zeros(l, dtype=complex)
    lap = 0j
    for i in range(l):
        e = np.zeros(l)
        e[i] = h_step
        fp, fm = f(Hh + e), f(Hh - e)
        grad[i] = (fp - fm) / (2 * h_step)
        lap += (fp - 2 * f0 + fm) / h_step ** 2
    mv = lattice(rs).mult_values(m)
    first = sum(float(mv[i]) / math.tanh(float(a @ Hh)) * (a @ grad)
                for i, a in enumerate(rs.positive_ortho))
    return lap + first


def eigen_residual(rs: RootSystemData, m, lam, H, h_step: float = 1e-4, route: str = "auto",
                   N: int = 40) -> float:
    """``|ML(m) phi_Pi - <lambda, lambda> phi_Pi| / |<lambda, lambda> phi_Pi|``."""
    x = _as_ortho(rs, lam)
    lp = SpectralPoint(tuple(x))
    theta = rs.theta_all

    def f(Hp):
        return phi_theta(rs, m, theta, lp, Hp, route, N)

    r = rho_ortho(rs, m)
    ev = complex(np.dot(x, x))
    ml = radial_laplacian(rs, m, f, H, h_step) + float(r @ r) * f(FlatPoint.of(H).array)
    return abs(ml - ev * f(FlatPoint.of(H).array)) / abs(ev * f(FlatPoint.of(H).array))


def circle_average(func: Callable[[np.ndarray], complex], center: np.ndarray, radius: float = 1e-2,
                   points: int = 32, direction: np.ndarray | None = None) -> tuple[complex, float]:
    """Mean of ``func`` over a circle in a complex line through ``center``, and the
    largest deviation of a sample from that mean (relative)."""
    d = _generic_direction(len(center)) if direction is None else direction
    vals = np.array([func(center + radius * cmath.exp(2j * math.pi * (j + 0.5) / points) * d)
                     for j in range(points)])
    mean = vals.mean()
    return complex(mean), float(np.max(np.abs(vals - mean)) / max(abs(mean), 1e-300))


def near_pole(rs: RootSystemData, theta: ThetaSubset, m, lam, radius: float) -> bool:
    """Is ``lambda`` within ``radius`` of a hyperplane ``lambda_alpha = k`` that can
    carry a pole of ``phi_Theta`` or of its numerator/denominator split?"""
    la = lambda_alphas(rs, SpectralPoint.of(_as_ortho(rs, lam)))
    mv = lattice(rs).mult_values(m)
    top = max([int(v) for v in mv] + [1])
    return any(abs(complex(t) - k) < radius for t in la for k in range(-top, top + 1))


def regularized_phi(rs: RootSystemData, m, theta: ThetaSubset, lam, H, radius: float = 1e-2,
                    route: str = "auto", N: int = 40) -> complex:
    """``e^-_Theta(lambda) phi_Theta(lambda, H)``, with removable singularities filled by a circle mean."""
    x = _as_ortho(rs, lam)

    def g(y):
        p = SpectralPoint(tuple(y))
        return complex(c_factors_eval(rs, "e_minus", theta, m, p)) * phi_theta(rs, m, theta, p, H, route, N)

    if not near_pole(rs, theta, m, x, radius):
        return g(x)
    return circle_average(g, x, radius)[0]


def opdam_bound(rs: RootSystemData, m, lam, H) -> float:
    """``|W|^{1/2} c^+_Pi(m; rho) e^{max_w Re w lambda(H)}``."""
    x = _as_ortho(rs, lam)
    Hh = FlatPoint.of(H).array
    cr = abs(complex(c_factors_eval(rs, "c_plus", rs.theta_all, m, SpectralPoint(tuple(rho_ortho(rs, m))))))
    mx = max(float(np.real(np.dot(weyl_ortho(rs, w) @ x, Hh))) for w in rs.weyl)
    return math.sqrt(len(rs.weyl)) * cr * math.exp(mx)


__all__ = [
    "KINDS", "PoleHit", "PolyFactors", "poly_factors", "c_factors_eval", "lambda_alphas",
    "weyl_ortho", "to_chamber", "phi_theta_series", "phi_theta_kernel", "phi_theta",
    "kernel_available", "kernel_data", "kernel_sum", "symbol_values", "regularizing_poly",
    "rank_one_numerator", "phi_theta_closed_rank1", "c_plus_rho_rank1", "phi_theta_closed_complex",
    "functional_equation_residual", "eigen_residual", "radial_laplacian", "rho_ortho",
    "circle_average", "near_pole", "regularized_phi", "opdam_bound", "formula_sides_rank1",
]


def formula_sides_rank1(rs: RootSystemData, m: int, theta: ThetaSubset, x: Fraction) -> tuple:
    """Both sides of ``e^- Delta(m) phi_Theta = D_m(sum_{W_Theta} e^{w lambda}) / (pi e^+)`` in rank one,
    as exact Laurent polynomials, for integral ``x = lambda_alpha`` (so that ``e^lambda`` is a
    lattice exponential).

    The left side comes from the closed form ``((1/sinh z) d/dz)^n e^{xz}``, the right side
    from the spectral symbol of ``D_m``.
    """
    if rs.rank != 1:
        raise ValueError("rank-one identity")
    n = m // 2
    x = Fraction(x)
    lat = lattice(rs)
    a_key = lat.pos_keys[0][0]          # key of alpha; u = e^{alpha}
    lam_key = x * a_key
    if lam_key.denominator != 1:
        raise ValueError("e^lambda must lie in the weight lattice")
    lam = tuple(x * t for t in rs.positive_roots[0])

    def numerator(y: Fraction) -> LaurentPoly:
        g, _ = rank_one_numerator(n, y)
        return LaurentPoly({(int(j * a_key + y * a_key),): Fraction(c) for j, c in g.items()}, 1)

    e_minus = c_factors_eval(rs, "e_minus", theta, m, lam)
    if theta.is_all:
        den = math.prod((x * x - k * k for k in range(n)), start=Fraction(1))
        if den == 0:
            raise SingularSpectral(f"lambda_alpha = {x} (removable pole of the closed form)")
        norm = Fraction(2) ** (1 - n) / den
        lhs = (numerator(x) + numerator(-x)) * (norm / 2) * e_minus
    else:
        if _falling(x, n) == 0:
            raise SingularSpectral(f"lambda_alpha = {x} (closed form of Phi has a pole)")
        c_minus = c_factors_eval(rs, "c_minus", theta, m, lam)
        lhs = numerator(x) * (e_minus * c_minus / (Fraction(2) ** n * _falling(x, n)))
    sym = D_m_symbol(rs, n)
    total = LaurentPoly.zero(1)
    for w in theta.theta_weyl:
        nu = (int(lam_key) * (1 if w.length == 0 else -1),)
        total = total + sym.evaluate_poly(nu).shift(nu)
    den = c_factors_eval(rs, "pi", theta, m, lam) * c_factors_eval(rs, "e_plus", theta, m, lam)
    return lhs, total * (1 / den)
