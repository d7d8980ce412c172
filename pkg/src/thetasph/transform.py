"""Theta-spherical transform, its inversions, wave packets and Paley-Wiener diagnostics.

Conventions.  Points of the flat and spectral parameters are taken in the
orthonormal coordinates of :mod:`thetasph.rootsys`; ``dH`` and ``dlambda``
are the Lebesgue measures there, with ``lambda = i xi + mu`` on a contour.

All integrals go through the symbol ``S(nu, H)`` of ``D_m`` (``D_m e^nu =
S(nu, .) e^nu``), which exists in rank one and for ``m = 2``.  With it

* ``pi e^- e^+ (lambda) F_Theta f(lambda) = |W_Theta|^{-1} sum_{w in W_Theta} int f S(w lambda) e^{w lambda}``,
* ``pi e^+_Pi (lambda) phi_Pi(-lambda, H) = Delta(m; H)^{-1} sum_{v in W} S(-lambda, v^{-1} H) e^{-lambda(v^{-1} H)}``,

so neither side needs a pointwise pole cancellation.  When ``Delta^a``
divides the symbol it is factored out before summing over ``W``, which keeps
the quotient by ``Delta(m)`` accurate near the walls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .exppoly import DivisionError, SpectralSymbol, lattice
from .hcseries import SingularSpectral
from .multiplicity import as_mult, condition_A, d_theta
from .rootsys import (ConvexBody, RootSystemData, ThetaSubset, dual_cone_membership, min_coset_reps)
from .special import _constant_half, _symbol, circle_average, kernel_available, weyl_ortho

CHUNK = 512


class TransformError(ValueError):
    pass


class SupportError(TransformError):
    """The support leaves the grid or touches the boundary of ``a_Theta``."""


class ConditionA2Violated(TransformError):
    pass


class ShiftOutsideCone(TransformError):
    pass


class UncalibratedK(TransformError):
    pass


class SlowDecay(TransformError):
    pass


def reference_k(rs: RootSystemData) -> float:
    """``1 / (|W| (2 pi)^l)``: the constant that makes the ``m = 0`` inversion exact."""
    return 1.0 / (len(rs.weyl) * (2 * math.pi) ** rs.rank)


# ---------------------------------------------------------------------------
# Grids and sampled functions


@dataclass(frozen=True)
class Grid:
    """Midpoint grid on a box: ``lo + (j + 1/2) step`` per axis."""

    lo: tuple
    hi: tuple
    n: tuple

    @classmethod
    def box(cls, lo, hi, n) -> "Grid":
        lo, hi = np.atleast_1d(lo).astype(float), np.atleast_1d(hi).astype(float)
        n = np.broadcast_to(np.atleast_1d(n), lo.shape).astype(int)
        return cls(tuple(lo), tuple(hi), tuple(int(x) for x in n))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def step(self) -> np.ndarray:
        return (np.array(self.hi) - np.array(self.lo)) / np.array(self.n)

    @property
    def axes(self) -> list[np.ndarray]:
        return [lo + (np.arange(n) + 0.5) * h for lo, n, h in zip(self.lo, self.n, self.step)]

    @property
    def shape(self) -> tuple:
        return tuple(self.n)

    @property
    def cell(self) -> float:
        return float(np.prod(self.step))

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class SampledFn:
    grid: Grid
    values: np.ndarray = field(repr=False)
    claimed_support: ConvexBody
    func: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    theta: ThetaSubset | None = field(default=None, repr=False)

    def check_support(self, tol: float = 1e-14) -> bool:
        pts = self.grid.points()
        outside = ~_in_body(self.claimed_support, pts, 1e-12)
        return bool(np.all(np.abs(self.values.ravel()[outside]) <= tol))

    def twisted(self, M: np.ndarray) -> np.ndarray:
        """Samples of ``H -> f(M H)`` on the grid."""
        if np.allclose(M, np.eye(len(M))):
            return self.values
        if self.func is None:
            raise TransformError("twisting needs an evaluable function")
        pts = self.grid.points()
        return self.func(pts @ M.T).reshape(self.grid.shape)

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.cell)


def _hull_equations(C: ConvexBody) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``(a, b)`` with ``C = {x : a.x + b <= 0}`` (unit normals)."""
    pts = np.array([[float(t) for t in g] for g in C.generators])
    if pts.shape[1] == 1:
        lo, hi = pts.min(), pts.max()
        return np.array([[-1.0], [1.0]]), np.array([lo, -hi])
    from scipy.spatial import ConvexHull

    hull = ConvexHull(pts)
    eq = hull.equations
    return eq[:, :-1], eq[:, -1]


def _in_body(C: ConvexBody, pts: np.ndarray, tol: float = 0.0) -> np.ndarray:
    A, b = _hull_equations(C)
    return np.all(pts @ A.T + b <= tol, axis=1)


def inscribed_ball(C: ConvexBody) -> tuple[np.ndarray, float]:
    """Chebyshev center and radius of ``C``."""
    A, b = _hull_equations(C)
    l = A.shape[1]
    if l == 1:
        lo, hi = b[0], -b[1]
        return np.array([(lo + hi) / 2]), (hi - lo) / 2
    from scipy.optimize import linprog

    norms = np.linalg.norm(A, axis=1)
    res = linprog(np.r_[np.zeros(l), -1.0], A_ub=np.c_[A, norms], b_ub=-b,
                  bounds=[(None, None)] * l + [(0, None)])
    if not res.success:
        raise SupportError("could not find an interior ball for C")
    return res.x[:l], float(res.x[l])


def _facet_distance(C: ConvexBody, x: np.ndarray) -> float:
    A, b = _hull_equations(C)
    return float(np.min(-(A @ x + b) / np.linalg.norm(A, axis=1)))


def _theta_mats(rs: RootSystemData, theta: ThetaSubset) -> list[np.ndarray]:
    return [weyl_ortho(rs, w) for w in theta.theta_weyl]


def _body_invariant(C: ConvexBody, mats: Sequence[np.ndarray]) -> bool:
    pts = np.array([[float(t) for t in g] for g in C.generators])
    for M in mats:
        moved = pts @ M.T
        if not np.all(_in_body(C, moved, 1e-9)):
            return False
    return True


def default_band(rank: int) -> float:
    """Spectral half-width ``L`` used when none is given."""
    return 40.0 if rank == 1 else 20.0


def standard_support(rs: RootSystemData, theta: ThetaSubset, radius: float | None = None,
                     margin: float = 0.25, max_center: float = 3.0) -> ConvexBody:
    """A ``W_Theta``-invariant convex body in ``a_Theta`` (orthonormal coordinates) sized for the
    default spectral grids.

    Rank one: ``alpha(H)`` in ``[-1, 1]`` (``Theta = Pi``) or ``[0.5, 1.5]``.  Rank two: the
    polygon ``conv(W R rho/|rho|)`` (``R = 2``), translated along the ``W_Theta``-fixed
    directions until every point keeps distance ``margin`` from the walls of ``a_Theta``;
    in narrow cones ``R`` shrinks so that the center stays within ``max_center``.
    """
    a_len = float(np.linalg.norm(rs.simple_ortho[0]))
    if rs.rank == 1:
        lo, hi = (-1.0, 1.0) if theta.is_all else (0.5, 1.5)
        return ConvexBody(((lo / a_len,), (hi / a_len,)))
    if rs.rank != 2:
        raise TransformError("standard supports are provided in rank one and two")
    R = 2.0 if radius is None else radius
    rho_dir = rs.positive_ortho.sum(axis=0)
    rho_dir = rho_dir / np.linalg.norm(rho_dir)
    orbit = np.unique(np.round(np.array([weyl_ortho(rs, w) @ rho_dir for w in rs.weyl]), 12), axis=0)
    center = np.zeros(2)
    verts = R * orbit
    if not theta.is_all:
        lat = lattice(rs)
        u = sum(lat.fund_ortho[i] for i in theta.complement_simple)
        u = u / np.linalg.norm(u)
        outs = np.array([rs.to_ortho([float(t) for t in a]) for a in theta.outside_positive])
        outs = outs / np.linalg.norm(outs, axis=1)[:, None]

        def placed(Rr):
            vs = Rr * orbit
            return vs, max((margin - o @ v) / (o @ u) for o in outs for v in vs)

        verts, t = placed(R)
        if radius is None and t > max_center:
            # narrow cones: shrink so that Delta stays within floating-point range on C
            R *= (max_center - margin) / (t - margin)
            verts, t = placed(R)
        center = t * u
    order = np.argsort(np.arctan2(verts[:, 1], verts[:, 0]))
    return ConvexBody(tuple(tuple(center + v) for v in verts[order]))


def bump(C: ConvexBody, smoothness: float = 2.0, grid: Grid | int | None = None,
         rs: RootSystemData | None = None, theta: ThetaSubset | None = None,
         concentration: float | None = None, band: float | None = None, margin: float = 0.05) -> SampledFn:
    """Smooth bump on the largest ball inside ``C`` (orthonormal coordinates):
    ``exp(-c t^2) exp(s - s / (1 - t^2))`` with ``t = |H - center| / r``.

    ``s`` (``smoothness``) flattens the edge.  The Gaussian factor ``c``
    (``concentration``) trades edge amplitude against spread; its default
    ``0.4 r L`` minimizes the Fourier transform near ``|xi| = L`` for the
    spectral half-width ``L`` (``band``), which is what limits inversion
    accuracy.  With ``rs`` and ``theta`` the support is checked against
    ``a_Theta`` and, when ``C`` is ``W_Theta``-invariant, the bump is
    symmetrized.
    """
    if smoothness <= 0:
        raise ValueError("smoothness must be positive")
    center, radius = inscribed_ball(C)
    mats: list[np.ndarray] = []
    if rs is not None and theta is not None:
        outside = np.array([rs.to_ortho([float(t) for t in a]) for a in theta.outside_positive])
        gens = np.array([[float(t) for t in g] for g in C.generators])
        if len(outside) and np.min(gens @ outside.T) <= 0:
            raise SupportError("C touches or crosses the boundary of a_Theta")
        mats = _theta_mats(rs, theta)
        if _body_invariant(C, mats):
            center = np.mean([M @ center for M in mats], axis=0)
            radius = _facet_distance(C, center)
        else:
            mats = []
    if radius <= 0:
        raise SupportError("C has empty interior")
    l = len(center)
    if concentration is None:
        concentration = 0.4 * radius * (band or default_band(l))

    def profile(pts: np.ndarray) -> np.ndarray:
        t2 = np.sum((np.atleast_2d(pts) - center) ** 2, axis=1) / radius ** 2
        out = np.zeros(len(t2))
        inside = t2 < 1
        ti = t2[inside]
        out[inside] = np.exp(-concentration * ti + smoothness - smoothness / (1 - ti))
        return out

    if mats:
        def func(pts):
            return np.mean([profile(np.atleast_2d(pts) @ M.T) for M in mats], axis=0)
    else:
        func = profile
    if grid is None or isinstance(grid, int):
        n = grid or (2 ** 12 if l == 1 else 2 ** 8)
        pts = np.array([[float(t) for t in g] for g in C.generators])
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        pad = margin * (hi - lo)
        grid = Grid.box(lo - pad, hi + pad, n)
    values = func(grid.points()).reshape(grid.shape)
    edge = max(np.abs(np.take(values, [0, -1], axis=d)).max() for d in range(l))
    if edge > 0:
        raise SupportError("grid does not cover the support of the bump")
    return SampledFn(grid, values, C, func, theta)


def extend_invariant(rs: RootSystemData, f: SampledFn, theta: ThetaSubset, n: int | None = None) -> SampledFn:
    """``f~ = sum_{u in W^Theta} f o u^{-1}``: the ``W``-invariant function agreeing with ``f`` on ``a_Theta``."""
    if f.func is None:
        raise TransformError("extension needs an evaluable function")
    mats = [weyl_ortho(rs, u) for u in min_coset_reps(rs, theta)]
    pts = np.array([[float(t) for t in g] for g in f.claimed_support.generators])
    orbit = np.concatenate([pts @ M.T for M in mats])
    hull = ConvexBody(tuple(tuple(p) for p in orbit))
    lo, hi = orbit.min(axis=0), orbit.max(axis=0)
    pad = 0.05 * (hi - lo)
    grid = Grid.box(lo - pad, hi + pad, n or f.grid.n[0])
    inner = f.func

    def func(x):
        x = np.atleast_2d(x)
        return np.sum([inner(x @ M) for M in mats], axis=0)  # rows of x @ M: u^{-1} x

    return SampledFn(grid, func(grid.points()).reshape(grid.shape), hull, func, rs.theta_all)


# ---------------------------------------------------------------------------
# Fourier-type sums


def euclidean_fourier(f: SampledFn, lam) -> np.ndarray | complex:
    """``int f(H) e^{lambda(H)} dH`` by the midpoint rule, at one point or a batch ``(K, l)``."""
    lam = np.asarray(lam, dtype=complex)
    if lam.ndim <= 1:
        return complex(_forward_points(f.values, f.grid, lam.reshape(1, f.grid.dim))[0])
    return _forward_points(f.values, f.grid, lam)


def _forward_points(values: np.ndarray, grid: Grid, lam: np.ndarray) -> np.ndarray:
    """``sum_H values(H) e^{lambda . H} cell`` for a batch of complex ``lambda``."""
    axes = grid.axes
    out = np.empty(len(lam), dtype=complex)
    for s in range(0, len(lam), CHUNK):
        L = lam[s:s + CHUNK]
        E0 = np.exp(L[:, 0, None] * axes[0][None, :])
        B = np.tensordot(E0, values, axes=([1], [0]))  # (K, n1, ...)
        for d in range(1, grid.dim):
            Ed = np.exp(L[:, d, None] * axes[d][None, :])
            B = np.einsum("ki...,ki->k...", B, Ed)
        out[s:s + CHUNK] = B
    return out * grid.cell


def _forward_grid(values: np.ndarray, grid: Grid, xi_axes: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_H values(H) e^{i xi . H} cell`` on a product grid of ``xi``."""
    v = values.astype(complex)
    for d, (x, xi) in enumerate(zip(grid.axes, xi_axes)):
        parts = []
        for s in range(0, len(xi), CHUNK):
            E = np.exp(1j * np.outer(xi[s:s + CHUNK], x))
            parts.append(np.moveaxis(np.tensordot(E, v, axes=([1], [d])), 0, d))
        v = np.concatenate(parts, axis=d)
    return v * grid.cell


def _inverse_points(A: np.ndarray, xi_axes: Sequence[np.ndarray], cell: float, pts: np.ndarray) -> np.ndarray:
    """``sum_xi A(xi) e^{-i xi . H} cell`` at arbitrary points ``H``."""
    out = np.empty(len(pts), dtype=complex)
    for s in range(0, len(pts), CHUNK):
        P = pts[s:s + CHUNK]
        E0 = np.exp(-1j * P[:, 0, None] * xi_axes[0][None, :])
        B = np.tensordot(E0, A, axes=([1], [0]))
        for d in range(1, len(xi_axes)):
            Ed = np.exp(-1j * P[:, d, None] * xi_axes[d][None, :])
            B = np.einsum("ki...,ki->k...", B, Ed)
        out[s:s + CHUNK] = B
    return out * cell


# ---------------------------------------------------------------------------
# Symbol data


@dataclass(frozen=True)
class SymbolData:
    """``S(nu, H) = Delta(H)^a sum_key e^{key(H)} sum_mono c nu_key^mono``."""

    a: int
    keys_ortho: np.ndarray
    monos: np.ndarray
    coef: np.ndarray
    to_key: np.ndarray

    def poly(self, lam: np.ndarray) -> np.ndarray:
        """``P_key(lambda)`` with shape ``(..., K)``."""
        nu = np.asarray(lam, dtype=complex) @ self.to_key.T
        powers = np.prod(nu[..., None, :] ** self.monos, axis=-1)
        return powers @ self.coef.T


@lru_cache(maxsize=None)
def symbol_data(rs: RootSystemData, k: int) -> SymbolData:
    lat = lattice(rs)
    l = rs.rank
    to_key = np.linalg.inv(lat.fund_ortho.T)
    if k == 0:
        return SymbolData(0, np.zeros((1, l)), np.zeros((1, l), dtype=int), np.ones((1, 1)), to_key)
    sym: SpectralSymbol = _symbol(rs, k)
    a = 0
    while True:
        try:
            nxt = sym.divide_delta(rs)
        except DivisionError:
            break
        sym, a = nxt, a + 1
    keys = sorted(sym.terms)
    monos = sorted({mo for p in sym.terms.values() for mo in p})
    coef = np.array([[float(sym.terms[key].get(mo, 0)) for mo in monos] for key in keys])
    return SymbolData(a, np.array([lat.key_to_ortho(key) for key in keys]), np.array(monos, dtype=int),
                      coef, to_key)


def _delta(rs: RootSystemData, pts: np.ndarray) -> np.ndarray:
    return np.prod(2 * np.sinh(np.atleast_2d(pts) @ rs.positive_ortho.T), axis=1)


def _lambda_alpha(rs: RootSystemData, lam: np.ndarray) -> np.ndarray:
    norms = np.array([float(rs.norm2(a)) for a in rs.positive_roots])
    return np.atleast_2d(lam) @ rs.positive_ortho.T / norms


def factor_product(rs: RootSystemData, theta: ThetaSubset, m, kinds: Sequence[str], lam: np.ndarray) -> np.ndarray:
    """Vectorized product of the polynomial factors of the given kinds."""
    from .special import poly_factors

    pf = poly_factors(rs, theta, m)
    la = _lambda_alpha(rs, lam)
    out = np.ones(len(la), dtype=complex)
    for kind in kinds:
        out = out * pf.signs[kind]
        for i, s, kk, p in pf.factors[kind]:
            out = out * (s * la[:, i] + kk) ** p
    return out


def _require_kernel(rs: RootSystemData, m) -> int:
    if not kernel_available(rs, m):
        raise NotImplementedError(
            "the symbol of D_m is implemented in rank one and for m = 2; use phi_theta-based quadrature")
    return _constant_half(rs, m)


# ---------------------------------------------------------------------------
# The transform


class ThetaTransform:
    """``F_Theta f`` for a sampled ``W_Theta``-invariant ``f``.

    ``regular(lam)`` is ``pi e^- e^+ (lambda) F_Theta f(lambda)``, an entire
    function; calling the object divides by that polynomial.
    """

    def __init__(self, rs: RootSystemData, f: SampledFn, m, theta: ThetaSubset):
        self.rs, self.f, self.theta = rs, f, theta
        self.m = as_mult(rs, m)
        self.k = _require_kernel(rs, self.m)
        self.sd = symbol_data(rs, self.k)
        self.mats = _theta_mats(rs, theta)
        pts = f.grid.points()
        self._pts = pts
        self._delta_a = _delta(rs, pts) ** self.sd.a if self.sd.a else np.ones(len(pts))

    def denominator(self, lam: np.ndarray) -> np.ndarray:
        lam = np.atleast_2d(np.asarray(lam, dtype=complex))
        if self.k == 0:
            return np.ones(len(lam), dtype=complex)
        return factor_product(self.rs, self.theta, self.m, ("pi", "e_minus", "e_plus"), lam)

    def regular(self, lam) -> np.ndarray:
        """``|W_Theta|^{-1} sum_w int f(H) S(w lambda, H) e^{w lambda(H)} dH`` at arbitrary points."""
        lam = np.atleast_2d(np.asarray(lam, dtype=complex))
        sd = self.sd
        total = np.zeros(len(lam), dtype=complex)
        for ki, key in enumerate(sd.keys_ortho):
            weight = (self.f.values.ravel() * self._delta_a * np.exp(self._pts @ key)).reshape(self.f.grid.shape)
            for M in self.mats:
                wl = lam @ M.T
                total += sd.poly(wl)[:, ki] * _forward_points(weight, self.f.grid, wl)
        return total / len(self.mats)

    def __call__(self, lam) -> np.ndarray:
        lam = np.atleast_2d(np.asarray(lam, dtype=complex))
        den = self.denominator(lam)
        if np.any(den == 0):
            raise SingularSpectral("pi e^- e^+ vanishes; use regularized()")
        return self.regular(lam) / den

    def regularized(self, lam, radius: float = 1e-2) -> np.ndarray:
        """``e^-_Theta F_Theta f``: ``regular / (pi e^+_Theta)``, circle means near zeros."""
        lam = np.atleast_2d(np.asarray(lam, dtype=complex))
        out = np.empty(len(lam), dtype=complex)
        kinds = ("pi", "e_plus") if self.k else ()

        def val(y):
            y = np.atleast_2d(y)
            den = factor_product(self.rs, self.theta, self.m, kinds, y) if kinds else 1
            return (self.regular(y) / den)[0]

        for i, x in enumerate(lam):
            if kinds and np.min(np.abs(_lambda_alpha(self.rs, x)[0][:, None]
                                       - np.arange(-self.k, self.k + 1)[None, :])) < radius:
                out[i] = circle_average(val, x, radius)[0]
            else:
                out[i] = val(x)
        return out

    def regular_on_grid(self, sg: "SpectralGrid", twist: np.ndarray | None = None) -> np.ndarray:
        """``regular`` on the product grid ``i xi + shift``; ``twist`` evaluates at ``twist^{-1} lambda``."""
        sd = self.sd
        shift = sg.shift_ortho
        lam = sg.points()
        total = np.zeros(sg.shape, dtype=complex)
        for M in self.mats:
            # int f(H) S(w u^{-1} lambda, H) e^{w u^{-1} lambda (H)} = int f(u w^{-1} H') S(lambda, H') e^{lambda(H')}
            T = M if twist is None else M @ twist.T
            fv = self.f.twisted(T).ravel()
            for ki, key in enumerate(sd.keys_ortho):
                weight = (fv * self._delta_a * np.exp(self._pts @ (key + shift))).reshape(self.f.grid.shape)
                F = _forward_grid(weight, self.f.grid, sg.axes)
                total += sd.poly(lam)[:, ki].reshape(sg.shape) * F
        return total / len(self.mats)

    def on_grid(self, sg: "SpectralGrid") -> "SpectralSamples":
        den = self.denominator(sg.points()).reshape(sg.shape)
        return SpectralSamples(sg, self.regular_on_grid(sg) / den)


def theta_transform(rs: RootSystemData, f: SampledFn, m, theta: ThetaSubset, lam,
                    regularized: bool = False, route: str = "kernel", N: int = 40) -> np.ndarray:
    """``F_Theta f(lambda) = |W_Theta|^{-1} int f phi_Theta(lambda) Delta(m) dH``.

    ``route="kernel"`` uses the ``D_m`` symbol; ``route="direct"`` evaluates
    ``phi_Theta`` pointwise on the support (slow, independent of the symbol).
    """
    lam = np.atleast_2d(np.asarray(lam, dtype=complex))
    if route == "kernel":
        T = ThetaTransform(rs, f, m, theta)
        return T.regularized(lam) if regularized else T(lam)
    if route != "direct":
        raise ValueError(f"unknown route {route!r}")
    from .hcseries import SpectralPoint
    from .multiplicity import delta_weight
    from .special import c_factors_eval, phi_theta

    pts = f.grid.points()
    vals = f.values.ravel()
    keep = np.abs(vals) > 0
    pts, vals = pts[keep], vals[keep]
    dm = delta_weight(rs, m)
    weights = vals * np.array([dm.evaluate(rs, p) for p in pts]) * f.grid.cell
    # points on walls carry zero weight (and phi is evaluated off the walls only)
    off_wall = np.abs(_delta(rs, pts)) > 1e-12
    pts, weights = pts[off_wall], weights[off_wall]
    out = np.empty(len(lam), dtype=complex)
    for i, x in enumerate(lam):
        sp = SpectralPoint(tuple(x))
        phis = np.array([phi_theta(rs, m, theta, sp, p, "auto", N) for p in pts])
        val = np.sum(weights * phis) / len(theta.theta_weyl)
        if regularized:
            val *= complex(c_factors_eval(rs, "e_minus", theta, m, sp))
        out[i] = val
    return out


# ---------------------------------------------------------------------------
# Spectral grids and samples


@dataclass(frozen=True)
class SpectralGrid:
    """Midpoint grid ``xi`` on ``[-L, L]^l`` and the contour ``lambda = i xi + shift``.

    ``shift_ambient`` (exact, optional) is the real part in ambient coordinates.
    """

    L: float
    M: int
    rank: int
    shift_ortho: np.ndarray = field(default=None, repr=False)
    shift_ambient: tuple | None = None

    def __post_init__(self):
        if self.shift_ortho is None:
            object.__setattr__(self, "shift_ortho", np.zeros(self.rank))

    @classmethod
    def make(cls, rs: RootSystemData, L: float | None = None, M: int | None = None, shift=None) -> "SpectralGrid":
        L = L if L is not None else default_band(rs.rank)
        M = M if M is not None else (2 ** 12 if rs.rank == 1 else 2 ** 8)
        if shift is None:
            return cls(float(L), int(M), rs.rank)
        amb = tuple(Fraction(x) for x in shift)
        return cls(float(L), int(M), rs.rank, rs.to_ortho([float(x) for x in amb]), amb)

    @property
    def step(self) -> float:
        return 2 * self.L / self.M

    @property
    def axes(self) -> list[np.ndarray]:
        a = -self.L + (np.arange(self.M) + 0.5) * self.step
        return [a] * self.rank

    @property
    def shape(self) -> tuple:
        return (self.M,) * self.rank

    @property
    def cell(self) -> float:
        return self.step ** self.rank

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        xi = np.stack([m.ravel() for m in mesh], axis=-1)
        return 1j * xi + self.shift_ortho


@dataclass(frozen=True)
class SpectralSamples:
    grid: SpectralGrid
    values: np.ndarray = field(repr=False)


def _as_samples(g, sg: SpectralGrid | None) -> SpectralSamples:
    if isinstance(g, SpectralSamples):
        return g
    if sg is None:
        raise TransformError("a spectral grid is needed to sample a callable")
    if isinstance(g, ThetaTransform):
        return g.on_grid(sg)
    return SpectralSamples(sg, np.asarray(g(sg.points())).reshape(sg.shape))


# ---------------------------------------------------------------------------
# Wave packets and inversion


def _sum_over_orbit(rs: RootSystemData, sd: SymbolData, A_keys: list[np.ndarray], sg: SpectralGrid,
                    H: np.ndarray, sign_a: bool, group=None) -> np.ndarray:
    """``sum_v eps(v)^a sum_key e^{key(v^-1 H)} sum_xi A_key e^{-lambda(v^-1 H)}``."""
    group = rs.weyl if group is None else group
    H = np.atleast_2d(H)
    total = np.zeros(len(H), dtype=complex)
    for v in group:
        Hv = H @ weyl_ortho(rs, v)  # rows: v^{-1} H (orthogonal matrix)
        sgn = v.sign if (sign_a and sd.a % 2) else 1
        for A, key in zip(A_keys, sd.keys_ortho):
            part = _inverse_points(A, sg.axes, sg.cell, Hv)
            total += sgn * np.exp(Hv @ (key - sg.shift_ortho)) * part
    return total


def wave_packet(rs: RootSystemData, g, m, H, sg: SpectralGrid | None = None) -> np.ndarray:
    """``I g(H) = int g(lambda) phi_Pi(-lambda, H) pi e^+_Pi(lambda) dlambda`` over ``i a*``."""
    m = as_mult(rs, m)
    k = _require_kernel(rs, m)
    sd = symbol_data(rs, k)
    gs = _as_samples(g, sg)
    if np.any(gs.grid.shift_ortho != 0):
        raise TransformError("wave packets integrate over the imaginary axis; use invert_shifted for shifts")
    lam = gs.grid.points()
    P = sd.poly(-lam)
    A_keys = [(gs.values.ravel() * P[:, i]).reshape(gs.grid.shape) for i in range(P.shape[1])]
    H = np.atleast_2d(np.asarray(H, dtype=float))

    def at(pts):
        num = _sum_over_orbit(rs, sd, A_keys, gs.grid, pts, True)
        return num * _delta(rs, pts) ** (sd.a - 2 * k) if k else num

    return _off_walls(rs, at, H) if k else at(H)


def _off_walls(rs: RootSystemData, func: Callable[[np.ndarray], np.ndarray], H: np.ndarray,
               tol: float = 1e-6, step: float = 2e-2) -> np.ndarray:
    """``func`` at ``H``; on (or numerically on) a wall, the value is extrapolated from symmetric
    offsets ``H +- s d`` along a generic direction (Richardson in ``s^2``)."""
    from .special import _generic_direction

    out = np.empty(len(H), dtype=complex)
    near = np.min(np.abs(H @ rs.positive_ortho.T), axis=1) < tol
    if np.any(~near):
        out[~near] = func(H[~near])
    if np.any(near):
        d = _generic_direction(rs.rank)
        Hn = H[near]
        sym = []
        for s in (step, step / 2):
            sym.append((func(Hn + s * d) + func(Hn - s * d)) / 2)
        out[near] = (4 * sym[1] - sym[0]) / 3
    return out


def invert_classical(rs: RootSystemData, g, m, theta: ThetaSubset, H, k: float | None,
                     sg: SpectralGrid | None = None) -> np.ndarray:
    """``(-1)^d k |W|/|W_Theta| I g(H)``."""
    if k is None:
        raise UncalibratedK("pass k (see calibrate_k or reference_k)")
    d = d_theta(rs, theta, m)
    return (-1) ** d * k * len(rs.weyl) / len(theta.theta_weyl) * wave_packet(rs, g, m, H, sg)


def shifted_integral(rs: RootSystemData, g, m, H, sg: SpectralGrid, w=None, apply_Dm: bool = True) -> np.ndarray:
    """``[D_m] int g(lambda + mu) e^{-w(lambda + mu)(H)} dlambda`` on the contour of ``sg``."""
    m = as_mult(rs, m)
    k = _require_kernel(rs, m)
    sd = symbol_data(rs, k) if apply_Dm else symbol_data(rs, 0)
    gs = _as_samples(g, sg)
    lam = gs.grid.points()
    P = sd.poly(-lam)
    A_keys = [(gs.values.ravel() * P[:, i]).reshape(gs.grid.shape) for i in range(P.shape[1])]
    H = np.atleast_2d(np.asarray(H, dtype=float))
    group = [rs.weyl[0]] if w is None else [w]
    num = _sum_over_orbit(rs, sd, A_keys, gs.grid, H, True, group)
    # the orbit helper evaluates at w^{-1} H, and lambda(w^{-1} H) = (w lambda)(H)
    return num * _delta(rs, H) ** sd.a if sd.a else num


def invert_shifted(rs: RootSystemData, g, m, theta: ThetaSubset, H, k: float | None,
                   sg: SpectralGrid) -> np.ndarray:
    """``f(H) = (-1)^d k |W| Delta(m; H)^{-1} D_m int F_Theta f(lambda + mu) e^{-(lambda + mu)(H)} dlambda``."""
    if k is None:
        raise UncalibratedK("pass k (see calibrate_k or reference_k)")
    cond = condition_A(rs, theta, m)
    if not cond.holds_A2:
        raise ConditionA2Violated(
            f"Condition A2 fails for Theta={theta.label()} in {rs.name}: the shifted contour route is unavailable")
    if sg.shift_ambient is None:
        raise ShiftOutsideCone("the shift must be given exactly (ambient rational coordinates)")
    neg = tuple(-x for x in sg.shift_ambient)
    if not dual_cone_membership(rs, neg, theta, as_mult(rs, m), with_m=True):
        raise ShiftOutsideCone("-mu must lie in a*_Theta(m)")
    kk = _require_kernel(rs, m)
    H = np.atleast_2d(np.asarray(H, dtype=float))
    val = shifted_integral(rs, g, m, H, sg)
    d = d_theta(rs, theta, m)
    return (-1) ** d * k * len(rs.weyl) * val / _delta(rs, H) ** (2 * kk)


def pav(rs: RootSystemData, g: Callable, theta: ThetaSubset, lam) -> np.ndarray:
    """``sum_{u in W^Theta} g(u^{-1} lambda)``."""
    lam = np.atleast_2d(np.asarray(lam, dtype=complex))
    out = np.zeros(len(lam), dtype=complex)
    for u in min_coset_reps(rs, theta):
        out += np.asarray(g(lam @ weyl_ortho(rs, u)))  # rows: u^{-1} lambda
    return out


def theta_points(rs: RootSystemData, theta: ThetaSubset, pts: np.ndarray, margin: float = 0.0) -> np.ndarray:
    """Mask of points in ``a_Theta`` (strictly, with an optional margin)."""
    outside = np.array([rs.to_ortho([float(t) for t in a]) for a in theta.outside_positive])
    if not len(outside):
        return np.ones(len(pts), dtype=bool)
    return np.all(pts @ outside.T > margin, axis=1)


def eval_points(f: SampledFn, rs: RootSystemData, theta: ThetaSubset, stride: int | None = None) -> tuple:
    """Grid points of ``f`` in ``a_Theta`` (subsampled by ``stride``) and the values there."""
    stride = stride or (1 if f.grid.dim == 1 else 4)
    sl = tuple(slice(0, None, stride) for _ in range(f.grid.dim))
    axes = [a[::stride] for a in f.grid.axes]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([mm.ravel() for mm in mesh], axis=-1)
    vals = f.values[sl].ravel()
    mask = theta_points(rs, theta, pts)
    return pts[mask], vals[mask]


def calibrate_k(rs: RootSystemData, m, theta: ThetaSubset, reference: SampledFn,
                sg: SpectralGrid | None = None, stride: int | None = None) -> float:
    """Least-squares ``k`` with ``k I_Theta(F_Theta f) = f`` on the reference bump."""
    sg = sg or SpectralGrid.make(rs)
    pts, vals = eval_points(reference, rs, theta, stride)
    g = ThetaTransform(rs, reference, m, theta).on_grid(sg)
    raw = invert_classical(rs, g, m, theta, pts, 1.0, sg).real
    den = float(raw @ raw)
    if den == 0 or not np.any(vals):
        raise TransformError("degenerate reference function")
    return float(raw @ vals) / den


@dataclass
class RoundTrip:
    sup_error: float
    peak: float
    k: float
    points: int
    max_imag: float


def roundtrip(rs: RootSystemData, f: SampledFn, m, theta: ThetaSubset, k: float | None = None,
              sg: SpectralGrid | None = None, stride: int | None = None, route: str = "classical",
              shift=None) -> RoundTrip:
    """``sup |k I_Theta F_Theta f - f|`` over the grid points of ``f`` in ``a_Theta``."""
    sg = sg or SpectralGrid.make(rs)
    k = reference_k(rs) if k is None else k
    pts, vals = eval_points(f, rs, theta, stride)
    T = ThetaTransform(rs, f, m, theta)
    if route == "classical":
        rec = invert_classical(rs, T.on_grid(sg), m, theta, pts, k, sg)
    elif route == "shifted":
        sgs = SpectralGrid.make(rs, sg.L, sg.M, shift)
        rec = invert_shifted(rs, T.on_grid(sgs), m, theta, pts, k, sgs)
    else:
        raise ValueError(f"unknown route {route!r}")
    err = np.abs(rec - vals)
    return RoundTrip(float(err.max()), float(np.abs(vals).max()), k, len(pts), float(np.abs(rec.imag).max()))


# ---------------------------------------------------------------------------
# Paley-Wiener diagnostics


@dataclass
class PWReport:
    decay_constants: dict
    decay_ok: dict
    growth_ok: bool
    entire_test: float
    support_estimate: ConvexBody | None
    verdict: bool
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "decay_constants": {str(k): v for k, v in self.decay_constants.items()},
            "decay_ok": {str(k): v for k, v in self.decay_ok.items()},
            "growth_ok": self.growth_ok,
            "entire_test": self.entire_test,
            "support_estimate": None if self.support_estimate is None else
            [list(map(float, p)) for p in self.support_estimate.generators],
            "verdict": self.verdict,
            "notes": self.notes,
        }


def _directions(l: int, count: int = 8) -> np.ndarray:
    if l == 1:
        return np.array([[1.0], [-1.0]])
    t = 2 * np.pi * (np.arange(count) + 0.25) / count
    return np.stack([np.cos(t), np.sin(t)] + [np.zeros(count)] * (l - 2), axis=1)


def pole_candidates(rs: RootSystemData, theta: ThetaSubset, m) -> np.ndarray:
    """Generic points on the hyperplanes ``lambda_alpha = j`` (``|j| < m_alpha / 2``, ``alpha``
    outside ``Theta``), in orthonormal coordinates.

    Intersections are skipped: a function holomorphic off a set of codimension
    two extends across it, so generic points decide entireness.
    """
    mv = lattice(rs).mult_values(m)
    l = rs.rank
    offsets = [0.37 * d for d in _directions(l, 3)[:2]] if l > 1 else [np.zeros(1)]
    pts = []
    for a in theta.outside_positive:
        i = rs.positive_roots.index(a)
        nvec = rs.positive_ortho[i] / float(rs.norm2(a))
        half = int(mv[i] / 2)
        for j in range(-half + 1, half):
            base = nvec * j / float(nvec @ nvec)
            for off in offsets:
                pts.append(base + off - nvec * (off @ nvec) / float(nvec @ nvec))
    if not pts:
        return np.zeros((0, l), dtype=complex)
    return np.unique(np.round(np.array(pts), 12), axis=0).astype(complex)


def residue_test(func: Callable[[np.ndarray], np.ndarray], center: np.ndarray, radius: float = 1e-2,
                 points: int = 32, direction: np.ndarray | None = None) -> float:
    """``|(1/2 pi i) oint func| / (r mean|func|)`` on a circle in a complex line: 0 for holomorphic
    ``func``, order 1 at a simple pole."""
    from .special import _generic_direction

    d = _generic_direction(len(center)) if direction is None else direction
    zs = radius * np.exp(2j * np.pi * (np.arange(points) + 0.5) / points)
    pts = center[None, :] + zs[:, None] * d[None, :]
    vals = np.asarray(func(pts))
    res = np.mean(vals * zs)
    scale = radius * np.mean(np.abs(vals))
    return float(abs(res) / scale) if scale > 0 else 0.0


def pw_membership(rs: RootSystemData, g: Callable[[np.ndarray], np.ndarray], C: ConvexBody, m,
                  theta: ThetaSubset, regularized: Callable | None = None, xi_max: float | None = None,
                  shifts: Sequence[float] = (0.0, 1.0, 2.0, 4.0), n_radii: int = 24,
                  entire_tol: float = 1e-6, growth_slack: float = 10.0) -> PWReport:
    """Numerical membership test for ``PW_Theta(m; C)``.

    ``g`` evaluates the candidate at ``(K, l)`` complex points; ``regularized``
    (optional) evaluates ``e^-_Theta g`` directly, e.g. ``ThetaTransform.regularized``.

    Condition 1: for each ``N`` in 1..4 the ratio
    ``|e^- g(lambda)| (1 + |lambda|)^N e^{-q_C(Re lambda)}`` is sampled on rays
    ``i xi + mu``; its maximum over the outer third of ``|xi|`` must not exceed the
    inner maximum, and growth in the real shift must stay within ``growth_slack``.
    Condition 2: ``P^av g`` has no residue on circles around the pole candidates.
    """
    m = as_mult(rs, m)
    l = rs.rank
    xi_max = xi_max or (40.0 if l == 1 else 20.0)
    gens = np.array([[float(t) for t in p] for p in C.generators])

    def q_C(mu):
        return np.max(np.atleast_2d(mu) @ gens.T, axis=1)

    def reg(lam):
        if regularized is not None:
            return np.asarray(regularized(lam))
        em = factor_product(rs, theta, m, ("e_minus",), lam)
        return em * np.asarray(g(lam))

    dirs = _directions(l)
    radii = np.linspace(0.0, xi_max, n_radii + 1)[1:]
    records = []  # (xi radius, shift size, value, |lambda|, q)
    for s in shifts:
        sdirs = dirs if s > 0 else dirs[:1]
        for sd_ in sdirs:
            mu = s * sd_
            for dxi in dirs[: max(2, len(dirs) // 2)]:
                lam = 1j * radii[:, None] * dxi[None, :] + mu[None, :]
                vals = np.abs(reg(lam))
                qs = q_C(mu[None, :])[0]
                for r_, v_, la in zip(radii, vals, np.linalg.norm(lam, axis=1)):
                    records.append((r_, s, v_, la, qs))
    rec = np.array(records)
    consts, ok = {}, {}
    for N in range(1, 5):
        ratio = rec[:, 2] * (1 + rec[:, 3]) ** N * np.exp(-rec[:, 4])
        consts[N] = float(np.max(ratio))
        outer = rec[:, 0] > 2 * xi_max / 3
        ok[N] = bool(np.isfinite(consts[N]) and np.max(ratio[outer]) <= np.max(ratio[~outer]))
    # growth in the real shift, compared at equal |xi|
    base = rec[:, 2] * np.exp(-rec[:, 4])
    small = rec[:, 1] <= shifts[len(shifts) // 2]
    growth_ok = True
    for r_ in radii:
        at = rec[:, 0] == r_
        if np.any(at & ~small):
            growth_ok &= bool(np.max(base[at & ~small]) <= growth_slack * np.max(base[at & small]))
    notes = []
    cands = pole_candidates(rs, theta, m)
    worst = 0.0
    if len(cands):
        def avg(lam):
            return pav(rs, g, theta, lam)

        for c in cands:
            worst = max(worst, residue_test(avg, c))
    else:
        notes.append("no pole candidates: e^-_Theta is constant")
    support = _support_estimate(rs, reg, l)
    verdict = all(ok.values()) and growth_ok and worst <= entire_tol
    return PWReport(consts, ok, growth_ok, worst, support, verdict, notes)


def _support_estimate(rs: RootSystemData, reg: Callable, l: int, samples=(10.0, 20.0, 30.0, 40.0)):
    """Exponential type along real directions: fit ``log|e^- g(s d)| ~ h s + b log s + c``."""
    dirs = _directions(l, 12)
    ss = np.array(samples)
    design = np.c_[ss, np.log(ss), np.ones_like(ss)]
    vals = []
    for d in dirs:
        mags = np.abs(reg((ss[:, None] * d[None, :]).astype(complex)))
        if np.any(mags <= 0) or not np.all(np.isfinite(mags)):
            return None
        vals.append(np.linalg.lstsq(design, np.log(mags), rcond=None)[0][0])
    vals = np.array(vals)
    if l == 1:
        return ConvexBody(((-vals[1],), (vals[0],)))
    try:
        from scipy.spatial import HalfspaceIntersection

        hs = np.c_[dirs, -vals]
        inner = np.linalg.lstsq(dirs, vals, rcond=None)[0] * 0
        res = HalfspaceIntersection(hs, inner + _interior_hint(dirs, vals))
        return ConvexBody(tuple(tuple(p) for p in res.intersections))
    except Exception:  # noqa: BLE001 - estimate is advisory
        return None


def _interior_hint(dirs: np.ndarray, vals: np.ndarray) -> np.ndarray:
    from scipy.optimize import linprog

    l = dirs.shape[1]
    res = linprog(np.r_[np.zeros(l), -1.0], A_ub=np.c_[dirs, np.ones(len(dirs))], b_ub=vals,
                  bounds=[(None, None)] * l + [(None, 1.0)])
    return res.x[:l] if res.success else np.zeros(l)


__all__ = [
    "Grid", "SampledFn", "SpectralGrid", "SpectralSamples", "ThetaTransform", "PWReport", "RoundTrip",
    "bump", "default_band", "standard_support", "euclidean_fourier", "theta_transform", "wave_packet",
    "invert_classical", "invert_shifted",
    "shifted_integral", "pav", "extend_invariant", "pw_membership", "calibrate_k", "roundtrip", "reference_k",
    "inscribed_ball", "pole_candidates", "residue_test", "theta_points", "eval_points", "symbol_data",
    "TransformError", "SupportError", "ConditionA2Violated", "ShiftOutsideCone", "UncalibratedK",
    "SlowDecay",
]
