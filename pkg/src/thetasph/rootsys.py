"""Irreducible reduced root systems, Weyl groups, cosets and cones.

Roots live in the standard Bourbaki ambient coordinates with exact
``Fraction`` entries.  The inner product is ``scale`` times the ambient dot
product.  The pairing of a functional with a point of the flat is taken
through the inner product, so ``alpha(H) = <alpha, H>``.

Simple roots are indexed from 0 in code; user-facing surfaces (CLI, JSON)
use 1-based names ``alpha_1 .. alpha_l``.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Vector = tuple  # tuple of Fraction (exact) or float


class RootSystemError(ValueError):
    """Inadmissible root-system request or bad geometric input."""


FAMILIES = ("A", "B", "C", "D", "G2")
DEFAULT_WEYL_CAP = 100_000


def _unit(d: int, i: int) -> list[Fraction]:
    v = [Fraction(0)] * d
    v[i] = Fraction(1)
    return v


def _sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def _add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def _smul(c, v):
    return tuple(c * a for a in v)


def _dot(u, v):
    return sum((a * b for a, b in zip(u, v)), Fraction(0) if isinstance(u[0], Fraction) else 0.0)


def _bourbaki_simple_roots(family: str, rank: int) -> list[tuple[Fraction, ...]]:
    if family == "A":
        if rank < 1:
            raise RootSystemError("A_l needs rank >= 1")
        d = rank + 1
        return [tuple(_sub(_unit(d, i), _unit(d, i + 1))) for i in range(rank)]
    if family in ("B", "C"):
        if rank < 2:
            raise RootSystemError(f"{family}_l needs rank >= 2")
        d = rank
        out = [tuple(_sub(_unit(d, i), _unit(d, i + 1))) for i in range(rank - 1)]
        last = Fraction(1) if family == "B" else Fraction(2)
        out.append(_smul(last, _unit(d, rank - 1)))
        return out
    if family == "D":
        if rank < 3:
            raise RootSystemError("D_l needs rank >= 3")
        d = rank
        out = [tuple(_sub(_unit(d, i), _unit(d, i + 1))) for i in range(rank - 1)]
        out.append(tuple(_add(_unit(d, rank - 2), _unit(d, rank - 1))))
        return out
    if family == "G2":
        if rank != 2:
            raise RootSystemError("G2 has rank 2")
        F = Fraction
        return [(F(1), F(-1), F(0)), (F(-2), F(1), F(1))]
    raise RootSystemError(f"unknown family {family!r}; expected one of {FAMILIES}")


def solve_exact(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction] | None:
    """Solve a square rational system by Gauss-Jordan; ``None`` if singular."""
    n = len(A)
    M = [list(map(Fraction, row)) + [Fraction(b[i])] for i, row in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [x / p for x in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


def parse_system(name: str) -> tuple[str, int]:
    """``"A2"`` -> ``("A", 2)``; ``"G2"`` -> ``("G2", 2)``."""
    s = name.strip().upper()
    if s == "G2":
        return "G2", 2
    if len(s) >= 2 and s[0] in "ABCD" and s[1:].isdigit():
        return s[0], int(s[1:])
    raise RootSystemError(f"cannot parse root system name {name!r}")


@dataclass(frozen=True)
class WeylElement:
    """A Weyl group element.

    ``word`` lists simple reflection indices (0-based) with
    ``w = s_word[0] s_word[1] ...``; ``perm[i]`` is the index of ``w(root_i)``.
    """

    matrix: tuple[tuple[Fraction, ...], ...]
    word: tuple[int, ...]
    length: int
    perm: tuple[int, ...] = field(repr=False)

    @property
    def sign(self) -> int:
        return -1 if self.length % 2 else 1

    def apply(self, v):
        return tuple(sum((a * x for a, x in zip(row, v)), type(v[0])(0)) for row in self.matrix)

    def apply_float(self, v) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float) @ np.asarray(v)

    @property
    def is_identity(self) -> bool:
        return self.length == 0


@dataclass(frozen=True)
class RootSystemData:
    family: str
    rank: int
    scale: Fraction
    roots: tuple[Vector, ...]
    positive_roots: tuple[Vector, ...]
    simple_roots: tuple[Vector, ...]

    @property
    def name(self) -> str:
        return "G2" if self.family == "G2" else f"{self.family}{self.rank}"

    @property
    def dim(self) -> int:
        return len(self.simple_roots[0])

    def inner(self, u, v):
        if isinstance(u[0], Fraction) and isinstance(v[0], Fraction):
            return self.scale * _dot(u, v)
        return float(self.scale) * sum(a * b for a, b in zip(u, v))

    def norm2(self, v) -> Fraction:
        return self.inner(v, v)

    @cached_property
    def gram(self) -> tuple[tuple[Fraction, ...], ...]:
        """Gram matrix of the simple roots."""
        S = self.simple_roots
        return tuple(tuple(self.inner(a, b) for b in S) for a in S)

    @cached_property
    def root_index(self) -> dict[Vector, int]:
        return {r: i for i, r in enumerate(self.roots)}

    @cached_property
    def positive_index(self) -> frozenset[int]:
        return frozenset(self.root_index[r] for r in self.positive_roots)

    def is_root(self, v) -> bool:
        return tuple(Fraction(x) for x in v) in self.root_index

    def simple_coords(self, v) -> tuple[Fraction, ...]:
        """Coefficients of ``v`` in the simple roots (``v`` must lie in their span)."""
        rhs = [self.inner(a, v) for a in self.simple_roots]
        c = solve_exact(self.gram, rhs)
        back = tuple(sum((ci * a[k] for ci, a in zip(c, self.simple_roots)), Fraction(0))
                     for k in range(self.dim))
        if back != tuple(Fraction(x) for x in v):
            raise RootSystemError(f"{v} is not in the span of the simple roots")
        return tuple(c)

    def height(self, v) -> Fraction:
        return sum(self.simple_coords(v), Fraction(0))

    def combo(self, coeffs: Sequence) -> Vector:
        """The vector ``sum_i coeffs[i] * alpha_i``."""
        out = [Fraction(0)] * self.dim
        for c, a in zip(coeffs, self.simple_roots):
            for k in range(self.dim):
                out[k] += Fraction(c) * a[k]
        return tuple(out)

    def reflect(self, alpha, v):
        c = 2 * self.inner(v, alpha) / self.inner(alpha, alpha)
        return tuple(x - c * a for x, a in zip(v, alpha))

    def reflection_matrix(self, alpha) -> tuple[tuple[Fraction, ...], ...]:
        n2 = _dot(alpha, alpha)
        d = self.dim
        return tuple(
            tuple((Fraction(1) if i == j else Fraction(0)) - 2 * alpha[i] * alpha[j] / n2
                  for j in range(d))
            for i in range(d)
        )

    def lambda_alpha(self, lam, alpha):
        """``<lam, alpha> / <alpha, alpha>``; exact for rational ``lam``."""
        if not self.is_root(alpha):
            raise RootSystemError(f"{alpha} is not a root of {self.name}")
        return self.inner(lam, alpha) / self.inner(alpha, alpha)

    def is_long(self, alpha) -> bool:
        n = self.norm2(alpha)
        return n == max(self.norm2(r) for r in self.simple_roots)

    @property
    def has_two_lengths(self) -> bool:
        return len({self.norm2(r) for r in self.simple_roots}) == 2

    def fundamental_coweight(self, j: int) -> Vector:
        """The point ``H`` in the span of the roots with ``alpha_i(H) = delta_ij``."""
        rhs = [Fraction(int(i == j)) for i in range(self.rank)]
        c = solve_exact(self.gram, rhs)
        return self.combo(c)

    # Orthonormal coordinates --------------------------------------------------

    @cached_property
    def ortho_basis(self) -> np.ndarray:
        """``dim x rank`` float matrix whose columns are orthonormal for ``inner``.

        Gram-Schmidt over the simple roots in order, so ``alpha_1`` lies on
        the first axis.
        """
        s = float(self.scale)
        cols: list[np.ndarray] = []
        for a in self.simple_roots:
            v = np.array([float(x) for x in a])
            for q in cols:
                v = v - s * (q @ v) * q
            cols.append(v / np.sqrt(s * (v @ v)))
        return np.stack(cols, axis=1)

    def to_ortho(self, v) -> np.ndarray:
        """Ambient vector in the root span -> orthonormal coordinates."""
        return float(self.scale) * self.ortho_basis.T @ np.asarray(v, dtype=complex if np.iscomplexobj(v) else float)

    def from_ortho(self, x) -> np.ndarray:
        return self.ortho_basis @ np.asarray(x)

    @cached_property
    def roots_ortho(self) -> np.ndarray:
        return np.array([self.to_ortho([float(t) for t in r]) for r in self.roots])

    @cached_property
    def positive_ortho(self) -> np.ndarray:
        return np.array([self.to_ortho([float(t) for t in r]) for r in self.positive_roots])

    @cached_property
    def simple_ortho(self) -> np.ndarray:
        return np.array([self.to_ortho([float(t) for t in r]) for r in self.simple_roots])

    # Weyl group ---------------------------------------------------------------

    @cached_property
    def weyl(self) -> tuple[WeylElement, ...]:
        return tuple(enumerate_weyl(self))

    @cached_property
    def weyl_by_perm(self) -> dict[tuple[int, ...], WeylElement]:
        return {w.perm: w for w in self.weyl}

    @cached_property
    def longest(self) -> WeylElement:
        return max(self.weyl, key=lambda w: w.length)

    def theta(self, indices: Iterable[int]) -> "ThetaSubset":
        return ThetaSubset.build(self, indices)

    @property
    def theta_all(self) -> "ThetaSubset":
        return self.theta(range(self.rank))

    @property
    def theta_empty(self) -> "ThetaSubset":
        return self.theta(())

    def to_json(self) -> str:
        return json.dumps({"family": self.family, "rank": self.rank})


def build_root_system(family: str, rank: int | None = None, scale=None) -> RootSystemData:
    """Build an irreducible reduced root system in Bourbaki coordinates.

    ``scale`` multiplies the ambient dot product.  The default is ``1/2`` for
    ``A1`` (so that the root has unit length) and ``1`` otherwise.
    """
    if rank is None:
        family, rank = parse_system(family)
    family = family.upper()
    if family not in FAMILIES:
        raise RootSystemError(f"unknown family {family!r}; expected one of {FAMILIES}")
    simple = _bourbaki_simple_roots(family, rank)
    if scale is None:
        scale = Fraction(1, 2) if (family, rank) == ("A", 1) else Fraction(1)
    scale = Fraction(scale)
    if scale <= 0:
        raise RootSystemError("scale must be positive")

    def refl(alpha, v):
        c = 2 * _dot(v, alpha) / _dot(alpha, alpha)
        return tuple(x - c * a for x, a in zip(v, alpha))

    seen = set(simple)
    queue = deque(simple)
    while queue:
        v = queue.popleft()
        for a in simple:
            u = refl(a, v)
            if u not in seen:
                seen.add(u)
                queue.append(u)
    rs0 = RootSystemData(family, rank, scale, (), (), tuple(simple))
    pos, roots = [], sorted(seen, key=lambda r: (rs0.height(r) < 0, abs(rs0.height(r)), rs0.simple_coords(r)))
    for r in roots:
        c = rs0.simple_coords(r)
        if any(x.denominator != 1 for x in c):
            raise RootSystemError(f"root {r} is not an integral combination of simple roots")
        if all(x >= 0 for x in c):
            pos.append(r)
        elif not all(x <= 0 for x in c):
            raise RootSystemError(f"root {r} has mixed-sign simple coordinates")
    rs = RootSystemData(family, rank, scale, tuple(roots), tuple(pos), tuple(simple))
    _check_root_system(rs)
    return rs


def _check_root_system(rs: RootSystemData) -> None:
    rootset = set(rs.roots)
    for a in rs.roots:
        if tuple(2 * x for x in a) in rootset:
            raise RootSystemError("system is not reduced")
        for b in rs.roots:
            if rs.reflect(a, b) not in rootset:
                raise RootSystemError("root set not closed under reflections")
    if 2 * len(rs.positive_roots) != len(rs.roots):
        raise RootSystemError("positive roots are not half of all roots")


def enumerate_weyl(rs: RootSystemData, cap: int = DEFAULT_WEYL_CAP) -> list[WeylElement]:
    """All Weyl group elements ordered by (length, lexicographic reduced word).

    Breadth-first search over right multiplication by simple reflections;
    the first word reaching an element is its shortlex-minimal reduced word.
    """
    n = len(rs.roots)
    idx = rs.root_index
    pos = rs.positive_index
    simple_perm = []
    simple_mat = []
    for a in rs.simple_roots:
        simple_perm.append(tuple(idx[rs.reflect(a, r)] for r in rs.roots))
        simple_mat.append(rs.reflection_matrix(a))
    d = rs.dim
    ident = tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))
    e = WeylElement(ident, (), 0, tuple(range(n)))
    out = [e]
    seen = {e.perm}
    layer = [e]
    while layer:
        nxt = []
        for w in layer:
            for i, sp in enumerate(simple_perm):
                perm = tuple(w.perm[sp[b]] for b in range(n))
                if perm in seen:
                    continue
                seen.add(perm)
                if len(seen) > cap:
                    raise RootSystemError(f"Weyl group exceeds cap {cap}")
                S = simple_mat[i]
                mat = tuple(
                    tuple(sum((w.matrix[r][k] * S[k][c] for k in range(d)), Fraction(0)) for c in range(d))
                    for r in range(d)
                )
                length = sum(1 for b in pos if perm[b] not in pos)
                nxt.append(WeylElement(mat, w.word + (i,), length, perm))
        out.extend(nxt)
        layer = nxt
    return out


def compose(rs: RootSystemData, u: WeylElement, v: WeylElement) -> WeylElement:
    """The product ``uv`` as an element of ``rs.weyl``."""
    perm = tuple(u.perm[v.perm[b]] for b in range(len(rs.roots)))
    return rs.weyl_by_perm[perm]


def inverse(rs: RootSystemData, w: WeylElement) -> WeylElement:
    perm = [0] * len(w.perm)
    for i, j in enumerate(w.perm):
        perm[j] = i
    return rs.weyl_by_perm[tuple(perm)]


@dataclass(frozen=True)
class ThetaSubset:
    """A subset of the simple roots together with its parabolic data."""

    rs: RootSystemData = field(repr=False)
    indices: tuple[int, ...]
    theta_positive: tuple[Vector, ...] = field(repr=False)
    theta_weyl: tuple[WeylElement, ...] = field(repr=False)

    @classmethod
    def build(cls, rs: RootSystemData, indices: Iterable[int]) -> "ThetaSubset":
        ind = tuple(sorted(set(int(i) for i in indices)))
        if any(i < 0 or i >= rs.rank for i in ind):
            raise RootSystemError(f"simple root indices {ind} out of range for rank {rs.rank}")
        inside = set(ind)
        tpos = tuple(
            r for r in rs.positive_roots
            if all(c == 0 for k, c in enumerate(rs.simple_coords(r)) if k not in inside)
        )
        tw = tuple(w for w in rs.weyl if set(w.word) <= inside)
        return cls(rs, ind, tpos, tw)

    @property
    def is_all(self) -> bool:
        return len(self.indices) == self.rs.rank

    @property
    def is_empty(self) -> bool:
        return not self.indices

    @property
    def simple(self) -> tuple[Vector, ...]:
        return tuple(self.rs.simple_roots[i] for i in self.indices)

    @property
    def complement_simple(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.rs.rank) if i not in self.indices)

    @cached_property
    def outside_positive(self) -> tuple[Vector, ...]:
        """Positive roots not in the span of the subset."""
        tp = set(self.theta_positive)
        return tuple(r for r in self.rs.positive_roots if r not in tp)

    def label(self) -> str:
        if self.is_all:
            return "Pi"
        if self.is_empty:
            return "empty"
        return ",".join(str(i + 1) for i in self.indices)


def parse_theta(rs: RootSystemData, spec) -> ThetaSubset:
    """Accept ``"Pi"``, ``"empty"``, ``"1,2"`` (1-based) or an index list (0-based)."""
    if isinstance(spec, ThetaSubset):
        return spec
    if isinstance(spec, str):
        s = spec.strip()
        if s.lower() in ("pi", "all", "full"):
            return rs.theta_all
        if s.lower() in ("empty", "none", "", "{}"):
            return rs.theta_empty
        try:
            one_based = [int(t) for t in s.strip("{}").split(",") if t.strip()]
        except ValueError as exc:
            raise RootSystemError(f"cannot parse theta {spec!r}") from exc
        if any(i < 1 or i > rs.rank for i in one_based):
            raise RootSystemError(f"theta index out of range 1..{rs.rank}: {spec!r}")
        return rs.theta(i - 1 for i in one_based)
    return rs.theta(spec)


def min_coset_reps(rs: RootSystemData, theta: ThetaSubset) -> list[WeylElement]:
    """Shortest representatives of the cosets ``w W_Theta``.

    ``w`` is shortest in its coset iff it maps every root of ``Theta`` to a
    positive root.
    """
    pos = rs.positive_index
    idx = rs.root_index
    th = [idx[a] for a in theta.simple]
    return [w for w in rs.weyl if all(w.perm[b] in pos for b in th)]


# Cones ----------------------------------------------------------------------


def _pairings(rs: RootSystemData, H, roots, coords: str):
    if coords == "ambient":
        return [rs.inner(a, tuple(H)) for a in roots]
    if coords == "ortho":
        h = np.asarray(H, dtype=float)
        return [float(rs.to_ortho([float(t) for t in a]) @ h) for a in roots]
    raise RootSystemError(f"unknown coordinate system {coords!r}")


def cone_membership(rs: RootSystemData, H, kind: str, theta: ThetaSubset | None = None,
                    r=None, X0=None, coords: str = "ambient", tol: float = 0.0) -> bool:
    """Membership of ``H`` in the open chamber, the set ``a_Theta``, the
    face cone ``C_Theta`` or the translated cone ``C(r, X0)``.

    Exact for rational input in ambient coordinates; ``tol`` is a slack used
    only for float input.
    """
    theta = rs.theta_all if theta is None and kind == "a_plus" else theta
    if kind == "a_plus":
        return all(x > tol for x in _pairings(rs, H, rs.positive_roots, coords))
    if theta is None:
        raise RootSystemError(f"cone kind {kind!r} needs a Theta")
    if kind == "a_theta":
        return all(x > tol for x in _pairings(rs, H, theta.outside_positive, coords))
    if kind == "C_theta":
        zero = _pairings(rs, H, theta.simple, coords)
        plus = _pairings(rs, H, [rs.simple_roots[i] for i in theta.complement_simple], coords)
        return all(abs(x) <= tol for x in zero) and all(x > tol for x in plus)
    if kind == "C_rX0":
        if r is None or X0 is None or r <= 0:
            raise RootSystemError("C_rX0 needs r > 0 and X0")
        if not cone_membership(rs, X0, "C_theta", theta, coords=coords, tol=tol):
            raise RootSystemError("X0 must lie in C_Theta")
        shifted = [h - r * x for h, x in zip(H, X0)]
        return all(x >= -tol for x in _pairings(rs, shifted, theta.outside_positive, coords))
    raise RootSystemError(f"unknown cone kind {kind!r}")


def _independent(rs: RootSystemData, vecs) -> bool:
    G = [[rs.inner(a, b) for b in vecs] for a in vecs]
    return solve_exact(G, [Fraction(0)] * len(vecs)) is not None


def in_positive_span(rs: RootSystemData, lam, gens: Sequence[Vector]) -> bool:
    """Exact test of ``lam`` in the closed cone spanned by ``gens``.

    By Caratheodory's theorem it suffices to try linearly independent
    subsets; on each one the coefficients are unique and are found by an
    exact Gram solve.
    """
    lam = tuple(Fraction(x) for x in lam)
    if all(x == 0 for x in lam):
        return True
    for size in range(1, rs.rank + 1):
        for sub in itertools.combinations(gens, size):
            G = [[rs.inner(a, b) for b in sub] for a in sub]
            c = solve_exact(G, [rs.inner(a, lam) for a in sub])
            if c is None or any(x < 0 for x in c):
                continue
            back = tuple(sum((ci * a[k] for ci, a in zip(c, sub)), Fraction(0)) for k in range(rs.dim))
            if back == lam:
                return True
    return False


def dual_cone_membership(rs: RootSystemData, lam, theta: ThetaSubset, m=None,
                         with_m: bool = False) -> bool:
    """Is the real functional ``lam`` a nonnegative combination of the
    positive roots outside ``Theta``?  With ``with_m`` it must also satisfy
    ``lam_alpha >= m_alpha / 2`` on those roots."""
    lam = tuple(Fraction(x) for x in lam)
    if not in_positive_span(rs, lam, theta.outside_positive):
        return False
    if with_m:
        if m is None:
            raise RootSystemError("with_m=True needs a multiplicity")
        return all(rs.lambda_alpha(lam, a) >= Fraction(m[a], 2) for a in theta.outside_positive)
    return True


@dataclass(frozen=True)
class ConvexBody:
    """Closed convex hull of finitely many points."""

    generators: tuple[Vector, ...]

    def __post_init__(self):
        if not self.generators:
            raise RootSystemError("convex body needs at least one generator")

    def support(self, lam, inner=None):
        inner = inner or (lambda u, v: sum(a * b for a, b in zip(u, v)))
        return max(inner(lam, g) for g in self.generators)

    def transformed(self, w: WeylElement) -> "ConvexBody":
        return ConvexBody(tuple(w.apply(g) for g in self.generators))


def support_function(E: ConvexBody, lam, inner=None):
    """``q_E(lam) = max_{H in E} lam(H)``, attained at a generator."""
    return E.support(lam, inner)


def orbit_hull(rs: RootSystemData, H) -> ConvexBody:
    """``conv(W . H)``."""
    pts = []
    for w in rs.weyl:
        p = w.apply(tuple(H))
        if p not in pts:
            pts.append(p)
    return ConvexBody(tuple(pts))
