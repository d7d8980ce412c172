"""Multiplicity functions, derived constants, Condition A and the K_eps tables."""

from __future__ import annotations

import ast
import json
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .exppoly import LaurentPoly, delta_poly, is_invariant, lattice
from .rootsys import RootSystemData, ThetaSubset


class MultiplicityError(ValueError):
    pass


@dataclass(frozen=True)
class MultiplicityFn:
    """W-invariant multiplicity keyed by root length (``"all"`` or ``"short"``/``"long"``).

    Values are nonnegative; ``require_even`` (the default) rejects odd ones.
    """

    rs: RootSystemData = field(repr=False)
    values: Mapping[str, Fraction]

    @classmethod
    def from_spec(cls, rs: RootSystemData, spec, require_even: bool = True) -> "MultiplicityFn":
        if isinstance(spec, MultiplicityFn):
            return spec
        if isinstance(spec, str):
            spec = json.loads(spec) if spec.strip().startswith("{") else {"all": spec}
        if isinstance(spec, (int, Fraction, float)):
            spec = {"all": spec}
        vals = {}
        for k, v in dict(spec).items():
            if k not in ("all", "short", "long"):
                raise MultiplicityError(f"unknown multiplicity key {k!r}")
            vals[k] = Fraction(v)
        if "all" in vals and len(vals) > 1:
            raise MultiplicityError("use either 'all' or 'short'/'long'")
        if "all" not in vals:
            if not rs.has_two_lengths:
                if len(set(vals.values())) > 1:
                    raise MultiplicityError(f"{rs.name} has one root length")
                vals = {"all": next(iter(vals.values()))}
            elif set(vals) != {"short", "long"}:
                raise MultiplicityError("both 'short' and 'long' are needed")
        if any(v < 0 for v in vals.values()):
            raise MultiplicityError("multiplicities must be nonnegative")
        out = cls(rs, vals)
        if require_even and not out.is_even:
            raise MultiplicityError("multiplicities must be even integers")
        return out

    def of(self, alpha) -> Fraction:
        if "all" in self.values:
            return self.values["all"]
        return self.values["long" if self.rs.is_long(alpha) else "short"]

    __getitem__ = of

    @property
    def is_even(self) -> bool:
        return all(v.denominator == 1 and v % 2 == 0 for v in self.values.values())

    @property
    def constant(self) -> Fraction | None:
        vs = set(self.values.values())
        return next(iter(vs)) if len(vs) == 1 else None

    def halved(self) -> "MultiplicityFn":
        return MultiplicityFn(self.rs, {k: v / 2 for k, v in self.values.items()})

    def to_json(self) -> dict:
        return {k: (int(v) if v.denominator == 1 else str(v)) for k, v in self.values.items()}


def as_mult(rs: RootSystemData, m) -> MultiplicityFn:
    return MultiplicityFn.from_spec(rs, m, require_even=False)


def rho(rs: RootSystemData, m) -> tuple[Fraction, ...]:
    """``rho(m) = 1/2 sum_{alpha>0} m_alpha alpha`` in ambient coordinates.

    For even ``m`` the result is checked to lie in the lattice ``P``.
    """
    m = as_mult(rs, m)
    out = [Fraction(0)] * rs.dim
    for a in rs.positive_roots:
        for k in range(rs.dim):
            out[k] += m[a] * a[k] / 2
    out = tuple(out)
    if m.is_even and not lattice(rs).in_lattice(out):
        raise AssertionError("rho(m) is not in P for even m")
    return out


def delta_weight(rs: RootSystemData, m) -> LaurentPoly:
    """``Delta(m) = prod_{alpha>0} (e^alpha - e^-alpha)^{m_alpha}`` for even ``m``."""
    m = as_mult(rs, m)
    if not m.is_even:
        raise MultiplicityError("Delta(m) is defined here for even multiplicities only")
    out = delta_poly(rs, m)
    if not is_invariant(rs, out):
        raise AssertionError("Delta(m) failed the W-invariance check")
    return out


def d_theta(rs: RootSystemData, theta: ThetaSubset, m) -> int:
    """``d(Theta, m) = 1/2 sum_{alpha in Sigma+ minus <Theta>+} m_alpha``."""
    m = as_mult(rs, m)
    s = sum((m[a] for a in theta.outside_positive), Fraction(0)) / 2
    if s.denominator != 1:
        raise MultiplicityError("d(Theta, m) is not an integer")
    return int(s)


@dataclass(frozen=True)
class ConditionA:
    holds_A1: bool
    holds_A2: bool

    @property
    def holds(self) -> bool:
        return self.holds_A1 or self.holds_A2


def condition_A(rs: RootSystemData, theta: ThetaSubset, m) -> ConditionA:
    """A1: ``m_alpha <= 2`` off ``<Theta>``.  A2: exactly one simple root
    ``beta`` is missing from ``Theta`` and ``<beta, alpha> >= 0`` for every
    positive root ``alpha`` off ``<Theta>``."""
    m = as_mult(rs, m)
    outside = theta.outside_positive
    a1 = all(m[a] <= 2 for a in outside)
    comp = theta.complement_simple
    a2 = False
    if len(comp) == 1:
        beta = rs.simple_roots[comp[0]]
        a2 = all(rs.inner(beta, a) >= 0 for a in outside)
    return ConditionA(a1, a2)


def condition_A2_roots(rs: RootSystemData) -> list[int]:
    """Simple-root indices ``j`` (0-based) for which ``Theta = Pi minus {alpha_j}`` satisfies A2."""
    return [j for j in range(rs.rank)
            if condition_A(rs, rs.theta([i for i in range(rs.rank) if i != j]), 0).holds_A2]


# ---------------------------------------------------------------------------
# K_eps symmetric pairs with even multiplicities


@dataclass(frozen=True)
class KEpsilonEntry:
    g_name: str
    h_name: str
    fixed_subalgebra: str
    sigma_family: str
    sigma_rank_expr: str
    m_value: str
    table: str
    constraints: str

    @property
    def sigma(self) -> str:
        if self.sigma_rank_expr.isdigit():
            return f"{self.sigma_family}{self.sigma_rank_expr}"
        return f"{self.sigma_family}_{{{self.sigma_rank_expr}}}"

    def admissible(self, **params: int) -> bool:
        """Evaluate the row constraint (e.g. ``n>=2, 1<=j<=[n/2]``) on parameters."""
        return _eval_constraints(self.constraints, params)

    def instantiate(self, **params: int) -> dict:
        """Concrete ``(sigma, rank, m)`` for admissible parameters."""
        if not self.admissible(**params):
            raise ValueError(f"parameters {params} violate {self.constraints!r}")
        return {
            "sigma_family": self.sigma_family,
            "rank": _eval_expr(self.sigma_rank_expr, params),
            "m": _eval_expr(self.m_value, params),
        }

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _row(table, g, h, fixed, fam, rk, m, cons=""):
    return KEpsilonEntry(g, h, fixed, fam, rk, m, table, cons)


_R, _N, _K = "Riemannian", "NCC", "KepsII"

K_EPSILON_TABLES: tuple[KEpsilonEntry, ...] = (
    _row(_R, "sl(n,C)", "su(n)", "", "A", "n-1", "2", "n>=2"),
    _row(_R, "so(2n+1,C)", "so(2n+1)", "", "B", "n", "2", "n>=2"),
    _row(_R, "sp(n,C)", "sp(n)", "", "C", "n", "2", "n>=3"),
    _row(_R, "so(2n,C)", "so(2n)", "", "D", "n", "2", "n>=4"),
    _row(_R, "(e6)_C", "e6", "", "E", "6", "2"),
    _row(_R, "(e7)_C", "e7", "", "E", "7", "2"),
    _row(_R, "(e8)_C", "e8", "", "E", "8", "2"),
    _row(_R, "(f4)_C", "f4", "", "F", "4", "2"),
    _row(_R, "(g2)_C", "g2", "", "G", "2", "2"),
    _row(_R, "su*(2n)", "sp(n)", "", "A", "n-1", "4", "n>=2"),
    _row(_R, "e6(-26)", "f4(-20)", "", "A", "2", "8"),
    _row(_R, "so(2n+1,1)", "so(2n+1)", "", "A", "1", "2n", "n>=3"),
    _row(_N, "sl(n,C)", "su(n-j,j)", "sl(n-j,C)+sl(j,C)+C", "A", "n-1", "2", "n>=2, 1<=j<=[n/2]"),
    _row(_N, "so(2n+1,C)", "so(2n-1,2)", "so(2n-1,C)+C", "B", "n", "2", "n>=2"),
    _row(_N, "sp(n,C)", "sp(n,R)", "gl(n,C)", "C", "n", "2", "n>=3"),
    _row(_N, "so(2n,C)", "so(2n-2,2)", "so(2n-2,C)+C", "D", "n", "2", "n>=4"),
    _row(_N, "so(2n,C)", "so*(2n)", "gl(n,C)", "D", "n", "2", "n>=4"),
    _row(_N, "(e6)_C", "e6(-14)", "so(10,C)+C", "E", "6", "2"),
    _row(_N, "(e7)_C", "e7(-25)", "(e6)_C+C", "E", "7", "2"),
    _row(_N, "su*(2n)", "sp(n-j,j)", "su*(2(n-j))+su*(2j)+R", "A", "n-1", "4", "n>=2, 1<=j<=[n/2]"),
    _row(_N, "e6(-26)", "f4(-20)", "so(9,1)+R", "A", "2", "8"),
    _row(_N, "so(2n+1,1)", "so(2n,1)", "so(2n+1)+R", "A", "1", "2n", "n>=3"),
    _row(_K, "so(2n+1,C)", "so(2(n-j)+1,2j)", "so(2(n-j)+1,C)+so(2j,C)", "B", "n", "2", "n>=2, 2<=j<=n"),
    _row(_K, "sp(n,C)", "sp(n-j,j)", "sp(n-j,C)+sp(j,C)", "C", "n", "2", "n>=3, 1<=j<=[n/2]"),
    _row(_K, "so(2n,C)", "so(2(n-j),2j)", "so(2(n-j),C)+so(2j,C)", "D", "n", "2", "n>=4, 2<=j<=[n/2]"),
    _row(_K, "(e6)_C", "e6(2)", "sl(6,C)+sl(2,C)", "E", "6", "2"),
    _row(_K, "(e7)_C", "e7(7)", "sl(8,C)", "E", "7", "2"),
    _row(_K, "(e7)_C", "e7(-5)", "so(12,C)+sl(2,C)", "E", "7", "2"),
    _row(_K, "(e8)_C", "e8(8)", "so(16,C)", "E", "8", "2"),
    _row(_K, "(e8)_C", "e8(-24)", "(e7)_C+sl(2,C)", "E", "8", "2"),
    _row(_K, "(f4)_C", "f4(4)", "sp(3,C)+sl(2,C)", "F", "4", "2"),
    _row(_K, "(f4)_C", "f4(-20)", "so(9,C)", "F", "4", "2"),
    _row(_K, "(g2)_C", "g2(2)", "sl(2,C)+sl(2,C)", "G", "2", "2"),
)


def k_epsilon_query(g_name: str | None = None, h_name: str | None = None, table: str | None = None,
                    sigma_family: str | None = None, m_value: str | None = None) -> list[KEpsilonEntry]:
    """Rows of the three stored tables matching every given field exactly."""
    if sigma_family is not None and sigma_family.upper() == "G2":
        sigma_family = "G"
    out = []
    for e in K_EPSILON_TABLES:
        if g_name is not None and e.g_name != g_name:
            continue
        if h_name is not None and e.h_name != h_name:
            continue
        if table is not None and e.table.lower() != table.lower():
            continue
        if sigma_family is not None and e.sigma_family != sigma_family.upper():
            continue
        if m_value is not None and e.m_value != str(m_value):
            continue
        out.append(e)
    return out


_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.FloorDiv: operator.floordiv}
_CMP = {ast.GtE: operator.ge, ast.LtE: operator.le, ast.Gt: operator.gt, ast.Lt: operator.lt,
        ast.Eq: operator.eq}


def _eval_node(node, params):
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return node.value
    if isinstance(node, ast.Name):
        if node.id not in params:
            raise ValueError(f"missing parameter {node.id!r}")
        return int(params[node.id])
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval_node(node.left, params), _eval_node(node.right, params))
    if isinstance(node, ast.Compare):
        left = _eval_node(node.left, params)
        for op, comp in zip(node.ops, node.comparators):
            right = _eval_node(comp, params)
            if not _CMP[type(op)](left, right):
                return False
            left = right
        return True
    raise ValueError(f"unsupported constraint syntax: {ast.dump(node)}")


def _prep(expr: str) -> str:
    # [x] is the integer part; juxtaposition like 2n means 2*n.
    import re
    s = expr.replace("[", "(").replace("]", ")").replace("/", "//")
    return re.sub(r"(\d)([a-z(])", r"\1*\2", s)


def _eval_expr(expr: str, params) -> int:
    return _eval_node(ast.parse(_prep(expr), mode="eval").body, params)


def _eval_constraints(cons: str, params) -> bool:
    if not cons.strip():
        return True
    return all(bool(_eval_expr(c.strip(), params)) for c in cons.split(","))
