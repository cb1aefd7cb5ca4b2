"""Poisson structures on coordinate charts.

A structure is a skew matrix of rational functions pi[i][j] over a chart;
the bracket convention, fixed once for the whole package, is

    {f, g} = sum_{i,j} pi[i][j] * df/dx_i * dg/dx_j
    (#xi)^i = sum_j pi[i][j] * xi_j

so that pi[q][p] = +1 gives the canonical {q, p} = 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg
from .expr import (
    ChartMismatchError,
    ExprError,
    Polynomial,
    RationalFunction,
    Variable,
    _raw_sum,
    make_variables,
    parse_expr,
    substitute,
)

__all__ = [
    "Chart",
    "PoissonStructure",
    "VectorFieldExpr",
    "CovectorExpr",
    "NonSkewError",
    "JacobiError",
    "bracket",
    "sharp",
    "hamiltonian_vf",
    "jacobi_defect",
    "jacobi_triples",
    "pushforward_linear",
    "rank_at",
]


class NonSkewError(ExprError):
    """The bivector matrix is not exactly skew-symmetric."""


class JacobiError(ExprError):
    """Jacobi verification failed; carries the witness triples."""

    def __init__(self, witnesses):
        self.witnesses = tuple(witnesses)
        triples = ", ".join(f"({i},{j},{k})" for i, j, k, _ in self.witnesses)
        super().__init__(f"Jacobi identity fails on triples {triples}")


@dataclass(frozen=True)
class Chart:
    """An ordered tuple of coordinate variables."""

    variables: tuple[Variable, ...]

    def __post_init__(self):
        if len(self.variables) < 1:
            raise ValueError("chart must have at least one variable")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names in chart")
        for i, v in enumerate(self.variables):
            if v.index != i:
                raise ValueError("variable indices must match chart positions")

    @classmethod
    def from_names(cls, names: Sequence[str]) -> "Chart":
        return cls(make_variables(names))

    @property
    def dimension(self) -> int:
        return len(self.variables)

    def var(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(f"no variable named {name!r}")

    def zero(self) -> RationalFunction:
        return RationalFunction.constant(self.variables, 0)

    def function(self, text: str) -> RationalFunction:
        return parse_expr(text, self.variables)

    def coordinate(self, name: str) -> RationalFunction:
        return RationalFunction.variable(self.variables, self.var(name))


@dataclass(frozen=True)
class VectorFieldExpr:
    """A vector field, one rational-function component per chart variable."""

    chart: Chart
    components: tuple[RationalFunction, ...]

    def __post_init__(self):
        if len(self.components) != self.chart.dimension:
            raise ValueError("component count must equal the chart dimension")

    def apply_to(self, g: RationalFunction) -> RationalFunction:
        """Directional derivative X(g) = sum_i X^i dg/dx_i."""
        parts = []
        for v, comp in zip(self.chart.variables, self.components):
            if comp.is_zero:
                continue
            prod = comp * g.diff(v)
            parts.append((prod.numerator, prod.denominator))
        if not parts:
            return self.chart.zero()
        return _raw_sum(self.chart.variables, parts)

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.components)


@dataclass(frozen=True)
class CovectorExpr:
    """A covector field, one rational-function component per chart variable."""

    chart: Chart
    components: tuple[RationalFunction, ...]

    def __post_init__(self):
        if len(self.components) != self.chart.dimension:
            raise ValueError("component count must equal the chart dimension")

    @classmethod
    def from_constants(cls, chart: Chart, entries: Sequence) -> "CovectorExpr":
        return cls(chart, tuple(
            RationalFunction.constant(chart.variables, Fraction(x)) for x in entries
        ))


class PoissonStructure:
    """A chart plus an exactly skew matrix of rational functions.

    The ``verified`` flag is set only by ``verify()`` after the Jacobi
    defect has been checked symbolically; constructors never assume it.
    """

    __slots__ = ("chart", "pi", "verified")

    def __init__(self, chart: Chart, pi: Sequence[Sequence[RationalFunction]],
                 verified: bool = False):
        n = chart.dimension
        pi = tuple(tuple(row) for row in pi)
        if len(pi) != n or any(len(row) != n for row in pi):
            raise ValueError("bivector matrix shape must match the chart dimension")
        for i in range(n):
            for j in range(n):
                entry = pi[i][j]
                if entry.variables != chart.variables:
                    raise ChartMismatchError("bivector entry over the wrong chart")
                if i == j and not entry.is_zero:
                    raise NonSkewError(f"diagonal entry ({i},{i}) is nonzero")
        for i in range(n):
            for j in range(i + 1, n):
                if pi[i][j] != -pi[j][i]:
                    raise NonSkewError(f"entries ({i},{j}) and ({j},{i}) are not opposite")
        self.chart = chart
        self.pi = pi
        self.verified = verified

    @classmethod
    def from_table(cls, chart: Chart, entries: dict, verified: bool = False) -> "PoissonStructure":
        """Build from a sparse {(i, j): RationalFunction} table with i < j."""
        n = chart.dimension
        zero = chart.zero()
        pi = [[zero for _ in range(n)] for _ in range(n)]
        for (i, j), val in entries.items():
            if not (0 <= i < j < n):
                raise ValueError(f"table keys must satisfy 0 <= i < j < dim, got ({i},{j})")
            if isinstance(val, str):
                val = chart.function(val)
            pi[i][j] = val
            pi[j][i] = -val
        return cls(chart, pi, verified=verified)

    def entry(self, i: int, j: int) -> RationalFunction:
        return self.pi[i][j]

    def verify(self) -> "PoissonStructure":
        """Return a verified copy; raise JacobiError with witnesses otherwise."""
        defects = jacobi_defect(self)
        witnesses = [
            (i, j, k, d)
            for (i, j, k), d in zip(jacobi_triples(self), defects)
            if not d.is_zero
        ]
        if witnesses:
            raise JacobiError(witnesses)
        out = PoissonStructure(self.chart, self.pi, verified=True)
        return out

    def __eq__(self, other):
        if not isinstance(other, PoissonStructure):
            return NotImplemented
        return self.chart == other.chart and self.pi == other.pi

    def __repr__(self):
        names = ",".join(v.name for v in self.chart.variables)
        return f"PoissonStructure(dim={self.chart.dimension}, chart=({names}))"


def _check_function(P: PoissonStructure, f: RationalFunction) -> None:
    if f.variables != P.chart.variables:
        raise ChartMismatchError("function does not live on the structure's chart")


def bracket(P: PoissonStructure, f: RationalFunction, g: RationalFunction) -> RationalFunction:
    """{f, g} = sum_{i<j} pi[i][j] (d_i f d_j g - d_j f d_i g)."""
    _check_function(P, f)
    _check_function(P, g)
    vs = P.chart.variables
    n = P.chart.dimension
    df = [None] * n
    dg = [None] * n
    parts = []
    for i in range(n):
        for j in range(i + 1, n):
            pij = P.pi[i][j]
            if pij.is_zero:
                continue
            if df[i] is None:
                df[i] = f.diff(vs[i])
            if df[j] is None:
                df[j] = f.diff(vs[j])
            if dg[i] is None:
                dg[i] = g.diff(vs[i])
            if dg[j] is None:
                dg[j] = g.diff(vs[j])
            term = df[i] * dg[j] - df[j] * dg[i]
            if term.is_zero:
                continue
            prod = pij * term
            parts.append((prod.numerator, prod.denominator))
    if not parts:
        return P.chart.zero()
    return _raw_sum(vs, parts)


def sharp(P: PoissonStructure, xi: CovectorExpr) -> VectorFieldExpr:
    """(#xi)^i = sum_j pi[i][j] xi_j."""
    if xi.chart != P.chart:
        raise ChartMismatchError("covector does not live on the structure's chart")
    vs = P.chart.variables
    comps = []
    for i in range(P.chart.dimension):
        parts = []
        for j, xj in enumerate(xi.components):
            pij = P.pi[i][j]
            if pij.is_zero or xj.is_zero:
                continue
            prod = pij * xj
            parts.append((prod.numerator, prod.denominator))
        comps.append(_raw_sum(vs, parts) if parts else P.chart.zero())
    return VectorFieldExpr(P.chart, tuple(comps))


def hamiltonian_vf(P: PoissonStructure, f: RationalFunction) -> VectorFieldExpr:
    """X_f = #(df), so that X_f(g) = {f, g}."""
    _check_function(P, f)
    df = CovectorExpr(P.chart, tuple(f.diff(v) for v in P.chart.variables))
    return sharp(P, df)


def jacobi_triples(P: PoissonStructure):
    """The i<j<k index triples, in the order jacobi_defect reports them."""
    return list(itertools.combinations(range(P.chart.dimension), 3))


def jacobi_defect(P: PoissonStructure) -> list[RationalFunction]:
    """Cyclic Jacobi sums, one per triple i<j<k.

    Entry for (i, j, k) is sum_l (pi[i][l] d_l pi[j][k] + pi[j][l] d_l pi[k][i]
    + pi[k][l] d_l pi[i][j]); the structure is Poisson iff all are zero.
    """
    vs = P.chart.variables
    n = P.chart.dimension
    # derivatives of upper-triangle entries, computed once
    dcache: dict = {}

    def dpi(l: int, a: int, b: int) -> RationalFunction:
        key = (l, a, b)
        if key not in dcache:
            dcache[key] = P.pi[a][b].diff(vs[l])
        return dcache[key]

    out = []
    for i, j, k in itertools.combinations(range(n), 3):
        parts = []
        for l in range(n):
            for (a, b, c) in ((i, j, k), (j, k, i), (k, i, j)):
                pal = P.pi[a][l]
                if pal.is_zero:
                    continue
                d = dpi(l, b, c)
                if d.is_zero:
                    continue
                prod = pal * d
                parts.append((prod.numerator, prod.denominator))
        out.append(_raw_sum(vs, parts) if parts else P.chart.zero())
    return out


def pushforward_linear(P: PoissonStructure, T: linalg.Matrix) -> PoissonStructure:
    """Pushforward of P by the linear map x -> T x, on the same chart.

    pi'[a][b](y) = sum_{i,j} T[a][i] T[b][j] pi[i][j](T^{-1} y).
    """
    n = P.chart.dimension
    T = linalg.as_matrix(T)
    if len(T) != n or any(len(row) != n for row in T):
        raise ValueError("matrix dimension must match the chart")
    Tinv = linalg.mat_inv(T)  # raises SingularMatrixError
    vs = P.chart.variables
    # bindings x_k -> sum_m Tinv[k][m] x_m
    bindings = {}
    for k, v in enumerate(vs):
        terms = {}
        for m, coef in enumerate(Tinv[k]):
            if coef:
                e = [0] * n
                e[m] = 1
                terms[tuple(e)] = coef
        bindings[v] = RationalFunction.from_polynomial(Polynomial(vs, terms))
    composed: dict = {}

    def comp(i: int, j: int) -> RationalFunction:
        if (i, j) not in composed:
            entry = P.pi[i][j]
            composed[(i, j)] = entry if entry.is_zero else substitute(entry, bindings)
        return composed[(i, j)]

    zero = P.chart.zero()
    new_pi = [[zero for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            parts = []
            for i in range(n):
                if T[a][i] == 0:
                    continue
                for j in range(n):
                    if i == j or T[b][j] == 0 or P.pi[i][j].is_zero:
                        continue
                    prod = comp(i, j) * (T[a][i] * T[b][j])
                    parts.append((prod.numerator, prod.denominator))
            val = _raw_sum(vs, parts) if parts else zero
            new_pi[a][b] = val
            new_pi[b][a] = -val
    return PoissonStructure(P.chart, new_pi)


def rank_at(P: PoissonStructure, point: Sequence[Fraction]) -> int:
    """Rank of the evaluated bivector matrix; always even for skew matrices."""
    point = [Fraction(x) for x in point]
    n = P.chart.dimension
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            row.append(P.pi[i][j].evaluate(point))  # PoleError propagates
        rows.append(tuple(row))
    r = linalg.rank(tuple(rows))
    if r % 2:
        raise ExprError("internal error: skew matrix with odd rank")
    return r
