"""Linear symmetry actions on charts and their fixed-point machinery.

Finite groups are given by generator matrices and enumerated by closure;
torus actions are given by integer weights on conjugate coordinate pairs
and checked symbolically through weight homogeneity, which is exact and
equivalent to invariance under every phase.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from . import linalg
from .expr import ChartMismatchError, ExprError, Polynomial, RationalFunction, substitute
from .poisson import Chart, PoissonStructure, pushforward_linear

__all__ = [
    "FiniteActionSpec",
    "TorusActionSpec",
    "InvariantMetric",
    "LinearSubmanifold",
    "ActionCheckReport",
    "ClosureError",
    "NonPoissonActionError",
    "enumerate_group",
    "is_poisson_action",
    "fixed_subspace",
    "average_metric",
    "orthogonal_complement",
    "average_function",
    "ActionSpec",
]


class ClosureError(ExprError):
    """Group closure was not reached within the declared bound."""


class NonPoissonActionError(ExprError):
    """An operation requiring a Poisson action got a non-Poisson one."""

    def __init__(self, report: "ActionCheckReport"):
        self.report = report
        super().__init__(f"action is not Poisson: {report.witness_text()}")


@dataclass(frozen=True)
class FiniteActionSpec:
    """A finite linear action: chart plus invertible generator matrices."""

    chart: Chart
    generators: tuple[linalg.Matrix, ...]
    max_order: int = 256

    def __post_init__(self):
        n = self.chart.dimension
        gens = tuple(linalg.as_matrix(g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        for g in gens:
            if len(g) != n or any(len(row) != n for row in g):
                raise ValueError("generator dimension must match the chart")
            if linalg.det(g) == 0:
                raise ValueError("generator matrix is singular")
        if self.max_order < 1:
            raise ValueError("max_order must be positive")


@dataclass(frozen=True)
class TorusActionSpec:
    """A torus action by phases on conjugate coordinate pairs.

    complex_pairs[k] = (i, j) marks chart variables i (a z-coordinate) and
    j (its conjugate); weights[f][k] is the integer weight of pair k under
    torus factor f. An unpaired variable is fixed by the action.
    """

    chart: Chart
    complex_pairs: tuple[tuple[int, int], ...]
    weights: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = self.chart.dimension
        pairs = tuple((int(i), int(j)) for i, j in self.complex_pairs)
        object.__setattr__(self, "complex_pairs", pairs)
        seen = set()
        for i, j in pairs:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ValueError("pair indices out of range")
            if i in seen or j in seen:
                raise ValueError("a chart variable belongs to more than one pair")
            seen.update((i, j))
        wt = tuple(tuple(int(w) for w in row) for row in self.weights)
        object.__setattr__(self, "weights", wt)
        for row in wt:
            if len(row) != len(pairs):
                raise ValueError("each weight row needs one entry per pair")

    def variable_weights(self) -> tuple[tuple[int, ...], ...]:
        """Per-factor weight of each chart variable (conjugates negated)."""
        out = []
        for row in self.weights:
            w = [0] * self.chart.dimension
            for (i, j), wk in zip(self.complex_pairs, row):
                w[i] = wk
                w[j] = -wk
            out.append(tuple(w))
        return tuple(out)


ActionSpec = Union[FiniteActionSpec, TorusActionSpec]


@dataclass(frozen=True)
class InvariantMetric:
    """A symmetric positive-definite chart metric, invariant for its action."""

    chart: Chart
    matrix: linalg.Matrix

    def __post_init__(self):
        m = linalg.as_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        if len(m) != self.chart.dimension:
            raise ValueError("metric dimension must match the chart")
        if not linalg.is_symmetric(m):
            raise ValueError("metric must be symmetric")
        if not linalg.is_positive_definite(m):
            raise ValueError("metric must be positive-definite")

    @classmethod
    def euclidean(cls, chart: Chart) -> "InvariantMetric":
        return cls(chart, linalg.identity(chart.dimension))


@dataclass(frozen=True)
class LinearSubmanifold:
    """A linear subspace: spanning basis plus annihilating equations."""

    chart: Chart
    basis: tuple[linalg.Vector, ...]
    equations: tuple[linalg.Vector, ...]

    def __post_init__(self):
        n = self.chart.dimension
        basis = tuple(linalg.as_vector(v) for v in self.basis)
        eqs = tuple(linalg.as_vector(v) for v in self.equations)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "equations", eqs)
        for v in basis + eqs:
            if len(v) != n:
                raise ValueError("vector length must match the chart dimension")
        if basis and linalg.rank(basis) != len(basis):
            raise ValueError("basis vectors are dependent")
        if eqs and linalg.rank(eqs) != len(eqs):
            raise ValueError("equation covectors are dependent")
        if len(basis) + len(eqs) != n:
            raise ValueError("dim(basis) + #equations must equal the chart dimension")
        for eq in eqs:
            for v in basis:
                if sum(a * b for a, b in zip(eq, v)) != 0:
                    raise ValueError("an equation does not vanish on the basis")

    @classmethod
    def from_basis(cls, chart: Chart, basis: Sequence[Sequence]) -> "LinearSubmanifold":
        basis = tuple(linalg.as_vector(v) for v in basis)
        eqs = linalg.nullspace(basis) if basis else tuple(
            tuple(Fraction(1 if i == j else 0) for j in range(chart.dimension))
            for i in range(chart.dimension)
        )
        return cls(chart, basis, eqs)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains_point(self, point: Sequence[Fraction]) -> bool:
        point = [Fraction(x) for x in point]
        return all(sum(a * b for a, b in zip(eq, point)) == 0 for eq in self.equations)

    def basis_matrix(self) -> linalg.Matrix:
        """Basis vectors as columns."""
        return linalg.from_columns(self.basis)


@dataclass(frozen=True)
class ActionCheckReport:
    """Outcome of a Poisson-action certification."""

    passed: bool
    kind: str  # "finite" or "torus"
    checked: int
    failures: tuple = ()

    def witness_text(self) -> str:
        if self.passed:
            return "no failures"
        return "; ".join(self.failures[:3])


def enumerate_group(spec: FiniteActionSpec) -> list[linalg.Matrix]:
    """All group elements, identity first, by closure under products.

    Raises ClosureError if more than max_order elements appear, which
    signals an infinite group (or a bound that is too small).
    """
    n = spec.chart.dimension
    ident = linalg.identity(n)
    elements = {ident}
    order = [ident]
    frontier = [ident]
    while frontier:
        new = []
        for m in frontier:
            for g in spec.generators:
                prod = linalg.mat_mul(m, g)
                if prod not in elements:
                    if len(elements) >= spec.max_order:
                        raise ClosureError(
                            f"group did not close within {spec.max_order} elements"
                        )
                    elements.add(prod)
                    order.append(prod)
                    new.append(prod)
        frontier = new
    return order


def is_poisson_action(P: PoissonStructure, action: ActionSpec) -> ActionCheckReport:
    """Certify that every element of the action preserves P exactly.

    Finite actions: pushforward by each enumerated element must reproduce
    pi entrywise. Torus actions: every entry pi[i][j] must be
    weight-homogeneous of total weight w_i + w_j for each torus factor.
    """
    if action.chart != P.chart:
        raise ChartMismatchError("action chart differs from the structure chart")
    if isinstance(action, FiniteActionSpec):
        failures = []
        elements = enumerate_group(action)
        for idx, g in enumerate(elements):
            moved = pushforward_linear(P, g)
            for i in range(P.chart.dimension):
                for j in range(i + 1, P.chart.dimension):
                    if moved.pi[i][j] != P.pi[i][j]:
                        failures.append(
                            f"element #{idx} changes pi[{i}][{j}]: "
                            f"{P.pi[i][j]} -> {moved.pi[i][j]}"
                        )
        return ActionCheckReport(not failures, "finite", len(elements), tuple(failures))
    # torus: exact weight-homogeneity of numerator and denominator
    failures = []
    var_weights = action.variable_weights()
    checked = 0
    for f_idx, w in enumerate(var_weights):
        for i in range(P.chart.dimension):
            for j in range(i + 1, P.chart.dimension):
                entry = P.pi[i][j]
                if entry.is_zero:
                    continue
                checked += 1
                target = w[i] + w[j]
                bad = _weight_defect(entry, w, target)
                if bad is not None:
                    failures.append(
                        f"factor {f_idx}: pi[{i}][{j}] has a monomial of weight "
                        f"{bad}, expected {target}"
                    )
    return ActionCheckReport(not failures, "torus", checked, tuple(failures))


def _poly_weights(p: Polynomial, w: Sequence[int]) -> set[int]:
    return {sum(k * wk for k, wk in zip(e, w)) for e in p.terms}


def _weight_defect(entry: RationalFunction, w: Sequence[int], target: int):
    """None if entry is weight-homogeneous of the target weight, else a witness."""
    den_w = _poly_weights(entry.denominator, w)
    num_w = _poly_weights(entry.numerator, w)
    if len(den_w) > 1:
        return f"{{{min(den_w)},{max(den_w)}}} (denominator inhomogeneous)"
    if len(num_w) > 1:
        return f"{{{min(num_w)},{max(num_w)}}} (numerator inhomogeneous)"
    got = num_w.pop() - den_w.pop()
    return None if got == target else got


def fixed_subspace(action: ActionSpec) -> LinearSubmanifold:
    """The joint eigenspace of eigenvalue 1: M^G for a linear action."""
    chart = action.chart
    n = chart.dimension
    if isinstance(action, FiniteActionSpec):
        rows = []
        for g in action.generators:
            for i in range(n):
                row = list(g[i])
                row[i] -= 1
                if any(row):
                    rows.append(tuple(Fraction(x) for x in row))
        if not rows:
            basis = tuple(linalg.identity(n))
        else:
            basis = linalg.nullspace(tuple(rows))
        return LinearSubmanifold.from_basis(chart, basis)
    # torus: unpaired variables plus pairs with all-zero weight columns
    fixed = set(range(n))
    for k, (i, j) in enumerate(action.complex_pairs):
        if any(row[k] != 0 for row in action.weights):
            fixed.discard(i)
            fixed.discard(j)
    basis = [
        tuple(Fraction(1 if m == i else 0) for m in range(n))
        for i in sorted(fixed)
    ]
    return LinearSubmanifold.from_basis(chart, basis)


def average_metric(spec: FiniteActionSpec, seed: linalg.Matrix | None = None) -> InvariantMetric:
    """Group-average a seed metric: (1/|G|) sum_g g^T S g, certified invariant."""
    n = spec.chart.dimension
    seed = linalg.identity(n) if seed is None else linalg.as_matrix(seed)
    if not linalg.is_symmetric(seed):
        raise ValueError("seed metric must be symmetric")
    if not linalg.is_positive_definite(seed):
        raise ValueError("seed metric must be positive-definite")
    elements = enumerate_group(spec)
    total = linalg.zeros(n, n)
    for g in elements:
        total = linalg.mat_add(total, linalg.mat_mul(linalg.transpose(g), linalg.mat_mul(seed, g)))
    avg = linalg.mat_scale(total, Fraction(1, len(elements)))
    for g in elements:
        if linalg.mat_mul(linalg.transpose(g), linalg.mat_mul(avg, g)) != avg:
            raise ExprError("internal error: averaged metric is not invariant")
    return InvariantMetric(spec.chart, avg)


def orthogonal_complement(N: LinearSubmanifold, metric: InvariantMetric) -> LinearSubmanifold:
    """E = the metric-orthogonal complement of N, with the direct sum certified."""
    if metric.chart != N.chart:
        raise ChartMismatchError("metric chart differs from the submanifold chart")
    n = N.chart.dimension
    if not N.basis:
        return LinearSubmanifold.from_basis(N.chart, tuple(linalg.identity(n)))
    bt = tuple(N.basis)  # rows = basis vectors
    btm = linalg.mat_mul(bt, metric.matrix)
    e_basis = linalg.nullspace(btm)
    stacked = tuple(N.basis) + tuple(e_basis)
    if linalg.rank(stacked) != n:
        raise ExprError("internal error: N + E do not span the chart")
    return LinearSubmanifold.from_basis(N.chart, e_basis)


def average_function(action: ActionSpec, f: RationalFunction) -> RationalFunction:
    """Group average of a polynomial function.

    Finite actions: (1/|G|) sum_g f(g x). Torus actions: the weight-zero
    part of f, which is exactly the average over all phases.
    """
    chart = action.chart
    if not f.is_polynomial:
        raise ExprError("group averaging is implemented for polynomials only")
    if isinstance(action, FiniteActionSpec):
        elements = enumerate_group(action)
        vs = chart.variables
        total = None
        for g in elements:
            bindings = {}
            for k, v in enumerate(vs):
                terms = {}
                for m, coef in enumerate(g[k]):
                    if coef:
                        e = [0] * len(vs)
                        e[m] = 1
                        terms[tuple(e)] = coef
                bindings[v] = RationalFunction.from_polynomial(Polynomial(vs, terms))
            moved = substitute(f, bindings)
            total = moved if total is None else total + moved
        return total * Fraction(1, len(elements))
    poly = f.as_polynomial()
    keep = dict(poly.terms)
    for w in action.variable_weights():
        keep = {e: c for e, c in keep.items()
                if sum(k * wk for k, wk in zip(e, w)) == 0}
    return RationalFunction.from_polynomial(Polynomial(chart.variables, keep))
