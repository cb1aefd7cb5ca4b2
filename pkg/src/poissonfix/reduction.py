"""Induced Poisson structures on fixed-point sets.

The pipeline follows the splitting picture: given a structure P, a linear
subspace N and a complement E (orthogonal for an invariant metric), the
bivector is transported to an adapted frame, certified block-diagonal along
N, and the N-block becomes the induced structure. A second, independent
construction brackets projections-pullback extensions of N-functions and
restricts; the two must agree exactly, and any mismatch aborts rather than
being papered over.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import linalg
from .actions import (
    ActionSpec,
    FiniteActionSpec,
    InvariantMetric,
    LinearSubmanifold,
    NonPoissonActionError,
    average_function,
    average_metric,
    fixed_subspace,
    is_poisson_action,
    orthogonal_complement,
)
from .expr import ChartMismatchError, ExprError, Polynomial, RationalFunction, substitute
from .poisson import (
    Chart,
    CovectorExpr,
    PoissonStructure,
    bracket,
    pushforward_linear,
    sharp,
)

__all__ = [
    "SplitContext",
    "ReductionReport",
    "ReduceOptions",
    "TangencyCertificate",
    "Eq1Certificate",
    "BivectorSplit",
    "ExtensionCertificate",
    "ConstructionMismatchError",
    "SplitInvalidError",
    "make_split_context",
    "check_eq1",
    "check_sharp_E0",
    "split_bivector",
    "induced_structure",
    "induced_bracket_via_extensions",
    "extension_independence_test",
    "reduce_fixed_set",
    "sample_points_on",
]


class ConstructionMismatchError(ExprError):
    """The split-based and extension-based brackets disagree: abort."""


class SplitInvalidError(ExprError):
    """The mixed block does not vanish on N; no induced structure exists."""


class SplitContext:
    """A structure, a subspace N, a complement E and the adapted frame.

    The adapted frame has the N basis as its first dim(N) columns and the
    E basis as the rest. Derived data (frame inverse, induced chart, the
    computed split and induced structure) are cached on the instance.
    """

    __slots__ = ("structure", "submanifold", "complement", "metric",
                 "adapted_frame", "frame_inverse", "induced_chart", "action",
                 "_split", "_induced")

    def __init__(self, structure: PoissonStructure, submanifold: LinearSubmanifold,
                 complement: LinearSubmanifold, metric: InvariantMetric,
                 action: Optional[ActionSpec] = None):
        chart = structure.chart
        for obj in (submanifold, complement, metric):
            if obj.chart != chart:
                raise ChartMismatchError("split context parts live on different charts")
        cols = submanifold.basis + complement.basis
        if len(cols) != chart.dimension:
            raise ValueError("N and E sizes do not add up to the chart dimension")
        frame = linalg.from_columns(cols)
        inverse = linalg.mat_inv(frame)  # raises if N + E fail to span
        self.structure = structure
        self.submanifold = submanifold
        self.complement = complement
        self.metric = metric
        self.adapted_frame = frame
        self.frame_inverse = inverse
        self.induced_chart = _induced_chart_for(chart, submanifold)
        self.action = action
        self._split = None
        self._induced = None

    @property
    def dim_n(self) -> int:
        return self.submanifold.dim


def make_split_context(P: PoissonStructure, N: LinearSubmanifold,
                       E: LinearSubmanifold, metric: InvariantMetric,
                       action: Optional[ActionSpec] = None) -> SplitContext:
    return SplitContext(P, N, E, metric, action)


def _induced_chart_for(chart: Chart, N: LinearSubmanifold) -> Optional[Chart]:
    if N.dim == 0:
        return None
    names = []
    for v in N.basis:
        support = [i for i, x in enumerate(v) if x != 0]
        if len(support) == 1 and v[support[0]] == 1:
            names.append(chart.variables[support[0]].name)
        else:
            names = None
            break
    if names is None or len(set(names)) != len(names):
        names = [f"n{i + 1}" for i in range(N.dim)]
    return Chart.from_names(names)


def sample_points_on(N: LinearSubmanifold, count: int, seed: int,
                     P: Optional[PoissonStructure] = None) -> list[tuple[Fraction, ...]]:
    """Seeded random rational points on N, avoiding poles of P if given."""
    rng = random.Random(seed)
    B = N.basis_matrix()
    points = []
    attempts = 0
    while len(points) < count:
        attempts += 1
        if attempts > 50 * count:
            raise ExprError("could not sample enough pole-free points on N")
        y = tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(N.dim))
        x = linalg.mat_vec(B, y) if N.dim else tuple(Fraction(0) for _ in range(N.chart.dimension))
        if P is not None:
            n = P.chart.dimension
            if any(P.pi[i][j].denominator.evaluate(x) == 0
                   for i in range(n) for j in range(i + 1, n)):
                continue
        points.append(x)
    return points


def check_eq1(P: PoissonStructure, N: LinearSubmanifold,
              points: Sequence[Sequence[Fraction]]) -> list[int]:
    """dim(TN intersect #(TN0)) at each point; 0 means the condition holds."""
    if N.chart != P.chart:
        raise ChartMismatchError("submanifold chart differs from the structure chart")
    n = P.chart.dimension
    dims = []
    for point in points:
        point = tuple(Fraction(x) for x in point)
        if not N.contains_point(point):
            raise ValueError(f"point {point} does not lie on N")
        pi_at = tuple(
            tuple(P.pi[i][j].evaluate(point) for j in range(n)) for i in range(n)
        )
        image = []
        for xi in N.equations:
            w = linalg.mat_vec(pi_at, xi)
            if any(w):
                image.append(w)
        if not image:
            dims.append(0)
            continue
        rank_w = linalg.rank(tuple(image))
        rank_b = len(N.basis)
        rank_union = linalg.rank(tuple(image) + tuple(N.basis))
        dims.append(rank_w + rank_b - rank_union)
    return dims


@dataclass(frozen=True)
class TangencyCertificate:
    """Per-covector result of the symbolic #(E0) in TN check."""

    results: tuple  # (covector entries, passed, residual texts)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.results)

    def failing(self):
        return [(xi, res) for xi, ok, res in self.results if not ok]


def _restriction_bindings(ctx: SplitContext) -> dict:
    """Ambient variable -> linear form in the induced chart (x = B_N u)."""
    chart = ctx.structure.chart
    ind = ctx.induced_chart
    B = ctx.submanifold.basis_matrix()
    bindings = {}
    for m, v in enumerate(chart.variables):
        terms = {}
        for k in range(ctx.dim_n):
            coef = B[m][k]
            if coef:
                e = [0] * ind.dimension
                e[k] = 1
                terms[tuple(e)] = coef
        bindings[v] = RationalFunction.from_polynomial(Polynomial(ind.variables, terms))
    return bindings


def check_sharp_E0(P: PoissonStructure, ctx: SplitContext) -> TangencyCertificate:
    """For each constant covector spanning E0, verify #xi is tangent to N on N.

    E0 is spanned by the first dim(N) rows of the adapted frame inverse; the
    E-components of #xi, restricted to N, must vanish identically.
    """
    if ctx.structure != P:
        raise ChartMismatchError("context was built for a different structure")
    chart = P.chart
    n = chart.dimension
    k = ctx.dim_n
    restrict = _restriction_bindings(ctx) if k else None
    results = []
    for a in range(k):
        xi_row = ctx.frame_inverse[a]
        xi = CovectorExpr.from_constants(chart, xi_row)
        v = sharp(P, xi)
        # frame components of the field: c = F^{-1} v
        residuals = []
        ok = True
        for b in range(k, n):
            parts = []
            for m in range(n):
                coef = ctx.frame_inverse[b][m]
                if coef and not v.components[m].is_zero:
                    parts.append(v.components[m] * coef)
            comp = sum(parts[1:], parts[0]) if parts else chart.zero()
            if comp.is_zero:
                continue
            restricted = substitute(comp, restrict)
            if not restricted.is_zero:
                ok = False
                residuals.append(f"E-component {b}: {restricted}")
        results.append((tuple(xi_row), ok, tuple(residuals)))
    return TangencyCertificate(tuple(results))


@dataclass(frozen=True)
class BivectorSplit:
    """Blocks of the bivector in the adapted frame, restricted to N."""

    pi_n: tuple          # dim(N) x dim(N), over the induced chart
    pi_e: tuple          # dim(E) x dim(E), over the induced chart
    pi_mixed: tuple      # dim(N) x dim(E), over the induced chart

    @property
    def mixed_vanishes(self) -> bool:
        return all(entry.is_zero for row in self.pi_mixed for entry in row)


def split_bivector(P: PoissonStructure, ctx: SplitContext) -> BivectorSplit:
    """Transport pi to the adapted frame, restrict to N, partition in blocks.

    Independent of the extension construction: this is a pure congruence
    by the frame followed by setting the E-coordinates to zero.
    """
    if ctx.structure != P:
        raise ChartMismatchError("context was built for a different structure")
    if ctx._split is not None:
        return ctx._split
    chart = P.chart
    n = chart.dimension
    k = ctx.dim_n
    adapted = pushforward_linear(P, ctx.frame_inverse)
    # in adapted coordinates u = F^{-1} x, N is {u_i = 0 : i >= k};
    # restrict by substituting the E-coordinates to zero and renaming the
    # N-coordinates into the induced chart
    ind = ctx.induced_chart
    bindings = {}
    for i, v in enumerate(chart.variables):
        if i < k:
            bindings[v] = RationalFunction.variable(ind.variables, ind.variables[i])
        else:
            bindings[v] = RationalFunction.constant(ind.variables, 0)

    def restricted(i: int, j: int) -> RationalFunction:
        entry = adapted.pi[i][j]
        if entry.is_zero:
            return RationalFunction.constant(ind.variables, 0)
        return substitute(entry, bindings)

    pi_n = tuple(tuple(restricted(i, j) for j in range(k)) for i in range(k))
    pi_e = tuple(tuple(restricted(i, j) for j in range(k, n)) for i in range(k, n))
    pi_mixed = tuple(tuple(restricted(i, j) for j in range(k, n)) for i in range(k))
    split = BivectorSplit(pi_n, pi_e, pi_mixed)
    ctx._split = split
    return split


def induced_structure(ctx: SplitContext) -> PoissonStructure:
    """The N-block as a verified PoissonStructure over the induced chart."""
    if ctx._induced is not None:
        return ctx._induced
    if ctx.induced_chart is None:
        raise ExprError("fixed subspace is zero-dimensional; no chart to induce")
    split = split_bivector(ctx.structure, ctx)
    if not split.mixed_vanishes:
        raise SplitInvalidError("mixed block does not vanish on N")
    induced = PoissonStructure(ctx.induced_chart, split.pi_n).verify()
    ctx._induced = induced
    return induced


def _extension_bindings(ctx: SplitContext) -> dict:
    """Induced variable -> linear form giving the metric projection onto N."""
    chart = ctx.structure.chart
    n = chart.dimension
    B = ctx.submanifold.basis_matrix()
    M = ctx.metric.matrix
    bt_m = linalg.mat_mul(tuple(ctx.submanifold.basis), M)       # k x n
    gram = linalg.mat_mul(bt_m, B)                               # k x k
    proj = linalg.mat_mul(linalg.mat_inv(gram), bt_m)            # k x n
    bindings = {}
    for a, u in enumerate(ctx.induced_chart.variables):
        terms = {}
        for m in range(n):
            coef = proj[a][m]
            if coef:
                e = [0] * n
                e[m] = 1
                terms[tuple(e)] = coef
        bindings[u] = RationalFunction.from_polynomial(Polynomial(chart.variables, terms))
    return bindings


def extend_to_chart(ctx: SplitContext, f: RationalFunction) -> RationalFunction:
    """Canonical extension of an N-function: pull back along the projection."""
    if f.variables != ctx.induced_chart.variables:
        raise ChartMismatchError("function does not live on the induced chart")
    return substitute(f, _extension_bindings(ctx))


def restrict_to_n(ctx: SplitContext, h: RationalFunction) -> RationalFunction:
    """Restrict an ambient function to N, in induced-chart coordinates."""
    if h.variables != ctx.structure.chart.variables:
        raise ChartMismatchError("function does not live on the ambient chart")
    return substitute(h, _restriction_bindings(ctx))


def induced_bracket_via_extensions(ctx: SplitContext, f: RationalFunction,
                                   g: RationalFunction) -> RationalFunction:
    """Bracket N-functions by extending, bracketing upstairs and restricting.

    The result is compared exactly against the split-based induced bracket;
    a mismatch aborts, since it would mean the two constructions encode
    different conventions.
    """
    f_ext = extend_to_chart(ctx, f)
    g_ext = extend_to_chart(ctx, g)
    ambient = bracket(ctx.structure, f_ext, g_ext)
    via_ext = restrict_to_n(ctx, ambient)
    via_split = bracket(induced_structure(ctx), f, g)
    if via_ext != via_split:
        raise ConstructionMismatchError(
            "extension bracket and split bracket disagree: "
            f"extension gives {via_ext}, split gives {via_split}"
        )
    return via_ext


@dataclass(frozen=True)
class ExtensionCertificate:
    """Result of randomized perturbed-extension trials."""

    trials: int
    failures: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.failures


def _random_polynomial(rng: random.Random, chart: Chart, max_terms: int = 3,
                       max_degree: int = 2) -> Polynomial:
    n = chart.dimension
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        e = [0] * n
        for _ in range(rng.randint(0, max_degree)):
            e[rng.randrange(n)] += 1
        c = Fraction(rng.randint(1, 4) * rng.choice((-1, 1)), rng.randint(1, 3))
        terms[tuple(e)] = terms.get(tuple(e), Fraction(0)) + c
    return Polynomial(chart.variables, terms)


def _invariant_vanishing_perturbation(ctx: SplitContext, rng: random.Random) -> RationalFunction:
    """A G-invariant polynomial vanishing on N: averaged (random poly) * (equation)."""
    chart = ctx.structure.chart
    eqs = ctx.submanifold.equations
    if not eqs:
        # N is the whole chart; only the zero function vanishes on it
        return RationalFunction.constant(chart.variables, 0)
    for _ in range(8):
        eq = eqs[rng.randrange(len(eqs))]
        lin = Polynomial(chart.variables, {
            tuple(1 if m == i else 0 for m in range(chart.dimension)): c
            for i, c in enumerate(eq) if c
        })
        h = _random_polynomial(rng, chart)
        cand = average_function(ctx.action, RationalFunction.from_polynomial(h * lin))
        if not cand.is_zero:
            return cand
    return RationalFunction.constant(chart.variables, 0)


def extension_independence_test(ctx: SplitContext, f: RationalFunction,
                                g: RationalFunction, trials: int,
                                rng_seed: int) -> ExtensionCertificate:
    """Perturb the canonical extensions by invariant functions vanishing on N.

    Every perturbed bracket, restricted to N, must equal the canonical one
    exactly; any counterexample is reported, never tolerated.
    """
    if ctx.action is None:
        raise ExprError("extension independence trials need the group action")
    rng = random.Random(rng_seed)
    f_ext = extend_to_chart(ctx, f)
    g_ext = extend_to_chart(ctx, g)
    canonical = restrict_to_n(ctx, bracket(ctx.structure, f_ext, g_ext))
    failures = []
    for t in range(trials):
        rho_f = _invariant_vanishing_perturbation(ctx, rng)
        rho_g = _invariant_vanishing_perturbation(ctx, rng)
        perturbed = bracket(ctx.structure, f_ext + rho_f, g_ext + rho_g)
        got = restrict_to_n(ctx, perturbed)
        if got != canonical:
            failures.append((t, f"expected {canonical}, got {got}"))
    return ExtensionCertificate(trials, tuple(failures))


@dataclass(frozen=True)
class Eq1Certificate:
    """Sampled intersection dimensions for the pointwise kernel condition."""

    points_checked: int
    dimensions: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return all(d == 0 for d in self.dimensions)


@dataclass(frozen=True)
class JacobiCertificate:
    triples_checked: int
    passed: bool


@dataclass(frozen=True)
class ReduceOptions:
    seed: int = 0
    points: int = 100
    trials: int = 20


@dataclass(frozen=True)
class ReductionReport:
    """Everything the fixed-set pipeline certifies, plus the induced structure.

    ``induced`` is None only when the tangency certificate failed, which
    cannot happen for a certified Poisson action; such a report never passes.
    """

    induced: Optional[PoissonStructure]
    context: SplitContext
    action_certificate: object
    eq1_certificate: Eq1Certificate
    sharp_e0_certificate: TangencyCertificate
    jacobi_certificate: JacobiCertificate
    extension_certificate: ExtensionCertificate
    pairs_matched: int

    @property
    def passed(self) -> bool:
        return (self.induced is not None
                and self.action_certificate.passed
                and self.eq1_certificate.passed
                and self.sharp_e0_certificate.passed
                and self.jacobi_certificate.passed
                and self.extension_certificate.passed)


def reduce_fixed_set(P: PoissonStructure, action: ActionSpec,
                     options: ReduceOptions = ReduceOptions()) -> ReductionReport:
    """Full fixed-point reduction: certify the action, split, induce, verify.

    Raises NonPoissonActionError if the action fails certification (the
    hypothesis of the whole construction); tangency or Jacobi failures are
    reported in the returned certificates rather than raised, since for a
    certified Poisson action they cannot occur unless the input is wrong.
    """
    action_cert = is_poisson_action(P, action)
    if not action_cert.passed:
        raise NonPoissonActionError(action_cert)
    if isinstance(action, FiniteActionSpec):
        metric = average_metric(action)
    else:
        # phases act by rotations in each underlying real coordinate plane,
        # so the flat metric is invariant and its complement of a pair-aligned
        # subspace is the complementary coordinate span
        metric = InvariantMetric.euclidean(action.chart)
    N = fixed_subspace(action)
    if N.dim == 0:
        raise ExprError("fixed subspace is zero-dimensional; no chart to induce")
    E = orthogonal_complement(N, metric)
    ctx = SplitContext(P, N, E, metric, action=action)
    tangency = check_sharp_E0(P, ctx)
    split = split_bivector(P, ctx)
    if not tangency.passed or not split.mixed_vanishes:
        # impossible for a certified Poisson action; report rather than mask
        return ReductionReport(
            induced=None,
            context=ctx,
            action_certificate=action_cert,
            eq1_certificate=Eq1Certificate(0, ()),
            sharp_e0_certificate=tangency,
            jacobi_certificate=JacobiCertificate(0, False),
            extension_certificate=ExtensionCertificate(0),
            pairs_matched=0,
        )
    induced = induced_structure(ctx)
    jac = JacobiCertificate(
        triples_checked=len(list(itertools.combinations(range(induced.chart.dimension), 3))),
        passed=induced.verified,
    )
    points = sample_points_on(N, options.points, options.seed, P)
    eq1 = Eq1Certificate(len(points), tuple(check_eq1(P, N, points)))
    rng = random.Random(options.seed + 1)
    failures = []
    pairs = 0
    for t in range(options.trials):
        f = RationalFunction.from_polynomial(_random_polynomial(rng, induced.chart))
        g = RationalFunction.from_polynomial(_random_polynomial(rng, induced.chart))
        induced_bracket_via_extensions(ctx, f, g)  # raises on mismatch
        pairs += 1
        cert = extension_independence_test(ctx, f, g, trials=1,
                                           rng_seed=options.seed + 100 + t)
        failures.extend(cert.failures)
    ext_cert = ExtensionCertificate(options.trials, tuple(failures))
    return ReductionReport(
        induced=induced,
        context=ctx,
        action_certificate=action_cert,
        eq1_certificate=eq1,
        sharp_e0_certificate=tangency,
        jacobi_certificate=jac,
        extension_certificate=ext_cert,
        pairs_matched=pairs,
    )
