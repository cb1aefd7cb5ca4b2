"""The quadratic bracket on C^{n+1}, its torus moment map and the simplex.

Coordinates z_0..z_n and their formal conjugates zb_0..zb_n are independent
chart variables; the diagonal quadratic bracket {z_i, z_j} = a_ij z_i z_j
(all other pairs zero) descends through mu_i = z_i zb_i / sum_l z_l zb_l to
a polynomial bracket on the simplex coordinates mu_0..mu_n. Both the
derivation of that bracket and its face stratification are certified
symbolically with exact arithmetic.

Entries a_ij may be exact rationals or stay symbolic, in which case they are
adjoined to the chart as extra (inert) variables.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .expr import ExprError, Polynomial, RationalFunction, divides, substitute
from .poisson import Chart, PoissonStructure, bracket

__all__ = [
    "SkewParamMatrix",
    "FaceDescriptor",
    "SimplexDerivation",
    "StratificationCertificate",
    "DerivationMismatchError",
    "SYMBOLIC_N_LIMIT",
    "cpn_chart",
    "simplex_chart",
    "cpn_bracket",
    "torus_pairs",
    "standard_torus_weights",
    "moment_components",
    "derive_simplex_bracket",
    "simplex_bracket",
    "check_face_stratification",
    "enumerate_faces",
    "face_bracket_table",
    "random_skew",
]

# symbolic parameter runs grow fast with n; refuse above this by default
SYMBOLIC_N_LIMIT = 2


class DerivationMismatchError(ExprError):
    """The two bracket constructions disagree: abort, never average."""


class SkewParamMatrix:
    """A skew matrix of coefficients a_ij, rational or symbolic.

    Symbolic matrices carry no entries; the parameters a{i}{j} (i < j) are
    adjoined to the charts built for them.
    """

    __slots__ = ("n", "entries", "symbolic")

    def __init__(self, n: int, entries: Optional[Sequence[Sequence]] = None):
        if n < 1:
            raise ValueError("need n >= 1")
        self.n = n
        if entries is None:
            if n > 9:
                raise ValueError("symbolic parameter names need single-digit indices")
            self.symbolic = True
            self.entries = None
            return
        self.symbolic = False
        rows = tuple(tuple(Fraction(x) for x in row) for row in entries)
        if len(rows) != n + 1 or any(len(r) != n + 1 for r in rows):
            raise ValueError(f"matrix must be {n + 1}x{n + 1}")
        for i in range(n + 1):
            if rows[i][i] != 0:
                raise ValueError(f"diagonal entry a[{i}][{i}] must be zero")
            for j in range(i + 1, n + 1):
                if rows[i][j] != -rows[j][i]:
                    raise ValueError(f"entries a[{i}][{j}], a[{j}][{i}] are not opposite")
        self.entries = rows

    @classmethod
    def symbolic_matrix(cls, n: int) -> "SkewParamMatrix":
        return cls(n)

    @classmethod
    def from_upper(cls, n: int, upper: dict) -> "SkewParamMatrix":
        rows = [[Fraction(0)] * (n + 1) for _ in range(n + 1)]
        for (i, j), val in upper.items():
            rows[i][j] = Fraction(val)
            rows[j][i] = -rows[i][j]
        return cls(n, rows)

    def param_names(self) -> list[str]:
        return [f"a{i}{j}" for i, j in itertools.combinations(range(self.n + 1), 2)]

    def coefficient(self, chart: Chart, i: int, j: int) -> RationalFunction:
        """a_ij as a function on a chart built by cpn_chart/simplex_chart."""
        if i == j:
            return chart.zero()
        if not self.symbolic:
            return RationalFunction.constant(chart.variables, self.entries[i][j])
        lo, hi = min(i, j), max(i, j)
        var = chart.var(f"a{lo}{hi}")
        coeff = RationalFunction.variable(chart.variables, var)
        return coeff if i < j else -coeff


def random_skew(n: int, seed: int) -> SkewParamMatrix:
    """A seeded random rational skew matrix with small entries."""
    rng = random.Random(seed)
    upper = {}
    for i, j in itertools.combinations(range(n + 1), 2):
        upper[(i, j)] = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
    return SkewParamMatrix.from_upper(n, upper)


def cpn_chart(A: SkewParamMatrix) -> Chart:
    names = A.param_names() if A.symbolic else []
    names += [f"z{i}" for i in range(A.n + 1)]
    names += [f"zb{i}" for i in range(A.n + 1)]
    return Chart.from_names(names)


def simplex_chart(A: SkewParamMatrix) -> Chart:
    names = A.param_names() if A.symbolic else []
    names += [f"mu{i}" for i in range(A.n + 1)]
    return Chart.from_names(names)


def cpn_bracket(A: SkewParamMatrix, conjugate_symmetric: bool = False,
                verify: bool = True) -> PoissonStructure:
    """The quadratic bracket {z_i, z_j} = a_ij z_i z_j on the (z, zb) chart.

    All brackets involving a conjugate variable vanish. With
    ``conjugate_symmetric`` the variant {zb_i, zb_j} = a_ij zb_i zb_j is
    added, for comparing the two conventions.
    """
    chart = cpn_chart(A)
    n = A.n
    table = {}
    for i, j in itertools.combinations(range(n + 1), 2):
        zi = chart.coordinate(f"z{i}")
        zj = chart.coordinate(f"z{j}")
        aij = A.coefficient(chart, i, j)
        val = aij * zi * zj
        if not val.is_zero:
            table[(chart.var(f"z{i}").index, chart.var(f"z{j}").index)] = val
        if conjugate_symmetric:
            zbi = chart.coordinate(f"zb{i}")
            zbj = chart.coordinate(f"zb{j}")
            valb = aij * zbi * zbj
            if not valb.is_zero:
                table[(chart.var(f"zb{i}").index, chart.var(f"zb{j}").index)] = valb
    P = PoissonStructure.from_table(chart, table)
    return P.verify() if verify else P


def torus_pairs(A: SkewParamMatrix, chart: Chart) -> tuple[tuple[int, int], ...]:
    """The (z_i, zb_i) pair index list on a cpn chart."""
    return tuple(
        (chart.var(f"z{i}").index, chart.var(f"zb{i}").index)
        for i in range(A.n + 1)
    )


def standard_torus_weights(n: int) -> tuple[tuple[int, ...], ...]:
    """Factor k rotates pair k only; pair 0 is fixed."""
    return tuple(
        tuple(1 if pair == k else 0 for pair in range(n + 1))
        for k in range(1, n + 1)
    )


def moment_components(A: SkewParamMatrix, chart: Optional[Chart] = None) -> list[RationalFunction]:
    """mu_i = z_i zb_i / sum_l z_l zb_l; the components sum to 1 exactly."""
    chart = cpn_chart(A) if chart is None else chart
    n = A.n
    z = [chart.coordinate(f"z{i}") for i in range(n + 1)]
    zb = [chart.coordinate(f"zb{i}") for i in range(n + 1)]
    total = z[0] * zb[0]
    for i in range(1, n + 1):
        total = total + z[i] * zb[i]
    return [(z[i] * zb[i]) / total for i in range(n + 1)]


def _simplex_entry(A: SkewParamMatrix, chart: Chart, mus: list[RationalFunction],
                   i: int, j: int) -> RationalFunction:
    """(a_ij - sum_l (a_il + a_lj) mu_l) mu_i mu_j over the given chart."""
    coef = A.coefficient(chart, i, j)
    for l in range(A.n + 1):
        c = A.coefficient(chart, i, l) + A.coefficient(chart, l, j)
        if not c.is_zero:
            coef = coef - c * mus[l]
    return coef * mus[i] * mus[j]


@dataclass(frozen=True)
class SimplexDerivation:
    """The derived mu-bracket table plus its equality certificate."""

    n: int
    mu_table: tuple            # (n+1)x(n+1) entries over the simplex chart
    pairs_checked: int
    conjugate_symmetric_factor: Optional[Fraction] = None


def derive_simplex_bracket(A: SkewParamMatrix,
                           report_conjugate_convention: bool = False,
                           allow_large_symbolic: bool = False) -> SimplexDerivation:
    """Compute {mu_i, mu_j} from the quadratic bracket and certify the formula.

    For every pair the bracket computed upstairs (in z, zb) is compared,
    exactly, against the closed-form polynomial in mu composed with the
    moment components. A mismatch aborts: it would mean the two conventions
    drifted apart. Optionally also derives the factor produced by the
    conjugate-symmetric variant of the quadratic bracket.
    """
    if A.symbolic and A.n > SYMBOLIC_N_LIMIT and not allow_large_symbolic:
        raise ExprError(
            f"symbolic mode is limited to n <= {SYMBOLIC_N_LIMIT}; "
            "pass rational entries for larger n"
        )
    n = A.n
    P = cpn_bracket(A, verify=False)
    zchart = P.chart
    mus = moment_components(A, zchart)
    mchart = simplex_chart(A)
    mu_vars = [mchart.var(f"mu{i}") for i in range(n + 1)]
    mus_m = [RationalFunction.variable(mchart.variables, v) for v in mu_vars]
    # bindings mu-chart -> z-chart for the composition
    bindings = {}
    if A.symbolic:
        for name in A.param_names():
            bindings[mchart.var(name)] = RationalFunction.variable(
                zchart.variables, zchart.var(name))
    for i in range(n + 1):
        bindings[mu_vars[i]] = mus[i]

    zero = mchart.zero()
    table = [[zero for _ in range(n + 1)] for _ in range(n + 1)]
    pairs = 0
    conj_factor = None
    P_conj = cpn_bracket(A, conjugate_symmetric=True, verify=False) if report_conjugate_convention else None
    for i, j in itertools.combinations(range(n + 1), 2):
        lhs = bracket(P, mus[i], mus[j])
        rhs_mu = _simplex_entry(A, mchart, mus_m, i, j)
        rhs = substitute(rhs_mu, bindings)
        if lhs != rhs:
            raise DerivationMismatchError(
                f"simplex bracket derivation failed at pair ({i},{j}); "
                f"residual {lhs - rhs}"
            )
        table[i][j] = rhs_mu
        table[j][i] = -rhs_mu
        pairs += 1
        if P_conj is not None and not lhs.is_zero:
            lhs_conj = bracket(P_conj, mus[i], mus[j])
            ratio = lhs_conj / lhs
            if not (ratio.is_polynomial and ratio.as_polynomial().is_constant):
                raise DerivationMismatchError(
                    f"conjugate-symmetric bracket is not a constant multiple at ({i},{j})"
                )
            value = ratio.as_polynomial().constant_value()
            if conj_factor is None:
                conj_factor = value
            elif conj_factor != value:
                raise DerivationMismatchError("conjugate-symmetric factor differs between pairs")
    return SimplexDerivation(n, tuple(tuple(row) for row in table), pairs, conj_factor)


def simplex_bracket(A: SkewParamMatrix, verify: bool = True,
                    allow_large_symbolic: bool = False) -> PoissonStructure:
    """The bracket (a_ij - sum_l (a_il + a_lj) mu_l) mu_i mu_j on mu-space.

    The Jacobi defect is verified symbolically by default; this is a real
    check, not an assumption.
    """
    if A.symbolic and A.n > SYMBOLIC_N_LIMIT and not allow_large_symbolic:
        raise ExprError(
            f"symbolic mode is limited to n <= {SYMBOLIC_N_LIMIT}; "
            "pass rational entries for larger n"
        )
    chart = simplex_chart(A)
    mus = [chart.coordinate(f"mu{i}") for i in range(A.n + 1)]
    table = {}
    for i, j in itertools.combinations(range(A.n + 1), 2):
        val = _simplex_entry(A, chart, mus, i, j)
        if not val.is_zero:
            table[(chart.var(f"mu{i}").index, chart.var(f"mu{j}").index)] = val
    P = PoissonStructure.from_table(chart, table)
    return P.verify() if verify else P


@dataclass(frozen=True)
class StratificationCertificate:
    """Divisibility certificates for the face conditions.

    vanishing_checks: ((i, l, ok), ...) - mu_l divides {mu_i, mu_l};
    sum_checks: ((i, ok), ...) - (1 - sum mu) divides {mu_i, sum mu}.
    """

    vanishing_checks: tuple
    sum_checks: tuple

    @property
    def passed(self) -> bool:
        return (all(ok for *_ignored, ok in self.vanishing_checks)
                and all(ok for _i, ok in self.sum_checks))


def check_face_stratification(A: SkewParamMatrix) -> StratificationCertificate:
    """Exact divisibility checks making every simplex face a Poisson piece."""
    P = simplex_bracket(A, verify=False)
    chart = P.chart
    n = A.n
    mu_idx = [chart.var(f"mu{i}").index for i in range(n + 1)]
    mu_poly = [Polynomial.variable(chart.variables, chart.variables[k]) for k in mu_idx]
    vanishing = []
    for i in range(n + 1):
        for l in range(n + 1):
            if i == l:
                continue
            entry = P.pi[mu_idx[i]][mu_idx[l]]
            ok = divides(mu_poly[l], entry.as_polynomial())
            vanishing.append((i, l, ok))
    one_minus_sum = Polynomial.one(chart.variables)
    for p in mu_poly:
        one_minus_sum = one_minus_sum - p
    sums = []
    for i in range(n + 1):
        total = chart.zero()
        for l in range(n + 1):
            total = total + P.pi[mu_idx[i]][mu_idx[l]]
        ok = divides(one_minus_sum, total.as_polynomial())
        sums.append((i, ok))
    return StratificationCertificate(tuple(vanishing), tuple(sums))


@dataclass(frozen=True)
class FaceDescriptor:
    """A simplex face: the set of vanishing mu indices and its dimension."""

    vanishing_set: tuple[int, ...]
    dimension: int

    def __post_init__(self):
        object.__setattr__(self, "vanishing_set", tuple(sorted(self.vanishing_set)))


def enumerate_faces(n: int) -> list[FaceDescriptor]:
    """All 2^{n+1} - 1 nonempty faces, highest dimension first.

    The face with vanishing set S (a proper subset of {0..n}) has dimension
    n - |S|; there are C(n+1, n-d) faces of dimension d.
    """
    if n < 0:
        raise ValueError("need n >= 0")
    faces = []
    indices = range(n + 1)
    for size in range(n + 1):  # proper subsets only
        for subset in itertools.combinations(indices, size):
            faces.append(FaceDescriptor(subset, n - size))
    return faces


def face_bracket_table(A: SkewParamMatrix, face: FaceDescriptor) -> dict:
    """Induced entries {mu_i, mu_j} on a face, vanishing coordinates set to 0."""
    P = simplex_bracket(A, verify=False)
    chart = P.chart
    n = A.n
    survivors = [i for i in range(n + 1) if i not in face.vanishing_set]
    bindings = {}
    for v in chart.variables:
        bindings[v] = RationalFunction.variable(chart.variables, v)
    for i in face.vanishing_set:
        bindings[chart.var(f"mu{i}")] = RationalFunction.constant(chart.variables, 0)
    out = {}
    for i, j in itertools.combinations(survivors, 2):
        entry = P.pi[chart.var(f"mu{i}").index][chart.var(f"mu{j}").index]
        restricted = entry if entry.is_zero else substitute(entry, bindings)
        if not restricted.is_zero:
            out[(i, j)] = restricted
    return out
