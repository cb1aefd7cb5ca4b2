"""Exact multivariate polynomial and rational-function arithmetic over Q.

This is the scalar engine for the whole package. Coefficients are
arbitrary-precision rationals, monomials are ordered graded-lexicographically
over a fixed variable tuple, and every public value is normalized at
construction: polynomials store no zero terms, rational functions are reduced
to lowest terms with a grlex-monic denominator. Values are immutable, so
equality is structural and values can be shared freely between workers.

No floating point is used anywhere.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd as _int_gcd
from typing import Iterable, Mapping, Optional, Sequence

__all__ = [
    "Variable",
    "Polynomial",
    "RationalFunction",
    "make_variables",
    "parse_expr",
    "differentiate",
    "substitute",
    "divides",
    "eval_at",
    "poly_gcd",
    "permute_variables",
    "ExprError",
    "ChartMismatchError",
    "ZeroDenominatorError",
    "PoleError",
    "ParseError",
    "UnknownVariableError",
]

_F0 = Fraction(0)
_F1 = Fraction(1)


class ExprError(Exception):
    """Base class for all symbolic-arithmetic errors."""


class ChartMismatchError(ExprError):
    """Operands live over different variable tuples."""


class ZeroDenominatorError(ExprError):
    """A denominator is identically the zero polynomial."""


class PoleError(ExprError):
    """Evaluation at a point where a denominator vanishes."""


class ParseError(ExprError):
    """Syntax error, with the 0-based offset of the offending token."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownVariableError(ParseError):
    """An identifier that is not a declared variable."""


_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Variable:
    """A formal symbol: unique name plus its ordinal in the variable tuple."""

    name: str
    index: int

    def __str__(self) -> str:
        return self.name


def make_variables(names: Iterable[str]) -> tuple[Variable, ...]:
    """Build a variable tuple from names; names must be unique identifiers."""
    out = []
    seen = set()
    for i, name in enumerate(names):
        if not _IDENT_RE.fullmatch(name):
            raise ValueError(f"invalid variable name {name!r}")
        if name in seen:
            raise ValueError(f"duplicate variable name {name!r}")
        seen.add(name)
        out.append(Variable(name, i))
    return tuple(out)


def _grlex_key(e: tuple[int, ...]) -> tuple:
    return (sum(e), e)


class Polynomial:
    """Sparse multivariate polynomial with exact rational coefficients.

    Terms map exponent vectors (tuples, one slot per variable) to nonzero
    Fractions. The term order everywhere is graded lexicographic over the
    variable tuple's ordering.
    """

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Sequence[Variable], terms: Mapping, _clean: bool = False):
        variables = tuple(variables)
        if _clean:
            clean = terms
        else:
            width = len(variables)
            clean = {}
            for e, c in terms.items():
                e = tuple(int(x) for x in e)
                if len(e) != width:
                    raise ValueError("exponent vector has wrong length")
                if any(x < 0 for x in e):
                    raise ValueError("negative exponent")
                c = Fraction(c)
                if c:
                    clean[e] = c
        self.variables = variables
        self.terms = clean
        self._hash = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, variables: Sequence[Variable]) -> "Polynomial":
        return cls(variables, {}, _clean=True)

    @classmethod
    def constant(cls, variables: Sequence[Variable], value) -> "Polynomial":
        value = Fraction(value)
        if not value:
            return cls.zero(variables)
        return cls(variables, {(0,) * len(variables): value}, _clean=True)

    @classmethod
    def one(cls, variables: Sequence[Variable]) -> "Polynomial":
        return cls.constant(variables, 1)

    @classmethod
    def variable(cls, variables: Sequence[Variable], var: Variable) -> "Polynomial":
        variables = tuple(variables)
        if var.index >= len(variables) or variables[var.index] != var:
            raise ChartMismatchError(f"variable {var.name} is not in the chart")
        e = [0] * len(variables)
        e[var.index] = 1
        return cls(variables, {tuple(e): _F1}, _clean=True)

    # -- queries -----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    @property
    def is_one(self) -> bool:
        return len(self.terms) == 1 and self.terms.get((0,) * len(self.variables)) == 1

    def constant_value(self) -> Fraction:
        if self.is_zero:
            return _F0
        if not self.is_constant:
            raise ExprError("polynomial is not constant")
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        """Maximal total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, var: Variable) -> int:
        if not self.terms:
            return -1
        return max(e[var.index] for e in self.terms)

    def degree_vector(self) -> tuple[int, ...]:
        width = len(self.variables)
        out = [0] * width
        for e in self.terms:
            for i, x in enumerate(e):
                if x > out[i]:
                    out[i] = x
        return tuple(out)

    def min_exponents(self) -> tuple[int, ...]:
        it = iter(self.terms)
        try:
            out = list(next(it))
        except StopIteration:
            return (0,) * len(self.variables)
        for e in it:
            for i, x in enumerate(e):
                if x < out[i]:
                    out[i] = x
        return tuple(out)

    def leading_term(self) -> tuple[tuple[int, ...], Fraction]:
        """Grlex-maximal term; raises on the zero polynomial."""
        if not self.terms:
            raise ExprError("zero polynomial has no leading term")
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def used_variables(self) -> frozenset[int]:
        out = set()
        for e in self.terms:
            for i, x in enumerate(e):
                if x:
                    out.add(i)
        return frozenset(out)

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "Polynomial") -> None:
        if self.variables != other.variables:
            raise ChartMismatchError("polynomials over different variable tuples")

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self.variables, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        res = dict(self.terms)
        for e, c in other.terms.items():
            nc = res.get(e, _F0) + c
            if nc:
                res[e] = nc
            else:
                res.pop(e, None)
        return Polynomial(self.variables, res, _clean=True)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.variables, {e: -c for e, c in self.terms.items()}, _clean=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if not c:
                return Polynomial.zero(self.variables)
            return Polynomial(self.variables, {e: k * c for e, k in self.terms.items()}, _clean=True)
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check(other)
        res: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                nc = res.get(e, _F0) + c1 * c2
                if nc:
                    res[e] = nc
                else:
                    res.pop(e, None)
        return Polynomial(self.variables, res, _clean=True)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result = Polynomial.one(self.variables)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def diff(self, var: Variable) -> "Polynomial":
        i = var.index
        if i >= len(self.variables) or self.variables[i] != var:
            raise ChartMismatchError(f"variable {var.name} is not in the chart")
        res = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                e2 = e[:i] + (k - 1,) + e[i + 1:]
                nc = res.get(e2, _F0) + c * k
                if nc:
                    res[e2] = nc
                else:
                    res.pop(e2, None)
        return Polynomial(self.variables, res, _clean=True)

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        if len(point) != len(self.variables):
            raise ValueError("point has wrong dimension")
        point = [Fraction(x) for x in point]
        pows: list[dict] = [{0: _F1} for _ in point]
        total = _F0
        for e, c in self.terms.items():
            val = c
            for i, k in enumerate(e):
                if k:
                    cache = pows[i]
                    if k not in cache:
                        cache[k] = point[i] ** k
                    val *= cache[k]
            total += val
        return total

    def exact_div(self, d: "Polynomial") -> Optional["Polynomial"]:
        """Quotient self/d if d divides self exactly, else None."""
        self._check(d)
        if d.is_zero:
            raise ZeroDivisionError("division by the zero polynomial")
        if self.is_zero:
            return self
        dv_self = self.degree_vector()
        dv_d = d.degree_vector()
        if any(a < b for a, b in zip(dv_self, dv_d)):
            return None
        lt_e, lt_c = d.leading_term()
        rem = dict(self.terms)
        out = {}
        while rem:
            e = max(rem, key=_grlex_key)
            q = tuple(a - b for a, b in zip(e, lt_e))
            if any(x < 0 for x in q):
                return None
            qc = rem[e] / lt_c
            out[q] = qc
            for e2, c2 in d.terms.items():
                e3 = tuple(a + b for a, b in zip(q, e2))
                nc = rem.get(e3, _F0) - qc * c2
                if nc:
                    rem[e3] = nc
                else:
                    rem.pop(e3, None)
        return Polynomial(self.variables, out, _clean=True)

    # -- comparison / hashing / printing ------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            if isinstance(other, (int, Fraction)):
                return self.is_constant and self.constant_value() == other
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __bool__(self):
        return bool(self.terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self.terms.items())))
        return self._hash

    def to_text(self) -> str:
        """Canonical string in the package grammar; reparses to an equal value."""
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=_grlex_key, reverse=True):
            c = self.terms[e]
            mono = "*".join(
                v.name if k == 1 else f"{v.name}^{k}"
                for v, k in zip(self.variables, e)
                if k
            )
            if not mono:
                body = str(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}*{mono}"
            parts.append(("-" if c < 0 else "+", body))
        sign, body = parts[0]
        text = body if sign == "+" else f"-{body}"
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"Polynomial({self.to_text()!r})"


# ---------------------------------------------------------------------------
# Multivariate gcd: recursive content extraction + primitive PRS.
# Internals work on integer-coefficient dicts for speed.
# ---------------------------------------------------------------------------

def _int_lcm(a: int, b: int) -> int:
    return a // _int_gcd(a, b) * b


def _to_primitive_int(p: Polynomial) -> dict:
    """Integer-primitive form of p's term dict, positive grlex-leading sign."""
    den = 1
    for c in p.terms.values():
        den = _int_lcm(den, c.denominator)
    ints = {e: int(c * den) for e, c in p.terms.items()}
    g = 0
    for v in ints.values():
        g = _int_gcd(g, v)
    lead = max(ints, key=_grlex_key)
    if ints[lead] < 0:
        g = -g
    return {e: v // g for e, v in ints.items()}


def _normalize_int(d: dict) -> dict:
    g = 0
    for v in d.values():
        g = _int_gcd(g, v)
    if g == 0:
        return d
    lead = max(d, key=_grlex_key)
    if d[lead] < 0:
        g = -g
    if g == 1:
        return d
    return {e: v // g for e, v in d.items()}


def _support_int(d: dict) -> frozenset[int]:
    out = set()
    for e in d:
        for i, x in enumerate(e):
            if x:
                out.add(i)
    return frozenset(out)


def _deg_int(d: dict, v: int) -> int:
    return max(e[v] for e in d)


def _mul_int(a: dict, b: dict) -> dict:
    res: dict = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            nc = res.get(e, 0) + c1 * c2
            if nc:
                res[e] = nc
            else:
                res.pop(e, None)
    return res


def _sub_int(a: dict, b: dict) -> dict:
    res = dict(a)
    for e, c in b.items():
        nc = res.get(e, 0) - c
        if nc:
            res[e] = nc
        else:
            res.pop(e, None)
    return res


def _divexact_int(a: dict, d: dict, width: int) -> dict:
    """Exact division of integer dicts; assumes divisibility."""
    lt_e = max(d, key=_grlex_key)
    lt_c = d[lt_e]
    rem = {e: Fraction(c) for e, c in a.items()}
    out: dict = {}
    while rem:
        e = max(rem, key=_grlex_key)
        q = tuple(x - y for x, y in zip(e, lt_e))
        if any(x < 0 for x in q):
            raise ExprError("internal gcd error: inexact division")
        qc = rem[e] / lt_c
        out[q] = qc
        for e2, c2 in d.items():
            e3 = tuple(x + y for x, y in zip(q, e2))
            nc = rem.get(e3, _F0) - qc * c2
            if nc:
                rem[e3] = nc
            else:
                rem.pop(e3, None)
    res = {}
    for e, c in out.items():
        if c.denominator != 1:
            raise ExprError("internal gcd error: non-integer quotient")
        if c:
            res[e] = int(c)
    return res


def _strip_monomial(d: dict, width: int) -> tuple[tuple[int, ...], dict]:
    mins = None
    for e in d:
        if mins is None:
            mins = list(e)
        else:
            for i, x in enumerate(e):
                if x < mins[i]:
                    mins[i] = x
    mins = tuple(mins)
    if any(mins):
        d = {tuple(x - m for x, m in zip(e, mins)): c for e, c in d.items()}
    return mins, d


def _content_wrt_int(d: dict, v: int, width: int) -> dict:
    slices: dict = {}
    for e, c in d.items():
        k = e[v]
        e0 = e[:v] + (0,) + e[v + 1:]
        slices.setdefault(k, {})[e0] = c
    g = None
    one = (0,) * width
    for s in slices.values():
        g = s if g is None else _gcd_int(g, s, width)
        if len(g) == 1 and one in g:
            return {one: 1}
    return g


def _primpart_wrt_int(d: dict, v: int, width: int) -> dict:
    c = _content_wrt_int(d, v, width)
    one = (0,) * width
    if len(c) == 1 and one in c and c[one] in (1, -1):
        return _normalize_int(d)
    return _normalize_int(_divexact_int(d, c, width))


def _prem_int(a: dict, b: dict, v: int, width: int) -> dict:
    """Pseudo-remainder of a by b in the variable v (fraction-free)."""
    db = _deg_int(b, v)
    lb = {e[:v] + (0,) + e[v + 1:]: c for e, c in b.items() if e[v] == db}
    r = a
    while r:
        dr = _deg_int(r, v)
        if dr < db:
            break
        lr = {e[:v] + (0,) + e[v + 1:]: c for e, c in r.items() if e[v] == dr}
        shift = dr - db
        shifted = {e[:v] + (e[v] + shift,) + e[v + 1:]: c for e, c in b.items()}
        r = _sub_int(_mul_int(lb, r), _mul_int(lr, shifted))
    return r


def _gcd_int(a: dict, b: dict, width: int) -> dict:
    """Gcd of nonzero integer term dicts, returned integer-primitive."""
    one = (0,) * width
    ma, a = _strip_monomial(a, width)
    mb, b = _strip_monomial(b, width)
    common = tuple(min(x, y) for x, y in zip(ma, mb))
    if len(a) == 1 or len(b) == 1:
        return {common: 1}
    a = _normalize_int(a)
    b = _normalize_int(b)
    if a == b:
        return {tuple(x + y for x, y in zip(e, common)): c for e, c in a.items()}
    while True:
        sa = _support_int(a)
        sb = _support_int(b)
        if not sa or not sb:
            return {common: 1}
        only_a = sa - sb
        only_b = sb - sa
        if not only_a and not only_b:
            break
        for v in only_a:
            a = _content_wrt_int(a, v, width)
        for v in only_b:
            b = _content_wrt_int(b, v, width)
        if (len(a) == 1 and one in a) or (len(b) == 1 and one in b):
            return {common: 1}
    # a, b now share their variable support
    v = min(sa, key=lambda i: (min(_deg_int(a, i), _deg_int(b, i)), _deg_int(a, i) + _deg_int(b, i)))
    ca = _content_wrt_int(a, v, width)
    cb = _content_wrt_int(b, v, width)
    pa = a if (len(ca) == 1 and one in ca) else _divexact_int(a, ca, width)
    pb = b if (len(cb) == 1 and one in cb) else _divexact_int(b, cb, width)
    cg = _gcd_int(ca, cb, width)
    g = _prs_int(pa, pb, v, width)
    res = _mul_int(cg, g)
    if any(common):
        res = {tuple(x + y for x, y in zip(e, common)): c for e, c in res.items()}
    return _normalize_int(res)


def _prs_int(a: dict, b: dict, v: int, width: int) -> dict:
    """Primitive pseudo-remainder sequence; a, b primitive w.r.t. v."""
    one = (0,) * width
    if _deg_int(a, v) < _deg_int(b, v):
        a, b = b, a
    while True:
        if _deg_int(b, v) == 0:
            return {one: 1}
        r = _prem_int(a, b, v, width)
        if not r:
            return _normalize_int(b)
        a, b = b, _primpart_wrt_int(r, v, width)


_GCD_CACHE: dict = {}
_GCD_CACHE_MAX = 4096


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Normalized gcd over Q: integer-primitive, positive grlex-leading sign.

    Algorithm: recursive content extraction with a primitive PRS in a chosen
    main variable; monomial contents and one-sided variables are stripped
    first, so the structured inputs this package produces stay cheap.
    """
    if a.variables != b.variables:
        raise ChartMismatchError("gcd of polynomials over different variable tuples")
    if a.is_zero and b.is_zero:
        return Polynomial.zero(a.variables)
    if a.is_zero:
        return Polynomial(b.variables, {e: Fraction(c) for e, c in _to_primitive_int(b).items()}, _clean=True)
    if b.is_zero:
        return Polynomial(a.variables, {e: Fraction(c) for e, c in _to_primitive_int(a).items()}, _clean=True)
    if a.is_constant or b.is_constant:
        return Polynomial.one(a.variables)
    key = (a, b)
    hit = _GCD_CACHE.get(key)
    if hit is not None:
        return hit
    width = len(a.variables)
    g = _gcd_int(_to_primitive_int(a), _to_primitive_int(b), width)
    res = Polynomial(a.variables, {e: Fraction(c) for e, c in g.items()}, _clean=True)
    if len(_GCD_CACHE) >= _GCD_CACHE_MAX:
        _GCD_CACHE.clear()
    _GCD_CACHE[key] = res
    return res


def divides(p: Polynomial, q: Polynomial) -> bool:
    """True iff multivariate division of q by p leaves zero remainder."""
    if p.is_zero:
        raise ExprError("divisibility by the zero polynomial is undefined")
    if q.is_zero:
        return True
    return q.exact_div(p) is not None


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------


class RationalFunction:
    """Quotient of two Polynomials, always reduced, denominator grlex-monic."""

    __slots__ = ("numerator", "denominator", "_hash")

    def __init__(self, numerator: Polynomial, denominator: Optional[Polynomial] = None,
                 _reduced: bool = False):
        if denominator is None:
            denominator = Polynomial.one(numerator.variables)
        if numerator.variables != denominator.variables:
            raise ChartMismatchError("numerator and denominator over different variable tuples")
        if denominator.is_zero:
            raise ZeroDenominatorError("denominator is identically zero")
        if not _reduced:
            numerator, denominator = _reduce_pair(numerator, denominator)
        lc = denominator.leading_term()[1]
        if lc != 1:
            inv = 1 / lc
            numerator = numerator * inv
            denominator = denominator * inv
        self.numerator = numerator
        self.denominator = denominator
        self._hash = None

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "RationalFunction":
        return cls(p, None, _reduced=True)

    @classmethod
    def constant(cls, variables: Sequence[Variable], value) -> "RationalFunction":
        return cls.from_polynomial(Polynomial.constant(variables, value))

    @classmethod
    def variable(cls, variables: Sequence[Variable], var: Variable) -> "RationalFunction":
        return cls.from_polynomial(Polynomial.variable(variables, var))

    # -- queries ---------------------------------------------------------------

    @property
    def variables(self) -> tuple[Variable, ...]:
        return self.numerator.variables

    @property
    def is_zero(self) -> bool:
        return self.numerator.is_zero

    @property
    def is_polynomial(self) -> bool:
        return self.denominator.is_one

    def as_polynomial(self) -> Polynomial:
        if not self.is_polynomial:
            raise ExprError("rational function has a nontrivial denominator")
        return self.numerator

    # -- arithmetic --------------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            if self.variables != other.variables:
                raise ChartMismatchError("operands over different variable tuples")
            return other
        if isinstance(other, Polynomial):
            if self.variables != other.variables:
                raise ChartMismatchError("operands over different variable tuples")
            return RationalFunction.from_polynomial(other)
        if isinstance(other, (int, Fraction)):
            return RationalFunction.constant(self.variables, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        n1, d1 = self.numerator, self.denominator
        n2, d2 = other.numerator, other.denominator
        if d1 == d2:
            return RationalFunction(n1 + n2, d1)
        if d1.is_one:
            return RationalFunction(n1 * d2 + n2, d2)
        if d2.is_one:
            return RationalFunction(n1 + n2 * d1, d1)
        g = poly_gcd(d1, d2)
        if g.is_constant:
            return RationalFunction(n1 * d2 + n2 * d1, d1 * d2)
        d1r = d1.exact_div(g)
        d2r = d2.exact_div(g)
        return RationalFunction(n1 * d2r + n2 * d1r, d1 * d2r)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.numerator, self.denominator, _reduced=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return RationalFunction(self.numerator * other, self.denominator)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        n1, d1 = self.numerator, self.denominator
        n2, d2 = other.numerator, other.denominator
        if n1.is_zero or n2.is_zero:
            return RationalFunction.constant(self.variables, 0)
        # cross-cancel so the product of reduced fractions is again reduced
        if not d2.is_one and not n1.is_constant:
            g = poly_gcd(n1, d2)
            if not g.is_constant:
                n1 = n1.exact_div(g)
                d2 = d2.exact_div(g)
        if not d1.is_one and not n2.is_constant:
            g = poly_gcd(n2, d1)
            if not g.is_constant:
                n2 = n2.exact_div(g)
                d1 = d1.exact_div(g)
        return RationalFunction(n1 * n2, d1 * d2, _reduced=True)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_zero:
            raise ZeroDenominatorError("division by the zero rational function")
        return self * RationalFunction(other.denominator, other.numerator, _reduced=True)

    def __rtruediv__(self, other):
        inv = RationalFunction(self.denominator, self.numerator)
        return inv * other

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise ValueError("rational-function powers must be integers")
        if k < 0:
            if self.is_zero:
                raise ZeroDenominatorError("negative power of zero")
            return RationalFunction(self.denominator, self.numerator, _reduced=True) ** (-k)
        # reduced^k stays reduced
        return RationalFunction(self.numerator ** k, self.denominator ** k, _reduced=True)

    def diff(self, var: Variable) -> "RationalFunction":
        n, d = self.numerator, self.denominator
        dn = n.diff(var)
        if d.is_one:
            return RationalFunction.from_polynomial(dn)
        dd = d.diff(var)
        if dd.is_zero:
            return RationalFunction(dn, d)
        g = poly_gcd(d, dd)
        if g.is_constant:
            return RationalFunction(dn * d - n * dd, d * d)
        dh = d.exact_div(g)
        ddh = dd.exact_div(g)
        return RationalFunction(dn * dh - n * ddh, d * dh)

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        dv = self.denominator.evaluate(point)
        if dv == 0:
            raise PoleError(f"pole at point {tuple(str(x) for x in point)}")
        return self.numerator.evaluate(point) / dv

    # -- comparison / printing ---------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Polynomial)):
            try:
                coerced = self._coerce(other)
            except ChartMismatchError:
                return False
            if coerced is None:
                return NotImplemented
            other = coerced
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return (self.variables == other.variables
                and self.numerator == other.numerator
                and self.denominator == other.denominator)

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __bool__(self):
        return not self.is_zero

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.numerator, self.denominator))
        return self._hash

    def to_text(self) -> str:
        if self.denominator.is_one:
            return self.numerator.to_text()
        return f"({self.numerator.to_text()})/({self.denominator.to_text()})"

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"RationalFunction({self.to_text()!r})"


def _reduce_pair(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    """Lowest-terms form of num/den (sign/scale fixed later by the caller)."""
    if num.is_zero:
        return num, Polynomial.one(num.variables)
    # common monomial factor
    mn = num.min_exponents()
    md = den.min_exponents()
    common = tuple(min(a, b) for a, b in zip(mn, md))
    if any(common):
        num = Polynomial(num.variables,
                         {tuple(x - m for x, m in zip(e, common)): c for e, c in num.terms.items()},
                         _clean=True)
        den = Polynomial(den.variables,
                         {tuple(x - m for x, m in zip(e, common)): c for e, c in den.terms.items()},
                         _clean=True)
    if den.is_constant:
        c = den.constant_value()
        return num * (1 / c), Polynomial.one(num.variables)
    q = num.exact_div(den)
    if q is not None:
        return q, Polynomial.one(num.variables)
    q = den.exact_div(num)
    if q is not None:
        return Polynomial.one(num.variables), q
    g = poly_gcd(num, den)
    if not g.is_constant:
        num = num.exact_div(g)
        den = den.exact_div(g)
    return num, den


def _raw_sum(variables: tuple[Variable, ...],
             parts: Iterable[tuple[Polynomial, Polynomial]]) -> RationalFunction:
    """Sum raw (num, den) pairs, reducing only once at the end.

    Hot loops (brackets, substitution) accumulate over shared denominators,
    so deferring the single big gcd to the end is a large win.
    """
    acc_n = Polynomial.zero(variables)
    acc_d = Polynomial.one(variables)
    for n, d in parts:
        if n.is_zero:
            continue
        if acc_n.is_zero:
            acc_n, acc_d = n, d
            continue
        if d == acc_d:
            acc_n = acc_n + n
            continue
        if d.is_one:
            acc_n = acc_n + n * acc_d
            continue
        if acc_d.is_one:
            acc_n = acc_n * d + n
            acc_d = d
            continue
        g = poly_gcd(acc_d, d)
        if g.is_constant:
            acc_n = acc_n * d + n * acc_d
            acc_d = acc_d * d
        else:
            dr = d.exact_div(g)
            ar = acc_d.exact_div(g)
            acc_n = acc_n * dr + n * ar
            acc_d = acc_d * dr
    return RationalFunction(acc_n, acc_d)


# ---------------------------------------------------------------------------
# Spec-level operations
# ---------------------------------------------------------------------------


def differentiate(f: RationalFunction, var: Variable) -> RationalFunction:
    """Exact partial derivative of f with respect to var."""
    if var.index >= len(f.variables) or f.variables[var.index] != var:
        raise ChartMismatchError(f"variable {var.name} is not in f's chart")
    return f.diff(var)


def substitute(f: RationalFunction, bindings: Mapping[Variable, RationalFunction]) -> RationalFunction:
    """Compose f with the given bindings; every variable of f must be bound.

    All binding values must live over one common target variable tuple.
    Raises ZeroDenominatorError if the composed denominator vanishes
    identically.
    """
    target = None
    for val in bindings.values():
        if isinstance(val, (Polynomial, RationalFunction)):
            if target is None:
                target = val.variables
            elif val.variables != target:
                raise ChartMismatchError("bindings over different variable tuples")
    if target is None:
        raise ExprError("cannot infer target variables from constant-only bindings")
    values = []
    for var in f.variables:
        if var not in bindings:
            raise ExprError(f"no binding for variable {var.name}")
        val = bindings[var]
        if isinstance(val, Polynomial):
            val = RationalFunction.from_polynomial(val)
        elif isinstance(val, (int, Fraction)):
            val = RationalFunction.constant(target, val)
        values.append(val)
    num = _subs_poly(f.numerator, values, target)
    den = _subs_poly(f.denominator, values, target)
    if den.is_zero:
        raise ZeroDenominatorError("composed denominator is identically zero")
    return num / den


def _subs_poly(p: Polynomial, values: list[RationalFunction],
               target: tuple[Variable, ...]) -> RationalFunction:
    pow_cache: list[dict] = [dict() for _ in values]
    parts = []
    one = Polynomial.one(target)
    for e, c in p.terms.items():
        term_n = Polynomial.constant(target, c)
        term_d = one
        for i, k in enumerate(e):
            if not k:
                continue
            cache = pow_cache[i]
            if k not in cache:
                cache[k] = values[i] ** k
            vk = cache[k]
            term_n = term_n * vk.numerator
            term_d = term_d * vk.denominator
        parts.append((term_n, term_d))
    if not parts:
        return RationalFunction.constant(target, 0)
    return _raw_sum(target, parts)


def eval_at(f: RationalFunction, point: Sequence[Fraction]) -> Fraction:
    """Exact value of f at a rational point; raises PoleError on poles."""
    return f.evaluate(point)


def permute_variables(f: RationalFunction, mapping: Mapping[Variable, Variable]) -> RationalFunction:
    """Relabel variables by a bijection of the same variable tuple.

    Used for conjugation-style swaps (z_i <-> zb_i) without leaving the chart.
    """
    variables = f.variables
    perm = list(range(len(variables)))
    for src, dst in mapping.items():
        if variables[src.index] != src or variables[dst.index] != dst:
            raise ChartMismatchError("mapping references variables outside the chart")
        perm[src.index] = dst.index

    def relabel(p: Polynomial) -> Polynomial:
        res = {}
        for e, c in p.terms.items():
            e2 = [0] * len(e)
            for i, k in enumerate(e):
                e2[perm[i]] += k
            res[tuple(e2)] = c
        return Polynomial(variables, res)

    return RationalFunction(relabel(f.numerator), relabel(f.denominator))


# ---------------------------------------------------------------------------
# Parser for the expression grammar:
#   expr   := ['-'] term (('+'|'-') term)*
#   term   := factor (('*'|'/') factor)*
#   factor := base ('^' uint)?
#   base   := rational | ident | '(' expr ')'
# with rational := int ['/' uint] munched maximally at the literal level.
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise ParseError(f"unexpected character {stripped[0]!r}", at)
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("ident") is not None:
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: tuple[Variable, ...]):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.variables = variables
        self.by_name = {v.name: v for v in variables}

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, value, at = self.peek()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r}", at)
        return self.advance()

    def parse(self) -> RationalFunction:
        value = self.expr()
        kind, val, at = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {val!r}", at)
        return value

    def expr(self) -> RationalFunction:
        kind, value, at = self.peek()
        negate = False
        if kind == "op" and value == "-":
            self.advance()
            negate = True
        acc = self.term()
        if negate:
            acc = -acc
        while True:
            kind, value, at = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                rhs = self.term()
                acc = acc + rhs if value == "+" else acc - rhs
            else:
                return acc

    def term(self) -> RationalFunction:
        acc = self.factor()
        while True:
            kind, value, at = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                rhs = self.factor()
                if value == "*":
                    acc = acc * rhs
                else:
                    if rhs.is_zero:
                        raise ZeroDenominatorError("division by zero in expression")
                    acc = acc / rhs
            else:
                return acc

    def factor(self) -> RationalFunction:
        base = self.base()
        kind, value, at = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            kind, value, at = self.peek()
            if kind != "num":
                raise ParseError("exponent must be a nonnegative integer", at)
            self.advance()
            return base ** int(value)
        return base

    def base(self) -> RationalFunction:
        kind, value, at = self.advance()
        if kind == "num":
            numer = int(value)
            # maximal munch of a rational literal int '/' uint
            if (self.peek()[0] == "op" and self.peek()[1] == "/"
                    and self.tokens[self.pos + 1][0] == "num"):
                self.advance()
                _, dv, dat = self.advance()
                if int(dv) == 0:
                    raise ZeroDenominatorError("rational literal with zero denominator")
                return RationalFunction.constant(self.variables, Fraction(numer, int(dv)))
            return RationalFunction.constant(self.variables, numer)
        if kind == "ident":
            var = self.by_name.get(value)
            if var is None:
                raise UnknownVariableError(f"unknown variable {value!r}", at)
            return RationalFunction.variable(self.variables, var)
        if kind == "op" and value == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        if kind == "op" and value == "-":
            # unary minus on a factor (accepted superset of the grammar)
            return -self.base()
        raise ParseError(f"unexpected token {value!r}" if value else "unexpected end of input", at)


def parse_expr(text: str, variables: Sequence[Variable]) -> RationalFunction:
    """Parse an expression string over the declared variables.

    Grammar: + - * / ^ with nonnegative integer powers, integer and
    int/uint rational literals, parentheses, declared identifiers. A leading
    unary minus is accepted. The result is fully normalized.
    """
    return _Parser(text, tuple(variables)).parse()
