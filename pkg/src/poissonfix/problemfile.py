"""The line-oriented problem file format.

Sections, introduced by a [name] header, hold one declaration per line;
'#' starts a comment. Sections:

    [chart]    whitespace-separated variable names (may span lines)
    [bracket]  lines "{x,y} = expr" with x before y in chart order;
               omitted pairs are zero, mirrors are implied
    [action]   "generator = r00 r01 ...; r10 r11 ...; ..." (one per line,
               rows ';'-separated, rational entries) and optional
               "max_order = N"
    [torus]    "pair = zvar zbvar" lines, then one "weights = w1 w2 ..."
               line per torus factor (one integer per declared pair)
    [params]   "seed = N", "points = N", "trials = N", "n = N",
               "symbolic = true|false"

Reports embed induced structures in the same format, and emitted blocks
reparse to equal structures.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .actions import ActionSpec, FiniteActionSpec, TorusActionSpec
from .expr import ExprError, parse_expr
from .poisson import Chart, PoissonStructure

__all__ = ["ProblemFile", "ProblemFileError", "parse_problem_text", "load_problem",
           "render_structure_block", "parse_matrix_text", "file_digest"]


class ProblemFileError(ExprError):
    """Malformed problem file; message carries the line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


_SECTIONS = ("chart", "bracket", "action", "torus", "params")
_BRACKET_RE = re.compile(r"^\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*,\s*([A-Za-z_][A-Za-z0-9_]*)\s*\}\s*=\s*(.+)$")
_KEYVAL_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")
_PARAM_KEYS = {"seed", "points", "trials", "n", "symbolic"}


@dataclass
class ProblemFile:
    """Parsed sections of a problem file, plus builders for domain objects."""

    chart_names: tuple[str, ...] = ()
    bracket_lines: tuple[tuple[str, str, str, int], ...] = ()  # (x, y, expr, line)
    generators: tuple[tuple[tuple[Fraction, ...], ...], ...] = ()
    max_order: int = 256
    torus_pairs: tuple[tuple[str, str], ...] = ()
    torus_weights: tuple[tuple[int, ...], ...] = ()
    params: dict = field(default_factory=dict)

    def chart(self) -> Chart:
        if not self.chart_names:
            raise ProblemFileError("missing [chart] section")
        return Chart.from_names(self.chart_names)

    def structure(self, chart: Optional[Chart] = None) -> PoissonStructure:
        chart = chart or self.chart()
        table = {}
        for x, y, text, line in self.bracket_lines:
            try:
                i = chart.var(x).index
                j = chart.var(y).index
            except KeyError as exc:
                raise ProblemFileError(str(exc), line) from exc
            if i >= j:
                raise ProblemFileError(
                    f"bracket {{{x},{y}}} must list the earlier chart variable first", line)
            if (i, j) in table:
                raise ProblemFileError(f"duplicate bracket entry {{{x},{y}}}", line)
            try:
                table[(i, j)] = parse_expr(text, chart.variables)
            except ExprError as exc:
                raise ProblemFileError(f"in {{{x},{y}}}: {exc}", line) from exc
        return PoissonStructure.from_table(chart, table)

    def action(self, chart: Optional[Chart] = None) -> Optional[ActionSpec]:
        chart = chart or self.chart()
        if self.generators and self.torus_pairs:
            raise ProblemFileError("file declares both [action] and [torus]")
        if self.generators:
            try:
                return FiniteActionSpec(chart, self.generators, self.max_order)
            except ValueError as exc:
                raise ProblemFileError(str(exc)) from exc
        if self.torus_pairs:
            try:
                pairs = tuple(
                    (chart.var(a).index, chart.var(b).index) for a, b in self.torus_pairs
                )
            except KeyError as exc:
                raise ProblemFileError(str(exc)) from exc
            if not self.torus_weights:
                raise ProblemFileError("[torus] section has pairs but no weights lines")
            try:
                return TorusActionSpec(chart, pairs, self.torus_weights)
            except ValueError as exc:
                raise ProblemFileError(str(exc)) from exc
        return None


def _parse_fraction(tok: str, line: int) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise ProblemFileError(f"bad rational {tok!r}", line) from exc


def parse_matrix_text(text: str, line: int = 0) -> tuple[tuple[Fraction, ...], ...]:
    """Rows separated by ';' or newlines, entries whitespace-separated."""
    rows = []
    for chunk in re.split(r"[;\n]", text):
        chunk = chunk.strip()
        if not chunk:
            continue
        rows.append(tuple(_parse_fraction(tok, line) for tok in chunk.split()))
    if not rows:
        raise ProblemFileError("empty matrix", line)
    if any(len(r) != len(rows[0]) for r in rows):
        raise ProblemFileError("ragged matrix rows", line)
    return tuple(rows)


def parse_problem_text(text: str) -> ProblemFile:
    pf = ProblemFile()
    chart_names: list[str] = []
    brackets = []
    generators = []
    pairs = []
    weights = []
    params: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SECTIONS:
                raise ProblemFileError(f"unknown section [{section}]", lineno)
            continue
        if section is None:
            raise ProblemFileError("content before the first section header", lineno)
        if section == "chart":
            chart_names.extend(line.split())
            continue
        if section == "bracket":
            m = _BRACKET_RE.match(line)
            if not m:
                raise ProblemFileError("expected a line of the form {x,y} = expr", lineno)
            brackets.append((m.group(1), m.group(2), m.group(3).strip(), lineno))
            continue
        m = _KEYVAL_RE.match(line)
        if not m:
            raise ProblemFileError("expected a key = value line", lineno)
        key, value = m.group(1).lower(), m.group(2).strip()
        if section == "action":
            if key == "generator":
                generators.append(parse_matrix_text(value, lineno))
            elif key == "max_order":
                pf.max_order = _parse_int(value, lineno)
            else:
                raise ProblemFileError(f"unknown [action] key {key!r}", lineno)
        elif section == "torus":
            if key == "pair":
                names = value.split()
                if len(names) != 2:
                    raise ProblemFileError("pair needs exactly two variable names", lineno)
                pairs.append((names[0], names[1]))
            elif key == "weights":
                try:
                    weights.append(tuple(int(tok) for tok in value.split()))
                except ValueError as exc:
                    raise ProblemFileError("weights must be integers", lineno) from exc
            else:
                raise ProblemFileError(f"unknown [torus] key {key!r}", lineno)
        elif section == "params":
            if key not in _PARAM_KEYS:
                raise ProblemFileError(f"unknown [params] key {key!r}", lineno)
            if key == "symbolic":
                if value.lower() not in ("true", "false"):
                    raise ProblemFileError("symbolic must be true or false", lineno)
                params[key] = value.lower() == "true"
            else:
                params[key] = _parse_int(value, lineno)
    pf.chart_names = tuple(chart_names)
    pf.bracket_lines = tuple(brackets)
    pf.generators = tuple(generators)
    pf.torus_pairs = tuple(pairs)
    pf.torus_weights = tuple(weights)
    pf.params = params
    return pf


def _parse_int(value: str, line: int) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise ProblemFileError(f"expected an integer, got {value!r}", line) from exc


def load_problem(path: str) -> tuple[ProblemFile, str]:
    """Parse a file; returns the problem plus the sha256 digest of its bytes."""
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_problem_text(data.decode("utf-8")), file_digest(data)


def file_digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def render_structure_block(P: PoissonStructure, indent: str = "") -> str:
    """Emit a structure as [chart]/[bracket] sections in the file format."""
    lines = [f"{indent}[chart]", indent + " ".join(v.name for v in P.chart.variables)]
    lines.append(f"{indent}[bracket]")
    n = P.chart.dimension
    for i in range(n):
        for j in range(i + 1, n):
            entry = P.pi[i][j]
            if not entry.is_zero:
                lines.append(
                    f"{indent}{{{P.chart.variables[i].name},{P.chart.variables[j].name}}}"
                    f" = {entry.to_text()}"
                )
    return "\n".join(lines)
