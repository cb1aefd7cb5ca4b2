"""Batch front-end: verification and reduction pipelines over problem files.

Commands: jacobi, action-check, fixed-set, reduce, simplex, stratify.
Exit codes: 0 pass, 1 mathematical failure (with witness), 2 input error,
3 internal abort (the two bracket constructions disagreed).

With --machine a flat key=value block is appended after the human report
and the timing line is suppressed, so output for a fixed seed is
byte-identical across runs.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import time
from dataclasses import dataclass, field

from . import __version__
from .actions import (
    ClosureError,
    NonPoissonActionError,
    fixed_subspace,
    is_poisson_action,
)
from .expr import ExprError, ParseError, ZeroDenominatorError
from .poisson import JacobiError, jacobi_defect, jacobi_triples
from .problemfile import (
    ProblemFileError,
    file_digest,
    load_problem,
    parse_matrix_text,
    render_structure_block,
)
from .reduction import (
    ConstructionMismatchError,
    ReduceOptions,
    SplitInvalidError,
    reduce_fixed_set,
)
from .simplex import (
    SYMBOLIC_N_LIMIT,
    DerivationMismatchError,
    SkewParamMatrix,
    check_face_stratification,
    derive_simplex_bracket,
    enumerate_faces,
    random_skew,
    simplex_bracket,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3

_INPUT_ERRORS = (ProblemFileError, ParseError, ZeroDenominatorError, ClosureError,
                 ValueError, OSError)
_INTERNAL_ERRORS = (ConstructionMismatchError, SplitInvalidError, DerivationMismatchError)


@dataclass
class Report:
    task: str
    status: str = "PASS"
    lines: list = field(default_factory=list)
    machine: dict = field(default_factory=dict)
    elapsed_ms: float = 0.0

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        mark = "pass" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        self.lines.append(f"  [{mark}] {name}{suffix}")
        if not ok:
            self.status = "FAIL"
        return ok

    def note(self, text: str) -> None:
        self.lines.append(text)

    @property
    def exit_code(self) -> int:
        return EXIT_PASS if self.status == "PASS" else EXIT_FAIL

    def render(self, machine: bool) -> str:
        out = [f"== poissonfix {self.task} =="]
        out.extend(self.lines)
        out.append(f"status: {self.status}")
        if not machine:
            out.append(f"elapsed: {self.elapsed_ms:.1f} ms")
        else:
            out.append("")
            out.append("== machine ==")
            data = dict(self.machine)
            data["task"] = self.task
            data["status"] = self.status
            for key in sorted(data):
                out.append(f"{key}={data[key]}")
        return "\n".join(out) + "\n"


def _common_flags(parser: argparse.ArgumentParser, suppress: bool = False) -> None:
    # subparsers use SUPPRESS so an absent flag does not clobber a value
    # given before the subcommand
    d = argparse.SUPPRESS if suppress else None
    dm = argparse.SUPPRESS if suppress else False
    parser.add_argument("--seed", type=int, default=d, help="rng seed (default 0)")
    parser.add_argument("--points", type=int, default=d,
                        help="sample points for pointwise checks (default 100)")
    parser.add_argument("--trials", type=int, default=d,
                        help="randomized trials (default 20)")
    parser.add_argument("--machine", action="store_true", default=dm,
                        help="append the machine-readable block, suppress timing")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poissonfix",
        description="Exact verification and fixed-set reduction of Poisson structures.",
    )
    parser.add_argument("--version", action="version", version=f"poissonfix {__version__}")
    _common_flags(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("jacobi", help="verify the Jacobi identity of a bracket table")
    p.add_argument("file")
    _common_flags(p, suppress=True)

    p = sub.add_parser("action-check", help="certify that an action preserves the bracket")
    p.add_argument("file")
    _common_flags(p, suppress=True)

    p = sub.add_parser("fixed-set", help="compute the fixed subspace of an action")
    p.add_argument("file")
    _common_flags(p, suppress=True)

    p = sub.add_parser("reduce", help="induce the Poisson structure on the fixed-point set")
    p.add_argument("file")
    _common_flags(p, suppress=True)

    for name, help_text in (
        ("simplex", "derive and certify the simplex bracket for a skew matrix"),
        ("stratify", "certify the face stratification of the simplex bracket"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--n", type=int, required=True, help="simplex dimension parameter")
        group = p.add_mutually_exclusive_group()
        group.add_argument("--a-file", help="file with the (n+1)x(n+1) skew matrix")
        group.add_argument("--symbolic", action="store_true",
                           help=f"keep a_ij symbolic (n <= {SYMBOLIC_N_LIMIT})")
        if name == "simplex":
            p.add_argument("--conjugate-report", action="store_true",
                           help="also derive the conjugate-symmetric convention factor")
        _common_flags(p, suppress=True)
    return parser


def _option(args, name: str, file_params: dict, default: int) -> int:
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in file_params:
        return file_params[name]
    return default


def cmd_jacobi(args) -> Report:
    report = Report("jacobi")
    pf, digest = load_problem(args.file)
    P = pf.structure()
    report.note(f"input: {args.file}")
    report.note(f"digest: {digest}")
    defects = jacobi_defect(P)
    triples = jacobi_triples(P)
    witnesses = [(t, d) for t, d in zip(triples, defects) if not d.is_zero]
    report.check("jacobi identity", not witnesses,
                 f"{len(triples)} triples, {len(witnesses)} nonzero")
    names = P.chart.variables
    for (i, j, k), d in witnesses[:5]:
        report.note(f"    witness ({names[i]},{names[j]},{names[k]}): defect = {d}")
    report.machine.update({
        "file": args.file,
        "digest": digest,
        "triples_total": str(len(triples)),
        "triples_failed": str(len(witnesses)),
    })
    if witnesses:
        (i, j, k), d = witnesses[0]
        report.machine["witness_triple"] = f"{names[i]},{names[j]},{names[k]}"
        report.machine["witness_defect"] = d.to_text()
    return report


def cmd_action_check(args) -> Report:
    report = Report("action-check")
    pf, digest = load_problem(args.file)
    chart = pf.chart()
    P = pf.structure(chart)
    action = pf.action(chart)
    if action is None:
        raise ProblemFileError("file has no [action] or [torus] section")
    report.note(f"input: {args.file}")
    report.note(f"digest: {digest}")
    cert = is_poisson_action(P, action)
    report.check("poisson action", cert.passed,
                 f"{cert.kind}, {cert.checked} checks, {len(cert.failures)} failures")
    for failure in cert.failures[:5]:
        report.note(f"    witness: {failure}")
    report.machine.update({
        "file": args.file,
        "digest": digest,
        "kind": cert.kind,
        "checked": str(cert.checked),
        "failures": str(len(cert.failures)),
    })
    if cert.failures:
        report.machine["witness"] = cert.failures[0]
    return report


def cmd_fixed_set(args) -> Report:
    report = Report("fixed-set")
    pf, digest = load_problem(args.file)
    chart = pf.chart()
    action = pf.action(chart)
    if action is None:
        raise ProblemFileError("file has no [action] or [torus] section")
    report.note(f"input: {args.file}")
    report.note(f"digest: {digest}")
    N = fixed_subspace(action)
    report.note(f"fixed subspace dimension: {N.dim}")
    for k, v in enumerate(N.basis):
        report.note("  basis[%d] = %s" % (k, " ".join(str(x) for x in v)))
    for k, eq in enumerate(N.equations):
        report.note("  equation[%d]: %s = 0" % (k, _covector_text(chart, eq)))
    report.machine.update({
        "file": args.file,
        "digest": digest,
        "dim": str(N.dim),
    })
    for k, v in enumerate(N.basis):
        report.machine[f"basis.{k}"] = " ".join(str(x) for x in v)
    for k, eq in enumerate(N.equations):
        report.machine[f"equation.{k}"] = " ".join(str(x) for x in eq)
    return report


def _covector_text(chart, eq) -> str:
    parts = []
    for coef, v in zip(eq, chart.variables):
        if coef == 0:
            continue
        if coef == 1:
            parts.append(v.name)
        else:
            parts.append(f"{coef}*{v.name}")
    return " + ".join(parts) if parts else "0"


def cmd_reduce(args) -> Report:
    report = Report("reduce")
    pf, digest = load_problem(args.file)
    chart = pf.chart()
    P = pf.structure(chart)
    action = pf.action(chart)
    if action is None:
        raise ProblemFileError("file has no [action] or [torus] section")
    seed = _option(args, "seed", pf.params, 0)
    points = _option(args, "points", pf.params, 100)
    trials = _option(args, "trials", pf.params, 20)
    report.note(f"input: {args.file}")
    report.note(f"digest: {digest}")
    report.machine.update({
        "file": args.file,
        "digest": digest,
        "seed": str(seed),
        "points": str(points),
        "trials": str(trials),
    })
    try:
        result = reduce_fixed_set(P, action, ReduceOptions(seed, points, trials))
    except NonPoissonActionError as exc:
        report.check("poisson action", False, exc.report.witness_text())
        report.machine["failures"] = str(len(exc.report.failures))
        report.machine["witness"] = exc.report.witness_text()
        return report
    cert = result.action_certificate
    report.check("poisson action", cert.passed, f"{cert.kind}, {cert.checked} checks")
    report.check("tangency #(E0) in TN", result.sharp_e0_certificate.passed,
                 f"{len(result.sharp_e0_certificate.results)} covectors")
    eq1 = result.eq1_certificate
    max_dim = max(eq1.dimensions) if eq1.dimensions else 0
    report.check("pointwise kernel condition", eq1.passed,
                 f"{eq1.points_checked} points, max intersection dim {max_dim}")
    jac = result.jacobi_certificate
    report.check("jacobi on induced structure", jac.passed, f"{jac.triples_checked} triples")
    ext = result.extension_certificate
    report.check("extension independence", ext.passed,
                 f"{ext.trials} trials, {result.pairs_matched} bracket pairs matched")
    if result.induced is not None:
        report.note("induced structure on the fixed set:")
        report.note(render_structure_block(result.induced, indent="  "))
        report.machine["fixed_dim"] = str(result.induced.chart.dimension)
        report.machine["induced_chart"] = " ".join(
            v.name for v in result.induced.chart.variables)
        n = result.induced.chart.dimension
        for i in range(n):
            for j in range(i + 1, n):
                entry = result.induced.pi[i][j]
                if not entry.is_zero:
                    names = result.induced.chart.variables
                    report.machine[f"induced.{names[i].name}.{names[j].name}"] = entry.to_text()
    report.machine["eq1_max_dim"] = str(max_dim)
    report.machine["pairs_matched"] = str(result.pairs_matched)
    if not result.passed:
        report.status = "FAIL"
    return report


def _load_skew(args) -> tuple[SkewParamMatrix, str]:
    n = args.n
    if n < 1:
        raise ProblemFileError("need --n >= 1")
    if args.symbolic:
        if n > SYMBOLIC_N_LIMIT:
            raise ProblemFileError(
                f"symbolic mode is limited to n <= {SYMBOLIC_N_LIMIT}")
        return SkewParamMatrix.symbolic_matrix(n), "symbolic"
    if args.a_file:
        with open(args.a_file, "rb") as fh:
            data = fh.read()
        rows = parse_matrix_text(data.decode("utf-8"))
        try:
            A = SkewParamMatrix(n, rows)
        except ValueError as exc:
            raise ProblemFileError(str(exc)) from exc
        return A, file_digest(data)
    seed = args.seed if args.seed is not None else 0
    A = random_skew(n, seed)
    tag = ";".join(",".join(str(x) for x in row) for row in A.entries)
    return A, "sha256:" + hashlib.sha256(tag.encode()).hexdigest()


def _describe_matrix(report: Report, A: SkewParamMatrix) -> None:
    if A.symbolic:
        report.note(f"matrix: symbolic a_ij, n = {A.n}")
        return
    report.note(f"matrix: rational, n = {A.n}")
    for row in A.entries:
        report.note("  " + " ".join(str(x) for x in row))


def cmd_simplex(args) -> Report:
    report = Report("simplex")
    A, digest = _load_skew(args)
    report.note(f"digest: {digest}")
    _describe_matrix(report, A)
    report.machine.update({"digest": digest, "n": str(A.n),
                           "symbolic": str(A.symbolic).lower()})
    derivation = derive_simplex_bracket(
        A, report_conjugate_convention=getattr(args, "conjugate_report", False))
    report.check("mu-bracket derivation matches the closed form", True,
                 f"{derivation.pairs_checked} pairs")
    report.machine["pairs_checked"] = str(derivation.pairs_checked)
    if getattr(args, "conjugate_report", False):
        factor = derivation.conjugate_symmetric_factor
        text = str(factor) if factor is not None else "undefined (all brackets vanish)"
        report.note(f"conjugate-symmetric convention factor: {text}")
        report.machine["conjugate_factor"] = text
    try:
        P = simplex_bracket(A)
        jacobi_ok = True
        witness = ""
    except JacobiError as exc:
        jacobi_ok = False
        witness = str(exc)
        P = simplex_bracket(A, verify=False)
    report.check("jacobi identity of the simplex bracket", jacobi_ok, witness)
    report.note("mu-bracket table:")
    names = P.chart.variables
    mu_idx = [P.chart.var(f"mu{i}").index for i in range(A.n + 1)]
    for a in range(A.n + 1):
        for b in range(a + 1, A.n + 1):
            entry = P.pi[mu_idx[a]][mu_idx[b]]
            if not entry.is_zero:
                report.note(f"  {{mu{a},mu{b}}} = {entry.to_text()}")
                report.machine[f"mu.{a}.{b}"] = entry.to_text()
    strat = check_face_stratification(A)
    _report_stratification(report, strat, A.n)
    return report


def cmd_stratify(args) -> Report:
    report = Report("stratify")
    A, digest = _load_skew(args)
    report.note(f"digest: {digest}")
    _describe_matrix(report, A)
    report.machine.update({"digest": digest, "n": str(A.n),
                           "symbolic": str(A.symbolic).lower()})
    try:
        simplex_bracket(A)
        jacobi_ok = True
        witness = ""
    except JacobiError as exc:
        jacobi_ok = False
        witness = str(exc)
    report.check("jacobi identity of the simplex bracket", jacobi_ok, witness)
    strat = check_face_stratification(A)
    _report_stratification(report, strat, A.n)
    return report


def _report_stratification(report: Report, strat, n: int) -> None:
    bad_a = [(i, l) for i, l, ok in strat.vanishing_checks if not ok]
    bad_b = [i for i, ok in strat.sum_checks if not ok]
    report.check("face condition (a): mu_l divides {mu_i,mu_l}",
                 not bad_a, f"{len(strat.vanishing_checks)} checks")
    report.check("face condition (b): (1 - sum mu) divides {mu_i, sum mu}",
                 not bad_b, f"{len(strat.sum_checks)} checks")
    for i, l in bad_a[:5]:
        report.note(f"    witness (a): pair ({i},{l})")
    for i in bad_b[:5]:
        report.note(f"    witness (b): index {i}")
    faces = enumerate_faces(n)
    by_dim: dict = {}
    for f in faces:
        by_dim[f.dimension] = by_dim.get(f.dimension, 0) + 1
    summary = ", ".join(f"dim {d}: {by_dim[d]}" for d in sorted(by_dim, reverse=True))
    report.note(f"faces: {len(faces)} total ({summary})")
    report.machine["strat_a_failures"] = str(len(bad_a))
    report.machine["strat_b_failures"] = str(len(bad_b))
    report.machine["faces_total"] = str(len(faces))
    for d in sorted(by_dim):
        report.machine[f"faces.dim{d}"] = str(by_dim[d])


_COMMANDS = {
    "jacobi": cmd_jacobi,
    "action-check": cmd_action_check,
    "fixed-set": cmd_fixed_set,
    "reduce": cmd_reduce,
    "simplex": cmd_simplex,
    "stratify": cmd_stratify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = _COMMANDS[args.command]
    start = time.perf_counter()
    try:
        report = handler(args)
    except _INTERNAL_ERRORS as exc:
        print(f"internal abort: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except _INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except JacobiError as exc:
        print(f"mathematical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ExprError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report.elapsed_ms = (time.perf_counter() - start) * 1000.0
    if args.seed is not None:
        report.machine.setdefault("seed", str(args.seed))
    sys.stdout.write(report.render(machine=args.machine))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
