"""CLI commands, exit codes, report round-trips and determinism."""

import subprocess
import sys
import textwrap

from poissonfix.cli import main
from poissonfix.problemfile import parse_problem_text


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_jacobi_pass(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "jacobi", str(fixtures_dir / "so3_involution.prob"))
    assert code == 0
    assert "status: PASS" in out


def test_jacobi_fail_with_witness(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "jacobi",
                           str(fixtures_dir / "jacobi_violation.prob"), "--machine")
    assert code == 1
    assert "status: FAIL" in out
    assert "witness_triple=x,y,z" in out
    assert "witness_defect=-2*x*y - x" in out


def test_action_check_pass(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "action-check",
                           str(fixtures_dir / "symplectic_r4_z2.prob"))
    assert code == 0
    assert "status: PASS" in out


def test_action_check_rejects_antipoisson(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "action-check",
                           str(fixtures_dir / "antipoisson_plane.prob"), "--machine")
    assert code == 1
    assert "witness=" in out


def test_action_check_trivial_group(capsys, tmp_path):
    path = tmp_path / "trivial.prob"
    path.write_text(textwrap.dedent("""\
        [chart]
        q p
        [bracket]
        {q,p} = 1
        [action]
        generator = 1 0; 0 1
    """))
    code, out, _ = run_cli(capsys, "action-check", str(path))
    assert code == 0


def test_fixed_set_torus(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "fixed-set",
                           str(fixtures_dir / "quadratic_c2_torus.prob"), "--machine")
    assert code == 0
    assert "dim=2" in out
    assert "basis.0=1 0 0 0" in out


def test_reduce_embeds_induced_table_that_reparses(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "reduce",
                           str(fixtures_dir / "symplectic_r4_z2.prob"),
                           "--points", "10", "--trials", "3")
    assert code == 0
    start = out.index("induced structure on the fixed set:")
    block = []
    for line in out[start:].splitlines()[1:]:
        if line.startswith("  "):
            block.append(line[2:])
        elif block:
            break
    pf = parse_problem_text("\n".join(block))
    induced = pf.structure()
    assert [v.name for v in induced.chart.variables] == ["q1", "p1"]
    assert induced.pi[0][1] == induced.chart.function("1")


def test_reduce_nonpoisson_exit_code(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "reduce",
                           str(fixtures_dir / "antipoisson_plane.prob"))
    assert code == 1
    assert "FAIL" in out


def test_reduce_torus_fixture(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "reduce",
                           str(fixtures_dir / "quadratic_c2_torus.prob"),
                           "--points", "10", "--trials", "3", "--machine")
    assert code == 0
    assert "induced_chart=z0 zb0" in out


def test_simplex_symbolic_n1(capsys):
    code, out, _ = run_cli(capsys, "simplex", "--n", "1", "--symbolic")
    assert code == 0
    assert "{mu0,mu1} = -a01*mu0^2*mu1 - a01*mu0*mu1^2 + a01*mu0*mu1" in out


def test_simplex_rejects_large_symbolic(capsys):
    code = main(["simplex", "--n", "3", "--symbolic"])
    capsys.readouterr()
    assert code == 2


def test_simplex_a_file(capsys, tmp_path):
    afile = tmp_path / "A.txt"
    afile.write_text("0 1/2\n-1/2 0\n")
    code, out, _ = run_cli(capsys, "simplex", "--n", "1", "--a-file", str(afile))
    assert code == 0
    assert "1/2*mu0*mu1" in out


def test_simplex_rejects_nonskew_a_file(capsys, tmp_path):
    afile = tmp_path / "A.txt"
    afile.write_text("1 0\n0 1\n")
    code = main(["simplex", "--n", "1", "--a-file", str(afile)])
    capsys.readouterr()
    assert code == 2


def test_stratify_n2(capsys):
    code, out, _ = run_cli(capsys, "stratify", "--n", "2", "--seed", "7")
    assert code == 0
    assert "faces: 7 total" in out


def test_two_factor_torus_file(capsys, tmp_path):
    path = tmp_path / "t2.prob"
    path.write_text(textwrap.dedent("""\
        [chart]
        z0 z1 z2 zb0 zb1 zb2
        [bracket]
        {z0,z1} = 1/2*z0*z1
        {z0,z2} = -2*z0*z2
        {z1,z2} = 3*z1*z2
        [torus]
        pair = z0 zb0
        pair = z1 zb1
        pair = z2 zb2
        weights = 0 1 0
        weights = 0 0 1
    """))
    code, out, _ = run_cli(capsys, "action-check", str(path))
    assert code == 0
    code, out, _ = run_cli(capsys, "fixed-set", str(path), "--machine")
    assert code == 0
    assert "dim=2" in out
    code, out, _ = run_cli(capsys, "reduce", str(path),
                           "--points", "10", "--trials", "3", "--machine")
    assert code == 0
    assert "induced_chart=z0 zb0" in out


def test_missing_file_is_input_error(capsys):
    code = main(["jacobi", "does-not-exist.prob"])
    _, err = capsys.readouterr()
    assert code == 2
    assert "input error" in err


def test_malformed_file_is_input_error(capsys, tmp_path):
    path = tmp_path / "bad.prob"
    path.write_text("[chart]\nx y\n[bracket]\n{x,y} = x +\n")
    code = main(["jacobi", str(path)])
    _, err = capsys.readouterr()
    assert code == 2
    assert "line" in err or "position" in err


def test_bracket_order_enforced(capsys, tmp_path):
    path = tmp_path / "order.prob"
    path.write_text("[chart]\nx y\n[bracket]\n{y,x} = 1\n")
    code = main(["jacobi", str(path)])
    capsys.readouterr()
    assert code == 2


def test_machine_runs_are_byte_identical(capsys, fixtures_dir):
    argv = ["reduce", str(fixtures_dir / "so3_involution.prob"),
            "--seed", "11", "--points", "15", "--trials", "4", "--machine"]
    code1, out1, _ = run_cli(capsys, *argv)
    code2, out2, _ = run_cli(capsys, *argv)
    assert code1 == code2 == 0
    assert out1 == out2
    argv = ["simplex", "--n", "2", "--seed", "5", "--machine"]
    code1, out1, _ = run_cli(capsys, *argv)
    code2, out2, _ = run_cli(capsys, *argv)
    assert code1 == code2 == 0
    assert out1 == out2


def test_file_params_used_as_defaults(capsys, fixtures_dir):
    # the fixture sets points = 100 and trials = 20 in [params]
    code, out, _ = run_cli(capsys, "reduce",
                           str(fixtures_dir / "symplectic_r4_z2.prob"), "--machine")
    assert code == 0
    assert "points=100" in out
    assert "trials=20" in out
    # explicit flags win over file params
    code, out, _ = run_cli(capsys, "reduce",
                           str(fixtures_dir / "symplectic_r4_z2.prob"),
                           "--points", "7", "--machine")
    assert code == 0
    assert "points=7" in out


def test_global_flags_before_subcommand(capsys, fixtures_dir):
    code1, out1, _ = run_cli(capsys, "--seed", "5", "simplex", "--n", "1")
    code2, out2, _ = run_cli(capsys, "simplex", "--n", "1", "--seed", "5")
    assert code1 == code2 == 0
    # same seed, same random matrix, same report body
    body1 = "\n".join(out1.splitlines()[:-1])
    body2 = "\n".join(out2.splitlines()[:-1])
    assert body1 == body2


def test_console_script_smoke():
    proc = subprocess.run(
        [sys.executable, "-m", "poissonfix", "simplex", "--n", "1", "--symbolic"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "status: PASS" in proc.stdout


def test_help_and_version():
    for flag in ("--help", "--version"):
        proc = subprocess.run([sys.executable, "-m", "poissonfix", flag],
                              capture_output=True, text=True)
        assert proc.returncode == 0
    proc = subprocess.run([sys.executable, "-m", "poissonfix", "reduce", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "--machine" in proc.stdout
