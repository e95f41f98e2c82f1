import json
import os
import subprocess
import sys
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ptower import __version__
from ptower.cli import main
from ptower.dsl import JobConfig, parse_config, parse_polynomial, render
from ptower.errors import ParseError, ValidationError
from ptower.fracpoly import FracRing, reduce_mod_p

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

BASE = """p = 2
precision = 4
cap = 4
variables = [x, y]
ideal = ["p*x", "p*y"]
mode = torsion_reduced
levels = 2
"""


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, text, name="job.cfg"):
    f = tmp_path / name
    f.write_text(text)
    return str(f)


# --- parsing ---------------------------------------------------------------------

def test_parse_example_configs():
    cfg = parse_config(BASE)
    assert cfg.variables == ("x", "y") and cfg.ideal == ("p*x", "p*y")
    assert cfg.tower_mode == "TorsionReduced" and cfg.seed == 0
    det = parse_config((CONFIGS / "binomial_monomial.cfg").read_text())
    from ptower.idealkit import IdealPresentation
    ring = det.ring()
    assert IdealPresentation(det.generators(ring)).describe() == "Binomial+Monomial"


def test_comments_and_whitespace():
    text = "# header\n" + BASE.replace("levels = 2", "levels   =   2   # two levels") + "\n\n"
    assert parse_config(text).levels == 2


def test_polynomial_language():
    R = FracRing(3, ["x", "y"], 6, 3)
    x, y = R.var("x"), R.var("y")
    assert parse_polynomial("x*y - 2*(x + p)^2", R) == x * y - 2 * (x + 3) ** 2
    assert parse_polynomial("-x^3 + +y", R) == -(x ** 3) + y
    assert parse_polynomial("p", R) == R.const(3)


@pytest.mark.parametrize("text,col", [("x + * y", 5), ("x + q", 5), ("(x + y", 7), ("x ^ y", 5),
                                      ("x $ y", 3)])
def test_polynomial_errors_have_columns(text, col):
    R = FracRing(3, ["x", "y"], 6, 3)
    with pytest.raises(ParseError) as exc:
        parse_polynomial(text, R)
    assert exc.value.col == col


@pytest.mark.parametrize("edit,line", [
    (("mode = torsion_reduced", "mode = sideways"), 6),
    (("levels = 2", "levels = two"), 7),
    (("levels = 2", "levels = 2\nlevels = 3"), 8),
    (("levels = 2", "level = 2"), 7),
    (('ideal = ["p*x", "p*y"]', 'ideal = ["p*x", p*y]'), 5),
    (('ideal = ["p*x", "p*y"]', 'ideal = ["p*x",, "p*y"]'), 5),
    (("variables = [x, y]", "variables = [x, y"), 4),
    (('ideal = ["p*x", "p*y"]', 'ideal = ["p*x", "p*u"]'), 5),
])
def test_config_parse_errors(edit, line):
    with pytest.raises(ParseError) as exc:
        parse_config(BASE.replace(*edit))
    assert exc.value.line == line
    assert exc.value.col is not None
    assert str(exc.value).startswith(f"line {line}, col ")


def test_missing_key():
    with pytest.raises(ParseError, match="missing key 'levels'"):
        parse_config(BASE.replace("levels = 2\n", ""))


def test_polynomial_column_is_absolute():
    with pytest.raises(ParseError) as exc:
        parse_config(BASE.replace('"p*y"', '"p*u"'))
    assert exc.value.col == BASE.splitlines()[4].index('"p*y"') + 4


@pytest.mark.parametrize("edit,msg", [
    (("p = 2", "p = 4"), "p = 4 is not prime"),
    (("precision = 4", "precision = 1"), "precision"),
    (("cap = 4", "cap = 1"), "cap"),
    (("variables = [x, y]", "variables = [x, x]"), "distinct"),
    (("variables = [x, y]", "variables = [x, t]"), "reserved"),
    (('ideal = ["p*x", "p*y"]', 'ideal = ["16*x", "p*y"]'), "zero"),
    (('ideal = ["p*x", "p*y"]', "ideal = []"), "at least one"),
    (("levels = 2", "levels = -1"), "nonnegative"),
])
def test_validation_errors(edit, msg):
    with pytest.raises(ValidationError, match=msg):
        parse_config(BASE.replace(*edit))


NAMES = st.lists(st.sampled_from(["a", "b", "x", "y", "z", "w", "u1", "v_2"]), min_size=1, max_size=4,
                 unique=True)


@st.composite
def configs(draw):
    p = draw(st.sampled_from([2, 3, 5, 7]))
    names = draw(NAMES)

    def poly():
        terms = draw(st.lists(st.tuples(st.integers(1, 9), st.lists(st.sampled_from(names), max_size=3)),
                              min_size=1, max_size=3))
        parts = []
        for c, vs in terms:
            parts.append("*".join([str(c)] + vs + ["p"] * draw(st.integers(0, 1))))
        body = " + ".join(parts)
        # a leading monomial with coefficient 1 keeps the polynomial nonzero
        return f"{names[0]}^{draw(st.integers(1, 3))} + {body}" if draw(st.booleans()) else names[0]

    ideal = tuple(poly() for _ in range(draw(st.integers(1, 3))))
    sop = tuple(poly() for _ in range(draw(st.integers(1, 2)))) if draw(st.booleans()) else None
    return JobConfig(
        p=p, precision=draw(st.integers(2, 6)), cap=draw(st.integers(p, p + 6)), variables=tuple(names),
        ideal=ideal, mode=draw(st.sampled_from(["torsion_free", "torsion_reduced"])),
        levels=draw(st.integers(0, 4)), sop=sop, seed=draw(st.integers(0, 10 ** 6)))


@given(configs())
def test_render_parse_round_trip(cfg):
    assert parse_config(render(cfg)) == cfg
    assert render(parse_config(render(cfg))) == render(cfg)


# --- commands and exit codes -------------------------------------------------------

def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == f"ptower {__version__}"


def test_usage_errors(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate", str(CONFIGS / "node.cfg")])
    assert exc.value.code == 3
    assert run_cli(capsys, "build", str(tmp_path / "missing.cfg"))[0] == 3
    bad = write(tmp_path, BASE.replace("p = 2", "p = 4"))
    code, _, err = run_cli(capsys, "build", bad)
    assert code == 3 and "not prime" in err
    bad = write(tmp_path, BASE.replace("levels = 2", "levels = two"))
    code, _, err = run_cli(capsys, "build", bad)
    assert code == 3 and "line 7" in err


def test_build_report(capsys):
    code, out, _ = run_cli(capsys, "build", str(CONFIGS / "torsion_monomial.cfg"), "--level", "1",
                           "--format", "json", "--no-timing")
    assert code == 0
    rep = json.loads(out)
    assert list(rep) == ["version", "config", "command", "results", "elapsed_ms"]
    assert rep["elapsed_ms"] is None and rep["command"] == "build"
    assert rep["results"][0]["witness"] == "(p^(1/2) * x^(1/2), p^(1/2) * y^(1/2)) ramification 2"
    for r in rep["results"]:
        assert list(r) == ["check", "status", "window", "witness"]


def test_check_stable_failure_and_witness(capsys):
    path = CONFIGS / "shifted_line.cfg"
    code, out, _ = run_cli(capsys, "check-stable", str(path), "--format", "json", "--no-timing")
    assert code == 1
    res = {r["check"]: r for r in json.loads(out)["results"]}
    assert res["phi_stable"]["status"] == "NotStable"
    wit = res["phi_stable"]["witness"]
    assert wit.endswith("has normal form 6")
    # re-evaluate: phi(x + 2) = x^2 + 2 is 4 + 2 = 6 != 0 after x -> -2, and not in the ideal
    cfg = parse_config(path.read_text())
    ring = cfg.ring()
    from ptower.idealkit import IdealPresentation
    I = IdealPresentation(cfg.generators(ring))
    assert not I.contains(parse_polynomial("x^2 + 2", ring))
    assert I.contains(parse_polynomial("x^2 + 2 - 6", ring))


def test_check_stable_ok(capsys):
    code, out, _ = run_cli(capsys, "check-stable", str(CONFIGS / "binomial_monomial.cfg"))
    assert code == 0 and "[Stable(6)] phi_stable" in out and "Binomial+Monomial" in out


def test_tilt_refuses_torsion_mode(capsys):
    code, _, err = run_cli(capsys, "tilt", str(CONFIGS / "torsion_monomial.cfg"))
    assert code == 3 and "torsion_free" in err


def test_tilt_report(capsys):
    code, out, _ = run_cli(capsys, "tilt", str(CONFIGS / "node.cfg"), "--max-level", "1", "--no-timing")
    assert code == 0
    assert "F_2[[t^(1/2), x^(1/2), y^(1/2)]]/(x^(1/2) * y^(1/2))" in out


def test_hypothesis_failure_is_a_failed_result(capsys, tmp_path):
    cfg = write(tmp_path, BASE.replace('["p*x", "p*y"]', '["x^2"]').replace("torsion_reduced", "torsion_free"))
    code, out, _ = run_cli(capsys, "verify", cfg, "--no-timing")
    assert code == 1 and "[Failed] hypotheses" in out and "not reduced" in out


def test_torsion_report(capsys):
    code, out, _ = run_cli(capsys, "torsion", str(CONFIGS / "torsion_monomial.cfg"), "--level", "2",
                           "--no-timing")
    assert code == 0 and "(x^(1/4), y^(1/4))" in out


def test_delta_check_obstruction_witness(capsys):
    path = CONFIGS / "px_line.cfg"
    code, out, _ = run_cli(capsys, "delta-check", str(path), "--format", "json", "--no-timing")
    assert code == 1
    res = {r["check"]: r for r in json.loads(out)["results"]}
    assert res["delta identities"]["status"] == "Holds"
    assert res["delta on quotient"]["status"] == "Obstruction"
    assert res["delta on quotient"]["witness"].startswith("x^2 ∈ (p, p * x)")
    # re-evaluate: x^2 is not in (p, px) on the truncation
    cfg = parse_config(path.read_text())
    R = cfg.presentation()
    assert not R.quotient(mod_p=True).contains(reduce_mod_p(parse_polynomial("x^2", R.ring)).terms)


def test_fsplit_report(capsys):
    code, out, _ = run_cli(capsys, "fsplit", str(CONFIGS / "node.cfg"), "--no-timing")
    assert code == 0 and "[SplitsUpTo(4)] phi_splits" in out and "x^2 -> x" in out


def test_limcm_csv(capsys, tmp_path):
    csv_path = tmp_path / "t.csv"
    code, out, _ = run_cli(capsys, "limcm", str(CONFIGS / "two_planes.cfg"), "--max-level", "1",
                           "--csv", str(csv_path), "--no-timing")
    assert code == 0 and "[ConsistentWithLimCM] verdict" in out
    assert csv_path.read_text().splitlines()[0] == "n,i,length,nu,ratio"


def test_limcm_torsion_exploratory(capsys):
    code, out, _ = run_cli(capsys, "limcm", str(CONFIGS / "torsion_monomial.cfg"), "--max-level", "1")
    assert code == 0 and "[Exploratory] verdict" in out


def test_output_is_deterministic(capsys):
    args = ["delta-check", str(CONFIGS / "node.cfg"), "--format", "json", "--no-timing", "--seed", "7"]
    a = run_cli(capsys, *args)
    b = run_cli(capsys, *args)
    assert a == b


def test_seed_defaults_to_config(capsys, tmp_path):
    cfg = write(tmp_path, (CONFIGS / "node.cfg").read_text() + "seed = 7\n")
    a = run_cli(capsys, "delta-check", cfg, "--format", "json", "--no-timing")
    b = run_cli(capsys, "delta-check", str(CONFIGS / "node.cfg"), "--format", "json", "--no-timing",
                "--seed", "7")
    assert json.loads(a[1])["results"] == json.loads(b[1])["results"]


def test_console_script_byte_identical():
    exe = [sys.executable, "-m", "ptower.cli"]
    env = dict(os.environ)
    args = ["verify", str(CONFIGS / "torsion_monomial.cfg"), "--format", "json", "--no-timing"]
    a = subprocess.run(exe + args, capture_output=True, env=env)
    b = subprocess.run(exe + args, capture_output=True, env=env)
    assert a.returncode == 0 and a.stdout == b.stdout
    assert json.loads(a.stdout)["results"]
