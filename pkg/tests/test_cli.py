import csv
import io
import json
import math
import subprocess
import sys

import jsonschema
import pytest

from mdlt import AccuracyWarning
from mdlt.cli import load_schema, main

VOLTERRA = {"problem": "volterra", "A": 1, "B": 1, "C": 1, "kernel": "one", "source": "one", "grid": [[1, 1]]}


@pytest.fixture
def run(tmp_path):
    """Run a command in-process; returns (exit code, output text)."""

    def go(command, doc, fmt="csv", seed=None, raw=None):
        src = tmp_path / "in.json"
        src.write_text(raw if raw is not None else json.dumps(doc))
        out = tmp_path / f"out.{fmt}"
        if out.exists():
            out.unlink()
        argv = [command, "--input", str(src), "--output", str(out), "--format", fmt]
        if seed is not None:
            argv += ["--seed", str(seed)]
        code = main(argv)
        return code, out.read_text() if out.exists() else None

    return go


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# ------------------------------------------------------------ commands


def test_transform_one(run):
    code, text = run("transform", {"function": "one", "lambda": [[1, 1], [2, 2]]})
    assert code == 0
    assert text.splitlines()[0] == "lam1_re,lam1_im,lam2_re,lam2_im,value1_re,value1_im,mode,tail_estimate,converged"
    got = [float(r["value1_re"]) for r in rows(text)]
    assert got == pytest.approx([1.0, 0.25], abs=1e-8)


def test_transform_exp_decay(run):
    code, text = run("transform", {"function": "exp_decay(1)", "lambda": [[1, 1]]})
    assert code == 0 and float(rows(text)[0]["value1_re"]) == pytest.approx(0.25, abs=1e-9)


def test_transform_fresnel_iterated(run):
    doc = {"function": "fresnel2d", "lambda": [[0, 0]], "quadrature": {"mode": "iterated", "rel_tol": 1e-6}}
    code, text = run("transform", doc)
    assert code == 0
    r = rows(text)[0]
    assert r["mode"] == "iterated" and abs(float(r["value1_re"]) - math.pi / 8) < 1e-5


def test_transform_divergence_exits_2(run):
    code, text = run("transform", {"function": "exp_decay(1)", "lambda": [[-2, -2]]})
    assert code == 2 and rows(text)[0]["converged"] == "false"


def test_invert_bromwich(run):
    code, text = run("invert", {"transform": "sep_pole", "method": "bromwich", "t": [[2, 3]]})
    assert code == 0 and float(rows(text)[0]["value1_re"]) == pytest.approx(6.0, abs=1e-5)


def test_invert_post_widder(run):
    doc = {"transform": "sep_shifted_pole", "method": "post_widder", "post_widder": {"k": 32}, "t": [[1, 1]]}
    code, text = run("invert", doc)
    value = float(rows(text)[0]["value1_re"])
    assert code == 0 and value == pytest.approx(0.131213505172, abs=1e-11)
    assert abs(value - math.exp(-2)) < 5e-3


def test_invert_problem_definition(run):
    problem = {k: v for k, v in VOLTERRA.items() if k != "grid"}
    doc = {"problem_definition": problem, "method": "bromwich", "t": [[1, 1]]}
    code, text = run("invert", doc)
    assert code == 0 and float(rows(text)[0]["value1_re"]) == pytest.approx(2.2795853023360673, abs=1e-3)


def test_pairs_ml_and_wright(run):
    code, text = run("pairs", {"pair": "ml", "params": {"alpha": 1, "beta": 1, "omega": 1}, "lambda": [[2, 2]]})
    r = rows(text)[0]
    assert code == 0 and float(r["closed_re"]) == 1.0 and float(r["rel_error"]) < 1e-6
    code, text = run("pairs", {"pair": "wright", "params": {"gamma": 0.5, "s": 1}, "lambda": [[1, 1]]})
    r = rows(text)[0]
    assert code == 0 and float(r["closed_re"]) == pytest.approx(math.exp(-2), rel=1e-11)
    assert float(r["rel_error"]) < 1e-3


def test_pairs_below_abscissa_is_config_error(run, capsys):
    code, text = run("pairs", {"pair": "ml", "params": {"alpha": 1, "beta": 1, "omega": 1}, "lambda": [[0.5, 2]]})
    assert code == 1 and text is None
    assert "Re lambda must exceed" in capsys.readouterr().err


def test_pairs_tolerance_breach_exits_2(run):
    doc = {"pair": "wright", "params": {"gamma": 0.5}, "lambda": [[1, 1]], "tolerance": 1e-15}
    assert run("pairs", doc)[0] == 2


def test_region(run):
    code, text = run("region", {"function": "exp_decay(1)", "probes": [[0.5, 0.5], [-2, -2]]})
    assert code == 0 and [r["verdict"] for r in rows(text)] == ["in_Ω_abs", "outside"]


def test_region_with_abscissa(run):
    doc = {"function": "exp_decay(3)", "probes": [[0, 0]], "abscissa_probes": [-4, -3.5, -3, -2.5, -2]}
    code, text = run("region", doc, fmt="json")
    out = json.loads(text)
    assert code == 0 and out["rows"][0]["verdict"] == "in_Ω_abs"
    assert all(-3.5 <= a <= -2.5 for a in out["summary"]["abs_abscissa"])


def test_solve_volterra(run):
    code, text = run("solve", VOLTERRA)
    r = rows(text)[0]
    assert code == 0 and abs(float(r["u1_re"]) - 2.279585) < 1e-3


def test_solve_decay_failure_exits_2(run):
    with pytest.warns(AccuracyWarning):
        code, text = run("solve", {**VOLTERRA, "eps": 1.0}, fmt="json")
    out = json.loads(text)
    assert code == 2 and out["exit_code"] == 2 and out["summary"]["decay_ok"] is False


def test_schedule(run):
    code, text = run("schedule", {"alpha": [3, 2, 0]})
    assert code == 0
    assert text == (
        "entry,zeroed_axis\n"
        '"u^(3,0,0)(t1,0,t3)",2\n"u^(3,1,0)(t1,0,t3)",2\n'
        '"u^(0,0,0)(0,t2,t3)",1\n"u^(1,0,0)(0,t2,t3)",1\n"u^(2,0,0)(0,t2,t3)",1\n'
    )
    code, text = run("schedule", {"alpha": [3, 2, 0], "axis_order": [2, 3, 1]}, fmt="json")
    assert json.loads(text)["summary"]["count"] == 5


# ------------------------------------------------------------ contract


@pytest.mark.parametrize(
    "command,doc,raw",
    [
        ("transform", {"lambda": [[1, 1]]}, None),  # missing function
        ("transform", {"function": "nope", "lambda": [[1, 1]]}, None),
        ("transform", {"function": "one", "lambda": [[1, 1, 1]]}, None),
        ("invert", {"transform": "sep_pole", "method": "laplace", "t": [[1, 1]]}, None),
        ("schedule", {"alpha": [0, 0]}, None),
        ("schedule", {"alpha": [1, 2], "axis_order": [1, 1]}, None),
        ("solve", {**VOLTERRA, "D": 1}, None),
        ("schedule", None, "{not json"),
        ("solve", {"problem": "volterra", "A": [[1, 2]], "B": 1, "C": 1, "grid": [[1, 1]]}, None),
    ],
)
def test_malformed_input_exits_1(run, capsys, command, doc, raw):
    assert run(command, doc, raw=raw)[0] == 1
    assert capsys.readouterr().err.startswith("mdlt:")


def test_bad_arguments_exit_1(tmp_path, capsys):
    assert main(["frobnicate", "--input", "x", "--output", "y"]) == 1
    assert main(["schedule", "--input", str(tmp_path / "missing.json"), "--output", "-"]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_json_output_matches_schema(run):
    schema = load_schema("output")
    for command, doc in [
        ("transform", {"function": "one", "lambda": [[1, 1]]}),
        ("transform", {"function": "exp_decay(1)", "lambda": [[-2, -2]]}),
        ("schedule", {"alpha": [2, 1]}),
        ("region", {"function": "one", "probes": [[1, 1]]}),
    ]:
        _, text = run(command, doc, fmt="json")
        jsonschema.validate(json.loads(text), schema)


def test_seeded_output_is_deterministic(run):
    doc = {"function": "exp_decay(1)", "lambda": {"random": {"low": [0.5, 0.5], "high": [3, 3], "count": 4}}}
    a = run("transform", doc, seed=7)[1]
    b = run("transform", doc, seed=7)[1]
    c = run("transform", doc, seed=8)[1]
    assert a == b and a != c


def test_console_script(tmp_path):
    src = tmp_path / "s.json"
    src.write_text(json.dumps({"alpha": [1, 0]}))
    out = subprocess.run(
        [sys.executable, "-m", "mdlt.cli", "schedule", "--input", str(src), "--output", "-"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert out.returncode == 0 and out.stdout == 'entry,zeroed_axis\n"u^(0,0)(0,t2)",1\n'
