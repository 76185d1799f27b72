import json
from pathlib import Path

import numpy as np
import pytest

from momtransform import hausdorff, transforms
from momtransform.cli import RunConfig, build_parser, main, run
from momtransform.curves import Box, HilbertCurve
from momtransform.errors import InputError, MomentTransformError, PreconditionError
from momtransform.io import (
    dumps_report,
    load_input,
    measure_from_spec,
    measure_to_spec,
    moment_csv,
    read_moment_csv,
)
from momtransform.measures import Measure, moments

GOLDEN = Path(__file__).parent / "golden"
CASES = json.loads((GOLDEN / "cases.json").read_text())


def _opt(args, flag, default, cast=float):
    return cast(args[args.index(flag) + 1]) if flag in args else default


def library_exit(case):
    """Verdict of the library call behind each command, as an exit code."""
    args = case["args"]
    depth = _opt(args, "--depth", 10, int)
    deg = _opt(args, "--max-degree", 8, int)
    tol = _opt(args, "--tol", 1e-6)
    try:
        obj = load_input(GOLDEN / case["input"])
        cmd = case["command"]
        if cmd in ("check-hausdorff", "reconstruct"):
            m = obj if not isinstance(obj, Measure) else moments(obj, deg)
            if cmd == "check-hausdorff":
                return 0 if hausdorff.check_hausdorff(m).accepted else 1
            try:
                hausdorff.reconstruct(m)
                return 0
            except PreconditionError:
                return 1
        curve = HilbertCurve(obj.density.box if obj.density is not None else Box.unit(obj.n), depth)
        if cmd == "pipeline":
            return 0 if transforms.g_moment_pipeline(obj, curve, deg, tol).passed else 1
        if cmd == "to-unit":
            return 0 if hausdorff.check_hausdorff(transforms.transform_to_unit(obj, curve, deg)).accepted else 1
        if cmd == "from-unit":
            transforms.lift_from_unit(obj, HilbertCurve(Box.unit(2), depth), deg)
            return 0
        if cmd == "leb-direction":
            return 0 if transforms.lebesgue_direction(obj, curve, deg, tol)[1].passed else 1
        if cmd == "full-support":
            return 0 if transforms.full_support_curve(obj, curve, deg, tol)[1].passed else 1
        if cmd == "rn-transform":
            rep = transforms.rn_transform(obj, _opt(args, "--epsilon", 0.25), deg, None, depth)
            return 0 if rep.verdict == "pass" else 1
    except (InputError, PreconditionError):
        return 2
    except MomentTransformError:
        return 1
    raise AssertionError(f"unhandled command {case['command']}")


def run_case(case, out):
    return main([case["command"], "--input", str(GOLDEN / case["input"]), "--output-dir", str(out), *case["args"]])


def test_twenty_golden_cases():
    assert len(CASES) == 20


@pytest.mark.parametrize("case", CASES, ids=[f"{c['command']}:{c['input']}" for c in CASES])
def test_golden_exit_codes(case, tmp_path):
    code = run_case(case, tmp_path)
    assert code == case["exit"]
    assert code == library_exit(case)
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["exit_code"] == code
    if code == 2:
        assert report["error"]


def test_reports_are_byte_identical(tmp_path):
    for case in CASES:
        a, b = tmp_path / "a", tmp_path / "b"
        run_case(case, a)
        run_case(case, b)
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
        if (a / "moments.csv").exists():
            assert (a / "moments.csv").read_bytes() == (b / "moments.csv").read_bytes()


def test_report_provenance(tmp_path):
    case = CASES[8]
    assert case["command"] == "pipeline"
    run_case(case, tmp_path)
    rep = json.loads((tmp_path / "report.json").read_text())
    assert set(rep["versions"]) == {"momtransform", "numpy", "scipy"}
    cfg = rep["config"]
    assert cfg["depth"] == 10 and cfg["max_degree"] == 6 and cfg["tol_psd"] == 1e-9
    assert rep["result"]["max_residual"] <= 1e-10
    assert rep["result"]["provenance"]["curve"]["depth"] == 10


def test_witness_in_reject_report(tmp_path):
    main(["check-hausdorff", "--input", str(GOLDEN / "bad_variance.csv"), "--output-dir", str(tmp_path)])
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["result"]["verdict"] == "reject"
    assert rep["result"]["witness"]["value"] < 0


def test_schema_error_names_the_field(tmp_path, capsys):
    main(["to-unit", "--input", str(GOLDEN / "negative_weight.json"), "--output-dir", str(tmp_path)])
    assert "atoms/0/weight" in capsys.readouterr().err


def test_json_syntax_error_has_line_and_column(tmp_path, capsys):
    main(["to-unit", "--input", str(GOLDEN / "broken.json"), "--output-dir", str(tmp_path)])
    assert "broken.json:2:1" in capsys.readouterr().err


def test_format_flag(tmp_path):
    case = dict(CASES[10], args=CASES[10]["args"] + ["--format", "csv"])
    run_case(case, tmp_path)
    assert not (tmp_path / "report.json").exists()
    assert read_moment_csv(tmp_path / "moments.csv").values[0] == 1.0


@pytest.mark.parametrize("field,value", [("depth", 0), ("depth", 21), ("max_degree", 33), ("tol", 0.0),
                                         ("tol_psd", -1.0)])
def test_config_ranges(field, value, tmp_path):
    cfg = RunConfig("check-hausdorff", str(GOLDEN / "dirac_one.json"), str(tmp_path), **{field: value})
    assert run(cfg) == 2


def test_threads_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("MT_THREADS", "3")
    cfg = RunConfig("check-hausdorff", str(GOLDEN / "dirac_one.json"), str(tmp_path))
    assert run(cfg) == 0
    assert json.loads((tmp_path / "report.json").read_text())["config"]["threads"] == 3
    monkeypatch.setenv("MT_THREADS", "many")
    assert run(RunConfig("check-hausdorff", str(GOLDEN / "dirac_one.json"), str(tmp_path))) == 2


def test_parser_defaults():
    args = build_parser().parse_args(["pipeline", "--input", "x.json"])
    assert (args.depth, args.max_degree, args.tol, args.tol_psd, args.seed, args.format) == (10, 8, 1e-6, 1e-9, 0, "both")


# -- io helpers -----------------------------------------------------------------

def test_spec_round_trip(rng):
    for mu in (Measure.atomic(rng.random((4, 2)), rng.random(4) + 0.1),
               Measure.grid_density(Box((0.0, -1.0), (2.0, 1.0)), rng.random((3, 2))),
               Measure.lebesgue_unit(0.5),
               Measure.mixture(0.25, [[0.5], [1.0]], [0.25, 0.5])):
        back = measure_from_spec(json.loads(json.dumps(measure_to_spec(mu))))
        assert np.array_equal(moments(back, 4).values, moments(mu, 4).values)


def test_csv_round_trip(tmp_path, rng):
    ms = moments(Measure.atomic(rng.random((3, 2)), rng.random(3) + 0.1), 3)
    p = tmp_path / "m.csv"
    p.write_text(moment_csv(ms))
    back = read_moment_csv(p)
    assert np.array_equal(back.values, ms.values)
    assert np.array_equal(back.exponents, ms.exponents)
    assert p.read_text().splitlines()[0] == "alpha,value"


def test_csv_errors_carry_line_numbers(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("degree,value\n0,1.0\n1,abc\n")
    with pytest.raises(InputError, match="bad.csv:3"):
        read_moment_csv(p)


def test_dumps_report_is_canonical():
    a = dumps_report({"b": np.float64(1.5), "a": [np.int64(2), np.array([1.0])]})
    assert a == '{\n  "a": [\n    2,\n    [\n      1.0\n    ]\n  ],\n  "b": 1.5\n}\n'
