import csv
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lamefrac.checks import judge, run_suite
from lamefrac.cli import build_parser, dumps17, main
from lamefrac.config import default_config, parse_config
from lamefrac.errors import ParseError, ValidationError

MINIMAL = '{"lame": {"mu": 1.0, "lambda": 0.5}, "s_values": [0.5]}'


def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.lame.mu == 1.0 and cfg.lame.lam == 0.5 and cfg.lame.delta0 == 1e-3
    assert cfg.s_values == (0.5,)
    assert cfg.grid.dims == (8, 8)
    assert cfg.to_dict()["lame"]["lambda"] == 0.5


def test_scalar_s_value_accepted():
    cfg = parse_config('{"lame": {"mu": 2, "lambda": 0}, "s_values": 0.25}')
    assert cfg.s_values == (0.25,)


@pytest.mark.parametrize("text,fragment", [
    ('{"lame": {"mu": 1.0, "lambda": 0.5}, "s_values": [0.5]', "line 1"),
    ('{"lame": {"mu": 1.0}, "s_values": [0.5]}', "lame.mu"),
    ('{"lame": {"mu": 1.0, "lambda": 0.5}}', "s_values"),
    ('{"lame": {"mu": 1.0, "lambda": 0.5}, "s_values": [0.5], "extra": 1}', "extra"),
    ('{"lame": {"mu": 1.0, "lambda": 0.5, "nu": 3}, "s_values": [0.5]}', "lame.nu"),
    ('[1, 2]', "object"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment.replace(".", r"\.")):
        parse_config(text)


@pytest.mark.parametrize("text", [
    '{"lame": {"mu": 1.0, "lambda": -3.0}, "s_values": [0.5]}',
    '{"lame": {"mu": 1.0, "lambda": 0.5}, "s_values": [1.0]}',
    '{"lame": {"mu": 1.0, "lambda": 0.5}, "s_values": []}',
    '{"lame": {"mu": 1.0, "lambda": 0.5}, "s_values": [0.5], "grid": {"nt": 7}}',
    '{"lame": {"mu": 1.0, "lambda": 0.5}, "s_values": [0.5], "y_ladder": {"ratio": 2}}',
    '{"lame": {"mu": 1.0, "lambda": 0.5}, "s_values": [0.5], "rng_seed": -1}',
    '{"lame": {"mu": 1.0, "lambda": 0.5}, "s_values": [0.5],'
    ' "mode": {"amplitude": [[0, 0], [0, 0]]}}',
])
def test_validation_errors(text):
    with pytest.raises(ValidationError):
        parse_config(text)


@given(st.floats(0.01, 10), st.floats(-30, 30), st.lists(st.floats(0.01, 0.99), min_size=1,
                                                         max_size=4))
def test_parse_accepts_valid_parameters(mu, lam, svals):
    text = json.dumps({"lame": {"mu": mu, "lambda": lam}, "s_values": svals})
    ok = mu >= 1e-3 and 2 * mu + lam >= 1e-3
    if ok:
        assert parse_config(text).s_values == tuple(svals)
    else:
        with pytest.raises(ValidationError):
            parse_config(text)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_dumps17_round_trips_floats(x):
    assert json.loads(dumps17({"v": x}))["v"] == x


def test_dumps17_non_finite():
    assert json.loads(dumps17([math.nan, math.inf])) == ["nan", "inf"]


@pytest.mark.parametrize("cmp,val,tol,target,ok", [
    ("le", 1.0, 1.0, None, True), ("le", 1.1, 1.0, None, False),
    ("gt", 1.0, 1.0, None, False), ("within", 1.1, 0.2, 1.0, True),
    ("finite", math.nan, None, None, False), ("eq", 1.0, None, 1.0, True),
])
def test_judge(cmp, val, tol, target, ok):
    assert judge(cmp, val, tol, target) is ok


def test_symbol_suite_passes_and_is_deterministic():
    a = run_suite(default_config(), "symbol")
    b = run_suite(default_config(), "symbol")
    assert a.reports and all(r.status == "pass" for r in a.reports)
    assert [r.to_dict() for r in a.reports] == [r.to_dict() for r in b.reports]


def test_tolerance_scale_tightens():
    ctx = run_suite(default_config(), "symbol", tolerance_scale=1e-30)
    assert any(r.status == "fail" for r in ctx.reports)


def test_parser_commands():
    ap = build_parser()
    assert ap.parse_args(["verify", "symbol"]).suite == "symbol"
    assert ap.parse_args(["run-all", "--seed", "3"]).seed == 3
    with pytest.raises(SystemExit):
        ap.parse_args(["verify", "nonsense"])


def test_cli_verify_writes_report(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["verify", "symbol", "--output-dir", str(out)])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report and all(r["pass"] for r in report)
    assert {"check", "criterion", "value", "tolerance", "inputs_digest"} <= set(report[0])
    assert "wall_time" not in json.dumps(report)
    assert json.loads((out / "timings.json").read_text())
    assert "PASS" in capsys.readouterr().out


def test_cli_report_independent_of_output_dir(tmp_path):
    main(["verify", "symbol", "--output-dir", str(tmp_path / "a")])
    main(["verify", "symbol", "--output-dir", str(tmp_path / "b")])
    assert ((tmp_path / "a" / "report.json").read_bytes()
            == (tmp_path / "b" / "report.json").read_bytes())


def test_cli_bad_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"lame": {"mu": 1.0, "lambda": -5}, "s_values": [0.5]}')
    assert main(["run-all", "--config", str(bad)]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["run-all", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["verify", "symbol", "--tolerance-scale", "0"]) == 2


def test_cli_export_profiles(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"lame": {"mu": 1.0, "lambda": 0.5}, "s_values": [0.5],'
                   ' "y_ladder": {"levels": 5, "fit_from": 0}}')
    assert main(["export-profiles", "--config", str(cfg), "--output-dir", str(tmp_path)]) == 0
    rows = list(csv.reader((tmp_path / "profiles" / "extension_s0.5.csv").open()))
    assert rows[0] == ["k1", "k2", "m", "y", "abs_value", "abs_dy_value", "dirichlet_err",
                       "neumann_err"]
    assert len(rows) > 1 and all(len(r) == 8 for r in rows)
