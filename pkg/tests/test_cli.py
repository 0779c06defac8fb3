import json
import math

import pytest

from vexlab import cli


def _run(tmp_path, config, *extra, monkeypatch=None):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(config))
    return cli.main(["--config", str(cfg), "--out", str(tmp_path / "out"), *extra])


def test_norm_command(tmp_path, capsys):
    assert _run(tmp_path, {"command": "norm", "f": "sin(x)", "p": 2}) == 0
    doc = json.loads((tmp_path / "out" / "norm.json").read_text())
    assert doc["value"] == pytest.approx(math.sqrt(math.pi), abs=1e-8)
    assert doc["p"] == "p=2"
    assert json.loads(capsys.readouterr().out) == doc


def test_numeric_and_text_exponents_named_alike(tmp_path):
    _run(tmp_path, {"command": "norm", "f": "1", "p": 2})
    a = (tmp_path / "out" / "norm.json").read_text()
    _run(tmp_path, {"command": "norm", "f": "1", "p": "2"})
    assert (tmp_path / "out" / "norm.json").read_text() == a


def test_kfunc_command(tmp_path):
    assert _run(tmp_path, {"command": "kfunc", "f": "cos(x)", "delta": 0.5, "r": 1}) == 0
    doc = json.loads((tmp_path / "out" / "kfunc.json").read_text())
    assert doc["K"] == pytest.approx(0.5 * math.sqrt(math.pi), rel=1e-6)


def test_approx_and_apweight(tmp_path):
    assert _run(tmp_path, {"command": "approx", "f": "exp_cos", "n": 2}) == 0
    assert json.loads((tmp_path / "out" / "approx.json").read_text())["E_n"] > 0
    assert _run(tmp_path, {"command": "apweight", "w": "power_weight(gamma=0.5)", "p": 2}) == 0
    assert json.loads((tmp_path / "out" / "apweight.json").read_text())["verdict"] == "in"


@pytest.mark.parametrize(
    "config, pointer",
    [
        ({"command": "norm", "f": "sin(x)", "solver": {"tol": -1}}, "/solver/tol"),
        ({"command": "norm", "f": "sin(x)", "bogus": 1}, "/bogus"),
        ({"command": "approx", "f": "sin(x)"}, "/n"),
        ({"command": "suite", "suite": ["jackson", "nope"]}, "/suite/1"),
        ({"command": "suite", "suite": "jackson", "suite_params": {"jackson": {"zzz": 1}}}, "/suite_params/jackson/zzz"),
        ({"command": "norm", "f": "sin(x)", "quadrature": {"rule": "simpson"}}, "/quadrature/rule"),
    ],
)
def test_invalid_config_exit_1_with_pointer(tmp_path, capsys, config, pointer):
    assert _run(tmp_path, config) == 1
    assert f"(at {pointer})" in capsys.readouterr().err


def test_syntax_error_exit_1(tmp_path, capsys):
    assert _run(tmp_path, {"command": "norm", "f": "2*("}) == 1
    err = capsys.readouterr().err
    assert "byte 3" in err and "(at /f)" in err


@pytest.mark.parametrize("key,value", [("p", "0.5"), ("w", "-1+0*x")])
def test_bad_exponent_or_weight_points_at_key(tmp_path, capsys, key, value):
    assert _run(tmp_path, {"command": "norm", "f": "sin(x)", key: value}) == 1
    assert f"(at /{key})" in capsys.readouterr().err


def test_domain_error_exit_2(tmp_path, capsys):
    assert _run(tmp_path, {"command": "norm", "f": "log(cos(x))"}) == 2
    assert "numerical failure" in capsys.readouterr().err


def test_unreadable_config(tmp_path):
    assert cli.main(["--config", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert cli.main(["--config", str(bad)]) == 1


def test_env_overrides_out(tmp_path, monkeypatch):
    monkeypatch.setenv("VEXLAB_OUT", str(tmp_path / "env"))
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "catalog"}))
    assert cli.main(["--config", str(cfg), "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "env" / "catalog.json").exists()
    assert not (tmp_path / "flag").exists()


def test_flags_override_config(tmp_path, capsys):
    assert _run(tmp_path, {"command": "norm", "f": "sin(x)"}, "--tol", "-1") == 1
    assert "/solver/tol" in capsys.readouterr().err


def test_suite_outputs_are_reproducible(tmp_path):
    config = {
        "command": "suite",
        "suite": "bernstein",
        "seed": 7,
        "suite_params": {"bernstein": {"n_grid": [4, 8, 16], "samples": 2, "pairs": [["p=2", "1"]]}},
    }
    outs = []
    for k in range(2):
        cfg = tmp_path / f"c{k}.json"
        cfg.write_text(json.dumps(config))
        assert cli.main(["--config", str(cfg), "--out", str(tmp_path / f"o{k}")]) == 0
        outs.append(tmp_path / f"o{k}")
    for name in ("suite_bernstein.json", "suite_bernstein.csv", "suite_bernstein.tsv", "suite_summary.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    png = outs[0] / "suite_bernstein.png"
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert not [p for p in outs[0].iterdir() if p.name.startswith(".")]


def test_atomic_write_replaces(tmp_path):
    target = tmp_path / "x" / "a.txt"
    cli.atomic_write(target, "one")
    cli.atomic_write(target, "two")
    assert target.read_text() == "two"
    assert [p.name for p in target.parent.iterdir()] == ["a.txt"]
