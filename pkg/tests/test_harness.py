import csv
import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from rwtail.harness import ConfigError, REGISTRY, list_experiments, load_config, parse_text, run, validate
from rwtail.harness.cli import main
from rwtail.harness.config import resolve_output_dir
from rwtail.harness.runner import csv_bytes

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


# -- parsing and validation ------------------------------------------------------


def test_parse_errors_name_the_line():
    with pytest.raises(ConfigError, match="line 2"):
        parse_text('experiment = "breiman"\nseed = = 3\n', "toml")
    with pytest.raises(ConfigError, match="line 1"):
        parse_text('{"experiment": }', "json")
    with pytest.raises(ConfigError, match="top level"):
        parse_text("[1, 2]", "json")


def test_validate_collects_every_error():
    with pytest.raises(ConfigError) as exc:
        validate({"experiment": "breiman", "seed": -1, "n": 0, "colour": "red", "ci_level": 1.5})
    fields = " ".join(exc.value.errors)
    for key in ("'seed'", "'n'", "'colour'", "'ci_level'"):
        assert key in fields
    assert len(exc.value.errors) == 4


def test_validate_requires_experiment_and_seed():
    with pytest.raises(ConfigError) as exc:
        validate({})
    assert any("experiment" in e for e in exc.value.errors) and any("seed" in e for e in exc.value.errors)
    with pytest.raises(ConfigError, match="unknown experiment"):
        validate({"experiment": "nope", "seed": 1})
    with pytest.raises(ConfigError, match="seed"):
        validate({"experiment": "mellin", "seed": 2 ** 64})
    with pytest.raises(ConfigError, match="seed"):
        validate({"experiment": "mellin", "seed": True})


def test_validate_rejects_bad_model_parameters():
    with pytest.raises(ConfigError, match="alpha must be positive"):
        validate({"experiment": "breiman", "seed": 1, "law": {"family": "pareto", "alpha": 0.0}})
    with pytest.raises(ConfigError, match=r"a\^2\+b\^2"):
        validate({"experiment": "scaling-identity", "seed": 1,
                  "nu": {"kind": "oscillating", "alpha": 1.0, "beta0": math.pi, "a": 1.2, "b": 0.0}})


def test_defaults_and_seed_override():
    cfg = validate({"experiment": "breiman", "seed": 5}, seed_override=99)
    assert cfg.seed == 99
    assert cfg.params["n"] == REGISTRY["breiman"].defaults["n"]
    assert cfg.params["theta"]["values"] == [0.5, 2.0]


def test_output_dir_precedence(monkeypatch):
    cfg = validate({"experiment": "mellin", "seed": 1, "output_dir": "from-config"})
    monkeypatch.setenv("RWTAIL_OUT_DIR", "from-env")
    assert resolve_output_dir("from-cli", cfg) == Path("from-cli")
    assert resolve_output_dir(None, cfg) == Path("from-config")
    bare = validate({"experiment": "mellin", "seed": 1})
    assert resolve_output_dir(None, bare) == Path("from-env")
    monkeypatch.delenv("RWTAIL_OUT_DIR")
    assert resolve_output_dir(None, bare) == Path("rwtail-out")


@pytest.mark.parametrize("path", sorted(CONFIGS.iterdir()), ids=lambda p: p.name)
def test_shipped_configs_validate(path):
    cfg = validate(load_config(path))
    assert cfg.experiment in REGISTRY


def test_registry_listing():
    names = [name for name, _, _ in list_experiments()]
    assert names == ["breiman", "finite-sum", "series", "converse", "mellin", "check-conditions",
                     "scaling-identity"]


# -- running ---------------------------------------------------------------------


def test_csv_formatting_round_trips():
    data = csv_bytes(("a", "b", "c"), [(0.1, 3, True), (1 / 3, -2, False)]).decode()
    rows = list(csv.reader(data.splitlines()))
    assert rows[0] == ["a", "b", "c"]
    assert float(rows[2][0]) == 1 / 3 and rows[1][2] == "true"


def test_run_writes_tables_and_report(tmp_path):
    cfg = validate({"experiment": "breiman", "seed": 3, "n": 20_000})
    report = run(cfg, tmp_path)
    assert sorted(os.listdir(tmp_path)) == ["report.json", "tail.csv"]
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["verdict"] == report.verdict
    assert data["rng"]["master_seed"] == 3 and data["rng"]["kernel_backend"] in ("cython", "python")
    assert data["config"]["n"] == 20_000
    assert "version" in data and data["wall_clock_s"] >= 0


def test_runs_are_reproducible(tmp_path):
    cfg = validate({"experiment": "series", "seed": 17, "n": 30_000})
    run(cfg, tmp_path / "a")
    run(cfg, tmp_path / "b")
    for name in ("tail.csv", "hill.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


# -- command line ----------------------------------------------------------------


def test_cli_list_and_validate(capsys):
    assert main(["list"]) == 0
    assert "scaling-identity" in capsys.readouterr().out
    assert main(["validate", "--config", str(CONFIGS / "mellin.json")]) == 0
    assert json.loads(capsys.readouterr().out)["experiment"] == "mellin"


def test_cli_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "out")
    assert main(["run", "--config", str(CONFIGS / "scaling-identity.toml"), "--out", out, "--quiet"]) == 0

    wrong = write(tmp_path, "m.toml", 'experiment = "mellin"\nseed = 1\nexpect_zeros = [2.0]\n')
    assert main(["run", "--config", str(wrong), "--out", out, "--quiet"]) == 1

    como = write(tmp_path, "c.toml", 'experiment = "finite-sum"\nseed = 1\nn = 20000\ncomonotone = true\n')
    assert main(["run", "--config", str(como), "--out", out, "--quiet"]) == 2

    bad = write(tmp_path, "b.toml", 'experiment = "breiman"\nseed = 1\n[law]\nfamily = "pareto"\nalpha = 0\n')
    assert main(["run", "--config", str(bad), "--out", out]) == 3
    assert "alpha must be positive" in capsys.readouterr().err

    assert main(["run", "--config", str(tmp_path / "missing.toml"), "--out", out]) == 3

    diverge = write(tmp_path, "d.toml", 'experiment = "series"\nseed = 1\n'
                                        '[sequence]\nkind = "power"\nc = 1.0\nk = 0.5\n')
    assert main(["run", "--config", str(diverge), "--out", out]) == 4


def test_console_script_installed(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "rwtail.harness.cli", "run", "--config",
                           str(CONFIGS / "mellin.json"), "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    rows = list(csv.reader((tmp_path / "zeros.csv").read_text().splitlines()))
    assert rows[0] == ["beta", "abs_M"] and abs(float(rows[1][0]) - math.pi) <= 1e-9
