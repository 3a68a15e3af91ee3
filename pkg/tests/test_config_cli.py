"""Config parsing and CLI verbs (exit codes, flag precedence, outputs)."""

import csv
import json

import numpy as np
import pytest

from olpr import config as cfgmod
from olpr.cli import main
from olpr.config import ConfigError

BASIC_INI = """
[model]
kind = random_input_i
m = 2

[nondeg]
lambda_min = 0.05
lam = 0.05
mu = 1.0
delta_b = 0.05

[experiment]
algorithms = bounded, baseline_olp
horizons = 200, 400
trials = 2
master_seed = 7
experiment_id = clitest
out_dir = {out}

[overrides]
alg1_kappa = 1e-5

[solver]
max_iters = 400
sample_cap = 800
"""

FINITE_INI = """
[model]
kind = finite_support

[support]
rewards = 2.0, 1.0
requirements = 1.0 0.5; 0.5 1.0
probs = 0.5, 0.5
repl_kind = constant
repl_value = 0.8, 0.8
"""


def _write(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_build_model_and_fields(tmp_path):
    p = _write(tmp_path, BASIC_INI.format(out=tmp_path))
    cp = cfgmod.load_config(p)
    model = cfgmod.build_model(cp)
    assert model.m == 2 and model.nondeg is not None
    fields = cfgmod.experiment_fields(cp)
    assert fields["horizons"] == [200, 400]
    assert fields["trials"] == 2
    ov = cfgmod.build_overrides(cp)
    assert ov.alg1_kappa == 1e-5
    solver = cfgmod.build_solver(cp)
    assert solver.max_iters == 400 and solver.sample_cap == 800


def test_finite_support_config(tmp_path):
    cp = cfgmod.load_config(_write(tmp_path, FINITE_INI))
    model = cfgmod.build_model(cp)
    assert model.support.n == 2 and model.m == 2
    assert np.allclose(model.replenishment_mean(), 0.8)


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        cfgmod.load_config(tmp_path / "missing.ini")
    cp = cfgmod.load_config(_write(tmp_path, "[model]\nkind = no_such\n"))
    with pytest.raises(ConfigError):
        cfgmod.build_model(cp)
    cp2 = cfgmod.load_config(_write(tmp_path, "[model]\nkind = finite_support\n",
                                    "f.ini"))
    with pytest.raises(ConfigError):
        cfgmod.build_model(cp2)
    cp3 = cfgmod.load_config(_write(tmp_path, BASIC_INI.format(out=tmp_path)))
    with pytest.raises(ConfigError):
        cfgmod.build_policy_config(cp3, "no_such_algorithm")


def test_cli_run_and_outputs(tmp_path, capsys):
    p = _write(tmp_path, BASIC_INI.format(out=tmp_path / "out"))
    rc = main(["run", "--config", str(p)])
    out = capsys.readouterr().out
    assert rc == 0
    raw = tmp_path / "out" / "clitest_raw.csv"
    assert raw.is_file()
    with open(raw) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 2 * 2
    assert "regret" in out


def test_cli_flag_precedence_over_config(tmp_path, capsys):
    p = _write(tmp_path, BASIC_INI.format(out=tmp_path / "ignored"))
    rc = main(["run", "--config", str(p), "--out", str(tmp_path / "flagged"),
               "--trials", "1", "--horizons", "150", "--json"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert all(c["T"] == 150 for c in payload["cells"])
    assert (tmp_path / "flagged" / "clitest_raw.csv").is_file()


def test_cli_missing_config_exit_3(tmp_path, capsys):
    rc = main(["run", "--config", str(tmp_path / "nope.ini")])
    assert rc == 3
    assert "nope.ini" in capsys.readouterr().err


def test_cli_unknown_flag_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--config", "x", "--frobnicate"])
    assert exc.value.code == 2


def test_cli_constants_fixture(capsys):
    rc = main(["constants", "--m", "1", "--r-bar", "1", "--a-bar", "1",
               "--b-bar", "1", "--b-lower", "0.5", "--T", "1000"])
    assert rc == 0
    assert "W=194" in capsys.readouterr().out


def test_cli_constants_missing_flags(capsys):
    rc = main(["constants", "--m", "1"])
    assert rc == 3
    assert "--r-bar" in capsys.readouterr().err


def test_cli_solve_induced_hard(capsys):
    rc = main(["solve-induced", "--hard", "--budget", "1.0,1.0"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "objective=3.000000000" in out
    assert "degenerate=true" in out


def test_cli_solve_dual_hard(capsys):
    rc = main(["solve-dual", "--hard", "--n-samples", "5000"])
    assert rc == 0
    assert "f=" in capsys.readouterr().out


def test_cli_validate(tmp_path, capsys):
    p = _write(tmp_path, BASIC_INI.format(out=tmp_path))
    rc = main(["validate", "--config", str(p), "--probes", "5000", "--json"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["ok"] is True


def test_cli_trace(tmp_path, capsys):
    p = _write(tmp_path, BASIC_INI.format(out=tmp_path))
    out = tmp_path / "trace.csv"
    rc = main(["trace", "--config", str(p), "--algorithm", "baseline_olp",
               "--T", "300", "--out", str(out)])
    assert rc == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert rows and float(rows[0]["inventory"]) == 0.0


def test_cli_determinism(tmp_path, capsys):
    p = _write(tmp_path, BASIC_INI.format(out=tmp_path / "o1"))
    main(["run", "--config", str(p), "--trials", "1", "--json"])
    first = capsys.readouterr().out
    main(["run", "--config", str(p), "--trials", "1", "--json"])
    second = capsys.readouterr().out
    assert first == second


def test_cli_help_lists_flags(capsys):
    for verb, flag in [("run", "--horizons"), ("trace", "--downsample"),
                       ("solve-dual", "--budget")]:
        with pytest.raises(SystemExit) as exc:
            main([verb, "--help"])
        assert exc.value.code == 0
        assert flag in capsys.readouterr().out
