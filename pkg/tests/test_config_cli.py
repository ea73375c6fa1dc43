import json
import subprocess
import sys

import numpy as np
import pytest

from prescurv.cli import main
from prescurv.config import parse_config, scenario_config
from prescurv.errors import ConfigError

SMALL = """\
scenario = "flrw-gauss-cosine"
seed = 3

[grid]
resolution = 16

[flow]
tolerance = 1e-4
"""


def test_minimal_scenario_fills_defaults():
    rc = parse_config('scenario = "flrw-gauss-constant"\n')
    r = rc.resolved
    assert r["grid"]["resolution"] == 32
    assert r["flow"]["safety"] == 0.9 and r["flow"]["max_steps"] == 200_000
    assert r["output"]["figures"] is False
    cfg = rc.build()
    assert cfg.grid.shape == (32, 32) and cfg.func.expr == "K"
    assert cfg.resolved["seed"] == 0


def test_dimension_out_of_range_reports_line():
    text = 'scenario = "flrw-gauss-constant"\n\n[ambient]\ndimension = 5\n'
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == 4
    assert "supported: 1-3" in str(info.value)


def test_warp_table_lookup():
    text = """\
[ambient]
dimension = 1
warp = "exp_decay"
slab = [0.0, 1.0]

[grid]
resolution = 16

[prescription]
value = 1.0

[barriers]
lower = 0.2
upper = {value = 0.8}
"""
    rc = parse_config(text)
    amb = rc.ambient()
    t = np.linspace(0, 1, 5)
    np.testing.assert_allclose(amb.warp.phi(t), np.exp(-t))
    cfg = rc.build()
    np.testing.assert_array_equal(cfg.barriers.lower, 0.2)


def test_unknown_keys_rejected_with_line():
    with pytest.raises(ConfigError) as info:
        parse_config('scenario = "flrw-gauss-constant"\n[flow]\nsafety = 0.5\nspeed = 2\n')
    assert info.value.line == 4
    with pytest.raises(ConfigError) as info:
        parse_config('scenario = "flrw-gauss-constant"\ncolour = "red"\n')
    assert info.value.line == 2


@pytest.mark.parametrize(
    "body, line",
    [
        ("[flow]\nsafety = 1.5\n", 3),
        ("[flow]\ntolerance = -1.0\n", 3),
        ('[flow]\nscheme = "rk45"\n', 3),
        ("[prescription]\nvalue = -1.0\n", 3),
        ("[grid]\nresolution = 4\n", 3),
        ("[flow\nsafety = 1\n", 2),
    ],
)
def test_range_and_syntax_errors(body, line):
    with pytest.raises(ConfigError) as info:
        parse_config('scenario = "flrw-gauss-constant"\n' + body)
    assert info.value.line == line


def test_unknown_scenario():
    with pytest.raises(ConfigError):
        parse_config('scenario = "nope"\n')


def test_seed_override(monkeypatch):
    monkeypatch.setenv("PRESCURV_SEED", "17")
    assert parse_config(SMALL).seed == 17
    monkeypatch.setenv("PRESCURV_SEED", "x")
    with pytest.raises(ConfigError):
        parse_config(SMALL)


def test_cosine_scenario_prescription():
    cfg = scenario_config("flrw-gauss-cosine").build()
    x = cfg.grid.coords()
    state = cfg.state(cfg.barriers.upper)
    np.testing.assert_allclose(cfg.prescription.values(state), 1.5 + 0.1 * np.cos(x[0]) * np.cos(x[1]), atol=1e-15)


# -- command line ------------------------------------------------------------


def test_usage_errors_exit_64(capsys):
    assert main([]) == 64
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 64
    assert main(["run", "--out", "x"]) == 64


def test_barriers_command(tmp_path, capsys):
    assert main(["barriers", "--scenario", "flrw-gauss-constant"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["upper"]["valid"] and out["lower"]["valid"]
    bad = tmp_path / "bad.toml"
    bad.write_text('scenario = "flrw-gauss-constant"\n[prescription]\nvalue = 2.5\n')
    assert main(["barriers", "--config", str(bad)]) == 2
    assert not json.loads(capsys.readouterr().out)["upper"]["valid"]


def test_run_command_writes_reproducible_artifacts(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text(SMALL)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", str(cfg), "--out", str(a), "--figures"]) == 0
    assert main(["run", "--config", str(cfg), "--out", str(b)]) == 0
    assert (a / "series.csv").read_bytes() == (b / "series.csv").read_bytes()
    report = json.loads((a / "report.json").read_text())
    assert report["stop_cause"] == "converged"
    assert report["seed"] == 3 and report["config"]["grid"]["resolution"] == 16
    assert (a / "series.png").stat().st_size > 0 and (a / "final_u.png").exists()
    assert not (b / "series.png").exists()


def test_run_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text(SMALL + "max_steps = 3\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    bad = tmp_path / "bad.toml"
    bad.write_text(SMALL.replace("[grid]", "[prescription]\nvalue = 2.5\n\n[grid]"))
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "p")]) == 2


def test_check_curvfun_command(capsys):
    assert main(["check-curvfun", "--family", "K", "-n", "2", "--samples", "2000"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["in_Kstar"] and rep["kstar_epsilon0"] == pytest.approx(0.5, abs=1e-6)
    assert main(["check-curvfun", "--family", "bogus(1)"]) == 64


def test_inspect_ambient_command(capsys):
    assert main(["inspect-ambient", "--warp", "exp_decay", "--slab", "0", "1", "--points", "3", "--lambda", "10"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,kappa_bar,chi_pd(10.0)"
    assert lines[1:] == ["0.0,1.0,true", "0.5,1.0,true", "1.0,1.0,true"]


def test_verify_command_subset(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert main(["verify", "--only", "3,4,8", "--json", str(out)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3 and all(line.startswith("[PASS]") for line in lines)
    assert [r["number"] for r in json.loads(out.read_text())] == [3, 4, 8]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "prescurv.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "check-curvfun" in proc.stdout
