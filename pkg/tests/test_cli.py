import json
import math
import subprocess
import sys

import pytest

from metascreen.cli import ConfigError, main, parse_config, parse_number, parse_text, run

BASE = """\
# reference dimer
L = 1
R_D = 0.05
d = 0.3
theta = 0.05pi
delta = 1e-3
v_b = 1
"""


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_defaults(tmp_path):
    rc = parse_config(write(tmp_path, BASE))
    m = rc.metascreen
    assert (m.L, m.R_D, m.d, m.v_b) == (1.0, 0.05, 0.3, 1.0)
    assert rc.incidence.alpha0 == 0.0
    assert m.theta == pytest.approx(0.05 * math.pi)
    assert rc.numerics["N"] == 6


@pytest.mark.parametrize("text,value", [("pi", math.pi), ("0.05pi", 0.05 * math.pi),
                                        ("2*pi/3", 2 * math.pi / 3), ("-0.5 pi", -0.5 * math.pi),
                                        ("1e-3", 1e-3)])
def test_parse_number(text, value):
    assert parse_number(text) == pytest.approx(value, rel=1e-15)


def test_missing_delta_named():
    text = BASE.replace("delta = 1e-3\n", "")
    with pytest.raises(ConfigError) as err:
        parse_text(text)
    assert any("delta" in p for p in err.value.problems)


def test_unknown_and_duplicate_keys_with_line_numbers():
    text = BASE + "colour = blue\nL = 2\n"
    with pytest.raises(ConfigError) as err:
        parse_text(text)
    probs = err.value.problems
    assert any("line 8" in p and "colour" in p for p in probs)
    assert any("line 9" in p and "duplicate" in p for p in probs)


def test_validation_errors_aggregated():
    text = BASE.replace("d = 0.3", "d = 0.05").replace("v_b = 1", "v_b = -1")
    with pytest.raises(ConfigError) as err:
        parse_text(text)
    assert len(err.value.problems) >= 2


def test_bad_value_reported():
    with pytest.raises(ConfigError) as err:
        parse_text(BASE + "N = six\n")
    assert "line 8" in err.value.problems[0]


def test_main_config_error_exit_code(tmp_path, capsys):
    assert main(["capacitance", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert "config error" in capsys.readouterr().err


def test_capacitance_job(tmp_path):
    cfg = write(tmp_path, BASE)
    assert main(["capacitance", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / "capacitance.json").read_text())
    assert rep["C11_0"] == pytest.approx(1.92480905370745, abs=1e-10)
    for key in ("c_par", "c_perp", "C1_matrix", "N", "convergence"):
        assert key in rep
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["status"] == "ok" and man["config"]["metascreen"]["d"] == 0.3 and "numpy" in man["versions"]


def test_resonances_job(tmp_path):
    cfg = write(tmp_path, BASE)
    assert run("resonances", parse_config(cfg), tmp_path / "o") == 0
    rep = json.loads((tmp_path / "o" / "resonances.json").read_text())
    assert rep["method"] == "muller"
    assert rep["omega2"][0] == pytest.approx(0.69868539, abs=1e-6)
    assert rep["omega1"][1] < 0 and max(rep["residual"]) < 1e-8


def test_green_check_job(tmp_path):
    cfg = write(tmp_path, BASE + "green_points = 12\nseed = 3\n")
    assert run("green-check", parse_config(cfg), tmp_path / "o") == 0
    lines = (tmp_path / "o" / "green_check.csv").read_text().splitlines()
    assert lines[0].startswith("x1,x2,alpha,k") and len(lines) == 13
    assert json.loads((tmp_path / "o" / "green_check.json").read_text())["pass"]


SPEC = BASE + "omega_min = 0.6\nomega_max = 0.8\nn_omega = 6\nrefine = 4\n"


def test_spectrum_deterministic_across_workers(tmp_path, monkeypatch):
    cfg = write(tmp_path, SPEC)
    monkeypatch.setenv("METASCREEN_WORKERS", "1")
    assert main(["spectrum", "--config", str(cfg), "--out", str(tmp_path / "a"),
                 "--svg", str(tmp_path / "a" / "s.svg")]) == 0
    monkeypatch.setenv("METASCREEN_WORKERS", "3")
    assert main(["spectrum", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "spectrum.csv").read_bytes()
    assert a == (tmp_path / "b" / "spectrum.csv").read_bytes()
    header = a.decode().splitlines()[0]
    assert header == "omega,T_num,R_num,T_asym,R_asym,re_t,im_t,re_r,im_r,residual"
    assert len(a.decode().splitlines()) == 1 + 6 + 4
    assert (tmp_path / "a" / "s.svg").read_text().startswith("<svg")


def test_band_partial_exit_code(tmp_path):
    # alpha = 0 cannot be seeded asymptotically: recorded per point, exit 3
    cfg = write(tmp_path, BASE.replace("1e-3", "2e-4") + "alpha_min = 0\nalpha_max = 1\nn_alpha = 3\n")
    assert run("band", parse_config(cfg), tmp_path / "o") == 3
    lines = (tmp_path / "o" / "band.csv").read_text().splitlines()
    assert lines[0] == "alpha,omega1,omega2,continuum_boundary" and len(lines) == 4
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["status"] == "partial" and sum(not p["ok"] for p in man["points"]) == 1


def test_bic_check_job(tmp_path):
    cfg = write(tmp_path, BASE.replace("0.05pi", "0"))
    assert run("bic-check", parse_config(cfg), tmp_path / "o") == 0
    rep = json.loads((tmp_path / "o" / "bic_check.json").read_text())
    assert rep["pass"] and all(c["pass"] for c in rep["checks"].values())


def test_numerical_failure_exit_code(tmp_path):
    cfg = write(tmp_path, BASE)  # theta != 0: bic-check rejects the configuration
    assert run("bic-check", parse_config(cfg), tmp_path / "o") == 2
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["errors"] and man["status"] == "failed"


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, BASE)
    proc = subprocess.run([sys.executable, "-m", "metascreen", "capacitance", "--config", str(cfg),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
