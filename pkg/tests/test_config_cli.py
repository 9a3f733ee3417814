import json
import os

import numpy as np
import pytest

from nfsim import (
    ConfigurationError,
    FieldRecord,
    PRESET_NAMES,
    load_preset,
    read_field_csv,
    scenario_from_text,
    write_field_csv,
)
from nfsim.cli import EXIT_CONFIG, EXIT_OK, main
from nfsim.configio import config_hash, scenario_to_text
from nfsim.runner import SweepSpec, _chain_spectrum, resolve_schedules, sweep_tau_d

SMALL_CONFIG = """\
[pulse]
t0 = 0.67
tau = 0.1

[grid]
dt = 0.01
t_end = 100
n_slabs = 8

[target1]
xi = 5
delta_over_gamma = 5

[spectrum]
omega_min = -20
omega_max = 20
omega_step = 0.5
"""

TYPE4_CONFIG = SMALL_CONFIG + """
[target2]
xi = 5
delta_over_gamma = 5

[schedule]
schedule_type = 4
t1 = 16.4
tau_d = 2.0
"""


def _write(tmp_path, text, name="scenario.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_roundtrip_with_meta():
    config, meta = scenario_from_text(TYPE4_CONFIG)
    assert meta.schedule_type == "4"
    assert meta.t1 == 16.4
    back, meta2 = scenario_from_text(scenario_to_text(config, meta))
    assert back == config
    assert meta2 == meta


def test_unknown_key_rejected():
    with pytest.raises(ConfigurationError, match="unknown keys"):
        scenario_from_text(SMALL_CONFIG.replace("dt = 0.01", "dt = 0.01\nfoo = 1"))
    with pytest.raises(ConfigurationError, match="unknown sections"):
        scenario_from_text(SMALL_CONFIG + "\n[extra]\nx = 1\n")


def test_target2_requires_target1():
    text = SMALL_CONFIG.replace("[target1]", "[target2]")
    with pytest.raises(ConfigurationError, match="target2"):
        scenario_from_text(text)


def test_bad_values_rejected():
    with pytest.raises(ConfigurationError, match="bad float"):
        scenario_from_text(SMALL_CONFIG.replace("xi = 5", "xi = five"))
    with pytest.raises(ConfigurationError, match="bad schedule_type"):
        scenario_from_text(SMALL_CONFIG + "\n[schedule]\nschedule_type = 9\n")


def test_presets_all_load():
    assert len(PRESET_NAMES) == 8
    for name in PRESET_NAMES:
        config, meta = load_preset(name)
        assert config.targets
        assert meta is not None
    with pytest.raises(ConfigurationError):
        load_preset("no-such-preset")


def test_field_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    rec = FieldRecord(0.0, 0.01, rng.normal(size=50) + 1j * rng.normal(size=50))
    path = str(tmp_path / "field.csv")
    write_field_csv(path, rec, "abcd")
    back = read_field_csv(path)
    assert back.dt == pytest.approx(rec.dt, rel=1e-12)
    assert np.allclose(back.samples, rec.samples, rtol=0, atol=1e-16)


def test_cli_validate(tmp_path, capsys):
    path = _write(tmp_path, SMALL_CONFIG)
    assert main(["validate", path]) == EXIT_OK
    assert "ok" in capsys.readouterr().out


def test_cli_validate_bad_config(tmp_path, capsys):
    path = _write(tmp_path, SMALL_CONFIG.replace("xi = 5", "xi = -3"))
    assert main(["validate", path]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_cli_missing_file(capsys):
    assert main(["validate", "/no/such/file.ini"]) == EXIT_CONFIG


def test_cli_nodes(tmp_path, capsys):
    path = _write(tmp_path, SMALL_CONFIG)
    assert main(["nodes", path]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    times = [float(x) for x in lines]
    assert times == sorted(times)
    assert len(times) >= 1
    # first beat node of the 5 gamma splitting sits tens of ns out
    assert 5.0 < times[0] < 100.0


def test_cli_run_outputs(tmp_path, capsys):
    path = _write(tmp_path, SMALL_CONFIG)
    out = str(tmp_path / "out")
    assert main(["run", path, "--out", out]) == EXIT_OK
    for name in ("field.csv", "spectrum.csv", "peaks.json", "manifest.json"):
        assert os.path.exists(os.path.join(out, name))
    with open(os.path.join(out, "manifest.json")) as fh:
        manifest = json.load(fh)
    assert "s0" in manifest["diagnostics"]
    config, _ = scenario_from_text(SMALL_CONFIG)
    assert manifest["config_hash"] == config_hash(config)


def test_cli_run_deterministic(tmp_path):
    path = _write(tmp_path, SMALL_CONFIG)
    out1 = str(tmp_path / "o1")
    out2 = str(tmp_path / "o2")
    assert main(["run", path, "--out", out1]) == EXIT_OK
    assert main(["run", path, "--out", out2]) == EXIT_OK
    for name in ("field.csv", "spectrum.csv", "peaks.json"):
        a = open(os.path.join(out1, name), "rb").read()
        b = open(os.path.join(out2, name), "rb").read()
        assert a == b


def test_cli_run_resolves_first_node(tmp_path):
    text = SMALL_CONFIG + "\n[schedule]\nschedule_type = first_node\n"
    path = _write(tmp_path, text)
    out = str(tmp_path / "out")
    assert main(["run", path, "--out", out]) == EXIT_OK
    with open(os.path.join(out, "manifest.json")) as fh:
        manifest = json.load(fh)
    assert manifest["diagnostics"]["t1"] > 0


def test_cli_sweep_tau_d(tmp_path, monkeypatch):
    monkeypatch.setenv("NFSIM_WORKERS", "1")
    path = _write(tmp_path, TYPE4_CONFIG)
    out = str(tmp_path / "sweep")
    assert main(["sweep", path, "--param", "tau_d", "--values", "1,3", "--out", out]) == EXIT_OK
    assert os.path.exists(os.path.join(out, "spectrogram.csv"))
    assert os.path.exists(os.path.join(out, "spectrum_000.csv"))
    with open(os.path.join(out, "manifest.json")) as fh:
        manifest = json.load(fh)
    assert manifest["diagnostics"]["errors"] == []


def test_sweep_point_matches_single_run(monkeypatch, tmp_path):
    monkeypatch.setenv("NFSIM_WORKERS", "1")
    config, meta = scenario_from_text(TYPE4_CONFIG)
    spec = SweepSpec("tau_d", (2.0,), config, meta)
    sweep_tau_d(spec, str(tmp_path / "s"))
    data = np.loadtxt(
        str(tmp_path / "s" / "spectrum_000.csv"), delimiter=",", skiprows=2
    )
    resolved, _ = resolve_schedules(config, meta)
    direct = _chain_spectrum(resolved)
    assert np.max(np.abs(data[:, 1] - direct.s_values)) < 1e-12 * np.max(direct.s_values)


def test_cli_sweep_range_syntax(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("NFSIM_WORKERS", "1")
    path = _write(tmp_path, TYPE4_CONFIG)
    out = str(tmp_path / "sweep2")
    assert main(["sweep", path, "--param", "tau_d", "--values", "1:2:0.5", "--out", out]) == EXIT_OK
    assert "3/3 points ok" in capsys.readouterr().out


def test_cli_sweep_wrong_base(tmp_path, capsys):
    path = _write(tmp_path, SMALL_CONFIG)
    code = main(["sweep", path, "--param", "tau_d", "--values", "1,2", "--out", str(tmp_path / "x")])
    assert code == EXIT_CONFIG


def test_cli_preset_validate(capsys):
    assert main(["validate", "--preset", "fig2-single"]) == EXIT_OK
