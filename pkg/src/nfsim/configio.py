"""Config file parsing/serialization and the on-disk data formats.

Config files are INI-style with sections [pulse], [grid], [target1],
[target2], [spectrum] and an optional [schedule] section holding the
convenience keys that the CLI expands into concrete switch times.
Unknown sections or keys are rejected.
"""

import configparser
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .core import (
    ConfigurationError,
    FieldRecord,
    GridConfig,
    NuclearConstants,
    PulseConfig,
    ScenarioConfig,
    SpectrumGridConfig,
    TargetConfig,
)
from .switching import SwitchSchedule

_PULSE_KEYS = {"t0", "tau"}
_GRID_KEYS = {"dt", "t_end", "n_slabs"}
_TARGET_KEYS = {
    "xi",
    "thickness_l",
    "delta_over_gamma",
    "include_electronic",
    "switch_times",
    "duration_d",
}
_SPECTRUM_KEYS = {"omega_min", "omega_max", "omega_step"}
_SCHEDULE_KEYS = {"schedule_type", "t1", "tau_d", "n_switches", "iterate_nodes"}
_SECTIONS = {"pulse", "grid", "target1", "target2", "spectrum", "schedule"}

_FMT = "%.17g"


@dataclass(frozen=True)
class ScheduleMeta:
    """Deferred schedule description, resolved by the runner.

    schedule_type: 1-4 (the named switching types), "first_node" (simultaneous
    inversion at the first detected node) or "nodes" (N inversions at the
    detected nodes, skipping the first).
    """

    schedule_type: str
    t1: float = 0.0
    tau_d: float = 0.0
    n_switches: int = 0
    iterate_nodes: bool = False


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return _FMT % value


def scenario_to_text(config, meta=None):
    """Serialize a ScenarioConfig (and optional ScheduleMeta) to INI text."""
    lines = []
    lines.append("[pulse]")
    lines.append(f"t0 = {_fmt(config.pulse.t0)}")
    lines.append(f"tau = {_fmt(config.pulse.tau)}")
    lines.append("")
    lines.append("[grid]")
    lines.append(f"dt = {_fmt(config.grid.dt)}")
    lines.append(f"t_end = {_fmt(config.grid.t_end)}")
    lines.append(f"n_slabs = {config.grid.n_slabs}")
    lines.append("")
    for i, target in enumerate(config.targets, start=1):
        lines.append(f"[target{i}]")
        lines.append(f"xi = {_fmt(target.xi)}")
        lines.append(f"thickness_l = {_fmt(target.thickness_L)}")
        lines.append(f"delta_over_gamma = {_fmt(target.delta_over_gamma)}")
        lines.append(f"include_electronic = {_fmt(target.include_electronic)}")
        times = ", ".join(_fmt(t) for t in target.schedule.switch_times)
        lines.append(f"switch_times = {times}")
        lines.append(f"duration_d = {_fmt(target.schedule.duration_d)}")
        lines.append("")
    lines.append("[spectrum]")
    lines.append(f"omega_min = {_fmt(config.spectrum_grid.omega_min)}")
    lines.append(f"omega_max = {_fmt(config.spectrum_grid.omega_max)}")
    lines.append(f"omega_step = {_fmt(config.spectrum_grid.omega_step)}")
    if meta is not None:
        lines.append("")
        lines.append("[schedule]")
        lines.append(f"schedule_type = {meta.schedule_type}")
        lines.append(f"t1 = {_fmt(meta.t1)}")
        lines.append(f"tau_d = {_fmt(meta.tau_d)}")
        lines.append(f"n_switches = {meta.n_switches}")
        lines.append(f"iterate_nodes = {_fmt(meta.iterate_nodes)}")
    return "\n".join(lines) + "\n"


def _get_float(section, key, default):
    if key not in section:
        return default
    try:
        return float(section[key])
    except ValueError as exc:
        raise ConfigurationError(f"bad float for {key}: {section[key]!r}") from exc


def _get_int(section, key, default):
    if key not in section:
        return default
    try:
        return int(section[key])
    except ValueError as exc:
        raise ConfigurationError(f"bad integer for {key}: {section[key]!r}") from exc


def _get_bool(section, key, default):
    if key not in section:
        return default
    raw = section[key].strip().lower()
    if raw in ("true", "1", "yes", "on"):
        return True
    if raw in ("false", "0", "no", "off"):
        return False
    raise ConfigurationError(f"bad boolean for {key}: {section[key]!r}")


def _check_keys(parser, section, allowed):
    extra = set(parser[section]) - allowed
    if extra:
        raise ConfigurationError(
            f"unknown keys in [{section}]: {', '.join(sorted(extra))}"
        )


def scenario_from_text(text):
    """Parse INI text; returns (ScenarioConfig, ScheduleMeta or None)."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse config: {exc}") from exc
    unknown = set(parser.sections()) - _SECTIONS
    if unknown:
        raise ConfigurationError(
            f"unknown sections: {', '.join(sorted(unknown))}"
        )

    pulse = PulseConfig()
    if parser.has_section("pulse"):
        _check_keys(parser, "pulse", _PULSE_KEYS)
        sec = parser["pulse"]
        pulse = PulseConfig(
            t0=_get_float(sec, "t0", 0.67), tau=_get_float(sec, "tau", 0.1)
        )
    grid = GridConfig()
    if parser.has_section("grid"):
        _check_keys(parser, "grid", _GRID_KEYS)
        sec = parser["grid"]
        grid = GridConfig(
            dt=_get_float(sec, "dt", 0.005),
            t_end=_get_float(sec, "t_end", 1500.0),
            n_slabs=_get_int(sec, "n_slabs", 128),
        )
    targets = []
    for name in ("target1", "target2"):
        if not parser.has_section(name):
            continue
        _check_keys(parser, name, _TARGET_KEYS)
        sec = parser[name]
        raw_times = sec.get("switch_times", "").strip()
        times = tuple(
            float(tok) for tok in raw_times.split(",") if tok.strip()
        ) if raw_times else ()
        schedule = SwitchSchedule(times, _get_float(sec, "duration_d", 2.0))
        targets.append(
            TargetConfig(
                xi=_get_float(sec, "xi", 15.0),
                thickness_L=_get_float(sec, "thickness_l", 10e-6),
                delta_over_gamma=_get_float(sec, "delta_over_gamma", 80.0),
                include_electronic=_get_bool(sec, "include_electronic", False),
                schedule=schedule,
            )
        )
    if parser.has_section("target2") and not parser.has_section("target1"):
        raise ConfigurationError("[target2] requires [target1]")
    spectrum = SpectrumGridConfig()
    if parser.has_section("spectrum"):
        _check_keys(parser, "spectrum", _SPECTRUM_KEYS)
        sec = parser["spectrum"]
        spectrum = SpectrumGridConfig(
            omega_min=_get_float(sec, "omega_min", -200.0),
            omega_max=_get_float(sec, "omega_max", 200.0),
            omega_step=_get_float(sec, "omega_step", 0.05),
        )
    meta = None
    if parser.has_section("schedule"):
        _check_keys(parser, "schedule", _SCHEDULE_KEYS)
        sec = parser["schedule"]
        stype = sec.get("schedule_type", "").strip()
        if stype not in ("1", "2", "3", "4", "first_node", "nodes"):
            raise ConfigurationError(f"bad schedule_type: {stype!r}")
        meta = ScheduleMeta(
            schedule_type=stype,
            t1=_get_float(sec, "t1", 0.0),
            tau_d=_get_float(sec, "tau_d", 0.0),
            n_switches=_get_int(sec, "n_switches", 0),
            iterate_nodes=_get_bool(sec, "iterate_nodes", False),
        )
    config = ScenarioConfig(
        constants=NuclearConstants(),
        pulse=pulse,
        grid=grid,
        targets=tuple(targets),
        spectrum_grid=spectrum,
    )
    return config, meta


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return scenario_from_text(text)


def config_hash(config):
    """Stable hash of the serialized scenario, for output provenance."""
    return hashlib.sha256(scenario_to_text(config).encode()).hexdigest()[:16]


def write_field_csv(path, record, conf_hash):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config={conf_hash}\n")
        fh.write("t_ns,re_omega,im_omega\n")
        t = record.times()
        for i in range(record.samples.size):
            s = record.samples[i]
            fh.write(f"{_FMT % t[i]},{_FMT % s.real},{_FMT % s.imag}\n")


def read_field_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("# config="):
            raise ConfigurationError("missing provenance header")
        fh.readline()  # column names
        data = np.loadtxt(fh, delimiter=",")
    t = data[:, 0]
    return FieldRecord(t[0], t[1] - t[0], data[:, 1] + 1j * data[:, 2])


def write_spectrum_csv(path, spectrum, conf_hash):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config={conf_hash}\n")
        fh.write("omega_over_gamma,s\n")
        for w, s in zip(spectrum.omega_over_gamma, spectrum.s_values):
            fh.write(f"{_FMT % w},{_FMT % s}\n")


def write_spectrogram_csv(path, spectrogram, conf_hash):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config={conf_hash}\n")
        fh.write("param,omega_over_gamma,s\n")
        for i, p in enumerate(spectrogram.param_values):
            row = spectrogram.matrix[i]
            for w, s in zip(spectrogram.omega_over_gamma, row):
                fh.write(f"{_FMT % p},{_FMT % w},{_FMT % s}\n")


def write_peaks_json(path, peaks):
    """peaks: list of PeakReport (or dicts with the same fields)."""
    records = []
    for p in peaks:
        if hasattr(p, "center"):
            records.append(
                {"center": p.center, "height": p.height, "fwhm": p.fwhm}
            )
        else:
            records.append(dict(p))
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
