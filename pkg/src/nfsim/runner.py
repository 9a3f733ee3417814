"""Scenario runner and sweep engine: composes the solver and the spectral
tools, resolves deferred switching schedules, and writes all output files."""

import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import configio
from .configio import ScheduleMeta
from .core import (
    ConfigurationError,
    angular_detuning,
    gaussian_input,
)
from .solver import run_chain
from .spectral import (
    PeakWindowError,
    assemble_spectrogram,
    normalized_spectrum,
    peak_metrics,
)
from .switching import (
    SwitchSchedule,
    detect_nodes,
    filter_node_pairs,
    make_type_schedules,
    node_schedule,
)

WORKER_ENV = "NFSIM_WORKERS"


def worker_count():
    raw = os.environ.get(WORKER_ENV, "")
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ConfigurationError(f"bad {WORKER_ENV}: {raw!r}") from exc
        if n < 1:
            raise ConfigurationError(f"{WORKER_ENV} must be >= 1")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter over a base scenario."""

    parameter: str  # tau_d | delta_over_gamma | n_switches
    values: tuple
    base: "object"  # ScenarioConfig
    meta: ScheduleMeta | None = None

    def __post_init__(self):
        if self.parameter not in ("tau_d", "delta_over_gamma", "n_switches"):
            raise ConfigurationError(f"unknown sweep parameter {self.parameter!r}")
        if not self.values:
            raise ConfigurationError("sweep needs at least one value")
        object.__setattr__(self, "values", tuple(self.values))


@dataclass
class RunManifest:
    config_hash: str
    created: str
    files: dict
    diagnostics: dict

    def to_payload(self):
        return {
            "config_hash": self.config_hash,
            "created": self.created,
            "files": self.files,
            "diagnostics": self.diagnostics,
        }


def _node_search_start(config):
    return config.pulse.t0 + 5.0 * config.pulse.tau


def unperturbed_nodes(config):
    """Nodes of the config's exit intensity with all switching removed."""
    quiet = replace(
        config,
        targets=tuple(
            replace(t, schedule=SwitchSchedule((), t.schedule.duration_d))
            for t in config.targets
        ),
    )
    field = run_chain(
        gaussian_input(quiet.pulse, quiet.grid),
        quiet.targets,
        quiet.constants,
        quiet.grid,
    )
    return detect_nodes(field, _node_search_start(config)), field


def switching_node_candidates(config):
    """Node times usable as inversion instants.

    Beat minima bunch into close pairs around the zeros of the slow
    multiple-scattering envelope; both members of such a pair are dropped
    (the envelope sign change already provides the flip there).
    """
    nodes, field = unperturbed_nodes(config)
    delta = config.targets[0].delta_over_gamma if config.targets else 0.0
    if delta > 0:
        beat = np.pi / angular_detuning(delta, config.constants)
        nodes = filter_node_pairs(nodes, 0.6 * beat)
    return nodes, field


def _iterative_node_schedule(config, n_switches, d):
    """Re-detect the next node after each inversion instead of taking all
    nodes from the unperturbed run.  Slow; enabled by a config flag."""
    delta = config.targets[0].delta_over_gamma if config.targets else 0.0
    beat = np.pi / angular_detuning(delta, config.constants) if delta > 0 else 10.0
    pulse_in = gaussian_input(config.pulse, config.grid)
    switches = []
    first_node = None
    for _ in range(n_switches):
        trial = replace(
            config,
            targets=tuple(
                replace(t, schedule=SwitchSchedule(tuple(switches), d))
                for t in config.targets
            ),
        )
        field = run_chain(pulse_in, trial.targets, trial.constants, trial.grid)
        t_min = switches[-1] + 0.5 * beat if switches else _node_search_start(config)
        nodes = detect_nodes(field, t_min)
        if first_node is None:
            if len(nodes) < 2:
                break
            first_node = nodes[0]
            nodes = nodes[1:]
        if not nodes:
            break
        switches.append(nodes[0])
    return SwitchSchedule(tuple(switches), d)


def resolve_schedules(config, meta):
    """Expand a ScheduleMeta into concrete switch times on the targets.

    Returns (resolved config, info dict for the manifest).
    """
    if meta is None:
        return config, {}
    if not config.targets:
        raise ConfigurationError("schedule expansion needs at least one target")
    d = config.targets[0].schedule.duration_d
    info = {"schedule_type": meta.schedule_type}
    if meta.schedule_type in ("1", "2", "3", "4"):
        s1, s2 = make_type_schedules(
            int(meta.schedule_type), meta.t1, meta.tau_d, d
        )
        schedules = [s1, s2]
    elif meta.schedule_type == "first_node":
        nodes, _ = unperturbed_nodes(config)
        if not nodes:
            raise ConfigurationError("no nodes found for first_node schedule")
        info["t1"] = nodes[0]
        s1, s2 = make_type_schedules(1, nodes[0], 0.0, d)
        schedules = [s1, s2]
    elif meta.schedule_type == "nodes":
        if meta.iterate_nodes:
            sched = _iterative_node_schedule(config, meta.n_switches, d)
        else:
            nodes, _ = switching_node_candidates(config)
            sched = node_schedule(nodes, meta.n_switches, d)
        info["switch_times"] = list(sched.switch_times)
        schedules = [sched, sched]
    else:
        raise ConfigurationError(f"bad schedule_type {meta.schedule_type!r}")
    targets = tuple(
        replace(t, schedule=schedules[i]) for i, t in enumerate(config.targets)
    )
    return replace(config, targets=targets), info


def _timestamp():
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())


def run_scenario(config, out_dir, meta=None):
    """Run one scenario end to end and persist its outputs.

    Writes field.csv, spectrum.csv, peaks.json and manifest.json into
    out_dir; returns the RunManifest.
    """
    os.makedirs(out_dir, exist_ok=True)
    resolved, info = resolve_schedules(config, meta)
    conf_hash = configio.config_hash(resolved)
    pulse_in = gaussian_input(resolved.pulse, resolved.grid)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        output = run_chain(
            pulse_in, resolved.targets, resolved.constants, resolved.grid
        )
        spec = normalized_spectrum(
            pulse_in,
            output,
            resolved.spectrum_grid.grid(),
            gamma=resolved.constants.gamma,
        )
    diagnostics = dict(info)
    diagnostics["warnings"] = [str(w.message) for w in caught]
    diagnostics["s0"] = spec.value_at(0.0)
    peaks = []
    try:
        grid = spec.omega_over_gamma
        peak = peak_metrics(spec, (grid[0], grid[-1]))
        peaks.append(peak)
        diagnostics["max_s"] = peak.height
    except PeakWindowError as exc:
        diagnostics["peak_error"] = str(exc)
    files = {
        "field": os.path.join(out_dir, "field.csv"),
        "spectrum": os.path.join(out_dir, "spectrum.csv"),
        "peaks": os.path.join(out_dir, "peaks.json"),
        "manifest": os.path.join(out_dir, "manifest.json"),
    }
    configio.write_field_csv(files["field"], output, conf_hash)
    configio.write_spectrum_csv(files["spectrum"], spec, conf_hash)
    configio.write_peaks_json(files["peaks"], peaks)
    manifest = RunManifest(conf_hash, _timestamp(), files, diagnostics)
    configio.write_json(files["manifest"], manifest.to_payload())
    return manifest


def _chain_spectrum(config):
    pulse_in = gaussian_input(config.pulse, config.grid)
    output = run_chain(pulse_in, config.targets, config.constants, config.grid)
    return normalized_spectrum(
        pulse_in, output, config.spectrum_grid.grid(), gamma=config.constants.gamma
    )


def _tau_d_point(args):
    value, config = args
    try:
        return value, _chain_spectrum(config), None
    except Exception as exc:  # per-point failure, sweep continues
        return value, None, f"{type(exc).__name__}: {exc}"


def sweep_tau_d(spec, out_dir):
    """One spectrum per tau_d value, assembled into a spectrogram."""
    if spec.meta is None or spec.meta.schedule_type != "4":
        raise ConfigurationError("tau_d sweep needs a type-4 [schedule] base")
    os.makedirs(out_dir, exist_ok=True)
    d = spec.base.targets[0].schedule.duration_d
    jobs = []
    for v in spec.values:
        s1, s2 = make_type_schedules(4, spec.meta.t1, float(v), d)
        targets = tuple(
            replace(t, schedule=s)
            for t, s in zip(spec.base.targets, (s1, s2))
        )
        jobs.append((float(v), replace(spec.base, targets=targets)))
    results = _parallel_map(_tau_d_point, jobs)
    return _finish_spectrogram_sweep(spec, results, out_dir, "tau_d")


def _delta_point(args):
    value, stype, base, d = args
    try:
        delta_cfg = replace(
            base,
            targets=tuple(
                replace(t, delta_over_gamma=float(value)) for t in base.targets
            ),
        )
        nodes, _ = unperturbed_nodes(delta_cfg)
        if not nodes:
            raise RuntimeError("no node found")
        s1, s2 = make_type_schedules(stype, nodes[0], 0.0, d)
        targets = tuple(
            replace(t, schedule=s)
            for t, s in zip(delta_cfg.targets, (s1, s2))
        )
        spec_rec = _chain_spectrum(replace(delta_cfg, targets=targets))
        grid = spec_rec.omega_over_gamma
        peak = peak_metrics(spec_rec, (grid[0], grid[-1]))
        return float(value), (nodes[0], peak), None
    except Exception as exc:
        return float(value), None, f"{type(exc).__name__}: {exc}"


def sweep_delta(spec, out_dir):
    """Max-S and FWHM versus the hyperfine splitting.

    The inversion is placed at the first beat node of the unperturbed run
    for each splitting value.
    """
    if spec.meta is None or spec.meta.schedule_type not in ("1", "2", "3"):
        raise ConfigurationError("delta sweep needs a type-1/2/3 [schedule] base")
    os.makedirs(out_dir, exist_ok=True)
    stype = int(spec.meta.schedule_type)
    d = spec.base.targets[0].schedule.duration_d
    jobs = [(float(v), stype, spec.base, d) for v in spec.values]
    results = _parallel_map(_delta_point, jobs)
    conf_hash = configio.config_hash(spec.base)
    curve_path = os.path.join(out_dir, "delta_sweep.csv")
    errors = []
    rows = []
    for value, payload, err in results:
        if err is not None:
            errors.append({"value": value, "error": err})
            continue
        t1, peak = payload
        rows.append((value, t1, peak))
    with open(curve_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config={conf_hash}\n")
        fh.write("delta_over_gamma,max_s,fwhm,type\n")
        for value, _, peak in sorted(rows):
            fh.write(
                f"{value:.17g},{peak.height:.17g},{peak.fwhm:.17g},{stype}\n"
            )
    manifest = RunManifest(
        conf_hash,
        _timestamp(),
        {"curve": curve_path},
        {
            "parameter": "delta_over_gamma",
            "switch_times": {f"{v:g}": t1 for v, t1, _ in rows},
            "errors": errors,
        },
    )
    configio.write_json(os.path.join(out_dir, "manifest.json"), manifest.to_payload())
    return manifest


def _n_switch_point(args):
    value, config, nodes, d = args
    try:
        sched = node_schedule(nodes, int(value), d)
        targets = tuple(replace(t, schedule=sched) for t in config.targets)
        cfg = replace(config, targets=targets)
        pulse_in = gaussian_input(cfg.pulse, cfg.grid)
        output = run_chain(pulse_in, cfg.targets, cfg.constants, cfg.grid)
        small = np.arange(-1.0, 1.0001, 0.05)
        spec_rec = normalized_spectrum(
            pulse_in, output, small, gamma=cfg.constants.gamma
        )
        return int(value), spec_rec.value_at(0.0), None
    except Exception as exc:
        return int(value), None, f"{type(exc).__name__}: {exc}"


def sweep_switch_count(spec, out_dir):
    """S(0) versus the number of node inversions."""
    os.makedirs(out_dir, exist_ok=True)
    d = spec.base.targets[0].schedule.duration_d
    nodes, _ = switching_node_candidates(spec.base)
    jobs = [(int(v), spec.base, nodes, d) for v in spec.values]
    results = _parallel_map(_n_switch_point, jobs)
    conf_hash = configio.config_hash(spec.base)
    curve_path = os.path.join(out_dir, "nswitch_sweep.csv")
    errors = []
    rows = []
    for value, s0, err in results:
        if err is not None:
            errors.append({"value": value, "error": err})
        else:
            rows.append((value, s0))
    with open(curve_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config={conf_hash}\n")
        fh.write("n_switches,s0\n")
        for value, s0 in sorted(rows):
            fh.write(f"{value},{s0:.17g}\n")
    manifest = RunManifest(
        conf_hash,
        _timestamp(),
        {"curve": curve_path},
        {
            "parameter": "n_switches",
            "node_candidates": list(nodes),
            "errors": errors,
        },
    )
    configio.write_json(os.path.join(out_dir, "manifest.json"), manifest.to_payload())
    return manifest


def _parallel_map(fn, jobs):
    n_workers = min(worker_count(), len(jobs))
    if n_workers <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, jobs))


def _finish_spectrogram_sweep(spec, results, out_dir, param_name):
    conf_hash = configio.config_hash(spec.base)
    errors = []
    rows = []
    for value, spec_rec, err in results:
        if err is not None:
            errors.append({"value": value, "error": err})
        else:
            rows.append((value, spec_rec))
    files = {}
    for i, (value, spec_rec) in enumerate(sorted(rows, key=lambda r: r[0])):
        path = os.path.join(out_dir, f"spectrum_{i:03d}.csv")
        configio.write_spectrum_csv(path, spec_rec, conf_hash)
        files[f"{param_name}={value:g}"] = path
    if rows:
        gram = assemble_spectrogram(rows)
        gram_path = os.path.join(out_dir, "spectrogram.csv")
        configio.write_spectrogram_csv(gram_path, gram, conf_hash)
        files["spectrogram"] = gram_path
    manifest = RunManifest(
        conf_hash,
        _timestamp(),
        files,
        {"parameter": param_name, "errors": errors},
    )
    configio.write_json(os.path.join(out_dir, "manifest.json"), manifest.to_payload())
    return manifest
