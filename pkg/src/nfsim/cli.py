"""Command-line interface.

Subcommands: run, sweep, nodes, validate.  Exit codes: 0 success,
2 configuration error, 3 numerical failure, 4 I/O error.
"""

import argparse
import sys

from .configio import load_config
from .core import ConfigurationError, NumericalInstabilityError
from .presets import PRESET_NAMES, load_preset
from .runner import (
    SweepSpec,
    run_scenario,
    sweep_delta,
    sweep_switch_count,
    sweep_tau_d,
    unperturbed_nodes,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="nfsim",
        description="Nuclear forward scattering with magnetic switching",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_args(p):
        p.add_argument("config", nargs="?", help="config file (INI)")
        p.add_argument(
            "--preset", choices=PRESET_NAMES, help="use a named built-in scenario"
        )

    p_run = sub.add_parser("run", help="run one scenario")
    add_config_args(p_run)
    p_run.add_argument("--out", default="out", help="output directory")

    p_sweep = sub.add_parser("sweep", help="sweep one parameter")
    add_config_args(p_sweep)
    p_sweep.add_argument(
        "--param", required=True, choices=("tau_d", "delta", "nswitch")
    )
    p_sweep.add_argument(
        "--values",
        required=True,
        help="comma list (1,2,3) or range start:stop:step",
    )
    p_sweep.add_argument("--out", default="out", help="output directory")

    p_nodes = sub.add_parser("nodes", help="print detected node times")
    add_config_args(p_nodes)

    p_val = sub.add_parser("validate", help="check a config file")
    add_config_args(p_val)
    return parser


def _load(args):
    if args.preset:
        return load_preset(args.preset)
    if not args.config:
        raise ConfigurationError("need a config file or --preset")
    return load_config(args.config)


def _parse_values(raw):
    raw = raw.strip()
    if ":" in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise ConfigurationError("range must be start:stop:step")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError as exc:
            raise ConfigurationError(f"bad range {raw!r}") from exc
        if step <= 0:
            raise ConfigurationError("range step must be positive")
        values = []
        v = start
        while v <= stop + 1e-9 * abs(step):
            values.append(round(v, 12))
            v += step
        return tuple(values)
    try:
        return tuple(float(tok) for tok in raw.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigurationError(f"bad values {raw!r}") from exc


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config, meta = _load(args)
        if args.command == "validate":
            print("ok")
            return EXIT_OK
        if args.command == "nodes":
            nodes, _ = unperturbed_nodes(config)
            for t in nodes:
                print(f"{t:.4f}")
            return EXIT_OK
        if args.command == "run":
            manifest = run_scenario(config, args.out, meta)
            print(f"wrote {manifest.files['manifest']}")
            diag = manifest.diagnostics
            print(f"S(0) = {diag['s0']:.4g}", end="")
            if "max_s" in diag:
                print(f", max S = {diag['max_s']:.4g}")
            else:
                print()
            return EXIT_OK
        # sweep
        values = _parse_values(args.values)
        spec = SweepSpec(
            parameter={
                "tau_d": "tau_d",
                "delta": "delta_over_gamma",
                "nswitch": "n_switches",
            }[args.param],
            values=values,
            base=config,
            meta=meta,
        )
        if args.param == "tau_d":
            manifest = sweep_tau_d(spec, args.out)
        elif args.param == "delta":
            manifest = sweep_delta(spec, args.out)
        else:
            manifest = sweep_switch_count(spec, args.out)
        n_err = len(manifest.diagnostics.get("errors", []))
        print(f"wrote {args.out} ({len(values) - n_err}/{len(values)} points ok)")
        return EXIT_OK if n_err < len(values) else EXIT_NUMERICAL
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalInstabilityError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
