"""Command-line entry point: ``shgcat <scenario> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import SCENARIOS, ScenarioConfig, apply_overrides, load_config
from .exceptions import ConfigError, NumericalError
from .scenarios import run_scenario

log = logging.getLogger("shgcat")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="shgcat",
        description="Exact and effective-Kerr dynamics of second-harmonic generation.",
    )
    p.add_argument("scenario", choices=SCENARIOS)
    p.add_argument("--config", help="JSON file with ScenarioConfig fields; flags override it")
    p.add_argument("--nbar", type=float, help="mean photon number of the fundamental mode")
    p.add_argument("--beta", help="harmonic coherent amplitude as RE,IM")
    p.add_argument("--detuning", help="detuning in units of g (accepts pi expressions)")
    times = p.add_mutually_exclusive_group()
    times.add_argument("--tau", help="comma list of tau = g t sqrt(2 nbar)")
    times.add_argument("--gt", help="comma list of g t")
    times.add_argument("--lambda-t", dest="lambda_t", help="comma list of lambda t, e.g. pi/2")
    p.add_argument("--grid", help="phase-space grid MIN:MAX:N")
    p.add_argument("--order", type=int, choices=(2, 3), help="harmonic order")
    p.add_argument("--form", choices=("eq12", "eq21", "pt", "kerr"), help="effective diagonal")
    p.add_argument("--convention", choices=("+1", "-1", "1"), help="Kerr sign convention of the cat")
    p.add_argument("--epsilon", type=float, help="truncation budget for the Fock cutoffs")
    p.add_argument("--samples", type=int, help="time samples in fidelity-scan")
    p.add_argument("--out", help="output directory")
    p.add_argument("--serial", action="store_true", default=None, help="single process, reproducible output")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> ScenarioConfig:
    cfg = ScenarioConfig.defaults(args.scenario)
    if args.config:
        data = load_config(args.config)
        data.pop("scenario", None)
        cfg = apply_overrides(cfg, data)
    flags = {k: v for k, v in vars(args).items() if k not in ("scenario", "config", "verbose")}
    return apply_overrides(cfg, flags).validate()


_VALUE_FLAGS = ("--grid", "--beta", "--detuning", "--tau", "--gt", "--lambda-t", "--convention")


def _attach_values(argv):
    # argparse takes "-6:6:121" or "-1,0" for an option; glue such values to their flag
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_attach_values(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = config_from_args(args)
        manifest = run_scenario(cfg)
    except ConfigError as exc:
        print(f"shgcat: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"shgcat: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"shgcat: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info(json.dumps(manifest["results"], indent=2)[:4000])
    print(f"wrote {cfg.scenario} outputs to {cfg.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
