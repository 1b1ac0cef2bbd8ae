"""Command-line sweep runner.

    python -m mnlswitch --gamma 10,5,3 --horizons 250,1000 --alphas 0,0.5 \
        --instances 5 --runs 10 --out results.csv

Flags override keys of the same name (dashes as underscores) in an optional
JSON ``--config`` file. Exit status is 1 if any cell failed.
"""
from __future__ import annotations

import argparse
import json
import sys

from .harness import ExperimentConfig, emit_results, run_experiment


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    return [int(float(x)) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mnlswitch", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON file with default values for the flags below")
    p.add_argument("--gamma", action="append", type=_floats, metavar="N,K,R",
                   help="instance family; repeat for several")
    p.add_argument("--horizons", type=_ints, metavar="T1,T2,...")
    p.add_argument("--alphas", type=_floats, metavar="A1,A2,...")
    p.add_argument("--instances", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--conf-enabled", action="store_true", default=None)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--parallel", type=int, metavar="WORKERS")
    return p


# flag name -> ExperimentConfig field
_FIELDS = {"gamma": "gammas", "horizons": "horizons", "alphas": "alphas",
           "instances": "instances_per_gamma", "runs": "runs_per_instance", "seed": "seed",
           "conf_enabled": "conf_enabled", "out": "out", "format": "format",
           "parallel": "parallel"}


def config_from_args(args) -> ExperimentConfig:
    values = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        for key, val in raw.items():
            key = key.replace("-", "_")
            if key not in _FIELDS:
                raise SystemExit(f"unknown config key {key!r}")
            if key == "gamma" and val and not isinstance(val[0], (list, tuple)):
                val = [val]
            values[_FIELDS[key]] = val
    for flag, name in _FIELDS.items():
        val = getattr(args, flag)
        if val is not None:
            values[name] = val
    return ExperimentConfig(**values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    rows = run_experiment(cfg)
    if cfg.out:
        emit_results(rows, cfg.out, cfg.format)
    else:
        for r in rows:
            if r.aggregate:
                print(f"gamma=({r.gamma}) T={r.T} alpha={r.alpha:g} "
                      f"mean ratio={r.ratio:.4f} max switches={r.switches}/{r.switch_budget}")
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"failed: gamma=({r.gamma}) T={r.T} alpha={r.alpha:g} "
              f"instance={r.instance} run={r.run}: {r.error}", file=sys.stderr)
    return 1 if failed else 0
