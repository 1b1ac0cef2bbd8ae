"""Experiment sweeps over instance families, horizons and switch budgets.

Random instances come from NumPy's PCG64 generator seeded through
``SeedSequence`` with the entropy ``(seed, N, K, R)``:

* ``revenue[i]    ~ U[0, 1]``
* ``consumption   ~ U[0, 1]`` (N x K)
* ``true_pref[i]  = exp(U[-log R, log R])``
* ``capacity[k]   ~ U[0.25, 0.75]``

drawn in that order. The horizon does not enter the draws, so one seed gives
the same market at every horizon.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .lp import fluid_benchmark
from .mnl import ProblemInstance
from .policy import PolicyConfig, run_ucb_policy

GAMMAS = {
    "G1": (10, 5, 3),
    "G2": (15, 6, 5),
    "G3": (25, 8, 7),
    "G4": (50, 12, 12),
}
HORIZONS = (250, 500, 750, 1000, 1500, 2000, 5000, 10000, 20000, 30000, 40000)


def gamma_label(gamma) -> str:
    return ",".join(f"{g:g}" for g in gamma)


def generate_instance(gamma, seed: int, horizon: int = 1000) -> ProblemInstance:
    N, K, R = int(gamma[0]), int(gamma[1]), float(gamma[2])
    ss = np.random.SeedSequence([int(seed), N, K, int(round(R * 1000))])
    rng = np.random.Generator(np.random.PCG64(ss))
    r = rng.uniform(0.0, 1.0, N)
    a = rng.uniform(0.0, 1.0, (N, K))
    logR = math.log(R)
    v = np.clip(np.exp(rng.uniform(-logR, logR, N)), 1.0 / R, R)
    c = rng.uniform(0.25, 0.75, K)
    return ProblemInstance(r, a, c, horizon, v, R)


@dataclass
class ExperimentConfig:
    gammas: list = field(default_factory=lambda: [GAMMAS["G1"]])
    horizons: list = field(default_factory=lambda: [1000])
    alphas: list = field(default_factory=lambda: [0.0, 0.5])
    instances_per_gamma: int = 5
    runs_per_instance: int = 10
    seed: int = 0
    conf_enabled: bool = False
    out: str | None = None
    format: str = "csv"
    parallel: int = 1

    def __post_init__(self):
        self.gammas = [tuple(g) for g in self.gammas]
        self.horizons = sorted(int(t) for t in self.horizons)
        self.alphas = [float(a) for a in self.alphas]
        if self.instances_per_gamma < 1 or self.runs_per_instance < 1:
            raise ValueError("instance and run counts must be positive")


# column order of the emitted tables
FIELDS = ("gamma", "T", "alpha", "instance", "run", "revenue", "benchmark", "ratio",
          "regret", "switches", "switch_budget", "epochs", "max_support", "min_inventory",
          "wall_ms", "depletion_period", "aggregate", "error")


@dataclass
class MetricsRow:
    gamma: str
    T: int
    alpha: float
    instance: int
    run: int
    revenue: float
    benchmark: float
    ratio: float
    regret: float
    switches: int
    switch_budget: int
    epochs: int
    max_support: int
    min_inventory: float
    wall_ms: float
    depletion_period: int
    aggregate: bool = False
    error: str = ""

    def key(self):
        return (self.gamma, self.T, self.alpha, self.aggregate, self.instance, self.run)


def _run_seed(master, gamma, instance, T, run) -> int:
    ss = np.random.SeedSequence([int(master), int(gamma[0]), int(gamma[1]),
                                 int(round(gamma[2] * 1000)), instance, T, run])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def _instance_seed(master, instance) -> int:
    return int(master) * 1000003 + instance


def run_cell(gamma, T, alpha, instance, run, master_seed, conf_enabled, benchmark=None):
    inst = generate_instance(gamma, _instance_seed(master_seed, instance), T)
    if benchmark is None:
        benchmark = fluid_benchmark(inst)
    cfg = PolicyConfig(alpha=alpha, seed=_run_seed(master_seed, gamma, instance, T, run),
                       conf_enabled=conf_enabled)
    row = MetricsRow(gamma_label(gamma), T, alpha, instance, run, math.nan, benchmark,
                     math.nan, math.nan, -1, -1, 0, 0, math.nan, math.nan, -1)
    try:
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            # the warm-start check fires once per run; a sweep would repeat it endlessly
            warnings.simplefilter("ignore", RuntimeWarning)
            res = run_ucb_policy(inst, cfg)
        row.wall_ms = (time.perf_counter() - t0) * 1e3
    except Exception as exc:  # recorded, the sweep goes on
        row.error = f"{type(exc).__name__}: {exc}"
        return row
    row.revenue = res.revenue
    row.ratio = res.revenue / benchmark
    row.regret = benchmark - res.revenue
    row.switches = res.switches
    row.switch_budget = res.switch_budget
    row.epochs = len(res.diagnostics)
    row.max_support = max((d.support_size for d in res.diagnostics), default=0)
    row.min_inventory = float(res.state.inventory.min())
    row.depletion_period = res.state.depleted_at
    return row


def _cell_task(args):
    return run_cell(*args)


def aggregate_rows(rows) -> list:
    groups = {}
    for r in rows:
        if not r.aggregate and not r.error:
            groups.setdefault((r.gamma, r.T, r.alpha), []).append(r)
    out = []
    for (g, T, alpha), rs in sorted(groups.items()):
        mean = lambda attr: float(np.mean([getattr(r, attr) for r in rs]))
        out.append(MetricsRow(
            g, T, alpha, -1, -1, mean("revenue"), mean("benchmark"), mean("ratio"),
            mean("regret"), max(r.switches for r in rs), max(r.switch_budget for r in rs),
            max(r.epochs for r in rs), max(r.max_support for r in rs),
            min(r.min_inventory for r in rs), mean("wall_ms"),
            max(r.depletion_period for r in rs), True, ""))
    return out


def run_experiment(cfg: ExperimentConfig, progress=None) -> list:
    """One row per (gamma, T, alpha, instance, run) plus per-cell mean rows."""
    tasks = []
    for gamma, T, i in product(cfg.gammas, cfg.horizons, range(cfg.instances_per_gamma)):
        bench = fluid_benchmark(generate_instance(gamma, _instance_seed(cfg.seed, i), T))
        for alpha, run in product(cfg.alphas, range(cfg.runs_per_instance)):
            tasks.append((gamma, T, alpha, i, run, cfg.seed, cfg.conf_enabled, bench))
    if cfg.parallel > 1:
        with ProcessPoolExecutor(cfg.parallel) as pool:
            rows = list(pool.map(_cell_task, tasks, chunksize=4))
    else:
        rows = []
        for t in tasks:
            rows.append(_cell_task(t))
            if progress:
                progress(rows[-1])
    rows.sort(key=MetricsRow.key)
    return rows + aggregate_rows(rows)


def emit_results(rows, path, fmt: str = "csv") -> None:
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(FIELDS)
            for r in rows:
                w.writerow([_fmt(getattr(r, f)) for f in FIELDS])
    elif fmt == "json":
        with open(path, "w") as fh:
            json.dump([{f: getattr(r, f) for f in FIELDS} for r in rows], fh, indent=1)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def _fmt(value):
    if isinstance(value, float):
        return repr(float(value))
    return value


_TYPES = {f.name: f.type for f in dataclasses.fields(MetricsRow)}


def read_results(path, fmt: str = "csv") -> list:
    if fmt == "json":
        with open(path) as fh:
            return [MetricsRow(**d) for d in json.load(fh)]
    rows = []
    with open(path, newline="") as fh:
        for d in csv.DictReader(fh):
            kw = {}
            for f in FIELDS:
                t, s = _TYPES[f], d[f]
                if t == "bool":
                    kw[f] = s == "True"
                elif t == "int":
                    kw[f] = int(s)
                elif t == "float":
                    kw[f] = float(s)
                else:
                    kw[f] = s
            rows.append(MetricsRow(**kw))
    return rows
