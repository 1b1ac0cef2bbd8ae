"""How much revenue a switch budget buys.

alpha = 0 explores once and then commits to a single plan; alpha = 1/2
re-plans about sqrt(T) times; alpha = 1 re-plans every period. The table
reports mean revenue-to-bound ratios over a handful of seeded runs, and
the time each setting takes.
"""
from mnlswitch import GAMMAS, ExperimentConfig, run_experiment

cfg = ExperimentConfig(gammas=[GAMMAS["G1"]], horizons=[250, 1000],
                       alphas=[0.0, 0.5, 1.0], instances_per_gamma=2, runs_per_instance=3,
                       seed=0)
rows = [r for r in run_experiment(cfg) if r.aggregate]

print(f"{'T':>6} {'alpha':>6} {'ratio':>8} {'switches':>10} {'ms/run':>9}")
for r in rows:
    print(f"{r.T:>6} {r.alpha:>6g} {r.ratio:>8.4f} {r.switches:>4}/{r.switch_budget:<5} "
          f"{r.wall_ms:>9.0f}")
