"""From the compact planning LP to a distribution over assortments.

The planning problem has one variable per subset of products, which is
hopeless beyond a couple of dozen products. The compact program needs only
N^2 + N + 1 variables. This script solves both on a small instance, turns
the compact vertex into nested assortments, and trims that distribution
to at most K + 1 atoms.
"""
import numpy as np

from mnlswitch import (ProblemInstance, build_compact_lp, enumerate_ucb_lp,
                       recover_distribution, reduce_support, solve_lp_basic)

rng = np.random.default_rng(3)
N, K = 6, 2
inst = ProblemInstance(rng.random(N), rng.random((N, K)), [0.15, 0.2], 1000,
                       np.exp(rng.uniform(-1, 1, N)), 3.0)
v = inst.true_pref

lp = build_compact_lp(v, None, None, inst)
print(f"compact LP: {lp.n_vars} variables, {lp.n_constraints} constraints")
sol = solve_lp_basic(lp)
print(f"compact optimum   {sol.objective:.10f}")
print(f"x0 = {sol.x0:.4f}, x = {np.round(sol.x, 4) + 0.0}")

opt, _ = enumerate_ucb_lp(v, None, None, inst)
print(f"enumerated optimum {opt:.10f}  (over {2 ** N} assortments)")

dist = recover_distribution(sol, v)
print("\nrecovered nested assortments:")
for S, w in dist.atoms:
    print(f"  {str(S):<22} weight {w:.4f}")
obj, cons = dist.evaluate(v, None, inst)
print(f"value {obj:.10f}, resource use {np.round(cons, 4)} vs capacity {inst.capacity_rate}")

small = reduce_support(dist, v, None, None, inst)
print(f"\nafter support reduction ({len(small)} atoms, at most K + 1 = {K + 1}):")
for S, w in small.atoms:
    print(f"  {str(S):<22} weight {w:.4f}")

# Both resources bind here; their duals price one more unit of per-period stock.
print(f"\nshadow prices of the resources: {np.round(sol.duals_resource, 4)}")
print(lp.dump().splitlines()[0][:100] + " ...")
