"""One run of the epoch policy on a ten-product market.

Prints what happens in each epoch: the estimated preferences, how many
assortments the sampling law uses, and how the stock drains. The switch
budget L grows like sqrt(T) when alpha = 1/2.
"""
import numpy as np

from mnlswitch import GAMMAS, PolicyConfig, fluid_benchmark, generate_instance, run_ucb_policy

inst = generate_instance(GAMMAS["G1"], seed=4, horizon=2000)
bench = fluid_benchmark(inst)
res = run_ucb_policy(inst, PolicyConfig(alpha=0.5, seed=11))

print(f"N={inst.n_products} K={inst.n_resources} T={inst.horizon}")
print(f"warm start {res.tau} periods, {res.schedule.q} epochs, switch budget {res.switch_budget}")
print(f"true preferences  {np.round(inst.true_pref, 2)}")
for d in res.diagnostics[:3] + res.diagnostics[-2:]:
    # products the plan never shows keep their rough warm-start estimate,
    # so the error is measured over the ones this epoch offers
    shown = sorted({i - 1 for S, _ in d.offered for i in S})
    err = np.max(np.abs(np.log(np.array(d.v_hat)[shown] / inst.true_pref[shown])))
    plan = ", ".join(f"{S}x{n}" for S, n in d.offered)
    print(f"epoch {d.epoch:>3} [{d.start:>4},{d.end:>4}) log-error on offer {err:.3f} "
          f"support {d.support_size} min stock {min(d.inventory):7.1f}  {plan}")

print(f"\nrevenue {res.revenue:.1f} of fluid bound {bench:.1f}: ratio {res.revenue / bench:.4f}")
print(f"switches used {res.switches} of {res.switch_budget}")
if res.state.depleted_at >= 0:
    print(f"sale stopped at period {res.state.depleted_at} when stock ran low")
