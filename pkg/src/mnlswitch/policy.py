"""Epoch-based optimistic assortment policy with a hard switch budget.

A run has three phases:

1. warm start: every singleton ``{i}`` is offered in a block, so each product
   is exposed before estimation starts;
2. ``q`` equal-length epochs. Each epoch re-fits the preference MLE on all
   data so far, solves the compact planning LP, turns its vertex into a
   distribution with at most ``K + 1`` assortments, samples one assortment
   per period of the epoch and then offers each sampled assortment in one
   consecutive block;
3. the sale stops for good once some resource runs out.

With ``q = floor((L - N) / (K + 1))`` epochs this makes at most ``L`` switches.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .environment import SimState, init_state, offer
from .estimation import (ConfidenceParams, compute_omega, compute_psi, exposure_counts,
                         fit_mle)
from .lp import (InfeasibleLPError, build_compact_lp, recover_distribution, reduce_support,
                 solve_lp_basic)
from .mnl import ProblemInstance


class InvalidBudgetError(ValueError):
    pass


class SwitchBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class EpochSchedule:
    q: int
    boundaries: tuple  # T_1..T_q; T_0 = tau is stored separately
    tau: int
    nominal_q: int

    def epochs(self):
        """Yield ``(index, start, end)``; the epoch covers periods start+1..end."""
        prev = self.tau
        for ell, end in enumerate(self.boundaries, start=1):
            yield ell, prev, end
            prev = end


def epochs_for_budget(L: int, N: int, K: int) -> int:
    return (L - N) // (K + 1)


def make_schedule(T: int, tau: int, L: int, N: int, K: int) -> EpochSchedule:
    """Equal-length epochs after the warm start.

    Leftover periods from the floor division go to the last epoch. When the
    budget allows more epochs than there are periods left, one-period epochs
    are used.
    """
    nominal = epochs_for_budget(L, N, K)
    if nominal < 1:
        raise InvalidBudgetError(f"switch budget L={L} gives no epochs (need L >= N + K + 1)")
    if not N <= tau < T:
        raise InvalidBudgetError(f"warm start tau={tau} must satisfy N <= tau < T")
    q = min(nominal, T - tau)
    length = (T - tau) // q
    bounds = [tau + ell * length for ell in range(1, q + 1)]
    bounds[-1] = T
    return EpochSchedule(q, tuple(bounds), tau, nominal)


def default_tau(T: int, N: int) -> int:
    """ceil(sqrt(T)) rounded up to a multiple of N."""
    base = math.ceil(math.sqrt(T))
    return max(N, -(-base // N) * N)


def budget_for_alpha(alpha: float, T: int, N: int, K: int) -> int:
    return N + (K + 1) * math.ceil(T ** alpha - 1e-12)


@dataclass(frozen=True)
class PolicyConfig:
    alpha: float | None = 0.5
    switch_budget: int | None = None
    tau: int | None = None
    delta: float = 0.05
    conf_enabled: bool = False
    seed: int = 0
    psi_variant: str = "policy"
    omega_cap: float = 0.5
    mle_tol: float = 1e-8
    mle_max_iter: int = 200
    lp_backend: str = "highs"
    oracle_pref: bool = False  # plan with the true preferences (testing aid)

    def resolve(self, inst: ProblemInstance) -> tuple[int, int]:
        """Return ``(L, tau)`` for ``inst``."""
        N, K, T = inst.n_products, inst.n_resources, inst.horizon
        if (self.alpha is None) == (self.switch_budget is None):
            raise InvalidBudgetError("give exactly one of alpha and switch_budget")
        if self.alpha is not None:
            if not 0 <= self.alpha <= 1:
                raise InvalidBudgetError("alpha must lie in [0, 1]")
            L = budget_for_alpha(self.alpha, T, N, K)
        else:
            L = int(self.switch_budget)
        tau = default_tau(T, N) if self.tau is None else int(self.tau)
        if L < N + K + 1:
            raise InvalidBudgetError(f"switch budget L={L} < N + K + 1")
        if not N <= tau < T:
            raise InvalidBudgetError(f"warm start tau={tau} must satisfy N <= tau < T")
        return L, tau


@dataclass
class EpochDiagnostics:
    epoch: int
    start: int
    end: int
    v_hat: list
    lp_objective: float
    support_size: int
    offered: list  # [(assortment, periods)] in offering order
    epoch_revenue: float
    inventory: list
    omega: float
    events: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["offered"] = [[list(S), n] for S, n in self.offered]
        return d


@dataclass
class SimResult:
    state: SimState
    schedule: EpochSchedule
    switch_budget: int
    tau: int
    warm_start_complete: bool
    diagnostics: list
    events: list

    @property
    def revenue(self) -> float:
        return self.state.cum_revenue

    @property
    def switches(self) -> int:
        return self.state.switches


def warm_start(state: SimState, inst: ProblemInstance, tau: int, rng) -> bool:
    """Offer each singleton in a block; the first ``tau mod N`` items get one extra period.

    Returns False if stock ran out before the warm start finished.
    """
    N = inst.n_products
    base, extra = divmod(tau, N)
    for i in range(1, N + 1):
        for _ in range(base + (1 if i <= extra else 0)):
            if state.stopped:
                return False
            offer(state, (i,), rng)
    return True


def assumption_holds(inst: ProblemInstance, tau: int, delta: float) -> bool:
    N, K = inst.n_products, inst.n_resources
    need = tau * math.sqrt(math.log(4 * N * K / delta))
    return bool(np.all(need <= inst.initial_inventory))


def run_ucb_policy(inst: ProblemInstance, cfg: PolicyConfig) -> SimResult:
    L, tau = cfg.resolve(inst)
    N, K, T = inst.n_products, inst.n_resources, inst.horizon
    schedule = make_schedule(T, tau, L, N, K)
    market_seed, policy_seed = np.random.SeedSequence(cfg.seed).spawn(2)
    market = np.random.default_rng(market_seed)
    sampler = np.random.default_rng(policy_seed)
    events = []
    if not assumption_holds(inst, tau, cfg.delta):
        msg = f"warm start tau={tau} too long for the smallest inventory"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        events.append(msg)

    state = init_state(inst)
    completed = warm_start(state, inst, tau, market)
    if not completed:
        events.append("stock depleted during warm start")
    diagnostics = []
    psi = compute_psi(inst.utility_bound, N, T, schedule.q, K, cfg.delta, cfg.psi_variant)

    for ell, start, end in schedule.epochs():
        if state.stopped:
            break
        epoch_events = []
        counts = exposure_counts(state.log)
        if cfg.oracle_pref:
            v_hat = inst.true_pref
        else:
            fit = fit_mle(state.log, inst.utility_bound, tol=cfg.mle_tol,
                          max_iter=cfg.mle_max_iter)
            if not fit.converged:
                epoch_events.append(f"mle stopped at {fit.iterations} iterations, "
                                    f"projected gradient {fit.projected_grad_norm:.2e}")
            v_hat = fit.v
        conf = ConfidenceParams(delta=cfg.delta)
        if cfg.conf_enabled:
            omega = compute_omega(inst, tau, schedule.q, psi, cfg.delta)
            if omega > cfg.omega_cap:
                epoch_events.append(f"omega {omega:.4g} clamped to {cfg.omega_cap}")
                omega = cfg.omega_cap
            conf = ConfidenceParams(psi=psi, delta=cfg.delta, omega=omega, enabled=True)
        try:
            sol = solve_lp_basic(build_compact_lp(v_hat, counts, conf, inst), cfg.lp_backend)
        except InfeasibleLPError:
            epoch_events.append("planning LP infeasible; retried with omega = 0")
            conf = ConfidenceParams(psi=conf.psi, delta=conf.delta, omega=0.0,
                                    enabled=conf.enabled)
            sol = solve_lp_basic(build_compact_lp(v_hat, counts, conf, inst), cfg.lp_backend)
        dist = recover_distribution(sol, v_hat)
        dist = reduce_support(dist, v_hat, counts, conf, inst)

        draws = sampler.choice(len(dist), size=end - start, p=dist.weights)
        picked, first, tally = np.unique(draws, return_index=True, return_counts=True)
        plan = [(dist.assortments[picked[k]], int(tally[k])) for k in np.argsort(first)]
        revenue_before = state.cum_revenue
        for S, periods in plan:
            for _ in range(periods):
                if state.stopped:
                    break
                offer(state, S, market)
        diagnostics.append(EpochDiagnostics(
            epoch=ell, start=start, end=end, v_hat=np.asarray(v_hat).tolist(),
            lp_objective=sol.objective, support_size=len(dist), offered=plan,
            epoch_revenue=state.cum_revenue - revenue_before,
            inventory=state.inventory.tolist(), omega=conf.omega, events=epoch_events))
        events.extend(f"epoch {ell}: {e}" for e in epoch_events)

    if state.switches > L:
        raise SwitchBudgetError(f"{state.switches} switches exceed the budget L={L}")
    return SimResult(state, schedule, L, tau, completed, diagnostics, events)


def diagnostics_to_jsonl(result: SimResult) -> str:
    import json
    return "".join(json.dumps(d.to_dict()) + "\n" for d in result.diagnostics)
