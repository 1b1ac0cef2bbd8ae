"""Market simulator: one customer per period, finite non-replenishable stock."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimation import SalesHistory
from .mnl import Assortment, ProblemInstance, draw_choice, make_assortment


class LifecycleError(RuntimeError):
    """Raised when offering after the sale has stopped."""


@dataclass
class SimState:
    inventory: np.ndarray
    cum_revenue: float
    period: int
    last_assortment: Assortment | None
    switches: int
    stopped: bool
    log: SalesHistory
    depleted_at: int = -1
    instance: ProblemInstance = field(repr=False, default=None)
    # one worst-case sale per resource: stop once stock drops below it
    reserve: np.ndarray = field(repr=False, default=None)
    _pref: list = field(repr=False, default=None)  # true preferences as floats, for sampling

    def snapshot(self) -> dict:
        return {"inventory": self.inventory.tolist(), "cum_revenue": self.cum_revenue,
                "period": self.period, "switches": self.switches, "stopped": self.stopped}


def init_state(inst: ProblemInstance) -> SimState:
    inventory = inst.initial_inventory.astype(float)
    reserve = inst.consumption.max(axis=0)
    short = bool(np.any(inventory < reserve))
    return SimState(inventory=inventory, cum_revenue=0.0, period=0, last_assortment=None,
                    switches=0, stopped=short, log=SalesHistory(inst.n_products),
                    depleted_at=0 if short else -1, instance=inst, reserve=reserve)


def offer(state: SimState, S, rng: np.random.Generator) -> int:
    """Serve the next customer with assortment ``S``; returns the purchase (0 = none).

    After the sale, the run stops if some resource could no longer cover the
    most resource-hungry purchase, so stock never goes negative.
    """
    if state.stopped:
        raise LifecycleError("the sale has stopped; no further offers allowed")
    inst = state.instance
    S = make_assortment(S, inst.n_products)
    if state.last_assortment is not None and S != state.last_assortment:
        state.switches += 1
    state.last_assortment = S
    if state._pref is None:
        state._pref = inst.true_pref.tolist()
    purchase = draw_choice(S, state._pref, rng.random())
    state.period += 1
    state.log.append(state.period, S, purchase)
    if purchase:
        state.cum_revenue += float(inst.revenue[purchase - 1])
        state.inventory -= inst.consumption[purchase - 1]
        if np.any(state.inventory < state.reserve):
            state.stopped = True
            state.depleted_at = state.period
    if state.period >= inst.horizon:
        state.stopped = True
    return purchase


def count_switches(assortments) -> int:
    return sum(1 for a, b in zip(assortments, assortments[1:]) if a != b)
