"""Multinomial-logit choice arithmetic.

Products are numbered 1..N in every public signature; index 0 is the
no-purchase option. Arrays that hold per-product data (revenue, preference
weights, consumption rows) are stored 0-based, so product ``i`` lives at
position ``i - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

Assortment = tuple  # sorted, duplicate-free tuple of 1-based product ids


class InvalidInputError(ValueError):
    """Raised for malformed instances, assortments or preference vectors."""


def make_assortment(items: Iterable[int], n_products: int | None = None) -> Assortment:
    """Canonicalise ``items`` into a sorted tuple of distinct product ids."""
    members = tuple(sorted({int(i) for i in items}))
    if members and members[0] < 1:
        raise InvalidInputError(f"product ids start at 1, got {members[0]}")
    if n_products is not None and members and members[-1] > n_products:
        raise InvalidInputError(
            f"product id {members[-1]} out of range for N={n_products}"
        )
    return members


def as_preference(v: Sequence[float]) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise InvalidInputError("preference vector must be one-dimensional")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise InvalidInputError("preference weights must be finite and positive")
    return arr


@dataclass(frozen=True)
class ProblemInstance:
    """A retailer's market: products, resources, capacities and true preferences.

    ``consumption[i - 1, k]`` is the amount of resource ``k`` (0-based) used by
    one sale of product ``i``; ``capacity_rate[k]`` is the per-period budget
    c(k), so the initial stock is ``horizon * capacity_rate``.
    """

    revenue: np.ndarray
    consumption: np.ndarray
    capacity_rate: np.ndarray
    horizon: int
    true_pref: np.ndarray
    utility_bound: float

    def __post_init__(self):
        r = np.asarray(self.revenue, dtype=float)
        a = np.atleast_2d(np.asarray(self.consumption, dtype=float))
        c = np.asarray(self.capacity_rate, dtype=float)
        v = np.asarray(self.true_pref, dtype=float)
        n = r.shape[0]
        if r.ndim != 1 or n < 1:
            raise InvalidInputError("revenue must be a non-empty vector")
        if a.shape != (n, c.shape[0]) or c.ndim != 1 or c.shape[0] < 1:
            raise InvalidInputError(
                f"consumption must be N x K = {n} x {c.shape[0]}, got {a.shape}"
            )
        if v.shape != (n,):
            raise InvalidInputError("true_pref must have one entry per product")
        if np.any((r < 0) | (r > 1)) or np.any((a < 0) | (a > 1)):
            raise InvalidInputError("revenue and consumption entries must lie in [0, 1]")
        if np.any(c <= 0):
            raise InvalidInputError("capacity rates must be positive")
        if int(self.horizon) < 1:
            raise InvalidInputError("horizon must be a positive integer")
        R = float(self.utility_bound)
        if R < 1:
            raise InvalidInputError("utility bound R must be >= 1")
        tol = 1e-12 * R
        if np.any(v < 1.0 / R - tol) or np.any(v > R + tol):
            raise InvalidInputError("true preferences must lie in [1/R, R]")
        for name, arr in (("revenue", r), ("consumption", a),
                          ("capacity_rate", c), ("true_pref", v)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "horizon", int(self.horizon))
        object.__setattr__(self, "utility_bound", R)

    @property
    def n_products(self) -> int:
        return self.revenue.shape[0]

    @property
    def n_resources(self) -> int:
        return self.capacity_rate.shape[0]

    @property
    def initial_inventory(self) -> np.ndarray:
        return self.horizon * self.capacity_rate

    def with_horizon(self, horizon: int) -> "ProblemInstance":
        return ProblemInstance(self.revenue, self.consumption, self.capacity_rate,
                               horizon, self.true_pref, self.utility_bound)


def _index(S: Assortment, n: int) -> np.ndarray:
    idx = np.fromiter(S, dtype=np.intp, count=len(S))
    if idx.size and (idx.min() < 1 or idx.max() > n):
        raise InvalidInputError(f"assortment {S} out of range for N={n}")
    return idx - 1


def choice_probabilities(S: Assortment, v: Sequence[float]) -> np.ndarray:
    """Purchase probabilities for every option 0..N when ``S`` is offered."""
    v = as_preference(v)
    idx = _index(S, v.shape[0])
    probs = np.zeros(v.shape[0] + 1)
    denom = 1.0 + v[idx].sum()
    probs[idx + 1] = v[idx] / denom
    probs[0] = 1.0 / denom
    return probs


def _weighted_share(S, v, weights) -> float:
    v = as_preference(v)
    idx = _index(S, v.shape[0])
    if idx.size == 0:
        return 0.0
    vs = v[idx]
    return float(np.dot(weights[idx], vs) / (1.0 + vs.sum()))


def expected_revenue(S: Assortment, v: Sequence[float], inst: ProblemInstance) -> float:
    if len(v) != inst.n_products:
        raise InvalidInputError("preference vector does not match the instance")
    return _weighted_share(S, v, inst.revenue)


def expected_consumption(S: Assortment, k: int, v: Sequence[float],
                         inst: ProblemInstance) -> float:
    """Expected use of resource ``k`` (0-based) in one period offering ``S``."""
    if len(v) != inst.n_products:
        raise InvalidInputError("preference vector does not match the instance")
    if not 0 <= k < inst.n_resources:
        raise InvalidInputError(f"resource index {k} out of range")
    return _weighted_share(S, v, inst.consumption[:, k])


def sample_purchase(S: Assortment, v: Sequence[float], rng: np.random.Generator) -> int:
    """Draw the customer's choice by inverting the CDF with one uniform."""
    v = as_preference(v)
    _index(S, v.shape[0])
    return draw_choice(tuple(S), v.tolist(), rng.random())


def draw_choice(S: tuple, v: list, u: float) -> int:
    """Invert the choice CDF over ``(0,) + S`` at ``u``; inputs are not checked.

    ``v`` is a plain list of positive floats indexed by product id - 1.
    """
    denom = 1.0
    for i in S:
        denom += v[i - 1]
    acc = 1.0 / denom
    if u < acc:
        return 0
    for i in S:
        acc += v[i - 1] / denom
        if u < acc:
            return i
    return S[-1]


def revenue_ordered_optimum(revenue: Sequence[float], v: Sequence[float]) -> tuple[Assortment, float]:
    """Best unconstrained assortment among revenue-ordered nested sets."""
    r = np.asarray(revenue, dtype=float)
    v = as_preference(v)
    order = sorted(range(len(r)), key=lambda i: (-r[i], i))
    best, best_val = (), 0.0
    num, den = 0.0, 1.0
    for j, i in enumerate(order):
        num += r[i] * v[i]
        den += v[i]
        if num / den > best_val + 1e-15:
            best_val = num / den
            best = make_assortment(p + 1 for p in order[: j + 1])
    return best, best_val
