"""Preference estimation from sales data and the confidence-radius constants.

The log-likelihood is parameterised by ``theta = log v``. Records that share
an assortment are pooled, so every evaluation costs O(#distinct assortments x N)
rather than O(#periods x N).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .mnl import Assortment, InvalidInputError, ProblemInstance, make_assortment


class EstimationError(ValueError):
    """Raised when the likelihood does not identify some preference weight."""


class SalesHistory:
    """Ordered log of ``(period, assortment, purchase)`` records.

    Besides the raw records the history keeps, per distinct assortment, the
    number of offers and the purchase tally of each member, which is all the
    likelihood needs.
    """

    def __init__(self, n_products: int, records: Iterable[tuple] = ()):
        self.n_products = int(n_products)
        self.periods: list[int] = []
        self.assortments: list[Assortment] = []
        self.purchases: list[int] = []
        self._pooled: dict[Assortment, list] = {}
        self._cache = None
        for t, S, i in records:
            self.append(t, S, i)

    def __len__(self):
        return len(self.periods)

    def __iter__(self):
        return iter(zip(self.periods, self.assortments, self.purchases))

    def __eq__(self, other):
        return (isinstance(other, SalesHistory)
                and self.n_products == other.n_products
                and list(self) == list(other))

    def append(self, period: int, S: Assortment, purchase: int) -> None:
        S = make_assortment(S, self.n_products)
        if self.periods and period <= self.periods[-1]:
            raise InvalidInputError("periods must be strictly increasing")
        if purchase != 0 and purchase not in S:
            raise InvalidInputError(f"purchase {purchase} not in offered set {S}")
        self.periods.append(int(period))
        self.assortments.append(S)
        self.purchases.append(int(purchase))
        self._cache = None
        entry = self._pooled.get(S)
        if entry is None:
            # [offers, purchases of each member in S order]
            entry = self._pooled[S] = [0, np.zeros(len(S), dtype=np.int64)]
        entry[0] += 1
        if purchase:
            entry[1][S.index(purchase)] += 1

    def pooled(self):
        """Return ``(membership, offers, purchases)`` arrays.

        ``membership`` is a (U, N) 0/1 matrix over the U distinct assortments,
        ``offers`` their offer counts, ``purchases`` the per-product totals.
        """
        if self._cache is not None:
            return self._cache
        n = self.n_products
        keys = list(self._pooled)
        member = np.zeros((len(keys), n))
        offers = np.zeros(len(keys))
        bought = np.zeros(n)
        for u, S in enumerate(keys):
            cnt, tally = self._pooled[S]
            idx = np.asarray(S, dtype=np.intp) - 1
            member[u, idx] = 1.0
            offers[u] = cnt
            bought[idx] += tally
        for arr in (member, offers, bought):
            arr.setflags(write=False)
        self._cache = (member, offers, bought)
        return self._cache

    def to_lines(self) -> list[str]:
        """Export as ``period<TAB>i,j,k<TAB>purchase`` text lines."""
        return [f"{t}\t{','.join(map(str, S))}\t{i}" for t, S, i in self]

    @classmethod
    def from_lines(cls, n_products: int, lines: Iterable[str]) -> "SalesHistory":
        h = cls(n_products)
        for line in lines:
            line = line.rstrip("\n")
            if not line:
                continue
            t, S, i = line.split("\t")
            h.append(int(t), [int(x) for x in S.split(",") if x], int(i))
        return h


def exposure_counts(h: SalesHistory) -> np.ndarray:
    """How many times each product has been offered (0-based array)."""
    member, offers, _ = h.pooled()
    return offers @ member if len(offers) else np.zeros(h.n_products)


def _check_theta(h, theta):
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (h.n_products,):
        raise InvalidInputError(f"theta must have length {h.n_products}")
    if not np.all(np.isfinite(theta)):
        raise InvalidInputError("theta must be finite")
    return theta


def _pooled_probs(member, theta):
    # shift by max(theta, 0) so that the outside option's exp(0) is also scaled
    shift = max(float(theta.max()), 0.0)
    w = member * np.exp(theta - shift)
    denom = np.exp(-shift) + w.sum(axis=1)
    return w / denom[:, None], np.log(denom) + shift


def neg_log_likelihood(h: SalesHistory, theta: Sequence[float]) -> float:
    theta = _check_theta(h, theta)
    member, offers, bought = h.pooled()
    if not len(offers):
        return 0.0
    _, log_denom = _pooled_probs(member, theta)
    return float(offers @ log_denom - bought @ theta)


def nll_gradient(h: SalesHistory, theta: Sequence[float]) -> np.ndarray:
    theta = _check_theta(h, theta)
    member, offers, bought = h.pooled()
    if not len(offers):
        return np.zeros(h.n_products)
    probs, _ = _pooled_probs(member, theta)
    return offers @ probs - bought


def nll_hessian(h: SalesHistory, theta: Sequence[float]) -> np.ndarray:
    """Sum over records of ``diag(p) - p p^T`` with p the in-assortment shares."""
    theta = _check_theta(h, theta)
    member, offers, _ = h.pooled()
    if not len(offers):
        return np.zeros((h.n_products, h.n_products))
    probs, _ = _pooled_probs(member, theta)
    weighted = probs * offers[:, None]
    return np.diag(weighted.sum(axis=0)) - weighted.T @ probs


@dataclass
class MLEFit:
    v: np.ndarray
    theta: np.ndarray
    iterations: int
    converged: bool
    projected_grad_norm: float


def _projected_grad(theta, g, lo, hi):
    return theta - np.clip(theta - g, lo, hi)


def fit_mle(h: SalesHistory, R: float, *, tol: float = 1e-8, max_iter: int = 200,
            ridge: float = 1e-8) -> MLEFit:
    """Box-constrained MLE of the preference vector via projected Newton.

    Minimises the negative log-likelihood over ``theta`` in
    ``[-log R, log R]^N`` starting from ``theta = 0``. Variables sitting on a
    bound with the gradient pointing outward are frozen for the Newton solve;
    the remaining block takes a ridge-regularised Newton step with Armijo
    backtracking along the projection arc. If that step does not decrease the
    objective, a projected gradient step is tried instead.
    """
    n = h.n_products
    exposed = exposure_counts(h)
    never = np.flatnonzero(exposed == 0)
    if never.size:
        raise EstimationError(f"product {int(never[0]) + 1} was never offered")
    hi = math.log(float(R))
    lo = -hi
    theta = np.zeros(n)
    if hi == 0.0:
        return MLEFit(np.ones(n), theta, 0, True, 0.0)

    f = neg_log_likelihood(h, theta)
    g = nll_gradient(h, theta)
    pg = float(np.linalg.norm(_projected_grad(theta, g, lo, hi)))
    it = 0
    while pg > tol and it < max_iter:
        it += 1
        eps = min(1e-10, pg)
        active = ((theta <= lo + eps) & (g > 0)) | ((theta >= hi - eps) & (g < 0))
        free = ~active
        d = np.zeros(n)
        if free.any():
            H = nll_hessian(h, theta)[np.ix_(free, free)]
            H[np.diag_indices_from(H)] += ridge
            try:
                d[free] = -np.linalg.solve(H, g[free])
            except np.linalg.LinAlgError:
                d[free] = -g[free]
        new = _arc_search(h, theta, f, g, d, lo, hi)
        if new is None:
            new = _arc_search(h, theta, f, g, -g, lo, hi)
        if new is None:
            break
        theta, f = new
        g = nll_gradient(h, theta)
        pg = float(np.linalg.norm(_projected_grad(theta, g, lo, hi)))
    return MLEFit(np.exp(theta), theta, it, pg <= tol, pg)


def _arc_search(h, theta, f, g, d, lo, hi, sigma=1e-4, max_halvings=40):
    step = 1.0
    for _ in range(max_halvings):
        cand = np.clip(theta + step * d, lo, hi)
        delta = cand - theta
        if not np.any(delta):
            return None
        fc = neg_log_likelihood(h, cand)
        if fc <= f + sigma * float(g @ delta):
            return cand, fc
        # near the optimum the decrease drops below rounding noise in f
        if fc <= f + 1e-13 * max(1.0, abs(f)) and np.linalg.norm(
                _projected_grad(cand, nll_gradient(h, cand), lo, hi)) < np.linalg.norm(
                _projected_grad(theta, g, lo, hi)):
            return cand, fc
        step *= 0.5
    return None


# --- confidence constants -------------------------------------------------

@dataclass(frozen=True)
class ConfidenceParams:
    """Optimism settings for the planning LP.

    With ``enabled=False`` the LP uses the point estimate (no radius, no
    capacity tightening), as in the simulation protocol.
    """

    psi: float = 1.0
    delta: float = 0.05
    omega: float = 0.0
    enabled: bool = False

    def __post_init__(self):
        if not self.omega < 1:
            raise InvalidInputError("omega must be < 1")
        if self.enabled and self.psi <= 0:
            raise InvalidInputError("psi must be positive when enabled")


def compute_psi(R: float, N: int, T: int, q: int, K: int, delta: float,
                variant: str = "policy") -> float:
    """Scale constant of the confidence radius.

    ``variant="policy"`` includes the ``(K+1)`` factor in the log argument, as
    used to set the radius in the planning LP; ``variant="event"`` omits it,
    matching the gradient-concentration event used to bound the estimator.
    """
    if variant == "policy":
        arg = 2.0 * math.sqrt(T) * q * (K + 1) * N / delta
    elif variant == "event":
        arg = 2.0 * math.sqrt(T) * q * N / delta
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return R * (1 + N * R) ** 2 / 2.0 * math.sqrt(2.0 + 4.0 * math.log(arg))


def confidence_radius(n: float, psi: float, N: int) -> float:
    if n < 1:
        raise EstimationError("confidence radius undefined for zero exposures")
    return (math.sqrt(N) + 1.0) * psi / math.sqrt(n)


def confidence_radii(counts: np.ndarray, psi: float, N: int) -> np.ndarray:
    counts = np.asarray(counts, dtype=float)
    if np.any(counts < 1):
        raise EstimationError("confidence radius undefined for zero exposures")
    return (math.sqrt(N) + 1.0) * psi / np.sqrt(counts)


def _omega_terms(N, K, T, tau, q, psi, delta):
    conc = math.sqrt(2.0 * T * math.log(4.0 * (K + 1) / delta))
    return (
        4.0 * (math.sqrt(N) + 1.0) * math.sqrt(1.0 + N * T / (tau * q)) * psi * math.sqrt(N * N * T),
        conc,
        2.0 * N * N * psi / math.sqrt(tau) * conc,
        float(tau),
    )


def compute_omega(inst: ProblemInstance, tau: int, q: int, psi: float, delta: float) -> float:
    """Capacity-tightening fraction. Often exceeds 1 at small horizons."""
    T = inst.horizon
    terms = _omega_terms(inst.n_products, inst.n_resources, T, tau, q, psi, delta)
    return sum(terms) / (T * float(inst.capacity_rate.min()))


def regret_bound(inst: ProblemInstance, tau: int, q: int, psi: float, delta: float) -> float:
    """High-probability regret bound, reported as a diagnostic only."""
    N, K, T = inst.n_products, inst.n_resources, inst.horizon
    first, conc, _, _ = _omega_terms(N, K, T, tau, q, psi, delta)
    inner = first + (2.0 * N * N * psi / math.sqrt(tau) + N + 1) * conc + tau
    return (1.0 + 1.0 / float(inst.capacity_rate.min())) * inner
