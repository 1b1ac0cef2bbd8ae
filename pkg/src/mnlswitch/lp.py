"""Planning LPs over randomised assortments.

The exponential formulation has one column per subset of products. The
compact formulation replaces it with variables

    x0            no-purchase share
    x[i]          purchase-share scale of product i   (x[i] <= x0)
    y[i, j]       pairwise terms, y[i, j] <= min(x[i], x[j])

laid out in that order, ``y`` row-major. Both give the same optimum, and a
vertex of the compact program maps back to a distribution over nested
assortments.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .estimation import ConfidenceParams, confidence_radii
from .mnl import Assortment, ProblemInstance, as_preference, make_assortment
from .simplex import InfeasibleLPError, LinearProgram, LPError, linprog_basic

ENUMERATION_LIMIT = 20
ATOM_THRESHOLD = 1e-12


class RecoveryError(ValueError):
    """Recovery was asked to run on a solution not known to be a vertex."""


class SizeError(ValueError):
    """The exponential formulation was requested for too many products."""


@dataclass(frozen=True)
class AssortmentDistribution:
    atoms: tuple  # ((Assortment, weight), ...)

    def __post_init__(self):
        atoms = tuple((make_assortment(S), float(w)) for S, w in self.atoms)
        if any(w < 0 for _, w in atoms):
            raise ValueError("weights must be nonnegative")
        if len({S for S, _ in atoms}) != len(atoms):
            raise ValueError("assortments must be distinct")
        total = sum(w for _, w in atoms)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "atoms", atoms)

    def __len__(self):
        return len(self.atoms)

    @property
    def assortments(self) -> list:
        return [S for S, _ in self.atoms]

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])

    def as_dict(self) -> dict:
        return dict(self.atoms)

    def evaluate(self, v, eps, inst: ProblemInstance):
        """Objective and per-resource consumption under optimistic coefficients."""
        reward, cons = ucb_coefficients(self.assortments, v, eps, inst)
        w = self.weights
        return float(reward @ w), cons.T @ w


def _membership(assortments, n):
    M = np.zeros((len(assortments), n))
    for u, S in enumerate(assortments):
        if S:
            M[u, np.asarray(S) - 1] = 1.0
    return M


def _coefficients_from_membership(M, v, eps, inst):
    share = M * v / (1.0 + M @ v)[:, None]
    reward = (share + M * eps) @ inst.revenue
    cons = (share - M * eps) @ inst.consumption
    return reward, cons


def ucb_coefficients(assortments, v, eps, inst: ProblemInstance):
    """Per-assortment optimistic revenue and pessimistic consumption.

    Returns ``reward`` of shape (m,) and ``consumption`` of shape (m, K).
    With ``eps = 0`` these are the plain expected revenue and consumption.
    """
    v = as_preference(v)
    eps = np.zeros_like(v) if eps is None else np.asarray(eps, dtype=float)
    return _coefficients_from_membership(_membership(assortments, v.size), v, eps, inst)


def _radii(counts, conf, n):
    if conf is None or not conf.enabled:
        return np.zeros(n), 0.0
    return confidence_radii(counts, conf.psi, n), float(conf.omega)


# --- compact formulation --------------------------------------------------

@lru_cache(maxsize=8)
def _linking_rows(n: int) -> sp.csr_matrix:
    """Rows ``x_i - x0 <= 0`` then ``y_ij - x_i <= 0``, ``y_ij - x_j <= 0``."""
    nv = 1 + n + n * n
    i, j = np.divmod(np.arange(n * n), n)
    y = 1 + n + np.arange(n * n)
    rows = np.arange(n + 2 * n * n)
    plus = np.concatenate([1 + np.arange(n), np.repeat(y, 2)])
    minus = np.concatenate([np.zeros(n, dtype=int), 1 + np.column_stack([i, j]).ravel()])
    data = np.concatenate([np.ones(rows.size), -np.ones(rows.size)])
    A = sp.coo_matrix((data, (np.tile(rows, 2), np.concatenate([plus, minus]))),
                      shape=(rows.size, nv))
    return A.tocsr()


def build_compact_lp(v_hat, counts, conf: ConfidenceParams | None,
                     inst: ProblemInstance) -> LinearProgram:
    v = as_preference(v_hat)
    n, K = inst.n_products, inst.n_resources
    if v.size != n:
        raise ValueError("preference vector does not match the instance")
    eps, omega = _radii(counts, conf, n)
    nv = 1 + n + n * n
    xi = 1 + np.arange(n)

    c = np.zeros(nv)
    r = inst.revenue
    c[xi] = r * (v + eps)
    c[1 + n:] = np.outer(r * eps, v).ravel()

    a = inst.consumption  # (n, K)
    res = np.zeros((K, nv))
    res[:, xi] = (a * (v - eps)[:, None]).T
    res[:, 1 + n:] = -np.einsum("ik,i,j->kij", a, eps, v).reshape(K, n * n)

    link = _linking_rows(n)
    A_ub = sp.vstack([sp.csr_matrix(res), link], format="csr")
    b_ub = np.concatenate([(1.0 - omega) * inst.capacity_rate, np.zeros(link.shape[0])])
    A_eq = np.zeros((1, nv))
    A_eq[0, 0] = 1.0
    A_eq[0, xi] = v
    names = ["x0"] + [f"x{i + 1}" for i in range(n)] + [
        f"y{i + 1}_{j + 1}" for i in range(n) for j in range(n)]
    return LinearProgram(c, A_ub, b_ub, sp.csr_matrix(A_eq), np.ones(1),
                         var_names=names,
                         meta={"kind": "compact", "n": n, "K": K, "v": v,
                               "eps": eps, "omega": omega})


@dataclass
class CompactSolution:
    x0: float
    x: np.ndarray
    y: np.ndarray
    objective: float
    duals_resource: np.ndarray
    is_vertex: bool
    raw: np.ndarray


def solve_lp_basic(lp: LinearProgram, backend: str = "highs",
                   maximize_x0: bool = True) -> CompactSolution:
    """Vertex-optimal solution of a compact LP.

    After the first solve, a second LP maximises ``x0`` over the optimal face,
    which picks a well-defined vertex when the optimum is not unique. The face
    is cut out by complementary slackness against the first solve's duals:
    rows with a positive dual become equalities and variables with a negative
    reduced cost are fixed at their lower bound. Resource duals come from the
    first solve.
    """
    if lp.meta.get("kind") != "compact":
        raise ValueError("solve_lp_basic expects a program from build_compact_lp")
    n, K = lp.meta["n"], lp.meta["K"]
    first = linprog_basic(lp, backend)
    z = first.x
    if maximize_x0:
        face = _optimal_face(lp, first)
        try:
            z2 = linprog_basic(face, backend).x
            if lp.c @ z2 >= first.objective - 1e-10 * max(1.0, abs(first.objective)):
                z = z2
        except LPError:
            pass  # the first vertex is still optimal
    return CompactSolution(
        x0=float(z[0]), x=z[1:1 + n].copy(), y=z[1 + n:].reshape(n, n).copy(),
        objective=float(lp.c @ z), duals_resource=first.duals_ub[:K].copy(),
        is_vertex=first.is_basic, raw=z)


def _optimal_face(lp: LinearProgram, res) -> LinearProgram:
    tol = 1e-9
    reduced = lp.c - lp.A_ub.T @ res.duals_ub - lp.A_eq.T @ res.duals_eq
    upper = lp.upper.copy()
    pinned = reduced < -tol
    upper[pinned] = lp.lower[pinned]
    tight = res.duals_ub > tol
    A_ub = lp.A_ub[~tight]
    A_eq = sp.vstack([sp.csr_matrix(lp.A_eq), sp.csr_matrix(lp.A_ub[tight])]).tocsr()
    b_eq = np.concatenate([lp.b_eq, lp.b_ub[tight]])
    c = np.zeros(lp.n_vars)
    c[0] = 1.0
    return LinearProgram(c, A_ub, lp.b_ub[~tight], A_eq, b_eq, lp.lower, upper)


def recover_distribution(sol: CompactSolution, v_hat) -> AssortmentDistribution:
    """Map a compact vertex to weights on nested assortments.

    Products are ranked by ``x`` (descending, ties by ascending id); the set
    of the top ``m`` products gets weight ``(x_(m) - x_(m+1)) * (1 + V)``
    where ``V`` is its total preference weight and ``x_(0) = x0``.
    """
    if not sol.is_vertex:
        raise RecoveryError("recovery needs a basic (vertex) solution")
    v = as_preference(v_hat)
    n = v.size
    order = sorted(range(n), key=lambda i: (-sol.x[i], i))
    levels = np.concatenate([[sol.x0], sol.x[order], [0.0]])
    gaps = np.maximum(levels[:-1] - levels[1:], 0.0)
    V = np.concatenate([[0.0], np.cumsum(v[order])])
    weights = gaps * (1.0 + V)
    atoms = [(make_assortment(p + 1 for p in order[:m]), w)
             for m, w in enumerate(weights) if w >= ATOM_THRESHOLD]
    total = sum(w for _, w in atoms)
    return AssortmentDistribution(tuple((S, w / total) for S, w in atoms))


# --- exponential formulation ----------------------------------------------

def _solve_over_columns(reward, cons, cap):
    m = reward.size
    lp = LinearProgram(reward, cons.T, cap, np.ones((1, m)), np.ones(1))
    return linprog_basic(lp, "simplex")


def _atoms(assortments, w):
    keep = np.flatnonzero(w >= ATOM_THRESHOLD)
    total = w[keep].sum()
    return AssortmentDistribution(tuple((assortments[k], w[k] / total) for k in keep))


def reduce_support(dist: AssortmentDistribution, v_hat, counts, conf, inst) -> AssortmentDistribution:
    """Re-solve over ``dist``'s own atoms to get a basic solution (<= K+1 atoms)."""
    if len(dist) <= inst.n_resources + 1:
        return dist
    v = as_preference(v_hat)
    eps, omega = _radii(counts, conf, v.size)
    reward, cons = ucb_coefficients(dist.assortments, v, eps, inst)
    cap = (1.0 - omega) * inst.capacity_rate
    # the input may overshoot capacity by rounding; never tighter than itself
    cap = np.maximum(cap, cons.T @ dist.weights)
    res = _solve_over_columns(reward, cons, cap)
    return _atoms(dist.assortments, res.x)


def all_assortments(n: int) -> list:
    return [tuple(i + 1 for i in range(n) if mask >> i & 1) for mask in range(1 << n)]


def enumerate_ucb_lp(v, counts, conf, inst: ProblemInstance, *,
                     return_duals: bool = False, limit: int = ENUMERATION_LIMIT):
    """Solve the one-column-per-subset program directly.

    Returns ``(objective, distribution)``, plus resource duals when asked.
    """
    v = as_preference(v)
    n = v.size
    if n > limit:
        raise SizeError(f"{n} products exceeds the enumeration limit of {limit}")
    eps, omega = _radii(counts, conf, n)
    masks = np.arange(1 << n)
    M = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
    reward, cons = _coefficients_from_membership(M, v, eps, inst)
    res = _solve_over_columns(reward, cons, (1.0 - omega) * inst.capacity_rate)
    dist = _atoms(all_assortments(n), res.x)
    if return_duals:
        return res.objective, dist, res.duals_ub
    return res.objective, dist


def fluid_benchmark(inst: ProblemInstance, method: str = "auto") -> float:
    """Horizon times the optimum of the full-information fluid LP."""
    if method == "auto":
        method = "enumerate" if inst.n_products <= 10 else "compact"
    if method == "enumerate":
        opt, _ = enumerate_ucb_lp(inst.true_pref, None, None, inst)
    elif method == "compact":
        lp = build_compact_lp(inst.true_pref, None, None, inst)
        opt = solve_lp_basic(lp, maximize_x0=False).objective
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(inst.horizon * opt)


__all__ = [
    "AssortmentDistribution", "CompactSolution", "InfeasibleLPError", "RecoveryError",
    "SizeError", "all_assortments", "build_compact_lp", "enumerate_ucb_lp",
    "fluid_benchmark", "recover_distribution", "reduce_support", "solve_lp_basic",
    "ucb_coefficients",
]
