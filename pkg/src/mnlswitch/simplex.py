"""Linear programs and vertex-returning solvers.

Two backends produce basic (extreme-point) optimal solutions:

* ``"simplex"`` - a dense two-phase tableau simplex written here. It starts
  with Dantzig pricing and switches to Bland's rule for good once it has made
  ``10 * (rows + cols)`` degenerate pivots.
* ``"highs"`` - the HiGHS dual simplex shipped with SciPy, for large sparse
  programs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog


class LPError(RuntimeError):
    pass


class InfeasibleLPError(LPError):
    pass


class UnboundedLPError(LPError):
    pass


@dataclass
class LinearProgram:
    """``max c @ x`` s.t. ``A_ub @ x <= b_ub``, ``A_eq @ x == b_eq``, ``lower <= x <= upper``.

    Constraint matrices may be dense arrays or SciPy sparse matrices.
    """

    c: np.ndarray
    A_ub: object
    b_ub: np.ndarray
    A_eq: object
    b_eq: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    var_names: list | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        n = self.c.shape[0]
        self.b_ub = np.asarray(self.b_ub, dtype=float).reshape(-1)
        self.b_eq = np.asarray(self.b_eq, dtype=float).reshape(-1)
        if self.A_ub is None:
            self.A_ub = np.zeros((0, n))
        if self.A_eq is None:
            self.A_eq = np.zeros((0, n))
        if not sp.issparse(self.A_ub):
            self.A_ub = np.asarray(self.A_ub, dtype=float).reshape(-1, n)
        if not sp.issparse(self.A_eq):
            self.A_eq = np.asarray(self.A_eq, dtype=float).reshape(-1, n)
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float)
        self.upper = (np.full(n, np.inf) if self.upper is None
                      else np.asarray(self.upper, dtype=float))
        for name, A, b in (("A_ub", self.A_ub, self.b_ub), ("A_eq", self.A_eq, self.b_eq)):
            if A.shape != (b.shape[0], n):
                raise ValueError(f"{name} has shape {A.shape}, expected {(b.shape[0], n)}")
        if not np.all(np.isfinite(self.c)) or not np.all(np.isfinite(self.lower)):
            raise ValueError("objective and lower bounds must be finite")

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    @property
    def n_constraints(self) -> int:
        """Rows plus finite upper bounds, each counted once."""
        return self.b_ub.shape[0] + self.b_eq.shape[0] + int(np.isfinite(self.upper).sum())

    def dense(self):
        A_ub = self.A_ub.toarray() if sp.issparse(self.A_ub) else np.asarray(self.A_ub, float)
        A_eq = self.A_eq.toarray() if sp.issparse(self.A_eq) else np.asarray(self.A_eq, float)
        return A_ub, A_eq

    def max_violation(self, x) -> float:
        """Largest constraint or bound violation of ``x`` (0 when feasible)."""
        x = np.asarray(x, dtype=float)
        viol = [0.0]
        if self.b_ub.size:
            viol.append(float(np.max(self.A_ub @ x - self.b_ub)))
        if self.b_eq.size:
            viol.append(float(np.max(np.abs(self.A_eq @ x - self.b_eq))))
        viol.append(float(np.max(self.lower - x)))
        viol.append(float(np.max(x - self.upper)))
        return max(viol)

    def dump(self) -> str:
        """Fixed plain-text layout: objective row, constraint rows, bounds."""
        names = self.var_names or [f"x{j}" for j in range(self.n_vars)]
        A_ub, A_eq = self.dense()

        def row(coefs):
            return " ".join(f"{v:+.17g}*{nm}" for v, nm in zip(coefs, names) if v != 0) or "0"

        out = [f"MAX {row(self.c)}", "SUBJECT TO"]
        out += [f"R{i}: {row(A_ub[i])} <= {self.b_ub[i]:.17g}" for i in range(A_ub.shape[0])]
        out += [f"E{i}: {row(A_eq[i])} = {self.b_eq[i]:.17g}" for i in range(A_eq.shape[0])]
        out.append("BOUNDS")
        out += [f"{lo:.17g} <= {nm} <= {hi:.17g}"
                for nm, lo, hi in zip(names, self.lower, self.upper)]
        out.append("END")
        return "\n".join(out) + "\n"


@dataclass
class LPResult:
    x: np.ndarray
    objective: float
    duals_ub: np.ndarray
    duals_eq: np.ndarray
    is_basic: bool
    iterations: int
    backend: str


def linprog_basic(lp: LinearProgram, backend: str = "highs") -> LPResult:
    """Return a basic optimal solution of ``lp``.

    Duals are shadow prices of the maximisation (nonnegative on ``<=`` rows).
    """
    if backend == "highs":
        return _solve_highs(lp)
    if backend == "simplex":
        return DenseSimplex(lp).solve()
    raise ValueError(f"unknown backend {backend!r}")


def _solve_highs(lp: LinearProgram) -> LPResult:
    bounds = [(lo, None if np.isinf(hi) else hi) for lo, hi in zip(lp.lower, lp.upper)]
    kw = {}
    if lp.b_ub.size:
        kw.update(A_ub=lp.A_ub, b_ub=lp.b_ub)
    if lp.b_eq.size:
        kw.update(A_eq=lp.A_eq, b_eq=lp.b_eq)
    res = linprog(-lp.c, bounds=bounds, method="highs-ds", **kw)
    if res.status == 2:
        raise InfeasibleLPError(res.message)
    if res.status == 3:
        raise UnboundedLPError(res.message)
    if res.status != 0:
        raise LPError(res.message)
    duals_ub = -np.asarray(res.ineqlin.marginals) if lp.b_ub.size else np.zeros(0)
    duals_eq = -np.asarray(res.eqlin.marginals) if lp.b_eq.size else np.zeros(0)
    return LPResult(np.asarray(res.x), float(lp.c @ res.x), duals_ub, duals_eq,
                    True, int(res.nit), "highs")


class DenseSimplex:
    """Two-phase tableau simplex on the standard form ``A z = b, z >= 0, b >= 0``.

    Column layout of the standard form: shifted structural variables, one
    slack per ``<=`` row (original rows first, then rows created from finite
    upper bounds), then artificials.
    """

    tol = 1e-9

    def __init__(self, lp: LinearProgram, max_iter: int | None = None):
        self.lp = lp
        A_ub, A_eq = lp.dense()
        n = lp.n_vars
        lo = lp.lower
        b_ub = lp.b_ub - A_ub @ lo
        b_eq = lp.b_eq - A_eq @ lo
        ub_cols = np.flatnonzero(np.isfinite(lp.upper))
        if ub_cols.size:
            extra = np.zeros((ub_cols.size, n))
            extra[np.arange(ub_cols.size), ub_cols] = 1.0
            A_ub = np.vstack([A_ub, extra])
            b_ub = np.concatenate([b_ub, lp.upper[ub_cols] - lo[ub_cols]])
        self.m_ub_orig = lp.b_ub.shape[0]
        m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
        m = m_ub + m_eq
        A = np.zeros((m, n + m_ub))
        A[:m_ub, :n] = A_ub
        A[:m_ub, n:] = np.eye(m_ub)
        A[m_ub:, :n] = A_eq
        b = np.concatenate([b_ub, b_eq])
        self.sign = np.where(b < 0, -1.0, 1.0)
        A *= self.sign[:, None]
        b = b * self.sign
        self.n, self.m_ub, self.m_eq = n, m_ub, m_eq
        self.A_std, self.b_std = A, b
        self.c_std = np.concatenate([lp.c, np.zeros(m_ub)])
        self.max_iter = max_iter or 50 * (m + n + m_ub) + 1000

    def solve(self) -> LPResult:
        A, b = self.A_std, self.b_std
        m, ns = A.shape
        # an initial basis column per row: its own slack if sign stayed +1
        basis = np.full(m, -1)
        for r in range(self.m_ub):
            if self.sign[r] > 0:
                basis[r] = self.n + r
        art_rows = np.flatnonzero(basis < 0)
        n_art = art_rows.size
        tab = np.zeros((m, ns + n_art))
        tab[:, :ns] = A
        tab[art_rows, ns + np.arange(n_art)] = 1.0
        basis[art_rows] = ns + np.arange(n_art)
        rhs = b.copy()
        self.iterations = 0
        self._bland = False
        self._degenerate = 0

        if n_art:
            cost = np.zeros(ns + n_art)
            cost[ns:] = -1.0
            tab, rhs, basis = self._iterate(tab, rhs, basis, cost, phase=1)
            infeas = float(rhs[basis >= ns].sum())
            if infeas > 1e-7 * max(1.0, float(np.abs(b).max(initial=0.0))):
                raise InfeasibleLPError(f"phase 1 ended with infeasibility {infeas:.3g}")
            tab, rhs, basis = self._drive_out_artificials(tab, rhs, basis, ns)
        tab = tab[:, :ns]
        tab, rhs, basis = self._iterate(tab, rhs, basis, self.c_std, phase=2)
        return self._result(basis)

    def _iterate(self, tab, rhs, basis, cost, phase):
        m, ncol = tab.shape
        d = cost - cost[basis] @ tab
        limit = 10 * (m + ncol)
        tol = self.tol
        while True:
            if self.iterations >= self.max_iter:
                raise LPError("simplex iteration limit reached")
            cand = np.flatnonzero(d > tol)
            if phase == 2:
                cand = cand[cand < ncol]
            if cand.size == 0:
                return tab, rhs, basis
            j = int(cand[0]) if self._bland else int(cand[np.argmax(d[cand])])
            col = tab[:, j]
            pos = np.flatnonzero(col > tol)
            if pos.size == 0:
                raise UnboundedLPError("objective unbounded along a simplex ray")
            ratios = rhs[pos] / col[pos]
            best = ratios.min()
            ties = pos[ratios <= best + tol]
            if self._bland:
                r = int(ties[np.argmin(basis[ties])])
            else:
                r = int(ties[np.argmax(col[ties])])
            if best <= tol:
                self._degenerate += 1
                if self._degenerate > limit:
                    self._bland = True
            self._pivot(tab, rhs, d, r, j)
            basis[r] = j
            self.iterations += 1

    @staticmethod
    def _pivot(tab, rhs, d, r, j):
        piv = tab[r, j]
        tab[r] /= piv
        rhs[r] /= piv
        col = tab[:, j].copy()
        col[r] = 0.0
        tab -= np.outer(col, tab[r])
        rhs -= col * rhs[r]
        np.maximum(rhs, 0.0, out=rhs)
        d -= d[j] * tab[r]

    def _drive_out_artificials(self, tab, rhs, basis, ns):
        keep = np.ones(tab.shape[0], dtype=bool)
        dummy = np.zeros(tab.shape[1])
        for r in range(tab.shape[0]):
            if basis[r] < ns:
                continue
            row = np.abs(tab[r, :ns])
            j = int(np.argmax(row))
            if row[j] > 1e-9:
                self._pivot(tab, rhs, dummy, r, j)
                basis[r] = j
            else:
                keep[r] = False  # redundant equality
        self._kept_rows = keep
        return tab[keep], rhs[keep], basis[keep]

    def _result(self, basis) -> LPResult:
        keep = getattr(self, "_kept_rows", np.ones(self.A_std.shape[0], dtype=bool))
        A = self.A_std[keep]
        b = self.b_std[keep]
        B = A[:, basis]
        z = np.zeros(A.shape[1])
        z[basis] = np.linalg.solve(B, b)
        z = np.maximum(z, 0.0)
        y_kept = np.linalg.solve(B.T, self.c_std[basis])
        y = np.zeros(self.A_std.shape[0])
        y[keep] = y_kept
        y *= self.sign
        x = z[: self.n] + self.lp.lower
        duals_ub = y[: self.m_ub_orig]
        duals_eq = y[self.m_ub:]
        return LPResult(x, float(self.lp.c @ x), duals_ub, duals_eq, True,
                        self.iterations, "simplex")
