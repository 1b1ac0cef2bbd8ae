import numpy as np
import pytest
import scipy.sparse as sp

from mnlswitch.simplex import (DenseSimplex, InfeasibleLPError, LinearProgram,
                               UnboundedLPError, linprog_basic)

BACKENDS = ["simplex", "highs"]


@pytest.mark.parametrize("backend", BACKENDS)
def test_textbook_lp(backend):
    # max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), 36
    lp = LinearProgram([3, 5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18], None, [])
    res = linprog_basic(lp, backend)
    np.testing.assert_allclose(res.x, [2, 6], atol=1e-9)
    assert res.objective == pytest.approx(36)
    np.testing.assert_allclose(res.duals_ub, [0, 1.5, 1], atol=1e-9)


@pytest.mark.parametrize("backend", BACKENDS)
def test_equality_and_bounds(backend):
    # max x + 2y + 3z, x + y + z = 1, z <= 0.3, y >= 0.1
    lp = LinearProgram([1, 2, 3], None, [], [[1, 1, 1]], [1], lower=[0, 0.1, 0],
                       upper=[np.inf, np.inf, 0.3])
    res = linprog_basic(lp, backend)
    np.testing.assert_allclose(res.x, [0, 0.7, 0.3], atol=1e-9)
    assert res.objective == pytest.approx(2.3)
    assert lp.max_violation(res.x) <= 1e-12


@pytest.mark.parametrize("backend", BACKENDS)
def test_negative_rhs(backend):
    # max -x - y, -x - y <= -2, x - y <= 0
    lp = LinearProgram([-1, -1], [[-1, -1], [1, -1]], [-2, 0], None, [])
    res = linprog_basic(lp, backend)
    assert res.objective == pytest.approx(-2)
    assert lp.max_violation(res.x) <= 1e-9


@pytest.mark.parametrize("backend", BACKENDS)
def test_infeasible(backend):
    lp = LinearProgram([1, 1], [[1, 1]], [1], [[1, 1]], [2])
    with pytest.raises(InfeasibleLPError):
        linprog_basic(lp, backend)


@pytest.mark.parametrize("backend", BACKENDS)
def test_unbounded(backend):
    lp = LinearProgram([1, 0], [[-1, 1]], [1], None, [])
    with pytest.raises(UnboundedLPError):
        linprog_basic(lp, backend)


def test_beale_cycling_example():
    c = [0.75, -150, 0.02, -6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    lp = LinearProgram(c, A, [0, 0, 1], None, [])
    res = DenseSimplex(lp).solve()
    assert res.objective == pytest.approx(0.05)
    np.testing.assert_allclose(res.x, [0.04, 0, 1, 0], atol=1e-12)


def test_redundant_equalities():
    lp = LinearProgram([1, 1, 0], None, [], [[1, 1, 1], [2, 2, 2]], [1, 2],
                       upper=[0.4, 0.4, np.inf])
    res = linprog_basic(lp, "simplex")
    assert res.objective == pytest.approx(0.8)
    assert lp.max_violation(res.x) <= 1e-12


def test_sparse_input_matches_dense():
    rng = np.random.default_rng(3)
    A = rng.random((5, 7))
    A[A < 0.5] = 0
    dense = LinearProgram(rng.random(7), A, np.ones(5), np.ones((1, 7)), [1])
    sparse = LinearProgram(dense.c, sp.csr_matrix(A), np.ones(5), sp.csr_matrix(np.ones((1, 7))), [1])
    for backend in BACKENDS:
        assert linprog_basic(dense, backend).objective == pytest.approx(
            linprog_basic(sparse, backend).objective, abs=1e-12)


def random_lp(rng):
    n = int(rng.integers(2, 12))
    m = int(rng.integers(1, 10))
    A = rng.uniform(-1, 2, (m, n))
    b = rng.uniform(0.5, 3, m)
    eq = rng.random() < 0.5
    A_eq = np.abs(rng.random((1, n))) + 0.1 if eq else None
    b_eq = [1.0] if eq else []
    upper = np.where(rng.random(n) < 0.3, rng.uniform(0.2, 2, n), np.inf)
    return LinearProgram(rng.normal(size=n), A, b, A_eq, b_eq, upper=upper)


def test_random_lps_match_highs():
    rng = np.random.default_rng(11)
    compared = 0
    for _ in range(150):
        lp = random_lp(rng)
        try:
            ref = linprog_basic(lp, "highs")
        except (InfeasibleLPError, UnboundedLPError) as exc:
            with pytest.raises(type(exc)):
                linprog_basic(lp, "simplex")
            continue
        got = linprog_basic(lp, "simplex")
        assert got.objective == pytest.approx(ref.objective, abs=1e-8 * (1 + abs(ref.objective)))
        assert lp.max_violation(got.x) <= 1e-9
        compared += 1
    assert compared >= 50


def test_duals_certify_optimality():
    """Nonnegative inequality duals whose value equals the primal optimum."""
    rng = np.random.default_rng(5)
    for _ in range(40):
        n, m = 6, 4
        A = rng.uniform(0, 1, (m, n))
        lp = LinearProgram(rng.uniform(0, 1, n), A, rng.uniform(0.5, 1, m), np.ones((1, n)), [1])
        res = linprog_basic(lp, "simplex")
        assert np.all(res.duals_ub >= -1e-10)
        dual_value = res.duals_ub @ lp.b_ub + res.duals_eq @ lp.b_eq
        assert dual_value == pytest.approx(res.objective, abs=1e-10)
        reduced = lp.c - A.T @ res.duals_ub - lp.A_eq.T @ res.duals_eq
        assert np.all(reduced <= 1e-10)
        ref = linprog_basic(lp, "highs")
        if np.all(np.abs(ref.duals_ub) > 1e-7) or np.sum(res.x > 1e-9) == m + 1:
            np.testing.assert_allclose(res.duals_ub, ref.duals_ub, atol=1e-7)


def test_basic_solution_support():
    rng = np.random.default_rng(8)
    for _ in range(30):
        m, n = 3, 20
        A = rng.random((m, n))
        A[:, 0] = 0.0  # an idle column keeps the program feasible
        lp = LinearProgram(rng.random(n), A, rng.uniform(0.2, 0.5, m), np.ones((1, n)), [1])
        res = linprog_basic(lp, "simplex")
        assert res.is_basic
        assert np.sum(res.x > 1e-12) <= m + 1


def test_dump_layout():
    lp = LinearProgram([1, -2], [[1, 1]], [4], [[1, 0]], [1], upper=[np.inf, 3],
                       var_names=["a", "b"])
    text = lp.dump()
    assert text.splitlines() == [
        "MAX +1*a -2*b",
        "SUBJECT TO",
        "R0: +1*a +1*b <= 4",
        "E0: +1*a = 1",
        "BOUNDS",
        "0 <= a <= inf",
        "0 <= b <= 3",
        "END",
    ]
    assert lp.n_constraints == 3


def test_shape_validation():
    with pytest.raises(ValueError):
        LinearProgram([1, 1], [[1, 1, 1]], [1], None, [])
    with pytest.raises(ValueError):
        linprog_basic(LinearProgram([1], None, [], None, []), "nope")
