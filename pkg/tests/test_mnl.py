import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from mnlswitch.mnl import (InvalidInputError, ProblemInstance, choice_probabilities,
                           expected_consumption, expected_revenue, make_assortment,
                           revenue_ordered_optimum, sample_purchase)


def random_instance(rng, n, K=2, R=3.0):
    v = np.exp(rng.uniform(-np.log(R), np.log(R), n))
    return ProblemInstance(rng.random(n), rng.random((n, K)), rng.uniform(0.1, 1, K),
                           100, v, R)


def brute_share(S, v, weights):
    # term-by-term: sum_i w_i * v_i / (1 + sum_j v_j)
    total = 0.0
    for i in S:
        denom = 1.0
        for j in S:
            denom += v[j - 1]
        total += weights[i - 1] * v[i - 1] / denom
    return total


def test_symmetric_pair():
    p = choice_probabilities((1, 2), [1.0, 1.0])
    np.testing.assert_allclose(p, [1 / 3, 1 / 3, 1 / 3])


def test_empty_assortment():
    p = choice_probabilities((), [2.0, 3.0, 0.5])
    np.testing.assert_array_equal(p, [1.0, 0.0, 0.0, 0.0])


def test_unoffered_item_has_zero_probability():
    p = choice_probabilities((2,), [5.0, 0.25])
    np.testing.assert_allclose(p, [0.8, 0.0, 0.2])


def test_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        choice_probabilities((3,), [1.0, 1.0])
    inst = ProblemInstance([1.0], [[1.0]], [0.5], 10, [1.0], 1.0)
    with pytest.raises(InvalidInputError):
        expected_revenue((1,), [1.0, 1.0], inst)


def test_make_assortment_canonical():
    assert make_assortment([3, 1, 3, 2]) == (1, 2, 3)
    with pytest.raises(InvalidInputError):
        make_assortment([0, 1])
    with pytest.raises(InvalidInputError):
        make_assortment([4], n_products=3)


def test_revenue_and_consumption_examples():
    inst = ProblemInstance([1.0, 1.0], [[1.0], [0.0]], [0.5], 10, [1.0, 1.0], 1.0)
    assert expected_revenue((), inst.true_pref, inst) == 0.0
    assert expected_revenue((1, 2), inst.true_pref, inst) == pytest.approx(2 / 3)
    single = ProblemInstance([0.3], [[1.0]], [0.5], 10, [1.0], 1.0)
    assert expected_consumption((), 0, [1.0], single) == 0.0
    assert expected_consumption((1,), 0, [1.0], single) == pytest.approx(0.5)


@pytest.mark.parametrize("seed", range(20))
def test_revenue_matches_direct_summation(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    inst = random_instance(rng, n)
    for size in range(n + 1):
        for S in itertools.combinations(range(1, n + 1), size):
            assert expected_revenue(S, inst.true_pref, inst) == pytest.approx(
                brute_share(S, inst.true_pref, inst.revenue), rel=1e-13, abs=1e-15)
            for k in range(inst.n_resources):
                assert expected_consumption(S, k, inst.true_pref, inst) == pytest.approx(
                    brute_share(S, inst.true_pref, inst.consumption[:, k]), rel=1e-13,
                    abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=12), st.data())
def test_probabilities_sum_to_one(v, data):
    n = len(v)
    S = data.draw(st.sets(st.integers(1, n)))
    p = choice_probabilities(make_assortment(S), v)
    assert abs(p.sum() - 1.0) <= 1e-12
    assert np.all(p >= 0)


def test_lipschitz_in_log_preferences():
    rng = np.random.default_rng(7)
    for _ in range(2000):
        n = int(rng.integers(1, 8))
        v = np.exp(rng.normal(0, 1.5, n))
        w = np.exp(rng.normal(0, 1.5, n))
        b = rng.uniform(0, 1, n)
        S = make_assortment(np.flatnonzero(rng.random(n) < 0.6) + 1)
        idx = np.asarray(S, dtype=int)
        lhs = float(b[idx - 1] @ (choice_probabilities(S, v)[idx]
                                  - choice_probabilities(S, w)[idx]))
        rhs = float(b[idx - 1] @ np.abs(np.log(v[idx - 1] / w[idx - 1])))
        assert lhs <= rhs + 1e-12


def test_sample_empty_is_no_purchase():
    rng = np.random.default_rng(0)
    assert all(sample_purchase((), [1.0, 2.0], rng) == 0 for _ in range(100))


def test_sample_single_item_frequency():
    rng = np.random.default_rng(1)
    draws = [sample_purchase((1,), [1.0], rng) for _ in range(100_000)]
    assert 0.49 <= np.mean(np.array(draws) == 1) <= 0.51


def test_sample_pair_frequencies():
    rng = np.random.default_rng(2)
    draws = np.array([sample_purchase((1, 2), [1.0, 1.0], rng) for _ in range(100_000)])
    for i in range(3):
        assert abs(np.mean(draws == i) - 1 / 3) <= 0.01


@pytest.mark.parametrize("seed", [3, 4, 5])
def test_sample_chi_square(seed):
    rng = np.random.default_rng(seed)
    v = [0.5, 2.0, 1.0, 3.0]
    S = (1, 2, 4)
    draws = np.array([sample_purchase(S, v, rng) for _ in range(100_000)])
    p = choice_probabilities(S, v)
    observed = np.array([np.sum(draws == i) for i in (0,) + S])
    expected = 100_000 * p[[0, *S]]
    assert chisquare(observed, expected).pvalue > 0.001


def test_sample_uses_one_uniform():
    a, b = np.random.default_rng(9), np.random.default_rng(9)
    sample_purchase((1, 2), [1.0, 1.0], a)
    b.random()
    assert a.random() == b.random()


def test_revenue_ordered_optimum_matches_enumeration():
    rng = np.random.default_rng(11)
    for _ in range(30):
        n = int(rng.integers(1, 7))
        inst = random_instance(rng, n)
        best = max(expected_revenue(S, inst.true_pref, inst)
                   for size in range(n + 1)
                   for S in itertools.combinations(range(1, n + 1), size))
        S, val = revenue_ordered_optimum(inst.revenue, inst.true_pref)
        assert val == pytest.approx(best, abs=1e-13)
        assert expected_revenue(S, inst.true_pref, inst) == pytest.approx(val)


def test_instance_validation():
    with pytest.raises(InvalidInputError):
        ProblemInstance([1.5], [[0.1]], [0.5], 10, [1.0], 2.0)
    with pytest.raises(InvalidInputError):
        ProblemInstance([0.5], [[0.1]], [0.0], 10, [1.0], 2.0)
    with pytest.raises(InvalidInputError):
        ProblemInstance([0.5], [[0.1]], [0.5], 10, [3.0], 2.0)
    with pytest.raises(InvalidInputError):
        ProblemInstance([0.5, 0.2], [[0.1]], [0.5], 10, [1.0, 1.0], 2.0)
    inst = ProblemInstance([0.5], [[0.1]], [0.5], 10, [1.0], 2.0)
    assert inst.n_products == 1 and inst.n_resources == 1
    np.testing.assert_allclose(inst.initial_inventory, [5.0])
    with pytest.raises(ValueError):
        inst.revenue[0] = 0.1
