import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wmiltrack import ConfigError, InvalidInputError
from wmiltrack.classifier import ClassifierPool
from wmiltrack.wmil import (SampleBag, bag_log_likelihood, instance_probability,
                            negative_bag_probability, positive_bag_probability,
                            positive_weights, select_features)

from conftest import greedy_oracle


def test_single_positive_has_weight_one():
    assert positive_weights([(3, 4)], (0, 0)).tolist() == [1.0]


def test_two_positive_weights_by_hand():
    w = positive_weights([(10, 10), (11, 10)], (10, 10))
    e = math.exp(-1)
    assert w[0] == pytest.approx(1 / (1 + e), abs=1e-12)
    assert w[1] == pytest.approx(e / (1 + e), abs=1e-12)
    assert w[0] == pytest.approx(0.7311, abs=1e-4)


def test_tracked_sample_weighs_most():
    pos = [(x, y) for x in range(-4, 5) for y in range(-4, 5) if x * x + y * y < 16]
    w = positive_weights(pos, (0, 0))
    assert pos[int(np.argmax(w))] == (0, 0)


def test_far_samples_do_not_underflow():
    w = positive_weights([(2000, 0), (2001, 0)], (0, 0))
    assert np.all(np.isfinite(w)) and w.sum() == pytest.approx(1.0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(-30, 30), st.integers(-30, 30)), min_size=1, max_size=30),
       st.randoms(use_true_random=False))
def test_weights_normalized_and_permutation_invariant(points, rnd):
    w = positive_weights(points, (0, 0))
    assert abs(w.sum() - 1.0) <= 1e-10
    order = list(range(len(points)))
    rnd.shuffle(order)
    w2 = positive_weights([points[i] for i in order], (0, 0))
    np.testing.assert_allclose(w2, w[order], rtol=1e-12)


def test_instance_probability_values():
    assert instance_probability(0.0) == 0.5
    assert instance_probability(1.0) == pytest.approx(0.7311, abs=1e-4)
    assert instance_probability(1e6) == 1.0
    assert instance_probability(-1e6) == 0.0


def test_bag_probabilities_by_hand():
    assert positive_bag_probability([0.5, 0.5], [0.3, 0.7]) == pytest.approx(0.5)
    assert positive_bag_probability([0.9, 0.1], [1.0, 0.0]) == pytest.approx(0.9)
    assert positive_bag_probability([0.8, 0.4], [0.7311, 0.2689]) == pytest.approx(0.6924, abs=1e-4)
    assert negative_bag_probability([0.0, 0.0]) == 1.0
    assert negative_bag_probability([0.5, 0.5]) == 0.5
    assert negative_bag_probability([0.2, 0.4]) == pytest.approx(0.7)


def test_log_likelihood_values():
    assert bag_log_likelihood(1.0, 1.0) == pytest.approx(0.0, abs=1e-11)
    assert bag_log_likelihood(0.5, 0.5) == pytest.approx(-1.3863, abs=1e-4)
    assert math.isfinite(bag_log_likelihood(0.0, 0.0))


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_log_likelihood_monotone_and_finite(a, b, c):
    lo, hi = sorted((a, b))
    assert bag_log_likelihood(lo, c) <= bag_log_likelihood(hi, c)
    assert bag_log_likelihood(c, lo) <= bag_log_likelihood(c, hi)
    assert math.isfinite(bag_log_likelihood(a, b))


def random_problem(rng, M=10, n_pos=10, n_neg=10):
    pool = ClassifierPool(rng.normal(1, 1, M), rng.uniform(0.5, 2, M),
                          rng.normal(-1, 1, M), rng.uniform(0.5, 2, M))
    pos_xy = rng.integers(-3, 4, size=(n_pos, 2))
    pos = SampleBag.positive(pos_xy, rng.normal(0.5, 1.5, (n_pos, M)), (0, 0))
    neg = SampleBag.negative(rng.integers(-20, 20, size=(n_neg, 2)),
                             rng.normal(-0.5, 1.5, (n_neg, M)))
    return pool, pos, neg


def run_oracle(pool, pos, neg, K):
    return greedy_oracle(pool.mu1.tolist(), pool.sigma1.tolist(), pool.mu0.tolist(),
                         pool.sigma0.tolist(), pos.features.tolist(), pos.weights.tolist(),
                         neg.features.tolist(), K)


def test_greedy_matches_brute_force_oracle(rng):
    for _ in range(30):
        pool, pos, neg = random_problem(rng)
        got = select_features(pool, pos, neg, 3)
        assert list(got.selected) == run_oracle(pool, pos, neg, 3)
        assert len(got.likelihood_trace) == 3


def test_every_pick_is_the_single_step_argmax(rng):
    pool, pos, neg = random_problem(rng, M=12)
    result = select_features(pool, pos, neg, 5)
    hp, hn = pool.log_ratios(pos.features), pool.log_ratios(neg.features)
    chosen = []
    for pick, traced in zip(result.selected, result.likelihood_trace):
        scores = {}
        for m in range(12):
            if m in chosen:
                continue
            cols = chosen + [m]
            pp = positive_bag_probability(instance_probability(hp[:, cols].sum(1)), pos.weights)
            pn = negative_bag_probability(instance_probability(hn[:, cols].sum(1)))
            scores[m] = bag_log_likelihood(pp, pn)
        assert scores[pick] == pytest.approx(max(scores.values()), abs=1e-12)
        assert traced == pytest.approx(scores[pick], abs=1e-12)
        chosen.append(pick)


def test_zero_feature_never_picked_first():
    # feature 0 is symmetric so its weak response is identically zero
    pool = ClassifierPool([0.0, 2.0], [1.0, 1.0], [0.0, -2.0], [1.0, 1.0])
    pos = SampleBag.positive([(0, 0), (1, 0)], [[5.0, 2.0], [3.0, 1.5]], (0, 0))
    neg = SampleBag.negative([(10, 0), (0, 10)], [[1.0, -2.0], [2.0, -1.0]])
    assert select_features(pool, pos, neg, 1).selected == (1,)
    assert select_features(pool, pos, neg, 2).selected == (1, 0)


def test_ties_go_to_the_lowest_index():
    pool = ClassifierPool([1.0] * 4, [1.0] * 4, [-1.0] * 4, [1.0] * 4)
    feats = np.ones((3, 4))
    pos = SampleBag.positive([(0, 0), (1, 0), (0, 1)], feats, (0, 0))
    neg = SampleBag.negative([(9, 9)], -np.ones((1, 4)))
    assert select_features(pool, pos, neg, 4).selected == (0, 1, 2, 3)


def test_k_equal_m_selects_everything(rng):
    pool, pos, neg = random_problem(rng, M=6)
    assert sorted(select_features(pool, pos, neg, 6).selected) == list(range(6))


def test_selection_is_deterministic(rng):
    pool, pos, neg = random_problem(rng, M=30, n_pos=45, n_neg=50)
    a = select_features(pool, pos, neg, 10)
    b = select_features(pool.copy(), pos, neg, 10)
    assert a == b


def test_allowed_mask_is_respected(rng):
    pool, pos, neg = random_problem(rng, M=10)
    allowed = np.array([i % 2 == 0 for i in range(10)])
    sel = select_features(pool, pos, neg, 3, allowed=allowed).selected
    assert all(i % 2 == 0 for i in sel)


def test_bad_k_raises(rng):
    pool, pos, neg = random_problem(rng, M=5)
    with pytest.raises(ConfigError):
        select_features(pool, pos, neg, 6)
    with pytest.raises(ConfigError):
        select_features(pool, pos, neg, 0)
    with pytest.raises(ConfigError):
        select_features(pool, pos, neg, 3, allowed=[True, False, False, False, True])


def test_bags_validate_their_contents():
    with pytest.raises(InvalidInputError):
        SampleBag.negative(np.zeros((0, 2)), np.zeros((0, 3)))
    with pytest.raises(InvalidInputError):
        SampleBag(1, np.zeros((2, 2)), np.zeros((2, 3)), np.array([0.5, 0.4]))
