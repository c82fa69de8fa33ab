"""Weighted multiple-instance learning: bags, bag likelihood, greedy selection."""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import ConfigError, InvalidInputError

PROB_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class SampleBag:
    """Labeled instances: anchors ``(N, 2)``, features ``(N, M)``, weights ``(N,)``.

    Positive bags carry distance-based weights summing to one; negative
    bags are uniform.
    """

    label: int
    positions: np.ndarray
    features: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if len(self.positions) < 1:
            raise InvalidInputError("a bag needs at least one instance")
        if len(self.features) != len(self.positions) or len(self.weights) != len(self.positions):
            raise InvalidInputError("positions, features and weights must align")
        if abs(float(np.sum(self.weights)) - 1.0) > 1e-10:
            raise InvalidInputError("bag weights must sum to 1")

    @classmethod
    def positive(cls, positions, features, tracked):
        positions = np.asarray(positions)
        return cls(1, positions, np.asarray(features, dtype=np.float64),
                   positive_weights(positions, tracked))

    @classmethod
    def negative(cls, positions, features):
        positions = np.asarray(positions)
        n = len(positions)
        return cls(0, positions, np.asarray(features, dtype=np.float64),
                   np.full(n, 1.0 / max(n, 1)))

    def __len__(self):
        return len(self.positions)


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple
    likelihood_trace: tuple


def positive_weights(positions, tracked):
    """exp(-distance to the tracked anchor), normalized to sum to one."""
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
    if len(positions) == 0:
        raise InvalidInputError("no positive positions")
    d = np.hypot(positions[:, 0] - tracked[0], positions[:, 1] - tracked[1])
    # shifting by the minimum distance leaves the normalized weights unchanged
    w = np.exp(-(d - d.min()))
    return w / w.sum()


def instance_probability(H):
    return expit(H)


def positive_bag_probability(instance_probs, weights):
    return float(np.dot(weights, instance_probs))


def negative_bag_probability(instance_probs):
    return float(np.mean(1.0 - np.asarray(instance_probs, dtype=np.float64)))


def bag_log_likelihood(pos_bag_prob, neg_bag_prob):
    p = np.clip(pos_bag_prob, PROB_EPS, 1.0 - PROB_EPS)
    q = np.clip(neg_bag_prob, PROB_EPS, 1.0 - PROB_EPS)
    return np.log(p) + np.log(q)


def select_features(pool, pos_bag, neg_bag, K, allowed=None):
    """Greedily pick K weak classifiers maximizing the bag log-likelihood.

    Each step adds the candidate ``m`` maximizing
    ``L(H_{k-1} + h_m)`` where ``H_{k-1}`` is the running sum of the
    already chosen weak responses per instance. Ties go to the lowest
    index. ``allowed`` optionally masks the candidate set.
    """
    M = len(pool)
    if K > M:
        raise ConfigError(f"cannot select {K} of {M} features", field="k_selected")
    if K < 1:
        raise ConfigError("K must be >= 1", field="k_selected")
    available = np.ones(M, dtype=bool) if allowed is None else np.array(allowed, dtype=bool)
    if available.sum() < K:
        raise ConfigError(f"only {int(available.sum())} candidate features for K={K}",
                          field="k_selected")

    hp = pool.log_ratios(pos_bag.features)
    hn = pool.log_ratios(neg_bag.features)
    Hp = np.zeros(len(pos_bag))
    Hn = np.zeros(len(neg_bag))
    wp = np.asarray(pos_bag.weights, dtype=np.float64)

    selected, trace = [], []
    for _ in range(K):
        p_pos = wp @ expit(Hp[:, None] + hp)
        p_neg = (1.0 - expit(Hn[:, None] + hn)).mean(axis=0)
        L = bag_log_likelihood(p_pos, p_neg)
        L = np.where(available, L, -np.inf)
        m = int(np.argmax(L))
        selected.append(m)
        trace.append(float(L[m]))
        available[m] = False
        Hp = Hp + hp[:, m]
        Hn = Hn + hn[:, m]
    return SelectionResult(tuple(selected), tuple(trace))
