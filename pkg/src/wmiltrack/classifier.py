"""Gaussian naive-Bayes weak classifiers with exponential-forgetting updates."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

DEFAULT_SIGMA_FLOOR = 1e-2


@dataclass(frozen=True)
class GaussianPair:
    mu1: float
    sigma1: float
    mu0: float
    sigma0: float


def weak_log_ratio(value, p):
    """log N(value; mu1, sigma1) - log N(value; mu0, sigma0).

    Works elementwise when ``value`` and the pair's fields are arrays.
    """
    z1 = (value - p.mu1) / p.sigma1
    z0 = (value - p.mu0) / p.sigma0
    return np.log(p.sigma0 / p.sigma1) - 0.5 * z1 * z1 + 0.5 * z0 * z0


def batch_moments(values, weights=None):
    """Mean and (population) standard deviation, optionally weighted."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape[0] == 0:
        raise InvalidInputError("cannot take moments of an empty batch")
    if weights is None:
        mu = values.mean(axis=0)
        var = ((values - mu) ** 2).mean(axis=0)
    else:
        weights = np.asarray(weights, dtype=np.float64)
        wsum = weights.sum()
        w = weights.reshape((-1,) + (1,) * (values.ndim - 1)) / wsum
        mu = (w * values).sum(axis=0)
        var = (w * (values - mu) ** 2).sum(axis=0)
    return mu, np.sqrt(np.maximum(var, 0.0))


def blend(mu, sigma, batch_mu, batch_sigma, lam, sigma_floor):
    """Forgetting-factor blend of running (mu, sigma) with batch moments."""
    new_mu = lam * mu + (1.0 - lam) * batch_mu
    new_var = (lam * sigma ** 2 + (1.0 - lam) * batch_sigma ** 2
               + lam * (1.0 - lam) * (mu - batch_mu) ** 2)
    return new_mu, np.maximum(np.sqrt(new_var), sigma_floor)


def update_pair(p, values, weights=None, cls=1, lam=0.9, sigma_floor=DEFAULT_SIGMA_FLOOR):
    """Blend one batch of feature values into the ``cls`` side of ``p``."""
    if len(values) == 0:
        raise InvalidInputError("update needs at least one value")
    if weights is not None and np.any(np.asarray(weights) < 0):
        raise InvalidInputError("weights must be non-negative")
    bmu, bsig = batch_moments(values, weights)
    if cls == 1:
        mu, sig = blend(p.mu1, p.sigma1, bmu, bsig, lam, sigma_floor)
        return GaussianPair(float(mu), float(sig), p.mu0, p.sigma0)
    if cls == 0:
        mu, sig = blend(p.mu0, p.sigma0, bmu, bsig, lam, sigma_floor)
        return GaussianPair(p.mu1, p.sigma1, float(mu), float(sig))
    raise InvalidInputError(f"class label must be 0 or 1, got {cls!r}")


class ClassifierPool:
    """M weak classifiers stored column-wise for vectorized scoring.

    Writers must be serialized; ``copy()`` gives an independent pool.
    """

    def __init__(self, mu1, sigma1, mu0, sigma0, lam=0.9, sigma_floor=DEFAULT_SIGMA_FLOOR):
        if sigma_floor <= 0:
            raise InvalidInputError("sigma_floor must be positive")
        if not 0.0 <= lam <= 1.0:
            raise InvalidInputError("lambda must lie in [0, 1]")
        self.mu1 = np.array(mu1, dtype=np.float64)
        self.mu0 = np.array(mu0, dtype=np.float64)
        self.sigma1 = np.maximum(np.array(sigma1, dtype=np.float64), sigma_floor)
        self.sigma0 = np.maximum(np.array(sigma0, dtype=np.float64), sigma_floor)
        self.lam = float(lam)
        self.sigma_floor = float(sigma_floor)

    @classmethod
    def from_batches(cls, pos_values, neg_values, pos_weights=None, lam=0.9,
                     sigma_floor=DEFAULT_SIGMA_FLOOR):
        """First-frame initialization straight from batch statistics."""
        mu1, s1 = batch_moments(pos_values, pos_weights)
        mu0, s0 = batch_moments(neg_values)
        return cls(mu1, s1, mu0, s0, lam=lam, sigma_floor=sigma_floor)

    @classmethod
    def from_pairs(cls, pairs, lam=0.9, sigma_floor=DEFAULT_SIGMA_FLOOR):
        return cls([p.mu1 for p in pairs], [p.sigma1 for p in pairs],
                   [p.mu0 for p in pairs], [p.sigma0 for p in pairs],
                   lam=lam, sigma_floor=sigma_floor)

    def __len__(self):
        return len(self.mu1)

    @property
    def params(self):
        return [self.pair(i) for i in range(len(self))]

    def pair(self, i):
        return GaussianPair(float(self.mu1[i]), float(self.sigma1[i]),
                            float(self.mu0[i]), float(self.sigma0[i]))

    def copy(self):
        return ClassifierPool(self.mu1, self.sigma1, self.mu0, self.sigma0,
                              lam=self.lam, sigma_floor=self.sigma_floor)

    def log_ratios(self, features, indices=None):
        """Weak responses for a ``(N, M)`` feature matrix.

        With ``indices`` the columns of ``features`` are taken to be those
        features, in that order.
        """
        idx = slice(None) if indices is None else np.asarray(indices)
        p = GaussianPair(self.mu1[idx], self.sigma1[idx], self.mu0[idx], self.sigma0[idx])
        return weak_log_ratio(np.asarray(features, dtype=np.float64), p)

    def update(self, pos_values, neg_values, pos_weights=None, mask=None):
        """Blend positive/negative batches into every feature (or ``mask``ed ones)."""
        pmu, psig = batch_moments(pos_values, pos_weights)
        nmu, nsig = batch_moments(neg_values)
        mu1, s1 = blend(self.mu1, self.sigma1, pmu, psig, self.lam, self.sigma_floor)
        mu0, s0 = blend(self.mu0, self.sigma0, nmu, nsig, self.lam, self.sigma_floor)
        if mask is None:
            mask = np.ones(len(self), dtype=bool)
        self.mu1 = np.where(mask, mu1, self.mu1)
        self.sigma1 = np.where(mask, s1, self.sigma1)
        self.mu0 = np.where(mask, mu0, self.mu0)
        self.sigma0 = np.where(mask, s0, self.sigma0)


def strong_response(features, pool, selected):
    """Sum of weak log-ratios over the ``selected`` features.

    ``features`` is a full length-M vector (or ``(N, M)`` matrix).
    """
    selected = list(selected)
    if not selected:
        raise InvalidInputError("strong classifier needs at least one feature")
    if len(set(selected)) != len(selected):
        raise InvalidInputError("selected features must be distinct")
    if min(selected) < 0 or max(selected) >= len(pool):
        raise InvalidInputError("selected feature index out of range")
    features = np.asarray(features, dtype=np.float64)
    return pool.log_ratios(features[..., selected], selected).sum(axis=-1)

