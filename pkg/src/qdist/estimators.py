"""scikit-learn style wrappers around the discriminators.

``fit`` takes the two reference distributions as a ``(2, |A|)`` array (row
0 is labelled ``classes_[0]``, row 1 ``classes_[1]``); ``predict`` labels
new inputs. Quantum discriminators predict on a sequence of
:class:`~qdist.oracles.OracleInstance`, the classical one on an integer
array of samples (one row per run).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import discriminators as disc
from .distributions import ProbDist, make_rng, metrics
from .oracles import OracleInstance


def check_distribution_pair(X) -> tuple[ProbDist, ProbDist]:
    """Validate a ``(2, |A|)`` array of probability rows."""
    X = check_array(X, dtype=float, ensure_min_features=1)
    if X.shape[0] != 2:
        raise ValueError(f"expected two distributions (rows), got {X.shape[0]}")
    p, q = ProbDist(X[0]), ProbDist(X[1])
    if p == q:
        raise ValueError("the two distributions coincide")
    return p, q


def check_oracles(X, model: str) -> list:
    if isinstance(X, OracleInstance):
        X = [X]
    X = list(X)
    if not X:
        raise ValueError("no oracles to classify")
    for o in X:
        if not isinstance(o, OracleInstance):
            raise TypeError(f"expected OracleInstance, got {type(o).__name__}")
        if o.model != model:
            raise ValueError(f"expected model {model} oracles, got {o.model}")
    return X


class _PairDiscriminator(ClassifierMixin, BaseEstimator):
    def fit(self, X, y=None):
        self.p_, self.q_ = check_distribution_pair(X)
        self.classes_ = np.array(["P", "Q"] if y is None else list(y))
        if self.classes_.shape != (2,) or self.classes_[0] == self.classes_[1]:
            raise ValueError("y must hold two distinct labels")
        self.metrics_ = metrics(self.p_, self.q_)
        self.n_features_in_ = self.p_.size
        return self

    def _label(self, decision: str):
        return self.classes_[0] if decision == disc.P_LABEL else self.classes_[1]

    def _stream(self, i: int):
        seed = 0 if self.random_state is None else int(self.random_state)
        return make_rng(seed, i)


class Model3Discriminator(_PairDiscriminator):
    def __init__(self, exact=False, random_state=None):
        self.exact = exact
        self.random_state = random_state

    def predict(self, X):
        check_is_fitted(self, "p_")
        oracles = check_oracles(X, "iii")
        self.queries_ = []
        out = []
        for i, o in enumerate(oracles):
            res = disc.discriminate_model3(disc.DiscriminationInstance(self.p_, self.q_, o), self._stream(i), self.exact)
            self.queries_.append(res.queries_used)
            out.append(self._label(res.decision))
        return np.array(out)


class Model4Discriminator(_PairDiscriminator):
    """Witness-based phase-estimation discriminator for model iv oracles."""

    def __init__(self, epsilon=0.5, kappa=4.0, rounds=15, grid_factor=8.0, block_reflection=False, random_state=None):
        self.epsilon = epsilon
        self.kappa = kappa
        self.rounds = rounds
        self.grid_factor = grid_factor
        self.block_reflection = block_reflection
        self.random_state = random_state

    def fit(self, X, y=None):
        super().fit(X, y)
        self.params_ = disc.AlgoParams(self.epsilon, self.kappa, self.rounds, self.grid_factor, self.block_reflection)
        self.walk_ = disc.WalkData.from_pair(self.p_, self.q_)
        self.objective_ = self.walk_.objective
        return self

    def predict(self, X):
        check_is_fitted(self, "walk_")
        oracles = check_oracles(X, "iv")
        self.queries_ = []
        out = []
        for i, o in enumerate(oracles):
            inst = disc.DiscriminationInstance(self.p_, self.q_, o)
            res = disc.discriminate_model4(inst, self.params_, self._stream(i), data=self.walk_)
            self.queries_.append(res.queries_used)
            out.append(self._label(res.decision))
        return np.array(out)


class ClassicalDiscriminator(_PairDiscriminator):
    """Fixed-sample likelihood-ratio test; ``fit`` calibrates ``n_samples_``."""

    def __init__(self, target_error=1 / 3, n_samples=None, random_state=None):
        self.target_error = target_error
        self.n_samples = n_samples
        self.random_state = random_state

    def fit(self, X, y=None):
        super().fit(X, y)
        if self.n_samples is None:
            self.n_samples_ = disc.calibrate_sample_size(self.p_, self.q_, self.target_error)
        else:
            self.n_samples_ = int(self.n_samples)
        self.llr_ = disc.log_likelihood_ratios(self.p_, self.q_)
        return self

    def decision_function(self, X):
        """Log-likelihood ratio of each row; positive favours ``classes_[0]``."""
        check_is_fitted(self, "llr_")
        X = check_array(X, dtype=int, ensure_all_finite=True)
        if X.min() < 0 or X.max() >= self.p_.size:
            raise ValueError("sample symbols outside the alphabet")
        with np.errstate(invalid="ignore"):
            return self.llr_[X].sum(axis=1)

    def predict(self, X):
        scores = self.decision_function(X)
        coins = self._stream(0).random(scores.size)
        decided_p = disc._decide(scores, coins)
        return np.where(decided_p, self.classes_[0], self.classes_[1])

    def sample(self, which: str, n_runs: int, seed: int = 0):
        """Draw ``(n_runs, n_samples_)`` symbols from ``p_`` (``"P"``) or ``q_``."""
        check_is_fitted(self, "n_samples_")
        dist = self.p_ if which == "P" else self.q_
        return make_rng(seed, 3).choice(dist.size, size=(n_runs, self.n_samples_), p=dist.probs)
