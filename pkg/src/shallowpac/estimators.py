"""scikit-learn style wrappers around the learner and the residue-class features."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .learner import LearnerConfig, build_vote_vector, find_crossing, recover_s
from .models import pmmajmod, signed_class
from .numtheory import ProblemParams
from .sampling import draw_samples
from .simulator import circuit_descriptor
from .validation import check_samples, split_samples


class ResidueClassEncoder(TransformerMixin, BaseEstimator):
    """Map (d, x, y) rows to [signed class mod p, y == parity(x)]."""

    def __init__(self, n=7, p=3):
        self.n = n
        self.p = p

    def fit(self, X, y=None):
        check_samples(X, self.n)
        self.params_ = ProblemParams(self.n, self.p)
        self.n_features_in_ = 2 * self.n - 1
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        D, Xv, Y = split_samples(check_samples(X, self.n), self.n)
        k = np.mod(signed_class(self.params_, D, Xv), self.p)
        return np.column_stack([k, (Y == (Xv.sum(axis=1) & 1)).astype(np.int64)])


class HyperplaneLearner(BaseEstimator):
    """Estimate the hidden shift s of D_{n,p,s} from unlabeled (d, x, y) rows.

    After ``fit``: ``s_`` (None on failure), ``k_star_``, ``votes_`` and,
    on success, ``generator_params_`` / ``circuit_``.
    """

    def __init__(self, n=31, p=3, m=None, delta=0.1, tau=None, M=None):
        self.n = n
        self.p = p
        self.m = m
        self.delta = delta
        self.tau = tau
        self.M = M

    def _config(self):
        return LearnerConfig(self.p, self.n, self.delta, None, self.tau, self.M, self.m)

    def fit(self, X, y=None):
        cfg = self._config()
        X = check_samples(X, self.n)
        if cfg.M is not None:
            X = X[: cfg.M]
        if len(X) == 0:
            raise ValueError("need at least one sample")
        self.votes_ = build_vote_vector(X, cfg.problem())
        self.k_star_ = find_crossing(self.votes_, cfg.tau)
        self.n_samples_seen_ = len(X)
        if self.k_star_ is None:
            self.s_ = None
            return self
        self.s_ = recover_s(self.k_star_, self.p)
        self.generator_params_ = cfg.problem(self.s_)
        self.circuit_ = circuit_descriptor(self.generator_params_)
        return self

    @property
    def success_(self) -> bool:
        check_is_fitted(self, "k_star_")
        return self.s_ is not None

    def _fitted_params(self):
        check_is_fitted(self, "k_star_")
        if self.s_ is None:
            raise RuntimeError("the learner failed to locate the crossing; nothing to predict")
        return self.generator_params_

    def predict(self, X):
        """Ideal output bit under the learned shift for each row's (d, x)."""
        params = self._fitted_params()
        D, Xv, _ = split_samples(check_samples(X, self.n), self.n)
        return np.asarray(pmmajmod(params, D, Xv), dtype=np.int8).reshape(-1)

    def sample(self, n_samples=1, random_state=0, model="unitary-q"):
        """Draw from the learned generator."""
        return draw_samples(model, self._fitted_params(), n_samples, random_state)
