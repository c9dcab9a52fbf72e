import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from shallowpac.estimators import HyperplaneLearner, ResidueClassEncoder
from shallowpac.models import pmmajmod
from shallowpac.numtheory import ProblemParams
from shallowpac.sampling import draw_samples


def test_learner_fit_predict_sample():
    target = ProblemParams(31, 3, 2)
    X = draw_samples("analytic-p", target, 8126, 0)
    est = HyperplaneLearner(n=31, p=3)
    assert est.get_params()["delta"] == 0.1
    est.fit(X)
    assert est.success_ and est.s_ == 2 and est.generator_params_ == ProblemParams(31, 3, 2)
    assert np.array_equal(est.predict(X[:20]), pmmajmod(target, X[:20, :30], X[:20, 30:60]))
    assert est.sample(5, random_state=1).shape == (5, 61)
    c = clone(est)
    assert not hasattr(c, "s_")
    with pytest.raises(NotFittedError):
        c.predict(X[:2])


def test_learner_failure_state():
    X = draw_samples("analytic-p", ProblemParams(31, 3, 0), 1, 0)
    est = HyperplaneLearner(n=31, p=3).fit(X)
    assert not est.success_
    with pytest.raises(RuntimeError):
        est.predict(X)


def test_encoder():
    X = draw_samples("ideal", ProblemParams(7, 5, 1), 50, 0)
    Z = ResidueClassEncoder(n=7, p=5).fit_transform(X)
    assert Z.shape == (50, 2) and Z[:, 0].max() < 5 and set(Z[:, 1]) <= {0, 1}
    with pytest.raises(ValueError):
        ResidueClassEncoder(n=7, p=5).fit(X[:, :5])
