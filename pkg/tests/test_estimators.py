import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from qdist.distributions import bernoulli, collision
from qdist.estimators import ClassicalDiscriminator, Model3Discriminator, Model4Discriminator
from qdist.oracles import GarbageSpec, prepare_oracle

COLLISION = np.array([[0.25] * 4, [0.5, 0.5, 0, 0]])


def oracles(model, labels, pair=collision(4), garbage=None):
    p, q = pair
    return [prepare_oracle(model, p if y == "P" else q, garbage, y) for y in labels]


def test_params_roundtrip_and_clone():
    est = Model4Discriminator(epsilon=0.4, rounds=9)
    assert est.get_params()["epsilon"] == 0.4
    est.set_params(kappa=3.0)
    twin = clone(est)
    assert twin.get_params() == est.get_params()


@pytest.mark.parametrize("cls", [Model3Discriminator, Model4Discriminator, ClassicalDiscriminator])
def test_not_fitted(cls):
    with pytest.raises(NotFittedError):
        cls().predict(np.zeros((1, 3), dtype=int) if cls is ClassicalDiscriminator else oracles("iii", ["P"]))


@pytest.mark.parametrize(
    "X",
    [np.array([[0.5, 0.5]]), np.array([[0.5, 0.5], [0.5, 0.5]]), np.array([[0.5, 0.6], [0.5, 0.5]]), np.array([[np.nan, 1], [0, 1]])],
)
def test_fit_validation(X):
    with pytest.raises(ValueError):
        Model3Discriminator().fit(X)


def test_model3_predict_and_score():
    labels = ["P", "Q"] * 10
    est = Model3Discriminator(exact=True, random_state=0).fit(COLLISION)
    assert list(est.predict(oracles("iii", labels))) == labels
    assert est.score(oracles("iii", labels), labels) == 1.0
    assert est.metrics_.angle == pytest.approx(np.pi / 4)


def test_custom_class_names():
    est = Model3Discriminator(exact=True).fit(COLLISION, ["uniform", "half"])
    assert list(est.predict(oracles("iii", ["Q", "P"]))) == ["half", "uniform"]
    with pytest.raises(ValueError):
        Model3Discriminator().fit(COLLISION, ["a", "a"])


def test_model4_estimator_matches_function():
    labels = ["P", "Q", "Q", "P"]
    est = Model4Discriminator(random_state=1).fit(COLLISION)
    pred = est.predict(oracles("iv", labels, garbage=GarbageSpec("haar_random", 2, 3)))
    assert (pred == np.array(labels)).mean() >= 0.75
    assert all(q == est.queries_[0] for q in est.queries_)
    with pytest.raises(ValueError):
        est.predict(oracles("iii", labels))
    with pytest.raises(TypeError):
        est.predict([1, 2])


def test_classical_estimator():
    p, q = bernoulli(0.5, 0.8)
    est = ClassicalDiscriminator(random_state=0).fit(np.stack([p.probs, q.probs]))
    assert 5 <= est.n_samples_ <= 100
    XP, XQ = est.sample("P", 300, seed=1), est.sample("Q", 300, seed=2)
    X = np.vstack([XP, XQ])
    y = np.array(["P"] * 300 + ["Q"] * 300)
    assert est.score(X, y) >= 2 / 3
    scores = est.decision_function(XP)
    assert scores.shape == (300,)
    with pytest.raises(ValueError):
        est.predict(np.full((1, 3), 5))


def test_classical_fixed_n():
    est = ClassicalDiscriminator(n_samples=12).fit(COLLISION)
    assert est.n_samples_ == 12
