import numpy as np
import pytest
from sklearn.base import clone

from arithdyn.estimators import AberthRootFinder, MandelbrotClassifier, MarkedPointPotential
from arithdyn.plane import escape_rate_poly
from arithdyn.ratfield import T, ProjPoint

SAMPLES = np.array([[0, 0], [-1, 0], [1, 0], [-0.122561, 0.744862], [2, 2]])


def test_classifier_predictions():
    clf = MandelbrotClassifier(depth=300).fit(SAMPLES)
    assert clf.predict(SAMPLES).tolist() == [1, 1, 0, 1, 0]
    scores = clf.decision_function(SAMPLES)
    assert np.all(scores[[0, 1, 3]] == 0) and np.all(scores[[2, 4]] < 0)


def test_classifier_potential_matches_plane():
    clf = MandelbrotClassifier(depth=300).fit(SAMPLES)
    g = -clf.decision_function([[1, 0], [2, 2], [0.3, 0.6]])
    ref = [escape_rate_poly([c, 0, 1], 0, 300).value for c in (1, 2 + 2j, 0.3 + 0.6j)]
    assert g == pytest.approx(ref, rel=1e-9, abs=1e-14)


def test_potential_transformer(quad):
    pot = MarkedPointPotential(family=quad, point="0", depth=200).fit(SAMPLES)
    out = pot.transform(SAMPLES)
    assert out.shape == (5, 1)
    assert abs(out[0, 0]) < 1e-12 and out[2, 0] > 0
    assert out[2, 0] == pytest.approx(escape_rate_poly([1, 0, 1], 0, 200).value, rel=1e-9)


def test_potential_degenerate_gives_nan(lattes):
    pot = MarkedPointPotential(family=lattes.map, point=ProjPoint.of(2), depth=50).fit([[0, 0]])
    out = pot.transform([[0, 0], [2, 0]])
    assert np.isnan(out[0, 0]) and np.isfinite(out[1, 0])


def test_params_and_clone():
    for est in (MandelbrotClassifier(depth=12), MarkedPointPotential(point="t", depth=7), AberthRootFinder(tol=1e-9)):
        c = clone(est)
        assert c.get_params() == est.get_params()
        assert c is not est
    assert set(MarkedPointPotential().get_params()) == {"family", "point", "depth", "tol"}
    clf = MandelbrotClassifier().set_params(depth=40)
    assert clf.depth == 40


@pytest.mark.parametrize("bad", [0, -3, 2.5, True, "10"])
def test_invalid_depth(bad):
    with pytest.raises(ValueError):
        MandelbrotClassifier(depth=bad).fit(SAMPLES)


def test_input_validation():
    with pytest.raises(ValueError):
        MandelbrotClassifier().fit(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        MandelbrotClassifier().fit(np.array([[np.nan, 0]]))
    with pytest.raises(ValueError):
        MandelbrotClassifier().fit(np.zeros((0, 2)))
    with pytest.raises(TypeError):
        MarkedPointPotential(family="quadratic").fit(SAMPLES)


def test_unfitted():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        MandelbrotClassifier().predict(SAMPLES)
    with pytest.raises(NotFittedError):
        MarkedPointPotential().transform(SAMPLES)


def test_root_finder_inputs():
    a = AberthRootFinder().fit(T**2 + T)
    b = AberthRootFinder().fit("t^2 + t")
    c = AberthRootFinder().fit([0, 1, 1])
    for est in (a, b, c):
        assert sorted(est.roots_.real) == pytest.approx([-1, 0], abs=1e-10)
        assert est.residuals_.max() < 1e-10
    with pytest.raises(ValueError):
        AberthRootFinder(max_rounds=0).fit([0, 1])
