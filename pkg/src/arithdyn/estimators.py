"""scikit-learn style wrappers for the numerical layer.

Samples are parameters ``t`` given as rows ``[Re t, Im t]``.  The exact
layer (``ratfield``, ``family``, ``lattes``) stays plain functions: it has
nothing to fit.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .family import ParamMap, quadratic_family
from .parafind import RootSet, roots_numeric
from .plane import _potential_block
from .ratfield import Poly, ProjPoint, parse_point, parse_poly


def _as_parameters(X) -> np.ndarray:
    X = check_array(X, dtype=np.float64, ensure_min_samples=1)
    if X.shape[1] != 2:
        raise ValueError(f"expected 2 columns [Re t, Im t], got {X.shape[1]}")
    return X[:, 0] + 1j * X[:, 1]


def _check_positive(name: str, value, integral: bool = False) -> None:
    ok = isinstance(value, (int, np.integer)) if integral else isinstance(value, (int, float, np.number))
    if not ok or isinstance(value, bool) or not value > 0:
        kind = "positive integer" if integral else "positive number"
        raise ValueError(f"{name} must be a {kind}, got {value!r}")


class MandelbrotClassifier(ClassifierMixin, BaseEstimator):
    """Label 1 when the critical orbit of ``z^2 + t`` stays bounded for ``depth`` steps.

    ``decision_function`` is the negated escape potential ``-g(t)``: zero on
    the bounded class, negative outside.
    """

    def __init__(self, depth: int = 500):
        self.depth = depth

    def fit(self, X, y=None):
        _check_positive("depth", self.depth, integral=True)
        _as_parameters(X)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = 2
        return self

    def _potential(self, X) -> np.ndarray:
        check_is_fitted(self, "classes_")
        t = _as_parameters(X)
        z = np.zeros_like(t)
        g = np.zeros(t.shape)
        live = np.ones(t.shape, dtype=bool)
        for k in range(self.depth):
            z[live] = z[live] ** 2 + t[live]
            out = live & (np.abs(z) > 1e8)
            # past the bailout log|z_k| / 2^k is accurate to O(|t| / |z|^2)
            g[out] = np.log(np.abs(z[out])) / 2.0 ** (k + 1)
            live &= ~out
        return g

    def decision_function(self, X) -> np.ndarray:
        return -self._potential(X)

    def predict(self, X) -> np.ndarray:
        return (self._potential(X) == 0).astype(int)


class MarkedPointPotential(TransformerMixin, BaseEstimator):
    """Escape rate ``G_{F_t}(a(t), b(t))`` of a marked point, one column per sample.

    ``family`` defaults to ``z^2 + t``; ``point`` is a ProjPoint or a point
    string such as ``"0"`` or ``"t:1"``.  Parameters with
    ``|Res(t)| < tol`` give NaN.
    """

    def __init__(self, family: ParamMap | None = None, point="0", depth: int = 200, tol: float = 1e-12):
        self.family = family
        self.point = point
        self.depth = depth
        self.tol = tol

    def fit(self, X, y=None):
        _check_positive("depth", self.depth, integral=True)
        _check_positive("tol", self.tol)
        _as_parameters(X)
        self.family_ = self.family if self.family is not None else quadratic_family()
        if not isinstance(self.family_, ParamMap):
            raise TypeError("family must be a ParamMap")
        self.point_ = self.point if isinstance(self.point, ProjPoint) else parse_point(str(self.point))
        self.n_features_in_ = 2
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "point_")
        t = _as_parameters(X)
        return _potential_block(self.family_, self.point_, t, self.depth, self.tol)[:, None]


class AberthRootFinder(BaseEstimator):
    """Certified complex roots of one exact polynomial.

    ``fit`` takes a Poly, a polynomial string, or ascending rational
    coefficients.  Fitted attributes: ``root_set_``, ``roots_``,
    ``residuals_``.
    """

    def __init__(self, tol: float = 1e-12, cert_tol: float = 1e-10, max_rounds: int = 1000):
        self.tol = tol
        self.cert_tol = cert_tol
        self.max_rounds = max_rounds

    def fit(self, X, y=None):
        _check_positive("tol", self.tol)
        _check_positive("cert_tol", self.cert_tol)
        _check_positive("max_rounds", self.max_rounds, integral=True)
        if isinstance(X, Poly):
            p = X
        elif isinstance(X, str):
            p = parse_poly(X)
        else:
            p = Poly(list(X))
        rs = roots_numeric(p, self.tol, self.cert_tol, self.max_rounds)
        self.root_set_: RootSet = rs
        self.roots_ = rs.roots
        self.residuals_ = rs.residuals
        return self
