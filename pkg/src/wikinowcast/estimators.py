"""Scikit-learn style wrappers around the modeling core.

These exist so the two algorithmic pieces (correlation screening, no-intercept
least squares) compose with the wider sklearn ecosystem: both follow the
fit/transform/predict contract, store fitted state in trailing-underscore
attributes and work inside sklearn pipelines, e.g.::

    Pipeline([("select", TopCorrelationSelector(k=10)),
              ("model", NoInterceptLinearRegression())])

The pipeline code in this package uses the functional layer directly; the
estimators are the same math on plain matrices.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import NoUsableCandidatesError, UndefinedCorrelationError
from .modeling import DEFAULT_TOP_K, fit_ols, pearson


class NoInterceptLinearRegression(RegressorMixin, BaseEstimator):
    """Least-squares linear model forced through the origin.

    Attributes after fit
    --------------------
    coef_ : ndarray of shape (n_features,)
        Minimum-norm least-squares coefficients.
    rank_ : int
        Numerical rank of the design matrix.
    rank_deficient_ : bool
        True when rank_ < n_features (coefficients are not unique).
    r_squared_ : float or None
        Squared Pearson correlation between fitted and observed values, the
        quality figure used in reports. None when the fit is degenerate.
        Note this is not the score() definition inherited from sklearn.
    """

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        fit = fit_ols(X, y)
        self.coef_ = fit.coef
        self.rank_ = fit.rank
        self.rank_deficient_ = fit.rank_deficient
        self.r_squared_ = fit.r_squared
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        return X @ self.coef_


class TopCorrelationSelector(TransformerMixin, BaseEstimator):
    """Keep the k feature columns most correlated with the target.

    Ranking is by decreasing absolute Pearson correlation with ties broken by
    column index; columns whose correlation is undefined (constant, too few
    rows) never qualify.

    Parameters
    ----------
    k : int, default 10
        Number of columns to keep. Fewer are kept when fewer are usable.

    Attributes after fit
    --------------------
    correlations_ : ndarray of shape (n_features,)
        Per-column correlation with the target, NaN where undefined.
    support_ : ndarray of bool, shape (n_features,)
        Mask of the selected columns.
    """

    def __init__(self, k: int = DEFAULT_TOP_K):
        self.k = k

    def fit(self, X, y):
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        X, y = check_X_y(X, y, y_numeric=True)
        n, p = X.shape
        corr = np.full(p, np.nan)
        for j in range(p):
            try:
                corr[j] = pearson(X[:, j], y)
            except UndefinedCorrelationError:
                pass
        usable = np.flatnonzero(~np.isnan(corr))
        if usable.size == 0:
            raise NoUsableCandidatesError(
                "no column has a defined correlation with the target"
            )
        ranked = sorted(usable, key=lambda j: (-abs(corr[j]), j))
        keep = ranked[: self.k]
        support = np.zeros(p, dtype=bool)
        support[keep] = True
        self.correlations_ = corr
        self.support_ = support
        self.n_features_in_ = p
        return self

    def transform(self, X):
        check_is_fitted(self, "support_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        return X[:, self.support_]

    def get_support(self, indices: bool = False):
        check_is_fitted(self, "support_")
        return np.flatnonzero(self.support_) if indices else self.support_
