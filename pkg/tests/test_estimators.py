"""Estimator-style wrappers around selection and the no-intercept fit."""

from __future__ import annotations

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline

from wikinowcast.errors import NoUsableCandidatesError
from wikinowcast.estimators import NoInterceptLinearRegression, TopCorrelationSelector


class TestNoInterceptLinearRegression:
    def test_fit_predict(self):
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        y = np.array([3.0, 6.0, 9.0, 12.0])
        reg = NoInterceptLinearRegression().fit(X, y)
        assert reg.coef_ == pytest.approx([3.0], abs=1e-12)
        assert reg.n_features_in_ == 1
        assert reg.rank_ == 1
        assert not reg.rank_deficient_
        assert reg.r_squared_ == pytest.approx(1.0, abs=1e-12)
        assert reg.predict(np.array([[10.0]])) == pytest.approx([30.0])

    def test_no_intercept_behaviour(self):
        # an affine target cannot be matched exactly without an intercept
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        y = 2.0 * X[:, 0] + 5.0
        reg = NoInterceptLinearRegression().fit(X, y)
        assert reg.predict(np.zeros((1, 1)))[0] == 0.0

    def test_predict_validates_width(self):
        reg = NoInterceptLinearRegression().fit(np.ones((5, 2)) +
                                                np.arange(10).reshape(5, 2),
                                                np.arange(5.0))
        with pytest.raises(ValueError):
            reg.predict(np.ones((2, 3)))

    def test_unfitted_predict(self):
        with pytest.raises(NotFittedError):
            NoInterceptLinearRegression().predict(np.ones((1, 1)))

    def test_clone_and_params(self):
        reg = NoInterceptLinearRegression()
        assert clone(reg).get_params() == reg.get_params()


class TestTopCorrelationSelector:
    def _data(self):
        rng = np.random.default_rng(13)
        y = np.linspace(1.0, 8.0, 20)
        X = np.column_stack([
            y + rng.normal(scale=1e-9, size=20),
            -y + rng.normal(scale=1e-9, size=20),
            rng.random(20),
            np.full(20, 4.0),
        ])
        return X, y

    def test_ranking_and_support(self):
        X, y = self._data()
        sel = TopCorrelationSelector(k=2).fit(X, y)
        assert np.isnan(sel.correlations_[3])
        assert sel.support_.tolist() == [True, True, False, False]
        assert sel.get_support(indices=True).tolist() == [0, 1]
        assert sel.transform(X).shape == (20, 2)

    def test_tie_prefers_lower_index(self):
        y = np.linspace(1.0, 5.0, 10)
        X = np.column_stack([y, y])
        sel = TopCorrelationSelector(k=1).fit(X, y)
        assert sel.get_support(indices=True).tolist() == [0]

    def test_all_undefined(self):
        X = np.full((10, 2), 3.0)
        y = np.linspace(0.0, 1.0, 10)
        with pytest.raises(NoUsableCandidatesError):
            TopCorrelationSelector().fit(X, y)

    def test_k_validated_at_fit(self):
        X, y = self._data()
        with pytest.raises(ValueError):
            TopCorrelationSelector(k=0).fit(X, y)

    def test_pipeline_composes(self):
        X, y = self._data()
        pipe = Pipeline([
            ("select", TopCorrelationSelector(k=2)),
            ("fit", NoInterceptLinearRegression()),
        ])
        pipe.fit(X, y)
        assert pipe.predict(X) == pytest.approx(y, abs=1e-6)

    def test_set_params(self):
        sel = TopCorrelationSelector()
        assert sel.k == 10
        sel.set_params(k=4)
        assert sel.k == 4
