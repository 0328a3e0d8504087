"""Yeo-Johnson transform and its profile-likelihood lambda search."""

from __future__ import annotations

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from shapley_r2.dataset import Dataset
from shapley_r2.errors import NonFiniteDataError
from shapley_r2.transform import (
    TransformResult,
    transform_dataset,
    yeo_johnson,
    yeo_johnson_transform,
)


class TestFixedLambda:
    def test_lambda_one_is_identity(self):
        # Identity up to the expm1/log1p round trip (one ulp).
        x = np.array([-3.0, -0.5, 0.0, 0.7, 4.0])
        np.testing.assert_allclose(
            yeo_johnson_transform(x, 1.0), x, rtol=1e-15, atol=1e-15
        )

    def test_hand_values(self):
        # lam=2, x=1: ((1+1)^2 - 1)/2 = 1.5
        assert yeo_johnson_transform(np.array([1.0]), 2.0)[0] == pytest.approx(1.5)
        # lam=0, x>=0 branch: log(x+1)
        assert yeo_johnson_transform(np.array([np.e - 1.0]), 0.0)[0] == pytest.approx(
            1.0, abs=1e-12
        )
        # lam=2, x<0 branch: -log(-x+1)
        assert yeo_johnson_transform(np.array([-1.0]), 2.0)[0] == pytest.approx(
            -np.log(2.0), abs=1e-12
        )
        # lam=0.5, x=-1: -((2)^{1.5} - 1)/1.5
        assert yeo_johnson_transform(np.array([-1.0]), 0.5)[0] == pytest.approx(
            -(2.0**1.5 - 1.0) / 1.5, abs=1e-12
        )

    def test_continuous_at_removable_singularities(self):
        x = np.array([-2.0, -0.3, 0.0, 0.4, 3.0])
        near_zero = yeo_johnson_transform(x, 1e-9)
        at_zero = yeo_johnson_transform(x, 0.0)
        np.testing.assert_allclose(near_zero, at_zero, atol=1e-7)
        near_two = yeo_johnson_transform(x, 2.0 - 1e-9)
        at_two = yeo_johnson_transform(x, 2.0)
        np.testing.assert_allclose(near_two, at_two, atol=1e-7)

    def test_matches_scipy(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal(100) * 2.0 - 0.5
        for lam in (-1.5, 0.0, 0.7, 2.0, 3.2):
            np.testing.assert_allclose(
                yeo_johnson_transform(x, lam),
                scipy.stats.yeojohnson(x, lmbda=lam),
                atol=1e-12,
            )

    def test_sign_preserved_and_zero_fixed(self):
        x = np.array([-5.0, -0.1, 0.0, 0.1, 5.0])
        for lam in (-2.0, 0.0, 1.0, 2.0, 4.0):
            out = yeo_johnson_transform(x, lam)
            np.testing.assert_array_equal(np.sign(out), np.sign(x))
            assert out[2] == 0.0

    @given(
        st.lists(st.floats(-50.0, 50.0), min_size=2, max_size=40),
        st.floats(-4.0, 4.0),
    )
    @settings(max_examples=60)
    def test_monotone_in_x(self, values, lam):
        x = np.sort(np.array(values))
        out = yeo_johnson_transform(x, lam)
        assert np.all(np.diff(out) >= -1e-12)


class TestLambdaSearch:
    def test_matches_scipy_mle(self):
        rng = np.random.default_rng(12)
        for _ in range(5):
            x = np.expm1(rng.standard_normal(300) * 0.8)
            mine = yeo_johnson(x)
            _, scipy_lam = scipy.stats.yeojohnson(x)
            assert mine.lmbda == pytest.approx(scipy_lam, abs=1e-4)

    def test_never_worse_than_scipy_likelihood(self):
        # Comparing objective values dodges ties between distant optima.
        rng = np.random.default_rng(13)
        x = -np.expm1(rng.standard_normal(200))
        mine = yeo_johnson(x)
        _, scipy_lam = scipy.stats.yeojohnson(x)
        assert scipy.stats.yeojohnson_llf(
            mine.lmbda, x
        ) >= scipy.stats.yeojohnson_llf(scipy_lam, x) - 1e-6

    def test_result_applies_chosen_lambda(self):
        rng = np.random.default_rng(14)
        x = rng.exponential(2.0, size=150)
        result = yeo_johnson(x)
        assert isinstance(result, TransformResult)
        np.testing.assert_array_equal(
            result.values, yeo_johnson_transform(x, result.lmbda)
        )

    def test_reduces_skewness(self):
        rng = np.random.default_rng(15)
        x = np.exp(rng.standard_normal(500))
        result = yeo_johnson(x)
        assert abs(scipy.stats.skew(result.values)) < abs(scipy.stats.skew(x)) / 2

    def test_constant_column_gets_identity(self):
        result = yeo_johnson(np.full(10, 3.0))
        assert result.lmbda == 1.0
        np.testing.assert_allclose(result.values, 3.0, rtol=1e-15)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            yeo_johnson(np.empty(0))
        with pytest.raises(ValueError):
            yeo_johnson(np.zeros((3, 2)))
        with pytest.raises(NonFiniteDataError):
            yeo_johnson(np.array([1.0, np.nan, 2.0]))

    def test_already_normal_lambda_near_one(self):
        rng = np.random.default_rng(16)
        x = rng.standard_normal(4000)
        assert yeo_johnson(x).lmbda == pytest.approx(1.0, abs=0.1)


class TestTransformDataset:
    def test_per_column_lambdas(self, make_dataset):
        ds = make_dataset(90, 120, 2)
        skewed = Dataset(
            np.column_stack(
                [ds.values[:, 0], np.exp(ds.values[:, 1]), ds.values[:, 2]]
            ),
            ("y", "x1", "x2"),
        )
        out, lambdas = transform_dataset(skewed)
        assert set(lambdas) == {"y", "x1", "x2"}
        assert out.column_names == skewed.column_names
        assert out.values.shape == skewed.values.shape
        np.testing.assert_array_equal(
            out.values[:, 1],
            yeo_johnson(skewed.values[:, 1]).values,
        )
        # The exponentiated column needs a strongly contracting lambda.
        assert lambdas["x1"] < 0.5

    def test_identity_when_already_gaussian(self):
        rng = np.random.default_rng(91)
        ds = Dataset(rng.standard_normal((2000, 2)))
        _, lambdas = transform_dataset(ds)
        for lam in lambdas.values():
            assert lam == pytest.approx(1.0, abs=0.15)
