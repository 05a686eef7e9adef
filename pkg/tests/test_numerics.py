import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctm.numerics import (
    NotPositiveDefiniteError,
    SpdMatrix,
    log_sum_exp,
    lognormal_mean,
    softmax,
)

finite_vectors = st.lists(
    st.floats(min_value=-700, max_value=700, allow_nan=False), min_size=1, max_size=12
)


class TestSoftmax:
    def test_uniform(self):
        np.testing.assert_allclose(softmax([0.0, 0.0, 0.0]), [1 / 3] * 3, atol=1e-12)

    def test_analytic(self):
        np.testing.assert_allclose(softmax([0.0, math.log(2)]), [1 / 3, 2 / 3],
                                   atol=1e-12)

    def test_shift_invariance(self):
        eta = np.array([0.3, -1.2, 2.0])
        np.testing.assert_allclose(softmax(eta), softmax(eta + 1e3), atol=1e-12)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            softmax([0.0, np.inf])

    @given(finite_vectors)
    @settings(max_examples=200, deadline=None)
    def test_simplex_properties(self, vec):
        out = softmax(vec)
        assert np.all(out >= 0)
        assert abs(out.sum() - 1.0) <= 1e-12
        # strict positivity holds whenever exp cannot underflow to zero
        if max(vec) - min(vec) < 700.0:
            assert np.all(out > 0)


class TestLogSumExp:
    def test_ln2(self):
        assert log_sum_exp([0.0, 0.0]) == pytest.approx(math.log(2), abs=1e-15)

    def test_shift_identity(self):
        assert log_sum_exp([1000.0, 1000.0]) == pytest.approx(
            1000 + math.log(2), abs=1e-12
        )

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            log_sum_exp([])

    def test_extended_precision_oracle(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(-20, 20, size=10)
        with mpmath.workdps(50):
            truth = float(mpmath.log(mpmath.fsum(mpmath.exp(v) for v in x)))
        assert log_sum_exp(x) == pytest.approx(truth, abs=1e-12)

    @given(finite_vectors)
    @settings(max_examples=200, deadline=None)
    def test_no_overflow(self, vec):
        assert np.isfinite(log_sum_exp(vec))


class TestLognormalMean:
    def test_near_zero_variance(self):
        assert lognormal_mean(0.0, 1e-14) == pytest.approx(1.0, abs=1e-12)

    def test_direct_formula(self):
        assert lognormal_mean(1.0, 2.0) == pytest.approx(math.e**2, rel=1e-14)

    def test_nonpositive_variance_rejected(self):
        with pytest.raises(ValueError):
            lognormal_mean(0.0, 0.0)

    def test_monte_carlo_oracle(self):
        lam, nu2, n = 0.3, 0.5, 10**6
        rng = np.random.default_rng(7)
        draws = np.exp(rng.normal(lam, math.sqrt(nu2), size=n))
        se = draws.std(ddof=1) / math.sqrt(n)
        assert abs(lognormal_mean(lam, nu2) - draws.mean()) <= 3 * se


class TestSpdMatrix:
    def test_identity(self):
        eye = SpdMatrix.identity(4)
        b = np.array([1.0, -2.0, 3.0, 0.5])
        np.testing.assert_allclose(eye.solve(b), b, atol=1e-14)
        assert eye.logdet() == pytest.approx(0.0, abs=1e-14)

    def test_diagonal_logdet(self):
        m = SpdMatrix(2.0 * np.eye(5))
        assert m.logdet() == pytest.approx(5 * math.log(2), rel=1e-14)

    def test_multiply_back(self):
        rng = np.random.default_rng(5)
        k = 6
        a = rng.standard_normal((k, k))
        m = SpdMatrix(a @ a.T + k * np.eye(k))
        b = rng.standard_normal(k)
        x = m.solve(b)
        assert np.linalg.norm(m.entries @ x - b) <= 1e-8 * np.linalg.norm(b)

    def test_multiply_back_many(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            k = int(rng.integers(2, 8))
            a = rng.standard_normal((k, k))
            m = SpdMatrix(a @ a.T + k * np.eye(k))
            b = rng.standard_normal(k)
            x = m.solve(b)
            assert np.linalg.norm(m.entries @ x - b) <= 1e-8 * np.linalg.norm(b)

    def test_logdet_inverse_relation(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            k = int(rng.integers(2, 7))
            a = rng.standard_normal((k, k))
            m = SpdMatrix(a @ a.T + k * np.eye(k))
            m_inv = SpdMatrix(m.inverse())
            assert m.logdet() == pytest.approx(-m_inv.logdet(), abs=1e-8)

    def test_not_positive_definite_names_pivot(self):
        bad = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(NotPositiveDefiniteError) as exc:
            SpdMatrix(bad)
        assert exc.value.pivot == 3

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            SpdMatrix(np.array([[1.0, 0.5], [0.2, 1.0]]))
