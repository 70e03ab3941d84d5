import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracbeam.caputo import (
    caputo_exp_series,
    caputo_power,
    caputo_quadrature_oracle,
    gamma_function,
    history_term,
    l1_weights,
)
from fracbeam.exceptions import DomainError

GAMMAS = (0.1, 0.25, 0.5, 0.75, 0.9)


class TestGammaFunction:
    @pytest.mark.parametrize(
        "x", [0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.3, 5.0, 7.25, 10.0, 17.5, 30.0]
    )
    def test_reference_values(self, x):
        assert gamma_function(x) == pytest.approx(float(mpmath.gamma(x)), rel=1e-12)

    def test_known(self):
        assert gamma_function(1.0) == 1.0
        assert gamma_function(2.0) == 1.0
        assert gamma_function(1.5) == pytest.approx(0.8862269255, rel=1e-10)
        assert gamma_function(0.5) == pytest.approx(1.7724538509, rel=1e-10)

    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            gamma_function(x)


class TestL1Weights:
    def test_half_order_p3(self):
        w = l1_weights(0.5, 3, 0.01)
        np.testing.assert_allclose(
            w.b, [1, math.sqrt(2) - 1, math.sqrt(3) - math.sqrt(2), 2 - math.sqrt(3)], rtol=1e-15
        )
        assert w.b[1:] == pytest.approx([0.41421356, 0.31783724, 0.26794919], abs=1e-8)

    def test_first_order(self):
        w = l1_weights(1.0, 7, 0.1)
        assert w.b[0] == 1.0
        assert np.all(w.b[1:] == 0.0)
        assert w.beta == pytest.approx(0.1)

    def test_beta(self):
        assert l1_weights(0.5, 1, 0.01).beta == pytest.approx(0.0886226925, rel=1e-9)

    @pytest.mark.parametrize("gamma", GAMMAS)
    def test_positive_and_decreasing(self, gamma):
        b = l1_weights(gamma, 10_000, 0.01).b
        assert b[0] == 1.0
        assert np.all(b > 0)
        assert np.all(np.diff(b) < 0)

    @pytest.mark.parametrize("gamma", GAMMAS)
    def test_closed_form_against_mpmath(self, gamma):
        b = l1_weights(gamma, 10_000, 0.01).b
        for j in (1, 10, 999, 10_000):
            ref = mpmath.power(j + 1, 1 - gamma) - mpmath.power(j, 1 - gamma)
            assert b[j] == pytest.approx(float(ref), rel=1e-13)

    @pytest.mark.parametrize("gamma", GAMMAS)
    @pytest.mark.parametrize("p", [1, 2, 5, 100, 10_000])
    def test_telescoping(self, gamma, p):
        w = l1_weights(gamma, p, 0.01)
        assert abs(w.memory_coefficients(p).sum() - 1.0) <= 1e-14

    @pytest.mark.parametrize("gamma", [0.0, -0.5, 1.5])
    def test_domain(self, gamma):
        with pytest.raises(DomainError):
            l1_weights(gamma, 3, 0.1)

    def test_bad_step(self):
        with pytest.raises(DomainError):
            l1_weights(0.5, 3, 0.0)
        with pytest.raises(DomainError):
            l1_weights(0.5, -1, 0.1)


class TestHistoryTerm:
    def test_scalar_levels(self):
        w = l1_weights(0.5, 3, 0.01)
        assert history_term([0.0, 1.0, 2.0], w) == pytest.approx(1.26794919, abs=1e-8)

    def test_backward_euler(self):
        w = l1_weights(1.0, 5, 0.1)
        rng = np.random.default_rng(1)
        levels = rng.normal(size=(5, 7))
        np.testing.assert_array_equal(history_term(levels, w), levels[-1])

    @settings(max_examples=25, deadline=None)
    @given(gamma=st.floats(0.05, 1.0), p=st.integers(1, 60), c=st.floats(-5, 5))
    def test_constant_history(self, gamma, p, c):
        w = l1_weights(gamma, p, 0.01)
        levels = np.full((p + 1, 4), c)
        np.testing.assert_allclose(history_term(levels, w), c, atol=1e-13 * max(1.0, abs(c)))

    def test_rejects_first_step(self):
        w = l1_weights(0.5, 3, 0.01)
        with pytest.raises(ValueError):
            history_term(np.zeros((1, 4)), w)

    def test_too_many_levels(self):
        w = l1_weights(0.5, 3, 0.01)
        with pytest.raises(IndexError):
            history_term(np.zeros((6, 4)), w)

    @pytest.mark.parametrize("gamma", [0.3, 0.5, 0.8])
    def test_exact_on_linear(self, gamma):
        # L1 interpolates linearly in time, so g(t) = t is differentiated exactly
        dt, K = 0.05, 20
        w = l1_weights(gamma, K, dt)
        g = dt * np.arange(K + 1)
        for p in range(1, K):
            hist = history_term(g[: p + 1], w)
            approx = (g[p + 1] - hist) / w.beta
            assert approx == pytest.approx(caputo_power((p + 1) * dt, 1, gamma), rel=1e-13)


class TestCaputoPower:
    def test_constant(self):
        for t in (0.0, 0.3, 2.0):
            assert caputo_power(t, 0, 0.4) == 0.0

    def test_linear_half(self):
        assert caputo_power(1.0, 1, 0.5) == pytest.approx(1.1283791671, rel=1e-10)

    def test_first_derivative(self):
        for t in (0.0, 0.5, 3.0):
            assert caputo_power(t, 1, 1.0) == 1.0

    def test_square(self):
        t = 0.7
        assert caputo_power(t, 2, 0.5) == pytest.approx(2 * t**1.5 / math.gamma(2.5), rel=1e-14)

    @pytest.mark.parametrize("k", [1, 2, 3])
    @pytest.mark.parametrize("t", [0.25, 1.0])
    @pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
    def test_matches_quadrature(self, k, t, gamma):
        oracle = caputo_quadrature_oracle(lambda s: k * s ** (k - 1), t, gamma)
        assert abs(caputo_power(t, k, gamma) - oracle) <= 1e-8

    def test_domain(self):
        with pytest.raises(DomainError):
            caputo_power(-1.0, 1, 0.5)
        with pytest.raises(DomainError):
            caputo_power(1.0, -1, 0.5)


class TestExpSeries:
    def test_first_order_is_e(self):
        assert caputo_exp_series(1.0, 1.0) == pytest.approx(math.e, rel=1e-14)

    def test_zero_time(self):
        assert caputo_exp_series(0.0, 0.5) == 0.0

    @pytest.mark.parametrize("t", [0.25, 1.0, 2.0])
    @pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
    def test_against_mittag_leffler_form(self, t, gamma):
        # D^gamma e^t = t^(1-gamma) E_{1,2-gamma}(t), summed here with mpmath
        ref = mpmath.nsum(lambda k: mpmath.power(t, k + 1 - gamma) / mpmath.gamma(k + 2 - gamma), [0, mpmath.inf])
        assert caputo_exp_series(t, gamma) == pytest.approx(float(ref), rel=1e-13)

    @pytest.mark.parametrize("t", [0.25, 1.0])
    @pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
    def test_against_quadrature(self, t, gamma):
        assert abs(caputo_exp_series(t, gamma) - caputo_quadrature_oracle(math.exp, t, gamma)) <= 1e-8

    def test_tail_bound(self):
        val, bound = caputo_exp_series(1.0, 0.5, tol=1e-6, full_output=True)
        ref = caputo_exp_series(1.0, 0.5, tol=1e-16)
        assert 0 < bound
        assert abs(ref - val) <= bound

    def test_domain(self):
        with pytest.raises(DomainError):
            caputo_exp_series(2.5, 0.5)


class TestQuadratureOracle:
    def test_zero(self):
        assert caputo_quadrature_oracle(lambda s: 0.0, 1.0, 0.5) == 0.0

    def test_linear(self):
        assert caputo_quadrature_oracle(lambda s: 1.0, 1.0, 0.5) == pytest.approx(1.1283791671, rel=1e-10)

    def test_integer_order(self):
        assert caputo_quadrature_oracle(math.cos, 0.3, 1.0) == math.cos(0.3)


class TestL1Truncation:
    @pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
    def test_order_on_exponential(self, gamma):
        exact = caputo_exp_series(1.0, gamma)
        steps, errs = [], []
        for K in (20, 40, 80, 160):
            dt = 1.0 / K
            w = l1_weights(gamma, K, dt)
            y = np.exp(dt * np.arange(K + 1))
            approx = (y[K] - history_term(y[:K], w)) / w.beta
            steps.append(dt)
            errs.append(abs(approx - exact))
        slope = np.polyfit(np.log(steps), np.log(errs), 1)[0]
        assert slope == pytest.approx(2 - gamma, abs=0.15)
