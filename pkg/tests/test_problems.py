import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracbeam.exceptions import DomainError, ManufacturedResidualError
from fracbeam.harness import solve_problem
from fracbeam.problems import (
    Exp,
    ExpPlus,
    Poly,
    SineSeries,
    check_manufactured,
    get_problem,
    manufacture,
    manufactured_from_mapping,
    pde_residual,
    problem1,
    problem2,
    problem3,
)
from fracbeam.solver import ProblemSpec


class TestSineSeries:
    def test_derivatives(self):
        s = SineSeries((1.0, 0.5))
        x = np.linspace(0, 1, 7)
        want4 = np.pi**4 * np.sin(np.pi * x) + 0.5 * (2 * np.pi) ** 4 * np.sin(2 * np.pi * x)
        np.testing.assert_allclose(s(x, 4), want4, atol=1e-10)
        want2 = -np.pi**2 * np.sin(np.pi * x) - 0.5 * (2 * np.pi) ** 2 * np.sin(2 * np.pi * x)
        np.testing.assert_allclose(s(x, 2), want2, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(amps=st.lists(st.floats(-3, 3), min_size=1, max_size=4), L=st.floats(0.5, 3))
    def test_simply_supported(self, amps, L):
        s = SineSeries(tuple(amps), L)
        ends = np.array([0.0, L])
        assert np.max(np.abs(s(ends))) <= 1e-12 * max(1, max(map(abs, amps)))
        assert np.max(np.abs(s(ends, 2))) <= 1e-10 * max(1, max(map(abs, amps))) * (len(amps) * math.pi / L) ** 2


class TestBuiltins:
    @pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
    def test_problem2_forcing_value(self, gamma):
        ref = 1 / mpmath.gamma(2 - gamma) + 0.05 * mpmath.pi**4
        assert problem2(gamma).forcing(np.array([0.5]), 1.0)[0] == pytest.approx(float(ref), rel=1e-13)

    def test_problem2_zero_forcing_at_start(self):
        # D^gamma t vanishes at t = 0 and so does y
        np.testing.assert_array_equal(problem2(0.5).forcing(np.linspace(0, 1, 5), 0.0), 0.0)

    def test_problem3_forcing_at_start(self):
        x = np.linspace(0, 1, 9)
        np.testing.assert_allclose(problem3(0.5).forcing(x, 0.0), 0.05 * np.pi**4 * np.sin(np.pi * x), atol=1e-14)

    def test_problem1_forcing(self):
        x, t, g = np.array([0.3]), 0.8, 0.4
        cap = mpmath.nsum(lambda k: mpmath.power(t, k + 1 - g) / mpmath.gamma(k + 2 - g), [0, mpmath.inf])
        ref = math.sin(0.3 * math.pi) * (float(cap) + 0.01 * math.pi**4 * math.exp(t))
        assert problem1(g).forcing(x, t)[0] == pytest.approx(ref, rel=1e-12)

    @pytest.mark.parametrize("factory", [problem1, problem2, problem3])
    def test_exact_matches_initial(self, factory):
        p = factory(0.5)
        x = np.linspace(0, 1, 21)
        np.testing.assert_allclose(p.exact(x, 0.0), p.initial(x), atol=1e-15)

    def test_default_alphas(self):
        assert problem1(0.5).alpha == 0.01
        assert problem2(0.5).alpha == 0.05 and problem3(0.5).alpha == 0.05

    def test_get_problem(self):
        assert get_problem(3, 0.5).name == "problem3"
        assert get_problem("2", 0.5, alpha=0.2, T=2.0).alpha == 0.2
        with pytest.raises(DomainError):
            get_problem(4, 0.5)
        with pytest.raises(DomainError):
            get_problem("x", 0.5)


class TestManufacture:
    def test_constant_temporal_is_steady(self):
        p = manufacture(SineSeries(), Poly((2.0,)), 0.1, 0.5)
        x = np.linspace(0, 1, 11)
        for t in (0.0, 0.4, 1.0):
            np.testing.assert_allclose(p.forcing(x, t), 0.2 * np.pi**4 * np.sin(np.pi * x), atol=1e-13)

    def test_square_caputo_part(self):
        p = manufacture(SineSeries(), Poly((0, 0, 1.0)), 0.1, 0.5)
        assert p.solution.caputo_of_temporal(0.6) == pytest.approx(2 * 0.6**1.5 / math.gamma(2.5), rel=1e-14)

    def test_second_mode_valid(self):
        p = manufacture(SineSeries((0.0, 1.0)), Exp(), 0.05, 0.5)
        assert check_manufactured(p) <= 1e-7

    def test_rejects_nonvanishing_profile(self):
        with pytest.raises(DomainError):
            manufacture(lambda x, order=0: np.cos(np.pi * np.asarray(x)), Exp(), 0.05, 0.5)

    def test_rejects_curvature_at_ends(self):
        # x (1 - x) vanishes at the ends but its second derivative does not
        def prof(x, order=0):
            x = np.asarray(x, dtype=float)
            return {0: x * (1 - x), 2: -2 + 0 * x, 4: 0 * x}[order]

        with pytest.raises(DomainError):
            manufacture(prof, Poly((0, 1)), 0.05, 0.5)

    def test_rejects_bad_order(self):
        with pytest.raises(DomainError):
            manufacture(SineSeries(), Exp(), 0.05, 1.2)

    def test_expplus_shift(self):
        p = manufacture(SineSeries(), ExpPlus(-1.0), 0.05, 0.5)
        np.testing.assert_allclose(p.initial(np.linspace(0, 1, 5)), 0.0, atol=1e-15)


class TestResidual:
    @pytest.mark.parametrize("factory", [problem1, problem2])
    @pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
    def test_builtin_residual(self, factory, gamma):
        assert check_manufactured(factory(gamma)) <= 1e-7

    @pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
    def test_problem3_residual(self, gamma):
        assert check_manufactured(problem3(gamma)) <= 1e-8

    def test_residual_detects_wrong_forcing(self):
        good = problem2(0.5)
        bad = ProblemSpec(alpha=good.alpha, gamma=0.5, initial=good.initial,
                          forcing=lambda x, t: good.forcing(x, t) * 1.01,
                          exact=good.exact, solution=good.solution, name="bad")
        with pytest.raises(ManufacturedResidualError):
            check_manufactured(bad)

    def test_residual_needs_solution(self):
        p = ProblemSpec(alpha=1.0, gamma=0.5, initial=lambda x: 0 * x, forcing=lambda x, t: 0 * x)
        with pytest.raises(ValueError):
            pde_residual(p, 0.5, 0.5)


class TestMapping:
    def test_defaults_are_problem2(self):
        p = manufactured_from_mapping({}, 0.5)
        x = np.linspace(0, 1, 9)
        np.testing.assert_allclose(p.forcing(x, 0.7), problem2(0.5).forcing(x, 0.7), rtol=1e-14)

    def test_keys(self):
        p = manufactured_from_mapping({"spatial": "sin:0,2", "temporal": "expplus:-1", "alpha": "0.1",
                                       "name": "mine"}, 0.3, T=0.5)
        assert p.name == "mine" and p.alpha == 0.1 and p.T == 0.5
        assert p.exact(np.array([0.25]), 0.0)[0] == pytest.approx(0.0, abs=1e-15)
        assert p.exact(np.array([0.25]), 1.0)[0] == pytest.approx(2 * (math.e - 1), rel=1e-14)

    def test_alpha_argument_wins(self):
        assert manufactured_from_mapping({"alpha": "0.1"}, 0.5, alpha=0.3).alpha == 0.3

    @pytest.mark.parametrize("spec", [{"spatial": "cos:1"}, {"temporal": "log"}])
    def test_unsupported(self, spec):
        with pytest.raises(DomainError):
            manufactured_from_mapping(spec, 0.5)


class TestTemporalBehaviour:
    def test_problem2_linear_in_time_is_exact(self):
        # L1 is exact for linear g; what remains after refining dt is spatial
        _, a = solve_problem(problem2(0.5), 20, 0.05)
        _, b = solve_problem(problem2(0.5), 20, 0.0125)
        assert abs(a.linf - b.linf) <= 1e-3 * b.linf

    @pytest.mark.parametrize("factory", [problem2, problem3])
    def test_error_is_spatial(self, factory):
        _, a = solve_problem(factory(0.5), 20, 0.02)
        _, b = solve_problem(factory(0.5), 20, 0.01)
        assert abs(a.linf - b.linf) <= 0.01 * a.linf
