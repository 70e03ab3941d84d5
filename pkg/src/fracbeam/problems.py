"""Test problems with manufactured forcing.

Every problem has a separable exact solution ``y = X(x) g(t)``; the forcing
is ``u = X(x) D_t^gamma g(t) + alpha X''''(x) g(t)`` with the Caputo
derivative of ``g`` taken in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .caputo import (
    caputo_exp_series,
    caputo_power,
    caputo_quadrature_oracle,
    check_order,
)
from .exceptions import DomainError, ManufacturedResidualError
from .solver import ProblemSpec

__all__ = [
    "SineSeries",
    "Poly",
    "Exp",
    "ExpPlus",
    "ManufacturedSolution",
    "manufacture",
    "problem1",
    "problem2",
    "problem3",
    "get_problem",
    "pde_residual",
    "check_manufactured",
]


@dataclass(frozen=True)
class SineSeries:
    """``sum_m A_m sin(m pi x / L)``; every mode is simply supported."""

    amplitudes: tuple[float, ...] = (1.0,)
    L: float = 1.0

    def __call__(self, x, order: int = 0):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for m, amp in enumerate(self.amplitudes, start=1):
            if amp == 0.0:
                continue
            k = m * math.pi / self.L
            # d^order/dx^order sin(kx) = k^order sin(kx + order pi/2)
            out = out + amp * k**order * np.sin(k * x + order * math.pi / 2)
        return out


@dataclass(frozen=True)
class Poly:
    """``sum_k c_k t**k``."""

    coefficients: tuple[float, ...]

    def __call__(self, t):
        return sum(c * t**k for k, c in enumerate(self.coefficients))

    def derivative(self, t):
        return sum(k * c * t ** (k - 1) for k, c in enumerate(self.coefficients) if k)

    def caputo(self, t: float, gamma: float) -> float:
        return sum(c * caputo_power(t, k, gamma) for k, c in enumerate(self.coefficients))


@dataclass(frozen=True)
class Exp:
    """``exp(t)``."""

    def __call__(self, t):
        return np.exp(t)

    def derivative(self, t):
        return np.exp(t)

    def caputo(self, t: float, gamma: float) -> float:
        return caputo_exp_series(t, gamma)


@dataclass(frozen=True)
class ExpPlus:
    """``exp(t) + shift``."""

    shift: float = 0.0

    def __call__(self, t):
        return np.exp(t) + self.shift

    def derivative(self, t):
        return np.exp(t)

    def caputo(self, t: float, gamma: float) -> float:
        return caputo_exp_series(t, gamma)


@dataclass(frozen=True)
class ManufacturedSolution:
    spatial: object
    temporal: object
    alpha: float
    gamma: float

    def exact(self, x, t):
        return self.spatial(x) * self.temporal(t)

    def forcing(self, x, t):
        g = self.temporal(t)
        return self.spatial(x) * self.temporal.caputo(t, self.gamma) + self.alpha * self.spatial(x, 4) * g

    def caputo_of_temporal(self, t):
        return self.temporal.caputo(t, self.gamma)


def manufacture(
    spatial,
    temporal,
    alpha: float,
    gamma: float,
    L: float = 1.0,
    T: float = 1.0,
    name: str = "manufactured",
) -> ProblemSpec:
    """Problem whose exact solution is ``spatial(x) * temporal(t)``.

    ``spatial(x, order)`` must return derivatives of order 0, 2 and 4 and
    satisfy the simply supported conditions at both ends.
    """
    check_order(gamma)
    ends = np.array([0.0, L])
    bad = max(
        float(np.max(np.abs(spatial(ends)))), float(np.max(np.abs(spatial(ends, 2))))
    )
    if bad > 1e-10:
        raise DomainError(
            f"spatial profile violates y = y_xx = 0 at the ends (max {bad:.2e})"
        )
    sol = ManufacturedSolution(spatial, temporal, float(alpha), float(gamma))
    g0 = float(temporal(0.0))
    return ProblemSpec(
        alpha=float(alpha),
        gamma=float(gamma),
        initial=lambda x: spatial(x) * g0,
        forcing=sol.forcing,
        L=L,
        T=T,
        exact=sol.exact,
        name=name,
        solution=sol,
    )


def problem1(gamma: float, alpha: float = 0.01, T: float = 1.0) -> ProblemSpec:
    """``y = sin(pi x) exp(t)``, ``alpha = 0.01``."""
    return manufacture(SineSeries(), Exp(), alpha, gamma, T=T, name="problem1")


def problem2(gamma: float, alpha: float = 0.05, T: float = 1.0) -> ProblemSpec:
    """``y = t sin(pi x)``, ``alpha = 0.05``, zero initial data."""
    return manufacture(SineSeries(), Poly((0.0, 1.0)), alpha, gamma, T=T, name="problem2")


def problem3(gamma: float, alpha: float = 0.05, T: float = 1.0) -> ProblemSpec:
    """``y = (t + 1) sin(pi x)``, ``alpha = 0.05``."""
    return manufacture(SineSeries(), Poly((1.0, 1.0)), alpha, gamma, T=T, name="problem3")


_BUILTIN = {1: problem1, 2: problem2, 3: problem3}


def get_problem(index: int, gamma: float, alpha: float | None = None, T: float = 1.0) -> ProblemSpec:
    try:
        factory = _BUILTIN[int(index)]
    except (KeyError, ValueError):
        raise DomainError(f"unknown problem {index!r}; choose 1, 2 or 3") from None
    if alpha is None:
        return factory(gamma, T=T)
    return factory(gamma, alpha=alpha, T=T)


def pde_residual(problem: ProblemSpec, x: float, t: float, tol: float = 1e-11) -> float:
    """``D_t^gamma y + alpha y_xxxx - u`` at ``(x, t)`` for a manufactured problem.

    The Caputo term is integrated numerically from its definition, so the
    check does not share code with the closed forms behind the forcing.
    """
    sol = problem.solution
    if sol is None:
        raise ValueError(f"{problem.name} carries no manufactured solution")
    X = float(sol.spatial(np.array([x]))[0])
    X4 = float(sol.spatial(np.array([x]), 4)[0])
    cap = caputo_quadrature_oracle(
        lambda s: float(sol.temporal.derivative(s)), t, problem.gamma, tol=tol
    )
    u = float(problem.forcing(np.array([x]), t)[0])
    return X * cap + problem.alpha * X4 * float(sol.temporal(t)) - u


def check_manufactured(
    problem: ProblemSpec,
    points: int = 20,
    tol: float = 1e-7,
    seed: int = 0,
) -> float:
    """Largest PDE residual over random sample points; raises above ``tol``.

    Also checks that the exact solution matches the initial data.
    """
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0.0, problem.L, points)
    ts = rng.uniform(0.0, problem.T, points)
    worst = max(abs(pde_residual(problem, x, t)) for x, t in zip(xs, ts))
    if problem.exact is not None:
        xg = np.linspace(0.0, problem.L, 33)
        worst = max(worst, float(np.max(np.abs(problem.exact(xg, 0.0) - problem.initial(xg)))))
    if not worst <= tol:
        raise ManufacturedResidualError(
            f"{problem.name}: manufactured residual {worst:.3e} exceeds {tol:.1e}"
        )
    return worst


def _sine_from_text(text: str, L: float) -> SineSeries:
    kind, _, args = text.partition(":")
    if kind.strip() != "sin":
        raise DomainError(f"unsupported spatial profile {text!r}; use sin:<amplitudes>")
    amps: Sequence[float] = tuple(float(a) for a in args.split(",")) if args else (1.0,)
    return SineSeries(tuple(amps), L)


def _temporal_from_text(text: str):
    kind, _, args = text.partition(":")
    kind = kind.strip().lower()
    if kind == "poly":
        return Poly(tuple(float(a) for a in args.split(",")))
    if kind == "exp":
        return Exp()
    if kind == "expplus":
        return ExpPlus(float(args or 0.0))
    raise DomainError(f"unsupported temporal profile {text!r}")


def manufactured_from_mapping(spec: dict, gamma: float, alpha: float | None = None, T: float = 1.0) -> ProblemSpec:
    """Build a manufactured problem from ``key = value`` settings.

    Recognized keys: ``spatial`` (``sin:A1,A2,...``), ``temporal``
    (``poly:c0,c1,...``, ``exp`` or ``expplus:shift``), ``alpha``, ``L``.
    """
    L = float(spec.get("L", 1.0))
    a = alpha if alpha is not None else float(spec.get("alpha", 0.05))
    spatial = _sine_from_text(spec.get("spatial", "sin:1"), L)
    temporal = _temporal_from_text(spec.get("temporal", "poly:0,1"))
    return manufacture(spatial, temporal, a, gamma, L=L, T=T, name=spec.get("name", "manufactured"))
