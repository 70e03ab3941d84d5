"""Fully discrete scheme for the fourth-order time-fractional beam equation.

    D_t^gamma y + alpha y_xxxx = u(x, t),   0 < x < L,  0 < t <= T,
    y(x, 0) = v0(x),  y = y_xx = 0 at x = 0 and x = L.

Time is discretized with the L1 formula, which turns every step into the
elliptic problem ``y^{p+1} + beta alpha y^{p+1}_xxxx = R^{p+1}`` with
``R^{p+1}`` the memory combination of earlier levels plus ``beta u^{p+1}``.
Space is handled by the quintic spline stencil relations: applying the
five-point operator ``Phi`` to that equation and replacing ``h**4 Phi(F)`` by
the fourth difference of ``S`` gives a pentadiagonal system for the interior
nodal values.  The matrix does not depend on the step, so it is factorized
once per run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .banded import BandFactorization, PentadiagonalMatrix, band_lu, band_solve
from .caputo import L1Weights, check_order, history_term, l1_weights
from .exceptions import DomainError, ReconstructionError
from .spline import (
    ConsistencyCoefficients,
    Mesh,
    SplineNodeData,
    optimal_consistency_coefficients,
    second_derivatives_from_relation,
)

logger = logging.getLogger(__name__)

__all__ = [
    "ProblemSpec",
    "SchemeConfig",
    "SystemMatrices",
    "SolutionHistory",
    "StabilityReport",
    "assemble_system",
    "stencil_rhs",
    "first_step",
    "step",
    "run",
    "reconstruct_derivatives",
    "discrete_norms",
    "stability_monitor",
]


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients, data and (optionally) the exact solution of a problem.

    ``initial(x)`` and ``forcing(x, t)`` take an array of abscissae and a
    scalar time; ``exact(x, t)`` likewise.
    """

    alpha: float
    gamma: float
    initial: Callable[[np.ndarray], np.ndarray]
    forcing: Callable[[np.ndarray, float], np.ndarray]
    L: float = 1.0
    T: float = 1.0
    exact: Callable[[np.ndarray, float], np.ndarray] | None = None
    name: str = "problem"
    solution: object | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        check_order(self.gamma)
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha!r}")
        ends = np.asarray(self.initial(np.array([0.0, self.L])), dtype=float)
        if np.max(np.abs(ends)) > 1e-12:
            raise DomainError("initial data must vanish at both ends")


@dataclass(frozen=True)
class SchemeConfig:
    mesh: Mesh
    coeffs: ConsistencyCoefficients = field(default_factory=optimal_consistency_coefficients)
    theta: float = 0.0

    def __post_init__(self):
        if self.mesh.n < 5:
            raise DomainError("scheme needs n >= 5")
        if self.coeffs.theta is not None and self.coeffs.theta != self.theta:
            raise DomainError("theta disagrees with the coefficient source")


@dataclass(frozen=True)
class SystemMatrices:
    """Step matrix over ``S_1..S_{n-1}`` together with its factorization."""

    A: PentadiagonalMatrix
    factorization: BandFactorization
    coeffs: ConsistencyCoefficients
    ratio: float  # beta * alpha / h**4
    h: float


@dataclass(frozen=True)
class SolutionHistory:
    """All time levels of a run.

    ``rhs[p]`` is the pointwise right-hand side ``R^p`` that produced level
    ``p`` (row 0 is NaN).  ``norm2[0]`` is NaN as no fourth-derivative data
    exist for the initial level.
    """

    mesh: Mesh
    levels: np.ndarray
    rhs: np.ndarray
    norm0: np.ndarray
    norm2: np.ndarray
    weights: L1Weights
    theta: float = 0.0

    @property
    def final(self) -> np.ndarray:
        return self.levels[-1]


@dataclass(frozen=True)
class StabilityReport:
    """Per-level check of ``||y^p||_2 <= ||y^0||_0 + beta sum_{j<=p} ||u^j||_0``."""

    lhs: np.ndarray
    bound: np.ndarray
    passed: np.ndarray

    @property
    def ok(self) -> bool:
        return bool(np.all(self.passed))

    @property
    def max_ratio(self) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(self.bound > 0, self.lhs / self.bound, 0.0)
        return float(np.max(r)) if r.size else 0.0


def assemble_system(
    problem: ProblemSpec, config: SchemeConfig, weights: L1Weights
) -> SystemMatrices:
    mesh, c = config.mesh, config.coeffs
    n, h = mesh.n, mesh.h
    r = weights.beta * problem.alpha / h**4
    m = n - 1

    bands = np.zeros((5, m))
    interior = (c.alpha1 + r, c.beta1 - 4 * r, c.gamma1 + 6 * r, c.beta1 - 4 * r, c.alpha1 + r)
    for k, v in enumerate(interior):
        bands[k, :] = v
    end = (c.omega1 + 5 * r, c.omega2 - 4 * r, c.omega3 + r)
    # end rows; out-of-range band slots are zeroed by the constructor
    bands[2, 0], bands[3, 0], bands[4, 0] = end
    bands[2, m - 1], bands[1, m - 1], bands[0, m - 1] = end

    A = PentadiagonalMatrix(bands)
    return SystemMatrices(A=A, factorization=band_lu(A), coeffs=c, ratio=r, h=h)


def stencil_rhs(
    R: np.ndarray,
    sys: SystemMatrices,
    S0: float = 0.0,
    Sn: float = 0.0,
    M0: float = 0.0,
    Mn: float = 0.0,
) -> np.ndarray:
    """Apply ``Phi`` (interior) and the end rows to a pointwise RHS ``R``.

    Known boundary values are moved to the right-hand side; they are zero
    for simply supported ends but kept general.
    """
    c, r, h = sys.coeffs, sys.ratio, sys.h
    R = np.asarray(R, dtype=float)
    n = R.size - 1
    w0, w1, w2, w3 = c.omega
    a1, b1, g1 = c.alpha1, c.beta1, c.gamma1
    out = np.empty(n - 1)
    i = np.arange(2, n - 1)
    out[1:-1] = (
        a1 * (R[i - 2] + R[i + 2]) + b1 * (R[i - 1] + R[i + 1]) + g1 * R[i]
    )
    out[0] = w0 * R[0] + w1 * R[1] + w2 * R[2] + w3 * R[3]
    out[-1] = w3 * R[n - 3] + w2 * R[n - 2] + w1 * R[n - 1] + w0 * R[n]
    out[0] -= (w0 - 2 * r) * S0 + r * h**2 * M0
    out[-1] -= (w0 - 2 * r) * Sn + r * h**2 * Mn
    out[1] -= (a1 + r) * S0
    out[-2] -= (a1 + r) * Sn
    return out


def _solve_level(R: np.ndarray, sys: SystemMatrices) -> np.ndarray:
    S = np.zeros(R.size)
    S[1:-1] = band_solve(sys.factorization, stencil_rhs(R, sys))
    return S


def first_step(
    problem: ProblemSpec,
    config: SchemeConfig,
    sys: SystemMatrices,
    weights: L1Weights,
    return_rhs: bool = False,
):
    """Level 1 from ``S^1 + beta alpha F^1 = v0 + beta u^1``."""
    mesh = config.mesh
    x = mesh.x
    R = np.asarray(problem.initial(x), dtype=float) + weights.beta * np.asarray(
        problem.forcing(x, weights.dt), dtype=float
    )
    S = _solve_level(R, sys)
    return (S, R) if return_rhs else S


def step(
    levels,
    p: int,
    problem: ProblemSpec,
    config: SchemeConfig,
    sys: SystemMatrices,
    weights: L1Weights,
    return_rhs: bool = False,
):
    """Level ``p + 1`` from levels ``0..p`` (the rows of ``levels``)."""
    if p < 1:
        raise ValueError("use first_step for p = 0")
    levels = np.asarray(levels, dtype=float)
    if levels.shape[0] < p + 1:
        raise IndexError(f"history holds {levels.shape[0]} levels, need {p + 1}")
    x = config.mesh.x
    t_next = (p + 1) * weights.dt
    R = history_term(levels[: p + 1], weights) + weights.beta * np.asarray(
        problem.forcing(x, t_next), dtype=float
    )
    S = _solve_level(R, sys)
    return (S, R) if return_rhs else S


def _fourth_derivatives(S, R, problem, x, t, weights):
    ba = weights.beta * problem.alpha
    if ba == 0.0:
        raise ReconstructionError("beta * alpha vanishes; F cannot be recovered")
    F = (R - S) / ba
    ends = np.asarray(problem.forcing(np.array([x[0], x[-1]]), t), dtype=float)
    F[0], F[-1] = ends / problem.alpha
    return F


def run(problem: ProblemSpec, config: SchemeConfig) -> SolutionHistory:
    """March from ``t = 0`` to ``t = T``; cost is O(K**2 n) from the memory term."""
    mesh = config.mesh
    n, K, h = mesh.n, mesh.K, mesh.h
    x = mesh.x
    weights = l1_weights(problem.gamma, K, mesh.dt)
    sys = assemble_system(problem, config, weights)

    levels = np.zeros((K + 1, n + 1))
    rhs = np.full((K + 1, n + 1), np.nan)
    norm0 = np.empty(K + 1)
    norm2 = np.full(K + 1, np.nan)

    levels[0] = problem.initial(x)
    levels[0, 0] = levels[0, -1] = 0.0
    norm0[0] = discrete_norms(levels[0], np.zeros(n + 1), 0.0, 0.0, h)[0]

    for p in range(K):
        if p == 0:
            S, R = first_step(problem, config, sys, weights, return_rhs=True)
        else:
            S, R = step(levels, p, problem, config, sys, weights, return_rhs=True)
        levels[p + 1] = S
        rhs[p + 1] = R
        F = _fourth_derivatives(S, R, problem, x, (p + 1) * mesh.dt, weights)
        M = second_derivatives_from_relation(S, F, h, config.theta)
        norm0[p + 1], norm2[p + 1] = discrete_norms(
            S, M, weights.beta, problem.alpha, h
        )
        if not np.all(np.isfinite(S)):
            logger.warning("non-finite values at level %d", p + 1)

    for a in (levels, rhs, norm0, norm2):
        a.setflags(write=False)
    return SolutionHistory(
        mesh=mesh,
        levels=levels,
        rhs=rhs,
        norm0=norm0,
        norm2=norm2,
        weights=weights,
        theta=config.theta,
    )


def reconstruct_derivatives(
    history: SolutionHistory,
    p: int,
    problem: ProblemSpec,
    config: SchemeConfig | None = None,
    weights: L1Weights | None = None,
) -> SplineNodeData:
    """Nodal ``S``, ``M``, ``F`` for level ``p >= 1``.

    Interior ``F`` follows from the semi-discrete relation
    ``S + beta alpha F = R``; at the ends the Caputo term vanishes with
    ``y``, leaving ``F = u / alpha``.  ``M`` comes from the spline relation
    with ``M_0 = M_n = 0``.
    """
    if p < 1 or p >= history.levels.shape[0]:
        raise IndexError(f"level {p} not available for reconstruction")
    weights = weights or history.weights
    theta = config.theta if config is not None else history.theta
    mesh = history.mesh
    x = mesh.x
    S = np.array(history.levels[p])
    F = _fourth_derivatives(S, history.rhs[p], problem, x, p * mesh.dt, weights)
    M = second_derivatives_from_relation(S, F, mesh.h, theta)
    return SplineNodeData(S=S, M=M, F=F, h=mesh.h)


def discrete_norms(level, M, beta: float, alpha: float, h: float) -> tuple[float, float]:
    """Discrete ``||y||_0`` and ``||y||_2 = (||y||_0**2 + beta alpha ||y_xx||_0**2)**0.5``.

    Both are the h-weighted grid norms, distinct from the relative L2 error
    norm used for the error tables.
    """
    y = np.asarray(level, dtype=float)
    M = np.asarray(M, dtype=float)
    n0sq = h * float(np.dot(y, y))
    n2sq = n0sq + beta * alpha * h * float(np.dot(M, M))
    return float(np.sqrt(n0sq)), float(np.sqrt(n2sq))


def stability_monitor(
    history: SolutionHistory,
    problem: ProblemSpec,
    weights: L1Weights | None = None,
    rtol: float = 1e-10,
) -> StabilityReport:
    weights = weights or history.weights
    mesh = history.mesh
    x, h = mesh.x, mesh.h
    K = mesh.K
    unorm = np.array(
        [
            discrete_norms(problem.forcing(x, j * mesh.dt), x * 0.0, 0.0, 0.0, h)[0]
            for j in range(1, K + 1)
        ]
    )
    bound = history.norm0[0] + weights.beta * np.cumsum(unorm)
    lhs = np.array(history.norm2[1:])
    passed = lhs <= bound * (1.0 + rtol)
    return StabilityReport(lhs=lhs, bound=bound, passed=passed)
