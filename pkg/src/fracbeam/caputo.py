"""L1 discretization of the Caputo time derivative.

On a uniform grid ``t_p = p dt`` the Caputo derivative of order
``0 < gamma <= 1`` at ``t_{p+1}`` is approximated by

    1 / (Gamma(2 - gamma) dt**gamma) * sum_j b_j (y^{p+1-j} - y^{p-j}),

with memory weights ``b_j = (j+1)**(1-gamma) - j**(1-gamma)``.  Also here:
closed-form Caputo derivatives of monomials and of ``exp(t)`` used to build
manufactured forcing terms, and a quadrature oracle that integrates the
definition directly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .exceptions import ConvergenceError, DomainError

__all__ = [
    "L1Weights",
    "check_order",
    "l1_weights",
    "gamma_function",
    "history_term",
    "caputo_power",
    "caputo_exp_series",
    "caputo_quadrature_oracle",
]


def check_order(gamma: float) -> float:
    gamma = float(gamma)
    if not (0.0 < gamma <= 1.0):
        raise DomainError(f"fractional order must lie in (0, 1], got {gamma!r}")
    return gamma


def gamma_function(x: float) -> float:
    """Euler gamma function on ``(0, 30]``."""
    if not x > 0:
        raise DomainError(f"gamma_function needs x > 0, got {x!r}")
    return math.gamma(x)


@dataclass(frozen=True)
class L1Weights:
    """Memory weights ``b_0..b_p`` and the step factor ``beta``."""

    gamma: float
    b: np.ndarray
    beta: float
    dt: float

    @property
    def p(self) -> int:
        return self.b.size - 1

    def memory_coefficients(self, p: int) -> np.ndarray:
        """Coefficients multiplying levels ``y^0..y^p`` in the history term.

        Level ``p`` gets ``b_0 - b_1``, level ``p - j`` gets ``b_j - b_{j+1}``
        for ``1 <= j <= p - 1`` and level 0 gets ``b_p``.
        """
        if p < 1:
            raise ValueError("history needs p >= 1; the first step has no memory")
        if p > self.p:
            raise IndexError(f"weights only cover p <= {self.p}, asked for {p}")
        b = self.b[: p + 1]
        c = np.empty(p + 1)
        c[1:] = (b[:-1] - b[1:])[::-1]
        c[0] = b[p]
        return c


def l1_weights(gamma: float, p: int, dt: float) -> L1Weights:
    """Weights ``b_0..b_p`` and ``beta = Gamma(2 - gamma) dt**gamma``."""
    gamma = check_order(gamma)
    if p < 0 or int(p) != p:
        raise DomainError(f"p must be a non-negative integer, got {p!r}")
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt!r}")
    b = np.zeros(p + 1)
    b[0] = 1.0
    if p > 0 and gamma < 1.0:
        j = np.arange(1, p + 1, dtype=float)
        s = 1.0 - gamma
        # (j+1)^s - j^s = j^s * expm1(s * log1p(1/j)), free of cancellation
        b[1:] = j**s * np.expm1(s * np.log1p(1.0 / j))
    b.setflags(write=False)
    beta = gamma_function(2.0 - gamma) * dt**gamma
    return L1Weights(gamma=gamma, b=b, beta=beta, dt=float(dt))


def history_term(levels, weights: L1Weights) -> np.ndarray:
    """Weighted combination of past levels ``y^0..y^p`` (rows of ``levels``)."""
    levels = np.asarray(levels, dtype=float)
    if levels.ndim == 1:
        levels = levels[:, None]
        squeeze = True
    else:
        squeeze = False
    p = levels.shape[0] - 1
    c = weights.memory_coefficients(p)
    out = c @ levels
    return out[0] if squeeze else out


def caputo_power(t: float, k: int, gamma: float) -> float:
    """Caputo derivative of ``t**k``: ``k! / Gamma(k+1-gamma) t**(k-gamma)``."""
    gamma = check_order(gamma)
    if t < 0:
        raise DomainError("t must be non-negative")
    if k < 0 or int(k) != k:
        raise DomainError("k must be a non-negative integer")
    if k == 0:
        return 0.0
    if t == 0.0:
        return 1.0 if k == 1 and gamma == 1.0 else 0.0
    return math.factorial(k) / gamma_function(k + 1 - gamma) * t ** (k - gamma)


def caputo_exp_series(
    t: float, gamma: float, tol: float = 1e-14, full_output: bool = False
):
    """Caputo derivative of ``exp(t)`` by the series ``sum_k t**(k-gamma) / Gamma(k+1-gamma)``.

    Summation stops once the next term falls below ``tol`` times the partial
    sum.  With ``full_output`` a ``(value, tail_bound)`` pair is returned,
    where ``tail_bound`` bounds the discarded terms.
    """
    gamma = check_order(gamma)
    if not (0.0 <= t <= 2.0):
        raise DomainError(f"series is only used for 0 <= t <= 2, got {t!r}")
    if t == 0.0:
        value = 1.0 if gamma == 1.0 else 0.0
        return (value, 0.0) if full_output else value
    term = t ** (1.0 - gamma) / gamma_function(2.0 - gamma)
    total = term
    k = 1
    while True:
        ratio = t / (k + 1 - gamma)
        nxt = term * ratio
        if nxt < tol * abs(total) or k > 200:
            break
        total += nxt
        term = nxt
        k += 1
    # geometric bound on the remaining terms; ratios decrease with k
    r = t / (k + 1 - gamma)
    bound = nxt / (1.0 - r) if r < 1.0 else math.inf
    return (total, bound) if full_output else total


def caputo_quadrature_oracle(
    fprime: Callable[[float], float], t: float, gamma: float, tol: float = 1e-11
) -> float:
    """Caputo derivative by direct quadrature of its integral definition.

    The kernel singularity at ``s = t`` is removed with
    ``s = t - v**(1/(1-gamma))``, which turns the integral into
    ``1/(1-gamma) * int_0^{t**(1-gamma)} fprime(t - v**(1/(1-gamma))) dv``.
    Independent of the closed forms; intended for verification.
    """
    gamma = check_order(gamma)
    if t < 0:
        raise DomainError("t must be non-negative")
    if gamma == 1.0:
        return float(fprime(t))
    if t == 0.0:
        return 0.0
    q = 1.0 / (1.0 - gamma)
    upper = t ** (1.0 - gamma)
    scale = q / gamma_function(1.0 - gamma)
    abstol = tol / scale

    def integrand(v):
        return fprime(t - v**q)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(
                integrand, 0.0, upper, epsabs=abstol, epsrel=0.0, limit=200
            )
        except integrate.IntegrationWarning as exc:
            raise ConvergenceError(f"Caputo quadrature did not converge: {exc}") from exc
    if err > abstol:
        raise ConvergenceError(f"Caputo quadrature error estimate {err * scale:.2e} > {tol:.2e}")
    return scale * val
