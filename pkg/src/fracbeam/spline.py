"""Non-polynomial quintic spline machinery.

Each segment on ``[x_i, x_{i+1}]`` has the form

    R_i(x) = a cos(xi z) + b sin(xi z) + c z**3 + d z**2 + e z + f,   z = x - x_i,

with ``theta = xi * h``.  As ``theta -> 0`` the trigonometric pair degenerates
and the segment becomes the classical quintic polynomial spline.

This module provides the five-point stencil weights that tie nodal values
``S_i`` to nodal fourth derivatives ``F_i`` (interior ``alpha1, beta1, gamma1``
and end rows ``omega0..omega3``), segment construction from nodal data,
evaluation of the piecewise function and its derivatives, and the local
truncation residual of the stencil relations on exact data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy as np
from mpmath.ctx_mp import MPContext

from .exceptions import DomainError

__all__ = [
    "THETA_SWITCH",
    "CoefficientSource",
    "ConsistencyCoefficients",
    "Mesh",
    "SplineNodeData",
    "SplineSegmentCoefficients",
    "consistency_coefficients_from_theta",
    "optimal_consistency_coefficients",
    "second_derivative_weights",
    "segment_coefficients",
    "evaluate_spline",
    "second_derivatives_from_relation",
    "relation_residual",
]

#: Below this theta the closed-form weights are replaced by Maclaurin series.
THETA_SWITCH = 1e-2

# Private context; never mutated after import so concurrent use is safe.
_MP = MPContext()
_MP.dps = 34

# Maclaurin coefficients of theta**0, theta**2, ..., theta**14.  omega2 equals
# beta1 and the off-centre second-derivative weight equals -alpha1.
_SERIES = {
    "alpha1": ("1/120", "1/840", "239/1814400", "409/29937600", "910573/653837184000",
               "25201/178319232000", "10918223/762187345920000", "2317539947/1596591942865920000"),
    "beta1": ("13/60", "17/840", "1877/907200", "12601/59875200", "6979009/326918592000",
              "4244017/1961511552000", "584857583/2667655710720000", "141867555931/6386367771463680000"),
    "gamma1": ("11/20", "17/420", "1189/302400", "73/184800", "4353103/108972864000",
               "1322569/326918592000", "9344869/22800476160000", "11049939833/266098657144320000"),
    "omega0": ("3/20", "43/2520", "1621/907200", "10937/59875200", "6064577/326918592000",
               "3689009/1961511552000", "10375711/54441953280000", "123326012507/6386367771463680000"),
    "omega1": ("13/24", "11/280", "197/51840", "1631/4276800", "5041609/130767436800",
               "1094029/280215936000", "422054357/1067062284288000", "4921699927/122814764835840000"),
    "omega3": ("1/120", "1/840", "239/1814400", "409/29937600", "910573/653837184000",
               "25201/178319232000", "10918223/762187345920000", "2317539947/1596591942865920000"),
    "m_center": ("-1/15", "-1/315", "-4/14175", "-13/467775", "-1786/638512875",
                 "-542/1915538625", "-4666/162820783125", "-565843/194896477400625"),
    # O(1) brackets of the segment coefficients once the cubic Taylor part of
    # the trigonometric pair is folded into the polynomial (see _shifted_cubic)
    "ej": ("7/360", "31/15120", "127/604800", "73/3421440", "1414477/653837184000",
           "8191/37362124800", "16931177/762187345920000", "5749691557/2554547108585472000"),
    "ei": ("1/45", "2/945", "1/4725", "2/93555", "1382/638512875",
           "4/18243225", "3617/162820783125", "87734/38979295480125"),
    "cj": ("-1/36", "-7/2160", "-31/90720", "-127/3628800", "-73/20528640",
           "-1414477/3923023104000", "-8191/224172748800", "-16931177/4573124075520000"),
    "ci": ("-1/18", "-1/270", "-1/2835", "-1/28350", "-1/280665",
           "-691/1915538625", "-2/54729675", "-3617/976924698750"),
}
_SERIES_FLOAT = {k: tuple(float(Fraction(c)) for c in v) for k, v in _SERIES.items()}

OPTIMAL_RATIONAL = {
    "alpha1": Fraction(-1, 720),
    "beta1": Fraction(31, 180),
    "gamma1": Fraction(79, 120),
    "omega0": Fraction(7, 90),
    "omega1": Fraction(49, 72),
    "omega2": Fraction(7, 45),
    "omega3": Fraction(1, 360),
}


class CoefficientSource(Enum):
    FROM_THETA = "theta"
    OPTIMAL = "optimal"


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not (0.0 <= theta < math.pi) or math.isnan(theta):
        raise DomainError(f"theta must lie in [0, pi), got {theta!r}")
    return theta


@dataclass(frozen=True)
class ConsistencyCoefficients:
    """Stencil weights of the spline consistency relations.

    Interior rows use ``(alpha1, beta1, gamma1, beta1, alpha1)``; the first
    and last unknown rows use ``(omega0, omega1, omega2, omega3)`` read
    outward-in.
    """

    alpha1: float
    beta1: float
    gamma1: float
    omega0: float
    omega1: float
    omega2: float
    omega3: float
    source: CoefficientSource
    theta: float | None = None

    @property
    def phi(self) -> tuple[float, float, float, float, float]:
        return (self.alpha1, self.beta1, self.gamma1, self.beta1, self.alpha1)

    @property
    def omega(self) -> tuple[float, float, float, float]:
        return (self.omega0, self.omega1, self.omega2, self.omega3)

    @property
    def mu1(self) -> float:
        """``2 alpha1 + 2 beta1 + gamma1``; one for fourth-order consistency."""
        return 2.0 * self.alpha1 + 2.0 * self.beta1 + self.gamma1


@dataclass(frozen=True)
class Mesh:
    """Uniform space-time grid on ``[0, L] x [0, T]``."""

    n: int
    L: float = 1.0
    K: int = 1
    T: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 5:
            raise DomainError(f"need n >= 5 space intervals, got {self.n!r}")
        if int(self.K) != self.K or self.K < 1:
            raise DomainError(f"need K >= 1 time steps, got {self.K!r}")
        if not (self.L > 0 and self.T > 0):
            raise DomainError("L and T must be positive")

    @classmethod
    def from_steps(cls, n: int, dt: float, L: float = 1.0, T: float = 1.0) -> "Mesh":
        """Mesh with ``K = round(T / dt)``; ``dt`` must divide ``T``."""
        K = int(round(T / dt))
        if K < 1 or abs(K * dt - T) > 1e-9 * T:
            raise DomainError(f"dt={dt!r} does not divide T={T!r}")
        return cls(n=n, L=L, K=K, T=T)

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def dt(self) -> float:
        return self.T / self.K

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.n + 1)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.K + 1)


@dataclass(frozen=True)
class SplineNodeData:
    """Nodal values, second and fourth derivatives on a uniform mesh."""

    S: np.ndarray
    M: np.ndarray
    F: np.ndarray
    h: float

    def __post_init__(self):
        S, M, F = (np.asarray(a, dtype=float) for a in (self.S, self.M, self.F))
        if not (S.ndim == M.ndim == F.ndim == 1):
            raise ValueError("node arrays must be one-dimensional")
        if not (S.size == M.size == F.size):
            raise ValueError("node arrays must have equal length")
        if S.size < 5:
            raise ValueError("need at least 5 nodes")
        if not self.h > 0:
            raise DomainError("h must be positive")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "F", F)


@dataclass(frozen=True)
class SplineSegmentCoefficients:
    """Per-segment coefficients ``a..f``.

    For ``theta > 0`` these are the coefficients of the trigonometric segment.
    For ``theta == 0`` the trigonometric pair is replaced by its quintic limit
    and ``a``, ``b`` hold the coefficients of ``z**4`` and ``z**5``.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    e: np.ndarray
    f: np.ndarray
    theta: float
    h: float
    x0: float = 0.0
    shifted: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def xi(self) -> float:
        return self.theta / self.h

    @property
    def length(self) -> float:
        return self.n * self.h


def _series(name: str, theta: float) -> float:
    t2 = theta * theta
    acc = 0.0
    for c in reversed(_SERIES_FLOAT[name]):
        acc = acc * t2 + c
    return acc


@lru_cache(maxsize=256)
def _closed_form(theta: float) -> dict[str, float]:
    # The closed forms cancel terms of size theta**-4 down to O(1); evaluate
    # them in 34-digit arithmetic so the result is correct to double precision.
    mp = _MP
    t = mp.mpf(theta)
    s, c = mp.sin(t), mp.cos(t)
    t2, t3, t4 = t**2, t**3, t**4
    ts, t3s = t * s, t3 * s
    vals = {
        "alpha1": 1 / t4 + 1 / (6 * ts) - 1 / t3s,
        "beta1": (2 + 2 * c) / t3s + (2 - c) / (3 * ts) - 4 / t4,
        "gamma1": (1 - 4 * c) / (3 * ts) - (2 + 4 * c) / t3s + 6 / t4,
        "omega0": 2 / t3s - 2 / t4 + 4 / (6 * ts) - 1 / t2,
        "omega1": (1 - 8 * c) / (6 * ts) - (1 + 4 * c) / t3s + 5 / t4,
        "omega3": 1 / (6 * ts) - 1 / t3s + 1 / t4,
        "m_center": 2 / t4 - 2 * c / t3s + 2 * c / (6 * ts) - 1 / t2,
        "ej": 1 / t3s - 1 / t4 - 1 / (6 * t2),
        "ei": 1 / t4 - 1 / (3 * t2) - c / t3s,
        "cj": 1 / (6 * t2) - 1 / (6 * ts),
        "ci": c / (6 * ts) - 1 / (6 * t2),
    }
    return {k: float(v) for k, v in vals.items()}


def _weights(theta: float, branch: str | None = None) -> dict[str, float]:
    if branch is None:
        branch = "series" if theta < THETA_SWITCH else "closed"
    if branch == "series":
        return {k: _series(k, theta) for k in _SERIES_FLOAT}
    if branch == "closed":
        if theta == 0.0:
            raise DomainError("closed-form weights are undefined at theta = 0")
        return dict(_closed_form(theta))
    raise ValueError(f"unknown branch {branch!r}")


def consistency_coefficients_from_theta(
    theta: float, branch: str | None = None
) -> ConsistencyCoefficients:
    """Trigonometric stencil weights at ``theta = xi * h``.

    Parameters
    ----------
    theta : float
        Frequency times mesh width, ``0 <= theta < pi``.
    branch : {None, "series", "closed"}
        Force a particular evaluation route.  By default the Maclaurin
        series is used below :data:`THETA_SWITCH` and the closed form above.

    Notes
    -----
    The weights reproduce the spline space exactly (cubics and
    ``cos(xi x)``, ``sin(xi x)``), so ``2 alpha1 + 2 beta1 + gamma1`` equals
    ``1 + theta**2 / 12 + O(theta**4)`` rather than one when ``theta > 0``.
    """
    theta = _check_theta(theta)
    w = _weights(theta, branch)
    return ConsistencyCoefficients(
        alpha1=w["alpha1"],
        beta1=w["beta1"],
        gamma1=w["gamma1"],
        omega0=w["omega0"],
        omega1=w["omega1"],
        omega2=w["beta1"],
        omega3=w["omega3"],
        source=CoefficientSource.FROM_THETA,
        theta=theta,
    )


def optimal_consistency_coefficients() -> ConsistencyCoefficients:
    """Fixed weights that cancel the leading truncation terms.

    Interior rows are then exact through ``h**8`` (residual ``O(h**10)``) and
    the end rows through ``h**7`` (residual ``O(h**8)``).
    """
    q = OPTIMAL_RATIONAL
    return ConsistencyCoefficients(
        alpha1=float(q["alpha1"]),
        beta1=float(q["beta1"]),
        gamma1=float(q["gamma1"]),
        omega0=float(q["omega0"]),
        omega1=float(q["omega1"]),
        omega2=float(q["omega2"]),
        omega3=float(q["omega3"]),
        source=CoefficientSource.OPTIMAL,
    )


def second_derivative_weights(theta: float) -> tuple[float, float]:
    """Weights ``(side, centre)`` of the nodal second-derivative relation.

    ``M_i = (S_{i-1} - 2 S_i + S_{i+1}) / h**2
    + h**2 (side (F_{i-1} + F_{i+1}) + centre F_i)``.
    """
    theta = _check_theta(theta)
    w = _weights(theta)
    return -w["alpha1"], w["m_center"]


def segment_coefficients(
    node_data: SplineNodeData, theta: float, x0: float = 0.0
) -> SplineSegmentCoefficients:
    """Segment coefficients from nodal ``S``, ``M`` and ``F``.

    For ``theta > 0`` the segment on ``[x_i, x_{i+1}]`` is
    ``a cos(xi z) + b sin(xi z) + c z**3 + d z**2 + e z + f`` with
    ``z = x - x_i``.  The individual coefficients grow like ``theta**-4``
    as ``theta -> 0`` and cancel each other, so evaluation uses an
    equivalent form in which the cubic Taylor part of the trigonometric pair
    is folded into the polynomial (stored in ``shifted``).
    """
    theta = _check_theta(theta)
    S, M, F, h = node_data.S, node_data.M, node_data.F, node_data.h
    Si, Sj = S[:-1], S[1:]
    Mi, Mj = M[:-1], M[1:]
    Fi, Fj = F[:-1], F[1:]

    if theta > 0.0:
        t2, t4 = theta**2, theta**4
        h2, h3, h4 = h**2, h**3, h**4
        a = h4 / t4 * Fi
        b = h4 / (t4 * math.sin(theta)) * (Fj - Fi * math.cos(theta))
        c = (Mj - Mi) / (6.0 * h) + h / (6.0 * t2) * (Fj - Fi)
        d = 0.5 * Mi + h2 / (2.0 * t2) * Fi
        e = (
            (Sj - Si) / h
            + (h3 / t4 - h3 / (3.0 * t2)) * Fi
            - (h3 / t4 + h3 / (6.0 * t2)) * Fj
            - h / 6.0 * (Mj + 2.0 * Mi)
        )
        f = Si - a
        w = _weights(theta)
        shifted = np.stack(
            [
                Si.copy(),
                (Sj - Si) / h - h / 6.0 * (Mj + 2.0 * Mi) + h3 * (w["ei"] * Fi + w["ej"] * Fj),
                0.5 * Mi,
                (Mj - Mi) / (6.0 * h) + h * (w["ci"] * Fi + w["cj"] * Fj),
            ]
        )
    else:
        a = Fi / 24.0
        b = (Fj - Fi) / (120.0 * h)
        c = (Mj - Mi) / (6.0 * h) - h * (2.0 * Fi + Fj) / 36.0
        d = 0.5 * Mi
        e = (Sj - Si) / h - d * h - c * h**2 - a * h**3 - b * h**4
        f = Si.copy()
        shifted = np.stack([f, e, d, c])
    shifted.setflags(write=False)
    return SplineSegmentCoefficients(a, b, c, d, e, f, theta=theta, h=h, x0=x0, shifted=shifted)


def _trig_remainder(kind: str, order: int, u: np.ndarray) -> np.ndarray:
    """``order``-th derivative of cos/sin minus its Taylor polynomial of degree ``3 - order``."""
    base = 0 if kind == "cos" else 1  # sin lags cos by one derivative

    def dcoef(j):  # j-th derivative at 0
        return (1.0, 0.0, -1.0, 0.0)[(j - base) % 4]

    keep = 3 - order
    out = np.empty_like(u)
    small = np.abs(u) < 0.5
    if np.any(small):
        us = u[small]
        acc = np.zeros_like(us)
        for m in range(max(keep + 1, 0), 30):
            cm = dcoef(order + m)
            if cm:
                acc = acc + cm * us**m / math.factorial(m)
        out[small] = acc
    if np.any(~small):
        ul = u[~small]
        # the j-th derivative of cos is cos(u + j pi/2), and sin(u) = cos(u - pi/2)
        full = np.cos(ul + (order - base) * math.pi / 2.0)
        poly = np.zeros_like(ul)
        for m in range(0, keep + 1):
            cm = dcoef(order + m)
            if cm:
                poly = poly + cm * ul**m / math.factorial(m)
        out[~small] = full - poly
    return out


def evaluate_spline(
    segments: SplineSegmentCoefficients, x, order: int = 0
):
    """Evaluate the spline, or its derivative of ``order`` 0..4, at ``x``.

    ``x`` may be a scalar or an array.  Segments are closed on the left; the
    right end ``x = L`` belongs to the last segment.
    """
    if order not in (0, 1, 2, 3, 4):
        raise ValueError(f"order must be in 0..4, got {order!r}")
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    rel = xa - segments.x0
    span = segments.length
    tol = 1e-12 * span
    if np.any(rel < -tol) or np.any(rel > span + tol):
        raise DomainError("x outside the spline domain")
    h = segments.h
    idx = np.clip(np.floor(rel / h).astype(int), 0, segments.n - 1)
    z = rel - idx * h
    shifted = segments.shifted
    if shifted is None:
        shifted = segment_coefficients_shift(segments)
    poly_coef = [shifted[k][idx] for k in range(4)]

    if segments.theta > 0.0:
        xi = segments.xi
        u = xi * z
        trig = xi**order * (
            segments.a[idx] * _trig_remainder("cos", order, u)
            + segments.b[idx] * _trig_remainder("sin", order, u)
        )
    else:
        trig = 0.0
        poly_coef += [segments.a[idx], segments.b[idx]]

    poly = np.zeros_like(z)
    for k, ck in enumerate(poly_coef):
        if k < order:
            continue
        fall = math.perm(k, order)
        poly = poly + fall * ck * z ** (k - order)
    out = trig + poly
    return float(out[0]) if scalar else out


def segment_coefficients_shift(seg: SplineSegmentCoefficients) -> np.ndarray:
    """Shifted cubic ``(f, e, d, c)`` recomputed from plain coefficients."""
    if seg.theta == 0.0:
        return np.stack([seg.f, seg.e, seg.d, seg.c])
    xi = seg.xi
    return np.stack(
        [seg.f + seg.a, seg.e + seg.b * xi, seg.d - seg.a * xi**2 / 2, seg.c - seg.b * xi**3 / 6]
    )


def second_derivatives_from_relation(
    S, F, h: float, theta: float, M0: float = 0.0, Mn: float = 0.0
) -> np.ndarray:
    """Interior nodal second derivatives implied by ``S`` and ``F``.

    The endpoint values are taken from boundary data.  The relation is
    fourth-order accurate for smooth data.
    """
    S = np.asarray(S, dtype=float)
    F = np.asarray(F, dtype=float)
    if S.shape != F.shape or S.ndim != 1:
        raise ValueError("S and F must be 1-d arrays of equal length")
    if S.size < 4:
        raise ValueError("need at least 4 nodes")
    side, centre = second_derivative_weights(theta)
    M = np.empty_like(S)
    M[1:-1] = (S[:-2] - 2.0 * S[1:-1] + S[2:]) / h**2 + h**2 * (
        side * (F[:-2] + F[2:]) + centre * F[1:-1]
    )
    M[0] = M0
    M[-1] = Mn
    return M


def relation_residual(y, y4, coeffs: ConsistencyCoefficients, mesh: Mesh, M0=0.0, Mn=0.0):
    """Local truncation residuals ``t_1..t_{n-1}`` of the stencil relations.

    ``y`` and ``y4`` are samples of a function and its fourth derivative at
    the ``n + 1`` knots.  Rows 1 and ``n - 1`` are the end conditions, the
    rest the interior relation, each written as left side minus right side.

    Only elementwise arithmetic is used, so object arrays of extended
    precision numbers (e.g. ``mpmath.mpf``) pass through unchanged.
    """
    n = mesh.n
    if len(y) != n + 1 or len(y4) != n + 1:
        raise ValueError(f"expected {n + 1} samples")
    h = mesh.h
    dtype = object if np.asarray(y).dtype == object else float
    y = np.asarray(y, dtype=dtype)
    y4 = np.asarray(y4, dtype=dtype)
    h2, h4 = h * h, h * h * h * h
    a1, b1, g1 = coeffs.alpha1, coeffs.beta1, coeffs.gamma1
    w0, w1, w2, w3 = coeffs.omega

    t = np.empty(n - 1, dtype=y.dtype)
    t[0] = (
        -2 * y[0] + 5 * y[1] - 4 * y[2] + y[3]
        + h2 * M0
        - h4 * (w0 * y4[0] + w1 * y4[1] + w2 * y4[2] + w3 * y4[3])
    )
    i = np.arange(2, n - 1)
    t[1:-1] = (
        y[i - 2] - 4 * y[i - 1] + 6 * y[i] - 4 * y[i + 1] + y[i + 2]
        - h4 * (
            a1 * y4[i - 2] + b1 * y4[i - 1] + g1 * y4[i]
            + b1 * y4[i + 1] + a1 * y4[i + 2]
        )
    )
    t[-1] = (
        y[n - 3] - 4 * y[n - 2] + 5 * y[n - 1] - 2 * y[n]
        + h2 * Mn
        - h4 * (w3 * y4[n - 3] + w2 * y4[n - 2] + w1 * y4[n - 1] + w0 * y4[n])
    )
    return t
