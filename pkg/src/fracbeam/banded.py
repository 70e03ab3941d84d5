"""Pentadiagonal matrices: storage, band LU with partial pivoting, solves.

Storage is one length-``m`` array per diagonal.  ``bands[k, i]`` holds the
entry ``A[i, i + k - 2]`` for offsets ``-2..2``; entries that would fall
outside the matrix are kept at zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import SingularMatrixError

__all__ = [
    "PentadiagonalMatrix",
    "BandFactorization",
    "band_lu",
    "band_solve",
    "band_matvec",
]

PIVOT_TINY = 1e-300

# Row window used during factorization: columns i-2 .. i+4 of row i.
_LO = 2
_WIDTH = 7


@dataclass(frozen=True)
class PentadiagonalMatrix:
    bands: np.ndarray

    def __post_init__(self):
        bands = np.array(self.bands, dtype=float)
        if bands.ndim != 2 or bands.shape[0] != 5:
            raise ValueError("bands must have shape (5, m)")
        m = bands.shape[1]
        if m < 3:
            raise ValueError(f"dimension must be >= 3, got {m}")
        for k in range(5):
            off = k - 2
            if off < 0:
                bands[k, : -off] = 0.0
            elif off > 0:
                bands[k, m - off :] = 0.0
        bands.setflags(write=False)
        object.__setattr__(self, "bands", bands)

    @property
    def dim(self) -> int:
        return self.bands.shape[1]

    @classmethod
    def from_diagonals(cls, sub2, sub1, diag, sup1, sup2) -> "PentadiagonalMatrix":
        """Build from diagonals given as length ``m - |offset|`` arrays."""
        diag = np.asarray(diag, dtype=float)
        m = diag.size
        bands = np.zeros((5, m))
        bands[0, 2:] = sub2
        bands[1, 1:] = sub1
        bands[2, :] = diag
        bands[3, :-1] = sup1
        bands[4, :-2] = sup2
        return cls(bands)

    @classmethod
    def from_stencil(cls, stencil, m: int) -> "PentadiagonalMatrix":
        """Toeplitz matrix with the same five entries on every row."""
        bands = np.tile(np.asarray(stencil, dtype=float)[:, None], (1, m))
        return cls(bands)

    @classmethod
    def from_dense(cls, A) -> "PentadiagonalMatrix":
        A = np.asarray(A, dtype=float)
        m = A.shape[0]
        bands = np.zeros((5, m))
        for k in range(5):
            off = k - 2
            i = np.arange(max(0, -off), min(m, m - off))
            bands[k, i] = A[i, i + off]
        return cls(bands)

    def to_dense(self) -> np.ndarray:
        m = self.dim
        A = np.zeros((m, m))
        for k in range(5):
            off = k - 2
            i = np.arange(max(0, -off), min(m, m - off))
            A[i, i + off] = self.bands[k, i]
        return A


@dataclass(frozen=True)
class BandFactorization:
    """``P A = L U`` with two multipliers per column and ``U`` of bandwidth 4.

    ``upper[k, j]`` is ``U[k, k + j]`` for ``j = 0..4``; ``lower[k, j]`` is
    the multiplier applied to row ``k + 1 + j`` at elimination step ``k``;
    ``pivots[k]`` is the row swapped with row ``k`` before that step.
    """

    upper: np.ndarray
    lower: np.ndarray
    pivots: np.ndarray

    @property
    def dim(self) -> int:
        return self.upper.shape[0]


def band_lu(mat: PentadiagonalMatrix) -> BandFactorization:
    """Factorize with partial pivoting restricted to the band."""
    m = mat.dim
    W = np.zeros((m, _WIDTH))
    for k in range(5):
        W[:, k] = mat.bands[k]

    lower = np.zeros((m, 2))
    pivots = np.arange(m)
    for k in range(m):
        last = min(k + 2, m - 1)
        # column k sits at window index k - i + _LO in row i
        cand = [abs(W[i, k - i + _LO]) for i in range(k, last + 1)]
        r = k + int(np.argmax(cand))
        if cand[r - k] < PIVOT_TINY:
            raise SingularMatrixError(f"zero pivot in column {k}")
        cols = range(k, min(k + 4, m - 1) + 1)
        if r != k:
            for c in cols:
                ik, ir = c - k + _LO, c - r + _LO
                W[k, ik], W[r, ir] = W[r, ir], W[k, ik]
        pivots[k] = r
        piv = W[k, _LO]
        for i in range(k + 1, last + 1):
            l = W[i, k - i + _LO] / piv
            lower[k, i - k - 1] = l
            W[i, k - i + _LO] = 0.0
            if l != 0.0:
                for c in cols[1:]:
                    W[i, c - i + _LO] -= l * W[k, c - k + _LO]
    upper = W[:, _LO:].copy()
    for a in (upper, lower, pivots):
        a.setflags(write=False)
    return BandFactorization(upper=upper, lower=lower, pivots=pivots)


def band_solve(fac: BandFactorization, rhs) -> np.ndarray:
    """Solve ``A x = rhs`` from a factorization; ``rhs`` may be ``(m,)`` or ``(m, k)``."""
    x = np.array(rhs, dtype=float)
    m = fac.dim
    if x.shape[0] != m:
        raise ValueError(f"rhs has length {x.shape[0]}, expected {m}")
    U, L, P = fac.upper, fac.lower, fac.pivots
    for k in range(m):
        r = P[k]
        if r != k:
            x[[k, r]] = x[[r, k]]
        for j in range(min(2, m - 1 - k)):
            x[k + 1 + j] -= L[k, j] * x[k]
    for k in range(m - 1, -1, -1):
        acc = x[k]
        for j in range(1, min(5, m - k)):
            acc = acc - U[k, j] * x[k + j]
        x[k] = acc / U[k, 0]
    return x


def band_matvec(mat: PentadiagonalMatrix, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    m = mat.dim
    if x.shape[0] != m:
        raise ValueError(f"vector has length {x.shape[0]}, expected {m}")
    B = mat.bands
    y = B[2] * x
    y[1:] += B[1, 1:] * x[:-1]
    y[2:] += B[0, 2:] * x[:-2]
    y[:-1] += B[3, :-1] * x[1:]
    y[:-2] += B[4, :-2] * x[2:]
    return y
