"""Dense and banded linear algebra used by the operator builders and steppers.

Dense matrices are plain float64/complex128 ndarrays of shape (n, m).
Banded matrices use the LAPACK band layout (`scipy.linalg.solve_banded`):
diagonal number ``u - i + j`` of the matrix lands in row ``i`` of the band
array. All solvers are direct with partial pivoting; the operator assemblies
downstream combine boundary rows that break diagonal dominance, so pivoting
is not optional.

Every solve satisfies the residual contract
``||a x - b||_inf <= 1e-10 (||a||_inf ||x||_inf + ||b||_inf)``
for well-conditioned inputs; `residual_inf` computes the left-hand side so
callers can assert it per call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class LinearSolveError(Exception):
    """Singular or numerically singular system encountered in a direct solve."""


@dataclass(frozen=True)
class BandedMatrix:
    """Square banded matrix in LAPACK band storage.

    ``bands`` has shape (lower + upper + 1, size); entry (i, j) of the dense
    matrix sits at ``bands[upper + i - j, j]`` for ``-lower <= j - i <= upper``.
    Out-of-band entries are implicitly zero.
    """

    size: int
    lower: int
    upper: int
    bands: np.ndarray

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("size must be >= 1")
        if not (0 <= self.lower < self.size and 0 <= self.upper < self.size):
            raise ValueError("bandwidths must be < size")
        if self.bands.shape != (self.lower + self.upper + 1, self.size):
            raise ValueError("band array shape mismatch")

    @classmethod
    def from_dense(cls, a: np.ndarray, lower: int, upper: int) -> "BandedMatrix":
        n = a.shape[0]
        if a.shape != (n, n):
            raise ValueError("matrix must be square")
        bands = np.zeros((lower + upper + 1, n), dtype=a.dtype)
        for d in range(-lower, upper + 1):
            diag = np.diagonal(a, d)
            if d >= 0:
                bands[upper - d, d:d + len(diag)] = diag
            else:
                bands[upper - d, : len(diag)] = diag
        return cls(n, lower, upper, bands)

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.size, self.size), dtype=self.bands.dtype)
        for d in range(-self.lower, self.upper + 1):
            m = self.size - abs(d)
            vals = self.bands[self.upper - d, max(d, 0):max(d, 0) + m]
            a += np.diag(vals, d)
        return a


def tridiagonal(lo, diag, up) -> BandedMatrix:
    """Banded matrix with constant or per-row sub/main/super diagonals."""
    n = len(diag)
    bands = np.zeros((3, n))
    bands[0, 1:] = np.asarray(up)[: n - 1] if np.ndim(up) else up
    bands[1, :] = diag
    bands[2, :-1] = np.asarray(lo)[1:] if np.ndim(lo) else lo
    return BandedMatrix(n, 1, 1, bands)


def solve_banded(a: BandedMatrix, b: np.ndarray) -> np.ndarray:
    """Solve a x = b for one or many right-hand sides.

    Raises LinearSolveError on a singular or near-singular pivot, which in
    this code base signals an ill-posed stencil assembly.
    """
    b = np.asarray(b, dtype=float)
    if b.shape[0] != a.size:
        raise ValueError("rhs row count must equal matrix size")
    try:
        x = scipy.linalg.solve_banded((a.lower, a.upper), a.bands, b)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise LinearSolveError(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise LinearSolveError("non-finite solution (singular banded system)")
    return x


def solve_dense(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """LU solve with partial pivoting; b may hold multiple right-hand sides.

    Inverse-times-matrix is one call: solve_dense(a, m) == a^{-1} m.
    """
    a = np.asarray(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    b = np.asarray(b)
    if b.shape[0] != n:
        raise ValueError("rhs row count must equal matrix size")
    try:
        x = scipy.linalg.solve(a, b)
    except scipy.linalg.LinAlgError as exc:
        raise LinearSolveError(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise LinearSolveError("non-finite solution (singular dense system)")
    return x


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-1] != b.shape[0]:
        raise ValueError(f"inner dimensions disagree: {a.shape} @ {b.shape}")
    return a @ b


def residual_inf(a, x, b) -> float:
    """||a x - b||_inf, for asserting the solve contract."""
    a = np.asarray(a)
    if isinstance(a, np.ndarray) and a.ndim == 2:
        r = a @ x - b
    else:
        raise ValueError("dense matrix expected")
    return float(np.max(np.abs(r)))


def residual_bound(a, x, b, tol: float = 1e-10) -> float:
    """Right-hand side of the residual contract for given operands."""
    na = float(np.max(np.sum(np.abs(a), axis=1)))
    nx = float(np.max(np.abs(x)))
    nb = float(np.max(np.abs(b)))
    return tol * (na * nx + nb)
