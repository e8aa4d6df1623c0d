"""Dense square matrices and their sign-class structure.

The solvers in this package only have guarantees for matrices whose
principal minors behave: P-matrices (all principal minors positive),
Z-matrices (non-positive off-diagonal entries), K = P-and-Z, and the
almost-P class P0' (non-negative determinant, positive proper minors).
This module provides exhaustive minor-based classification, the Schur
pivot reduction used to eliminate a player from a game, positive
left-null-vector certificates for singular P0' matrices, and seeded
random generators for K and P instances.

Minors are computed by LU factorization with partial pivoting
(numpy.linalg.det). A minor counts as positive when it exceeds
tol * scale, and as zero when its magnitude is at most tol * scale,
where scale is the product of the submatrix's largest absolute row
entries; this keeps the test invariant under row scaling.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import DimensionTooLarge, DomainError

__all__ = [
    "DEFAULT_TOL",
    "CLASSIFY_CAP",
    "ENUM_CAP",
    "SquareMatrix",
    "MatrixClass",
    "NullCertificate",
    "ZeroPivot",
    "NotSingular",
    "principal_minor",
    "classify",
    "schur_reduce",
    "positive_left_null",
    "gen_k_matrix",
    "gen_p_matrix",
]

DEFAULT_TOL = 1e-9
CLASSIFY_CAP = 16
ENUM_CAP = 20


class ZeroPivot(DomainError):
    """Schur reduction requested on a (near-)zero diagonal entry."""


class NotSingular(DomainError):
    """A null-space certificate was requested for a nonsingular matrix."""


@dataclass(frozen=True)
class SquareMatrix:
    """An m-by-m array of finite float64 entries, row-major."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"expected a square 2-d array, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "entries", a)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_rows(cls, rows: Union[Sequence[Sequence[float]], np.ndarray]) -> "SquareMatrix":
        return cls(np.asarray(rows, dtype=float))

    def __repr__(self) -> str:  # keeps test failure output readable
        return f"SquareMatrix({self.entries.tolist()!r})"


@dataclass(frozen=True)
class MatrixClass:
    """Classification flags derived from one exhaustive minor sweep."""

    is_Z: bool
    is_P: bool
    is_P0prime: bool
    is_K: bool
    is_K0prime: bool
    has_positive_diagonal: bool
    has_nonzero_proper_minors: bool
    column_sums_nonneg: bool


@dataclass(frozen=True)
class NullCertificate:
    """A strictly positive row vector v with v^T M = 0, scaled to max 1."""

    v: np.ndarray


def _as_array(M: Union[SquareMatrix, np.ndarray]) -> np.ndarray:
    if isinstance(M, SquareMatrix):
        return M.entries
    return SquareMatrix.from_rows(M).entries


def _minor_scale(sub: np.ndarray) -> float:
    """Product of the largest absolute entries of each row of a submatrix."""
    return float(np.prod(np.max(np.abs(sub), axis=1)))


def _minor_sign(sub: np.ndarray, tol: float) -> int:
    """-1, 0, or +1 for the determinant of sub at the scaled tolerance."""
    det = float(np.linalg.det(sub))
    bound = tol * _minor_scale(sub)
    if det > bound:
        return 1
    if abs(det) <= bound:
        return 0
    return -1


def entry_tolerance(M: Union[SquareMatrix, np.ndarray], tol: float = DEFAULT_TOL) -> float:
    """Absolute tolerance for entrywise comparisons, scaled by magnitude."""
    a = _as_array(M)
    return tol * max(1.0, float(np.max(np.abs(a))))


def principal_minor(M: Union[SquareMatrix, np.ndarray], S: Iterable[int]) -> float:
    """det(M_SS) for a nonempty index set S (0-based)."""
    a = _as_array(M)
    idx = sorted(set(int(i) for i in S))
    if not idx:
        raise ValueError("index set must be nonempty")
    if idx[0] < 0 or idx[-1] >= a.shape[0]:
        raise ValueError(f"index set {idx} out of range for m={a.shape[0]}")
    return float(np.linalg.det(a[np.ix_(idx, idx)]))


def classify(
    M: Union[SquareMatrix, np.ndarray],
    tol: float = DEFAULT_TOL,
    cap: int = CLASSIFY_CAP,
) -> MatrixClass:
    """Exhaustively classify M by the signs of all 2^m - 1 principal minors."""
    a = _as_array(M)
    m = a.shape[0]
    if m > cap:
        raise DimensionTooLarge(f"classification sweeps 2^{m} minors; cap is {cap}")

    all_positive = True
    proper_positive = True
    proper_nonzero = True
    det_sign = -1
    for k in range(1, m + 1):
        for S in combinations(range(m), k):
            sign = _minor_sign(a[np.ix_(S, S)], tol)
            if k == m:
                det_sign = sign
            else:
                if sign <= 0:
                    proper_positive = False
                if sign == 0:
                    proper_nonzero = False
            if sign <= 0:
                all_positive = False

    tau = entry_tolerance(a, tol)
    off = a - np.diag(np.diag(a))
    is_z = bool(np.all(off <= tau))
    is_p = all_positive
    is_p0prime = proper_positive and det_sign >= 0
    return MatrixClass(
        is_Z=is_z,
        is_P=is_p,
        is_P0prime=is_p0prime,
        is_K=is_p and is_z,
        is_K0prime=is_p0prime and is_z,
        has_positive_diagonal=bool(np.all(np.diag(a) > tau)),
        has_nonzero_proper_minors=proper_nonzero,
        column_sums_nonneg=bool(np.all(a.sum(axis=0) >= -tau)),
    )


def schur_reduce(
    M: Union[SquareMatrix, np.ndarray], i: int, tol: float = DEFAULT_TOL
) -> SquareMatrix:
    """Eliminate row/column i by one pivot step: out_jk = M_jk - M_ji M_ik / M_ii.

    This is the matrix of the game that remains after player i exercises;
    the surviving indices keep their relative order.
    """
    a = _as_array(M)
    m = a.shape[0]
    if not 0 <= i < m:
        raise ValueError(f"pivot index {i} out of range for m={m}")
    pivot = a[i, i]
    if abs(pivot) <= entry_tolerance(a, tol):
        raise ZeroPivot(f"diagonal entry {i} is {pivot!r}, too close to zero to pivot")
    keep = [j for j in range(m) if j != i]
    sub = a[np.ix_(keep, keep)]
    reduced = sub - np.outer(a[keep, i], a[i, keep]) / pivot
    return SquareMatrix(reduced)


def positive_left_null(
    M: Union[SquareMatrix, np.ndarray], tol: float = DEFAULT_TOL
) -> Optional[NullCertificate]:
    """A strictly positive v with v^T M = 0, for singular M.

    Uses the SVD: left null vectors of M are the columns of U whose
    singular values vanish. Only a one-dimensional null space is searched
    (the basis vector or its negation); anything else returns None. Raises
    NotSingular when the determinant is clearly nonzero at the scaled
    tolerance.
    """
    a = _as_array(M)
    if _minor_sign(a, tol) != 0:
        raise NotSingular("matrix determinant exceeds tolerance; no null certificate")
    u, s, _ = np.linalg.svd(a)
    null_cols = np.nonzero(s <= tol * max(s[0], 1e-300))[0]
    if len(null_cols) != 1:
        return None
    v = u[:, null_cols[0]]
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    v = v / np.max(np.abs(v))
    if np.min(v) <= tol:
        return None
    residual = float(np.max(np.abs(v @ a)))
    if residual > tol * max(1.0, float(np.max(np.abs(a)))):
        return None
    return NullCertificate(v=v)


def gen_k_matrix(
    seed: int, m: int, require_nonneg_colsums: bool = False
) -> SquareMatrix:
    """Seeded random K-matrix: unit diagonal, off-diagonals uniform in [-c, 0].

    c is chosen below 1/(m-1) so columns are strictly diagonally dominant,
    a sufficient condition for K membership; that also makes every column
    sum positive, so the nonneg-colsums rescale loop is a defensive no-op.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.default_rng(seed)
    a = np.eye(m)
    if m > 1:
        c = 0.95 / (m - 1)
        off = rng.uniform(-c, 0.0, size=(m, m))
        np.fill_diagonal(off, 0.0)
        a = a + off
        if require_nonneg_colsums:
            while np.min(a.sum(axis=0)) < 0.0:
                off *= 0.9
                a = np.eye(m) + off
    return SquareMatrix(a)


def gen_p_matrix(seed: int, m: int) -> SquareMatrix:
    """Seeded random symmetric positive definite matrix, A^T A + 0.1 I."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, size=(m, m))
    return SquareMatrix(a.T @ a + 0.1 * np.eye(m))
