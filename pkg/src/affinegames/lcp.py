"""Linear complementarity problems: find z >= 0 with w = q + Mz >= 0, z^T w = 0.

Two independent solvers are provided on purpose. solve_enum walks supports
in a canonical order and is the reference oracle at small m; solve_lemke is
the classical complementary pivoting method with a covering vector of ones
and lexicographic degeneracy resolution. For P-matrices both must agree.
The singular-but-almost-P case (P0' matrices) gets a solvability test with
a positive left-null certificate: the problem has a solution exactly when
v^T q >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Union

import numpy as np

from .errors import DimensionTooLarge, DomainError
from .matrices import (
    DEFAULT_TOL,
    ENUM_CAP,
    NullCertificate,
    SquareMatrix,
    _minor_scale,
    classify,
    positive_left_null,
)

__all__ = [
    "LcpProblem",
    "LcpSolution",
    "P0PrimeOutcome",
    "CycleLimit",
    "CertificateUnavailable",
    "solve_enum",
    "solve_lemke",
    "solvability_p0prime",
    "verify_projection_characterization",
    "project_quadratic",
]


class CycleLimit(DomainError):
    """Pivoting exceeded the 10 * 2^m step budget; assumed to be cycling."""


class CertificateUnavailable(DomainError):
    """Singular input whose null space is not one-dimensional positive."""


@dataclass(frozen=True)
class LcpProblem:
    q: np.ndarray
    M: SquareMatrix

    def __post_init__(self) -> None:
        q = np.asarray(self.q, dtype=float)
        if q.ndim != 1 or q.shape[0] != self.M.m:
            raise ValueError(f"q has shape {q.shape}, expected ({self.M.m},)")
        if not np.all(np.isfinite(q)):
            raise ValueError("q must be finite")
        object.__setattr__(self, "q", q)

    @property
    def m(self) -> int:
        return self.M.m


@dataclass(frozen=True)
class LcpSolution:
    z: np.ndarray
    w: np.ndarray
    support: tuple


@dataclass(frozen=True)
class P0PrimeOutcome:
    """Either a solution or a positive null certificate proving none exists."""

    solvable: bool
    solution: Optional[LcpSolution]
    certificate: Optional[NullCertificate]


def _feas_tol(q: np.ndarray, Ma: np.ndarray, tol: float) -> float:
    return tol * max(1.0, float(np.max(np.abs(q))), float(np.max(np.abs(Ma))))


def _finish(z: np.ndarray, w: np.ndarray) -> LcpSolution:
    z = np.where(z < 0.0, 0.0, z)
    w = np.where(w < 0.0, 0.0, w)
    support = tuple(int(i) for i in np.nonzero(z > 0.0)[0])
    return LcpSolution(z=z, w=w, support=support)


def solve_enum(
    problem: LcpProblem, tol: float = DEFAULT_TOL, cap: int = ENUM_CAP
) -> Optional[LcpSolution]:
    """Support enumeration in increasing cardinality, then lexicographic order.

    For each candidate support S with det(M_SS) != 0, solves
    M_SS z_S = -q_S and accepts the first S whose z and off-support w are
    nonnegative at the scaled tolerance. Accepted near-zero negatives are
    clamped to exactly 0. Returns None when no support qualifies.
    """
    q, Ma, m = problem.q, problem.M.entries, problem.m
    if m > cap:
        raise DimensionTooLarge(f"support enumeration is 2^{m} subsets; cap is {cap}")
    tau = _feas_tol(q, Ma, tol)

    if float(np.min(q)) >= -tau:
        return _finish(np.zeros(m), q.copy())
    for k in range(1, m + 1):
        for S in combinations(range(m), k):
            idx = list(S)
            sub = Ma[np.ix_(idx, idx)]
            if abs(float(np.linalg.det(sub))) <= tol * _minor_scale(sub):
                continue
            z_s = np.linalg.solve(sub, -q[idx])
            if float(np.min(z_s)) < -tau:
                continue
            z = np.zeros(m)
            z[idx] = z_s
            w = q + Ma @ z
            off = np.setdiff1d(np.arange(m), idx)
            if off.size and float(np.min(w[off])) < -tau:
                continue
            return _finish(z, w)
    return None


def solve_lemke(
    problem: LcpProblem,
    tol: float = DEFAULT_TOL,
    max_pivots: Optional[int] = None,
) -> Optional[LcpSolution]:
    """Complementary pivoting with covering vector of ones.

    Ties in the minimum-ratio test are resolved lexicographically against
    the columns that started as the identity, which rules out cycling in
    exact arithmetic; a pivot budget of 10 * 2^m guards the floating-point
    version. Returns None on ray termination (no solution found along the
    pivot path).
    """
    q, Ma, m = problem.q, problem.M.entries, problem.m
    tau = _feas_tol(q, Ma, tol)
    if float(np.min(q)) >= -tau:
        return _finish(np.zeros(m), q.copy())
    if max_pivots is None:
        max_pivots = 10 * (2 ** min(m, 40))

    # Columns: w_0..w_{m-1}, z_0..z_{m-1}, z0, rhs. System w - Mz - z0*1 = q.
    T = np.zeros((m, 2 * m + 2))
    T[:, :m] = np.eye(m)
    T[:, m : 2 * m] = -Ma
    T[:, 2 * m] = -1.0
    T[:, 2 * m + 1] = q
    basis = list(range(m))
    z0_col = 2 * m

    def pivot(row: int, col: int) -> None:
        T[row] /= T[row, col]
        for r in range(m):
            if r != row and T[r, col] != 0.0:
                T[r] -= T[r, col] * T[row]
        basis[row] = col

    def ratio_row(col: int) -> Optional[int]:
        d = T[:, col]
        cand = [r for r in range(m) if d[r] > 1e-11]
        if not cand:
            return None
        best = cand[0]
        for r in cand[1:]:
            # lexicographic comparison of (rhs, identity block) / pivot entry
            for j in [2 * m + 1] + list(range(m)):
                a, b = T[r, j] / d[r], T[best, j] / d[best]
                if abs(a - b) > 1e-12 * max(1.0, abs(a), abs(b)):
                    if a < b:
                        best = r
                    break
        return best

    # z0 enters against the most negative rhs, making the basis feasible.
    row = int(np.argmin(T[:, 2 * m + 1]))
    leaving = basis[row]
    pivot(row, z0_col)
    entering = leaving + m  # complement of the departed w variable

    for _ in range(max_pivots):
        row = ratio_row(entering)
        if row is None:
            return None
        leaving = basis[row]
        pivot(row, entering)
        if leaving == z0_col:
            z = np.zeros(m)
            for r, var in enumerate(basis):
                if m <= var < 2 * m:
                    z[var - m] = T[r, 2 * m + 1]
            z = np.where(z < 0.0, 0.0, z)
            return _finish(z, q + Ma @ z)
        entering = leaving + m if leaving < m else leaving - m
    raise CycleLimit(f"no termination within {max_pivots} pivots")


def solvability_p0prime(
    problem: LcpProblem, tol: float = DEFAULT_TOL
) -> P0PrimeOutcome:
    """Solve-or-certify for matrices with nonneg determinant, positive proper minors.

    Nonsingular members are plain P-matrices and always solvable. Singular
    ones are solvable exactly when v^T q >= 0 for the positive left null
    vector v; otherwise v is returned as the unsolvability certificate.
    """
    q, Ma = problem.q, problem.M.entries
    cls = classify(problem.M, tol=tol)
    if not cls.is_P0prime:
        raise ValueError("matrix is outside the P0' class; dichotomy does not apply")
    if cls.is_P:
        sol = solve_enum(problem, tol=tol)
        if sol is None:
            raise ArithmeticError("P-matrix problem unexpectedly failed to solve")
        return P0PrimeOutcome(solvable=True, solution=sol, certificate=None)
    cert = positive_left_null(problem.M, tol=tol)
    if cert is None:
        raise CertificateUnavailable(
            "singular input without a one-dimensional positive left null space"
        )
    vq = float(cert.v @ q)
    tau = tol * max(1.0, float(np.max(np.abs(q))))
    if vq < -tau:
        return P0PrimeOutcome(solvable=False, solution=None, certificate=cert)
    sol = solve_enum(problem, tol=tol)
    if sol is not None:
        return P0PrimeOutcome(solvable=True, solution=sol, certificate=cert)
    if vq <= tau:
        # boundary case lost to roundoff; report honestly as unsolvable
        return P0PrimeOutcome(solvable=False, solution=None, certificate=cert)
    raise ArithmeticError("certificate promises a solution but enumeration found none")


def project_quadratic(
    Q: np.ndarray,
    v: np.ndarray,
    lower: np.ndarray,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Minimize (x - v)^T Q (x - v) / 2 subject to x >= lower, Q SPD.

    Primal active-set iteration: solve the equality-constrained problem on
    the current working set, take the largest feasible step toward it, add
    the blocking bound, and drop the most negative multiplier when the
    stationary point is feasible. Finite for SPD Q.
    """
    Q = np.asarray(Q, dtype=float)
    v = np.asarray(v, dtype=float)
    lower = np.asarray(lower, dtype=float)
    m = v.shape[0]
    x = np.maximum(v, lower)
    active = set(int(i) for i in np.nonzero(v < lower)[0])
    tau = tol * max(1.0, float(np.max(np.abs(v))), float(np.max(np.abs(lower))))
    lam_tau = tol * max(1.0, float(np.max(np.abs(Q)))) * max(
        1.0, float(np.max(np.abs(v - lower)))
    )

    for _ in range(50 * (m + 2)):
        free = [i for i in range(m) if i not in active]
        target = lower.copy()
        if free:
            act = sorted(active)
            rhs = Q[np.ix_(free, free)] @ v[free]
            if act:
                rhs -= Q[np.ix_(free, act)] @ (lower[act] - v[act])
            target[free] = np.linalg.solve(Q[np.ix_(free, free)], rhs)
        step = target - x
        blocking = [i for i in free if step[i] < 0.0 and target[i] < lower[i] - tau]
        if blocking:
            alphas = [(lower[i] - x[i]) / step[i] for i in blocking]
            hit = blocking[int(np.argmin(alphas))]
            alpha = max(0.0, min(alphas))
            x = x + alpha * step
            x[hit] = lower[hit]
            active.add(hit)
            continue
        x = np.maximum(target, lower)
        grad = Q @ (x - v)
        if not active:
            return x
        worst = min(active, key=lambda i: grad[i])
        if grad[worst] >= -lam_tau:
            return x
        active.remove(worst)
    raise ArithmeticError("active-set projection failed to converge")


def _is_spd(Ma: np.ndarray, tol: float) -> bool:
    tau = tol * max(1.0, float(np.max(np.abs(Ma))))
    if float(np.max(np.abs(Ma - Ma.T))) > tau:
        return False
    try:
        np.linalg.cholesky(0.5 * (Ma + Ma.T))
    except np.linalg.LinAlgError:
        return False
    return True


def verify_projection_characterization(
    problem: LcpProblem,
    sol: LcpSolution,
    tol: float = 1e-7,
    samples: int = 32,
    seed: int = 0,
) -> bool:
    """Check a solution against the projection identities.

    (b) z is the Euclidean projection of z - w onto the nonnegative orthant;
    (c) w^T (y - z) >= 0 for sampled y >= 0; and for symmetric positive
    definite M, z and w are the Q-norm projections of -M^{-1} q and q onto
    the orthant (Q = M and Q = M^{-1} respectively), recomputed here with
    the active-set minimizer as an independent oracle.
    """
    q, Ma = problem.q, problem.M.entries
    z, w = sol.z, sol.w
    scale = max(1.0, float(np.max(np.abs(z))), float(np.max(np.abs(w))))
    tau = tol * scale

    if float(np.max(np.abs(z - np.maximum(z - w, 0.0)))) > tau:
        return False

    rng = np.random.default_rng(seed)
    ys = rng.uniform(0.0, 1.0 + 2.0 * float(np.max(np.abs(z))), size=(samples, len(z)))
    ys = np.vstack([ys, np.zeros(len(z))])
    vi_tau = tol * max(1.0, float(np.max(np.abs(w))) * max(1.0, float(np.max(ys))))
    if float(np.min(ys @ w - float(w @ z))) < -vi_tau:
        return False

    if _is_spd(Ma, tol):
        z_hat = project_quadratic(Ma, -np.linalg.solve(Ma, q), np.zeros(len(z)), tol=tol)
        if float(np.max(np.abs(z_hat - z))) > tau:
            return False
        w_hat = project_quadratic(np.linalg.inv(Ma), q, np.zeros(len(z)), tol=tol)
        if float(np.max(np.abs(w_hat - w))) > tau:
            return False
    return True
