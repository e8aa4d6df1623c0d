"""Proportional-redistribution games and their closed-form payoffs.

A weight vector alpha with positive entries summing to at most one
defines the matrix

    Dhat = diag(alpha) - alpha alpha^T,

which is a K-matrix when sum(alpha) < 1 and a singular almost-P Z-matrix
when sum(alpha) = 1 (det Dhat = (1 - sum(alpha)) * prod(alpha)). Games
built on Dhat redistribute exercise gains proportionally: when the set E
exercises, each remaining player k loses the share

    w_k(E) = alpha_k / (1 - sum_{i in E} alpha_i)

of the total exercised surplus. That closed form is implemented here
directly from the weights, independent of the generic linear-solve payoff
path, so the two can be checked against each other.

For sum(alpha) < 1 the inverse D = Dhat^{-1} = diag(1/alpha) + J/(1-s)
(J all ones, s = sum(alpha)) induces the inner product

    <x, y> = sum_i x_i y_i / alpha_i + (sum x)(sum y) / (1 - s),

under which the payoff map becomes an orthogonal projection.
"""

from __future__ import annotations

from typing import Iterable, Union

import numpy as np

from .errors import DomainError
from .matrices import DEFAULT_TOL, SquareMatrix
from .single_period import GameSpec, StrategyProfile

__all__ = [
    "InvalidAlpha",
    "WeightSingular",
    "check_alpha",
    "dhat_matrix",
    "dhat_det",
    "d_matrix",
    "d_inner_product",
    "exercise_weight",
    "grg_payoff",
    "grg_game",
]


class InvalidAlpha(DomainError):
    """Weights must be strictly positive and sum to at most one."""


class WeightSingular(DomainError):
    """A redistribution weight divides by 1 - sum(alpha_E) = 0."""


def check_alpha(alpha: Iterable[float], tol: float = DEFAULT_TOL) -> np.ndarray:
    a = np.asarray(list(alpha), dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise InvalidAlpha("alpha must be a nonempty vector")
    if not np.all(np.isfinite(a)):
        raise InvalidAlpha("alpha entries must be finite")
    if np.any(a <= tol):
        raise InvalidAlpha("alpha entries must be strictly positive")
    if float(np.sum(a)) > 1.0 + tol:
        raise InvalidAlpha("alpha entries must sum to at most one")
    return a


def dhat_matrix(alpha: Iterable[float], tol: float = DEFAULT_TOL) -> SquareMatrix:
    """diag(alpha) - alpha alpha^T."""
    a = check_alpha(alpha, tol)
    return SquareMatrix(np.diag(a) - np.outer(a, a))


def dhat_det(alpha: Iterable[float], tol: float = DEFAULT_TOL) -> float:
    """Closed-form determinant (1 - sum(alpha)) * prod(alpha)."""
    a = check_alpha(alpha, tol)
    return float((1.0 - np.sum(a)) * np.prod(a))


def d_matrix(alpha: Iterable[float], tol: float = DEFAULT_TOL) -> SquareMatrix:
    """The inverse of dhat_matrix, defined only for sum(alpha) < 1."""
    a = check_alpha(alpha, tol)
    rest = 1.0 - float(np.sum(a))
    if rest <= tol:
        raise WeightSingular("Dhat is singular at sum(alpha) = 1")
    return SquareMatrix(np.diag(1.0 / a) + np.ones((a.size, a.size)) / rest)


def d_inner_product(
    x: Iterable[float],
    y: Iterable[float],
    alpha: Iterable[float],
    tol: float = DEFAULT_TOL,
) -> float:
    """x^T D y evaluated from the weights without forming D."""
    a = check_alpha(alpha, tol)
    xv = np.asarray(list(x), dtype=float)
    yv = np.asarray(list(y), dtype=float)
    if xv.shape != a.shape or yv.shape != a.shape:
        raise ValueError("x and y must match alpha in length")
    rest = 1.0 - float(np.sum(a))
    if rest <= tol:
        raise WeightSingular("the inner product needs sum(alpha) < 1")
    return float(np.sum(xv * yv / a) + np.sum(xv) * np.sum(yv) / rest)


def exercise_weight(
    alpha: Iterable[float],
    E: Iterable[int],
    k: int,
    tol: float = DEFAULT_TOL,
) -> float:
    """Share w_k(E) of the exercised surplus charged to player k.

    Defined for k outside E; the charge divides by 1 - sum(alpha_E).
    """
    a = check_alpha(alpha, tol)
    idx = sorted(set(int(i) for i in E))
    if any(i < 0 or i >= a.size for i in idx):
        raise ValueError("exercise set indices out of range")
    if not 0 <= k < a.size:
        raise ValueError("player index out of range")
    if k in idx:
        raise ValueError("weights apply to players outside the exercise set")
    rest = 1.0 - float(np.sum(a[idx])) if idx else 1.0
    if rest <= tol:
        raise WeightSingular(f"exercise set {idx} absorbs the full weight mass")
    return float(a[k]) / rest


def grg_payoff(
    X: Iterable[float],
    P: Iterable[float],
    alpha: Iterable[float],
    s: Union[StrategyProfile, Iterable[int]],
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Closed-form payoffs of the redistribution game at one profile.

    Exercising players take X; each other player k gives up w_k(E) times
    the total exercised surplus sum_{i in E}(X_i - P_i) relative to P.
    """
    a = check_alpha(alpha, tol)
    Xv = np.asarray(list(X), dtype=float)
    Pv = np.asarray(list(P), dtype=float)
    if Xv.shape != a.shape or Pv.shape != a.shape:
        raise ValueError("X and P must match alpha in length")
    profile = s if isinstance(s, StrategyProfile) else StrategyProfile(tuple(s))
    if len(profile.s) != a.size:
        raise ValueError("profile length must match alpha")
    E = list(profile.exercising)
    V = Pv.copy()
    if not E:
        return V
    surplus = float(np.sum((Xv - Pv)[E]))
    others = [k for k in range(a.size) if k not in E]
    for k in others:
        V[k] = Pv[k] - exercise_weight(a, E, k, tol) * surplus
    V[E] = Xv[E]
    return V


def grg_game(
    X: Iterable[float],
    P: Iterable[float],
    alpha: Iterable[float],
    tol: float = DEFAULT_TOL,
) -> GameSpec:
    """The same game expressed through its matrix, for the generic solvers."""
    a = check_alpha(alpha, tol)
    Xv = np.asarray(list(X), dtype=float)
    Pv = np.asarray(list(P), dtype=float)
    if Xv.shape != a.shape or Pv.shape != a.shape:
        raise ValueError("X and P must match alpha in length")
    return GameSpec(X=Xv, P=Pv, G=dhat_matrix(a, tol))
