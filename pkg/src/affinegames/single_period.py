"""Single-period exercise games with affine payoff redistribution.

Each of m players either exercises (s_i = 0) or stays in (s_i = 1). A
player who exercises locks in the exercise payoff X_i; the remaining
players' payoffs move away from the terminal payoff P along the columns
of G that belong to the exercising set E(s):

    V_i(s) = X_i                                     for i in E(s),
    V_i(s) = P_i + G_iE (G_EE)^{-1} (X_E - P_E)      otherwise.

When G has all principal minors positive (P-matrix) or is singular but
almost-P (P0'), every Nash equilibrium attains the same payoff vector,
computed here through the LCP with data (P - X, G). K-matrices (P and Z)
additionally make the game weakly unilaterally competitive, so Nash
equilibria are optimal and per-player values exist. The brute-force
verifiers in this module check all of that by exhaustive enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

import numpy as np

from .errors import DimensionTooLarge, DomainError
from .lcp import LcpProblem, project_quadratic, solvability_p0prime, solve_enum
from .matrices import (
    DEFAULT_TOL,
    ENUM_CAP,
    SquareMatrix,
    _minor_scale,
    classify,
    entry_tolerance,
)

__all__ = [
    "GameSpec",
    "StrategyProfile",
    "PayoffOutcome",
    "EquilibriumReport",
    "SingularSubmatrix",
    "NotCovered",
    "ColumnSumNegative",
    "NotSymmetricPD",
    "payoff",
    "enumerate_nash",
    "sol",
    "canonical_equilibrium",
    "is_optimal_equilibrium",
    "wuc_check",
    "value",
    "coalition_value",
    "dummy_extension",
    "projection_sol",
    "equilibrium_report",
]

BRUTE_FORCE_CAP = 12


class SingularSubmatrix(DomainError):
    """An exercised submatrix G_EE is singular; payoffs are undefined there."""


class NotCovered(DomainError):
    """G is outside the classes for which unique Nash payoffs are guaranteed."""


class ColumnSumNegative(DomainError):
    """The dummy-player extension needs all column sums of G nonnegative."""


class NotSymmetricPD(DomainError):
    """Projection form of the solution needs a symmetric positive definite G."""


@dataclass(frozen=True)
class GameSpec:
    """One game instance: exercise payoffs X, terminal payoffs P, matrix G.

    non_exercising lists players whose exercise action is removed from the
    game (used by the dummy extension); their diagonal entries are exempt
    from the positivity requirement because no exercised set contains them.
    """

    X: np.ndarray
    P: np.ndarray
    G: SquareMatrix
    non_exercising: FrozenSet[int] = frozenset()

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=float)
        P = np.asarray(self.P, dtype=float)
        m = self.G.m
        if X.shape != (m,) or P.shape != (m,):
            raise ValueError(f"X and P must have shape ({m},)")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(P))):
            raise ValueError("payoff vectors must be finite")
        frozen = frozenset(int(i) for i in self.non_exercising)
        if any(i < 0 or i >= m for i in frozen):
            raise ValueError("non_exercising indices out of range")
        tau = entry_tolerance(self.G)
        diag = np.diag(self.G.entries)
        for i in range(m):
            if i not in frozen and diag[i] <= tau:
                raise ValueError(f"diagonal entry {i} of G must be positive")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "non_exercising", frozen)

    @property
    def m(self) -> int:
        return self.G.m

    @property
    def exercisable(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.m) if i not in self.non_exercising)


@dataclass(frozen=True)
class StrategyProfile:
    """The exercise vector: s_i = 0 means player i exercises."""

    s: Tuple[int, ...]

    def __post_init__(self) -> None:
        s = tuple(int(b) for b in self.s)
        if any(b not in (0, 1) for b in s):
            raise ValueError("profile entries must be 0 (exercise) or 1 (stay)")
        object.__setattr__(self, "s", s)

    @property
    def exercising(self) -> Tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.s) if b == 0)


@dataclass(frozen=True)
class PayoffOutcome:
    """Payoffs V with V = P + G a, a supported on the exercising set.

    a is None only when everyone exercises and G is singular, where V = X
    holds directly and no coefficient vector is needed.
    """

    V: np.ndarray
    a: Optional[np.ndarray]


@dataclass(frozen=True)
class EquilibriumReport:
    nash_profiles: List[StrategyProfile]
    nash_payoff: Optional[np.ndarray]
    optimal_profiles: List[StrategyProfile]
    value: Optional[np.ndarray]
    wuc: Optional[bool]


def _as_profile(s: Union[StrategyProfile, Iterable[int]]) -> StrategyProfile:
    if isinstance(s, StrategyProfile):
        return s
    return StrategyProfile(tuple(s))


def payoff(
    spec: GameSpec,
    s: Union[StrategyProfile, Iterable[int]],
    tol: float = DEFAULT_TOL,
) -> PayoffOutcome:
    """Evaluate the payoff vector for one strategy profile."""
    profile = _as_profile(s)
    if len(profile.s) != spec.m:
        raise ValueError(f"profile has {len(profile.s)} entries, expected {spec.m}")
    E = list(profile.exercising)
    bad = [i for i in E if i in spec.non_exercising]
    if bad:
        raise ValueError(f"players {bad} cannot exercise in this game")
    Ga = spec.G.entries
    m = spec.m
    if not E:
        return PayoffOutcome(V=spec.P.copy(), a=np.zeros(m))
    if len(E) == m:
        if abs(float(np.linalg.det(Ga))) <= tol * _minor_scale(Ga):
            return PayoffOutcome(V=spec.X.copy(), a=None)
        a = np.linalg.solve(Ga, spec.X - spec.P)
        return PayoffOutcome(V=spec.X.copy(), a=a)
    sub = Ga[np.ix_(E, E)]
    if abs(float(np.linalg.det(sub))) <= tol * _minor_scale(sub):
        raise SingularSubmatrix(f"G restricted to exercising set {E} is singular")
    a = np.zeros(m)
    a[E] = np.linalg.solve(sub, (spec.X - spec.P)[E])
    V = spec.P + Ga @ a
    V[E] = spec.X[E]
    return PayoffOutcome(V=V, a=a)


def _free_profiles(spec: GameSpec) -> Iterable[StrategyProfile]:
    """All profiles in lexicographic order, non-exercising players pinned to 1."""
    frozen = spec.non_exercising
    for bits in product((0, 1), repeat=spec.m):
        if any(bits[i] == 0 for i in frozen):
            continue
        yield StrategyProfile(bits)


def _payoff_table(
    spec: GameSpec, tol: float
) -> Dict[Tuple[int, ...], np.ndarray]:
    return {p.s: payoff(spec, p, tol=tol).V for p in _free_profiles(spec)}


def _table_tol(table: Dict[Tuple[int, ...], np.ndarray], tol: float) -> float:
    peak = max(float(np.max(np.abs(v))) for v in table.values())
    return tol * max(1.0, peak)


def _check_cap(spec: GameSpec, cap: int, what: str) -> None:
    free = len(spec.exercisable)
    if free > cap:
        raise DimensionTooLarge(f"{what} enumerates 2^{free} profiles; cap is {cap}")


def _is_nash(
    spec: GameSpec,
    s: Tuple[int, ...],
    table: Dict[Tuple[int, ...], np.ndarray],
    tau: float,
) -> bool:
    base = table[s]
    for i in spec.exercisable:
        flipped = list(s)
        flipped[i] = 1 - flipped[i]
        if table[tuple(flipped)][i] > base[i] + tau:
            return False
    return True


def enumerate_nash(
    spec: GameSpec, tol: float = DEFAULT_TOL, cap: int = ENUM_CAP
) -> List[StrategyProfile]:
    """All pure Nash profiles, in lexicographic order of the exercise vector."""
    _check_cap(spec, cap, "Nash enumeration")
    table = _payoff_table(spec, tol)
    tau = _table_tol(table, tol)
    return [
        StrategyProfile(s) for s in table if _is_nash(spec, s, table, tau)
    ]


def sol(spec: GameSpec, tol: float = DEFAULT_TOL) -> np.ndarray:
    """The unique Nash equilibrium payoff vector.

    Nonsingular P-matrix games: V* = X + w for the LCP(P - X, G) solution.
    Singular P0' games: the solvability dichotomy applies; when the
    certificate rules a solution out, everyone exercising is the Nash
    equilibrium and V* = X.
    """
    if spec.non_exercising:
        raise NotCovered("unique-payoff solver applies to fully exercisable games")
    cls = classify(spec.G, tol=tol)
    problem = LcpProblem(q=spec.P - spec.X, M=spec.G)
    if cls.is_P:
        lcp_sol = solve_enum(problem, tol=tol)
        if lcp_sol is None:
            raise ArithmeticError("P-matrix game unexpectedly has no LCP solution")
        return spec.X + lcp_sol.w
    if cls.is_P0prime:
        outcome = solvability_p0prime(problem, tol=tol)
        if outcome.solvable:
            return spec.X + outcome.solution.w
        return spec.X.copy()
    raise NotCovered("G is outside P and P0'; no unique Nash payoff is guaranteed")


def canonical_equilibrium(
    spec: GameSpec, tol: float = DEFAULT_TOL
) -> StrategyProfile:
    """The Nash profile that exercises exactly the players with V*_i = X_i."""
    v_star = sol(spec, tol=tol)
    tau = tol * max(1.0, float(np.max(np.abs(v_star))), float(np.max(np.abs(spec.X))))
    s = tuple(0 if abs(v_star[i] - spec.X[i]) <= tau else 1 for i in range(spec.m))
    return StrategyProfile(s)


def is_optimal_equilibrium(
    spec: GameSpec,
    s: Union[StrategyProfile, Iterable[int]],
    tol: float = DEFAULT_TOL,
    cap: int = ENUM_CAP,
) -> bool:
    """Nash, and each player's payoff is a floor against arbitrary opponents."""
    profile = _as_profile(s)
    _check_cap(spec, cap, "optimality check")
    table = _payoff_table(spec, tol)
    tau = _table_tol(table, tol)
    if not _is_nash(spec, profile.s, table, tau):
        return False
    base = table[profile.s]
    free = spec.exercisable
    for k in free:
        others = [i for i in free if i != k]
        for bits in product((0, 1), repeat=len(others)):
            t = [1] * spec.m
            t[k] = profile.s[k]
            for i, b in zip(others, bits):
                t[i] = b
            if table[tuple(t)][k] < base[k] - tau:
                return False
    return True


def wuc_check(
    spec: GameSpec, tol: float = DEFAULT_TOL, cap: int = BRUTE_FORCE_CAP
) -> bool:
    """Weak unilateral competitiveness, checked over every unilateral switch.

    A strict unilateral gain for the switching player must not strictly
    gain any other player, and unilateral indifference must leave every
    payoff unchanged.
    """
    _check_cap(spec, cap, "competitiveness check")
    table = _payoff_table(spec, tol)
    tau = _table_tol(table, tol)
    free = spec.exercisable
    for k in free:
        others = [i for i in free if i != k]
        for bits in product((0, 1), repeat=len(others)):
            t0 = [1] * spec.m
            t1 = [1] * spec.m
            for i, b in zip(others, bits):
                t0[i] = b
                t1[i] = b
            t0[k], t1[k] = 0, 1
            v0, v1 = table[tuple(t0)], table[tuple(t1)]
            diff = v0[k] - v1[k]
            if diff > tau:
                hi, lo = v0, v1
            elif diff < -tau:
                hi, lo = v1, v0
            else:
                if any(
                    abs(v0[l] - v1[l]) > tau for l in range(spec.m) if l != k
                ):
                    return False
                continue
            if any(hi[l] > lo[l] + tau for l in range(spec.m) if l != k):
                return False
    return True


def _iterated_optima(
    spec: GameSpec,
    table: Dict[Tuple[int, ...], np.ndarray],
    group: List[int],
    score,
) -> Tuple[float, float]:
    """(sup-inf, inf-sup) of score over group strategies vs the complement."""
    free = spec.exercisable
    complement = [i for i in free if i not in group]

    def rows(players: List[int]):
        return list(product((0, 1), repeat=len(players)))

    def build(own_bits, other_bits, own: List[int], other: List[int]):
        t = [1] * spec.m
        for i, b in zip(own, own_bits):
            t[i] = b
        for i, b in zip(other, other_bits):
            t[i] = b
        return tuple(t)

    sup_inf = -np.inf
    for ob in rows(group):
        worst = np.inf
        for ab in rows(complement):
            worst = min(worst, score(table[build(ob, ab, group, complement)]))
        sup_inf = max(sup_inf, worst)
    inf_sup = np.inf
    for ab in rows(complement):
        best = -np.inf
        for ob in rows(group):
            best = max(best, score(table[build(ob, ab, group, complement)]))
        inf_sup = min(inf_sup, best)
    return float(sup_inf), float(inf_sup)


def value(
    spec: GameSpec, tol: float = DEFAULT_TOL, cap: int = BRUTE_FORCE_CAP
) -> Optional[np.ndarray]:
    """Per-player sup-inf payoffs, when they agree with the inf-sup side."""
    _check_cap(spec, cap, "value computation")
    table = _payoff_table(spec, tol)
    tau = _table_tol(table, tol)
    out = np.zeros(spec.m)
    for k in range(spec.m):
        group = [k] if k in spec.exercisable else []
        lo, hi = _iterated_optima(spec, table, group, lambda v, k=k: float(v[k]))
        if abs(hi - lo) > tau:
            return None
        out[k] = lo
    return out


def coalition_value(
    spec: GameSpec,
    A: Iterable[int],
    tol: float = DEFAULT_TOL,
    cap: int = BRUTE_FORCE_CAP,
) -> Optional[float]:
    """Value of the summed payoff of coalition A against everyone else."""
    group_all = sorted(set(int(i) for i in A))
    if not group_all:
        raise ValueError("coalition must be nonempty")
    if any(i < 0 or i >= spec.m for i in group_all):
        raise ValueError("coalition indices out of range")
    _check_cap(spec, cap, "coalition value")
    table = _payoff_table(spec, tol)
    tau = _table_tol(table, tol) * max(1, len(group_all))
    group = [i for i in group_all if i in spec.exercisable]
    lo, hi = _iterated_optima(
        spec, table, group, lambda v: float(sum(v[i] for i in group_all))
    )
    if abs(hi - lo) > tau:
        return None
    return lo


def dummy_extension(spec: GameSpec, tol: float = DEFAULT_TOL) -> GameSpec:
    """Append a non-acting balancing player so the game becomes zero-sum.

    The new player 0 carries X_0 = -sum(X), P_0 = -sum(P); its matrix row
    holds the negated column sums of G and its column is zero, so every
    column of the extended matrix sums to zero and payoffs cancel across
    players for every profile. Requires the column sums of G to be
    nonnegative. Equilibrium-payoff queries stay with the base game: zero
    proper minors through the new index put the extension outside P0'.
    """
    Ga = spec.G.entries
    colsums = Ga.sum(axis=0)
    tau = entry_tolerance(spec.G, tol)
    if float(np.min(colsums)) < -tau:
        raise ColumnSumNegative("dummy extension needs nonnegative column sums")
    m = spec.m
    ext = np.zeros((m + 1, m + 1))
    ext[0, 1:] = -colsums
    ext[1:, 1:] = Ga
    X = np.concatenate(([-float(np.sum(spec.X))], spec.X))
    P = np.concatenate(([-float(np.sum(spec.P))], spec.P))
    frozen = frozenset({0}) | frozenset(i + 1 for i in spec.non_exercising)
    return GameSpec(X=X, P=P, G=SquareMatrix(ext), non_exercising=frozen)


def projection_sol(spec: GameSpec, tol: float = DEFAULT_TOL) -> np.ndarray:
    """V* as the G^{-1}-norm projection of P onto the orthant above X.

    Independent route to the unique Nash payoff for symmetric positive
    definite G: minimize (x - P)^T G^{-1} (x - P) over x >= X with the
    active-set minimizer, bypassing the LCP entirely.
    """
    Ga = spec.G.entries
    tau = entry_tolerance(spec.G, tol)
    if float(np.max(np.abs(Ga - Ga.T))) > tau:
        raise NotSymmetricPD("projection form needs a symmetric matrix")
    try:
        np.linalg.cholesky(0.5 * (Ga + Ga.T))
    except np.linalg.LinAlgError:
        raise NotSymmetricPD("projection form needs a positive definite matrix")
    return project_quadratic(np.linalg.inv(Ga), spec.P, spec.X, tol=tol)


def equilibrium_report(
    spec: GameSpec, tol: float = DEFAULT_TOL, cap: int = BRUTE_FORCE_CAP
) -> EquilibriumReport:
    """Bundle enumeration, optimality, value, and competitiveness results."""
    nash = enumerate_nash(spec, tol=tol)
    payoffs = [payoff(spec, p, tol=tol).V for p in nash]
    nash_payoff = None
    if payoffs:
        tau = tol * max(1.0, max(float(np.max(np.abs(v))) for v in payoffs))
        if all(float(np.max(np.abs(v - payoffs[0]))) <= tau for v in payoffs):
            nash_payoff = payoffs[0]
    optimal = [p for p in nash if is_optimal_equilibrium(spec, p, tol=tol)]
    free = len(spec.exercisable)
    val = value(spec, tol=tol, cap=cap) if free <= cap else None
    wuc = wuc_check(spec, tol=tol, cap=cap) if free <= cap else None
    return EquilibriumReport(
        nash_profiles=nash,
        nash_payoff=nash_payoff,
        optimal_profiles=optimal,
        value=val,
        wuc=wuc,
    )
