"""Multi-period stopping games on scenario trees.

Backward induction composes the single-period solver: terminal values
are the exercise payoffs, and each earlier node solves the one-shot game
whose stay-in payoff is the conditional expectation of the next-period
values. The canonical profile stops a player wherever the value process
touches that player's exercise payoff.

Arbitrary stopping profiles are evaluated pathwise: at the first node
where anyone stops, the one-shot payoff rule applies with the exercising
set, anchoring non-exercisers to the expected continuation value. The
naive variant anchors them to the expected terminal payoff instead,
which breaks the equilibrium structure (see the builtin counterexample
in the CLI). Verification is by brute-force enumeration of adapted
stopping times, represented as the antichain of first-stop nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

import numpy as np

from .errors import DomainError
from .matrices import DEFAULT_TOL, entry_tolerance
from .single_period import GameSpec, StrategyProfile, payoff, sol
from .tree import AdaptedProcess, ScenarioTree, TreeNode, conditional_expectation

__all__ = [
    "StoppingProfile",
    "ValueProcess",
    "EnumerationTooLarge",
    "HypothesisViolated",
    "backward_induction",
    "evaluate_profile",
    "naive_evaluate_profile",
    "verify_optimal_equilibrium",
    "coalition_value_tree",
    "enumerate_stopping_times",
    "stopping_time_count",
    "NaiveSearchResult",
    "naive_equilibrium_search",
]

ENUMERATION_BUDGET = 10**6


class EnumerationTooLarge(DomainError):
    """The stopping-time enumeration exceeds the configured budget."""


class HypothesisViolated(DomainError):
    """A theorem precondition failed, or its asserted conclusion did not hold."""


@dataclass(frozen=True)
class StoppingProfile:
    """Per player, the set of nodes at which the player decides to stop.

    The induced stopping time on a path is the first node in the set;
    paths that never meet it stop at the horizon. Sets may contain nodes
    below the first hit (full decision maps); those entries never fire.
    """

    stops: Tuple[FrozenSet[str], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "stops",
            tuple(frozenset(str(i) for i in s) for s in self.stops),
        )

    @property
    def m(self) -> int:
        return len(self.stops)

    def replace(self, player: int, stop_set: FrozenSet[str]) -> "StoppingProfile":
        stops = list(self.stops)
        stops[player] = frozenset(str(i) for i in stop_set)
        return StoppingProfile(tuple(stops))


@dataclass(frozen=True)
class ValueProcess:
    U: AdaptedProcess
    tau_star: StoppingProfile


def _scale(values: Iterable[np.ndarray]) -> float:
    peak = 0.0
    for v in values:
        peak = max(peak, float(np.max(np.abs(v))))
    return max(1.0, peak)


def backward_induction(tree: ScenarioTree, tol: float = DEFAULT_TOL) -> ValueProcess:
    """Value process U and the canonical stop-when-binding profile."""
    tree.require_valid()
    U: Dict[str, np.ndarray] = {}
    for n in sorted(tree.nodes, key=lambda n: -n.t):
        if tree.is_leaf(n):
            U[n.id] = n.X.copy()
            continue
        G = tree.effective_G(n)
        if G is None:
            raise ValueError(f"node {n.id!r} has no matrix and no shared default")
        cont = conditional_expectation(tree, U, n)
        U[n.id] = sol(GameSpec(X=n.X, P=cont, G=G), tol=tol)
    stops: List[FrozenSet[str]] = []
    for i in range(tree.m):
        binding = set()
        for n in tree.nonterminal():
            tau = tol * _scale([U[n.id], n.X])
            if U[n.id][i] <= n.X[i] + tau:
                binding.add(n.id)
        stops.append(frozenset(binding))
    return ValueProcess(U=AdaptedProcess(values=U), tau_star=StoppingProfile(tuple(stops)))


class _ProfileEvaluator:
    """Pathwise payoff evaluation against a fixed anchor process.

    anchor maps each node to the value process whose conditional
    expectation plays the stay-in payoff role when the game ends below
    the horizon: the continuation values for the standard payoff, the
    terminal payoffs for the naive variant. One-shot end payoffs are
    cached per (node, exercising set).
    """

    def __init__(self, tree: ScenarioTree, anchor: Dict[str, np.ndarray], tol: float):
        self.tree = tree
        self.anchor = anchor
        self.tol = tol
        self._ends: Dict[Tuple[str, FrozenSet[int]], np.ndarray] = {}

    def _end_payoff(self, n: TreeNode, E: FrozenSet[int]) -> np.ndarray:
        key = (n.id, E)
        got = self._ends.get(key)
        if got is not None:
            return got
        G = self.tree.effective_G(n)
        if G is None:
            raise ValueError(f"node {n.id!r} has no matrix and no shared default")
        stay = conditional_expectation(self.tree, self.anchor, n)
        spec_game = GameSpec(X=n.X, P=stay, G=G)
        s = tuple(0 if i in E else 1 for i in range(self.tree.m))
        V = payoff(spec_game, StrategyProfile(s), tol=self.tol).V
        self._ends[key] = V
        return V

    def value(self, profile: StoppingProfile, node: Union[str, TreeNode]) -> np.ndarray:
        n = self.tree.node(node)
        if self.tree.is_leaf(n):
            return n.X
        E = frozenset(i for i, s in enumerate(profile.stops) if n.id in s)
        if E:
            return self._end_payoff(n, E)
        out = np.zeros(self.tree.m)
        for c in self.tree.children(n):
            out = out + c.p * self.value(profile, c)
        return out


def _continuation_anchor(tree: ScenarioTree, tol: float) -> Dict[str, np.ndarray]:
    return dict(backward_induction(tree, tol=tol).U.values)


def _terminal_anchor(tree: ScenarioTree) -> Dict[str, np.ndarray]:
    out: Dict[str, np.ndarray] = {}
    for n in sorted(tree.nodes, key=lambda n: -n.t):
        if tree.is_leaf(n):
            out[n.id] = n.X.copy()
        else:
            out[n.id] = conditional_expectation(tree, out, n)
    return out


def _check_profile(tree: ScenarioTree, profile: StoppingProfile) -> None:
    if profile.m != tree.m:
        raise ValueError(f"profile covers {profile.m} players, tree has {tree.m}")
    known = set(tree._by_id)
    for i, s in enumerate(profile.stops):
        unknown = s - known
        if unknown:
            raise ValueError(f"player {i} stops at unknown nodes {sorted(unknown)}")


def evaluate_profile(
    tree: ScenarioTree,
    profile: StoppingProfile,
    node: Union[str, TreeNode, None] = None,
    tol: float = DEFAULT_TOL,
    values: Optional[ValueProcess] = None,
) -> np.ndarray:
    """Expected payoff vector of a stopping profile, seen from a node.

    Pass the result of backward_induction as values to reuse it across
    many profile evaluations.
    """
    tree.require_valid()
    _check_profile(tree, profile)
    anchor = (
        dict(values.U.values) if values is not None else _continuation_anchor(tree, tol)
    )
    ev = _ProfileEvaluator(tree, anchor, tol)
    return ev.value(profile, tree.root if node is None else node)


def naive_evaluate_profile(
    tree: ScenarioTree,
    profile: StoppingProfile,
    node: Union[str, TreeNode, None] = None,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Profile payoff with non-exercisers anchored to expected terminal payoffs."""
    tree.require_valid()
    _check_profile(tree, profile)
    ev = _ProfileEvaluator(tree, _terminal_anchor(tree), tol)
    return ev.value(profile, tree.root if node is None else node)


def _subtree_choices(tree: ScenarioTree, n: TreeNode) -> List[FrozenSet[str]]:
    if tree.is_leaf(n):
        return [frozenset()]
    per_child = [_subtree_choices(tree, c) for c in tree.children(n)]
    out: List[FrozenSet[str]] = [frozenset({n.id})]
    for combo in product(*per_child):
        out.append(frozenset().union(*combo))
    return out


def enumerate_stopping_times(tree: ScenarioTree) -> List[FrozenSet[str]]:
    """Every adapted single-player stopping time, as its first-stop antichain.

    The empty set is the never-stop-early time (exercise at the horizon).
    """
    return _subtree_choices(tree, tree.root)


def stopping_time_count(tree: ScenarioTree) -> int:
    def count(n: TreeNode) -> int:
        if tree.is_leaf(n):
            return 1
        prod = 1
        for c in tree.children(n):
            prod *= count(c)
        return 1 + prod

    return count(tree.root)


def _check_budget(tree: ScenarioTree, budget: int) -> int:
    per_player = stopping_time_count(tree)
    total = per_player**tree.m
    if total > budget:
        raise EnumerationTooLarge(
            f"{per_player}^{tree.m} joint stopping profiles exceed budget {budget}"
        )
    return per_player


def verify_optimal_equilibrium(
    tree: ScenarioTree,
    profile: StoppingProfile,
    tol: float = DEFAULT_TOL,
    budget: int = ENUMERATION_BUDGET,
) -> bool:
    """Exhaustive check that no player can gain and none can be pushed down.

    Against the others' profile entries, each player's own deviations
    must not beat the profile payoff; against arbitrary joint adversary
    stopping times, keeping the profile entry must not fall below it.
    """
    tree.require_valid()
    _check_profile(tree, profile)
    _check_budget(tree, budget)
    values = backward_induction(tree, tol=tol)
    ev = _ProfileEvaluator(tree, dict(values.U.values), tol)
    root = tree.root
    base = ev.value(profile, root)
    tau = tol * _scale(
        [base] + [n.X for n in tree.nodes] + list(values.U.values.values())
    )
    choices = enumerate_stopping_times(tree)
    for k in range(tree.m):
        for c in choices:
            if ev.value(profile.replace(k, c), root)[k] > base[k] + tau:
                return False
    for k in range(tree.m):
        others = [i for i in range(tree.m) if i != k]
        for combo in product(choices, repeat=len(others)):
            adversary = profile
            for i, c in zip(others, combo):
                adversary = adversary.replace(i, c)
            if ev.value(adversary, root)[k] < base[k] - tau:
                return False
    return True


def coalition_value_tree(
    tree: ScenarioTree,
    A: Iterable[int],
    tol: float = DEFAULT_TOL,
    budget: int = ENUMERATION_BUDGET,
) -> Optional[float]:
    """Guaranteed total payoff of coalition A, by exhaustive enumeration.

    Requires nonnegative column sums on every matrix in play (on top of
    the Z-and-minor-signs class the tree already enforces); the computed
    value must match the summed value process at the root, and a mismatch
    reports the failed conclusion rather than returning a bogus number.
    """
    tree.require_valid()
    members = sorted(set(int(i) for i in A))
    if not members:
        raise ValueError("coalition must be nonempty")
    if any(i < 0 or i >= tree.m for i in members):
        raise ValueError("coalition indices out of range")
    mats = [("<shared>", tree.G)] if tree.G is not None else []
    mats.extend((n.id, n.G) for n in tree.nodes if n.G is not None)
    for label, M in mats:
        colsums = M.entries.sum(axis=0)
        if float(np.min(colsums)) < -entry_tolerance(M, tol):
            raise HypothesisViolated(
                f"matrix at {label!r} has a negative column sum"
            )
    _check_budget(tree, budget)
    values = backward_induction(tree, tol=tol)
    ev = _ProfileEvaluator(tree, dict(values.U.values), tol)
    root = tree.root
    choices = enumerate_stopping_times(tree)
    others = [i for i in range(tree.m) if i not in members]

    def total(own_combo, adv_combo) -> float:
        prof = StoppingProfile(tuple(frozenset() for _ in range(tree.m)))
        for i, c in zip(members, own_combo):
            prof = prof.replace(i, c)
        for i, c in zip(others, adv_combo):
            prof = prof.replace(i, c)
        v = ev.value(prof, root)
        return float(sum(v[i] for i in members))

    sup_inf = -np.inf
    for own in product(choices, repeat=len(members)):
        worst = min(
            total(own, adv) for adv in product(choices, repeat=len(others))
        )
        sup_inf = max(sup_inf, worst)
    inf_sup = np.inf
    for adv in product(choices, repeat=len(others)):
        best = max(
            total(own, adv) for own in product(choices, repeat=len(members))
        )
        inf_sup = min(inf_sup, best)
    tau = tol * _scale(list(values.U.values.values())) * max(1, len(members))
    if abs(sup_inf - inf_sup) > tau:
        return None
    target = float(sum(values.U.values[root.id][i] for i in members))
    if abs(sup_inf - target) > tau:
        raise HypothesisViolated(
            f"coalition value {sup_inf!r} differs from summed root values {target!r}"
        )
    return float(sup_inf)


@dataclass(frozen=True)
class NaiveSearchResult:
    nash_profiles: List[StoppingProfile]
    nash_payoffs: List[np.ndarray]
    distinct_nash_payoffs: List[np.ndarray]
    optimal_profiles: List[StoppingProfile]


def naive_equilibrium_search(
    tree: ScenarioTree,
    tol: float = DEFAULT_TOL,
    budget: int = ENUMERATION_BUDGET,
) -> NaiveSearchResult:
    """Exhaustive Nash and optimality search under the naive payoff rule.

    Enumerates every joint profile of adapted stopping times, keeps those
    where no unilateral deviation strictly gains, deduplicates their
    payoff vectors, and flags which of them also survive arbitrary joint
    adversary deviations. The builtin three-player instance comes out
    with two distinct equilibrium payoffs and no surviving profile.
    """
    tree.require_valid()
    _check_budget(tree, budget)
    ev = _ProfileEvaluator(tree, _terminal_anchor(tree), tol)
    root = tree.root
    choices = enumerate_stopping_times(tree)
    payoffs: Dict[Tuple[FrozenSet[str], ...], np.ndarray] = {}
    for combo in product(choices, repeat=tree.m):
        prof = StoppingProfile(tuple(combo))
        payoffs[prof.stops] = ev.value(prof, root)
    tau = tol * _scale(list(payoffs.values()))
    nash: List[StoppingProfile] = []
    nash_vals: List[np.ndarray] = []
    for combo in product(choices, repeat=tree.m):
        prof = StoppingProfile(tuple(combo))
        base = payoffs[prof.stops]
        if any(
            payoffs[prof.replace(k, c).stops][k] > base[k] + tau
            for k in range(tree.m)
            for c in choices
        ):
            continue
        nash.append(prof)
        nash_vals.append(base)
    distinct: List[np.ndarray] = []
    for v in nash_vals:
        if all(float(np.max(np.abs(v - u))) > tau for u in distinct):
            distinct.append(v)
    optimal: List[StoppingProfile] = []
    for prof, base in zip(nash, nash_vals):
        ok = True
        for k in range(tree.m):
            others = [i for i in range(tree.m) if i != k]
            for combo in product(choices, repeat=len(others)):
                adv = prof
                for i, c in zip(others, combo):
                    adv = adv.replace(i, c)
                if payoffs[adv.stops][k] < base[k] - tau:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            optimal.append(prof)
    return NaiveSearchResult(
        nash_profiles=nash,
        nash_payoffs=nash_vals,
        distinct_nash_payoffs=distinct,
        optimal_profiles=optimal,
    )
