"""JSON parsing and deterministic serialization for the CLI.

Inputs use plain JSON objects: matrices as {"m": int, "rows": [[...]]},
complementarity problems as {"q": [...], "M": <matrix>}, games as
{"X": [...], "P": [...], "G": <matrix>}, trees as {"T", "m", "nodes",
"G"?}. Wherever a matrix is accepted, {"alpha": [...]} stands for the
proportional-redistribution matrix built from those weights.

Serialization is hand-rolled so that floats always print with 17
significant digits (round-trip exact for doubles) and output bytes are
identical across runs for identical data; the stdlib encoder does not
allow overriding float formatting.
"""

from __future__ import annotations

import json
from typing import Any, Iterable, List, Mapping, Optional

import numpy as np

from .lcp import LcpProblem
from .matrices import SquareMatrix
from .redistribution import dhat_matrix
from .single_period import GameSpec
from .tree import ScenarioTree, TreeNode

__all__ = [
    "InputFormatError",
    "parse_vector",
    "parse_matrix",
    "parse_lcp",
    "parse_game",
    "parse_tree",
    "vector_json",
    "matrix_json",
    "game_json",
    "tree_json",
    "dump_json",
    "load_json",
]


class InputFormatError(ValueError):
    """The input JSON does not match any accepted shape."""


def load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputFormatError(f"not valid JSON: {e}") from e


def _require_mapping(obj: Any, what: str) -> Mapping:
    if not isinstance(obj, Mapping):
        raise InputFormatError(f"{what} must be a JSON object")
    return obj


def parse_vector(obj: Any, what: str, m: Optional[int] = None) -> np.ndarray:
    if not isinstance(obj, (list, tuple)) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj
    ):
        raise InputFormatError(f"{what} must be an array of numbers")
    v = np.asarray(obj, dtype=float)
    if not np.all(np.isfinite(v)):
        raise InputFormatError(f"{what} has non-finite entries")
    if m is not None and v.shape != (m,):
        raise InputFormatError(f"{what} must have length {m}")
    return v


def parse_matrix(obj: Any, what: str = "matrix") -> SquareMatrix:
    mp = _require_mapping(obj, what)
    if "alpha" in mp and "rows" not in mp:
        alpha = parse_vector(mp["alpha"], f"{what}.alpha")
        return dhat_matrix(alpha)
    rows = mp.get("rows")
    if rows is None:
        raise InputFormatError(f"{what} needs either 'rows' or 'alpha'")
    if not isinstance(rows, list) or not rows:
        raise InputFormatError(f"{what}.rows must be a nonempty array")
    m = len(rows)
    entries = np.vstack([parse_vector(r, f"{what}.rows[{i}]", m) for i, r in enumerate(rows)])
    declared = mp.get("m")
    if declared is not None and int(declared) != m:
        raise InputFormatError(f"{what} declares m={declared} but has {m} rows")
    try:
        return SquareMatrix(entries)
    except ValueError as e:
        raise InputFormatError(f"{what}: {e}") from e


def parse_lcp(obj: Any) -> LcpProblem:
    mp = _require_mapping(obj, "problem")
    if "q" not in mp or "M" not in mp:
        raise InputFormatError("problem needs 'q' and 'M'")
    M = parse_matrix(mp["M"], "M")
    q = parse_vector(mp["q"], "q", M.m)
    try:
        return LcpProblem(q=q, M=M)
    except ValueError as e:
        raise InputFormatError(str(e)) from e


def parse_game(obj: Any) -> GameSpec:
    mp = _require_mapping(obj, "game")
    if "X" not in mp or "P" not in mp:
        raise InputFormatError("game needs 'X' and 'P'")
    if "G" in mp:
        G = parse_matrix(mp["G"], "G")
    elif "alpha" in mp:
        G = parse_matrix({"alpha": mp["alpha"]}, "G")
    else:
        raise InputFormatError("game needs 'G' or 'alpha'")
    X = parse_vector(mp["X"], "X", G.m)
    P = parse_vector(mp["P"], "P", G.m)
    frozen = mp.get("non_exercising", [])
    if not isinstance(frozen, list) or not all(
        isinstance(i, int) and not isinstance(i, bool) for i in frozen
    ):
        raise InputFormatError("non_exercising must be an array of player numbers")
    if any(i < 1 or i > G.m for i in frozen):
        raise InputFormatError("non_exercising player numbers must be in 1..m")
    try:
        return GameSpec(
            X=X, P=P, G=G, non_exercising=frozenset(i - 1 for i in frozen)
        )
    except ValueError as e:
        raise InputFormatError(str(e)) from e


def parse_tree(obj: Any) -> ScenarioTree:
    mp = _require_mapping(obj, "tree")
    for key in ("T", "m", "nodes"):
        if key not in mp:
            raise InputFormatError(f"tree needs '{key}'")
    T, m = mp["T"], mp["m"]
    if not isinstance(T, int) or isinstance(T, bool) or T < 0:
        raise InputFormatError("tree.T must be a nonnegative integer")
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise InputFormatError("tree.m must be a positive integer")
    shared = parse_matrix(mp["G"], "tree.G") if mp.get("G") is not None else None
    raw_nodes = mp["nodes"]
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise InputFormatError("tree.nodes must be a nonempty array")
    nodes: List[TreeNode] = []
    for i, raw in enumerate(raw_nodes):
        nm = _require_mapping(raw, f"nodes[{i}]")
        if "id" not in nm or "t" not in nm:
            raise InputFormatError(f"nodes[{i}] needs 'id' and 't'")
        t = nm["t"]
        if not isinstance(t, int) or isinstance(t, bool):
            raise InputFormatError(f"nodes[{i}].t must be an integer")
        p = nm.get("p", 1.0)
        if isinstance(p, bool) or not isinstance(p, (int, float)):
            raise InputFormatError(f"nodes[{i}].p must be a number")
        X = parse_vector(nm.get("X"), f"nodes[{i}].X", m)
        G = parse_matrix(nm["G"], f"nodes[{i}].G") if nm.get("G") is not None else None
        parent = nm.get("parent")
        nodes.append(
            TreeNode(
                id=str(nm["id"]),
                t=t,
                parent=None if parent is None else str(parent),
                p=float(p),
                X=X,
                G=G,
            )
        )
    return ScenarioTree(T=T, m=m, nodes=tuple(nodes), G=shared)


def vector_json(v: Iterable[float]) -> List[float]:
    return [float(x) for x in np.asarray(v, dtype=float)]


def matrix_json(M: SquareMatrix) -> dict:
    return {"m": M.m, "rows": [vector_json(r) for r in M.entries]}


def game_json(spec: GameSpec) -> dict:
    out = {
        "X": vector_json(spec.X),
        "P": vector_json(spec.P),
        "G": matrix_json(spec.G),
    }
    if spec.non_exercising:
        out["non_exercising"] = sorted(i + 1 for i in spec.non_exercising)
    return out


def tree_json(tree: ScenarioTree) -> dict:
    out: dict = {"T": tree.T, "m": tree.m}
    if tree.G is not None:
        out["G"] = matrix_json(tree.G)
    nodes = []
    for n in tree.nodes:
        nd: dict = {
            "id": n.id,
            "t": n.t,
            "parent": n.parent,
            "p": float(n.p),
            "X": vector_json(n.X),
        }
        if n.G is not None:
            nd["G"] = matrix_json(n.G)
        nodes.append(nd)
    out["nodes"] = nodes
    return out


def _float_repr(x: float) -> str:
    if x != x or x in (float("inf"), float("-inf")):
        raise ValueError("cannot serialize non-finite numbers")
    if x == 0.0:
        x = 0.0  # normalize -0.0 so reruns cannot differ on sign noise
    s = format(x, ".17g")
    if not any(c in s for c in ".eE"):
        s += ".0"
    return s


def _is_scalar(x: Any) -> bool:
    return x is None or isinstance(x, (bool, int, float, str, np.integer, np.floating))


def _serialize(obj: Any, level: int, indent: int) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float_repr(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        items = list(obj)
        if not items:
            return "[]"
        if all(_is_scalar(x) for x in items):
            return "[" + ", ".join(_serialize(x, 0, indent) for x in items) + "]"
        inner = " " * (indent * (level + 1))
        body = ",\n".join(
            inner + _serialize(x, level + 1, indent) for x in items
        )
        return "[\n" + body + "\n" + " " * (indent * level) + "]"
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        inner = " " * (indent * (level + 1))
        parts = []
        for k, v in obj.items():
            parts.append(
                inner + json.dumps(str(k), ensure_ascii=False) + ": "
                + _serialize(v, level + 1, indent)
            )
        return "{\n" + ",\n".join(parts) + "\n" + " " * (indent * level) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dump_json(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON text with 17-significant-digit floats."""
    return _serialize(obj, 0, indent) + "\n"
