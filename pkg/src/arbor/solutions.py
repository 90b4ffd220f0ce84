"""Solution vectors: binary edge indicators marking a root-to-terminal path.

Bits are indexed by the canonical edge order of the source tree. The vector
space of solutions carries its own morphisms (rank-one least-norm matrices)
and the Euclidean metric, which on binary vectors is the square root of the
Hamming distance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BrokenPath, LengthMismatch, NotATerminal, ZeroSolution
from .tree import Edge, LabeledTree, canonical_edge_order

__all__ = [
    "Solution",
    "encode_path",
    "decode_path",
    "solution_morphism",
    "solution_distance",
    "solution_to_json",
    "solution_from_dict",
]


@dataclass(frozen=True)
class Solution:
    bits: tuple[int, ...]
    edge_order: tuple[Edge, ...]
    problem_id: str = ""
    terminal: str | None = None

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"bits must be 0/1, got {self.bits}")
        if len(self.bits) != len(self.edge_order):
            raise LengthMismatch(
                f"{len(self.bits)} bits over {len(self.edge_order)} edges"
            )

    def marked_edges(self) -> list[Edge]:
        return [e for b, e in zip(self.bits, self.edge_order) if b]

    def __len__(self) -> int:
        return len(self.bits)


def encode_path(tree: LabeledTree, terminal: str, problem_id: str = "") -> Solution:
    """Mark the edges on the root-to-``terminal`` path."""
    if terminal not in tree.nodes or not tree.nodes[terminal].is_terminal:
        raise NotATerminal(f"{terminal!r} is not a terminal node")
    path = tree.path_to_root(terminal)
    on_path = {(path[i + 1], path[i]) for i in range(len(path) - 1)}
    order = tuple(canonical_edge_order(tree))
    bits = tuple(1 if e in on_path else 0 for e in order)
    return Solution(bits=bits, edge_order=order, problem_id=problem_id, terminal=terminal)


def decode_path(tree: LabeledTree, solution: Solution) -> str:
    """Return the terminal the marked edges lead to.

    Raises BrokenPath unless the marked edges form a connected path from the
    root to exactly one terminal node.
    """
    marked = solution.marked_edges()
    if not marked:
        raise BrokenPath("no edges marked")
    out_edges: dict[str, list[str]] = {}
    for parent, child in marked:
        out_edges.setdefault(parent, []).append(child)
    u = tree.root
    visited = 0
    while u in out_edges:
        nxt = out_edges.pop(u)
        if len(nxt) != 1:
            raise BrokenPath(f"node {u!r} has {len(nxt)} marked out-edges")
        u = nxt[0]
        visited += 1
    if out_edges:
        raise BrokenPath(f"marked edges disconnected from the root path: {sorted(out_edges)}")
    if visited != len(marked):
        raise BrokenPath("marked edges do not chain")
    if not tree.nodes[u].is_terminal:
        raise BrokenPath(f"path ends at non-terminal {u!r}")
    return u


def _bits(s: Solution | Sequence[int]) -> np.ndarray:
    if isinstance(s, Solution):
        return np.asarray(s.bits, dtype=float)
    return np.asarray(s, dtype=float)


def solution_morphism(s: Solution | Sequence[int], t: Solution | Sequence[int]) -> np.ndarray:
    """Least-norm matrix A with A @ s = t: the rank-one outer product
    t s^T / (s . s). This is the pseudoinverse construction specialized to
    row vectors."""
    sv, tv = _bits(s), _bits(t)
    if sv.shape != tv.shape:
        raise LengthMismatch(f"lengths differ: {sv.size} vs {tv.size}")
    denom = float(sv @ sv)
    if denom == 0.0:
        raise ZeroSolution("the all-zero vector cannot be mapped to a nonzero target")
    return np.outer(tv, sv) / denom


def solution_distance(s: Solution | Sequence[int], t: Solution | Sequence[int]) -> float:
    """Euclidean distance; on binary vectors this is sqrt(Hamming)."""
    sv, tv = _bits(s), _bits(t)
    if sv.shape != tv.shape:
        raise LengthMismatch(f"lengths differ: {sv.size} vs {tv.size}")
    return float(np.linalg.norm(sv - tv))


def solution_to_json(s: Solution) -> str:
    payload = {
        "problem_id": s.problem_id,
        "edge_order": [f"{p}→{c}" for p, c in s.edge_order],
        "bits": list(s.bits),
        "terminal": s.terminal,
    }
    return json.dumps(payload, indent=2, ensure_ascii=False)


def solution_from_dict(payload: dict) -> Solution:
    order = tuple(tuple(e.split("→", 1)) for e in payload["edge_order"])
    return Solution(
        bits=tuple(int(b) for b in payload["bits"]),
        edge_order=order,  # type: ignore[arg-type]
        problem_id=payload.get("problem_id", ""),
        terminal=payload.get("terminal"),
    )
