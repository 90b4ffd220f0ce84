"""Analogy-based solution transfer and the persisted problem library.

The transfer pipeline: retrieve stored problems closest to a query under the
tree metric, align tips between the query and an analog through a
topology-preserving bijection, then push the analog's solution across the
induced edge correspondence. ``functor_commute_check`` verifies the defining
square: transferring a solution along a structure-preserving transformation
must agree with solving the transformed problem directly.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterator, Sequence

from .characteristic import MetricWeights
from .errors import (
    DuplicateId,
    InconsistentSolution,
    NoCorrespondence,
    StorageFailure,
    UnknownProblemId,
)
from .metrics import tree_distance
from .problems import (
    TreeProblem,
    problem_from_dict,
    problem_to_dict,
    solve,
    validate_problem,
)
from .solutions import Solution, decode_path, solution_from_dict
from .tree import Combinator, LabeledTree, build_tree, canonical_edge_order

__all__ = [
    "ProblemLibrary",
    "LibraryRecord",
    "match_tips",
    "transfer_solution",
    "functor_commute_check",
    "permute_tips",
    "relabel_onto",
    "power_transform",
    "rescale_transform",
]

TipBijection = dict[str, str]


# ---------------------------------------------------------------------- #
# Tip matching
# ---------------------------------------------------------------------- #

def _shapes(tree: LabeledTree) -> dict[str, str]:
    """Canonical unlabeled shape string per node (tips are '*')."""
    out: dict[str, str] = {}

    def visit(u: str) -> str:
        kids = tree.children.get(u, ())
        if not kids:
            out[u] = "*"
        else:
            out[u] = "(" + ",".join(sorted(visit(c) for c in kids)) + ")"
        return out[u]

    visit(tree.root)
    return out


def _feature_gap(fa: Sequence[float], fb: Sequence[float]) -> float:
    return sum(abs(x - y) for x, y in zip(fa, fb))


def _alignments(
    a: LabeledTree,
    b: LabeledTree,
    shapes_a: dict[str, str],
    shapes_b: dict[str, str],
    u: str,
    v: str,
) -> Iterator[tuple[TipBijection, float]]:
    """All tip bijections between the subtrees at u and v that preserve the
    unlabeled shape, with their accumulated edge-feature gap."""
    if shapes_a[u] != shapes_b[v]:
        return
    kids_a, kids_b = a.children.get(u, ()), b.children.get(v, ())
    if not kids_a:
        yield {u: v}, 0.0
        return
    # Children may only pair within equal-shape groups.
    by_shape: dict[str, list[str]] = {}
    for c in kids_b:
        by_shape.setdefault(shapes_b[c], []).append(c)
    groups: list[tuple[list[str], list[str]]] = []
    grouped_a: dict[str, list[str]] = {}
    for c in kids_a:
        grouped_a.setdefault(shapes_a[c], []).append(c)
    for shape, members_a in grouped_a.items():
        members_b = by_shape.get(shape, [])
        if len(members_a) != len(members_b):
            return
        groups.append((members_a, members_b))

    def expand(idx: int, acc: TipBijection, cost: float) -> Iterator[tuple[TipBijection, float]]:
        if idx == len(groups):
            yield dict(acc), cost
            return
        members_a, members_b = groups[idx]
        for perm in itertools.permutations(members_b):
            for pairing in _pairings(members_a, perm, acc, cost):
                yield from expand(idx + 1, *pairing)

    def _pairings(
        members_a: list[str], members_b: tuple[str, ...], acc: TipBijection, cost: float
    ) -> Iterator[tuple[TipBijection, float]]:
        def rec(i: int, acc: TipBijection, cost: float) -> Iterator[tuple[TipBijection, float]]:
            if i == len(members_a):
                yield acc, cost
                return
            ca, cb = members_a[i], members_b[i]
            edge_cost = _feature_gap(a.edges[(u, ca)], b.edges[(v, cb)])
            for sub, sub_cost in _alignments(a, b, shapes_a, shapes_b, ca, cb):
                merged = dict(acc)
                merged.update(sub)
                yield from rec(i + 1, merged, cost + edge_cost + sub_cost)

        yield from rec(0, acc, cost)

    yield from expand(0, {}, 0.0)


def match_tips(a: TreeProblem, b: TreeProblem) -> TipBijection | None:
    """Tip-label bijection under which the two trees have the same topology,
    or None when no such bijection exists.

    Among all shape-preserving bijections the one with the smallest total
    edge-feature gap wins, so a relabeled copy maps back through its own
    relabeling; exact ties resolve to the lexicographically smallest mapping
    (in particular the identity, when tip labels coincide and topologies
    already agree).
    """
    ta, tb = a.tree, b.tree
    if len(ta.tips) != len(tb.tips):
        return None
    shapes_a, shapes_b = _shapes(ta), _shapes(tb)
    best: tuple[float, tuple, TipBijection] | None = None
    for mapping, cost in _alignments(ta, tb, shapes_a, shapes_b, ta.root, tb.root):
        key = tuple(sorted(mapping.items()))
        if best is None or (cost, key) < (best[0], best[1]):
            best = (cost, key, mapping)
    return None if best is None else best[2]


# ---------------------------------------------------------------------- #
# Solution transfer
# ---------------------------------------------------------------------- #

def transfer_solution(
    source: TreeProblem,
    source_sol: Solution,
    target: TreeProblem,
    target_id: str = "",
) -> Solution:
    """Carry a solved path from ``source`` onto ``target``.

    The tip bijection induces an edge correspondence (each edge is named by
    the tip set below it); marked source edges map to their target
    counterparts. The result must again be a root-to-terminal path.
    """
    bijection = match_tips(source, target)
    if bijection is None:
        raise NoCorrespondence(
            "no topology-preserving tip bijection between source and target"
        )
    target_order = canonical_edge_order(target.tree)
    clade_to_index = {
        target.tree.tips_below(child): i for i, (_, child) in enumerate(target_order)
    }
    bits = [0] * len(target_order)
    for parent, child in source_sol.marked_edges():
        clade = frozenset(bijection[t] for t in source.tree.tips_below(child))
        if clade not in clade_to_index:
            raise NoCorrespondence(f"no target edge below tip set {sorted(clade)}")
        bits[clade_to_index[clade]] = 1
    out = Solution(
        bits=tuple(bits),
        edge_order=tuple(target_order),
        problem_id=target_id,
        terminal=None,
    )
    terminal = decode_path(target.tree, out)  # raises BrokenPath on bad input
    return replace(out, terminal=terminal)


# ---------------------------------------------------------------------- #
# Structure-preserving problem transformations
# ---------------------------------------------------------------------- #

def _rebuild(p: TreeProblem, rename: Callable[[str], str], refeature) -> TreeProblem:
    tree = p.tree
    new_tree = build_tree(
        rename(tree.root),
        [
            (rename(a), rename(b), refeature(feats))
            for (a, b), feats in tree.edges.items()
        ],
        tree.schema,
        vertex_labels={rename(v): n.labels for v, n in tree.nodes.items() if n.labels},
    )
    return replace(
        p,
        tree=new_tree,
        goal_tips=frozenset(rename(g) for g in p.goal_tips),
    )


def permute_tips(p: TreeProblem, mapping: TipBijection) -> TreeProblem:
    """Rename terminal labels by a bijection; internal ids are untouched."""
    tips = set(p.tree.tips)
    if set(mapping) != tips or set(mapping.values()) != tips:
        raise NoCorrespondence(f"mapping is not a bijection on {sorted(tips)}")
    return _rebuild(p, lambda v: mapping.get(v, v), lambda f: list(f))


def relabel_onto(p: TreeProblem, bijection: TipBijection) -> TreeProblem:
    """Rename tips into a foreign label set; internal ids are regenerated to
    dodge collisions with the incoming labels."""
    taken = set(bijection.values())
    internal: dict[str, str] = {}

    def rename(v: str) -> str:
        if v in bijection:
            return bijection[v]
        if v not in internal:
            candidate = f"i{len(internal)}"
            while candidate in taken:
                candidate = "_" + candidate
            taken.add(candidate)
            internal[v] = candidate
        return internal[v]

    return _rebuild(p, rename, lambda f: list(f))


def power_transform(p: TreeProblem, alpha: float) -> TreeProblem:
    """Raise every multiplicative feature to a positive power."""
    if alpha <= 0:
        raise ValueError(f"power must be positive, got {alpha}")
    multiplicative = [
        i
        for i, f in enumerate(p.tree.schema.features)
        if f.combinator is Combinator.MULTIPLICATIVE
    ]

    def refeature(feats: Sequence[float]) -> list[float]:
        return [
            x ** alpha if i in multiplicative else x for i, x in enumerate(feats)
        ]

    return _rebuild(p, lambda v: v, refeature)


def rescale_transform(p: TreeProblem, factor: float) -> TreeProblem:
    """Scale every additive feature by a positive factor."""
    if factor <= 0:
        raise ValueError(f"scale factor must be positive, got {factor}")
    additive = [
        i
        for i, f in enumerate(p.tree.schema.features)
        if f.combinator is Combinator.ADDITIVE
    ]

    def refeature(feats: Sequence[float]) -> list[float]:
        return [x * factor if i in additive else x for i, x in enumerate(feats)]

    return _rebuild(p, lambda v: v, refeature)


def functor_commute_check(
    p: TreeProblem, transform: Callable[[TreeProblem], TreeProblem]
) -> bool:
    """Does solving commute with the transformation?

    True iff solve(transform(p)) marks exactly the edges that
    transfer_solution carries over from solve(p).
    """
    q = transform(p)
    direct = solve(q)
    transferred = transfer_solution(p, solve(p), q)
    return direct.bits == transferred.bits and direct.edge_order == transferred.edge_order


# ---------------------------------------------------------------------- #
# Persisted problem library
# ---------------------------------------------------------------------- #

@dataclass(frozen=True)
class LibraryRecord:
    problem_id: str
    file: str
    has_solution: bool
    tags: tuple[str, ...]


class ProblemLibrary:
    """One JSON file per stored problem plus an index file.

    Layout: ``<root>/index.json`` holds the record list;
    ``<root>/problems/<id>.json`` holds ``{"problem": ..., "solution": ...}``.
    Writes go through a temp file and an atomic rename; concurrent readers
    are safe, mutation assumes a single writer.
    """

    def __init__(self, storage_root: str | Path):
        self.root = Path(storage_root)

    @property
    def index_path(self) -> Path:
        return self.root / "index.json"

    def _problem_path(self, problem_id: str) -> Path:
        return self.root / "problems" / f"{problem_id}.json"

    def records(self) -> list[LibraryRecord]:
        if not self.index_path.exists():
            return []
        try:
            raw = json.loads(self.index_path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageFailure(f"cannot read index: {exc}") from exc
        return [
            LibraryRecord(
                problem_id=r["problem_id"],
                file=r["file"],
                has_solution=r["has_solution"],
                tags=tuple(r.get("tags", ())),
            )
            for r in raw
        ]

    def load(self, problem_id: str) -> tuple[TreeProblem, Solution | None]:
        path = self._problem_path(problem_id)
        if not path.exists():
            raise UnknownProblemId(problem_id)
        try:
            payload = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageFailure(f"cannot read {path}: {exc}") from exc
        problem = problem_from_dict(payload["problem"])
        solution = (
            solution_from_dict(payload["solution"]) if payload.get("solution") else None
        )
        return problem, solution

    def add(
        self,
        problem: TreeProblem,
        solution: Solution | None = None,
        problem_id: str | None = None,
        tags: Sequence[str] = (),
    ) -> str:
        """Persist a problem (and optionally its solution); returns the id.

        Auto-generated ids hash the problem content, so identical problems
        collide into DuplicateId instead of piling up.
        """
        validate_problem(problem)
        problem_payload = problem_to_dict(problem)
        if problem_id is None:
            digest = hashlib.sha256(
                json.dumps(problem_payload, sort_keys=True).encode()
            ).hexdigest()
            problem_id = digest[:12]
        if solution is not None:
            order = tuple(canonical_edge_order(problem.tree))
            if solution.edge_order != order or len(solution.bits) != len(order):
                raise InconsistentSolution(
                    "solution edge order does not match the problem's canonical order"
                )
            solution = replace(solution, problem_id=problem_id)
        records = self.records()
        if any(r.problem_id == problem_id for r in records):
            raise DuplicateId(problem_id)

        payload: dict = {"problem": problem_payload}
        if solution is not None:
            payload["solution"] = {
                "problem_id": solution.problem_id,
                "edge_order": [f"{a}→{b}" for a, b in solution.edge_order],
                "bits": list(solution.bits),
                "terminal": solution.terminal,
            }
        record = LibraryRecord(
            problem_id=problem_id,
            file=f"problems/{problem_id}.json",
            has_solution=solution is not None,
            tags=tuple(tags),
        )
        try:
            (self.root / "problems").mkdir(parents=True, exist_ok=True)
            self._atomic_write(self._problem_path(problem_id), json.dumps(payload, indent=2))
            index = [r for r in records] + [record]
            index.sort(key=lambda r: r.problem_id)
            self._atomic_write(
                self.index_path,
                json.dumps(
                    [
                        {
                            "problem_id": r.problem_id,
                            "file": r.file,
                            "has_solution": r.has_solution,
                            "tags": list(r.tags),
                        }
                        for r in index
                    ],
                    indent=2,
                ),
            )
        except OSError as exc:
            raise StorageFailure(str(exc)) from exc
        return problem_id

    def _atomic_write(self, path: Path, text: str) -> None:
        tmp = path.with_suffix(f".tmp{os.getpid()}.{time.monotonic_ns()}")
        tmp.write_text(text)
        os.replace(tmp, path)

    # ------------------------------------------------------------------ #
    # Retrieval
    # ------------------------------------------------------------------ #

    def nearest(
        self, query: TreeProblem, weights: MetricWeights, limit: int
    ) -> list[tuple[str, float]]:
        """Stored problems ranked by tree distance to the query.

        Candidates must share the query's tip count and feature arity; tips
        align by label when the label sets coincide, otherwise through
        match_tips (candidates with no correspondence are skipped). Ties
        order by problem id.
        """
        validate_problem(query)
        k, m = len(query.tree.tips), len(query.tree.schema)
        scored: list[tuple[float, str]] = []
        for record in self.records():
            candidate, _ = self.load(record.problem_id)
            if len(candidate.tree.tips) != k or len(candidate.tree.schema) != m:
                continue
            if set(candidate.tree.tips) == set(query.tree.tips):
                aligned = candidate.tree
            else:
                bijection = match_tips(candidate, query)
                if bijection is None:
                    continue
                aligned = relabel_onto(candidate, bijection).tree
            distance = tree_distance(query.tree, aligned, weights)
            scored.append((distance, record.problem_id))
        scored.sort()
        return [(pid, d) for d, pid in scored[:limit]]
