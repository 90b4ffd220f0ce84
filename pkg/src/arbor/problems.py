"""Concrete tree-problem instances and their solvers.

Two instance families:

* maze problems — parsed from a character grid, reduced to a rooted tree
  (start = root, corridors collapse to length-weighted edges, dead ends and
  the goal become terminals) and solved by minimizing path length;
* decision problems — multiplicative edge weights in (0, 1], solved by
  maximizing the summed log-weight of a root-to-terminal path.

Problems serialize to a JSON document with fields ``kind``, ``features``,
``root``, ``nodes`` and ``edges``; see ``problem_to_json``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterator

from .errors import (
    Disconnected,
    InvalidProblem,
    MazeFormatError,
    MissingGoal,
    MissingStart,
    NoGoalTip,
    NonPositiveWeight,
    NonRectangular,
    NotSimplyConnected,
)
from .solutions import Solution, encode_path
from .tree import (
    Combinator,
    FeatureSchema,
    LabeledTree,
    binarize,
    build_tree,
    canonical_edge_order,
    validate,
)

__all__ = [
    "MazeGrid",
    "TreeProblem",
    "parse_maze",
    "maze_to_tree",
    "solve",
    "solve_most_probable_path",
    "solve_min_length_to_goal",
    "validate_problem",
    "problem_to_json",
    "problem_from_json",
    "decision_problem",
    "generic_problem",
]

Cell = tuple[int, int]  # (row, col)

MAZE_SCHEMA = FeatureSchema.of(("length", Combinator.ADDITIVE))
DECISION_SCHEMA = FeatureSchema.of(("probability", Combinator.MULTIPLICATIVE))


@dataclass(frozen=True)
class MazeGrid:
    width: int
    height: int
    open_cells: frozenset[Cell]
    start: Cell
    goal: Cell

    def neighbors(self, cell: Cell) -> list[Cell]:
        r, c = cell
        return [
            n
            for n in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1))
            if n in self.open_cells
        ]

    def bfs_distance(self, a: Cell, b: Cell) -> int:
        """Grid steps between two open cells (the reachability oracle)."""
        frontier, dist = [a], {a: 0}
        while frontier:
            nxt = []
            for u in frontier:
                if u == b:
                    return dist[u]
                for v in self.neighbors(u):
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        raise Disconnected(f"{b} unreachable from {a}")


@dataclass(frozen=True)
class TreeProblem:
    tree: LabeledTree
    kind: str  # "maze" | "decision" | "generic"
    objective: str  # "max_log_weight_path" | "min_length_to_goal"
    goal_tips: frozenset[str] = frozenset()


# ---------------------------------------------------------------------- #
# Maze parsing
# ---------------------------------------------------------------------- #

def parse_maze(text: str) -> MazeGrid:
    """Parse a rectangular character grid: '#' wall, '.' open, 'S' start,
    'G' goal. LF and CRLF line endings are accepted; trailing whitespace is
    not. The open-cell graph must be connected and acyclic."""
    lines = text.replace("\r\n", "\n").split("\n")
    if lines and lines[-1] == "":
        lines = lines[:-1]
    if not lines:
        raise MazeFormatError("empty maze text")
    width = len(lines[0])
    start = goal = None
    open_cells: set[Cell] = set()
    for r, line in enumerate(lines):
        if len(line) != width:
            raise NonRectangular(f"row {r} has length {len(line)}, expected {width}")
        for c, ch in enumerate(line):
            if ch == "#":
                continue
            if ch == ".":
                open_cells.add((r, c))
            elif ch == "S":
                if start is not None:
                    raise MazeFormatError("more than one start cell")
                start = (r, c)
                open_cells.add((r, c))
            elif ch == "G":
                if goal is not None:
                    raise MazeFormatError("more than one goal cell")
                goal = (r, c)
                open_cells.add((r, c))
            else:
                raise MazeFormatError(f"invalid character {ch!r} at row {r}, col {c}")
    if start is None:
        raise MissingStart("no 'S' cell")
    if goal is None:
        raise MissingGoal("no 'G' cell")

    grid = MazeGrid(
        width=width,
        height=len(lines),
        open_cells=frozenset(open_cells),
        start=start,
        goal=goal,
    )
    reached = {start}
    frontier = [start]
    while frontier:
        frontier = [
            v for u in frontier for v in grid.neighbors(u) if v not in reached
        ]
        reached.update(frontier)
    if reached != open_cells:
        missing = sorted(open_cells - reached)
        raise Disconnected(f"open cells unreachable from start: {missing[:5]}")
    adjacencies = sum(len(grid.neighbors(u)) for u in open_cells) // 2
    if adjacencies != len(open_cells) - 1:
        raise NotSimplyConnected(
            f"{len(open_cells)} open cells but {adjacencies} adjacencies; "
            "the passage graph has a loop"
        )
    return grid


# ---------------------------------------------------------------------- #
# Maze -> tree reduction
# ---------------------------------------------------------------------- #

def _cell_name(prefix: str, cell: Cell) -> str:
    return f"{prefix}_r{cell[0]}c{cell[1]}"


def maze_to_tree(maze: MazeGrid) -> TreeProblem:
    """Reduce a simply connected maze to a binary tree problem.

    Kept nodes are the start (root), the goal, dead ends, and junctions
    (>= 3 open neighbors); corridors between them collapse to single edges
    whose length counts grid steps. The goal is a terminal with outcome 1
    even mid-corridor (cells beyond it are irrelevant to the objective and
    are pruned); dead ends carry outcome 0. The skeleton is binarized.
    """
    def is_node(cell: Cell) -> bool:
        return (
            cell == maze.start
            or cell == maze.goal
            or len(maze.neighbors(cell)) != 2
        )

    def node_label(cell: Cell) -> str:
        if cell == maze.goal:
            return "goal"
        if cell == maze.start:
            return "start"
        if len(maze.neighbors(cell)) == 1:
            return _cell_name("dead", cell)
        return _cell_name("node", cell)

    edges: list[tuple[str, str, list[float]]] = []
    labels: dict[str, list[float]] = {}
    stack: list[tuple[Cell, Cell | None]] = [(maze.start, None)]
    while stack:
        cell, came_from = stack.pop()
        if cell == maze.goal:
            labels[node_label(cell)] = [1.0]
            continue  # the game ends at the goal; do not expand past it
        for step in maze.neighbors(cell):
            if step == came_from:
                continue
            prev, cur, length = cell, step, 1
            while not is_node(cur):
                (nxt,) = [n for n in maze.neighbors(cur) if n != prev]
                prev, cur, length = cur, nxt, length + 1
            edges.append((node_label(cell), node_label(cur), [float(length)]))
            stack.append((cur, prev))
    labels.setdefault("goal", [1.0])
    for parent, child, _ in edges:
        if child.startswith("dead_"):
            labels[child] = [0.0]

    skeleton = build_tree("start", edges, MAZE_SCHEMA, vertex_labels=labels)
    tree = binarize(skeleton)
    validate(tree)
    return TreeProblem(
        tree=tree,
        kind="maze",
        objective="min_length_to_goal",
        goal_tips=frozenset({"goal"}),
    )


# ---------------------------------------------------------------------- #
# Solvers
# ---------------------------------------------------------------------- #

def _root_to_terminal_paths(p: TreeProblem) -> Iterator[tuple[str, list[tuple[str, str]]]]:
    """All (terminal, edge list) pairs, in canonical order."""
    tree = p.tree

    def walk(u: str, acc: list[tuple[str, str]]) -> Iterator[tuple[str, list[tuple[str, str]]]]:
        if tree.nodes[u].is_terminal:
            yield u, list(acc)
            return
        for c in tree.ordered_children(u):
            acc.append((u, c))
            yield from walk(c, acc)
            acc.pop()

    yield from walk(tree.root, [])


def _path_key(tree: LabeledTree, edges: list[tuple[str, str]]) -> tuple[int, ...]:
    """Tie-break key: tuple of canonical edge indices along the path."""
    index = {e: i for i, e in enumerate(canonical_edge_order(tree))}
    return tuple(index[e] for e in edges)


def solve_most_probable_path(p: TreeProblem) -> Solution:
    """Path maximizing the summed log of edge weights (feature 0).

    Ties break toward the lexicographically smallest canonical edge-index
    sequence, making the solver total and deterministic.
    """
    tree = p.tree
    for e, feats in tree.edges.items():
        if feats[0] <= 0.0:
            raise NonPositiveWeight(f"edge {e} has weight {feats[0]!r}; log undefined")
    best: tuple[float, tuple[int, ...], str] | None = None
    for terminal, edges in _root_to_terminal_paths(p):
        score = sum(math.log(tree.edges[e][0]) for e in edges)
        key = _path_key(tree, edges)
        if best is None or score > best[0] or (score == best[0] and key < best[1]):
            best = (score, key, terminal)
    if best is None:
        raise InvalidProblem("problem has no terminal nodes")
    return encode_path(tree, best[2])


def solve_min_length_to_goal(p: TreeProblem) -> Solution:
    """Shortest root-to-goal path by total edge length (feature 0)."""
    tree = p.tree
    goals = {g for g in p.goal_tips if g in tree.nodes}
    if not goals:
        raise NoGoalTip(f"no goal tip present in the tree (wanted {sorted(p.goal_tips)})")
    best: tuple[float, tuple[int, ...], str] | None = None
    for terminal, edges in _root_to_terminal_paths(p):
        if terminal not in goals:
            continue
        length = sum(tree.edges[e][0] for e in edges)
        key = _path_key(tree, edges)
        if best is None or length < best[0] or (length == best[0] and key < best[1]):
            best = (length, key, terminal)
    assert best is not None
    return encode_path(tree, best[2])


def solve(p: TreeProblem) -> Solution:
    """Dispatch to the solver matching the problem's objective."""
    if p.objective == "min_length_to_goal":
        return solve_min_length_to_goal(p)
    if p.objective == "max_log_weight_path":
        return solve_most_probable_path(p)
    raise InvalidProblem(f"unknown objective {p.objective!r}")


# ---------------------------------------------------------------------- #
# Problem validation and constructors
# ---------------------------------------------------------------------- #

def validate_problem(p: TreeProblem, strict: bool = False) -> None:
    """Check kind-specific invariants.

    Maze problems need an additive, strictly positive feature 0 and a
    nonempty goal-tip set with 0/1 terminal outcomes. Decision problems need
    a multiplicative feature 0 in (0, 1]; with ``strict`` the children of
    every internal node must have weights summing to 1 within 1e-9.
    """
    validate(p.tree)
    if p.kind not in ("maze", "decision", "generic"):
        raise InvalidProblem(f"unknown kind {p.kind!r}")
    if p.kind == "maze":
        if p.tree.schema.features[0].combinator is not Combinator.ADDITIVE:
            raise InvalidProblem("maze feature 0 must be additive")
        if not p.goal_tips or not p.goal_tips <= set(p.tree.tips):
            raise NoGoalTip(f"goal tips {sorted(p.goal_tips)} not a nonempty tip subset")
        for (a, b), feats in p.tree.edges.items():
            if feats[0] < 0.0:
                raise InvalidProblem(f"corridor ({a}, {b}) has negative length")
        for t in p.tree.tips:
            outcome = p.tree.nodes[t].labels[:1]
            expected = 1.0 if t in p.goal_tips else 0.0
            if outcome and outcome[0] != expected:
                raise InvalidProblem(f"terminal {t!r} outcome {outcome[0]} != {expected}")
    elif p.kind == "decision":
        if p.tree.schema.features[0].combinator is not Combinator.MULTIPLICATIVE:
            raise InvalidProblem("decision feature 0 must be multiplicative")
        for e, feats in p.tree.edges.items():
            if not (0.0 < feats[0] <= 1.0):
                raise InvalidProblem(f"edge {e} weight {feats[0]} outside (0, 1]")
        if strict:
            for v, node in p.tree.nodes.items():
                if node.is_terminal:
                    continue
                total = sum(p.tree.edges[(v, c)][0] for c in p.tree.children[v])
                if abs(total - 1.0) > 1e-9:
                    raise InvalidProblem(
                        f"children of {v!r} have weights summing to {total!r}, not 1"
                    )


def decision_problem(tree: LabeledTree) -> TreeProblem:
    return TreeProblem(tree=tree, kind="decision", objective="max_log_weight_path")


def generic_problem(tree: LabeledTree) -> TreeProblem:
    return TreeProblem(tree=tree, kind="generic", objective="max_log_weight_path")


# ---------------------------------------------------------------------- #
# JSON problem format
# ---------------------------------------------------------------------- #

def problem_to_dict(p: TreeProblem) -> dict:
    tree = p.tree
    node_ids = sorted(tree.nodes)
    return {
        "kind": p.kind,
        "features": [
            {"name": f.name, "combinator": f.combinator.value}
            for f in tree.schema.features
        ],
        "root": tree.root,
        "nodes": [
            {
                "id": v,
                "terminal": tree.nodes[v].is_terminal,
                "labels": list(tree.nodes[v].labels),
            }
            for v in node_ids
        ],
        "edges": [
            {"from": a, "to": b, "features": list(tree.edges[(a, b)])}
            for a, b in canonical_edge_order(tree)
        ],
    }


def problem_from_dict(payload: dict, strict: bool = False) -> TreeProblem:
    kind = payload["kind"]
    if kind not in ("maze", "decision", "generic"):
        raise InvalidProblem(f"unknown kind {kind!r}")
    schema = FeatureSchema.of(
        *[(f["name"], f["combinator"]) for f in payload["features"]]
    )
    declared = {n["id"]: n for n in payload["nodes"]}
    tree = build_tree(
        payload["root"],
        [(e["from"], e["to"], e["features"]) for e in payload["edges"]],
        schema,
        vertex_labels={n["id"]: n["labels"] for n in payload["nodes"]},
    )
    if set(declared) != set(tree.nodes):
        stray = set(declared) ^ set(tree.nodes)
        raise InvalidProblem(f"declared nodes and edge endpoints disagree: {sorted(stray)}")
    for v, node in tree.nodes.items():
        if declared[v]["terminal"] != node.is_terminal:
            raise InvalidProblem(
                f"node {v!r} declared terminal={declared[v]['terminal']} but has "
                f"{'no ' if node.is_terminal else ''}children"
            )
    if kind == "maze":
        goal_tips = frozenset(
            t for t in tree.tips if tree.nodes[t].labels[:1] == (1.0,)
        )
        problem = TreeProblem(
            tree=tree, kind=kind, objective="min_length_to_goal", goal_tips=goal_tips
        )
    else:
        problem = TreeProblem(tree=tree, kind=kind, objective="max_log_weight_path")
    validate_problem(problem, strict=strict)
    return problem


def problem_to_json(p: TreeProblem) -> str:
    return json.dumps(problem_to_dict(p), indent=2)


def problem_from_json(text: str, strict: bool = False) -> TreeProblem:
    return problem_from_dict(json.loads(text), strict=strict)
