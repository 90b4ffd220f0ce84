"""Random and exhaustive generators for trees, problems, and mazes.

Test and experiment plumbing: everything here is deterministic given a
``random.Random`` instance, so suites can pin seeds.
"""

from __future__ import annotations

import random
import string
from typing import Iterator

from .problems import (
    DECISION_SCHEMA,
    MAZE_SCHEMA,
    MazeGrid,
    TreeProblem,
    decision_problem,
    maze_to_tree,
)
from .tree import Combinator, FeatureSchema, LabeledTree, build_tree

__all__ = [
    "tip_names",
    "random_binary_topology",
    "all_binary_topologies",
    "topology_to_tree",
    "random_binary_tree",
    "random_decision_problem",
    "random_maze_text",
    "random_maze_problem",
]

# Nested-pair representation of a rooted binary topology: a tip label, or a
# pair (left, right) of sub-topologies.
Topo = str | tuple


def tip_names(k: int) -> list[str]:
    """First k lowercase letters; enough for every suite in this package."""
    if k > len(string.ascii_lowercase):
        return [f"t{i:02d}" for i in range(k)]
    return list(string.ascii_lowercase[:k])


def _all_insertions(topo: Topo, tip: str) -> Iterator[Topo]:
    """Every topology obtained by attaching ``tip`` above some subtree."""
    yield (topo, tip)
    if isinstance(topo, tuple):
        left, right = topo
        for new_left in _all_insertions(left, tip):
            yield (new_left, right)
        for new_right in _all_insertions(right, tip):
            yield (left, new_right)


def all_binary_topologies(tips: list[str]) -> Iterator[Topo]:
    """All rooted binary topologies over the given labeled tips
    ((2k-3)!! of them)."""
    if not tips:
        return
    if len(tips) == 1:
        yield tips[0]
        return

    def grow(topo: Topo, remaining: list[str]) -> Iterator[Topo]:
        if not remaining:
            yield topo
            return
        head, rest = remaining[0], remaining[1:]
        for bigger in _all_insertions(topo, head):
            yield from grow(bigger, rest)

    yield from grow(tips[0], tips[1:])


def random_binary_topology(rng: random.Random, tips: list[str]) -> Topo:
    """Uniform-ish rooted binary topology by random sequential insertion."""
    topo: Topo = tips[0]
    for tip in tips[1:]:
        options = list(_all_insertions(topo, tip))
        topo = rng.choice(options)
    return topo


def topology_to_tree(
    topo: Topo,
    schema: FeatureSchema,
    feature_fn,
    vertex_labels: dict | None = None,
    root_id: str = "r",
) -> LabeledTree:
    """Materialize a nested-pair topology; ``feature_fn(parent, child)``
    supplies each edge's feature vector."""
    counter = [0]
    edges: list[tuple[str, str, list[float]]] = []

    def emit(node: Topo, parent: str | None) -> str:
        if isinstance(node, str):
            name = node
        else:
            counter[0] += 1
            name = root_id if parent is None else f"i{counter[0]}"
            for sub in node:
                child = emit(sub, name)
                edges.append((name, child, list(feature_fn(name, child))))
        if parent is None and isinstance(node, str):
            raise ValueError("topology with a single tip has no root edge")
        return name

    emit(topo, None)
    return build_tree(root_id, edges, schema, vertex_labels=vertex_labels)


def random_binary_tree(
    rng: random.Random,
    k: int,
    m: int = 1,
    combinator: Combinator = Combinator.ADDITIVE,
    low: float = 0.1,
    high: float = 9.9,
) -> LabeledTree:
    """Random binary tree with k tips and m features drawn from [low, high]."""
    schema = FeatureSchema.of(
        *[(f"f{i}", combinator) for i in range(m)]
    )
    topo = random_binary_topology(rng, tip_names(k))
    return topology_to_tree(
        topo, schema, lambda a, b: [rng.uniform(low, high) for _ in range(m)]
    )


def random_decision_problem(rng: random.Random, k: int) -> TreeProblem:
    """Random binary decision problem with weights in (0.05, 0.95)."""
    topo = random_binary_topology(rng, tip_names(k))
    tree = topology_to_tree(
        topo, DECISION_SCHEMA, lambda a, b: [rng.uniform(0.05, 0.95)]
    )
    return decision_problem(tree)


# ---------------------------------------------------------------------- #
# Mazes
# ---------------------------------------------------------------------- #

def random_maze_text(rng: random.Random, cell_cols: int = 5, cell_rows: int = 5) -> str:
    """Perfect maze via randomized depth-first carving on a cell lattice.

    The character grid is (2*cell_cols+1) wide and (2*cell_rows+1) tall, so
    5x5 cells fit inside a 11x11 grid. Start and goal land on distinct open
    cells.
    """
    width, height = 2 * cell_cols + 1, 2 * cell_rows + 1
    grid = [["#"] * width for _ in range(height)]

    def carve(r: int, c: int) -> None:
        grid[2 * r + 1][2 * c + 1] = "."
        dirs = [(-1, 0), (1, 0), (0, -1), (0, 1)]
        rng.shuffle(dirs)
        for dr, dc in dirs:
            nr, nc = r + dr, c + dc
            if 0 <= nr < cell_rows and 0 <= nc < cell_cols and grid[2 * nr + 1][2 * nc + 1] == "#":
                grid[2 * r + 1 + dr][2 * c + 1 + dc] = "."
                carve(nr, nc)

    carve(rng.randrange(cell_rows), rng.randrange(cell_cols))
    open_cells = [
        (r, c) for r in range(height) for c in range(width) if grid[r][c] == "."
    ]
    start, goal = rng.sample(open_cells, 2)
    grid[start[0]][start[1]] = "S"
    grid[goal[0]][goal[1]] = "G"
    return "\n".join("".join(row) for row in grid) + "\n"


def random_maze_problem(
    rng: random.Random, cell_cols: int = 5, cell_rows: int = 5
) -> tuple[MazeGrid, TreeProblem]:
    from .problems import parse_maze

    grid = parse_maze(random_maze_text(rng, cell_cols, cell_rows))
    return grid, maze_to_tree(grid)
