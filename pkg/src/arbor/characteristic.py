"""Characteristic matrices and characteristic vectors of labeled trees.

A binary tree with k tips and m edge features maps to an
(m+1) x (C(k,2)+k) matrix. Row 1 encodes topology: for each tip pair the
number of edges from the root to the pair's most recent common ancestor,
then a block of ones for the pendant columns. Row l+1 holds feature l of
the edge entering that ancestor (zero when the ancestor is the root) and,
in the pendant block, feature l of the edge entering each tip.

Columns are ordered canonically: all tip pairs (i, j) with i < j in
ascending tip-label order, then one pendant column per tip, ascending.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import (
    DimensionMismatch,
    FewerThanTwoTips,
    InvalidWeights,
    NotBinary,
)
from .tree import LabeledTree, mrca

__all__ = [
    "ColumnTag",
    "CharacteristicMatrix",
    "MetricWeights",
    "characteristic_matrix",
    "characteristic_vector",
    "matrix_to_csv",
    "matrix_to_json",
]


@dataclass(frozen=True)
class ColumnTag:
    """Identifies one matrix column: a tip pair or a single pendant tip."""

    kind: str  # "pair" | "pendant"
    tips: tuple[str, ...]

    def __str__(self) -> str:
        if self.kind == "pair":
            return "".join(self.tips)
        return f"p_{self.tips[0]}"

    @staticmethod
    def pair(i: str, j: str) -> "ColumnTag":
        return ColumnTag("pair", (i, j))

    @staticmethod
    def pendant(i: str) -> "ColumnTag":
        return ColumnTag("pendant", (i,))


@dataclass(frozen=True)
class CharacteristicMatrix:
    entries: np.ndarray  # (m+1) x N, read-only
    column_index: tuple[ColumnTag, ...]
    tip_labels: tuple[str, ...]
    source_id: str = ""

    def __post_init__(self) -> None:
        k = len(self.tip_labels)
        n_cols = comb(k, 2) + k
        if self.entries.shape != (self.entries.shape[0], n_cols):
            raise DimensionMismatch(
                f"matrix has {self.entries.shape[1]} columns, expected {n_cols}"
            )
        if len(self.column_index) != n_cols:
            raise DimensionMismatch("column_index length does not match matrix width")
        self.entries.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def n_cols(self) -> int:
        return self.entries.shape[1]

    def with_entries(self, entries: np.ndarray, source_id: str) -> "CharacteristicMatrix":
        return CharacteristicMatrix(
            entries=np.array(entries, dtype=float),
            column_index=self.column_index,
            tip_labels=self.tip_labels,
            source_id=source_id,
        )


@dataclass(frozen=True)
class MetricWeights:
    """Convex-combination weights over the matrix rows: entries in [0, 1]
    summing to one."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(not (0.0 <= v <= 1.0) for v in self.values):
            raise InvalidWeights(f"weights must lie in [0, 1], got {self.values}")
        if abs(sum(self.values) - 1.0) > 1e-12:
            raise InvalidWeights(f"weights must sum to 1, got {sum(self.values)!r}")

    def __len__(self) -> int:
        return len(self.values)

    @staticmethod
    def uniform(n: int) -> "MetricWeights":
        return MetricWeights(tuple(1.0 / n for _ in range(n)))

    @staticmethod
    def topology_only(n: int) -> "MetricWeights":
        return MetricWeights((1.0,) + (0.0,) * (n - 1))


def column_tags(tip_labels: tuple[str, ...]) -> tuple[ColumnTag, ...]:
    pairs = [ColumnTag.pair(i, j) for i, j in itertools.combinations(tip_labels, 2)]
    pendants = [ColumnTag.pendant(i) for i in tip_labels]
    return tuple(pairs + pendants)


def characteristic_matrix(tree: LabeledTree, source_id: str = "") -> CharacteristicMatrix:
    """Encode a valid binary tree as its characteristic matrix.

    Requires at least two tips and a binary tree (run ``binarize`` first).
    """
    tips = tree.tips
    k = len(tips)
    if k < 2:
        raise FewerThanTwoTips(f"need >= 2 tips, found {k}")
    if not tree.is_binary():
        bad = [
            v
            for v, n in tree.nodes.items()
            if not n.is_terminal and len(tree.children[v]) != 2
        ]
        raise NotBinary(f"internal nodes without exactly 2 children: {bad}")

    m = len(tree.schema)
    if m + 1 >= comb(k, 2) + k:
        warnings.warn(
            f"feature rows (m+1={m + 1}) >= columns ({comb(k, 2) + k}); the "
            "characteristic matrix is wider than it is tall only in the "
            "usual regime",
            stacklevel=2,
        )

    tags = column_tags(tips)
    entries = np.zeros((m + 1, len(tags)), dtype=float)
    for col, tag in enumerate(tags):
        if tag.kind == "pair":
            i, j = tag.tips
            anc = mrca(tree, i, j)
            entries[0, col] = tree.depth[anc]
            if anc != tree.root:
                feats = tree.edges[(tree.parent[anc], anc)]
                entries[1:, col] = feats
        else:
            (i,) = tag.tips
            entries[0, col] = 1.0
            entries[1:, col] = tree.edges[(tree.parent[i], i)]
    return CharacteristicMatrix(
        entries=entries, column_index=tags, tip_labels=tips, source_id=source_id
    )


def characteristic_vector(matrix: CharacteristicMatrix, weights: MetricWeights) -> np.ndarray:
    """Convex combination of the matrix rows: a 1 x N fingerprint of the tree."""
    if len(weights) != matrix.n_rows:
        raise DimensionMismatch(
            f"{len(weights)} weights for a matrix with {matrix.n_rows} rows"
        )
    return np.asarray(weights.values, dtype=float) @ matrix.entries


# ---------------------------------------------------------------------- #
# Export
# ---------------------------------------------------------------------- #

def format_number(x: float) -> str:
    """Shortest round-trip decimal; integral values render without a point."""
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def matrix_to_csv(matrix: CharacteristicMatrix) -> str:
    """Header row of column tags, one matrix row per line."""
    lines = [",".join(str(t) for t in matrix.column_index)]
    for row in matrix.entries:
        lines.append(",".join(format_number(x) for x in row))
    return "\n".join(lines) + "\n"


def matrix_to_json(matrix: CharacteristicMatrix) -> str:
    payload = {
        "source_id": matrix.source_id,
        "tip_labels": list(matrix.tip_labels),
        "columns": [str(t) for t in matrix.column_index],
        "entries": [[float(x) for x in row] for row in matrix.entries],
    }
    return json.dumps(payload, indent=2)
