"""Rooted labeled trees with feature-labeled edges.

A :class:`LabeledTree` is an arborescence: one root, every other node has
exactly one parent, terminals carry unique labels (their node ids), and each
edge carries a fixed-arity real feature vector described by a
:class:`FeatureSchema`. Trees are immutable after construction; all
operations here are pure functions.

Canonical conventions used throughout the package:

* children are ordered by the smallest tip label in their subtree,
* edge indexing follows the preorder traversal under that child order,
* internal node ids are arbitrary and excluded from tree identity; only tip
  labels, topology, and edge features matter.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    CycleDetected,
    EmptyTree,
    FeatureArityMismatch,
    MalformedTree,
    MultipleParents,
    NonFiniteFeature,
    NotATerminal,
    RootIsTerminal,
    SameTip,
    TerminalHasChild,
    UnreachableNode,
)

Edge = tuple[str, str]


class Combinator(str, Enum):
    """How a feature accumulates along a path; fixes the neutral element
    used for edges inserted during binarization."""

    ADDITIVE = "additive"          # combine by +, neutral 0
    MULTIPLICATIVE = "multiplicative"  # combine by *, neutral 1

    @property
    def neutral(self) -> float:
        return 0.0 if self is Combinator.ADDITIVE else 1.0

    def combine(self, a: float, b: float) -> float:
        return a + b if self is Combinator.ADDITIVE else a * b


@dataclass(frozen=True)
class Feature:
    name: str
    combinator: Combinator


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered edge-feature declaration; its length is the feature arity of
    every edge in the owning tree."""

    features: tuple[Feature, ...]

    def __post_init__(self) -> None:
        names = [f.name for f in self.features]
        if any(not n for n in names):
            raise ValueError("feature names must be non-empty")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate feature names: {names}")

    def __len__(self) -> int:
        return len(self.features)

    @property
    def neutral(self) -> tuple[float, ...]:
        return tuple(f.combinator.neutral for f in self.features)

    def combine(self, a: Sequence[float], b: Sequence[float]) -> tuple[float, ...]:
        return tuple(
            f.combinator.combine(x, y) for f, x, y in zip(self.features, a, b)
        )

    @staticmethod
    def of(*specs: tuple[str, str | Combinator]) -> "FeatureSchema":
        """Shorthand: ``FeatureSchema.of(("length", "additive"))``."""
        return FeatureSchema(
            tuple(Feature(name, Combinator(comb)) for name, comb in specs)
        )


@dataclass(frozen=True)
class Node:
    kind: str  # "internal" | "terminal"
    labels: tuple[float, ...] = ()

    @property
    def is_terminal(self) -> bool:
        return self.kind == "terminal"


@dataclass(frozen=True)
class LabeledTree:
    """Rooted tree with labeled edges and labeled terminal nodes.

    ``nodes`` maps node id to :class:`Node`; ``edges`` maps (parent, child)
    to the edge feature vector. Terminal node ids double as tip labels.
    """

    root: str
    nodes: Mapping[str, Node]
    edges: Mapping[Edge, tuple[float, ...]]
    schema: FeatureSchema

    # Derived maps are cached on first use; the dataclass is frozen so the
    # underlying data never changes after construction.

    @cached_property
    def children(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {v: [] for v in self.nodes}
        for parent, child in self.edges:
            out[parent].append(child)
        return {v: tuple(cs) for v, cs in out.items()}

    @cached_property
    def parent(self) -> dict[str, str]:
        return {child: parent for parent, child in self.edges}

    @cached_property
    def tips(self) -> tuple[str, ...]:
        """Terminal labels in ascending order."""
        return tuple(sorted(v for v, n in self.nodes.items() if n.is_terminal))

    @cached_property
    def depth(self) -> dict[str, int]:
        """Edge count from the root to each node."""
        out = {self.root: 0}
        stack = [self.root]
        while stack:
            u = stack.pop()
            for c in self.children.get(u, ()):
                out[c] = out[u] + 1
                stack.append(c)
        return out

    @cached_property
    def min_tip(self) -> dict[str, str]:
        """Smallest tip label in each node's subtree (drives canonical
        child ordering)."""
        out: dict[str, str] = {}

        def visit(u: str) -> str:
            kids = self.children.get(u, ())
            out[u] = u if not kids else min(visit(c) for c in kids)
            return out[u]

        visit(self.root)
        return out

    def ordered_children(self, u: str) -> tuple[str, ...]:
        return tuple(sorted(self.children.get(u, ()), key=lambda c: self.min_tip[c]))

    def path_to_root(self, u: str) -> list[str]:
        """Nodes from ``u`` up to and including the root."""
        out = [u]
        while out[-1] != self.root:
            out.append(self.parent[out[-1]])
        return out

    def tips_below(self, u: str) -> frozenset[str]:
        """Tip labels in the subtree rooted at ``u``."""
        acc: set[str] = set()
        stack = [u]
        while stack:
            v = stack.pop()
            kids = self.children.get(v, ())
            if not kids and self.nodes[v].is_terminal:
                acc.add(v)
            stack.extend(kids)
        return frozenset(acc)

    @cached_property
    def internal_clades(self) -> frozenset[frozenset[str]]:
        """Tip-set partitions admitted by internal edges: for each edge whose
        child is internal, the set of tips below that child."""
        return frozenset(
            self.tips_below(child)
            for (_, child) in self.edges
            if not self.nodes[child].is_terminal
        )

    def is_binary(self) -> bool:
        return all(
            len(self.children[v]) == 2
            for v, n in self.nodes.items()
            if not n.is_terminal
        )


def build_tree(
    root: str,
    edges: Iterable[tuple[str, str, Sequence[float]]],
    schema: FeatureSchema,
    vertex_labels: Mapping[str, Sequence[float]] | None = None,
    check: bool = True,
) -> LabeledTree:
    """Construct a tree from edge triples, inferring node kinds.

    Nodes with no outgoing edge are terminals; everything else is internal.
    ``vertex_labels`` attaches outcome vectors to nodes (usually terminals).
    """
    edge_map: dict[Edge, tuple[float, ...]] = {}
    ids: set[str] = {root}
    parents: set[str] = set()
    for parent, child, features in edges:
        edge_map[(parent, child)] = tuple(float(x) for x in features)
        ids.update((parent, child))
        parents.add(parent)
    labels = vertex_labels or {}
    nodes = {
        v: Node(
            kind="internal" if v in parents else "terminal",
            labels=tuple(float(x) for x in labels.get(v, ())),
        )
        for v in ids
    }
    tree = LabeledTree(root=root, nodes=nodes, edges=edge_map, schema=schema)
    if check:
        validate(tree)
    return tree


# ---------------------------------------------------------------------- #
# Validation
# ---------------------------------------------------------------------- #

def validate(tree: LabeledTree) -> None:
    """Check every LabeledTree invariant; raise the first violation found.

    Raises CycleDetected, MultipleParents, UnreachableNode, TerminalHasChild,
    FeatureArityMismatch, NonFiniteFeature (each naming the offending node or
    edge), or MalformedTree for structural defects outside that list.
    """
    if not tree.nodes:
        raise EmptyTree("tree has no nodes")
    if tree.root not in tree.nodes:
        raise MalformedTree(f"root {tree.root!r} is not a declared node")

    seen_children: set[str] = set()
    for parent, child in tree.edges:
        if parent not in tree.nodes or child not in tree.nodes:
            raise MalformedTree(f"edge ({parent!r}, {child!r}) references an undeclared node")
        if child in seen_children:
            raise MultipleParents(f"node {child!r} has more than one parent")
        seen_children.add(child)
    if tree.root in seen_children:
        # The root's parent chain necessarily loops back into the tree.
        raise CycleDetected(f"root {tree.root!r} has an incoming edge")

    # Walk every parent chain; a chain longer than |V| must revisit a node.
    limit = len(tree.nodes)
    for v in tree.nodes:
        u, steps = v, 0
        while u != tree.root:
            if u not in tree.parent:
                raise UnreachableNode(f"node {u!r} is not reachable from the root")
            u = tree.parent[u]
            steps += 1
            if steps > limit:
                raise CycleDetected(f"cycle through node {v!r}")

    for v, node in tree.nodes.items():
        kids = tree.children.get(v, ())
        if node.is_terminal and kids:
            raise TerminalHasChild(f"terminal {v!r} has children {kids}")
        if not node.is_terminal and not kids:
            raise MalformedTree(f"internal node {v!r} has no children")

    arity = len(tree.schema)
    for edge, features in tree.edges.items():
        if len(features) != arity:
            raise FeatureArityMismatch(
                f"edge {edge} has {len(features)} features, schema has {arity}"
            )
        for x in features:
            if not math.isfinite(x):
                raise NonFiniteFeature(f"edge {edge} has non-finite feature {x!r}")


# ---------------------------------------------------------------------- #
# Tip queries
# ---------------------------------------------------------------------- #

def mrca(tree: LabeledTree, tip_i: str, tip_j: str) -> str:
    """Most recent common ancestor of two distinct tips."""
    if tip_i == tip_j:
        raise SameTip(f"tips must differ, got {tip_i!r} twice")
    for t in (tip_i, tip_j):
        if t not in tree.nodes or not tree.nodes[t].is_terminal:
            raise NotATerminal(f"{t!r} is not a terminal node")
    ancestors_i = set(tree.path_to_root(tip_i))
    for u in tree.path_to_root(tip_j):
        if u in ancestors_i:
            return u
    raise MalformedTree("no common ancestor; tree is not rooted correctly")


def same_topology(a: LabeledTree, b: LabeledTree) -> bool:
    """True iff both trees have the same tip labels and the same set of
    tip-set partitions induced by their internal edges."""
    if a.tips != b.tips:
        return False
    return a.internal_clades == b.internal_clades


def tree_equal(a: LabeledTree, b: LabeledTree) -> bool:
    """True iff the trees have the same topology and, matching edges through
    the tip-partition correspondence, identical feature vectors. Internal
    node ids are not part of tree identity."""
    if not same_topology(a, b):
        return False

    def match(u: str, v: str) -> bool:
        ka, kb = a.ordered_children(u), b.ordered_children(v)
        if a.nodes[u].is_terminal != b.nodes[v].is_terminal:
            return False
        if a.nodes[u].is_terminal:
            return u == v
        if len(ka) != len(kb):
            return False
        for ca, cb in zip(ka, kb):
            if a.edges[(u, ca)] != b.edges[(v, cb)]:
                return False
            if not match(ca, cb):
                return False
        return True

    return match(a.root, b.root)


# ---------------------------------------------------------------------- #
# Binarization
# ---------------------------------------------------------------------- #

def binarize(tree: LabeledTree) -> LabeledTree:
    """Return the canonical binary form of ``tree``.

    Unary chains collapse into single edges, combining features per the
    schema combinators. Nodes with more than two children become left-leaning
    chains of binary nodes; inserted edges carry the neutral feature vector.
    Tip labels and the root are preserved. A root whose only child is a
    terminal is left as-is (the one-tip degenerate case).
    """
    if not tree.nodes:
        raise EmptyTree("cannot binarize an empty tree")
    if tree.nodes[tree.root].is_terminal:
        raise RootIsTerminal(f"root {tree.root!r} is terminal")

    schema = tree.schema
    counter = itertools.count()
    taken = set(tree.nodes)

    def fresh_id() -> str:
        while True:
            cand = f"_b{next(counter)}"
            if cand not in taken:
                taken.add(cand)
                return cand

    def follow(child: str, feats: tuple[float, ...]) -> tuple[str, tuple[float, ...]]:
        # Collapse a unary corridor hanging below `child`.
        while not tree.nodes[child].is_terminal and len(tree.children[child]) == 1:
            (grandchild,) = tree.children[child]
            feats = schema.combine(feats, tree.edges[(child, grandchild)])
            child = grandchild
        return child, feats

    out_nodes: dict[str, Node] = {}
    out_edges: dict[Edge, tuple[float, ...]] = {}

    def emit(u: str, entries: list[tuple[str, tuple[float, ...]]]) -> None:
        # `entries` are the (already collapsed) children of `u`, ordered
        # by smallest tip label; expand >2-way branchings into a chain.
        out_nodes[u] = Node(kind="internal", labels=tree.nodes.get(u, Node("internal")).labels)
        while len(entries) > 2:
            first, rest = entries[0], entries[1:]
            aux = fresh_id()
            out_edges[(u, first[0])] = first[1]
            build(first[0])
            out_edges[(u, aux)] = schema.neutral
            out_nodes[aux] = Node(kind="internal")
            u, entries = aux, rest
        for child, feats in entries:
            out_edges[(u, child)] = feats
            build(child)

    def build(u: str) -> None:
        if tree.nodes[u].is_terminal:
            out_nodes[u] = tree.nodes[u]
            return
        entries = [
            follow(c, tree.edges[(u, c)]) for c in tree.children[u]
        ]
        entries.sort(key=lambda e: tree.min_tip[e[0]])
        emit(u, entries)

    # The root cannot be collapsed into a parent edge; if it is unary with an
    # internal child, push its single edge down into each grandchild edge so
    # path sums are preserved.
    root_entries = [
        follow(c, tree.edges[(tree.root, c)]) for c in tree.children[tree.root]
    ]
    if len(root_entries) == 1 and not tree.nodes[root_entries[0][0]].is_terminal:
        lifted, feats = root_entries[0]
        root_entries = [
            follow(c, schema.combine(feats, tree.edges[(lifted, c)]))
            for c in tree.children[lifted]
        ]
    root_entries.sort(key=lambda e: tree.min_tip[e[0]])
    emit(tree.root, root_entries)

    return LabeledTree(root=tree.root, nodes=out_nodes, edges=out_edges, schema=schema)


# ---------------------------------------------------------------------- #
# Canonical edge order
# ---------------------------------------------------------------------- #

def canonical_edge_order(tree: LabeledTree) -> list[Edge]:
    """Deterministic edge indexing: preorder from the root, children visited
    in ascending order of the smallest tip label in their subtree."""
    out: list[Edge] = []

    def visit(u: str) -> None:
        for c in tree.ordered_children(u):
            out.append((u, c))
            visit(c)

    visit(tree.root)
    return out


def preorder_nodes(tree: LabeledTree) -> Iterator[str]:
    """Nodes in canonical preorder."""
    stack = [tree.root]
    while stack:
        u = stack.pop()
        yield u
        stack.extend(reversed(tree.ordered_children(u)))
