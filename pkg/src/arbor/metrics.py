"""Distance between tree problems through their characteristic vectors."""

from __future__ import annotations

import numpy as np

from .characteristic import (
    CharacteristicMatrix,
    MetricWeights,
    characteristic_matrix,
    characteristic_vector,
)
from .errors import FeatureArityMismatch, TipSetMismatch
from .tree import LabeledTree

__all__ = ["tree_distance", "matrix_distance"]


def tree_distance(a: LabeledTree, b: LabeledTree, weights: MetricWeights) -> float:
    """Euclidean distance between the trees' weighted characteristic vectors.

    Both trees must be binary with the same tip-label set and feature arity;
    their characteristic columns then align canonically.
    """
    if a.tips != b.tips:
        raise TipSetMismatch(f"tip sets differ: {a.tips} vs {b.tips}")
    if len(a.schema) != len(b.schema):
        raise FeatureArityMismatch(
            f"feature arities differ: {len(a.schema)} vs {len(b.schema)}"
        )
    return matrix_distance(characteristic_matrix(a), characteristic_matrix(b), weights)


def matrix_distance(
    m_a: CharacteristicMatrix, m_b: CharacteristicMatrix, weights: MetricWeights
) -> float:
    """Distance between already-encoded problems (columns must align)."""
    va = characteristic_vector(m_a, weights)
    vb = characteristic_vector(m_b, weights)
    return float(np.linalg.norm(va - vb))
