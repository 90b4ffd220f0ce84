"""Matrix morphisms between tree problems.

A morphism from problem X to problem Y (same characteristic shape) is the
N x N matrix A with A @ M_X.T = M_Y.T, built from the Moore-Penrose
pseudoinverse of M_X.T. When M_X has full row rank the defining product is
exact; otherwise A is the least-squares transformation and the stored
residual reports the Frobenius gap.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .characteristic import CharacteristicMatrix
from .errors import (
    ColumnIndexMismatch,
    NonComposable,
    NonFiniteInput,
    ShapeMismatch,
    WrongSource,
)

__all__ = [
    "Morphism",
    "pseudoinverse",
    "compute_morphism",
    "apply_morphism",
    "compose",
    "identity_morphism",
    "morphism_to_json",
]

# Singular values below RANK_RTOL * s_max are treated as zero.
RANK_RTOL = 1e-12


@dataclass(frozen=True)
class Morphism:
    source_id: str
    target_id: str
    matrix: np.ndarray  # N x N
    residual: float

    def __post_init__(self) -> None:
        n, m = self.matrix.shape
        if n != m:
            raise ShapeMismatch(f"morphism matrix must be square, got {n}x{m}")
        if not (self.residual >= 0.0 and np.isfinite(self.residual)):
            raise ShapeMismatch(f"residual must be finite and >= 0, got {self.residual}")
        self.matrix.setflags(write=False)

    @property
    def side(self) -> int:
        return self.matrix.shape[0]


def pseudoinverse(x: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudoinverse via thin SVD.

    With x = P @ diag(s) @ Q.T, returns Q @ diag(1/s) @ P.T keeping only
    singular values above RANK_RTOL times the largest. The result satisfies
    the four Penrose conditions to numerical tolerance.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("matrix contains NaN or infinite entries")
    if x.size == 0:
        return np.zeros((x.shape[1], x.shape[0]))
    p, s, qt = np.linalg.svd(x, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((x.shape[1], x.shape[0]))
    keep = s > RANK_RTOL * s[0]
    return (qt[keep].T / s[keep]) @ p[:, keep].T


def compute_morphism(m_x: CharacteristicMatrix, m_y: CharacteristicMatrix) -> Morphism:
    """Least-squares morphism from m_x's problem to m_y's problem.

    Both matrices must have identical shape and column tags. Rank-deficient
    sources yield a best-effort morphism with a nonzero residual rather
    than an error; callers should inspect ``residual``.
    """
    if m_x.entries.shape != m_y.entries.shape:
        raise ShapeMismatch(
            f"matrix shapes differ: {m_x.entries.shape} vs {m_y.entries.shape}"
        )
    if m_x.column_index != m_y.column_index:
        raise ColumnIndexMismatch("matrices are indexed over different columns")
    xt = m_x.entries.T  # N x (m+1)
    yt = m_y.entries.T
    a = yt @ pseudoinverse(xt)
    residual = float(np.linalg.norm(a @ xt - yt))
    return Morphism(
        source_id=m_x.source_id,
        target_id=m_y.source_id,
        matrix=a,
        residual=residual,
    )


def apply_morphism(f: Morphism, m: CharacteristicMatrix) -> CharacteristicMatrix:
    """Transform a characteristic matrix: rows become (f.matrix @ M.T).T."""
    if f.side != m.n_cols:
        raise ShapeMismatch(f"morphism side {f.side} != matrix columns {m.n_cols}")
    if m.source_id != f.source_id:
        raise WrongSource(
            f"morphism starts at {f.source_id!r}, matrix belongs to {m.source_id!r}"
        )
    return m.with_entries((f.matrix @ m.entries.T).T, source_id=f.target_id)


def compose(
    g: Morphism,
    f: Morphism,
    source: CharacteristicMatrix | None = None,
    target: CharacteristicMatrix | None = None,
) -> Morphism:
    """Composite morphism g after f (matrix product g.matrix @ f.matrix).

    When the endpoint matrices are supplied the residual is recomputed
    against them; otherwise it is the propagated bound
    ||A_g||_2 * res_f + res_g.
    """
    if f.target_id != g.source_id:
        raise NonComposable(
            f"cannot compose: f targets {f.target_id!r}, g starts at {g.source_id!r}"
        )
    if f.side != g.side:
        raise NonComposable(f"matrix sides differ: {f.side} vs {g.side}")
    matrix = g.matrix @ f.matrix
    if source is not None and target is not None:
        residual = float(np.linalg.norm(matrix @ source.entries.T - target.entries.T))
    else:
        residual = float(np.linalg.norm(g.matrix, 2) * f.residual + g.residual)
    return Morphism(
        source_id=f.source_id, target_id=g.target_id, matrix=matrix, residual=residual
    )


def identity_morphism(m: CharacteristicMatrix) -> Morphism:
    return Morphism(
        source_id=m.source_id,
        target_id=m.source_id,
        matrix=np.eye(m.n_cols),
        residual=0.0,
    )


def morphism_to_json(f: Morphism) -> str:
    payload = {
        "source_id": f.source_id,
        "target_id": f.target_id,
        "n": f.side,
        "matrix": [float(x) for x in f.matrix.ravel()],
        "residual": f.residual,
    }
    return json.dumps(payload, indent=2)
