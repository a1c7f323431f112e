"""Static word vectors: loading, pooled text embeddings, cosine similarity.

The vector file is the common published plain-text format, one entry per
line: ``token v1 v2 ... vd``. Dimension is autodetected from the first
line. Vectors are L2-normalized at load time, so dot products of stored
vectors are cosines.

The tokenizer here (lowercase, split on non-alphanumeric runs) is the one
shared by lexicon matching and masking; keep them in sync by importing
``tokenize`` from this module.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_TOKEN = re.compile(r"[^\W_]+")


class VectorStoreError(ValueError):
    """Malformed vector file or dimension mismatch."""


def tokenize(text: str) -> list[str]:
    """Lowercase the text and split it on runs of non-alphanumeric characters."""
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class VectorStore:
    """Immutable token -> unit-vector table; shareable across threads."""

    dimension: int
    table: dict[str, np.ndarray]

    def __contains__(self, token: str) -> bool:
        return token in self.table

    def __len__(self) -> int:
        return len(self.table)


@dataclass(frozen=True)
class PooledEmbedding:
    """Mean-pooled, renormalized text vector plus in-vocabulary coverage.

    vector is unit-norm whenever coverage > 0 and the zero vector otherwise.
    """

    vector: np.ndarray
    coverage: float


def load_vectors(path, expected_dim: int | None = None) -> VectorStore:
    """Load whitespace-separated word vectors, unit-normalizing each entry.

    Zero vectors are dropped (they cannot be normalized); duplicate tokens
    keep their first occurrence. Dimension mismatches, either against
    expected_dim or across lines, raise VectorStoreError with the offending
    line number.
    """
    path = Path(path)
    dim: int | None = expected_dim
    table: dict[str, np.ndarray] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            parts = raw.split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if dim is None:
                if not values:
                    raise VectorStoreError(f"line {lineno}: no vector components")
                dim = len(values)
            if len(values) != dim:
                raise VectorStoreError(
                    f"line {lineno}: expected {dim} components, got {len(values)}"
                )
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise VectorStoreError(f"line {lineno}: non-numeric component") from exc
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                continue
            if token in table:
                continue
            table[token] = vec / norm
    if dim is None or not table:
        raise VectorStoreError(f"no vectors loaded from {path}")
    return VectorStore(dimension=dim, table=table)


def embed_text(text: str, store: VectorStore) -> PooledEmbedding:
    """Mean-pool the in-vocabulary token vectors and renormalize to unit length.

    coverage is the fraction of tokens found in the store. With no hits the
    embedding is the zero vector with coverage 0. In the degenerate case of
    exact cancellation (pooled mean is the zero vector) the embedding carries
    no direction, so it is likewise reported as zero vector, coverage 0.
    """
    tokens = tokenize(text)
    zero = PooledEmbedding(np.zeros(store.dimension, dtype=np.float64), 0.0)
    if not tokens:
        return zero
    found = [store.table[t] for t in tokens if t in store.table]
    if not found:
        return zero
    pooled = np.mean(found, axis=0)
    norm = float(np.linalg.norm(pooled))
    if norm == 0.0:
        return zero
    return PooledEmbedding(pooled / norm, len(found) / len(tokens))


def cosine(u, v) -> float:
    """Cosine similarity in [-1, 1]; 0 when either vector has zero norm.

    Identical arrays score exactly 1.0 so identity checks are not subject
    to rounding.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    if np.array_equal(u, v):
        return 1.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))
