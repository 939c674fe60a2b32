"""Nearest-neighbour classification over any distance spec.

Directional distances (ltw, lb_keogh) are always evaluated query-first.
Ties in distance break toward the lower training index, which keeps fold
runs reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distances import DistanceSpec, evaluate_many
from .series import Dataset

PROB_TOLERANCE = 1e-9


@dataclass(frozen=True)
class NeighborList:
    """The m nearest training windows: (training index, distance) entries
    in non-decreasing distance order."""

    entries: tuple[tuple[int, float], ...]
    m: int

    def indices(self) -> list[int]:
        return [i for i, _ in self.entries]

    def distances(self) -> list[float]:
        return [d for _, d in self.entries]


def assert_prob_vector(p: np.ndarray, num_classes: int) -> None:
    """Validate the shared probability-vector contract."""
    p = np.asarray(p)
    if p.shape != (num_classes,):
        raise ValueError(f"probability vector has shape {p.shape}, expected ({num_classes},)")
    if np.any(p < 0):
        raise ValueError("probability vector has negative entries")
    if abs(float(p.sum()) - 1.0) > PROB_TOLERANCE:
        raise ValueError(f"probability vector sums to {p.sum()!r}, not 1")


def _rank(dists: np.ndarray, m: int) -> np.ndarray:
    """Indices of the m smallest distances; ties keep the lower index."""
    order = np.argsort(dists, kind="stable")
    return order[:m]


def nearest_neighbors(query, train: Dataset, spec: DistanceSpec, m: int,
                      *, backend: str | None = None) -> NeighborList:
    """The m closest training windows to the query under ``spec``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > len(train):
        raise ValueError(f"m={m} exceeds training size {len(train)}")
    dists = evaluate_many(spec, query, train.matrix, backend=backend)[0]
    picked = _rank(dists, m)
    entries = tuple((int(i), float(dists[i])) for i in picked)
    return NeighborList(entries, m)


def classify_1nn(query, train: Dataset, spec: DistanceSpec,
                 *, backend: str | None = None) -> int:
    """Label of the single nearest training window."""
    nn = nearest_neighbors(query, train, spec, 1, backend=backend)
    label = train.series[nn.entries[0][0]].label
    if label is None:
        raise ValueError("nearest training window is unlabeled")
    return label


def _weights(m: int) -> np.ndarray:
    # rank weights m-1, m-2, ..., 0 normalized by m(m-1)/2
    return np.arange(m - 1, -1, -1, dtype=np.float64) / (m * (m - 1) / 2.0)


def prob_vector_knn(query, train: Dataset, spec: DistanceSpec, m: int = 5,
                    *, backend: str | None = None) -> np.ndarray:
    """Rank-weighted class probability vector from the m nearest neighbours.

    The i-th neighbour (1-based) contributes weight (m-i); the weights are
    normalized to sum to 1, so the m-th neighbour contributes nothing.
    """
    if m < 2:
        raise ValueError("probability vector needs m >= 2 neighbours")
    nn = nearest_neighbors(query, train, spec, m, backend=backend)
    labels = train.labels()
    p = np.zeros(train.num_classes)
    for rank, (idx, _) in enumerate(nn.entries):
        label = labels[idx]
        if label < 0:
            raise ValueError(f"training window {idx} is unlabeled")
        p[label] += _weights(m)[rank]
    return p


def classify_batch(queries, train: Dataset, spec: DistanceSpec,
                   *, backend: str | None = None) -> np.ndarray:
    """1NN labels for a batch of queries (row per query)."""
    dists = evaluate_many(spec, queries, train.matrix, backend=backend)
    labels = train.labels()
    nearest = np.argmin(dists, axis=1)
    # argmin already keeps the lowest index on ties
    out = labels[nearest]
    if np.any(out < 0):
        raise ValueError("nearest training window is unlabeled")
    return out


def prob_vectors_batch(queries, train: Dataset, spec: DistanceSpec, m: int = 5,
                       *, backend: str | None = None) -> np.ndarray:
    """Rank-weighted probability vectors for a batch of queries."""
    if m < 2:
        raise ValueError("probability vector needs m >= 2 neighbours")
    if m > len(train):
        raise ValueError(f"m={m} exceeds training size {len(train)}")
    dists = evaluate_many(spec, queries, train.matrix, backend=backend)
    labels = train.labels()
    if np.any(labels < 0):
        raise ValueError("training set contains unlabeled windows")
    order = np.argsort(dists, axis=1, kind="stable")[:, :m]
    neighbor_labels = labels[order]
    weights = _weights(m)
    out = np.zeros((dists.shape[0], train.num_classes))
    rows = np.repeat(np.arange(dists.shape[0]), m)
    np.add.at(out, (rows, neighbor_labels.ravel()), np.tile(weights, dists.shape[0]))
    return out
