"""Probability fusion of the nearest-neighbour and LSTM classifiers.

Both components emit a class probability vector for a query window; the
hybrid adds the two vectors and takes the argmax, ties going to the lower
class index.  The LSTM side runs from frozen parameters (typically loaded
from a checkpoint), never retrained per batch.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .distances import DistanceSpec
from .knn import prob_vector_knn, prob_vectors_batch
from .lstm import LstmParams, predict_batch, predict_prob
from .series import Dataset


def default_ltw_spec() -> DistanceSpec:
    return DistanceSpec.parse("ltw:G=1-10:cid")


@dataclass
class HybridConfig:
    """Configuration binding the two component classifiers."""

    lstm_params: LstmParams
    levels: int
    ltw_spec: DistanceSpec = field(default_factory=default_ltw_spec)
    m_neighbors: int = 5

    def __post_init__(self):
        if self.m_neighbors < 2:
            raise ValueError("m_neighbors must be >= 2")
        if self.levels < 2:
            raise ValueError("levels must be >= 2")


@dataclass(frozen=True)
class AuditRecord:
    """Per-query fusion record kept for union-accuracy and disagreement
    analysis."""

    query_id: str
    true_label: int
    pred_ltw: int
    pred_lstm: int
    pred_hybrid: int
    p_ltw: np.ndarray
    p_lstm: np.ndarray


def _check_components(train: Dataset, config: HybridConfig) -> None:
    if config.lstm_params.num_classes != train.num_classes:
        raise ValueError(
            f"lstm head targets {config.lstm_params.num_classes} classes, "
            f"training data has {train.num_classes}"
        )


def fuse(p_a: np.ndarray, p_b: np.ndarray) -> int:
    """Argmax of the summed probability vectors; ties pick the lower index."""
    return int(np.argmax(p_a + p_b))


def hybrid_classify(query, train: Dataset, config: HybridConfig,
                    *, backend: str | None = None) -> int:
    """Fused label for one query window."""
    _check_components(train, config)
    try:
        p_ltw = prob_vector_knn(query, train, config.ltw_spec,
                                config.m_neighbors, backend=backend)
    except Exception as exc:
        raise RuntimeError(f"nearest-neighbour component failed: {exc}") from exc
    try:
        p_lstm = predict_prob(config.lstm_params, query, config.levels)
    except Exception as exc:
        raise RuntimeError(f"lstm component failed: {exc}") from exc
    return fuse(p_ltw, p_lstm)


def hybrid_classify_batch(queries: Dataset, train: Dataset, config: HybridConfig,
                          *, backend: str | None = None
                          ) -> tuple[list[int], list[AuditRecord]]:
    """Fused labels plus per-query audit records for a batch of queries."""
    _check_components(train, config)
    if len(queries.series) == 0:
        return [], []
    try:
        p_ltw = prob_vectors_batch(queries.matrix, train, config.ltw_spec,
                                   config.m_neighbors, backend=backend)
    except Exception as exc:
        raise RuntimeError(f"nearest-neighbour component failed: {exc}") from exc
    try:
        p_lstm = predict_batch(config.lstm_params, queries.matrix, config.levels)
    except Exception as exc:
        raise RuntimeError(f"lstm component failed: {exc}") from exc

    combined = p_ltw + p_lstm
    preds = combined.argmax(axis=1)
    labels = queries.labels()
    records = [
        AuditRecord(
            query_id=s.source_id if s.source_id else f"q{idx}",
            true_label=int(labels[idx]),
            pred_ltw=int(p_ltw[idx].argmax()),
            pred_lstm=int(p_lstm[idx].argmax()),
            pred_hybrid=int(preds[idx]),
            p_ltw=p_ltw[idx],
            p_lstm=p_lstm[idx],
        )
        for idx, s in enumerate(queries.series)
    ]
    return [int(p) for p in preds], records


def save_audit_csv(records, num_classes: int, path) -> None:
    """Audit CSV: query_id,true_label,pred_ltw,pred_lstm,pred_hybrid then
    the two probability vectors, one column per class."""
    header = ["query_id", "true_label", "pred_ltw", "pred_lstm", "pred_hybrid"]
    header += [f"p_ltw_{c}" for c in range(num_classes)]
    header += [f"p_lstm_{c}" for c in range(num_classes)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in records:
            row = [r.query_id, r.true_label, r.pred_ltw, r.pred_lstm, r.pred_hybrid]
            row += [repr(float(v)) for v in r.p_ltw]
            row += [repr(float(v)) for v in r.p_lstm]
            writer.writerow(row)


def load_audit_csv(path) -> list[AuditRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:5] != ["query_id", "true_label", "pred_ltw",
                                            "pred_lstm", "pred_hybrid"]:
            raise ValueError(f"{path}: not a hybrid audit CSV")
        n_prob = len(header) - 5
        if n_prob % 2:
            raise ValueError(f"{path}: malformed probability columns")
        c = n_prob // 2
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: line {lineno}: wrong column count")
            records.append(AuditRecord(
                query_id=row[0],
                true_label=int(row[1]),
                pred_ltw=int(row[2]),
                pred_lstm=int(row[3]),
                pred_hybrid=int(row[4]),
                p_ltw=np.array([float(v) for v in row[5 : 5 + c]]),
                p_lstm=np.array([float(v) for v in row[5 + c :]]),
            ))
    return records
