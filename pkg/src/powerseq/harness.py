"""Five-fold experiment driver, metrics, scaling benchmarks, and reports.

The protocol follows the data-preparation rules in :mod:`powerseq.series`:
traces are assigned to folds first, then cut into windows; fold test ``i``
holds out folds ``i`` and ``i+1 (mod num_folds)`` and trains on the rest.
Nearest-neighbour classifiers are deterministic; LSTM-bearing classifiers
can be repeated with shifted seeds to report mean and std.
"""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import lstm as lstm_mod
from .distances import DistanceSpec, evaluate_pairs
from .hybrid import fuse
from .knn import _weights
from .series import Dataset, FoldPlan, Series, cut_windows, split


@dataclass(frozen=True)
class NnClassifier:
    """1NN classifier under one distance spec."""

    name: str
    spec: DistanceSpec


@dataclass(frozen=True)
class LstmClassifier:
    """LSTM classifier trained per fold; run r trains with seed+r."""

    name: str
    config: lstm_mod.TrainConfig


@dataclass(frozen=True)
class HybridClassifier:
    """Probability fusion of a rank-weighted kNN and a trained LSTM."""

    name: str
    config: lstm_mod.TrainConfig
    ltw_spec: DistanceSpec
    m_neighbors: int = 5


Classifier = NnClassifier | LstmClassifier | HybridClassifier


@dataclass
class FoldOutcome:
    classifier: str
    fold: int
    accuracies: tuple[float, ...]
    confusion: np.ndarray
    predictions: tuple[int, ...]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std_accuracy(self) -> float | None:
        if len(self.accuracies) < 2:
            return None
        return float(statistics.stdev(self.accuracies))


@dataclass
class ExperimentReport:
    num_folds: int
    classifier_names: tuple[str, ...]
    outcomes: dict[str, dict[int, FoldOutcome]]
    truth: dict[int, tuple[int, ...]]
    query_ids: dict[int, tuple[str, ...]]
    union_pair: tuple[str, str] | None = None
    union: dict[int, tuple[float, ...]] | None = None
    config_echo: dict[str, str] = field(default_factory=dict)

    def accuracy(self, name: str, fold: int) -> float:
        return self.outcomes[name][fold].mean_accuracy

    def fold_accuracies(self, name: str) -> list[float]:
        return [self.outcomes[name][f].mean_accuracy for f in range(self.num_folds)]

    def mean_accuracy(self, name: str) -> float:
        return float(np.mean(self.fold_accuracies(name)))


def _confusion(truth: np.ndarray, preds: np.ndarray, num_classes: int) -> np.ndarray:
    matrix = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(matrix, (truth, preds), 1)
    return matrix


def union_accuracy(preds_a: Sequence[int], preds_b: Sequence[int],
                   truth: Sequence[int]) -> float:
    """Fraction of queries either classifier gets right."""
    if len(preds_a) != len(preds_b) or len(preds_a) != len(truth):
        raise ValueError("prediction and truth lists must have equal length")
    if len(truth) == 0:
        raise ValueError("empty audit lists")
    a = np.asarray(preds_a)
    b = np.asarray(preds_b)
    t = np.asarray(truth)
    return float(np.mean((a == t) | (b == t)))


def cut_corpus(traces: Sequence[Series], window_length: int, stride: int) -> Dataset:
    """Cut every trace and collect the windows into one dataset."""
    windows: list[Series] = []
    for trace in traces:
        windows.extend(cut_windows(trace, window_length, stride))
    if not windows:
        raise ValueError("no trace is long enough for the window length")
    return Dataset.from_windows(windows)


def _nn_predictions(train: Dataset, test: Dataset, spec: DistanceSpec,
                    dist_cache: dict) -> np.ndarray:
    from .distances import evaluate_many

    key = spec
    if key not in dist_cache:
        dist_cache[key] = evaluate_many(spec, test.matrix, train.matrix)
    dists = dist_cache[key]
    labels = train.labels()
    return labels[np.argmin(dists, axis=1)]


def _nn_prob_vectors(train: Dataset, test: Dataset, spec: DistanceSpec,
                     m: int, dist_cache: dict) -> np.ndarray:
    from .distances import evaluate_many

    key = spec
    if key not in dist_cache:
        dist_cache[key] = evaluate_many(spec, test.matrix, train.matrix)
    dists = dist_cache[key]
    order = np.argsort(dists, axis=1, kind="stable")[:, :m]
    labels = train.labels()
    weights = _weights(m)
    out = np.zeros((len(test), train.num_classes))
    rows = np.repeat(np.arange(len(test)), m)
    np.add.at(out, (rows, labels[order].ravel()), np.tile(weights, len(test)))
    return out


def _trained_lstm(train: Dataset, config: lstm_mod.TrainConfig, run: int,
                  model_cache: dict) -> lstm_mod.LstmParams:
    key = (config, run)
    if key not in model_cache:
        run_config = lstm_mod.TrainConfig(
            batch_size=min(config.batch_size, len(train)),
            max_epochs=config.max_epochs,
            learning_rate=config.learning_rate,
            levels=config.levels,
            seed=config.seed + run,
            hidden=config.hidden,
        )
        params, _ = lstm_mod.train(train, run_config)
        model_cache[key] = params
    return model_cache[key]


def run_folds(dataset: Dataset, plan: FoldPlan,
              classifiers: Sequence[Classifier], repeats: int = 1,
              *, union_pair: tuple[str, str] | None = None,
              config_echo: dict[str, str] | None = None,
              progress=None) -> ExperimentReport:
    """Drive every classifier through all fold tests over pre-cut windows.

    ``repeats`` controls how many independently seeded runs LSTM-bearing
    classifiers get; nearest-neighbour classifiers are deterministic and
    run once.  ``union_pair`` names two classifiers whose per-fold
    union-accuracy is recorded.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    names = [c.name for c in classifiers]
    if len(set(names)) != len(names):
        raise ValueError("classifier names must be distinct")
    if union_pair is not None:
        for side in union_pair:
            if side not in names:
                raise ValueError(f"union pair names unknown classifier {side!r}")

    outcomes: dict[str, dict[int, FoldOutcome]] = {n: {} for n in names}
    truth: dict[int, tuple[int, ...]] = {}
    query_ids: dict[int, tuple[str, ...]] = {}
    unions: dict[int, tuple[float, ...]] = {}

    for fold in range(plan.num_folds):
        train, test = split(dataset, plan, fold)
        y = test.labels()
        if np.any(y < 0):
            raise ValueError("test windows must be labeled for evaluation")
        truth[fold] = tuple(int(v) for v in y)
        query_ids[fold] = tuple(
            f"{s.source_id}#{i}" for i, s in enumerate(test.series)
        )
        dist_cache: dict = {}
        model_cache: dict = {}
        per_run_preds: dict[str, list[np.ndarray]] = {}

        for clf in classifiers:
            if isinstance(clf, NnClassifier):
                try:
                    preds = _nn_predictions(train, test, clf.spec, dist_cache)
                except Exception as exc:
                    raise RuntimeError(
                        f"classifier {clf.name!r} failed on fold {fold}: {exc}"
                    ) from exc
                runs = [preds]
            elif isinstance(clf, LstmClassifier):
                runs = []
                for r in range(repeats):
                    try:
                        params = _trained_lstm(train, clf.config, r, model_cache)
                        probs = lstm_mod.predict_batch(params, test.matrix,
                                                       clf.config.levels)
                    except Exception as exc:
                        raise RuntimeError(
                            f"classifier {clf.name!r} failed on fold {fold} "
                            f"run {r}: {exc}"
                        ) from exc
                    runs.append(probs.argmax(axis=1))
            elif isinstance(clf, HybridClassifier):
                try:
                    p_nn = _nn_prob_vectors(train, test, clf.ltw_spec,
                                            clf.m_neighbors, dist_cache)
                except Exception as exc:
                    raise RuntimeError(
                        f"classifier {clf.name!r} (nn side) failed on fold "
                        f"{fold}: {exc}"
                    ) from exc
                runs = []
                for r in range(repeats):
                    try:
                        params = _trained_lstm(train, clf.config, r, model_cache)
                        p_lstm = lstm_mod.predict_batch(params, test.matrix,
                                                        clf.config.levels)
                    except Exception as exc:
                        raise RuntimeError(
                            f"classifier {clf.name!r} (lstm side) failed on "
                            f"fold {fold} run {r}: {exc}"
                        ) from exc
                    runs.append((p_nn + p_lstm).argmax(axis=1))
            else:
                raise TypeError(f"unknown classifier config {clf!r}")

            per_run_preds[clf.name] = runs
            accs = tuple(float(np.mean(p == y)) for p in runs)
            outcomes[clf.name][fold] = FoldOutcome(
                classifier=clf.name,
                fold=fold,
                accuracies=accs,
                confusion=_confusion(y, runs[0], dataset.num_classes),
                predictions=tuple(int(v) for v in runs[0]),
            )
            if progress is not None:
                progress(clf.name, fold, accs)

        if union_pair is not None:
            runs_a = per_run_preds[union_pair[0]]
            runs_b = per_run_preds[union_pair[1]]
            n_runs = max(len(runs_a), len(runs_b))
            unions[fold] = tuple(
                union_accuracy(runs_a[min(r, len(runs_a) - 1)],
                               runs_b[min(r, len(runs_b) - 1)], y)
                for r in range(n_runs)
            )

    echo = dict(config_echo or {})
    echo["num_folds"] = str(plan.num_folds)
    echo["repeats"] = str(repeats)
    for clf in classifiers:
        if isinstance(clf, NnClassifier):
            echo[f"classifier.{clf.name}"] = clf.spec.to_string()
        elif isinstance(clf, LstmClassifier):
            echo[f"classifier.{clf.name}"] = (
                f"lstm:hidden={clf.config.hidden}:epochs={clf.config.max_epochs}"
                f":batch={clf.config.batch_size}:lr={clf.config.learning_rate:g}"
                f":S={clf.config.levels}:seed={clf.config.seed}"
            )
        else:
            echo[f"classifier.{clf.name}"] = (
                f"hybrid:{clf.ltw_spec.to_string()}:m={clf.m_neighbors}"
                f":hidden={clf.config.hidden}:epochs={clf.config.max_epochs}"
                f":seed={clf.config.seed}"
            )

    return ExperimentReport(
        num_folds=plan.num_folds,
        classifier_names=tuple(names),
        outcomes=outcomes,
        truth=truth,
        query_ids=query_ids,
        union_pair=union_pair,
        union=unions if union_pair is not None else None,
        config_echo=echo,
    )


def run_experiment(traces: Sequence[Series], plan: FoldPlan,
                   classifiers: Sequence[Classifier], repeats: int = 1,
                   *, window_length: int = 200, stride: int = 50,
                   union_pair: tuple[str, str] | None = None,
                   progress=None) -> ExperimentReport:
    """Cut the corpus per the window protocol, then run all fold tests."""
    dataset = cut_corpus(traces, window_length, stride)
    echo = {"window_length": str(window_length), "stride": str(stride)}
    return run_folds(dataset, plan, classifiers, repeats,
                     union_pair=union_pair, config_echo=echo,
                     progress=progress)


def g_sweep(traces: Sequence[Series], plan: FoldPlan,
            g_settings: Sequence, *, window_length: int = 200,
            stride: int = 50) -> ExperimentReport:
    """Per-fold 1NN accuracy for each warping index set."""
    from .distances import WarpIndexSet

    classifiers = []
    for g in g_settings:
        ws = WarpIndexSet.of(g)
        classifiers.append(NnClassifier(f"G={{{ws.to_string()}}}",
                                        DistanceSpec("ltw", G=ws)))
    return run_experiment(traces, plan, classifiers,
                          window_length=window_length, stride=stride)


@dataclass(frozen=True)
class BenchRow:
    spec: str
    backend: str
    length: int
    seconds_per_eval: float
    ratio_vs_half: float | None


def bench_kernels(lengths: Sequence[int], pairs_per_length: int,
                  specs: Sequence[DistanceSpec], *,
                  backends: Sequence[str] = ("active",),
                  seed: int = 0, reps: int = 7) -> list[BenchRow]:
    """Median wall time per distance evaluation per (spec, backend, n).

    Each measurement times one batched call over ``pairs_per_length``
    random pairs (one warmup call discarded, median over ``reps``); the
    ratio column compares against the measurement at half the length.
    """
    lengths = sorted(int(n) for n in lengths)
    if pairs_per_length < 1:
        raise ValueError("pairs_per_length must be >= 1")
    rng = np.random.default_rng(seed)
    rows: list[BenchRow] = []
    for spec in specs:
        for backend in backends:
            timings: dict[int, float] = {}
            for n in lengths:
                xs = rng.normal(size=(pairs_per_length, n))
                ys = rng.normal(size=(pairs_per_length, n))
                evaluate_pairs(spec, xs, ys, backend=None if backend == "active" else backend)
                samples = []
                for _ in range(reps):
                    t0 = time.perf_counter()
                    evaluate_pairs(spec, xs, ys,
                                   backend=None if backend == "active" else backend)
                    samples.append((time.perf_counter() - t0) / pairs_per_length)
                timings[n] = statistics.median(samples)
                ratio = None
                if n % 2 == 0 and n // 2 in timings:
                    ratio = timings[n] / timings[n // 2]
                rows.append(BenchRow(spec.to_string(), backend, n,
                                     timings[n], ratio))
    return rows


def write_bench_csv(rows: Sequence[BenchRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["spec", "backend", "length", "us_per_eval", "ratio_vs_half"])
        for r in rows:
            writer.writerow([
                r.spec, r.backend, r.length, f"{r.seconds_per_eval * 1e6:.4f}",
                "" if r.ratio_vs_half is None else f"{r.ratio_vs_half:.4f}",
            ])


def write_report_csv(report: ExperimentReport, path) -> None:
    """Accuracy summary: one row per (classifier, fold) plus config echo."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["classifier", "fold", "runs", "accuracy_mean", "accuracy_std"])
        for name in report.classifier_names:
            for fold in range(report.num_folds):
                out = report.outcomes[name][fold]
                std = out.std_accuracy
                writer.writerow([
                    name, fold, len(out.accuracies),
                    f"{out.mean_accuracy:.6f}",
                    "" if std is None else f"{std:.6f}",
                ])
        if report.union is not None:
            for fold in sorted(report.union):
                vals = report.union[fold]
                writer.writerow([
                    f"union({report.union_pair[0]},{report.union_pair[1]})",
                    fold, len(vals), f"{float(np.mean(vals)):.6f}",
                    "" if len(vals) < 2 else f"{statistics.stdev(vals):.6f}",
                ])
        for key in sorted(report.config_echo):
            writer.writerow(["config", key, report.config_echo[key], "", ""])


def write_accuracy_dat(report: ExperimentReport, path) -> None:
    """Gnuplot-ready table: fold index then one accuracy column per
    classifier."""
    with open(path, "w") as fh:
        fh.write("# fold " + " ".join(report.classifier_names) + "\n")
        for fold in range(report.num_folds):
            cells = " ".join(
                f"{report.accuracy(name, fold):.6f}" for name in report.classifier_names
            )
            fh.write(f"{fold} {cells}\n")


def write_confusion_dat(report: ExperimentReport, name: str, fold: int, path) -> None:
    """Gnuplot matrix format for one confusion matrix (run 0)."""
    matrix = report.outcomes[name][fold].confusion
    with open(path, "w") as fh:
        fh.write(f"# confusion {name} fold {fold}; rows=true cols=pred\n")
        for row in matrix:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")


def write_predictions_csv(report: ExperimentReport, name: str, path) -> None:
    """Per-query audit for one classifier (run 0 predictions)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query_id", "fold", "true_label", "pred"])
        for fold in range(report.num_folds):
            out = report.outcomes[name][fold]
            for qid, t, p in zip(report.query_ids[fold], report.truth[fold],
                                 out.predictions):
                writer.writerow([qid, fold, t, p])


def load_predictions_csv(path) -> list[tuple[str, int, int, int]]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["query_id", "fold", "true_label", "pred"]:
            raise ValueError(f"{path}: not a predictions audit CSV")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"{path}: line {lineno}: wrong column count")
            rows.append((row[0], int(row[1]), int(row[2]), int(row[3])))
    return rows


def audit_pair_report(path_a, path_b) -> dict:
    """Pure metrics from two persisted prediction audits over the same
    queries: per-fold accuracy of each side and their union-accuracy."""
    rows_a = load_predictions_csv(path_a)
    rows_b = load_predictions_csv(path_b)
    if len(rows_a) != len(rows_b):
        raise ValueError("audit files cover different query counts")
    folds = sorted({fold for _, fold, _, _ in rows_a})
    result: dict = {"folds": {}}
    for fold in folds:
        sel_a = [(q, t, p) for q, f, t, p in rows_a if f == fold]
        sel_b = {q: (t, p) for q, f, t, p in rows_b if f == fold}
        if set(q for q, _, _ in sel_a) != set(sel_b):
            raise ValueError(f"fold {fold}: audits cover different queries")
        truth = [t for _, t, _ in sel_a]
        preds_a = [p for _, _, p in sel_a]
        preds_b = [sel_b[q][1] for q, _, _ in sel_a]
        result["folds"][fold] = {
            "n": len(truth),
            "acc_a": float(np.mean(np.asarray(preds_a) == np.asarray(truth))),
            "acc_b": float(np.mean(np.asarray(preds_b) == np.asarray(truth))),
            "union": union_accuracy(preds_a, preds_b, truth),
        }
    return result


def write_audit_pair_csv(result: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fold", "n", "acc_a", "acc_b", "union_accuracy"])
        for fold in sorted(result["folds"]):
            row = result["folds"][fold]
            writer.writerow([fold, row["n"], f"{row['acc_a']:.6f}",
                             f"{row['acc_b']:.6f}", f"{row['union']:.6f}"])
