"""From-scratch LSTM sequence classifier.

Architecture: each scalar input step is broadcast to an m-vector (times the
all-ones vector), fed through a single LSTM layer, the per-step outputs are
sum-pooled, and a softmax head maps the pooled vector to class
probabilities.  Training is plain minibatch SGD on the negative
log-likelihood, fully deterministic for a fixed seed.

Inputs are discretized per window to S+1 levels and rescaled to [0, 1]
before entering the network; ``train`` and ``predict_prob`` do this
internally, while ``forward``/``loss``/``backward`` expect already
discretized values.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from .series import Dataset

INIT_SCALE = 0.08
CHECKPOINT_VERSION = 1

_GATES = ("c", "i", "f", "o")


class LstmDivergenceError(RuntimeError):
    """Raised when training or inference produces non-finite values."""

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch


@dataclass
class LstmParams:
    """All trainable parameters; also reused as the gradient container."""

    w_c: np.ndarray
    w_i: np.ndarray
    w_f: np.ndarray
    w_o: np.ndarray
    u_c: np.ndarray
    u_i: np.ndarray
    u_f: np.ndarray
    u_o: np.ndarray
    b_c: np.ndarray
    b_i: np.ndarray
    b_f: np.ndarray
    b_o: np.ndarray
    head_w: np.ndarray
    head_b: np.ndarray

    @property
    def hidden(self) -> int:
        return int(self.w_c.shape[0])

    @property
    def num_classes(self) -> int:
        return int(self.head_w.shape[0])

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def initialize(cls, hidden: int, num_classes: int, rng: np.random.Generator) -> "LstmParams":
        """Uniform init in [-0.08, 0.08], consuming the rng in field order."""
        if hidden < 1 or num_classes < 1:
            raise ValueError("hidden size and class count must be positive")
        shapes = (
            [(hidden, hidden)] * 8
            + [(hidden,)] * 4
            + [(num_classes, hidden), (num_classes,)]
        )
        arrays = [rng.uniform(-INIT_SCALE, INIT_SCALE, size=s) for s in shapes]
        return cls(*arrays)

    @classmethod
    def zeros_like(cls, other: "LstmParams") -> "LstmParams":
        return cls(*[np.zeros_like(getattr(other, n)) for n in cls.field_names()])

    def copy(self) -> "LstmParams":
        return LstmParams(*[getattr(self, n).copy() for n in self.field_names()])


@dataclass(frozen=True)
class TrainConfig:
    """Hyper-parameters for one training run."""

    batch_size: int = 60
    max_epochs: int = 50
    learning_rate: float = 0.05
    levels: int = 100
    seed: int = 0
    hidden: int = 90

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.levels < 2:
            raise ValueError("discretization levels must be >= 2")
        if self.hidden < 1:
            raise ValueError("hidden size must be positive")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    loss: float
    train_acc: float


def discretize(x, levels: int) -> np.ndarray:
    """Quantize a series to levels+1 steps on [0, 1] (min-max per window)."""
    if levels < 2:
        raise ValueError("discretization levels must be >= 2")
    values = np.asarray(getattr(x, "values", x), dtype=np.float64)
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return np.zeros_like(values)
    z = np.rint(levels * (values - lo) / (hi - lo))
    return z / levels


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _forward_batch(params: LstmParams, X: np.ndarray, want_cache: bool):
    """Run the network over a (batch, steps) matrix of discretized inputs."""
    B, n = X.shape
    m = params.hidden
    ones = np.ones(m)
    h = np.zeros((B, m))
    c = np.zeros((B, m))
    h_sum = np.zeros((B, m))
    cache = {"x": [], "h_prev": [], "c_prev": [], "i": [], "f": [], "o": [],
             "cand": [], "tanh_c": []} if want_cache else None
    for t in range(n):
        xvec = X[:, t][:, None] * ones
        pre_c = xvec @ params.w_c.T + h @ params.u_c.T + params.b_c
        pre_i = xvec @ params.w_i.T + h @ params.u_i.T + params.b_i
        pre_f = xvec @ params.w_f.T + h @ params.u_f.T + params.b_f
        pre_o = xvec @ params.w_o.T + h @ params.u_o.T + params.b_o
        cand = np.tanh(pre_c)
        gate_i = _sigmoid(pre_i)
        gate_f = _sigmoid(pre_f)
        gate_o = _sigmoid(pre_o)
        c_new = gate_f * c + gate_i * cand
        tanh_c = np.tanh(c_new)
        h_new = gate_o * tanh_c
        if want_cache:
            cache["x"].append(X[:, t])
            cache["h_prev"].append(h)
            cache["c_prev"].append(c)
            cache["i"].append(gate_i)
            cache["f"].append(gate_f)
            cache["o"].append(gate_o)
            cache["cand"].append(cand)
            cache["tanh_c"].append(tanh_c)
        h, c = h_new, c_new
        h_sum += h
    logits = h_sum @ params.head_w.T + params.head_b
    probs = _softmax(logits)
    if not np.all(np.isfinite(probs)):
        raise LstmDivergenceError("non-finite activation in forward pass")
    if want_cache:
        cache["h_sum"] = h_sum
        cache["probs"] = probs
    return probs, cache


def forward(params: LstmParams, x) -> tuple[np.ndarray, dict]:
    """Probability vector and activation cache for one discretized series."""
    X = np.asarray(getattr(x, "values", x), dtype=np.float64)[None, :]
    probs, cache = _forward_batch(params, X, want_cache=True)
    return probs[0], cache


def _stack_batch(batch: Sequence) -> tuple[np.ndarray, np.ndarray]:
    if len(batch) == 0:
        raise ValueError("batch must be non-empty")
    xs, ys = [], []
    for item in batch:
        s, label = item
        xs.append(np.asarray(getattr(s, "values", s), dtype=np.float64))
        ys.append(int(label))
    lengths = {len(v) for v in xs}
    if len(lengths) != 1:
        raise ValueError("batch series must share one length")
    return np.stack(xs), np.asarray(ys, dtype=np.int64)


def loss(params: LstmParams, batch: Sequence) -> float:
    """Summed negative log-likelihood over a batch of (series, label)."""
    X, y = _stack_batch(batch)
    if np.any(y < 0) or np.any(y >= params.num_classes):
        raise ValueError("batch labels out of range")
    probs, _ = _forward_batch(params, X, want_cache=False)
    return float(-np.sum(np.log(probs[np.arange(len(y)), y])))


def _backward_batch(params: LstmParams, X: np.ndarray, y: np.ndarray) -> LstmParams:
    B, n = X.shape
    m = params.hidden
    probs, cache = _forward_batch(params, X, want_cache=True)
    grads = LstmParams.zeros_like(params)

    dlogits = probs.copy()
    dlogits[np.arange(B), y] -= 1.0
    grads.head_w += dlogits.T @ cache["h_sum"]
    grads.head_b += dlogits.sum(axis=0)
    dh_pool = dlogits @ params.head_w

    ones = np.ones(m)
    dh_next = np.zeros((B, m))
    dc_next = np.zeros((B, m))
    for t in range(n - 1, -1, -1):
        gate_i = cache["i"][t]
        gate_f = cache["f"][t]
        gate_o = cache["o"][t]
        cand = cache["cand"][t]
        tanh_c = cache["tanh_c"][t]
        c_prev = cache["c_prev"][t]
        h_prev = cache["h_prev"][t]
        xvec = cache["x"][t][:, None] * ones

        dh = dh_pool + dh_next
        do = dh * tanh_c
        dc = dc_next + dh * gate_o * (1.0 - tanh_c * tanh_c)
        df = dc * c_prev
        di = dc * cand
        dcand = dc * gate_i
        dc_next = dc * gate_f

        da_o = do * gate_o * (1.0 - gate_o)
        da_f = df * gate_f * (1.0 - gate_f)
        da_i = di * gate_i * (1.0 - gate_i)
        da_c = dcand * (1.0 - cand * cand)

        grads.w_o += da_o.T @ xvec
        grads.w_f += da_f.T @ xvec
        grads.w_i += da_i.T @ xvec
        grads.w_c += da_c.T @ xvec
        grads.u_o += da_o.T @ h_prev
        grads.u_f += da_f.T @ h_prev
        grads.u_i += da_i.T @ h_prev
        grads.u_c += da_c.T @ h_prev
        grads.b_o += da_o.sum(axis=0)
        grads.b_f += da_f.sum(axis=0)
        grads.b_i += da_i.sum(axis=0)
        grads.b_c += da_c.sum(axis=0)

        dh_next = da_o @ params.u_o + da_f @ params.u_f \
            + da_i @ params.u_i + da_c @ params.u_c
    return grads


def backward(params: LstmParams, batch: Sequence) -> LstmParams:
    """Exact gradient of :func:`loss` for every parameter, via BPTT."""
    X, y = _stack_batch(batch)
    if np.any(y < 0) or np.any(y >= params.num_classes):
        raise ValueError("batch labels out of range")
    return _backward_batch(params, X, y)


def _predict_matrix(params: LstmParams, X: np.ndarray, chunk: int = 256) -> np.ndarray:
    out = np.empty((X.shape[0], params.num_classes))
    for start in range(0, X.shape[0], chunk):
        probs, _ = _forward_batch(params, X[start : start + chunk], want_cache=False)
        out[start : start + chunk] = probs
    return out


def train(train_data: Dataset, config: TrainConfig,
          *, progress=None) -> tuple[LstmParams, list[EpochStats]]:
    """Minibatch SGD over the labeled windows of ``train_data``.

    Shuffles each epoch with the seeded generator, updates with the
    batch-mean gradient, and records full-set mean loss and accuracy per
    epoch.  Raises :class:`LstmDivergenceError` naming the epoch when the
    loss stops being finite.
    """
    y = train_data.labels()
    if np.any(y < 0):
        raise ValueError("training windows must all be labeled")
    N = len(train_data)
    if config.batch_size > N:
        raise ValueError(f"batch_size {config.batch_size} exceeds training size {N}")
    rng = np.random.default_rng(config.seed)
    params = LstmParams.initialize(config.hidden, train_data.num_classes, rng)
    X = np.stack([discretize(s.values, config.levels) for s in train_data.series])

    trace: list[EpochStats] = []
    for epoch in range(config.max_epochs):
        perm = rng.permutation(N)
        for start in range(0, N, config.batch_size):
            idx = perm[start : start + config.batch_size]
            grads = _backward_batch(params, X[idx], y[idx])
            scale = config.learning_rate / len(idx)
            for name in LstmParams.field_names():
                getattr(params, name)[...] -= scale * getattr(grads, name)
        probs = _predict_matrix(params, X)
        with np.errstate(divide="ignore"):
            epoch_loss = float(-np.mean(np.log(probs[np.arange(N), y])))
        if not np.isfinite(epoch_loss):
            raise LstmDivergenceError(
                f"training diverged at epoch {epoch}", epoch=epoch
            )
        acc = float(np.mean(probs.argmax(axis=1) == y))
        trace.append(EpochStats(epoch, epoch_loss, acc))
        if progress is not None:
            progress(trace[-1])
    return params, trace


def predict_prob(params: LstmParams, x, levels: int) -> np.ndarray:
    """Discretize one window and return its class probability vector."""
    return forward(params, discretize(x, levels))[0]


def predict_batch(params: LstmParams, windows, levels: int) -> np.ndarray:
    """Probability vectors for many windows (rows)."""
    if hasattr(windows, "matrix"):
        windows = windows.matrix
    X = np.stack([discretize(row, levels) for row in np.asarray(windows, dtype=np.float64)])
    return _predict_matrix(params, X)


def save_checkpoint(path, params: LstmParams, *, levels: int, seed: int, epoch: int) -> None:
    """Binary parameter dump with a header; load/save round-trip is exact."""
    arrays = {name: getattr(params, name) for name in LstmParams.field_names()}
    np.savez(
        path,
        format_version=np.int64(CHECKPOINT_VERSION),
        hidden=np.int64(params.hidden),
        num_classes=np.int64(params.num_classes),
        levels=np.int64(levels),
        seed=np.int64(seed),
        epoch=np.int64(epoch),
        **arrays,
    )


def load_checkpoint(path) -> tuple[LstmParams, dict]:
    with np.load(path) as data:
        version = int(data["format_version"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        params = LstmParams(*[data[name] for name in LstmParams.field_names()])
        meta = {
            "hidden": int(data["hidden"]),
            "num_classes": int(data["num_classes"]),
            "levels": int(data["levels"]),
            "seed": int(data["seed"]),
            "epoch": int(data["epoch"]),
        }
    return params, meta


def write_loss_trace(path, trace: Sequence[EpochStats]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "train_acc"])
        for row in trace:
            writer.writerow([row.epoch, repr(row.loss), repr(row.train_acc)])
