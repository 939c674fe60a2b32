"""Elastic distance measurements between fixed-length series.

Kernels: banded DTW (squared or absolute point cost), local time warping
(LTW) over a warping index set plus its commutative variant, the LB_Keogh
envelope bound used directly as a distance, move-split-merge (MSM), plain
Euclidean, and a complexity-ratio multiplier that can enhance any of them.

LTW is directional: ``ltw(x, y, G)`` measures how well ``y`` explains the
base sequence ``x``.  Nearest-neighbour search for a query ``q`` must call
``ltw(q, candidate, G)`` with the query first.

Compute runs on the backend selected by ``POWERSEQ_BACKEND`` (see
``powerseq._backend``); every public function takes an optional ``backend``
override.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _backend
from . import _kernels_numpy

CID_EPSILON = 1e-9

_COST_CODES = {"squared": 0, "abs": 1}

_KINDS = ("dtw", "dtw_manhattan", "ltw", "ltw_com", "lb_keogh", "msm", "euclidean")


def _kernels(backend: str | None):
    name = _backend.resolve_backend(backend)
    if name == "numba":
        from . import _kernels_numba

        return _kernels_numba
    return _kernels_numpy


def _as_1d(x) -> np.ndarray:
    values = getattr(x, "values", x)
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("expected a non-empty 1-D series")
    return arr


def _as_2d(rows) -> np.ndarray:
    if hasattr(rows, "matrix"):
        rows = rows.matrix
    arr = np.ascontiguousarray(rows, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("expected a non-empty 2-D batch of series")
    return arr


def _check_equal_length(x: np.ndarray, y: np.ndarray) -> int:
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(
            f"series lengths differ: {x.shape[-1]} vs {y.shape[-1]}"
        )
    return int(x.shape[-1])


def _cost_code(point_cost: str) -> int:
    try:
        return _COST_CODES[point_cost]
    except KeyError:
        raise ValueError(
            f"point_cost must be one of {sorted(_COST_CODES)}, got {point_cost!r}"
        ) from None


@dataclass(frozen=True, order=True)
class WarpIndexSet:
    """The set G of positive local warping offsets used by LTW."""

    offsets: tuple[int, ...]

    def __post_init__(self):
        offs = tuple(sorted({int(k) for k in self.offsets}))
        if not offs:
            raise ValueError("warping index set must be non-empty")
        if offs[0] < 1:
            raise ValueError(f"warping offsets must be >= 1, got {offs[0]}")
        object.__setattr__(self, "offsets", offs)

    @classmethod
    def of(cls, offsets: "WarpIndexSet | Iterable[int] | int") -> "WarpIndexSet":
        if isinstance(offsets, WarpIndexSet):
            return offsets
        if isinstance(offsets, (int, np.integer)):
            return cls((int(offsets),))
        return cls(tuple(offsets))

    @classmethod
    def parse(cls, text: str) -> "WarpIndexSet":
        """Parse ``"1-10"``, ``"10"`` or ``"1-4,10"`` style offset lists."""
        offsets: list[int] = []
        for part in text.split(","):
            part = part.strip()
            if not part:
                raise ValueError(f"empty item in warping set {text!r}")
            if "-" in part:
                a, _, b = part.partition("-")
                try:
                    lo, hi = int(a), int(b)
                except ValueError:
                    raise ValueError(f"bad warping range {part!r}") from None
                if lo > hi:
                    raise ValueError(f"descending warping range {part!r}")
                offsets.extend(range(lo, hi + 1))
            else:
                try:
                    offsets.append(int(part))
                except ValueError:
                    raise ValueError(f"bad warping offset {part!r}") from None
        return cls(tuple(offsets))

    def to_string(self) -> str:
        parts = []
        offs = self.offsets
        i = 0
        while i < len(offs):
            j = i
            while j + 1 < len(offs) and offs[j + 1] == offs[j] + 1:
                j += 1
            parts.append(str(offs[i]) if i == j else f"{offs[i]}-{offs[j]}")
            i = j + 1
        return ",".join(parts)

    def check_length(self, n: int) -> None:
        if self.offsets[-1] > (n - 1) // 2:
            raise ValueError(
                f"warping offset {self.offsets[-1]} too large for length {n}; "
                f"need k <= (n-1)/2"
            )

    def as_array(self) -> np.ndarray:
        return np.asarray(self.offsets, dtype=np.int64)


def dtw(x, y, w: int | None = None, point_cost: str = "squared", *, backend: str | None = None) -> float:
    """Banded dynamic time warping distance between equal-length series.

    ``w`` is the maximum index offset |i-j| allowed in the alignment
    (``None`` means unconstrained).  ``point_cost`` selects squared (the
    default) or absolute per-step cost; the result is the accumulated cost
    without a final root.  Symmetric in its arguments.
    """
    xa, ya = _as_1d(x), _as_1d(y)
    n = _check_equal_length(xa, ya)
    if w is None:
        w = n
    w = int(w)
    if w < 0:
        raise ValueError(f"window must be >= 0, got {w}")
    if w > n:
        raise ValueError(f"window {w} exceeds series length {n}")
    return float(_kernels(backend).dtw_pair(xa, ya, w, _cost_code(point_cost)))


def ltw_k(x, y, k: int, *, backend: str | None = None) -> float:
    """Single-offset local time warping term.

    Sums, over the valid index range, the minimum of the three local
    differences |x_i-y_i|, |x_i-y_{i+1}|, |x_i-y_{i+k}|.  Linear in the
    series length and not symmetric in x and y.
    """
    xa, ya = _as_1d(x), _as_1d(y)
    n = _check_equal_length(xa, ya)
    k = int(k)
    if not 1 <= k <= (n - 1) // 2:
        raise ValueError(f"offset k={k} out of range for length {n}; need 1 <= k <= (n-1)/2")
    ks = np.asarray([k], dtype=np.int64)
    return float(_kernels(backend).ltw_pair(xa, ya, ks))


def ltw(x, y, G, *, backend: str | None = None) -> float:
    """Local time warping distance: sum of the single-offset terms over G.

    Directional; the first argument is the query/base sequence.
    """
    xa, ya = _as_1d(x), _as_1d(y)
    n = _check_equal_length(xa, ya)
    g = WarpIndexSet.of(G)
    g.check_length(n)
    return float(_kernels(backend).ltw_pair(xa, ya, g.as_array()))


def ltw_com(x, y, G, *, backend: str | None = None) -> float:
    """Commutative LTW variant: ltw(x, y, G) + ltw(y, x, G)."""
    return ltw(x, y, G, backend=backend) + ltw(y, x, G, backend=backend)


def lb_keogh(x, y, w: int, point_cost: str = "squared", *, backend: str | None = None) -> float:
    """Envelope lower bound on banded DTW, used directly as a distance.

    The envelope is built over ``y`` (second argument), so the measure is
    not symmetric; point cost must match the DTW being bounded.
    """
    xa, ya = _as_1d(x), _as_1d(y)
    n = _check_equal_length(xa, ya)
    w = int(w)
    if not 0 <= w < n:
        raise ValueError(f"envelope window must satisfy 0 <= w < {n}, got {w}")
    return float(_kernels(backend).lb_keogh_pair(xa, ya, w, _cost_code(point_cost)))


def msm(x, y, c: float = 1.0, *, backend: str | None = None) -> float:
    """Move-split-merge edit distance; lengths may differ.  Symmetric."""
    xa, ya = _as_1d(x), _as_1d(y)
    c = float(c)
    if c <= 0:
        raise ValueError(f"msm cost must be positive, got {c}")
    return float(_kernels(backend).msm_pair(xa, ya, c))


def euclidean(x, y, *, backend: str | None = None) -> float:
    """Plain Euclidean distance between equal-length series."""
    xa, ya = _as_1d(x), _as_1d(y)
    _check_equal_length(xa, ya)
    return float(_kernels(backend).euclidean_pair(xa, ya))


def complexity_estimate(x) -> float:
    """Root sum of squared consecutive differences; needs length >= 2."""
    xa = _as_1d(x)
    if xa.shape[0] < 2:
        raise ValueError("complexity estimate needs at least 2 samples")
    d = np.diff(xa)
    return float(np.sqrt(np.sum(d * d)))


def cid_enhance(d: float, x, y) -> float:
    """Scale a distance by the complexity ratio of the two series.

    The factor (max(CE)+eps)/(min(CE)+eps) is always >= 1 and equals 1
    when the complexities match, so the enhanced value never shrinks.
    """
    d = float(d)
    if not np.isfinite(d):
        raise ValueError("distance to enhance must be finite")
    ce_x = complexity_estimate(x)
    ce_y = complexity_estimate(y)
    hi, lo = (ce_x, ce_y) if ce_x >= ce_y else (ce_y, ce_x)
    return d * ((hi + CID_EPSILON) / (lo + CID_EPSILON))


@dataclass(frozen=True)
class DistanceSpec:
    """A fully configured distance measurement.

    ``kind`` picks the kernel; ``w`` configures dtw/lb_keogh, ``G`` the two
    LTW variants, ``msm_cost`` MSM.  ``cid_enhanced`` applies the complexity
    ratio on top of the base value.
    """

    kind: str
    w: int | None = None
    G: WarpIndexSet | None = None
    msm_cost: float | None = None
    point_cost: str = "squared"
    cid_enhanced: bool = False

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown distance kind {self.kind!r}")
        if self.kind in ("dtw", "dtw_manhattan", "lb_keogh"):
            if self.w is None and self.kind == "lb_keogh":
                raise ValueError("lb_keogh requires an envelope window w")
            if self.w is not None and self.w < 0:
                raise ValueError("window must be >= 0")
        if self.kind in ("ltw", "ltw_com"):
            if self.G is None:
                raise ValueError(f"{self.kind} requires a warping index set G")
            object.__setattr__(self, "G", WarpIndexSet.of(self.G))
        if self.kind == "msm":
            cost = 1.0 if self.msm_cost is None else float(self.msm_cost)
            if cost <= 0:
                raise ValueError("msm cost must be positive")
            object.__setattr__(self, "msm_cost", cost)
        if self.kind == "dtw_manhattan":
            object.__setattr__(self, "point_cost", "abs")
        if self.point_cost not in _COST_CODES:
            raise ValueError(f"unknown point cost {self.point_cost!r}")

    @property
    def commutative(self) -> bool:
        return self.kind in ("dtw", "dtw_manhattan", "msm", "euclidean", "ltw_com")

    @classmethod
    def parse(cls, text: str) -> "DistanceSpec":
        """Parse the compact CLI form, e.g. ``dtw:w=30:cost=sq``,
        ``ltw:G=1-10:cid``, ``lbk:w=5``, ``msm:c=1.0``, ``euclid``."""
        parts = [p.strip() for p in text.strip().split(":")]
        alias = {
            "dtw": "dtw",
            "dtwm": "dtw_manhattan",
            "dtw_manhattan": "dtw_manhattan",
            "ltw": "ltw",
            "ltwcom": "ltw_com",
            "ltw_com": "ltw_com",
            "lbk": "lb_keogh",
            "lb_keogh": "lb_keogh",
            "msm": "msm",
            "euclid": "euclidean",
            "euclidean": "euclidean",
        }
        head = parts[0].lower()
        if head not in alias:
            raise ValueError(f"unknown distance kind {parts[0]!r} in {text!r}")
        kind = alias[head]
        kwargs: dict = {}
        for part in parts[1:]:
            if not part:
                raise ValueError(f"empty option in spec {text!r}")
            if part.lower() == "cid":
                kwargs["cid_enhanced"] = True
                continue
            key, sep, value = part.partition("=")
            key = key.strip().lower()
            if not sep:
                raise ValueError(f"bad option {part!r} in spec {text!r}")
            if key == "w":
                try:
                    kwargs["w"] = int(value)
                except ValueError:
                    raise ValueError(f"bad window {value!r} in spec {text!r}") from None
            elif key == "g":
                kwargs["G"] = WarpIndexSet.parse(value)
            elif key == "c":
                try:
                    kwargs["msm_cost"] = float(value)
                except ValueError:
                    raise ValueError(f"bad msm cost {value!r} in spec {text!r}") from None
            elif key == "cost":
                try:
                    kwargs["point_cost"] = {"sq": "squared", "squared": "squared", "abs": "abs"}[value.strip().lower()]
                except KeyError:
                    raise ValueError(f"bad point cost {value!r} in spec {text!r}") from None
            else:
                raise ValueError(f"unknown option key {key!r} in spec {text!r}")
        allowed = {
            "dtw": {"w", "point_cost", "cid_enhanced"},
            "dtw_manhattan": {"w", "cid_enhanced"},
            "ltw": {"G", "cid_enhanced"},
            "ltw_com": {"G", "cid_enhanced"},
            "lb_keogh": {"w", "point_cost", "cid_enhanced"},
            "msm": {"msm_cost", "cid_enhanced"},
            "euclidean": {"cid_enhanced"},
        }[kind]
        extra = set(kwargs) - allowed
        if extra:
            raise ValueError(f"option(s) {sorted(extra)} not valid for {kind} in {text!r}")
        return cls(kind=kind, **kwargs)

    def to_string(self) -> str:
        rev = {
            "dtw": "dtw",
            "dtw_manhattan": "dtwm",
            "ltw": "ltw",
            "ltw_com": "ltwcom",
            "lb_keogh": "lbk",
            "msm": "msm",
            "euclidean": "euclid",
        }
        parts = [rev[self.kind]]
        if self.kind in ("dtw", "dtw_manhattan", "lb_keogh") and self.w is not None:
            parts.append(f"w={self.w}")
        if self.kind == "dtw" and self.point_cost == "abs":
            parts.append("cost=abs")
        if self.kind == "lb_keogh" and self.point_cost == "abs":
            parts.append("cost=abs")
        if self.kind in ("ltw", "ltw_com"):
            parts.append(f"G={self.G.to_string()}")
        if self.kind == "msm":
            parts.append(f"c={self.msm_cost:g}")
        if self.cid_enhanced:
            parts.append("cid")
        return ":".join(parts)


def _base_evaluate(spec: DistanceSpec, x, y, backend: str | None) -> float:
    if spec.kind in ("dtw", "dtw_manhattan"):
        return dtw(x, y, spec.w, spec.point_cost, backend=backend)
    if spec.kind == "ltw":
        return ltw(x, y, spec.G, backend=backend)
    if spec.kind == "ltw_com":
        return ltw_com(x, y, spec.G, backend=backend)
    if spec.kind == "lb_keogh":
        return lb_keogh(x, y, spec.w, spec.point_cost, backend=backend)
    if spec.kind == "msm":
        return msm(x, y, spec.msm_cost, backend=backend)
    return euclidean(x, y, backend=backend)


def evaluate(spec: DistanceSpec, x, y, *, backend: str | None = None) -> float:
    """Measure the distance configured by ``spec`` from x (query) to y."""
    d = _base_evaluate(spec, x, y, backend)
    if spec.cid_enhanced:
        d = cid_enhance(d, x, y)
    return d


def _ce_rows(rows: np.ndarray) -> np.ndarray:
    d = np.diff(rows, axis=1)
    return np.sqrt(np.sum(d * d, axis=1))


def _apply_cid_matrix(base: np.ndarray, queries: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    ce_q = _ce_rows(queries) + CID_EPSILON
    ce_t = _ce_rows(candidates) + CID_EPSILON
    factor = np.maximum.outer(ce_q, ce_t) / np.minimum.outer(ce_q, ce_t)
    return base * factor


def evaluate_many(spec: DistanceSpec, queries, candidates, *, backend: str | None = None) -> np.ndarray:
    """Distance matrix from each query (rows, kept first for directional
    kinds) to each candidate."""
    q = _as_2d(queries)
    t = _as_2d(candidates)
    n = _check_equal_length(q, t)
    kern = _kernels(backend)
    if spec.kind in ("dtw", "dtw_manhattan"):
        w = n if spec.w is None else spec.w
        if w > n:
            raise ValueError(f"window {w} exceeds series length {n}")
        base = kern.dtw_many(q, t, w, _cost_code(spec.point_cost))
    elif spec.kind == "ltw":
        spec.G.check_length(n)
        base = kern.ltw_many(q, t, spec.G.as_array())
    elif spec.kind == "ltw_com":
        spec.G.check_length(n)
        base = kern.ltw_many(q, t, spec.G.as_array()) + kern.ltw_many(t, q, spec.G.as_array()).T
    elif spec.kind == "lb_keogh":
        if spec.w >= n:
            raise ValueError(f"envelope window must satisfy 0 <= w < {n}")
        base = kern.lb_keogh_many(q, t, spec.w, _cost_code(spec.point_cost))
    elif spec.kind == "msm":
        base = kern.msm_many(q, t, spec.msm_cost)
    else:
        base = kern.euclidean_many(q, t)
    if spec.cid_enhanced:
        base = _apply_cid_matrix(base, q, t)
    return base


def evaluate_pairs(spec: DistanceSpec, xs, ys, *, backend: str | None = None) -> np.ndarray:
    """Row-wise distances between two equal-shape batches (bench path)."""
    xa = _as_2d(xs)
    ya = _as_2d(ys)
    if xa.shape != ya.shape:
        raise ValueError("paired batches must have identical shape")
    n = xa.shape[1]
    kern = _kernels(backend)
    if spec.kind in ("dtw", "dtw_manhattan"):
        w = n if spec.w is None else spec.w
        if w > n:
            raise ValueError(f"window {w} exceeds series length {n}")
        base = kern.dtw_pairs(xa, ya, w, _cost_code(spec.point_cost))
    elif spec.kind == "ltw":
        spec.G.check_length(n)
        base = kern.ltw_pairs(xa, ya, spec.G.as_array())
    elif spec.kind == "ltw_com":
        spec.G.check_length(n)
        base = kern.ltw_pairs(xa, ya, spec.G.as_array()) + kern.ltw_pairs(ya, xa, spec.G.as_array())
    elif spec.kind == "lb_keogh":
        if spec.w >= n:
            raise ValueError(f"envelope window must satisfy 0 <= w < {n}")
        base = kern.lb_keogh_pairs(xa, ya, spec.w, _cost_code(spec.point_cost))
    elif spec.kind == "msm":
        base = kern.msm_pairs(xa, ya, spec.msm_cost)
    else:
        base = kern.euclidean_pairs(xa, ya)
    if spec.cid_enhanced:
        ce_x = _ce_rows(xa) + CID_EPSILON
        ce_y = _ce_rows(ya) + CID_EPSILON
        base = base * (np.maximum(ce_x, ce_y) / np.minimum(ce_x, ce_y))
    return base
