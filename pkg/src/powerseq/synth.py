"""Seedable synthetic power-trace corpus.

Thirteen class profiles emulate the two families of server workloads:
stage-patterned batch jobs (piecewise power levels with ramps between
stages) and a continuously fluctuating web-server class.  Classes are made
deliberately similar through shared stage motifs, and every trace gets a
random onset delay, local time warping, and additive noise so that
lock-step distances struggle while elastic ones do not.

Two dials control the distortion: ``noise_std`` gates all level randomness
(stage level jitter and additive noise) and ``warp_max`` gates all time
randomness (duration jitter, onset delay, resampling warp).  With
``noise_std=0`` and ``warp_max=1`` every trace of a class is identical.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, replace

import numpy as np

from .series import Series

BUNDLE_VERSION = "1.0"

_IDLE_LEVEL = 0.08
_SMOOTH_WIDTH = 9
_WARP_SEGMENTS = 7
_MIN_STAGE_STEPS = 6


@dataclass(frozen=True)
class Stage:
    """One power stage: duration (steps) and level (normalized watts),
    each with a mean and a jitter std.  ``motif`` names stages shared
    across classes."""

    dur_mean: float
    dur_std: float
    level_mean: float
    level_std: float
    motif: str | None = None

    def __post_init__(self):
        if self.dur_mean <= 0:
            raise ValueError("stage duration must be positive")
        if self.dur_std < 0 or self.level_std < 0:
            raise ValueError("stage stds must be non-negative")


@dataclass(frozen=True)
class ClassProfile:
    """Generation recipe for one class.

    ``ripple_amp``/``ripple_period`` add a deterministic oscillation on top
    of each stage level (think fan/CPU duty cycles); time warping de-phases
    it, which is what separates elastic from lock-step distances.
    """

    class_id: int
    stages: tuple[Stage, ...]
    continuous: bool = False
    noise_std: float = 0.04
    warp_max: float = 1.12
    onset_max: int = 22
    ripple_amp: float = 0.04
    ripple_period: float = 23.0

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.continuous and len(self.stages) < 2:
            raise ValueError("staged profiles need at least 2 stages")
        if self.continuous and len(self.stages) < 1:
            raise ValueError("continuous profiles need a duration/level stage")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if self.warp_max < 1:
            raise ValueError("warp intensity must be >= 1")
        if self.onset_max < 0:
            raise ValueError("onset_max must be >= 0")
        if self.ripple_amp < 0 or self.ripple_period <= 0:
            raise ValueError("ripple parameters out of range")

    @property
    def motif_ids(self) -> frozenset[str]:
        return frozenset(s.motif for s in self.stages if s.motif)


def _smooth(x: np.ndarray, width: int = _SMOOTH_WIDTH) -> np.ndarray:
    if len(x) <= width:
        return x
    kernel = np.hamming(width)
    kernel /= kernel.sum()
    padded = np.pad(x, width // 2, mode="edge")
    return np.convolve(padded, kernel, mode="valid")[: len(x)]


def _warp_time(x: np.ndarray, rng: np.random.Generator, warp_max: float) -> np.ndarray:
    """Piecewise-linear resampling of the time axis; each of the
    _WARP_SEGMENTS chunks is stretched by an independent factor in
    [1/warp_max, warp_max]."""
    n = len(x)
    slopes = rng.uniform(1.0 / warp_max, warp_max, _WARP_SEGMENTS)
    src_bounds = np.linspace(0.0, n - 1.0, _WARP_SEGMENTS + 1)
    seg_src = np.diff(src_bounds)
    dst_bounds = np.concatenate(([0.0], np.cumsum(seg_src * slopes)))
    m = max(2, int(round(dst_bounds[-1])) + 1)
    dst_grid = np.linspace(0.0, dst_bounds[-1], m)
    src_idx = np.interp(dst_grid, dst_bounds, src_bounds)
    return np.interp(src_idx, np.arange(n), x)


def _render_staged(profile: ClassProfile, rng: np.random.Generator) -> np.ndarray:
    jitter_time = profile.warp_max > 1.0
    jitter_level = profile.noise_std > 0.0
    chunks = []
    for s_idx, stage in enumerate(profile.stages):
        dur = stage.dur_mean
        if jitter_time:
            dur = rng.normal(stage.dur_mean, stage.dur_std)
        dur = max(_MIN_STAGE_STEPS, int(round(dur)))
        level = stage.level_mean
        if jitter_level:
            level = rng.normal(stage.level_mean, stage.level_std)
        t_local = np.arange(dur, dtype=np.float64)
        ripple = profile.ripple_amp * np.sin(
            2.0 * np.pi * t_local / profile.ripple_period + 0.9 * s_idx
        )
        chunks.append(level + ripple)
    return _smooth(np.concatenate(chunks))


def _render_continuous(profile: ClassProfile, rng: np.random.Generator) -> np.ndarray:
    jitter_time = profile.warp_max > 1.0
    jitter_level = profile.noise_std > 0.0
    base_stage = profile.stages[0]
    dur = base_stage.dur_mean
    if jitter_time:
        dur = rng.normal(base_stage.dur_mean, base_stage.dur_std)
    n = max(_MIN_STAGE_STEPS, int(round(dur)))
    t = np.arange(n, dtype=np.float64)
    # fixed per-class oscillation bank keeps the noise-free pattern identical
    periods = (37.0, 83.0, 151.0, 223.0)
    amps = (0.05, 0.09, 0.12, 0.07)
    phases = (0.0, 1.1, 2.3, 4.0)
    x = np.full(n, base_stage.level_mean)
    for period, amp, phase in zip(periods, amps, phases):
        x += amp * np.sin(2.0 * np.pi * t / period + phase)
    if jitter_level:
        wander = _smooth(rng.normal(0.0, 1.0, n), 25) * (4.0 * profile.noise_std)
        x = x + wander
    return x


def generate_trace(profile: ClassProfile, rng: np.random.Generator,
                   min_len: int) -> np.ndarray:
    """Render one trace: stages (or the fluctuating pattern), then warp,
    onset delay, and additive noise; stretched up to min_len if short."""
    if profile.continuous:
        x = _render_continuous(profile, rng)
    else:
        x = _render_staged(profile, rng)
    if profile.warp_max > 1.0:
        x = _warp_time(x, rng, profile.warp_max)
        onset = int(rng.integers(0, profile.onset_max + 1))
        if onset:
            x = np.concatenate((np.full(onset, _IDLE_LEVEL), x))
    if profile.noise_std > 0.0:
        x = x + rng.normal(0.0, profile.noise_std, len(x))
    if len(x) < min_len:
        src = np.linspace(0.0, len(x) - 1.0, min_len)
        x = np.interp(src, np.arange(len(x)), x)
    return x


def generate_corpus(profiles, traces_per_class: int, min_len: int,
                    seed: int) -> list[Series]:
    """Labeled full-length traces, ``traces_per_class`` per profile.

    Deterministic for a given seed; every trace draws from its own
    substream keyed by (seed, class, index), so corpora are stable under
    reordering of profiles.
    """
    profiles = list(profiles)
    if not profiles:
        raise ValueError("no class profiles given")
    ids = [p.class_id for p in profiles]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate class ids in profile bundle")
    if traces_per_class < 5:
        raise ValueError("need at least 5 traces per class")
    out: list[Series] = []
    for profile in profiles:
        for idx in range(traces_per_class):
            rng = np.random.default_rng([seed, profile.class_id, idx])
            values = generate_trace(profile, rng, min_len)
            out.append(Series(values, profile.class_id,
                              f"c{profile.class_id:02d}t{idx:03d}"))
    return out


def _spark_init() -> Stage:
    return Stage(48, 7, 0.34, 0.015, motif="spark_init")


def _spark_done() -> Stage:
    return Stage(40, 6, 0.18, 0.012, motif="spark_done")


def _hadoop_init() -> Stage:
    return Stage(56, 8, 0.44, 0.015, motif="hadoop_init")


def _hadoop_done() -> Stage:
    return Stage(46, 7, 0.24, 0.012, motif="hadoop_done")


def _wc_scan() -> Stage:
    return Stage(100, 12, 0.82, 0.02, motif="wc_scan")


def _sort_shuffle() -> Stage:
    return Stage(95, 12, 0.52, 0.02, motif="sort_shuffle")


def default_profiles() -> list[ClassProfile]:
    """The versioned 13-class bundle used by the acceptance runs.

    Classes 0-11 are stage-patterned batch jobs (classes 0, 1, 2 pairwise
    share the two spark motifs; 9, 10, 11 the two hadoop motifs; word-count
    and sorting workloads additionally reappear on both platforms), class
    12 is the continuously fluctuating web-server profile.
    """
    s = lambda *a: Stage(*a)  # noqa: E731 - keeps the stage tables readable
    profiles = [
        ClassProfile(0, (
            _spark_init(), _wc_scan(), s(75, 10, 0.55, 0.02),
            s(60, 8, 0.70, 0.02), _spark_done(),
        )),
        ClassProfile(1, (
            _spark_init(), s(80, 10, 0.65, 0.02), _sort_shuffle(),
            s(65, 9, 0.88, 0.02), _spark_done(),
        )),
        ClassProfile(2, (
            _spark_init(), s(150, 18, 0.93, 0.02), s(55, 8, 0.40, 0.02),
            _spark_done(),
        )),
        ClassProfile(3, (
            s(45, 6, 0.30, 0.015), s(48, 6, 0.75, 0.02), s(34, 5, 0.45, 0.02),
            s(48, 6, 0.75, 0.02), s(34, 5, 0.45, 0.02), s(42, 6, 0.35, 0.015),
        )),
        ClassProfile(4, (
            s(40, 5, 0.32, 0.015), s(36, 5, 0.85, 0.02), s(26, 4, 0.50, 0.02),
            s(36, 5, 0.85, 0.02), s(26, 4, 0.50, 0.02), s(36, 5, 0.85, 0.02),
            s(40, 5, 0.30, 0.015),
        )),
        ClassProfile(5, (
            s(46, 6, 0.30, 0.015), s(120, 14, 0.58, 0.02), s(62, 8, 0.72, 0.02),
            s(40, 5, 0.30, 0.015),
        )),
        ClassProfile(6, (
            s(46, 6, 0.30, 0.015), s(110, 13, 0.68, 0.02), s(68, 9, 0.50, 0.02),
            s(52, 7, 0.62, 0.02), s(40, 5, 0.30, 0.015),
        )),
        ClassProfile(7, (
            s(42, 5, 0.28, 0.015), s(72, 9, 0.50, 0.02), s(72, 9, 0.62, 0.02),
            s(72, 9, 0.50, 0.02), s(40, 5, 0.28, 0.015),
        )),
        ClassProfile(8, (
            s(42, 5, 0.33, 0.015), s(95, 12, 0.78, 0.02), s(95, 12, 0.42, 0.02),
            s(40, 5, 0.33, 0.015),
        )),
        ClassProfile(9, (
            _hadoop_init(), _wc_scan(), s(100, 12, 0.48, 0.02), _hadoop_done(),
        )),
        ClassProfile(10, (
            _hadoop_init(), s(80, 10, 0.58, 0.02), _sort_shuffle(),
            s(90, 11, 0.80, 0.02), _hadoop_done(),
        )),
        ClassProfile(11, (
            _hadoop_init(), s(155, 18, 0.90, 0.02), s(60, 8, 0.35, 0.02),
            _hadoop_done(),
        )),
        ClassProfile(12, (s(340, 40, 0.45, 0.02),), continuous=True),
    ]
    return profiles


def scale_distortion(profiles, *, noise: float | None = None,
                     warp: float | None = None) -> list[ClassProfile]:
    """Copy a bundle with the noise and/or warp dials overridden."""
    out = []
    for p in profiles:
        kwargs = {}
        if noise is not None:
            kwargs["noise_std"] = noise
        if warp is not None:
            kwargs["warp_max"] = warp
        out.append(replace(p, **kwargs))
    return out


def _format_stage(stage: Stage) -> str:
    head = f"{stage.dur_mean:g}:{stage.dur_std:g}:{stage.level_mean:g}:{stage.level_std:g}"
    return head + (f":{stage.motif}" if stage.motif else "")


def _parse_stage(text: str) -> Stage:
    parts = text.strip().split(":")
    if len(parts) not in (4, 5):
        raise ValueError(f"bad stage {text!r}; expected dur:std:level:std[:motif]")
    try:
        nums = [float(p) for p in parts[:4]]
    except ValueError:
        raise ValueError(f"bad stage numbers in {text!r}") from None
    motif = parts[4] if len(parts) == 5 else None
    return Stage(*nums, motif=motif)


def save_profiles(profiles, path) -> None:
    """Write a bundle as a key=value sections config (one per class)."""
    cfg = configparser.ConfigParser()
    cfg["bundle"] = {"version": BUNDLE_VERSION}
    for p in profiles:
        cfg[f"class-{p.class_id}"] = {
            "continuous": str(p.continuous).lower(),
            "noise_std": f"{p.noise_std:g}",
            "warp_max": f"{p.warp_max:g}",
            "onset_max": str(p.onset_max),
            "ripple_amp": f"{p.ripple_amp:g}",
            "ripple_period": f"{p.ripple_period:g}",
            "stages": "; ".join(_format_stage(s) for s in p.stages),
        }
    with open(path, "w") as fh:
        cfg.write(fh)


def load_profiles(path) -> list[ClassProfile]:
    cfg = configparser.ConfigParser()
    if not cfg.read(path):
        raise ValueError(f"cannot read profile bundle {path}")
    profiles = []
    for section in cfg.sections():
        if not section.startswith("class-"):
            continue
        class_id = int(section.split("-", 1)[1])
        sec = cfg[section]
        stages = tuple(_parse_stage(s) for s in sec["stages"].split(";") if s.strip())
        profiles.append(ClassProfile(
            class_id=class_id,
            stages=stages,
            continuous=sec.getboolean("continuous", fallback=False),
            noise_std=sec.getfloat("noise_std", fallback=0.04),
            warp_max=sec.getfloat("warp_max", fallback=1.12),
            onset_max=sec.getint("onset_max", fallback=22),
            ripple_amp=sec.getfloat("ripple_amp", fallback=0.04),
            ripple_period=sec.getfloat("ripple_period", fallback=23.0),
        ))
    if not profiles:
        raise ValueError(f"no class sections in profile bundle {path}")
    return sorted(profiles, key=lambda p: p.class_id)


def bundle_fingerprint(profiles) -> str:
    """Stable hash of a bundle's full parameterization."""
    text = "|".join(
        f"{p.class_id};{int(p.continuous)};{p.noise_std:g};{p.warp_max:g};"
        f"{p.onset_max};{p.ripple_amp:g};{p.ripple_period:g};"
        + ",".join(_format_stage(s) for s in p.stages)
        for p in sorted(profiles, key=lambda p: p.class_id)
    )
    return hashlib.sha256(text.encode()).hexdigest()
