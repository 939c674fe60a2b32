"""Kernel backend selection.

The hot distance kernels exist twice: a numba ``@njit`` build and a pure
numpy fallback.  The environment variable ``POWERSEQ_BACKEND`` picks one:

* unset or ``auto``: numba when importable, else numpy
* ``numba``: require numba, fail loudly if it is missing
* ``numpy``: force the fallback (useful for debugging and benchmarking)

Both backends compute the same values; ``powerseq bench --backends both``
measures the speed difference.
"""

from __future__ import annotations

import os

ENV_VAR = "POWERSEQ_BACKEND"
BACKENDS = ("numba", "numpy")


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _detect() -> str:
    choice = os.environ.get(ENV_VAR, "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if _numba_available() else "numpy"
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not _numba_available():
            raise RuntimeError(
                f"{ENV_VAR}=numba requested but numba is not importable"
            )
        return "numba"
    raise ValueError(
        f"{ENV_VAR} must be one of auto/numba/numpy, got {choice!r}"
    )


ACTIVE = _detect()


def active_backend() -> str:
    """Name of the backend chosen at import time."""
    return ACTIVE


def resolve_backend(name: str | None) -> str:
    """Map an optional per-call override to a concrete backend name."""
    if name is None or name == "active":
        return ACTIVE
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}, expected one of {BACKENDS}")
    if name == "numba" and not _numba_available():
        raise RuntimeError("numba backend requested but numba is not importable")
    return name
