"""Hot state-vector kernels with a numba path and a pure-numpy fallback.

The backend is chosen at import time from ``NOISY_ORACLE_JIT`` (``0``/``false``
selects numpy) and can be switched at runtime with :func:`set_backend`.
Both paths operate in place on a contiguous ``complex128`` amplitude array
and give results equal to within floating-point rounding.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_FALSY = {"0", "false", "no", "off"}

_backend = "numpy"


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if numba is not None else ("numpy",)


def set_backend(name: str) -> None:
    global _backend
    if name not in available_backends():
        raise ValueError(f"unknown or unavailable kernel backend {name!r}")
    _backend = name


def get_backend() -> str:
    return _backend


# ---------------------------------------------------------------------------
# numpy implementations


def _rotate_np(amps, mask, c, s):
    idx = np.arange(amps.shape[0])
    lo = idx[(idx & mask) == 0]
    hi = lo | mask
    a = amps[lo]
    b = amps[hi]
    amps[lo] = c * a + s * b
    amps[hi] = -s * a + c * b


def _permute_np(amps, perm):
    amps[:] = amps[perm]


def _oracle_rounds_np(amps, perm, draws, masks, c, s):
    idx = np.arange(amps.shape[0])
    pairs = []
    for mask in masks:
        lo = idx[(idx & mask) == 0]
        pairs.append((lo, lo | mask))
    for d in draws:
        if d:
            amps[:] = amps[perm]
        for lo, hi in pairs:
            a = amps[lo]
            b = amps[hi]
            amps[lo] = c * a + s * b
            amps[hi] = -s * a + c * b


def _phase_rounds_np(amps, index, draws, phase):
    amps[index] *= phase ** int(np.count_nonzero(draws))


# ---------------------------------------------------------------------------
# numba implementations

if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def _rotate_nb(amps, mask, c, s):
        for i in range(amps.shape[0]):
            if i & mask == 0:
                j = i | mask
                a = amps[i]
                b = amps[j]
                amps[i] = c * a + s * b
                amps[j] = -s * a + c * b

    @numba.njit(cache=True, nogil=True)
    def _permute_nb(amps, perm):
        # perm is an involution: swap each moved pair once
        for i in range(amps.shape[0]):
            j = perm[i]
            if j > i:
                tmp = amps[i]
                amps[i] = amps[j]
                amps[j] = tmp

    @numba.njit(cache=True, nogil=True)
    def _oracle_rounds_nb(amps, perm, draws, masks, c, s):
        n = amps.shape[0]
        # only indices moved by the oracle need swapping
        moved = np.empty(n, dtype=np.int64)
        k = 0
        for i in range(n):
            if perm[i] > i:
                moved[k] = i
                k += 1
        for r in range(draws.shape[0]):
            if draws[r]:
                for q in range(k):
                    i = moved[q]
                    j = perm[i]
                    tmp = amps[i]
                    amps[i] = amps[j]
                    amps[j] = tmp
            for m in range(masks.shape[0]):
                mask = masks[m]
                for i in range(n):
                    if i & mask == 0:
                        j = i | mask
                        a = amps[i]
                        b = amps[j]
                        amps[i] = c * a + s * b
                        amps[j] = -s * a + c * b

    @numba.njit(cache=True, nogil=True)
    def _phase_rounds_nb(amps, index, draws, phase):
        for r in range(draws.shape[0]):
            if draws[r]:
                for q in range(index.shape[0]):
                    amps[index[q]] *= phase


# ---------------------------------------------------------------------------
# dispatch


def rotate(amps: np.ndarray, mask: int, c: float, s: float) -> None:
    """Apply ``[[c, s], [-s, c]]`` to the qubit selected by bit ``mask``."""
    if _backend == "numba":
        _rotate_nb(amps, mask, c, s)
    else:
        _rotate_np(amps, mask, c, s)


def permute(amps: np.ndarray, perm: np.ndarray) -> None:
    """In-place ``amps[i] <- amps[perm[i]]`` for an involutive ``perm``."""
    if _backend == "numba":
        _permute_nb(amps, perm)
    else:
        _permute_np(amps, perm)


def oracle_rounds(amps, perm, draws, masks, c, s) -> None:
    """Run ``len(draws)`` rounds of (conditional permutation, rotations).

    Round ``r`` permutes by ``perm`` when ``draws[r]`` is true, then applies
    the real rotation ``[[c, s], [-s, c]]`` to every qubit in ``masks``.
    """
    draws = np.ascontiguousarray(draws, dtype=np.bool_)
    masks = np.ascontiguousarray(masks, dtype=np.int64)
    if _backend == "numba":
        _oracle_rounds_nb(amps, perm, draws, masks, float(c), float(s))
    else:
        _oracle_rounds_np(amps, perm, draws, masks, c, s)


def phase_rounds(amps, index, draws, phase: complex) -> None:
    """Multiply ``amps[index]`` by ``phase`` once per true entry of ``draws``."""
    index = np.ascontiguousarray(index, dtype=np.int64)
    draws = np.ascontiguousarray(draws, dtype=np.bool_)
    if _backend == "numba":
        _phase_rounds_nb(amps, index, draws, complex(phase))
    else:
        _phase_rounds_np(amps, index, draws, phase)


if numba is not None and os.environ.get("NOISY_ORACLE_JIT", "1").strip().lower() not in _FALSY:
    _backend = "numba"
