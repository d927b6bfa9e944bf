"""Seed derivation: one master seed, one independent substream per (experiment, trial)."""

from __future__ import annotations

import zlib

import numpy as np


def _key(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode())
    return int(part)


def seed_sequence(master: int, *key) -> np.random.SeedSequence:
    """SeedSequence hashing ``master`` with the spawn key (strings are CRC32'd)."""
    return np.random.SeedSequence(int(master), spawn_key=tuple(_key(k) for k in key))


def substream(master: int, *key) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(master, *key)))
