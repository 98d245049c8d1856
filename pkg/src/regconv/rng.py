"""Deterministic named random substreams.

Every random draw in the toolkit is derived from a single user-supplied seed
plus a stream label (and optional integer indices, e.g. a permutation draw
number). Draws are therefore reproducible, independent across labels, and can
be evaluated in any order or in parallel without changing results.
"""

from __future__ import annotations

import zlib

import numpy as np


def _label_key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8")) & 0xFFFFFFFF


def substream(seed: int, label: str, *indices: int) -> np.random.Generator:
    """Return the generator for stream ``label`` (+ indices) under ``seed``."""
    if seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed}")
    key = (_label_key(label),) + tuple(int(i) for i in indices)
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=key))
