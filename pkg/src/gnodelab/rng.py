"""Deterministic random streams.

All randomness in gnodelab flows through counter-based Philox generators keyed
by a root seed plus a tuple of stream labels. Streams with different labels
are statistically independent, and any stream can be reconstructed from
(seed, labels) alone, so resumed runs never need to serialize generator
state: the epoch or trial index is simply part of the key.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["stream"]


def _label_words(label) -> list[int]:
    # Strings are folded through sha256 so arbitrary names map to stable
    # uint32 entropy words; ints pass through (SeedSequence accepts both).
    if isinstance(label, (int, np.integer)):
        if label < 0:
            raise ValueError(f"stream labels must be non-negative, got {label}")
        return [int(label)]
    if isinstance(label, str):
        digest = hashlib.sha256(label.encode("utf-8")).digest()
        return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    raise TypeError(f"stream label must be int or str, got {type(label).__name__}")


def stream(seed: int, *labels) -> np.random.Generator:
    """Return the Philox generator for (seed, labels).

    Same arguments always produce the same stream; distinct label tuples
    produce independent streams. Labels may be ints (epoch, trial, cell
    indices) or short strings ("shuffle", "init", ...).
    """
    words: list[int] = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for lab in labels:
        words.extend(_label_words(lab))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(words)))
