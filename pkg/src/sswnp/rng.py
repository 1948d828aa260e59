"""Deterministic, splittable random streams.

Every stochastic component in the package draws from its own stream, keyed
by a tuple such as ``(seed, "noise", epoch, step)``. Streams are backed by
the Philox counter-based bit generator, so a stream's output depends only
on its key: adding agents, reordering work, or skipping a consumer never
shifts the draws of another.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["stream", "stream_key"]


def stream_key(*parts: int | str) -> np.ndarray:
    """Hash key parts into the 2x64-bit Philox key, stable across runs."""
    canon = "\x1f".join(f"{type(p).__name__}:{p}" for p in parts)
    digest = hashlib.sha256(canon.encode("utf-8")).digest()
    return np.frombuffer(digest[:16], dtype=np.uint64)


def stream(*parts: int | str) -> np.random.Generator:
    """Return an independent generator identified by the key tuple."""
    return np.random.Generator(np.random.Philox(key=stream_key(*parts)))
