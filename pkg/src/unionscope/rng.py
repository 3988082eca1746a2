"""Deterministic random streams with stable labeled splitting.

Every source of randomness in the library hangs off one root seed.  A stream
can spawn independent child streams by label; the child depends only on the
root entropy and the path of labels, so any run is bit-reproducible from the
root seed alone, and concurrent consumers never share generator state.
"""

from __future__ import annotations

import hashlib

import numpy as np


class RandomStream:
    """A PCG64 generator addressable by a path of string labels."""

    __slots__ = ("_entropy", "_path", "gen")

    def __init__(self, entropy: int, path: tuple[int, ...] = ()):
        self._entropy = int(entropy)
        self._path = path
        seq = np.random.SeedSequence(entropy=self._entropy, spawn_key=path)
        self.gen = np.random.Generator(np.random.PCG64(seq))

    @classmethod
    def from_seed(cls, seed: int) -> "RandomStream":
        if seed < 0:
            raise ValueError("seed must be non-negative")
        return cls(seed)

    def child(self, label: str) -> "RandomStream":
        """Spawn an independent stream derived from this one by `label`."""
        digest = hashlib.sha256(label.encode("utf-8")).digest()
        words = tuple(int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4))
        return RandomStream(self._entropy, self._path + words)

    def __repr__(self) -> str:  # pragma: no cover
        return f"RandomStream(entropy={self._entropy}, path={self._path})"


def randbelow(gen: np.random.Generator, n: int) -> int:
    """Uniform integer in [0, n) for arbitrary-precision n.

    Rejection sampling on raw 32-bit words, so the result is exactly uniform
    even when n exceeds 64 bits (DP counts routinely do).
    """
    if n <= 0:
        raise ValueError("randbelow needs n > 0")
    if n <= 1 << 62:
        return int(gen.integers(0, n))
    bits = n.bit_length()
    words = (bits + 31) // 32
    excess = 32 * words - bits
    while True:
        v = 0
        for w in gen.integers(0, 1 << 32, size=words, dtype=np.int64):
            v = (v << 32) | int(w)
        v >>= excess
        if v < n:
            return v
