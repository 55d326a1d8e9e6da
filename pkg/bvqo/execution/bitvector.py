from __future__ import annotations

import math
from typing import Iterable

import mmh3
import numpy as np

from bvqo.planning.nodes import FilterMode

Key = tuple[int, ...]


def bloom_size(n: int, p: float) -> int:
    """Bits needed for ``n`` keys at false-positive rate ``p``."""
    if n <= 0:
        return 8
    p = min(max(p, 1e-9), 0.999999)
    return max(8, math.ceil(-(n * math.log(p)) / (math.log(2) ** 2)))


def bloom_hash_count(m: int, n: int) -> int:
    if n <= 0:
        return 1
    return max(1, round((m / n) * math.log(2)))


class RuntimeBitvector:
    """Membership filter built from a hash join's build-side keys.

    Perfect mode keeps the exact key set. Lossy mode is a Bloom filter using
    double hashing over one 128-bit murmur hash; it never reports a false
    negative.
    """

    def __init__(self, mode: FilterMode, key_columns: tuple[str, ...], keys: Iterable[Key]) -> None:
        self.mode = mode
        self.key_columns = key_columns
        distinct = set(keys)
        self.key_count = len(distinct)
        self._keys: frozenset[Key] | None = None
        self._bits: np.ndarray | None = None
        if mode.is_perfect:
            self._keys = frozenset(distinct)
            return
        self.size = bloom_size(self.key_count, mode.fp_rate)
        self.hash_count = bloom_hash_count(self.size, self.key_count)
        self._bits = np.zeros(self.size, dtype=bool)
        for key in sorted(distinct):
            self._bits[self._positions(key)] = True

    def _positions(self, key: Key) -> list[int]:
        h1, h2 = mmh3.hash64(",".join(map(str, key)).encode(), seed=0, signed=False)
        return [(h1 + i * h2) % self.size for i in range(self.hash_count)]

    def __contains__(self, key: Key) -> bool:
        if self._keys is not None:
            return key in self._keys
        assert self._bits is not None
        return bool(self._bits[self._positions(key)].all())

    def might_contain(self, key: Key) -> bool:
        return key in self
