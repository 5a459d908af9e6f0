"""Seeded, portable random streams.

Every random decision in the library flows through :class:`RngStream`, which
pulls raw 64-bit words from a Philox 4x64 counter-based generator and derives
floats and bounded integers with fixed arithmetic (top-53-bit uniforms,
Box-Muller gaussians, rejection-sampled integers, Fisher-Yates shuffles).
The raw word stream for a given key is stable across platforms and numpy
versions, so identical seeds reproduce identical draw sequences everywhere.

Streams are stateful and must not be shared across concurrent consumers;
fan out with :meth:`RngStream.child`, which derives an independent 128-bit
Philox key by hashing the parent key together with a label.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import DomainError

# 2**-53; top 53 bits of a raw word give a uniform double in [0, 1).
_INV_2_53 = 1.0 / (1 << 53)
_TWO_PI = 2.0 * np.pi


def _derive_key(parent_key: int, label: str) -> int:
    digest = hashlib.sha256(f"{parent_key:x}/{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:16], "little")


class RngStream:
    """Deterministic random stream with named sub-stream fan-out."""

    def __init__(self, seed: int, _key: int | None = None):
        seed = int(seed)
        if seed < 0:
            raise DomainError("seed must be non-negative")
        self.seed = seed
        self._key = seed if _key is None else _key
        self._bits = np.random.Philox(key=self._key)

    def child(self, label: str) -> "RngStream":
        """Independent stream keyed by (this stream's key, label)."""
        return RngStream(self.seed, _key=_derive_key(self._key, label))

    def raw(self, size: int) -> np.ndarray:
        """Next `size` raw 64-bit words as uint64."""
        return np.atleast_1d(self._bits.random_raw(size))

    # -- scalar/array draws -------------------------------------------------

    def uniform(self, size=None):
        """Uniform draws in [0, 1)."""
        if size is None:
            return float(self.raw(1)[0] >> np.uint64(11)) * _INV_2_53
        total = int(np.prod(size))
        out = (self.raw(total) >> np.uint64(11)).astype(np.float64) * _INV_2_53
        return out.reshape(size)

    def bernoulli(self, p: float, size=None):
        """0/1 draws with success probability p."""
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"bernoulli probability must be in [0, 1], got {p}")
        if size is None:
            return int(self.uniform() < p)
        return (self.uniform(size) < p).astype(np.int64)

    def gaussian(self, size=None):
        """Standard normal draws via Box-Muller on uniform pairs."""
        if size is None:
            return float(self.gaussian(1)[0])
        total = int(np.prod(size))
        half = (total + 1) // 2
        u1 = self.uniform(half)
        u2 = self.uniform(half)
        # 1 - u1 lies in (0, 1], so the log is finite.
        radius = np.sqrt(-2.0 * np.log1p(-u1))
        angle = _TWO_PI * u2
        out = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:total]
        return out.reshape(size)

    # -- integers and permutations ------------------------------------------

    def _randbelow(self, k: int) -> int:
        """Uniform integer in [0, k) by masked rejection (exact, no modulo bias)."""
        mask = (1 << (k - 1).bit_length()) - 1
        while True:
            r = int(self.raw(1)[0]) & mask
            if r < k:
                return r

    def shuffle(self, values) -> np.ndarray:
        """Fisher-Yates permuted copy of a 1-D sequence."""
        out = np.array(values)
        for i in range(len(out) - 1, 0, -1):
            j = self._randbelow(i + 1)
            out[i], out[j] = out[j], out[i]
        return out

    def permutation(self, n: int) -> np.ndarray:
        return self.shuffle(np.arange(n))

    def choice_no_replace(self, n: int, m: int) -> np.ndarray:
        """m distinct indices drawn uniformly from range(n) (partial Fisher-Yates)."""
        if not 0 <= m <= n:
            raise DomainError(f"cannot draw {m} distinct values from range({n})")
        pool = np.arange(n)
        for i in range(m):
            j = i + self._randbelow(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:m].copy()
