"""Bit-exact MT19937 and its 53-bit real / thresholded binary output.

The state recurrence, 2002 seeding, key-array seeding and tempering
match the canonical 32-bit generator word for word; the twist and
tempering are vectorized over the 624-word state but produce the exact
reference stream.  53-bit reals use the two-draw construction
(a*2^26 + b) / 2^53 with a = u32 >> 5 and b = u32 >> 6.
"""

from __future__ import annotations

import numpy as np

from .bitseq import BitSequence

N = 624
M = 397
MATRIX_A = np.uint32(0x9908B0DF)
UPPER_MASK = np.uint32(0x80000000)
LOWER_MASK = np.uint32(0x7FFFFFFF)

_REAL53_SCALE = 1.0 / 9007199254740992.0  # 2^-53
_TWO26 = 67108864.0  # 2^26


class MtState:
    """One MT19937 stream; owned by a single execution context."""

    __slots__ = ("seed", "mt", "index", "_out")

    def __init__(self, seed: int = 5489):
        self.seed = int(seed)
        mt = [0] * N
        mt[0] = self.seed & 0xFFFFFFFF
        for i in range(1, N):
            prev = mt[i - 1]
            mt[i] = (1812433253 * (prev ^ (prev >> 30)) + i) & 0xFFFFFFFF
        self.mt = np.array(mt, dtype=np.uint32)
        self.index = N  # position in the tempered block; N means exhausted
        self._out = np.zeros(N, dtype=np.uint32)

    @classmethod
    def from_key(cls, key) -> "MtState":
        """Seed from an array of 32-bit integers (canonical init_by_array)."""
        state = cls(19650218)
        mt = [int(x) for x in state.mt]
        key = [int(k) & 0xFFFFFFFF for k in key]
        if not key:
            raise ValueError("key must contain at least one word")
        i, j = 1, 0
        for _ in range(max(N, len(key))):
            mt[i] = ((mt[i] ^ ((mt[i - 1] ^ (mt[i - 1] >> 30)) * 1664525)) + key[j] + j) & 0xFFFFFFFF
            i += 1
            j += 1
            if i >= N:
                mt[0] = mt[N - 1]
                i = 1
            if j >= len(key):
                j = 0
        for _ in range(N - 1):
            mt[i] = ((mt[i] ^ ((mt[i - 1] ^ (mt[i - 1] >> 30)) * 1566083941)) - i) & 0xFFFFFFFF
            i += 1
            if i >= N:
                mt[0] = mt[N - 1]
                i = 1
        mt[0] = 0x80000000
        state.mt = np.array(mt, dtype=np.uint32)
        state.index = N
        return state

    def _twist(self) -> None:
        mt = self.mt
        new = np.empty(N, dtype=np.uint32)
        # y[k] mixes old mt[k] with old mt[k+1] for k < N-1
        y = (mt[:-1] & UPPER_MASK) | (mt[1:] & LOWER_MASK)
        f = (y >> np.uint32(1)) ^ np.where(y & np.uint32(1), MATRIX_A, np.uint32(0))
        # rows N-M.. depend on rows already rewritten in the same pass,
        # so apply the recurrence in dependency order
        new[: N - M] = mt[M:] ^ f[: N - M]
        new[N - M : 2 * (N - M)] = new[: N - M] ^ f[N - M : 2 * (N - M)]
        new[2 * (N - M) : N - 1] = new[N - M : N - 1 - (N - M)] ^ f[2 * (N - M) : N - 1]
        y_last = (mt[N - 1] & UPPER_MASK) | (new[0] & LOWER_MASK)
        f_last = (y_last >> np.uint32(1)) ^ (MATRIX_A if y_last & np.uint32(1) else np.uint32(0))
        new[N - 1] = new[M - 1] ^ f_last
        # tempering
        z = new.copy()
        z ^= z >> np.uint32(11)
        z ^= (z << np.uint32(7)) & np.uint32(0x9D2C5680)
        z ^= (z << np.uint32(15)) & np.uint32(0xEFC60000)
        z ^= z >> np.uint32(18)
        self.mt = new
        self._out = z
        self.index = 0

    def next_u32(self) -> int:
        if self.index >= N:
            self._twist()
        value = int(self._out[self.index])
        self.index += 1
        return value

    def u32_array(self, count: int) -> np.ndarray:
        """Next `count` tempered outputs as a uint32 array."""
        out = np.empty(count, dtype=np.uint32)
        filled = 0
        while filled < count:
            if self.index >= N:
                self._twist()
            take = min(N - self.index, count - filled)
            out[filled : filled + take] = self._out[self.index : self.index + take]
            self.index += take
            filled += take
        return out

    def next_real53(self) -> float:
        a = self.next_u32() >> 5
        b = self.next_u32() >> 6
        return (a * _TWO26 + b) * _REAL53_SCALE

    def real53_array(self, count: int) -> np.ndarray:
        """Next `count` 53-bit reals; consumes exactly 2*count draws."""
        raw = self.u32_array(2 * count)
        a = (raw[0::2] >> np.uint32(5)).astype(np.float64)
        b = (raw[1::2] >> np.uint32(6)).astype(np.float64)
        return (a * _TWO26 + b) * _REAL53_SCALE


def mt_seed(seed: int) -> MtState:
    """Fresh generator state from a 32-bit seed."""
    return MtState(seed)


def mt_next_u32(state: MtState) -> int:
    return state.next_u32()


def mt_next_real53(state: MtState) -> float:
    return state.next_real53()


def mt_binary_sequence(seed: int, count: int, threshold: float = 0.5) -> BitSequence:
    """Thresholded 53-bit reals: bit = 1 when real >= threshold."""
    if count < 0:
        raise ValueError("bit count must be non-negative")
    state = MtState(seed)
    reals = state.real53_array(count)
    bits = (reals >= threshold).astype(np.uint8)
    return BitSequence(bits=bits, source=f"mt,seed={seed},threshold={threshold!r}")
