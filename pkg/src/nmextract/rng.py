"""Deterministic randomness: counter-mode expansion of a 256-bit seed.

Every randomized operation in the package draws from a ``RandomStream`` so
that identical seeds reproduce identical artifacts byte for byte.  Keyed
primitive instances use the ``prf_*`` helpers, which are plain SHA-256 /
SHAKE-256 evaluations and carry no secrecy claims.
"""

from __future__ import annotations

import hashlib

from .bits import BitVec

__all__ = [
    "RandomStream",
    "prf_bits",
    "prf_stream_bytes",
    "derive_key",
    "parse_seed",
]

SEED_BYTES = 32


def parse_seed(hex_text: str) -> bytes:
    """Parse a hex seed, zero-padded on the left to 256 bits."""
    h = hex_text.strip().removeprefix("0x")
    if len(h) > 2 * SEED_BYTES:
        raise ValueError(f"seed longer than 256 bits: {hex_text!r}")
    return bytes.fromhex(h.zfill(2 * SEED_BYTES))


class RandomStream:
    """Counter-mode SHA-256 bit stream over a 256-bit seed."""

    def __init__(self, seed: bytes) -> None:
        if len(seed) != SEED_BYTES:
            raise ValueError(f"seed must be {SEED_BYTES} bytes, got {len(seed)}")
        self.seed = seed
        self._counter = 0
        self._buf = 0
        self._buf_bits = 0

    @staticmethod
    def from_hex(hex_text: str) -> "RandomStream":
        return RandomStream(parse_seed(hex_text))

    def derive(self, label: str) -> "RandomStream":
        """Independent stream for a named sub-task."""
        return RandomStream(hashlib.sha256(self.seed + b"/" + label.encode()).digest())

    def _refill(self) -> None:
        block = hashlib.sha256(self.seed + self._counter.to_bytes(8, "big")).digest()
        self._counter += 1
        self._buf = (self._buf << 256) | int.from_bytes(block, "big")
        self._buf_bits += 256

    def take_bits(self, k: int) -> int:
        """Next k bits as an unsigned int (MSB drawn first)."""
        if k < 0:
            raise ValueError("negative bit count")
        while self._buf_bits < k:
            self._refill()
        self._buf_bits -= k
        out = self._buf >> self._buf_bits
        self._buf &= (1 << self._buf_bits) - 1
        return out

    def bitvec(self, width: int) -> BitVec:
        return BitVec(width, self.take_bits(width))

    def below(self, n: int) -> int:
        """Uniform int in [0, n) by rejection."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        k = (n - 1).bit_length()
        while True:
            v = self.take_bits(k)
            if v < n:
                return v

    def sample_distinct(self, n: int, t: int) -> list[int]:
        """t distinct values from [0, n), in draw order."""
        if t > n:
            raise ValueError(f"cannot draw {t} distinct values from {n}")
        # Partial Fisher-Yates over a sparse array.
        swaps: dict[int, int] = {}
        out = []
        for i in range(t):
            j = i + self.below(n - i)
            out.append(swaps.get(j, j))
            swaps[j] = swaps.get(i, i)
        return out


def prf_bits(key: bytes, msg: bytes, out_bits: int) -> int:
    """Deterministic keyed value of out_bits, as an unsigned int."""
    need = (out_bits + 7) // 8
    out = b""
    block = 0
    while len(out) < need:
        out += hashlib.sha256(key + block.to_bytes(4, "big") + msg).digest()
        block += 1
    v = int.from_bytes(out[:need], "big")
    return v >> (8 * need - out_bits) if out_bits else 0


def prf_stream_bytes(key: bytes, label: bytes, nbytes: int) -> bytes:
    """Long deterministic byte stream (used to materialize lookup tables)."""
    return hashlib.shake_256(key + b"/" + label).digest(nbytes)


def derive_key(master: bytes, *labels: str | bytes) -> bytes:
    """Stable 32-byte instance key from a master key and name path."""
    h = hashlib.sha256(master)
    for lab in labels:
        h.update(b"/" + (lab.encode() if isinstance(lab, str) else lab))
    return h.digest()
