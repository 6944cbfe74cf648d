"""Bit vectors, bit matrices, and affine subspaces over GF(2).

Bit order convention: index 0 is the most significant bit of the backing
integer, so ``BitVec(5, 0b11010)`` has bits (1, 1, 0, 1, 0) and prints as
``5:1a``.  Concatenation puts the left operand in the high bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

__all__ = ["BitVec", "BitMatrix", "AffineSubspace", "cat"]


@dataclass(frozen=True)
class BitVec:
    """Fixed-width vector over GF(2), backed by an int."""

    width: int
    value: int

    def __post_init__(self) -> None:
        if self.width < 0:
            raise ValueError(f"negative width {self.width}")
        if self.value < 0 or self.value >> self.width:
            raise ValueError(f"value {self.value:#x} does not fit in {self.width} bits")

    def __len__(self) -> int:
        return self.width

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.width:
            raise IndexError(f"bit index {i} out of range for width {self.width}")
        return (self.value >> (self.width - 1 - i)) & 1

    def __iter__(self) -> Iterator[int]:
        return (self[i] for i in range(self.width))

    def __xor__(self, other: "BitVec") -> "BitVec":
        if self.width != other.width:
            raise ValueError(f"width mismatch {self.width} != {other.width}")
        return BitVec(self.width, self.value ^ other.value)

    def concat(self, other: "BitVec") -> "BitVec":
        return BitVec(self.width + other.width, (self.value << other.width) | other.value)

    def take(self, lo: int, hi: int) -> "BitVec":
        """Bits [lo, hi) in index order (prefix = take(0, k))."""
        if not 0 <= lo <= hi <= self.width:
            raise ValueError(f"slice [{lo}, {hi}) out of range for width {self.width}")
        w = hi - lo
        return BitVec(w, (self.value >> (self.width - hi)) & ((1 << w) - 1))

    def prefix(self, k: int) -> "BitVec":
        return self.take(0, k)

    def suffix(self, k: int) -> "BitVec":
        return self.take(self.width - k, self.width)

    def popcount(self) -> int:
        return self.value.bit_count()

    def dot(self, other: "BitVec") -> int:
        """Inner product mod 2."""
        if self.width != other.width:
            raise ValueError(f"width mismatch {self.width} != {other.width}")
        return (self.value & other.value).bit_count() & 1

    def bits(self) -> tuple[int, ...]:
        return tuple(self)

    @staticmethod
    def from_bits(bits: Iterable[int]) -> "BitVec":
        v = 0
        n = 0
        for b in bits:
            v = (v << 1) | (b & 1)
            n += 1
        return BitVec(n, v)

    @staticmethod
    def zeros(width: int) -> "BitVec":
        return BitVec(width, 0)

    def to_text(self) -> str:
        """Text form ``<width>:<hex>`` with MSB-first hex of ceil(width/4) digits."""
        digits = (self.width + 3) // 4
        return f"{self.width}:{self.value:0{digits}x}"

    @staticmethod
    def from_text(text: str) -> "BitVec":
        head, _, tail = text.strip().partition(":")
        if not head or _ != ":":
            raise ValueError(f"bad BitVec text {text!r}")
        width = int(head)
        digits = (width + 3) // 4
        if len(tail) != digits:
            raise ValueError(f"expected {digits} hex digits for width {width}, got {tail!r}")
        value = int(tail, 16) if digits else 0
        return BitVec(width, value)

    def __str__(self) -> str:
        return self.to_text()


def cat(*vs: BitVec) -> BitVec:
    """Concatenate left to right."""
    width = 0
    value = 0
    for v in vs:
        width += v.width
        value = (value << v.width) | v.value
    return BitVec(width, value)


@dataclass(frozen=True)
class BitMatrix:
    """Matrix over GF(2); each row is a width-``cols`` bit pattern (MSB first)."""

    rows: int
    cols: int
    data: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.data) != self.rows:
            raise ValueError(f"expected {self.rows} rows, got {len(self.data)}")
        limit = 1 << self.cols
        for r in self.data:
            if not 0 <= r < limit:
                raise ValueError(f"row {r:#x} does not fit in {self.cols} columns")

    def row(self, i: int) -> BitVec:
        return BitVec(self.cols, self.data[i])

    def entry(self, i: int, j: int) -> int:
        return (self.data[i] >> (self.cols - 1 - j)) & 1

    def column(self, j: int) -> BitVec:
        return BitVec.from_bits(self.entry(i, j) for i in range(self.rows))

    def mul_vec(self, v: BitVec) -> BitVec:
        """Matrix-vector product over GF(2)."""
        if v.width != self.cols:
            raise ValueError(f"vector width {v.width} != cols {self.cols}")
        out = 0
        for r in self.data:
            out = (out << 1) | ((r & v.value).bit_count() & 1)
        return BitVec(self.rows, out)

    def transpose(self) -> "BitMatrix":
        return BitMatrix(self.cols, self.rows, tuple(self.column(j).value for j in range(self.cols)))

    def stack(self, other: "BitMatrix") -> "BitMatrix":
        if other.cols != self.cols:
            raise ValueError(f"column mismatch {self.cols} != {other.cols}")
        return BitMatrix(self.rows + other.rows, self.cols, self.data + other.data)

    @staticmethod
    def from_rows(rows: Iterable[BitVec]) -> "BitMatrix":
        rs = list(rows)
        if not rs:
            raise ValueError("empty matrix needs explicit dimensions")
        cols = rs[0].width
        for r in rs:
            if r.width != cols:
                raise ValueError("ragged rows")
        return BitMatrix(len(rs), cols, tuple(r.value for r in rs))

    @staticmethod
    def identity(n: int) -> "BitMatrix":
        return BitMatrix(n, n, tuple(1 << (n - 1 - i) for i in range(n)))

    @staticmethod
    def zeros(rows: int, cols: int) -> "BitMatrix":
        return BitMatrix(rows, cols, (0,) * rows)

    def to_text(self) -> str:
        """One BitVec text form per row."""
        return "\n".join(self.row(i).to_text() for i in range(self.rows))

    @staticmethod
    def from_text(text: str, cols: int | None = None) -> "BitMatrix":
        rows = [BitVec.from_text(line) for line in text.strip().splitlines() if line.strip()]
        if not rows:
            if cols is None:
                raise ValueError("empty matrix text needs explicit cols")
            return BitMatrix(0, cols, ())
        return BitMatrix.from_rows(rows)


@dataclass(frozen=True)
class AffineSubspace:
    """Affine subspace offset + span(basis rows); basis rows are independent."""

    offset: BitVec
    basis: BitMatrix

    def __post_init__(self) -> None:
        if self.basis.cols != self.offset.width:
            raise ValueError(f"basis cols {self.basis.cols} != offset width {self.offset.width}")
        from .gf2 import rank  # deferred to avoid an import cycle

        if rank(self.basis) != self.basis.rows:
            raise ValueError("basis rows are dependent")

    @property
    def ambient_width(self) -> int:
        return self.offset.width

    @property
    def dim(self) -> int:
        return self.basis.rows

    def contains(self, v: BitVec) -> bool:
        from .gf2 import solve_affine

        sol = solve_affine(self.basis.transpose(), v ^ self.offset)
        return sol is not None

    def enumerate(self, cap_bits: int = 20) -> list[BitVec]:
        """All 2^dim points; refuses beyond the enumeration cap."""
        if self.dim > cap_bits:
            raise ValueError(f"dim {self.dim} exceeds enumeration cap {cap_bits} bits")
        pts = []
        for mask in range(1 << self.dim):
            v = self.offset.value
            m = mask
            i = self.dim - 1
            while m:
                if m & 1:
                    v ^= self.basis.data[i]
                m >>= 1
                i -= 1
            pts.append(BitVec(self.ambient_width, v))
        return pts

    def sample(self, rnd: "RandomStream") -> BitVec:  # noqa: F821 (forward ref)
        mask = rnd.take_bits(self.dim)
        v = self.offset.value
        for i in range(self.dim):
            if (mask >> (self.dim - 1 - i)) & 1:
                v ^= self.basis.data[i]
        return BitVec(self.ambient_width, v)

    @staticmethod
    def full(width: int) -> "AffineSubspace":
        return AffineSubspace(BitVec.zeros(width), BitMatrix.identity(width))
