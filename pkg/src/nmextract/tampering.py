"""Tampering functions: affine maps, split-state pairs, raw tables.

A spec is total on its declared width(s); the fixed-point flag is computed
exactly at construction (linear solve for affine maps, table scan otherwise).
Family enumeration is exhaustive when the family fits the budget, else
sampled without replacement.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator

from .bits import BitMatrix, BitVec
from .gf2 import solve_affine
from .rng import RandomStream, derive_key

__all__ = ["TamperSpec", "enumerate_tamperings"]


@dataclass(frozen=True, eq=False)
class TamperSpec:
    """One tampering function (or split-state pair), with fixed-point status."""

    variant: str  # affine | split_state | seed_map | raw
    width: int
    matrix: BitMatrix | None = None
    offset: BitVec | None = None
    table: tuple[int, ...] | None = None
    f_table: tuple[int, ...] | None = None
    g_table: tuple[int, ...] | None = None
    split: int | None = None  # width of the first half for split_state

    def __post_init__(self):
        if self.variant == "affine":
            if self.matrix is None or self.offset is None:
                raise ValueError("affine spec needs matrix and offset")
            if self.matrix.rows != self.width or self.matrix.cols != self.width:
                raise ValueError("affine matrix must be square on the declared width")
            if self.offset.width != self.width:
                raise ValueError("offset width mismatch")
        elif self.variant in ("raw", "seed_map"):
            if self.table is None or len(self.table) != 1 << self.width:
                raise ValueError("table must be total on the declared width")
            if any(not 0 <= v < (1 << self.width) for v in self.table):
                raise ValueError("table value out of range")
        elif self.variant == "split_state":
            if self.f_table is None or self.g_table is None or self.split is None:
                raise ValueError("split_state spec needs f_table, g_table, split")
            wy = self.width - self.split
            if len(self.f_table) != 1 << self.split or len(self.g_table) != 1 << wy:
                raise ValueError("split tables must be total on their halves")
        else:
            raise ValueError(f"unknown variant {self.variant!r}")

    @staticmethod
    def affine(matrix: BitMatrix, offset: BitVec) -> "TamperSpec":
        return TamperSpec("affine", offset.width, matrix=matrix, offset=offset)

    @staticmethod
    def translation(offset: BitVec) -> "TamperSpec":
        return TamperSpec.affine(BitMatrix.identity(offset.width), offset)

    @staticmethod
    def raw(table: tuple[int, ...], width: int, variant: str = "raw") -> "TamperSpec":
        return TamperSpec(variant, width, table=table)

    @staticmethod
    def split_state(f_table: tuple[int, ...], g_table: tuple[int, ...], split: int, width: int) -> "TamperSpec":
        return TamperSpec("split_state", width, f_table=f_table, g_table=g_table, split=split)

    @cached_property
    def no_fixed_points(self) -> bool:
        if self.variant == "affine":
            # A x + b = x solvable iff (A + I) x = b has a solution
            delta = BitMatrix(
                self.width,
                self.width,
                tuple(
                    self.matrix.data[i] ^ (1 << (self.width - 1 - i)) for i in range(self.width)
                ),
            )
            return solve_affine(delta, self.offset) is None
        if self.variant in ("raw", "seed_map"):
            return all(w != v for v, w in enumerate(self.table))
        f_fixed = any(self.f_table[v] == v for v in range(1 << self.split))
        g_fixed = any(self.g_table[v] == v for v in range(1 << (self.width - self.split)))
        return not (f_fixed and g_fixed)

    def apply(self, x: BitVec) -> BitVec:
        if x.width != self.width:
            raise ValueError(f"input width {x.width}, spec width {self.width}")
        if self.variant == "affine":
            return self.matrix.mul_vec(x) ^ self.offset
        if self.variant in ("raw", "seed_map"):
            return BitVec(self.width, self.table[x.value])
        fx, gy = self.apply_pair(x.prefix(self.split), x.suffix(self.width - self.split))
        from .bits import cat

        return cat(fx, gy)

    def apply_pair(self, x: BitVec, y: BitVec) -> tuple[BitVec, BitVec]:
        if self.variant != "split_state":
            raise ValueError(f"apply_pair on {self.variant} spec")
        if x.width != self.split or y.width != self.width - self.split:
            raise ValueError("pair widths do not match the split")
        return BitVec(x.width, self.f_table[x.value]), BitVec(y.width, self.g_table[y.value])

    def __eq__(self, other):
        if not isinstance(other, TamperSpec):
            return NotImplemented
        return (
            self.variant,
            self.width,
            self.matrix,
            self.offset,
            self.table,
            self.f_table,
            self.g_table,
            self.split,
        ) == (
            other.variant,
            other.width,
            other.matrix,
            other.offset,
            other.table,
            other.f_table,
            other.g_table,
            other.split,
        )

    def __hash__(self):
        return hash((self.variant, self.width, self.matrix, self.offset, self.table, self.f_table, self.g_table, self.split))

    def to_text(self) -> str:
        lines = [f"variant = {self.variant}", f"width = {self.width}"]
        if self.variant == "affine":
            lines.append("matrix = " + " ".join(self.matrix.row(i).to_text() for i in range(self.matrix.rows)))
            lines.append(f"offset = {self.offset.to_text()}")
        elif self.variant in ("raw", "seed_map"):
            lines.append("table = " + " ".join(BitVec(self.width, v).to_text() for v in self.table))
        else:
            lines.append(f"split = {self.split}")
            lines.append("f_table = " + " ".join(BitVec(self.split, v).to_text() for v in self.f_table))
            wy = self.width - self.split
            lines.append("g_table = " + " ".join(BitVec(wy, v).to_text() for v in self.g_table))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "TamperSpec":
        kv = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            kv[key.strip()] = val.strip()
        variant = kv.get("variant")
        width = int(kv["width"])
        if variant == "affine":
            rows = [BitVec.from_text(t) for t in kv["matrix"].split()]
            return TamperSpec.affine(BitMatrix.from_rows(rows), BitVec.from_text(kv["offset"]))
        if variant in ("raw", "seed_map"):
            table = tuple(BitVec.from_text(t).value for t in kv["table"].split())
            return TamperSpec.raw(table, width, variant)
        if variant == "split_state":
            split = int(kv["split"])
            f_table = tuple(BitVec.from_text(t).value for t in kv["f_table"].split())
            g_table = tuple(BitVec.from_text(t).value for t in kv["g_table"].split())
            return TamperSpec.split_state(f_table, g_table, split, width)
        raise ValueError(f"unknown variant {variant!r}")


def _affine_from_index(idx: int, n: int) -> TamperSpec:
    rows = tuple((idx >> (n * (n - i - 1) + n)) & ((1 << n) - 1) for i in range(n))
    offset = BitVec(n, idx & ((1 << n) - 1))
    return TamperSpec.affine(BitMatrix(n, n, rows), offset)


def _raw_from_index(idx: int, n: int, variant: str) -> TamperSpec:
    size = 1 << n
    table = []
    for _ in range(size):
        table.append(idx % size)
        idx //= size
    return TamperSpec.raw(tuple(table), n, variant)


def _sample_fixed_point_free_table(rnd: RandomStream, n: int) -> tuple[int, ...]:
    size = 1 << n
    out = []
    for v in range(size):
        w = rnd.below(size - 1)
        out.append(w + 1 if w >= v else w)
    return tuple(out)


def enumerate_tamperings(
    width: int | tuple[int, int],
    family: str,
    no_fixed_points: bool,
    budget: int,
    rnd: RandomStream | None = None,
) -> Iterator[TamperSpec]:
    """Stream the family: exhaustive when it fits the budget, else sampled.

    Sampled mode draws distinct specs (deterministic given rnd); the
    no-fixed-points filter is applied after either mode, except that sampled
    raw/seed_map tables are drawn fixed-point free directly.
    """
    if family == "split_state":
        if not isinstance(width, tuple):
            raise ValueError("split_state needs (width_x, width_y)")
        yield from _enumerate_split_state(width, no_fixed_points, budget, rnd)
        return
    if not isinstance(width, int):
        raise ValueError(f"family {family!r} takes a single width")
    n = width
    if family == "translation":
        offsets = range(1 if no_fixed_points else 0, 1 << n)
        if (1 << n) <= budget:
            for b in offsets:
                yield TamperSpec.translation(BitVec(n, b))
        else:
            rnd = rnd or RandomStream(derive_key(b"tamper", family, str(n)))
            lo = 1 if no_fixed_points else 0
            for v in rnd.sample_distinct((1 << n) - lo, budget):
                yield TamperSpec.translation(BitVec(n, v + lo))
        return
    if family == "affine":
        total_bits = n * n + n
        if (1 << total_bits) <= budget:
            for idx in range(1 << total_bits):
                spec = _affine_from_index(idx, n)
                if not no_fixed_points or spec.no_fixed_points:
                    yield spec
        else:
            rnd = rnd or RandomStream(derive_key(b"tamper", family, str(n)))
            seen = set()
            emitted = 0
            while emitted < budget:
                idx = rnd.take_bits(total_bits)
                if idx in seen:
                    continue
                seen.add(idx)
                spec = _affine_from_index(idx, n)
                if not no_fixed_points or spec.no_fixed_points:
                    yield spec
                    emitted += 1
        return
    if family in ("raw", "seed_map"):
        size = 1 << n
        total = size**size
        if total <= budget:
            for idx in range(total):
                spec = _raw_from_index(idx, n, family)
                if not no_fixed_points or spec.no_fixed_points:
                    yield spec
        else:
            rnd = rnd or RandomStream(derive_key(b"tamper", family, str(n)))
            seen = set()
            emitted = 0
            while emitted < budget:
                if no_fixed_points:
                    table = _sample_fixed_point_free_table(rnd, n)
                else:
                    table = tuple(rnd.below(size) for _ in range(size))
                if table in seen:
                    continue
                seen.add(table)
                yield TamperSpec.raw(table, n, family)
                emitted += 1
        return
    raise ValueError(f"unknown family {family!r}")


def _enumerate_split_state(
    widths: tuple[int, int],
    no_fixed_points: bool,
    budget: int,
    rnd: RandomStream | None,
) -> Iterator[TamperSpec]:
    wx, wy = widths
    sx, sy = 1 << wx, 1 << wy
    total = (sx**sx) * (sy**sy)
    if total <= budget:
        for ft in itertools.product(range(sx), repeat=sx):
            for gt in itertools.product(range(sy), repeat=sy):
                spec = TamperSpec.split_state(ft, gt, wx, wx + wy)
                if not no_fixed_points or spec.no_fixed_points:
                    yield spec
        return
    rnd = rnd or RandomStream(derive_key(b"tamper", "split_state", f"{wx},{wy}"))
    seen = set()
    emitted = 0
    while emitted < budget:
        ft = tuple(rnd.below(sx) for _ in range(sx))
        gt = tuple(rnd.below(sy) for _ in range(sy))
        if (ft, gt) in seen:
            continue
        spec = TamperSpec.split_state(ft, gt, wx, wx + wy)
        if no_fixed_points and not spec.no_fixed_points:
            continue
        seen.add((ft, gt))
        yield spec
        emitted += 1
