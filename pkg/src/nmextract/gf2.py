"""GF(2) linear algebra: rank, solving, sampling, and source decompositions.

Gaussian elimination breaks ties deterministically: leftmost pivot column,
topmost pivot row.  All solution sets are kept implicit as a particular
solution plus a kernel basis; enumeration is capped.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .bits import AffineSubspace, BitMatrix, BitVec
from .rng import RandomStream

__all__ = [
    "RowReduceResult",
    "row_reduce",
    "rank",
    "kernel_basis",
    "SolutionSet",
    "solve_affine",
    "sample_solution",
    "mat_mul",
    "affine_decompose",
    "linear_section",
    "block_split_independent",
    "ENUMERATION_CAP_BITS",
]

ENUMERATION_CAP_BITS = 20


@dataclass(frozen=True)
class RowReduceResult:
    matrix: BitMatrix
    rank: int
    pivots: tuple[int, ...]


def row_reduce(m: BitMatrix) -> RowReduceResult:
    """Reduced row echelon form (leftmost pivot column, topmost row)."""
    rows = list(m.data)
    pivots = []
    r = 0
    for j in range(m.cols):
        mask = 1 << (m.cols - 1 - j)
        pivot = next((i for i in range(r, m.rows) if rows[i] & mask), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(m.rows):
            if i != r and rows[i] & mask:
                rows[i] ^= rows[r]
        pivots.append(j)
        r += 1
        if r == m.rows:
            break
    return RowReduceResult(BitMatrix(m.rows, m.cols, tuple(rows)), r, tuple(pivots))


def rank(m: BitMatrix) -> int:
    return row_reduce(m).rank


def kernel_basis(m: BitMatrix) -> BitMatrix:
    """Basis of {x : m.mul_vec(x) = 0}, one row per free column."""
    red = row_reduce(m)
    pivot_set = set(red.pivots)
    free = [j for j in range(m.cols) if j not in pivot_set]
    rows = []
    for f in free:
        v = 1 << (m.cols - 1 - f)
        fmask = v
        for i, p in enumerate(red.pivots):
            if red.matrix.data[i] & fmask:
                v |= 1 << (m.cols - 1 - p)
        rows.append(v)
    return BitMatrix(len(rows), m.cols, tuple(rows))


@dataclass(frozen=True)
class SolutionSet:
    """Solutions of a linear system: particular + span(kernel rows)."""

    particular: BitVec
    kernel: BitMatrix

    @property
    def dim(self) -> int:
        return self.kernel.rows

    def contains(self, v: BitVec) -> bool:
        return AffineSubspace(self.particular, self.kernel).contains(v)

    def enumerate(self, cap_bits: int = ENUMERATION_CAP_BITS) -> list[BitVec]:
        return AffineSubspace(self.particular, self.kernel).enumerate(cap_bits)


def solve_affine(a: BitMatrix, b: BitVec) -> SolutionSet | None:
    """Solve a·x = b; None iff rank(a|b) > rank(a)."""
    if b.width != a.rows:
        raise ValueError(f"rhs width {b.width} != rows {a.rows}")
    aug = BitMatrix(a.rows, a.cols + 1, tuple((a.data[i] << 1) | b[i] for i in range(a.rows)))
    red = row_reduce(aug)
    if any(p == a.cols for p in red.pivots):
        return None
    x = 0
    for i, p in enumerate(red.pivots):
        if red.matrix.data[i] & 1:
            x |= 1 << (a.cols - 1 - p)
    return SolutionSet(BitVec(a.cols, x), kernel_basis(a))


def sample_solution(desc: SolutionSet, rnd: RandomStream) -> BitVec:
    """Uniform element of the solution set, deterministic given rnd."""
    mask = rnd.take_bits(desc.dim)
    v = desc.particular.value
    for i in range(desc.dim):
        if (mask >> (desc.dim - 1 - i)) & 1:
            v ^= desc.kernel.data[i]
    return BitVec(desc.particular.width, v)


def mat_mul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Matrix product a·b over GF(2)."""
    if a.cols != b.rows:
        raise ValueError(f"shape mismatch {a.cols} != {b.rows}")
    bt = b.transpose()
    rows = []
    for i in range(a.rows):
        v = 0
        for j in range(b.cols):
            v = (v << 1) | ((a.data[i] & bt.data[j]).bit_count() & 1)
        rows.append(v)
    return BitMatrix(a.rows, b.cols, tuple(rows))


def affine_decompose(x: AffineSubspace, l: BitMatrix) -> tuple[AffineSubspace, AffineSubspace]:
    """Split x into A + B where l is constant on supp(B) and injective on A.

    A is a linear source (zero offset) whose dimension equals the rank of l
    restricted to span(x); B carries x's offset.  Every point of x is a unique
    sum a + b.
    """
    if l.cols != x.ambient_width:
        raise ValueError(f"map cols {l.cols} != ambient width {x.ambient_width}")
    k = x.dim
    basis = list(x.basis.data)
    images = [l.mul_vec(x.basis.row(i)).value for i in range(k)]
    # Eliminate on the images, mirroring row ops onto the basis rows.
    r = 0
    for j in range(l.rows):
        mask = 1 << (l.rows - 1 - j)
        pivot = next((i for i in range(r, k) if images[i] & mask), None)
        if pivot is None:
            continue
        images[r], images[pivot] = images[pivot], images[r]
        basis[r], basis[pivot] = basis[pivot], basis[r]
        for i in range(k):
            if i != r and images[i] & mask:
                images[i] ^= images[r]
                basis[i] ^= basis[r]
        r += 1
        if r == k:
            break
    n = x.ambient_width
    a = AffineSubspace(BitVec.zeros(n), BitMatrix(r, n, tuple(basis[:r])))
    b = AffineSubspace(x.offset, BitMatrix(k - r, n, tuple(basis[r:])))
    return a, b


def linear_section(a: AffineSubspace, l: BitMatrix) -> BitMatrix:
    """Matrix s with s·l·v = v for every v in the linear source a.

    Requires l injective on span(a), which affine_decompose guarantees for
    its first return value.
    """
    if a.offset.value != 0:
        raise ValueError("section is defined for linear sources (zero offset)")
    k = a.dim
    images = BitMatrix(k, l.rows, tuple(l.mul_vec(a.basis.row(i)).value for i in range(k)))
    if rank(images) != k:
        raise ValueError("map is not injective on the source span")
    rows = []
    for c in range(a.ambient_width):
        rhs = BitVec.from_bits(a.basis.entry(i, c) for i in range(k))
        sol = solve_affine(images, rhs)
        assert sol is not None  # images have full row rank
        rows.append(sol.particular.value)
    return BitMatrix(a.ambient_width, l.rows, tuple(rows))


def _colspace_basis(m: BitMatrix) -> list[BitVec]:
    red = row_reduce(m.transpose())
    return [red.matrix.row(i) for i in range(red.rank)]


def block_split_independent(
    x: AffineSubspace,
    block_lengths: list[int],
    cap_bits: int = ENUMERATION_CAP_BITS,
) -> list[tuple[Fraction, tuple[AffineSubspace, ...]]]:
    """Exact mixture of products of per-block affine sources equal to x.

    The affine source x with deficiency r = n - dim(x) is conditioned on the
    per-block contributions to its row-echelon constraint system; each branch
    makes the blocks independent with per-block dimension >= n_i - r.
    """
    n = x.ambient_width
    if sum(block_lengths) != n:
        raise ValueError(f"block lengths sum to {sum(block_lengths)}, ambient width is {n}")
    if any(b <= 0 for b in block_lengths):
        raise ValueError("block lengths must be positive")
    constraints = row_reduce(kernel_basis(x.basis)).matrix
    r = constraints.rows
    d = constraints.mul_vec(x.offset)
    # Per-block column slices of the constraint matrix.
    blocks = []
    lo = 0
    for w in block_lengths:
        rows = tuple((constraints.data[i] >> (n - lo - w)) & ((1 << w) - 1) for i in range(r))
        blocks.append(BitMatrix(r, w, rows))
        lo += w
    t = len(blocks)
    bases = [_colspace_basis(b) for b in blocks]
    free_bits = sum(len(bs) for bs in bases[:-1])
    if free_bits > cap_bits:
        raise ValueError(f"branch enumeration needs {free_bits} bits, cap is {cap_bits}")
    branches: list[tuple[Fraction, tuple[AffineSubspace, ...]]] = []
    weight: Fraction | None = None
    for combo in range(1 << free_bits):
        us = []
        acc = d.value
        pos = free_bits
        for bs in bases[:-1]:
            u = 0
            for bv in bs:
                pos -= 1
                if (combo >> pos) & 1:
                    u ^= bv.value
            us.append(BitVec(r, u))
            acc ^= u
        last = solve_affine(blocks[-1], BitVec(r, acc))
        if last is None:
            continue
        parts = []
        ok = True
        for i in range(t - 1):
            sol = solve_affine(blocks[i], us[i])
            if sol is None:  # unreachable: us[i] lies in the column space
                ok = False
                break
            parts.append(AffineSubspace(sol.particular, sol.kernel))
        if not ok:
            continue
        parts.append(AffineSubspace(last.particular, last.kernel))
        if weight is None:
            num = 1
            for p in parts:
                num <<= p.dim
            weight = Fraction(num, 1 << x.dim)
        branches.append((weight, tuple(parts)))
    return branches
