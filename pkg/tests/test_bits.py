"""Bit vector, bit matrix, and affine subspace behavior."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nmextract.bits import AffineSubspace, BitMatrix, BitVec, cat


def test_bitvec_msb_first_indexing():
    v = BitVec(5, 0b10110)
    assert [v[i] for i in range(5)] == [1, 0, 1, 1, 0]


def test_bitvec_rejects_out_of_range_values():
    with pytest.raises(ValueError):
        BitVec(3, 8)
    with pytest.raises(ValueError):
        BitVec(3, -1)
    assert BitVec(0, 0).width == 0


def test_bitvec_concat_and_slices():
    v = cat(BitVec(3, 0b101), BitVec(2, 0b01))
    assert (v.width, v.value) == (5, 0b10101)
    assert v.prefix(3) == BitVec(3, 0b101)
    assert v.suffix(2) == BitVec(2, 0b01)
    assert v.take(1, 4) == BitVec(3, 0b010)


def test_bitvec_popcount_and_dot():
    a = BitVec(6, 0b110101)
    b = BitVec(6, 0b011100)
    assert a.popcount() == 4
    assert a.dot(b) == (0b010100).bit_count() % 2


def test_bitvec_text_format():
    v = BitVec(5, 0x1A)
    assert v.to_text() == "5:1a"
    assert BitVec.from_text("5:1a") == v
    assert BitVec.from_text("12:00f") == BitVec(12, 15)
    with pytest.raises(ValueError):
        BitVec.from_text("5:ff")  # value exceeds width
    with pytest.raises(ValueError):
        BitVec.from_text("5:1")  # too few digits


@given(st.integers(0, 16), st.data())
def test_bitvec_bits_roundtrip(width, data):
    value = data.draw(st.integers(0, (1 << width) - 1))
    v = BitVec(width, value)
    assert BitVec.from_bits(v.bits()) == v


def test_bitmatrix_mul_vec():
    m = BitMatrix.from_rows([BitVec(3, 0b101), BitVec(3, 0b011)])
    assert m.mul_vec(BitVec(3, 0b110)) == BitVec(2, 0b11)
    assert m.mul_vec(BitVec(3, 0b000)) == BitVec(2, 0b00)


@given(st.integers(1, 6), st.integers(1, 6), st.data())
def test_bitmatrix_transpose_involution(rows, cols, data):
    m = BitMatrix(
        rows, cols, tuple(data.draw(st.integers(0, (1 << cols) - 1)) for _ in range(rows))
    )
    assert m.transpose().transpose() == m
    for i in range(rows):
        for j in range(cols):
            assert m.entry(i, j) == m.transpose().entry(j, i)


def test_bitmatrix_text_roundtrip():
    m = BitMatrix.from_rows([BitVec(5, 3), BitVec(5, 17)])
    assert BitMatrix.from_text(m.to_text()) == m
    empty = BitMatrix(0, 5, ())
    assert BitMatrix.from_text(empty.to_text(), cols=5) == empty


def test_affine_subspace_rejects_dependent_basis():
    rows = [BitVec(4, 0b1100), BitVec(4, 0b0110), BitVec(4, 0b1010)]
    with pytest.raises(ValueError):
        AffineSubspace(BitVec(4, 0), BitMatrix.from_rows(rows))


def test_affine_subspace_enumerate_and_contains():
    s = AffineSubspace(BitVec(4, 0b0001), BitMatrix.from_rows([BitVec(4, 0b1100), BitVec(4, 0b0010)]))
    pts = s.enumerate()
    assert len(pts) == 4 == len(set(pts))
    for p in pts:
        assert s.contains(p)
    out = [BitVec(4, v) for v in range(16) if BitVec(4, v) not in pts]
    assert all(not s.contains(p) for p in out)


def test_affine_subspace_full():
    s = AffineSubspace.full(3)
    assert s.dim == 3
    assert len(s.enumerate()) == 8
