"""Tampering specs and family enumeration against brute-force oracles."""

import pytest

from nmextract.bits import BitMatrix, BitVec
from nmextract.rng import RandomStream, derive_key
from nmextract.tampering import TamperSpec, enumerate_tamperings


def brute_force_affine_no_fixed_point_count(n: int) -> int:
    count = 0
    for idx in range(1 << (n * n + n)):
        rows = tuple((idx >> (n * (n - i - 1) + n)) & ((1 << n) - 1) for i in range(n))
        b = idx & ((1 << n) - 1)
        m = BitMatrix(n, n, rows)
        if all(m.mul_vec(BitVec(n, x)).value ^ b != x for x in range(1 << n)):
            count += 1
    return count


def test_affine_width_1_unique_no_fixed_point_map():
    specs = list(enumerate_tamperings(1, "affine", no_fixed_points=True, budget=10**6))
    assert len(specs) == 1
    (spec,) = specs
    assert spec.apply(BitVec(1, 0)) == BitVec(1, 1)
    assert spec.apply(BitVec(1, 1)) == BitVec(1, 0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_affine_no_fixed_point_count_matches_oracle(n):
    specs = list(enumerate_tamperings(n, "affine", no_fixed_points=True, budget=1 << (n * n + n)))
    assert len(specs) == brute_force_affine_no_fixed_point_count(n)
    assert all(s.no_fixed_points for s in specs)


def test_translations_all_emitted_and_fixed_point_free():
    for n in (2, 3, 4):
        specs = list(enumerate_tamperings(n, "translation", no_fixed_points=True, budget=10**6))
        assert len(specs) == (1 << n) - 1
        assert all(s.no_fixed_points for s in specs)
        offsets = {s.offset.value for s in specs}
        assert offsets == set(range(1, 1 << n))


def test_raw_width_1_exhaustive():
    allspecs = list(enumerate_tamperings(1, "raw", no_fixed_points=False, budget=10**6))
    assert len(allspecs) == 4
    nofp = list(enumerate_tamperings(1, "raw", no_fixed_points=True, budget=10**6))
    assert len(nofp) == 1 and nofp[0].table == (1, 0)


def test_no_fixed_points_flag_matches_exhaustive_scan():
    rnd = RandomStream(derive_key(b"test", b"fp-flag"))
    for _ in range(40):
        n = 2 + rnd.below(3)
        table = tuple(rnd.below(1 << n) for _ in range(1 << n))
        spec = TamperSpec.raw(table, n)
        assert spec.no_fixed_points == all(
            spec.apply(BitVec(n, v)).value != v for v in range(1 << n)
        )
    for _ in range(40):
        n = 2 + rnd.below(2)
        mat = BitMatrix(n, n, tuple(rnd.take_bits(n) for _ in range(n)))
        spec = TamperSpec.affine(mat, rnd.bitvec(n))
        assert spec.no_fixed_points == all(
            spec.apply(BitVec(n, v)).value != v for v in range(1 << n)
        )


def test_split_state_fixed_points_require_both_sides():
    ident2 = tuple(range(4))
    flip2 = tuple(v ^ 3 for v in range(4))
    both_fixed = TamperSpec.split_state(ident2, ident2, 2, 4)
    assert not both_fixed.no_fixed_points
    one_free = TamperSpec.split_state(ident2, flip2, 2, 4)
    assert one_free.no_fixed_points
    pair = one_free.apply_pair(BitVec(2, 0b01), BitVec(2, 0b10))
    assert pair == (BitVec(2, 0b01), BitVec(2, 0b01))
    assert one_free.apply(BitVec(4, 0b0110)) == BitVec(4, 0b0101)


def test_split_state_exhaustive_small():
    specs = list(enumerate_tamperings((1, 1), "split_state", no_fixed_points=True, budget=16))
    # oracle: pairs (f, g) on one bit where f or g is the flip
    count = sum(
        1
        for ft in [(0, 0), (0, 1), (1, 0), (1, 1)]
        for gt in [(0, 0), (0, 1), (1, 0), (1, 1)]
        if ft == (1, 0) or gt == (1, 0)
    )
    assert len(specs) == count == 7
    assert all(s.no_fixed_points for s in specs)


def test_sampled_modes_are_deterministic_and_within_budget():
    def take(seed_label):
        rnd = RandomStream(derive_key(b"test", seed_label))
        return list(enumerate_tamperings(4, "affine", no_fixed_points=True, budget=25, rnd=rnd))

    a, b = take(b"s1"), take(b"s1")
    assert a == b and len(a) == 25
    assert all(s.no_fixed_points for s in a)
    assert len(set(a)) == 25
    c = take(b"s2")
    assert c != a

    rnd = RandomStream(derive_key(b"test", b"raw-sample"))
    raws = list(enumerate_tamperings(3, "raw", no_fixed_points=True, budget=30, rnd=rnd))
    assert len(raws) == 30 and all(s.no_fixed_points for s in raws)

    rnd = RandomStream(derive_key(b"test", b"ss-sample"))
    sss = list(enumerate_tamperings((2, 2), "split_state", no_fixed_points=True, budget=20, rnd=rnd))
    assert len(sss) == 20 and all(s.no_fixed_points for s in sss)


def test_seed_map_variant_tagged():
    specs = list(enumerate_tamperings(1, "seed_map", no_fixed_points=True, budget=100))
    assert specs[0].variant == "seed_map"


def test_text_roundtrip_every_variant():
    rnd = RandomStream(derive_key(b"test", b"tamper-text"))
    mat = BitMatrix(3, 3, tuple(rnd.take_bits(3) for _ in range(3)))
    specs = [
        TamperSpec.affine(mat, rnd.bitvec(3)),
        TamperSpec.translation(BitVec(4, 9)),
        TamperSpec.raw(tuple(rnd.below(8) for _ in range(8)), 3),
        TamperSpec.raw(tuple(rnd.below(4) for _ in range(4)), 2, "seed_map"),
        TamperSpec.split_state(
            tuple(rnd.below(4) for _ in range(4)), tuple(rnd.below(2) for _ in range(2)), 2, 3
        ),
    ]
    for spec in specs:
        back = TamperSpec.from_text(spec.to_text())
        assert back == spec
        assert back.no_fixed_points == spec.no_fixed_points


def test_rejects_malformed_specs():
    with pytest.raises(ValueError):
        TamperSpec.raw((0, 1, 2), 2)  # table not total
    with pytest.raises(ValueError):
        TamperSpec.raw((0, 4), 1)  # value out of range
    with pytest.raises(ValueError):
        TamperSpec("affine", 2)  # missing matrix
    with pytest.raises(ValueError):
        enumerate_tamperings((1, 1), "affine", True, 10).__next__()
