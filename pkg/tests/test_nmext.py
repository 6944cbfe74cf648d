"""Extractor pipelines: shape, advice behavior, and measured non-malleability.

Error values are exact rationals frozen from the definitional checkers and
the transform paths; both paths must keep reproducing them bit for bit.
"""

from fractions import Fraction

import numpy as np
import pytest

from nmextract.bits import AffineSubspace, BitVec
from nmextract.checkers import check_affine_nm, check_seeded_t_nm, check_two_source_nm
from nmextract.dists import Distribution, flat_source
from nmextract.nmext import (
    affine_advice,
    anm_ext,
    seeded_advice,
    seeded_t_nm_ext,
    split_advice,
    two_source_nm_ext,
    two_source_nm_ext_uneven,
    uneven_rows,
)
from nmextract.plans import get_plan, suite_for_plan
from nmextract.rng import RandomStream, derive_key
from nmextract.tables import (
    affine_output_table,
    apply_affine_bulk,
    deviation_to_error,
    max_fixed_point_free_assignment,
    nm_error_from_arrays,
    pair_devs,
    seeded_output_table,
    split_output_table,
    translation_deviations_1d,
    translation_deviations_2d,
)
from nmextract.tampering import TamperSpec, enumerate_tamperings


def _rnd(label: bytes) -> RandomStream:
    return RandomStream(derive_key(b"test-nmext", label))


# ---------------------------------------------------------------------------
# Shape and determinism.


def test_pipelines_produce_plan_widths_deterministically():
    cases = []
    ap = get_plan("affine_tiny")
    cases.append((ap, lambda s, r: anm_ext(r.bitvec(ap.n), ap, s), ap.m))
    sp = get_plan("split_tiny")
    cases.append((sp, lambda s, r: two_source_nm_ext(r.bitvec(sp.n), r.bitvec(sp.n), sp, s),
                  sp.m))
    up = get_plan("uneven_tiny")
    cases.append((up, lambda s, r: two_source_nm_ext_uneven(r.bitvec(up.n_x),
                                                            r.bitvec(up.n_y), up, s),
                  up.m_out))
    ep = get_plan("seeded_tiny")
    cases.append((ep, lambda s, r: seeded_t_nm_ext(r.bitvec(ep.n_x), r.bitvec(ep.n_y),
                                                   ep, s),
                  ep.m))
    for plan, run, m in cases:
        first = suite_for_plan(plan, b"smoke-master")
        second = suite_for_plan(plan, b"smoke-master")
        for trial in range(5):
            ra = RandomStream(derive_key(b"det", plan.name.encode() + bytes([trial])))
            rb = RandomStream(derive_key(b"det", plan.name.encode() + bytes([trial])))
            wa = run(first, ra)
            wb = run(second, rb)
            assert wa.width == m
            assert wa == wb


def test_wrong_widths_report_the_failing_step(suites):
    with pytest.raises(ValueError, match=r"anm_ext step 1 \(split\)"):
        anm_ext(BitVec(3, 0), get_plan("affine_tiny"), suites("affine_tiny"))
    with pytest.raises(ValueError, match=r"two_source_nm_ext step 1 \(split\)"):
        two_source_nm_ext(BitVec(3, 0), BitVec(8, 0), get_plan("split_tiny"),
                          suites("split_tiny"))
    with pytest.raises(ValueError, match=r"two_source_nm_ext_uneven step 1 \(split\)"):
        two_source_nm_ext_uneven(BitVec(3, 0), BitVec(8, 0), get_plan("uneven_tiny"),
                                 suites("uneven_tiny"))
    with pytest.raises(ValueError, match=r"seeded_t_nm_ext step 1 \(ext_z\)"):
        seeded_t_nm_ext(BitVec(8, 0), BitVec(3, 0), get_plan("seeded_tiny"),
                        suites("seeded_tiny"))


# ---------------------------------------------------------------------------
# Advice strings: layout, order, and separation under tampering.


def test_affine_advice_lays_out_prefixes_then_samples(suites):
    plan = get_plan("affine_tiny")
    suite = suites("affine_tiny")
    rnd = _rnd(b"alayout")
    for _ in range(10):
        x = rnd.bitvec(plan.n)
        a = affine_advice(x, plan, suite)
        assert a.width == 2 * plan.w0 + 2 * plan.s_samp
        assert a.origin
        assert a.bits.take(0, plan.w0) == x.take(0, plan.w0)
        assert a.bits.take(plan.w0, 2 * plan.w0) == x.take(plan.w0, 2 * plan.w0)


def test_split_advice_lays_out_both_prefixes_then_samples(suites):
    plan = get_plan("split_tiny")
    suite = suites("split_tiny")
    rnd = _rnd(b"slayout")
    for _ in range(10):
        x = rnd.bitvec(plan.n)
        y = rnd.bitvec(plan.n)
        a = split_advice(x, y, plan, suite)
        assert a.width == 2 * plan.w1 + 2 * plan.s_samp
        assert a.bits.take(0, plan.w1) == x.take(0, plan.w1)
        assert a.bits.take(plan.w1, 2 * plan.w1) == y.take(0, plan.w1)


def test_seeded_advice_lays_out_hash_slice_then_samples(suites):
    plan = get_plan("seeded_tiny")
    suite = suites("seeded_tiny")
    rnd = _rnd(b"elayout")
    for _ in range(10):
        x = rnd.bitvec(plan.n_x)
        y = rnd.bitvec(plan.n_y)
        a = seeded_advice(x, y, plan, suite)
        assert a.width == plan.d2 + plan.s_y
        z = suite["ext_z"].extract(x, y.take(0, plan.d1))
        assert a.bits.take(0, plan.d2) == z.take(0, plan.d2)


def test_affine_advice_separates_tampered_runs(suites):
    plan = get_plan("affine_tiny")
    suite = suites("affine_tiny")
    n = plan.n
    arr = np.array([affine_advice(BitVec(n, x), plan, suite).bits.value
                    for x in range(1 << n)], dtype=np.int64)
    _, counts = np.unique(arr, return_counts=True)
    eq_pairs = int((counts.astype(object) ** 2).sum()) - (1 << n)
    frac = 1 - Fraction(eq_pairs, ((1 << n) - 1) * (1 << n))
    assert frac == 1
    specs = list(enumerate_tamperings(n, "affine", True, 20, _rnd(b"affine-general")))
    eq = sum(int((arr == arr[apply_affine_bulk(s, n)]).sum()) for s in specs)
    frac_gen = 1 - Fraction(eq, len(specs) * (1 << n))
    assert frac_gen == 1
    assert frac >= Fraction(9, 10) and frac_gen >= Fraction(9, 10)


def test_split_advice_separates_runs_whose_first_source_moved(suites):
    plan = get_plan("split_tiny")
    suite = suites("split_tiny")
    size = 1 << plan.n
    arr = np.empty((size, size), dtype=np.int64)
    for x in range(size):
        xv = BitVec(plan.n, x)
        for y in range(size):
            arr[x, y] = split_advice(xv, BitVec(plan.n, y), plan, suite).bits.value
    _, c_all = np.unique(arr.reshape(-1), return_counts=True)
    s_all = int((c_all.astype(object) ** 2).sum())
    s_fixed_x = 0
    for x in range(size):
        _, cx = np.unique(arr[x], return_counts=True)
        s_fixed_x += int((cx.astype(object) ** 2).sum())
    frac = 1 - Fraction(s_all - s_fixed_x, (size - 1) * size * size * size)
    assert frac == Fraction(65279, 65280)
    specs = list(enumerate_tamperings((plan.n, plan.n), "split_state", True, 10,
                                      _rnd(b"split-general")))
    eq = 0
    for s in specs:
        fi = np.array(s.f_table, dtype=np.int64)
        gi = np.array(s.g_table, dtype=np.int64)
        eq += int((arr == arr[np.ix_(fi, gi)]).sum())
    frac_gen = 1 - Fraction(eq, len(specs) * size * size)
    assert frac_gen == Fraction(327679, 327680)
    assert frac >= Fraction(9, 10) and frac_gen >= Fraction(9, 10)


# ---------------------------------------------------------------------------
# Trace skeletons and counter encodings.


def test_affine_trace_follows_the_recipe_with_wide_counters(suites):
    plan = get_plan("affine_desk")
    suite = suites("affine_desk")
    assert plan.rows == 11
    assert plan.ctr_bits == 4
    tr = []
    anm_ext(_rnd(b"atrace").bitvec(plan.n), plan, suite, trace=tr)
    names = [s.name for s in tr]
    want = (["aext_z[0]", "sample[0]", "aext_z[1]", "sample[1]", "advice"]
            + [f"aext_mid[{j}]" for j in range(plan.b)] + ["czext"]
            + [f"acb[{j}]" for j in range(plan.rows)] + ["fold", "hash"])
    assert names == want
    for s in tr:
        if s.name.startswith("acb["):
            assert s.in_widths == (plan.w13, plan.wv, plan.ctr_bits)


def test_split_trace_follows_the_recipe(suites):
    plan = get_plan("split_tiny")
    suite = suites("split_tiny")
    rnd = _rnd(b"strace")
    tr = []
    two_source_nm_ext(rnd.bitvec(plan.n), rnd.bitvec(plan.n), plan, suite, trace=tr)
    assert [s.name for s in tr] == ["ip", "sample_x", "sample_y", "advice", "cb", "hash"]


def test_split_composed_path_runs_the_breaker_inline(suites):
    plan = get_plan("split_desk")
    suite = suites("split_desk")
    rnd = _rnd(b"compose")
    tr = []
    w = two_source_nm_ext(rnd.bitvec(plan.n), rnd.bitvec(plan.n), plan, suite, trace=tr)
    assert w.width == plan.m
    names = [s.name for s in tr]
    assert names[:4] == ["ip", "sample_x", "sample_y", "advice"]
    assert "slice_x" in names and "fold" in names
    assert names[-1] == "hash"
    assert plan.breaker.m_cb == plan.d_v
    assert plan.breaker.a_bits == 2 * plan.w1 + 2 * plan.s_samp


def test_seeded_trace_and_breaker_argument_order(suites):
    plan = get_plan("seeded_tiny")
    suite = suites("seeded_tiny")
    rnd = _rnd(b"etrace")
    order_pinned = False
    for _ in range(8):
        x = rnd.bitvec(plan.n_x)
        y = rnd.bitvec(plan.n_y)
        tr = []
        seeded_t_nm_ext(x, y, plan, suite, trace=tr)
        by_name = {s.name: s for s in tr}
        assert [s.name for s in tr] == ["ext_z", "sample_seed", "advice", "raz",
                                        "ext_wx", "ext_wy", "cb", "ext_v2", "ext_out"]
        zt = BitVec(by_name["ext_wx"].out_width, int(by_name["ext_wx"].value_hex, 16))
        yt = BitVec(by_name["ext_wy"].out_width, int(by_name["ext_wy"].value_hex, 16))
        alpha = BitVec(by_name["advice"].out_width, int(by_name["advice"].value_hex, 16))
        straight = suite["cb"].break_correlation(yt, zt, alpha)
        assert int(by_name["cb"].value_hex, 16) == straight.value
        if suite["cb"].break_correlation(zt, yt, alpha) != straight:
            order_pinned = True
    assert order_pinned


def test_uneven_rows_expose_per_row_interfaces(suites):
    plan = get_plan("uneven_tiny")
    suite = suites("uneven_tiny")
    rnd = _rnd(b"urows")
    x = rnd.bitvec(plan.n_x)
    y = rnd.bitvec(plan.n_y)
    rows = uneven_rows(x, y, plan, suite)
    assert len(rows) == plan.d_rows
    widths = {row["alpha"].width for row in rows}
    assert len(widths) == 1
    folded = BitVec.zeros(plan.m_out)
    for i, row in enumerate(rows):
        assert row["ctr"] == BitVec(plan.ctr_bits, i)
        assert row["inner"].width == plan.m_r
        assert row["share"].width == plan.m_out
        folded ^= row["share"]
    assert folded == two_source_nm_ext_uneven(x, y, plan, suite)


# ---------------------------------------------------------------------------
# Measured non-malleability at the tiny plans.


def test_split_translations_stay_below_the_claim(suites):
    plan = get_plan("split_tiny")
    suite = suites("split_tiny")
    table = split_output_table(plan, suite)
    dev = translation_deviations_2d(table, plan.m)
    dev[0, 0] = 0  # identity tampering keeps every point fixed
    worst = np.unravel_index(int(dev.argmax()), dev.shape)
    err = deviation_to_error(int(dev.max()), table.size, plan.m)
    assert worst == (10, 0)
    assert err == Fraction(4015, 16384)
    assert err <= plan.eps_claim


def test_split_worst_translation_agrees_with_the_definitional_checker(suites):
    plan = get_plan("split_tiny")
    suite = suites("split_tiny")
    table = split_output_table(plan, suite)

    def ext(x, y):
        return BitVec(plan.m, int(table[x.value, y.value]))

    got = check_two_source_nm(
        ext,
        Distribution.uniform(plan.n),
        Distribution.uniform(plan.n),
        TamperSpec.translation(BitVec(plan.n, 10)),
        TamperSpec.translation(BitVec(plan.n, 0)),
    )
    assert got == Fraction(4015, 16384)


def test_affine_translations_and_sampled_maps_stay_below_the_claim(suites):
    plan = get_plan("affine_tiny")
    suite = suites("affine_tiny")
    table = affine_output_table(plan, suite)
    dev = translation_deviations_1d(table, plan.m)
    dev[0] = 0
    assert int(dev.argmax()) == 258
    err = deviation_to_error(int(dev.max()), table.size, plan.m)
    assert err == Fraction(51, 256)
    assert err <= plan.eps_claim
    specs = list(enumerate_tamperings(plan.n, "affine", True, 20, _rnd(b"affine-general")))
    worst = max(
        nm_error_from_arrays(table, table[apply_affine_bulk(s, plan.n)], plan.m)
        for s in specs
    )
    assert worst == Fraction(13, 512)
    assert worst <= plan.eps_claim


def test_affine_worst_sampled_map_agrees_with_the_definitional_checker(suites):
    plan = get_plan("affine_tiny")
    suite = suites("affine_tiny")
    table = affine_output_table(plan, suite)
    specs = list(enumerate_tamperings(plan.n, "affine", True, 20, _rnd(b"affine-general")))
    spec = max(
        specs,
        key=lambda s: nm_error_from_arrays(table, table[apply_affine_bulk(s, plan.n)],
                                           plan.m),
    )
    got = check_affine_nm(
        lambda x: BitVec(plan.m, int(table[x.value])),
        AffineSubspace.full(plan.n),
        spec,
    )
    assert got == Fraction(13, 512)


def test_seeded_output_is_strong_in_the_seed(suites):
    plan = get_plan("seeded_tiny")
    suite = suites("seeded_tiny")
    table = seeded_output_table(plan, suite)
    seeds = np.repeat(np.arange(1 << plan.n_y)[None, :], 1 << plan.n_x, axis=0)
    strong = nm_error_from_arrays(table.reshape(-1), seeds.reshape(-1), plan.m)
    assert strong == Fraction(43, 2048)
    assert strong <= plan.eps_claim


def test_seeded_worst_seed_permutation_stays_below_the_claim(suites):
    plan = get_plan("seeded_tiny")
    suite = suites("seeded_tiny")
    table = seeded_output_table(plan, suite)
    total, perm = max_fixed_point_free_assignment(pair_devs(table, plan.m))
    err = deviation_to_error(total, table.size, plan.m)
    assert perm == [14, 9, 12, 13, 10, 11, 8, 0, 6, 1, 15, 5, 2, 3, 7, 4]
    assert err == Fraction(271, 2048)
    assert err <= plan.eps_claim
    oracle = check_seeded_t_nm(
        lambda x, s: seeded_t_nm_ext(x, s, plan, suite),
        Distribution.uniform(plan.n_x),
        plan.n_y,
        [TamperSpec.raw(tuple(perm), plan.n_y, variant="seed_map")],
        strong=True,
    )
    assert oracle == err


def test_uneven_sampled_split_tamperings_stay_below_the_claim(suites):
    plan = get_plan("uneven_tiny")
    suite = suites("uneven_tiny")
    rnd = _rnd(b"uneven")
    src_x = flat_source(plan.n_x, 5, rnd)
    src_y = flat_source(plan.n_y, 4, rnd)
    specs = list(enumerate_tamperings((plan.n_x, plan.n_y), "split_state", True, 6, rnd))
    cache = {}

    def ext(x, y):
        key = (x.value, y.value)
        if key not in cache:
            cache[key] = two_source_nm_ext_uneven(x, y, plan, suite)
        return cache[key]

    worst = max(
        check_two_source_nm(ext, src_x, src_y,
                            TamperSpec.raw(s.f_table, plan.n_x),
                            TamperSpec.raw(s.g_table, plan.n_y))
        for s in specs
    )
    assert worst == Fraction(11, 512)
    assert worst <= plan.eps_claim
