"""Non-malleable extractors assembled from the suite primitives.

Four pipelines share one recipe: carve short slices off the inputs, turn
them into an advice string by sampling positions of an encoded tail keyed
by a slice hash, run a correlation breaker under that advice, and hash a
reserved block with the breaker output.  Tampering that changes the input
almost surely changes the advice, and the breaker decouples executions
with different advice.

Every step checks its widths and reports failures with the step index.
Passing a list as ``trace`` records (step, name, in widths, out width,
value) rows for the same mechanical audit the breaker traces support.
"""

from __future__ import annotations

from .bits import BitVec, cat
from .breakers import AdviceString, TraceStep, _emit, adv_cb
from .plans import AffinePlan, SeededPlan, SplitPlan, UnevenPlan, get_plan
from .primitives import iext, ip_extract
from .suite import PrimitiveSuite

__all__ = [
    "affine_advice",
    "anm_ext",
    "seeded_advice",
    "seeded_t_nm_ext",
    "split_advice",
    "two_source_nm_ext",
    "two_source_nm_ext_uneven",
    "uneven_rows",
]


def _need(ok: bool, op: str, step: int, name: str, detail: str) -> None:
    if not ok:
        raise ValueError(f"{op} step {step} ({name}): {detail}")


# ---------------------------------------------------------------------------
# Affine-source extractor.


def _affine_blocks(x: BitVec, plan: AffinePlan) -> tuple[BitVec, ...]:
    """x as (x0, x1, mid_1..mid_b, x13, x14, x_hat)."""
    cuts = [plan.w0, plan.w0] + [plan.w_block] * plan.b + [plan.w13, plan.w14, plan.w_hat]
    out = []
    lo = 0
    for w in cuts:
        out.append(x.take(lo, lo + w))
        lo += w
    return tuple(out)


def affine_advice(x: BitVec, plan: AffinePlan, suite: PrimitiveSuite, *,
                  trace: list[TraceStep] | None = None) -> AdviceString:
    """Advice for one affine-pipeline run: prefixes plus keyed samples of Enc(tail)."""
    _need(x.width == plan.n, "anm_ext", 1, "split", f"input width {x.width}, plan wants {plan.n}")
    x0, x1 = x.take(0, plan.w0), x.take(plan.w0, 2 * plan.w0)
    tail = x.take(2 * plan.w0, plan.n)
    code = suite["code"]
    samples = []
    for i, part in enumerate((x0, x1)):
        z = suite["aext_z"].extract(part)
        _emit(trace, f"aext_z[{i}]", (part,), z)
        s = code.sampled_bits(tail, cat(BitVec(1, i), z), plan.s_samp)
        _emit(trace, f"sample[{i}]", (tail,), s)
        samples.append(s)
    alpha = cat(x0, x1, samples[0], samples[1])
    _emit(trace, "advice", (x0, x1, samples[0], samples[1]), alpha)
    return AdviceString(alpha, origin="affine prefixes + encoded-tail samples")


def anm_ext(x: BitVec, plan: AffinePlan, suite: PrimitiveSuite, *,
            trace: list[TraceStep] | None = None) -> BitVec:
    """Affine-source non-malleable extractor."""
    alpha = affine_advice(x, plan, suite, trace=trace).bits
    blocks = _affine_blocks(x, plan)
    mids = blocks[2:2 + plan.b]
    x13, x14 = blocks[2 + plan.b], blocks[3 + plan.b]
    rows = []
    for j, mid in enumerate(mids):
        v = suite["aext_mid"].extract(mid)
        _emit(trace, f"aext_mid[{j}]", (mid,), v)
        rows.append(v)
    mixed = suite["czext"].extract(tuple(cat(mid, alpha) for mid in mids))
    _emit(trace, "czext", tuple(cat(mid, alpha) for mid in mids), mixed)
    rows.append(mixed)
    _need(len(rows) == plan.rows, "anm_ext", 4, "rows", f"{len(rows)} rows, plan wants {plan.rows}")
    r = BitVec.zeros(plan.s_r)
    for j, v in enumerate(rows):
        ctr = BitVec(plan.ctr_bits, j)
        z = suite["acb"].break_correlation(x13, v, ctr)
        _emit(trace, f"acb[{j}]", (x13, v, ctr), z)
        r ^= z
    _emit(trace, "fold", tuple(BitVec(plan.s_r, 0) for _ in rows), r)
    w = iext(x14, r, plan.m)
    _emit(trace, "hash", (x14, r), w)
    return w


# ---------------------------------------------------------------------------
# Two-source split-state extractor.


def split_advice(x: BitVec, y: BitVec, plan: SplitPlan, suite: PrimitiveSuite, *,
                 prefix: str = "",
                 trace: list[TraceStep] | None = None) -> AdviceString:
    """Advice for one split-state run: both prefixes plus samples of both tails."""
    _need(x.width == plan.n and y.width == plan.n, "two_source_nm_ext", 1, "split",
          f"input widths ({x.width}, {y.width}), plan wants ({plan.n}, {plan.n})")
    x1, x2 = x.take(0, plan.w1), x.take(plan.w1, plan.n)
    y1, y2 = y.take(0, plan.w1), y.take(plan.w1, plan.n)
    z = ip_extract(x1, y1, plan.m_z)
    _emit(trace, "ip", (x1, y1), z)
    code = suite[prefix + "code"]
    sx = code.sampled_bits(x2, cat(BitVec(1, 0), z), plan.s_samp)
    _emit(trace, "sample_x", (x2,), sx)
    sy = code.sampled_bits(y2, cat(BitVec(1, 1), z), plan.s_samp)
    _emit(trace, "sample_y", (y2,), sy)
    alpha = cat(x1, y1, sx, sy)
    _emit(trace, "advice", (x1, y1, sx, sy), alpha)
    return AdviceString(alpha, origin="split prefixes + encoded-tail samples")


def two_source_nm_ext(x: BitVec, y: BitVec, plan: SplitPlan, suite: PrimitiveSuite, *,
                      prefix: str = "",
                      trace: list[TraceStep] | None = None) -> BitVec:
    """Two-source non-malleable extractor over equal-width inputs."""
    alpha = split_advice(x, y, plan, suite, prefix=prefix, trace=trace)
    x2 = x.take(plan.w1, plan.n)
    y2 = y.take(plan.w1, plan.n)
    x3, y3 = x2.take(0, plan.w3), y2.take(0, plan.w3)
    y4 = y2.take(plan.w3, plan.w3 + plan.w4)
    if plan.cb_path == "table":
        v = suite[prefix + "cb"].break_correlation(x3, y3, alpha.bits)
        _emit(trace, "cb", (x3, y3, alpha.bits), v)
    else:
        v = adv_cb(x3, y3, alpha, plan.breaker, suite, prefix=prefix, trace=trace)
    _need(v.width == plan.d_v, "two_source_nm_ext", 5, "cb",
          f"breaker output {v.width}, plan wants {plan.d_v}")
    w = iext(y4, v, plan.m)
    _emit(trace, "hash", (y4, v), w)
    return w


# ---------------------------------------------------------------------------
# Uneven two-source extractor.


def uneven_rows(x: BitVec, y: BitVec, plan: UnevenPlan, suite: PrimitiveSuite, *,
                trace: list[TraceStep] | None = None) -> list[dict]:
    """Per-row intermediates: seeds, advice, inner run, and folded share."""
    _need(x.width == plan.n_x and y.width == plan.n_y, "two_source_nm_ext_uneven", 1,
          "split", f"input widths ({x.width}, {y.width}), plan wants "
                   f"({plan.n_x}, {plan.n_y})")
    inner = get_plan(plan.inner_name)
    x1 = x.take(0, plan.w_x1)
    cond_rows = suite["cond"].condense(x1)
    _emit(trace, "cond", (x1,), cat(*cond_rows))
    code_x, code_y = suite["code_x"], suite["code_y"]
    out = []
    for i, row in enumerate(cond_rows):
        ctr = BitVec(plan.ctr_bits, i)
        v = suite["raz_v"].extract(y, row)
        _emit(trace, f"raz_v[{i}]", (y, row), v)
        t = suite["ext_t"].extract(x, v.take(0, plan.w_seed))
        _emit(trace, f"ext_t[{i}]", (x, v.take(0, plan.w_seed)), t)
        vt, tt = v.take(0, plan.w_tilde), t.take(0, plan.w_tilde)
        h = ip_extract(vt, tt, plan.m_h)
        _emit(trace, f"ip[{i}]", (vt, tt), h)
        sx = code_x.sampled_bits(x, cat(BitVec(1, 0), ctr, h), plan.s_u)
        _emit(trace, f"sample_x[{i}]", (x,), sx)
        sy = code_y.sampled_bits(y, cat(BitVec(1, 1), ctr, h), plan.s_u)
        _emit(trace, f"sample_y[{i}]", (y,), sy)
        alpha = cat(sx, sy, vt, tt)
        _emit(trace, f"advice[{i}]", (sx, sy, vt, tt), alpha)
        r = two_source_nm_ext(cat(v, alpha), cat(t, alpha), inner, suite,
                              prefix="inner.", trace=trace)
        share = suite["acb_row"].break_correlation(y, r, ctr)
        _emit(trace, f"acb_row[{i}]", (y, r, ctr), share)
        out.append({"ctr": ctr, "v": v, "t": t, "h": h, "alpha": alpha,
                    "inner": r, "share": share})
    return out


def two_source_nm_ext_uneven(x: BitVec, y: BitVec, plan: UnevenPlan,
                             suite: PrimitiveSuite, *,
                             trace: list[TraceStep] | None = None) -> BitVec:
    """Two-source non-malleable extractor for a long x and a short y."""
    rows = uneven_rows(x, y, plan, suite, trace=trace)
    out = BitVec.zeros(plan.m_out)
    for row in rows:
        out ^= row["share"]
    _emit(trace, "fold", tuple(BitVec(plan.m_out, 0) for _ in rows), out)
    return out


# ---------------------------------------------------------------------------
# Seeded extractor with tampered seeds.


def seeded_advice(x: BitVec, y: BitVec, plan: SeededPlan, suite: PrimitiveSuite, *,
                  trace: list[TraceStep] | None = None) -> AdviceString:
    """Advice for one seeded run: a hash slice plus keyed samples of Enc(seed)."""
    _need(x.width == plan.n_x and y.width == plan.n_y, "seeded_t_nm_ext", 1, "ext_z",
          f"input widths ({x.width}, {y.width}), plan wants ({plan.n_x}, {plan.n_y})")
    z = suite["ext_z"].extract(x, y.take(0, plan.d1))
    _emit(trace, "ext_z", (x, y.take(0, plan.d1)), z)
    z1 = z.take(0, plan.d2)
    y1 = suite["code"].sampled_bits(y, z1, plan.s_y)
    _emit(trace, "sample_seed", (y,), y1)
    alpha = cat(z1, y1)
    _emit(trace, "advice", (z1, y1), alpha)
    return AdviceString(alpha, origin="hash slice + encoded-seed samples")


def seeded_t_nm_ext(x: BitVec, y: BitVec, plan: SeededPlan, suite: PrimitiveSuite, *,
                    trace: list[TraceStep] | None = None) -> BitVec:
    """Seeded non-malleable extractor, strong in the seed."""
    alpha = seeded_advice(x, y, plan, suite, trace=trace)
    z = suite["ext_z"].extract(x, y.take(0, plan.d1))
    w = suite["raz"].extract(z.take(0, plan.d3), y.take(0, plan.d4))
    _emit(trace, "raz", (z.take(0, plan.d3), y.take(0, plan.d4)), w)
    zt = suite["ext_wx"].extract(x, w)
    _emit(trace, "ext_wx", (x, w), zt)
    yt = suite["ext_wy"].extract(y, w)
    _emit(trace, "ext_wy", (y, w), yt)
    v1 = suite["cb"].break_correlation(yt, zt, alpha.bits)
    _emit(trace, "cb", (yt, zt, alpha.bits), v1)
    v2 = suite["ext_v2"].extract(y, v1)
    _emit(trace, "ext_v2", (y, v1), v2)
    out = suite["ext_out"].extract(x, v2)
    _emit(trace, "ext_out", (x, v2), out)
    return out
