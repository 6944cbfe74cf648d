"""Composed correlation breaker: slice, advice rows, per-row breaking, XOR fold.

The breaker takes two d-bit inputs and an advice string.  Short slices of
both inputs feed the inner-product extractor; the result is spread into
somewhere-random rows that mix in the advice; every condensed row seed runs
one strong two-source step and one basic breaker step; the per-row outputs
collapse by XOR, so a single row that decorrelates from its tampered twin
decorrelates the whole output.

The general entry point accepts a longer first input and condenses it to d
bits with a seeded hash keyed by a slice of the second input before running
the breaker on the remainder.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bits import BitVec, cat
from .plans import BreakerPlan, BreakerShape
from .primitives import iext, ip_extract
from .suite import PrimitiveSuite

__all__ = [
    "AdviceString",
    "SomewhereRows",
    "TraceStep",
    "adv_cb",
    "adv_cb_general",
    "adv_sr_cond",
    "audit_breaker_trace",
    "trace_to_text",
]


@dataclass(frozen=True)
class AdviceString:
    """Advice bits tagged with where they came from, for reports and traces."""

    bits: BitVec
    origin: str = ""

    @property
    def width(self) -> int:
        return self.bits.width


@dataclass(frozen=True)
class SomewhereRows:
    """Equal-width candidate rows; at least one is meant to stay good."""

    rows: tuple[BitVec, ...]

    def __post_init__(self) -> None:
        if not self.rows:
            raise ValueError("somewhere-random matrix needs at least one row")
        w = self.rows[0].width
        for i, r in enumerate(self.rows):
            if r.width != w:
                raise ValueError(f"row {i} width {r.width}, row 0 width {w}")

    @property
    def row_count(self) -> int:
        return len(self.rows)

    @property
    def row_width(self) -> int:
        return self.rows[0].width


@dataclass(frozen=True)
class TraceStep:
    """One pipeline stage: widths in, width out, and the produced value."""

    step: int
    name: str
    in_widths: tuple[int, ...]
    out_width: int
    value_hex: str

    def to_line(self) -> str:
        ins = ",".join(str(w) for w in self.in_widths)
        return (f"step {self.step} name={self.name} in={ins} "
                f"out={self.out_width} value={self.value_hex}")


def trace_to_text(steps: list[TraceStep]) -> str:
    return "".join(s.to_line() + "\n" for s in steps)


def _hex(v: BitVec) -> str:
    return f"{v.value:0{max(1, (v.width + 3) // 4)}x}"


def _emit(trace: list[TraceStep] | None, name: str,
          ins: tuple[BitVec, ...], out: BitVec) -> None:
    if trace is not None:
        trace.append(TraceStep(len(trace) + 1, name,
                               tuple(v.width for v in ins), out.width, _hex(out)))


def _advice_bits(advice: AdviceString | BitVec) -> BitVec:
    return advice.bits if isinstance(advice, AdviceString) else advice


def adv_sr_cond(x: BitVec, advice: AdviceString | BitVec, shape: BreakerShape,
                suite: PrimitiveSuite, *, prefix: str = "",
                trace: list[TraceStep] | None = None) -> SomewhereRows:
    """Spread x into blocks plus one advice-mixing row of the same width.

    Rows 1..l are the blocks of x verbatim; the last row hashes every block
    together with the advice, so executions with different advice disagree
    on it even when x survives tampering unchanged.
    """
    a = _advice_bits(advice)
    if x.width != shape.w_ip:
        raise ValueError(f"adv_sr_cond: input width {x.width}, shape wants {shape.w_ip}")
    if a.width != shape.a_bits:
        raise ValueError(f"adv_sr_cond: advice width {a.width}, shape wants {shape.a_bits}")
    bw = shape.block_width
    blocks = [x.take(j * bw, (j + 1) * bw) for j in range(shape.l_in)]
    for j, b in enumerate(blocks):
        _emit(trace, f"block[{j}]", (x,), b)
    mixed = suite[prefix + "nml"].extract(tuple(cat(b, a) for b in blocks))
    if mixed.width > bw:
        raise ValueError(f"adv_sr_cond: mixing row width {mixed.width} exceeds block width {bw}")
    row = cat(mixed, BitVec.zeros(bw - mixed.width))
    _emit(trace, "nml_row", tuple(cat(b, a) for b in blocks), row)
    return SomewhereRows(tuple(blocks) + (row,))


def adv_cb(x: BitVec, y: BitVec, advice: AdviceString | BitVec,
           shape: BreakerShape, suite: PrimitiveSuite, *, prefix: str = "",
           trace: list[TraceStep] | None = None) -> BitVec:
    """Advice correlation breaker over two d-bit inputs."""
    a = _advice_bits(advice)
    if x.width != shape.d or y.width != shape.d:
        raise ValueError(f"adv_cb step 1 (slice): input widths ({x.width}, {y.width}), "
                         f"shape wants ({shape.d}, {shape.d})")
    if a.width != shape.a_bits:
        raise ValueError(f"adv_cb step 1 (slice): advice width {a.width}, "
                         f"shape wants {shape.a_bits}")
    x1 = x.prefix(shape.w_sl)
    y1 = y.prefix(shape.w_sl)
    _emit(trace, "slice_x", (x,), x1)
    _emit(trace, "slice_y", (y,), y1)
    v = ip_extract(x1, y1, shape.w_ip)
    _emit(trace, "ip", (x1, y1), v)
    rows = adv_sr_cond(v, a, shape, suite, prefix=prefix, trace=trace)
    seeds: list[BitVec] = []
    for i, row in enumerate(rows.rows):
        parts = suite[prefix + "cond"].condense(row)
        _emit(trace, f"cond[{i}]", (row,), cat(*parts))
        seeds.extend(parts)
    if len(seeds) != shape.total_rows:
        raise ValueError(f"adv_cb step 4 (condense): {len(seeds)} seeds, "
                         f"shape wants {shape.total_rows}")
    out = BitVec.zeros(shape.m_cb)
    for j, s in enumerate(seeds):
        w_j = suite[prefix + "raz"].extract(y, s)
        _emit(trace, f"raz[{j}]", (y, s), w_j)
        ctr = BitVec(shape.ctr_bits, j)
        z_j = suite[prefix + "acb"].break_correlation(x, w_j, ctr)
        _emit(trace, f"acb[{j}]", (x, w_j, ctr), z_j)
        out ^= z_j
    _emit(trace, "fold", tuple(BitVec(shape.m_cb, 0) for _ in seeds), out)
    return out


def adv_cb_general(x: BitVec, y: BitVec, advice: AdviceString | BitVec,
                   plan: BreakerPlan, suite: PrimitiveSuite, *, prefix: str = "",
                   trace: list[TraceStep] | None = None) -> BitVec:
    """Breaker for a first input wider than d.

    The first w_slice bits of y seed a hash condensing x to d bits; the
    breaker then runs on the hashed value and the remainder of y.  With an
    empty slice this is adv_cb plus one bookkeeping trace entry.
    """
    sh = plan.shape
    if x.width != plan.n_x:
        raise ValueError(f"adv_cb_general step 0 (seed slice): input width {x.width}, "
                         f"plan wants {plan.n_x}")
    if y.width != plan.d_general:
        raise ValueError(f"adv_cb_general step 0 (seed slice): second width {y.width}, "
                         f"plan wants {plan.d_general}")
    seed = y.prefix(plan.w_slice)
    rest = y.take(plan.w_slice, y.width)
    _emit(trace, "seed_slice", (y,), seed)
    if plan.w_slice == 0:
        return adv_cb(x, rest, advice, sh, suite, prefix=prefix, trace=trace)
    x_red = iext(x, seed, sh.d)
    _emit(trace, "reduce", (x, seed), x_red)
    return adv_cb(x_red, rest, advice, sh, suite, prefix=prefix, trace=trace)


def _expected_trace(plan: BreakerShape | BreakerPlan) -> list[tuple[str, tuple[int, ...], int]]:
    out: list[tuple[str, tuple[int, ...], int]] = []
    if isinstance(plan, BreakerPlan):
        sh = plan.shape
        out.append(("seed_slice", (plan.d_general,), plan.w_slice))
        if plan.w_slice:
            out.append(("reduce", (plan.n_x, plan.w_slice), sh.d))
    else:
        sh = plan
    bw = sh.block_width
    out += [("slice_x", (sh.d,), sh.w_sl), ("slice_y", (sh.d,), sh.w_sl),
            ("ip", (sh.w_sl, sh.w_sl), sh.w_ip)]
    out += [(f"block[{j}]", (sh.w_ip,), bw) for j in range(sh.l_in)]
    out.append(("nml_row", (bw + sh.a_bits,) * sh.l_in, bw))
    out += [(f"cond[{i}]", (bw,), sh.d_rows * sh.m_c) for i in range(sh.rows)]
    for j in range(sh.total_rows):
        out.append((f"raz[{j}]", (sh.d, sh.m_c), sh.m_raz))
        out.append((f"acb[{j}]", (sh.d, sh.m_raz, sh.ctr_bits), sh.m_cb))
    out.append(("fold", (sh.m_cb,) * sh.total_rows, sh.m_cb))
    return out


def audit_breaker_trace(steps: list[TraceStep], plan: BreakerShape | BreakerPlan) -> None:
    """Check every trace entry against the width arithmetic the plan implies."""
    want = _expected_trace(plan)
    if len(steps) != len(want):
        raise ValueError(f"trace has {len(steps)} steps, plan implies {len(want)}")
    for k, (got, (name, ins, out_w)) in enumerate(zip(steps, want), start=1):
        if got.step != k:
            raise ValueError(f"trace step {k}: numbered {got.step}")
        if got.name != name:
            raise ValueError(f"trace step {k}: name {got.name!r}, plan implies {name!r}")
        if got.in_widths != ins:
            raise ValueError(f"trace step {k} ({name}): in widths {got.in_widths}, "
                             f"plan implies {ins}")
        if got.out_width != out_w:
            raise ValueError(f"trace step {k} ({name}): out width {got.out_width}, "
                             f"plan implies {out_w}")
