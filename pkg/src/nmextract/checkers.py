"""Definitional checkers: exact non-malleability errors from joint distributions.

Every checker enumerates the relevant joint distribution and reports the
exact statistical distance the definition prescribes.  The conditioning side
always includes the tampered output (plus the seed for seeded notions).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable

from .bits import AffineSubspace, BitVec
from .dists import Distribution, distance_to_k_source
from .tampering import TamperSpec

__all__ = [
    "nm_error",
    "nm_error_counts",
    "independent_uniform_rows",
    "check_two_source_nm",
    "check_affine_nm",
    "check_seeded_t_nm",
    "check_adv_cb",
    "CondenserReport",
    "check_sw_condenser_rows",
    "SAME",
    "canonical_mixture_error",
]

SAME = "same"


def nm_error(rows: Iterable[tuple[int, Hashable, Fraction]], m: int) -> Fraction:
    """SD((W, C), (U_m, C)) from exact (w, cond, prob) triples."""
    joint: dict[tuple[Hashable, int], Fraction] = {}
    marginal: dict[Hashable, Fraction] = {}
    for w, c, p in rows:
        joint[(c, w)] = joint.get((c, w), Fraction(0)) + p
        marginal[c] = marginal.get(c, Fraction(0)) + p
    sd = Fraction(0)
    shift = 1 << m
    for c, pc in marginal.items():
        for w in range(shift):
            sd += abs(joint.get((c, w), Fraction(0)) - pc / shift)
    return sd / 2


def nm_error_counts(counts, m: int) -> Fraction:
    """nm_error from an integer count matrix, rows = W values, columns = conditions.

    Exact: SD = sum |2^m N[w,c] - M[c]| / (2 T 2^m) with M the column sums.
    """
    import numpy as np

    arr = np.asarray(counts, dtype=np.int64)
    if arr.shape[0] != 1 << m:
        raise ValueError(f"need {1 << m} rows, got {arr.shape[0]}")
    col = arr.sum(axis=0, dtype=np.int64)
    total = int(col.sum())
    if total == 0:
        raise ValueError("empty joint")
    dev = np.abs((arr.astype(object) << m) - col.astype(object)).sum()
    return Fraction(int(dev), 2 * total << m)


def independent_uniform_rows(
    conds: Iterable[tuple[Hashable, Fraction]], m: int
) -> list[tuple[int, Hashable, Fraction]]:
    """Joint rows for a truly uniform W independent of the condition (error 0)."""
    shift = 1 << m
    return [(w, c, p / shift) for c, p in conds for w in range(shift)]


def check_two_source_nm(
    ext: Callable[[BitVec, BitVec], BitVec],
    src_x: Distribution,
    src_y: Distribution,
    tamper_f: TamperSpec,
    tamper_g: TamperSpec,
) -> Fraction:
    """Exact SD((ext(X,Y), ext(f(X),g(Y))), (U_m, ext(f(X),g(Y))))."""
    if not (tamper_f.no_fixed_points or tamper_g.no_fixed_points):
        raise ValueError("both tamperings have fixed points")
    if tamper_f.width != src_x.width or tamper_g.width != src_y.width:
        raise ValueError("tampering widths do not match the sources")
    m = None
    rows = []
    for x, px in src_x.items():
        fx = tamper_f.apply(x)
        for y, py in src_y.items():
            w = ext(x, y)
            wp = ext(fx, tamper_g.apply(y))
            m = w.width if m is None else m
            rows.append((w.value, wp.value, px * py))
    return nm_error(rows, m)


def check_affine_nm(
    ext: Callable[[BitVec], BitVec],
    src: AffineSubspace,
    tamper: TamperSpec,
) -> Fraction:
    """Exact SD((ext(X), ext(A(X))), (U_m, ext(A(X)))) for affine X and A."""
    if tamper.variant != "affine":
        raise ValueError(f"need an affine tampering, got {tamper.variant}")
    if not tamper.no_fixed_points:
        raise ValueError("tampering has fixed points")
    if tamper.width != src.ambient_width:
        raise ValueError("tampering width does not match the source")
    pts = src.enumerate()
    p = Fraction(1, len(pts))
    m = None
    rows = []
    for x in pts:
        w = ext(x)
        wp = ext(tamper.apply(x))
        m = w.width if m is None else m
        rows.append((w.value, wp.value, p))
    return nm_error(rows, m)


def check_seeded_t_nm(
    ext: Callable[[BitVec, BitVec], BitVec],
    src: Distribution,
    seed_width: int,
    seed_tampers: list[TamperSpec],
    strong: bool = True,
) -> Fraction:
    """t-tampering error over a uniform seed; strong mode conditions on the seed too.

    With strong=False and t=1 this coincides with check_two_source_nm at a
    uniform second source and identity first tampering.
    """
    for i, t in enumerate(seed_tampers):
        if not t.no_fixed_points:
            raise ValueError(f"seed tampering {i} has fixed points")
        if t.width != seed_width:
            raise ValueError(f"seed tampering {i} width {t.width} != {seed_width}")
    m = None
    rows = []
    p_seed = Fraction(1, 1 << seed_width)
    for x, px in src.items():
        for s_val in range(1 << seed_width):
            s = BitVec(seed_width, s_val)
            w = ext(x, s)
            cond = tuple(ext(x, t.apply(s)).value for t in seed_tampers)
            if strong:
                cond += (s_val,)
            m = w.width if m is None else m
            rows.append((w.value, cond, px * p_seed))
    return nm_error(rows, m)


def check_adv_cb(
    cb: Callable[[BitVec, BitVec, BitVec], BitVec],
    joint: Distribution,
    widths: tuple[int, int, int],
    advice: tuple[BitVec, BitVec],
) -> Fraction:
    """SD((cb(X,Y,a), cb(X,Y',a')), (U, cb(X,Y',a'))) over the supplied (X,Y,Y') joint."""
    wx, wy, wy2 = widths
    if wx + wy + wy2 != joint.width:
        raise ValueError(f"widths {widths} do not sum to joint width {joint.width}")
    a, ap = advice
    if a == ap:
        raise ValueError("advice strings must be distinct")
    m = None
    rows = []
    for v, p in joint.items():
        x = v.take(0, wx)
        y = v.take(wx, wx + wy)
        yp = v.take(wx + wy, wx + wy + wy2)
        w = cb(x, y, a)
        wp = cb(x, yp, ap)
        m = w.width if m is None else m
        rows.append((w.value, wp.value, p))
    return nm_error(rows, m)


@dataclass(frozen=True)
class CondenserReport:
    passed: bool
    witness_row: int | None
    row_distances: tuple[Fraction, ...]
    k_prime: int
    eps: Fraction


def check_sw_condenser_rows(
    rows_joint: Distribution,
    d_rows: int,
    row_width: int,
    k_prime: int,
    eps: Fraction,
    cond_width: int = 0,
) -> CondenserReport:
    """Pass iff some row is within eps of a k'-source for every conditioning value.

    The joint is over row_1 o ... o row_D o cond; with cond_width 0 the rows
    are judged unconditionally.
    """
    if d_rows * row_width + cond_width != rows_joint.width:
        raise ValueError(
            f"{d_rows} rows of {row_width} plus cond {cond_width} != width {rows_joint.width}"
        )
    worst: list[Fraction] = []
    for j in range(d_rows):
        lo = j * row_width
        if cond_width == 0:
            worst.append(distance_to_k_source(rows_joint.marginal(lo, lo + row_width), k_prime))
            continue
        by_cond: dict[int, dict[int, Fraction]] = {}
        cond_mass: dict[int, Fraction] = {}
        for v, p in rows_joint.items():
            c = v.take(rows_joint.width - cond_width, rows_joint.width).value
            row = v.take(lo, lo + row_width).value
            by_cond.setdefault(c, {})
            by_cond[c][row] = by_cond[c].get(row, Fraction(0)) + p
            cond_mass[c] = cond_mass.get(c, Fraction(0)) + p
        row_worst = Fraction(0)
        for c, probs in by_cond.items():
            dist = Distribution.from_probs(
                row_width, {r: q / cond_mass[c] for r, q in probs.items()}
            )
            row_worst = max(row_worst, distance_to_k_source(dist, k_prime))
        worst.append(row_worst)
    witness = next((j for j, d in enumerate(worst) if d <= eps), None)
    return CondenserReport(witness is not None, witness, tuple(worst), k_prime, eps)


def canonical_mixture_error(
    per_msg: list[dict[Hashable, Fraction]],
) -> tuple[Fraction, dict[Hashable, Fraction]]:
    """Upper bound on the code nm error via the averaged canonical mixture.

    Inputs are tampered-decode distributions per message over message values
    plus SAME (mass where the tampering fixed the codeword).  The reference
    is their average; the bound is the worst SD to it.
    """
    if not per_msg:
        raise ValueError("no messages")
    keys = set()
    for d in per_msg:
        keys |= d.keys()
    count = len(per_msg)
    ref = {k: sum((d.get(k, Fraction(0)) for d in per_msg), Fraction(0)) / count for k in keys}
    worst = Fraction(0)
    for d in per_msg:
        sd = sum(abs(d.get(k, Fraction(0)) - ref[k]) for k in keys) / 2
        worst = max(worst, sd)
    return worst, ref
