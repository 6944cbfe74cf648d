"""Whole-domain output tables and exact error maps over tampering families.

Enumerating an extractor over its input space gives an integer table; XOR
convolution (integer Walsh-Hadamard) then produces the exact joint counts
of (output, tampered output) for every translation at once, and fancy
indexing covers arbitrary sampled tamper tables.  Everything stays in
integer counts, so each reported error is an exact rational.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .bits import BitVec, cat
from .breakers import AdviceString, adv_sr_cond
from .nmext import anm_ext, seeded_t_nm_ext
from .plans import AffinePlan, BreakerShape, SeededPlan, SplitPlan
from .primitives import iext_matrix, ip_extract
from .suite import PrimitiveSuite
from .tampering import TamperSpec

__all__ = [
    "affine_output_table",
    "apply_affine_bulk",
    "breaker_x_table",
    "deviation_to_error",
    "fwht_int",
    "matrix_apply_bulk",
    "max_fixed_point_free_assignment",
    "nm_error_from_arrays",
    "pair_devs",
    "seeded_output_table",
    "split_output_table",
    "translation_deviations_1d",
    "translation_deviations_2d",
]


def fwht_int(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along one power-of-two axis.

    Integer in, integer out; applying it twice multiplies by the length, so
    XOR convolutions computed through it stay exact.
    """
    out = np.array(np.moveaxis(a, axis, -1), dtype=np.int64)
    n = out.shape[-1]
    if n == 0 or n & (n - 1):
        raise ValueError(f"axis length {n} is not a power of two")
    h = 1
    while h < n:
        b = out.reshape(out.shape[:-1] + (n // (2 * h), 2, h))
        out = np.stack((b[..., 0, :] + b[..., 1, :],
                        b[..., 0, :] - b[..., 1, :]), axis=-2)
        out = out.reshape(out.shape[:-3] + (n,))
        h *= 2
    return np.moveaxis(out, -1, axis)


def translation_deviations_1d(table: np.ndarray, m: int) -> np.ndarray:
    """Integer deviation of each translation's joint from independent-uniform.

    table[x] holds m-bit outputs over the full 2^n domain.  Entry b of the
    result is dev(b) = sum_{w,c} |2^m N_b[w,c] - M_b[c]| where N_b counts
    pairs (T[x], T[x^b]); the exact error is dev / (2 * 2^n * 2^m).
    """
    k = 1 << m
    n = table.shape[-1]
    ind = np.stack([(table == w).astype(np.int64) for w in range(k)])
    fs = fwht_int(ind)
    counts = np.empty((k, k, n), dtype=np.int64)
    for w in range(k):
        for c in range(k):
            back = fwht_int(fs[w] * fs[c])
            if (back % n).any():
                raise AssertionError("inexact Walsh-Hadamard inversion")
            counts[w, c] = back // n
    cond_mass = counts.sum(axis=0)
    return np.abs((counts << m) - cond_mass[None, :, :]).sum(axis=(0, 1))


def translation_deviations_2d(table: np.ndarray, m: int) -> np.ndarray:
    """Two-axis analogue: dev[a, b] for tampering (x, y) -> (x^a, y^b)."""
    k = 1 << m
    nx, ny = table.shape
    ind = np.stack([(table == w).astype(np.int64) for w in range(k)])
    fs = fwht_int(fwht_int(ind, axis=-1), axis=-2)
    counts = np.empty((k, k, nx, ny), dtype=np.int64)
    total = nx * ny
    for w in range(k):
        for c in range(k):
            back = fwht_int(fwht_int(fs[w] * fs[c], axis=-1), axis=-2)
            if (back % total).any():
                raise AssertionError("inexact Walsh-Hadamard inversion")
            counts[w, c] = back // total
    cond_mass = counts.sum(axis=0)
    return np.abs((counts << m) - cond_mass[None, :, :, :]).sum(axis=(0, 1))


def deviation_to_error(dev: int, domain_size: int, m: int) -> Fraction:
    """Exact statistical distance from an integer deviation numerator."""
    return Fraction(int(dev), 2 * domain_size << m)


def nm_error_from_arrays(w: np.ndarray, cond: np.ndarray, m: int) -> Fraction:
    """Exact SD((W, C), (U_m, C)) from parallel integer arrays."""
    if w.shape != cond.shape:
        raise ValueError(f"shape mismatch {w.shape} vs {cond.shape}")
    ncond = int(cond.max()) + 1 if cond.size else 1
    counts = np.bincount((cond.astype(np.int64) << m) + w,
                         minlength=ncond << m).reshape(ncond, 1 << m)
    cond_mass = counts.sum(axis=1)
    dev = np.abs((counts << m) - cond_mass[:, None]).sum()
    return Fraction(int(dev), 2 * int(counts.sum()) << m)


def pair_devs(table: np.ndarray, m: int) -> np.ndarray:
    """dev[s, s2]: deviation numerator for seed pair (s, s2) in an (x, seed) table.

    Entry (s, s2) measures SD((T[X, s], T[X, s2]), (U_m, T[X, s2])) over
    uniform X; the exact error is dev / (2 * 2^{n_x} * 2^m).
    """
    nx, ns = table.shape
    k = 1 << m
    dev = np.zeros((ns, ns), dtype=np.int64)
    for s in range(ns):
        for s2 in range(ns):
            counts = np.bincount((table[:, s2] << m) + table[:, s],
                                 minlength=k * k).reshape(k, k)
            cond_mass = counts.sum(axis=1)
            dev[s, s2] = np.abs((counts << m) - cond_mass[:, None]).sum()
    return dev


def max_fixed_point_free_assignment(weights: np.ndarray) -> tuple[int, list[int]]:
    """Max total weight of a permutation with no fixed points, plus a witness.

    Solves the assignment problem with the diagonal forbidden, so the result
    is the exact maximum over every fixed-point-free permutation.
    """
    from scipy.optimize import linear_sum_assignment

    n = weights.shape[0]
    if n < 2 or weights.shape != (n, n):
        raise ValueError(f"need a square matrix of order >= 2, got {weights.shape}")
    cost = weights.astype(np.float64)
    np.fill_diagonal(cost, -float(np.abs(weights).sum() + 1))
    rows, cols = linear_sum_assignment(cost, maximize=True)
    perm = [int(c) for c in cols]
    if any(p == i for i, p in enumerate(perm)):
        raise AssertionError("assignment kept a fixed point")
    total = int(weights[rows, cols].sum())
    return total, perm


def apply_affine_bulk(spec: TamperSpec, n: int) -> np.ndarray:
    """img[x] = value of the affine map at x, for every x in [0, 2^n)."""
    if spec.variant != "affine" or spec.width != n:
        raise ValueError("need an affine tampering of the declared width")
    img = np.array([spec.offset.value], dtype=np.int64)
    for j in reversed(range(n)):
        img = np.concatenate((img, img ^ spec.matrix.column(j).value))
    return img


# ---------------------------------------------------------------------------
# Bulk output tables.


def affine_output_table(plan: AffinePlan, suite: PrimitiveSuite) -> np.ndarray:
    """anm_ext over the full input space."""
    out = np.empty(1 << plan.n, dtype=np.int64)
    for xv in range(1 << plan.n):
        out[xv] = anm_ext(BitVec(plan.n, xv), plan, suite).value
    return out


def seeded_output_table(plan: SeededPlan, suite: PrimitiveSuite) -> np.ndarray:
    """seeded_t_nm_ext over the full (source, seed) grid."""
    out = np.empty((1 << plan.n_x, 1 << plan.n_y), dtype=np.int64)
    for xv in range(1 << plan.n_x):
        x = BitVec(plan.n_x, xv)
        for yv in range(1 << plan.n_y):
            out[xv, yv] = seeded_t_nm_ext(x, BitVec(plan.n_y, yv), plan, suite).value
    return out


def _matrix_row_ints(matrix) -> list[int]:
    return [matrix.row(i).value for i in range(matrix.rows)]


def _gf2_mul_bulk(row_ints: list[int], xs: np.ndarray) -> np.ndarray:
    """Pack per-row parities of (row & x) into ints, first row highest."""
    out = np.zeros_like(xs)
    for r in row_ints:
        out = (out << 1) | (np.bitwise_count(xs & r).astype(np.int64) & 1)
    return out


def matrix_apply_bulk(matrix, xs: np.ndarray) -> np.ndarray:
    """img[i] = matrix applied to xs[i], both as MSB-first integers."""
    return _gf2_mul_bulk(_matrix_row_ints(matrix), xs)


def split_output_table(plan: SplitPlan, suite: PrimitiveSuite, *,
                       prefix: str = "") -> np.ndarray:
    """two_source_nm_ext over the full (x, y) grid, table breaker path only."""
    if plan.cb_path != "table":
        raise ValueError("bulk enumeration supports the table breaker path only")
    n, w1, w2, w3, w4 = plan.n, plan.w1, plan.w2, plan.w3, plan.w4
    s, a_bits = plan.s_samp, plan.alpha_bits
    code = suite[prefix + "code"]
    cb = suite[prefix + "cb"].fn
    x2_arr = np.arange(1 << (n - w1), dtype=np.int64)
    x3_arr = x2_arr >> (w2 - w3)

    samp_rows: dict[tuple[int, int], list[int]] = {}

    def rows_for(side: int, zv: int) -> list[int]:
        if (side, zv) not in samp_rows:
            key = cat(BitVec(1, side), BitVec(plan.m_z, zv))
            mat = code.sampled_matrix(code.positions_for(key, s))
            samp_rows[(side, zv)] = _matrix_row_ints(mat)
        return samp_rows[(side, zv)]

    sx_by_z = {zv: _gf2_mul_bulk(rows_for(0, zv), x2_arr)
               for zv in range(1 << plan.m_z)}
    hash_mats = [iext_matrix(BitVec(plan.d_v, v), w4, plan.m)
                 for v in range(1 << plan.d_v)]
    table = np.empty((1 << n, 1 << n), dtype=np.int64)
    for yv in range(1 << n):
        y = BitVec(n, yv)
        y1, y2 = y.take(0, w1), y.take(w1, n)
        y3v = y2.take(0, w3).value
        y4 = y2.take(w3, w3 + w4)
        w_of_v = np.array([mat.mul_vec(y4).value for mat in hash_mats],
                          dtype=np.int64)
        for x1v in range(1 << w1):
            z = ip_extract(BitVec(w1, x1v), y1, plan.m_z)
            syv = 0
            for r in rows_for(1, z.value):
                syv = (syv << 1) | ((y2.value & r).bit_count() & 1)
            sx = sx_by_z[z.value]
            alpha_arr = ((((x1v << w1) | y1.value) << s | sx) << s) | syv
            idx = (((x3_arr << w3) | y3v) << a_bits) | alpha_arr
            table[(x1v << (n - w1)) + x2_arr, yv] = w_of_v[cb.bulk(idx)]
    return table


def breaker_x_table(shape: BreakerShape, suite: PrimitiveSuite, y: BitVec,
                    advice: AdviceString | BitVec, *,
                    prefix: str = "") -> np.ndarray:
    """adv_cb over every x at fixed (y, advice)."""
    a = advice.bits if isinstance(advice, AdviceString) else advice
    if y.width != shape.d or a.width != shape.a_bits:
        raise ValueError(f"widths ({y.width}, {a.width}), shape wants "
                         f"({shape.d}, {shape.a_bits})")
    raz = suite[prefix + "raz"]
    cond = suite[prefix + "cond"]
    w_rows = []
    for vv in range(1 << shape.w_ip):
        rows = adv_sr_cond(BitVec(shape.w_ip, vv), a, shape, suite, prefix=prefix)
        seeds = [part for row in rows.rows for part in cond.condense(row)]
        w_rows.append([raz.extract(y, seed).value for seed in seeds])
    w_of_v = np.asarray(w_rows, dtype=np.int64)
    y1 = y.prefix(shape.w_sl)
    v_of_x1 = np.asarray(
        [ip_extract(BitVec(shape.w_sl, xv), y1, shape.w_ip).value
         for xv in range(1 << shape.w_sl)], dtype=np.int64)
    xs = np.arange(1 << shape.d, dtype=np.int64)
    v_arr = v_of_x1[xs >> (shape.d - shape.w_sl)]
    acb = suite[prefix + "acb"].fn
    shift = shape.m_raz + shape.ctr_bits
    out = np.zeros(1 << shape.d, dtype=np.int64)
    for j in range(shape.total_rows):
        idx = (xs << shift) | (w_of_v[v_arr, j] << shape.ctr_bits) | j
        out ^= acb.bulk(idx)
    return out
