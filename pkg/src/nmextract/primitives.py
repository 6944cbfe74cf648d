"""Building-block extractors, bit sampler, linear codes, and certifiers.

Everything here is a total deterministic function of its declared inputs.
Certifiers report exact statistics (Fractions) and never round in the
pass/fail comparison.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable

from .bits import AffineSubspace, BitMatrix, BitVec
from .gf2 import SolutionSet, rank, solve_affine
from .moduli import gf_mul
from .rng import RandomStream, derive_key, prf_bits

__all__ = [
    "ip_extract",
    "toeplitz",
    "hash_seeded_extract",
    "iext_matrix",
    "iext",
    "iext_fiber",
    "sample_positions",
    "sample_bits",
    "LinearCode",
    "code_encode",
    "CodeCertReport",
    "code_certify",
    "AffineCertReport",
    "certify_affine_extractor",
    "MultiNMCertReport",
    "certify_multisource_nm",
]

EXHAUSTIVE_SUBSET_CAP = 10**6
INIT_CHECK_CAP = 10**4
RANDOM_CERT_TRIALS = 20_000
RANDOM_CERT_DEFECT_RATE = 1e-3


def ip_extract(x: BitVec, y: BitVec, m: int) -> BitVec:
    """Inner-product extractor: bit j is <x, y*t^j> in GF(2^n).

    Bit 0 is the plain dot product, so m = 1 is the standard inner product.
    Every nonzero combination of output bits is a full-rank bilinear form
    because t^j-multiplication is invertible.
    """
    n = x.width
    if y.width != n:
        raise ValueError(f"width mismatch {x.width} != {y.width}")
    if not 0 < m < n:
        raise ValueError(f"output length {m} out of range for width {n}")
    bits = []
    shifted = y.value
    for _ in range(m):
        bits.append((x.value & shifted).bit_count() & 1)
        shifted = gf_mul(shifted, 0b10, n)
    return BitVec.from_bits(bits)


def toeplitz(diag: BitVec, rows: int, cols: int) -> BitMatrix:
    """Toeplitz matrix from rows+cols-1 diagonal bits, entry (i,j) = diag[i+cols-1-j]."""
    if diag.width != rows + cols - 1:
        raise ValueError(f"need {rows + cols - 1} diagonal bits, got {diag.width}")
    out = []
    for i in range(rows):
        v = 0
        for j in range(cols):
            v = (v << 1) | diag[i + cols - 1 - j]
        out.append(v)
    return BitMatrix(rows, cols, tuple(out))


def hash_seeded_extract(x: BitVec, seed: BitVec, m: int) -> BitVec:
    """Toeplitz hashing: linear in x per seed, strong extractor with error 2^{-(k-m)/2}."""
    n = x.width
    if m > n:
        raise ValueError(f"output length {m} exceeds input width {n}")
    if seed.width != n + m - 1:
        raise ValueError(f"seed width {seed.width}, need {n + m - 1}")
    return toeplitz(seed, m, n).mul_vec(x)


def iext_matrix(seed: BitVec, n: int, m: int) -> BitMatrix:
    """Matrix [T_r | I_m] for the invertible extractor; rank m for every seed.

    The Toeplitz diagonal is expanded from the seed by a fixed keyed hash so
    short seeds are allowed; the identity tail forces surjectivity.
    """
    if not 0 < m <= n:
        raise ValueError(f"output length {m} out of range for width {n}")
    if m == n:
        return BitMatrix.identity(n)
    key = derive_key(b"iext", seed.to_text().encode(), f"{n}x{m}".encode())
    diag = BitVec(n - 1, prf_bits(key, b"diag", n - 1))
    t = toeplitz(diag, m, n - m)
    rows = tuple((t.data[i] << m) | (1 << (m - 1 - i)) for i in range(m))
    return BitMatrix(m, n, rows)


def iext(x: BitVec, seed: BitVec, m: int) -> BitVec:
    """Seeded linear surjection; every output has a fiber of exactly 2^{n-m} inputs."""
    return iext_matrix(seed, x.width, m).mul_vec(x)


def iext_fiber(seed: BitVec, s: BitVec, n: int) -> SolutionSet:
    """Exact pre-image system of iext(., seed) at output s."""
    sol = solve_affine(iext_matrix(seed, n, s.width), s)
    assert sol is not None  # [T | I] is surjective
    return sol


def sample_positions(width: int, key: BitVec, t: int) -> list[int]:
    """The t distinct ascending positions sample_bits would read for this key."""
    if t > width:
        raise ValueError(f"cannot sample {t} distinct positions from {width}")
    rnd = RandomStream(derive_key(b"sample-bits", key.to_text().encode(), str(width).encode()))
    return sorted(rnd.sample_distinct(width, t))


def sample_bits(source_string: BitVec, key: BitVec, t: int) -> tuple[list[int], BitVec]:
    """t distinct positions (ascending) determined by key and width, plus those bits."""
    positions = sample_positions(source_string.width, key, t)
    return positions, BitVec.from_bits(source_string[p] for p in positions)


@dataclass(frozen=True)
class LinearCode:
    """Generator matrix plus the declared distance and column-independence bound."""

    generator: BitMatrix
    distance: int
    dual_independence: int

    def __post_init__(self):
        if rank(self.generator) != self.generator.rows:
            raise ValueError("generator rows are dependent")
        if comb(self.generator.cols, self.dual_independence) <= INIT_CHECK_CAP:
            report = code_certify(self, self.dual_independence)
            if not report.passed:
                raise ValueError(
                    f"columns {report.witness} dependent, bound {self.dual_independence}"
                )

    @property
    def k(self) -> int:
        return self.generator.rows

    @property
    def block_length(self) -> int:
        return self.generator.cols

    @staticmethod
    def extended_hamming() -> "LinearCode":
        rows = [
            BitVec(8, 0b10000111),
            BitVec(8, 0b01001011),
            BitVec(8, 0b00101101),
            BitVec(8, 0b00011110),
        ]
        return LinearCode(BitMatrix.from_rows(rows), distance=4, dual_independence=3)

    @staticmethod
    def simplex(k: int) -> "LinearCode":
        """Columns are all nonzero k-bit patterns; every nonzero codeword has weight 2^{k-1}."""
        n = (1 << k) - 1
        rows = []
        for i in range(k):
            v = 0
            for p in range(1, n + 1):
                v = (v << 1) | ((p >> (k - 1 - i)) & 1)
            rows.append(v)
        return LinearCode(BitMatrix(k, n, tuple(rows)), distance=1 << (k - 1), dual_independence=2)


def code_encode(c: LinearCode, msg: BitVec) -> BitVec:
    if msg.width != c.k:
        raise ValueError(f"message width {msg.width}, code dimension {c.k}")
    v = 0
    for i in range(c.k):
        if msg[i]:
            v ^= c.generator.data[i]
    return BitVec(c.block_length, v)


@dataclass(frozen=True)
class CodeCertReport:
    passed: bool
    mode: str
    subsets_checked: int
    witness: tuple[int, ...] | None
    assumed_defect_rate: float | None
    miss_probability_bound: float | None


def _columns_independent(c: LinearCode, cols: tuple[int, ...]) -> bool:
    sub = BitMatrix.from_rows([c.generator.column(j) for j in cols])
    return rank(sub) == len(cols)


def code_certify(c: LinearCode, d: int) -> CodeCertReport:
    """Verify every set of up to d generator columns is independent.

    Checks size-d subsets only; smaller dependent sets extend to dependent
    d-sets.  Exhaustive when C(n', d) is small, else randomized with the
    reported miss bound under the assumed defect rate.
    """
    n = c.block_length
    if d > n:
        raise ValueError(f"subset size {d} exceeds block length {n}")
    total = comb(n, d)
    if total <= EXHAUSTIVE_SUBSET_CAP:
        checked = 0
        for cols in itertools.combinations(range(n), d):
            checked += 1
            if not _columns_independent(c, cols):
                return CodeCertReport(False, "exhaustive", checked, cols, None, None)
        return CodeCertReport(True, "exhaustive", checked, None, None, None)
    rnd = RandomStream(derive_key(b"code-certify", c.generator.to_text().encode(), str(d).encode()))
    for i in range(RANDOM_CERT_TRIALS):
        cols = tuple(sorted(rnd.sample_distinct(n, d)))
        if not _columns_independent(c, cols):
            return CodeCertReport(False, "randomized", i + 1, cols, None, None)
    miss = (1.0 - RANDOM_CERT_DEFECT_RATE) ** RANDOM_CERT_TRIALS
    return CodeCertReport(
        True, "randomized", RANDOM_CERT_TRIALS, None, RANDOM_CERT_DEFECT_RATE, miss
    )


def _sd_counts_uniform(counts: Counter, total: int, m: int) -> Fraction:
    sd = Fraction(0)
    u = Fraction(1, 1 << m)
    for w in range(1 << m):
        sd += abs(Fraction(counts.get(w, 0), total) - u)
    return sd / 2


@dataclass(frozen=True)
class AffineCertReport:
    passed: bool
    max_sd: Fraction
    threshold: Fraction
    trials: int
    dim: int
    witness: AffineSubspace | None
    mode: str = "sampled"


def _random_subspace(rnd: RandomStream, n: int, k: int) -> AffineSubspace:
    while True:
        m = BitMatrix(k, n, tuple(rnd.take_bits(n) for _ in range(k)))
        if rank(m) == k:
            return AffineSubspace(rnd.bitvec(n), m)


def certify_affine_extractor(
    f: Callable[[BitVec], BitVec],
    n: int,
    k: int,
    eps: Fraction,
    trials: int,
    rnd: RandomStream,
) -> AffineCertReport:
    """Sampled max of SD(f(X), uniform) over affine X of dimension k.

    Dimension-k subspaces dominate: a higher-dimensional source is a mixture
    of its dimension-k sub-cosets, so its SD never exceeds their max.
    """
    if k > 20:
        raise ValueError(f"dimension {k} too large to enumerate")
    m = f(BitVec.zeros(n)).width
    worst = Fraction(0)
    witness = None
    for _ in range(trials):
        sub = _random_subspace(rnd, n, k)
        counts = Counter(f(p).value for p in sub.enumerate())
        sd = _sd_counts_uniform(counts, 1 << k, m)
        if sd > worst:
            worst, witness = sd, sub
    return AffineCertReport(worst <= eps, worst, Fraction(eps), trials, k, witness)


@dataclass(frozen=True)
class MultiNMCertReport:
    passed: bool
    max_error: Fraction
    threshold: Fraction
    trials: int
    arity: int
    mode: str = "exact-per-trial"


def _fixed_point_free_table(rnd: RandomStream, n: int) -> list[int]:
    out = []
    for v in range(1 << n):
        w = rnd.below((1 << n) - 1)
        out.append(w + 1 if w >= v else w)
    return out


def _nm_error_from_joint(joint: Counter, total: int, m: int) -> Fraction:
    """SD of (W, W') from (uniform, W') given exact joint counts."""
    marginal: Counter = Counter()
    for (_, wp), c in joint.items():
        marginal[wp] += c
    sd = Fraction(0)
    shift = 1 << m
    for wp, cm in marginal.items():
        for w in range(shift):
            sd += abs(Fraction(joint.get((w, wp), 0), total) - Fraction(cm, total * shift))
    return sd / 2


def certify_multisource_nm(
    f: Callable[[tuple[BitVec, ...]], BitVec],
    arity: int,
    n: int,
    k: int,
    eps: Fraction,
    trials: int,
    rnd: RandomStream,
    support_cap_bits: int = 16,
) -> MultiNMCertReport:
    """Sampled max nm-error over flat k-sources and per-coordinate tamperings.

    Each trial draws one flat support per coordinate and one tampering per
    coordinate, with a designated coordinate forced fixed-point free (so the
    identity tampering is never emitted), then computes the error exactly.
    """
    if arity * k > support_cap_bits:
        raise ValueError(f"support needs {arity * k} bits, cap is {support_cap_bits}")
    if n > 14:
        raise ValueError(f"width {n} too large for full tampering tables")
    m = f(tuple(BitVec.zeros(n) for _ in range(arity))).width
    worst = Fraction(0)
    for _ in range(trials):
        supports = [
            [BitVec(n, v) for v in rnd.sample_distinct(1 << n, 1 << k)] for _ in range(arity)
        ]
        free_coord = rnd.below(arity)
        tables = [
            _fixed_point_free_table(rnd, n)
            if i == free_coord
            else [rnd.below(1 << n) for _ in range(1 << n)]
            for i in range(arity)
        ]
        joint: Counter = Counter()
        for combo in itertools.product(*(range(1 << k),) * arity):
            xs = tuple(supports[i][combo[i]] for i in range(arity))
            xs_t = tuple(BitVec(n, tables[i][xs[i].value]) for i in range(arity))
            joint[(f(xs).value, f(xs_t).value)] += 1
        err = _nm_error_from_joint(joint, 1 << (arity * k), m)
        worst = max(worst, err)
    return MultiNMCertReport(worst <= eps, worst, Fraction(eps), trials, arity)
