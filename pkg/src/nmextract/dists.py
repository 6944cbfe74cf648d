"""Exact distributions over bit vectors: distances, entropies, sources.

Probabilities are Fractions throughout; nothing here rounds.  Bulk integer-
count shortcuts live with the pipeline tables, not here.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import log2
from typing import Callable, Iterable

from .bits import AffineSubspace, BitVec, cat
from .rng import RandomStream

__all__ = [
    "Distribution",
    "statistical_distance",
    "LogValue",
    "min_entropy",
    "avg_cond_min_entropy",
    "distance_to_k_source",
    "flat_source",
    "affine_source",
    "sumset_source",
    "interleaved_source",
    "make_source",
]


@dataclass(frozen=True)
class Distribution:
    """Finite distribution over fixed-width bit vectors, exact probabilities."""

    width: int
    entries: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        total = Fraction(0)
        seen = set()
        for v, p in self.entries:
            if not 0 <= v < (1 << self.width):
                raise ValueError(f"value {v} out of range for width {self.width}")
            if v in seen:
                raise ValueError(f"duplicate support value {v}")
            if p <= 0:
                raise ValueError(f"non-positive probability at {v}")
            seen.add(v)
            total += p
        if total != 1:
            raise ValueError(f"probabilities sum to {total}")

    @staticmethod
    def from_probs(width: int, probs: dict[int, Fraction]) -> "Distribution":
        return Distribution(width, tuple(sorted((v, p) for v, p in probs.items() if p != 0)))

    @staticmethod
    def from_counts(width: int, counts: Counter | dict[int, int]) -> "Distribution":
        total = sum(counts.values())
        return Distribution.from_probs(
            width, {v: Fraction(c, total) for v, c in counts.items() if c}
        )

    @staticmethod
    def uniform(width: int) -> "Distribution":
        p = Fraction(1, 1 << width)
        return Distribution(width, tuple((v, p) for v in range(1 << width)))

    @staticmethod
    def point(v: BitVec) -> "Distribution":
        return Distribution(v.width, ((v.value, Fraction(1)),))

    def items(self) -> Iterable[tuple[BitVec, Fraction]]:
        for v, p in self.entries:
            yield BitVec(self.width, v), p

    def prob(self, v: BitVec) -> Fraction:
        if v.width != self.width:
            raise ValueError(f"width {v.width} != {self.width}")
        for val, p in self.entries:
            if val == v.value:
                return p
        return Fraction(0)

    def map(self, f: Callable[[BitVec], BitVec]) -> "Distribution":
        out: dict[int, Fraction] = {}
        width = None
        for v, p in self.items():
            w = f(v)
            width = w.width if width is None else width
            if w.width != width:
                raise ValueError("map produced mixed widths")
            out[w.value] = out.get(w.value, Fraction(0)) + p
        return Distribution.from_probs(width, out)

    def product(self, other: "Distribution") -> "Distribution":
        out: dict[int, Fraction] = {}
        for v, p in self.entries:
            for u, q in other.entries:
                out[(v << other.width) | u] = p * q
        return Distribution.from_probs(self.width + other.width, out)

    def marginal(self, lo: int, hi: int) -> "Distribution":
        return self.map(lambda v: v.take(lo, hi))


def statistical_distance(p: Distribution, q: Distribution) -> Fraction:
    """Exact variation distance (1/2) sum |p - q|."""
    if p.width != q.width:
        raise ValueError(f"width mismatch {p.width} != {q.width}")
    pd, qd = dict(p.entries), dict(q.entries)
    acc = Fraction(0)
    for v in pd.keys() | qd.keys():
        acc += abs(pd.get(v, Fraction(0)) - qd.get(v, Fraction(0)))
    return acc / 2


@dataclass(frozen=True)
class LogValue:
    """-log2 of an exact rational mass, kept alongside a float rendering."""

    mass: Fraction
    log2: float

    @staticmethod
    def of(mass: Fraction) -> "LogValue":
        return LogValue(mass, -log2(mass.numerator) + log2(mass.denominator))

    def exact_int(self) -> int | None:
        """The log as an integer when the mass is an exact power of two."""
        num, den = self.mass.numerator, self.mass.denominator
        if num == 1 and den & (den - 1) == 0:
            return den.bit_length() - 1
        if den == 1 and num & (num - 1) == 0:
            return -(num.bit_length() - 1)
        return None


def min_entropy(p: Distribution) -> LogValue:
    """-log2 max_x p(x), exact."""
    if not p.entries:
        raise ValueError("empty support")
    return LogValue.of(max(pr for _, pr in p.entries))


def avg_cond_min_entropy(joint: Distribution, cond_width: int) -> LogValue:
    """-log2 E_w[max_x p(x | w)] with w the trailing cond_width bits."""
    best: dict[int, Fraction] = {}
    for v, p in joint.entries:
        w = v & ((1 << cond_width) - 1)
        if p > best.get(w, Fraction(0)):
            best[w] = p
    return LogValue.of(sum(best.values(), Fraction(0)))


def distance_to_k_source(p: Distribution, k: int) -> Fraction:
    """Exact distance to the closest k-source: sum_s max(p(s) - 2^-k, 0)."""
    cap = Fraction(1, 1 << k)
    return sum((pr - cap for _, pr in p.entries if pr > cap), Fraction(0))


def flat_source(n: int, k: int, rnd: RandomStream | None = None, support: list[int] | None = None) -> Distribution:
    """Uniform on a 2^k-subset of {0,1}^n, chosen by rnd unless given."""
    if k > n:
        raise ValueError(f"entropy {k} exceeds width {n}")
    if support is None:
        if rnd is None:
            raise ValueError("need rnd or an explicit support")
        support = rnd.sample_distinct(1 << n, 1 << k)
    if len(set(support)) != 1 << k:
        raise ValueError(f"support must hold {1 << k} distinct values")
    p = Fraction(1, 1 << k)
    return Distribution(n, tuple(sorted((v, p) for v in support)))


def affine_source(sub: AffineSubspace) -> Distribution:
    p = Fraction(1, 1 << sub.dim)
    return Distribution(sub.ambient_width, tuple(sorted((v.value, p) for v in sub.enumerate())))


def sumset_source(p: Distribution, q: Distribution) -> Distribution:
    """Distribution of X1 xor X2 for independent X1, X2."""
    if p.width != q.width:
        raise ValueError(f"width mismatch {p.width} != {q.width}")
    out: dict[int, Fraction] = {}
    for v, pp in p.entries:
        for u, qq in q.entries:
            out[v ^ u] = out.get(v ^ u, Fraction(0)) + pp * qq
    return Distribution.from_probs(p.width, out)


def interleaved_source(p: Distribution, q: Distribution, perm: list[int]) -> Distribution:
    """Concatenation of X1, X2 with output bit j reading concat bit perm[j]."""
    n = p.width + q.width
    if sorted(perm) != list(range(n)):
        raise ValueError("perm must be a permutation of the concatenated positions")

    def shuffle(v: BitVec) -> BitVec:
        return BitVec.from_bits(v[perm[j]] for j in range(n))

    out: dict[int, Fraction] = {}
    for v, pp in p.entries:
        for u, qq in q.entries:
            w = shuffle(cat(BitVec(p.width, v), BitVec(q.width, u)))
            out[w.value] = out.get(w.value, Fraction(0)) + pp * qq
    return Distribution.from_probs(n, out)


def make_source(kind: str, **params) -> Distribution:
    makers = {
        "flat": flat_source,
        "affine": affine_source,
        "sumset": sumset_source,
        "interleaved": interleaved_source,
        "uniform": Distribution.uniform,
        "point": Distribution.point,
    }
    if kind not in makers:
        raise ValueError(f"unknown source kind {kind!r}")
    return makers[kind](**params)
