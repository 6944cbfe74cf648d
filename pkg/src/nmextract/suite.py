"""Keyed instances of the building-block roles the compositions consume.

A suite binds each role a block construction uses (seeded extractor, affine
extractor, multi-source non-malleable extractor, uneven two-source extractor,
somewhere condenser, correlation breaker with advice, sampling code) to a
concrete keyed function plus a declared contract.  Roles with no desk-scale
construction are keyed random tables; each table is certified against the
defining property of its role, and the certification records are cached on
the suite so re-validation is free.

Instance keys are derived from the suite master key, the instance name, and
an integer salt, so an artifact search can resample one instance without
disturbing the others.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Callable

from .bits import BitVec, BitMatrix, cat
from .checkers import check_adv_cb, check_sw_condenser_rows, nm_error
from .dists import Distribution, flat_source, statistical_distance
from .gf2 import rank
from .primitives import (
    LinearCode,
    certify_affine_extractor,
    certify_multisource_nm,
    toeplitz,
)
from .rng import RandomStream, derive_key, prf_bits, prf_stream_bytes

__all__ = [
    "TABLE_CAP_BITS",
    "KeyedFunction",
    "SeededExtractor",
    "AffineExtractor",
    "MultiSourceNM",
    "TwoSourceUneven",
    "Condenser",
    "CorrelationBreaker",
    "CodeInstance",
    "CertRecord",
    "PrimitiveSuite",
    "certify_seeded",
    "certify_condenser",
    "certify_correlation_breaker",
    "certify_two_source_strong",
]

# Materialized lookup tables are capped; larger domains evaluate per point.
TABLE_CAP_BITS = 20


def _instance_key(master: bytes, name: str, salt: int) -> bytes:
    return derive_key(master, "instance", name, str(salt))


@dataclass(frozen=True)
class KeyedFunction:
    """Total keyed function {0,1}^in_bits -> {0,1}^out_bits.

    ``table`` mode materializes every entry from one SHAKE stream with
    byte-aligned entries; ``hashed`` mode evaluates per point.  The two modes
    are distinct functions even for equal keys, so the mode is part of the
    instance identity and is serialized.
    """

    key: bytes
    in_bits: int
    out_bits: int
    mode: str = "table"

    def __post_init__(self):
        if self.in_bits < 1 or self.out_bits < 1:
            raise ValueError(f"degenerate function shape {self.in_bits}->{self.out_bits}")
        if self.mode not in ("table", "hashed"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "table" and self.in_bits > TABLE_CAP_BITS:
            raise ValueError(f"table over {self.in_bits} bits exceeds cap {TABLE_CAP_BITS}")

    @staticmethod
    def auto(key: bytes, in_bits: int, out_bits: int) -> "KeyedFunction":
        mode = "table" if in_bits <= TABLE_CAP_BITS else "hashed"
        return KeyedFunction(key, in_bits, out_bits, mode)

    @cached_property
    def _table(self) -> list[int]:
        entry_bytes = (self.out_bits + 7) // 8
        shift = 8 * entry_bytes - self.out_bits
        raw = prf_stream_bytes(self.key, b"table", entry_bytes << self.in_bits)
        return [
            int.from_bytes(raw[i * entry_bytes : (i + 1) * entry_bytes], "big") >> shift
            for i in range(1 << self.in_bits)
        ]

    def value_at(self, index: int) -> int:
        if self.mode == "table":
            return self._table[index]
        nbytes = (self.in_bits + 7) // 8
        return prf_bits(self.key, index.to_bytes(nbytes, "big"), self.out_bits)

    @cached_property
    def _array(self):
        import numpy as np

        return np.asarray(self._table, dtype=np.int64)

    def bulk(self, indices):
        """value_at over an integer array; table mode only."""
        if self.mode != "table":
            raise ValueError("bulk evaluation needs a materialized table")
        return self._array[indices]

    def __call__(self, x: BitVec) -> BitVec:
        if x.width != self.in_bits:
            raise ValueError(f"input width {x.width}, declared {self.in_bits}")
        return BitVec(self.out_bits, self.value_at(x.value))


@dataclass(frozen=True)
class SeededExtractor:
    """Toeplitz hashing with the diagonal expanded from a short seed.

    Linear in x for every fixed seed.  When seed_bits == n + m - 1 the seed
    is the diagonal itself and the leftover-hash guarantee applies directly;
    shorter seeds index a keyed family of Toeplitz maps whose strongness is
    certified empirically.
    """

    name: str
    key: bytes
    n: int
    m: int
    seed_bits: int
    role = "seeded"

    def __post_init__(self):
        if not 0 < self.m <= self.n:
            raise ValueError(f"output {self.m} out of range for width {self.n}")
        if self.seed_bits < 1:
            raise ValueError("seed must have at least one bit")

    @property
    def exact(self) -> bool:
        return self.seed_bits == self.n + self.m - 1

    def matrix_for(self, seed: BitVec) -> BitMatrix:
        if seed.width != self.seed_bits:
            raise ValueError(f"seed width {seed.width}, declared {self.seed_bits}")
        if self.exact:
            diag = seed
        else:
            bits = prf_bits(self.key, b"diag/" + seed.to_text().encode(), self.n + self.m - 1)
            diag = BitVec(self.n + self.m - 1, bits)
        return toeplitz(diag, self.m, self.n)

    def extract(self, x: BitVec, seed: BitVec) -> BitVec:
        if x.width != self.n:
            raise ValueError(f"input width {x.width}, declared {self.n}")
        return self.matrix_for(seed).mul_vec(x)

    def params(self) -> dict:
        return {"n": self.n, "m": self.m, "seed_bits": self.seed_bits}


@dataclass(frozen=True)
class AffineExtractor:
    """Affine-extractor role: keyed table, or keyed permutation when n == m.

    A permutation is exact for full-dimension affine sources (every output
    hit once), which is what desk plans with block entropy = block width need.
    """

    name: str
    key: bytes
    n: int
    m: int
    kind: str = "perm"
    role = "affine"

    def __post_init__(self):
        if self.kind not in ("perm", "table"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "perm" and self.n != self.m:
            raise ValueError("permutation kind needs n == m")
        if self.m > self.n:
            raise ValueError(f"output {self.m} longer than input {self.n}")
        if self.n > TABLE_CAP_BITS:
            raise ValueError(f"domain {self.n} exceeds table cap")

    @cached_property
    def _table(self) -> list[int]:
        if self.kind == "table":
            return KeyedFunction(self.key, self.n, self.m)._table
        rnd = RandomStream(self.key)
        size = 1 << self.n
        perm = list(range(size))
        for i in range(size - 1):
            j = i + rnd.below(size - i)
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    def extract(self, x: BitVec) -> BitVec:
        if x.width != self.n:
            raise ValueError(f"input width {x.width}, declared {self.n}")
        return BitVec(self.m, self._table[x.value])

    def params(self) -> dict:
        return {"n": self.n, "m": self.m, "kind": self.kind}


@dataclass(frozen=True)
class MultiSourceNM:
    """Multi-source non-malleable extractor role over equal-width blocks."""

    name: str
    key: bytes
    arity: int
    block_bits: int
    m: int
    role = "multi_nm"

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be at least 1")

    @cached_property
    def fn(self) -> KeyedFunction:
        return KeyedFunction.auto(self.key, self.arity * self.block_bits, self.m)

    def extract(self, blocks: tuple[BitVec, ...]) -> BitVec:
        if len(blocks) != self.arity:
            raise ValueError(f"got {len(blocks)} blocks, declared {self.arity}")
        for b in blocks:
            if b.width != self.block_bits:
                raise ValueError(f"block width {b.width}, declared {self.block_bits}")
        return self.fn(cat(*blocks))

    def params(self) -> dict:
        return {"arity": self.arity, "block_bits": self.block_bits, "m": self.m}


@dataclass(frozen=True)
class TwoSourceUneven:
    """Two-source extractor over possibly uneven widths.

    ``table`` path is the keyed reference; ``ip`` path is the inner-product
    extractor and is only valid for equal widths with m < n1.
    """

    name: str
    key: bytes
    n1: int
    n2: int
    m: int
    path: str = "table"
    role = "two_source"

    def __post_init__(self):
        if self.path not in ("table", "ip"):
            raise ValueError(f"unknown path {self.path!r}")
        if self.path == "ip" and self.n1 != self.n2:
            raise ValueError("ip path needs equal widths")

    @cached_property
    def fn(self) -> KeyedFunction:
        return KeyedFunction.auto(self.key, self.n1 + self.n2, self.m)

    def extract(self, x: BitVec, y: BitVec) -> BitVec:
        if x.width != self.n1 or y.width != self.n2:
            raise ValueError(
                f"widths ({x.width},{y.width}), declared ({self.n1},{self.n2})"
            )
        if self.path == "ip":
            from .primitives import ip_extract

            return ip_extract(x, y, self.m)
        return self.fn(cat(x, y))

    def params(self) -> dict:
        return {"n1": self.n1, "n2": self.n2, "m": self.m, "path": self.path}


@dataclass(frozen=True)
class Condenser:
    """Somewhere-condenser role: one input, a few rows, one row should be good."""

    name: str
    key: bytes
    in_bits: int
    d_rows: int
    row_bits: int
    role = "condenser"

    def __post_init__(self):
        if self.d_rows < 1:
            raise ValueError("need at least one row")

    @cached_property
    def fn(self) -> KeyedFunction:
        return KeyedFunction.auto(self.key, self.in_bits, self.d_rows * self.row_bits)

    def condense(self, x: BitVec) -> tuple[BitVec, ...]:
        out = self.fn(x)
        w = self.row_bits
        return tuple(out.take(i * w, (i + 1) * w) for i in range(self.d_rows))

    def params(self) -> dict:
        return {"in_bits": self.in_bits, "d_rows": self.d_rows, "row_bits": self.row_bits}


@dataclass(frozen=True)
class CorrelationBreaker:
    """Correlation breaker with advice: (x, y, advice) -> m bits.

    The declared degree t says how many tampered executions the certificate
    speaks for; it is carried for plan bookkeeping.
    """

    name: str
    key: bytes
    x_bits: int
    y_bits: int
    advice_bits: int
    m: int
    t: int = 1
    role = "corr_breaker"

    @cached_property
    def fn(self) -> KeyedFunction:
        return KeyedFunction.auto(self.key, self.x_bits + self.y_bits + self.advice_bits, self.m)

    def break_correlation(self, x: BitVec, y: BitVec, advice: BitVec) -> BitVec:
        if x.width != self.x_bits or y.width != self.y_bits or advice.width != self.advice_bits:
            raise ValueError(
                f"widths ({x.width},{y.width},{advice.width}), declared "
                f"({self.x_bits},{self.y_bits},{self.advice_bits})"
            )
        return self.fn(cat(x, y, advice))

    def params(self) -> dict:
        return {
            "x_bits": self.x_bits,
            "y_bits": self.y_bits,
            "advice_bits": self.advice_bits,
            "m": self.m,
            "t": self.t,
        }


@dataclass(frozen=True)
class CodeInstance:
    """Linear code role for the slice-encode-sample advice generators.

    The ``random`` family keeps block length polynomial in k where the
    simplex construction would be exponential; its distance declaration is
    the trivial lower bound and the useful structure (column independence,
    sampled-column rank) is certified separately.
    """

    name: str
    family: str
    k: int
    key: bytes = b""
    n_prime: int = 0
    role = "code"

    def __post_init__(self):
        if self.family == "random" and self.n_prime < self.k:
            raise ValueError(f"random code length {self.n_prime} below dimension {self.k}")

    @cached_property
    def code(self) -> LinearCode:
        if self.family == "simplex":
            return LinearCode.simplex(self.k)
        if self.family == "extended_hamming":
            if self.k != 4:
                raise ValueError("extended Hamming fixes k = 4")
            return LinearCode.extended_hamming()
        if self.family == "random":
            raw = prf_stream_bytes(self.key, b"code", self.k * ((self.n_prime + 7) // 8))
            step = (self.n_prime + 7) // 8
            shift = 8 * step - self.n_prime
            rows = tuple(
                int.from_bytes(raw[i * step : (i + 1) * step], "big") >> shift
                for i in range(self.k)
            )
            return LinearCode(
                BitMatrix(self.k, self.n_prime, rows), distance=1, dual_independence=2
            )
        raise ValueError(f"unknown code family {self.family!r}")

    @property
    def block_length(self) -> int:
        return self.code.block_length

    def positions_for(self, key: BitVec, t: int) -> list[int]:
        from .primitives import sample_positions

        return sample_positions(self.block_length, key, t)

    def sampled_matrix(self, positions: list[int]) -> BitMatrix:
        """Rows are the generator columns at the positions, so M @ msg = sampled bits."""
        return BitMatrix.from_rows([self.code.generator.column(p) for p in positions])

    def sampled_bits(self, msg: BitVec, key: BitVec, t: int) -> BitVec:
        """The t encoded bits sample_bits would read, without materializing the word."""
        return self.sampled_matrix(self.positions_for(key, t)).mul_vec(msg)

    def params(self) -> dict:
        out = {"family": self.family, "k": self.k}
        if self.family == "random":
            out["n_prime"] = self.n_prime
        return out


Instance = (
    SeededExtractor
    | AffineExtractor
    | MultiSourceNM
    | TwoSourceUneven
    | Condenser
    | CorrelationBreaker
    | CodeInstance
)

_ROLE_TYPES: dict[str, type] = {
    "seeded": SeededExtractor,
    "affine": AffineExtractor,
    "multi_nm": MultiSourceNM,
    "two_source": TwoSourceUneven,
    "condenser": Condenser,
    "corr_breaker": CorrelationBreaker,
    "code": CodeInstance,
}


# ---------------------------------------------------------------------------
# Certifiers for the roles primitives.py does not already cover.


@dataclass(frozen=True)
class CertRecord:
    instance: str
    role: str
    passed: bool
    mode: str
    max_err: Fraction | None
    threshold: Fraction | None
    detail: str = ""

    def to_line(self) -> str:
        err = "-" if self.max_err is None else str(self.max_err)
        thr = "-" if self.threshold is None else str(self.threshold)
        verdict = "pass" if self.passed else "FAIL"
        out = f"cert {self.instance} role={self.role} {verdict} mode={self.mode} max={err} eps={thr}"
        if self.detail:
            out += f" detail={self.detail}"
        return out


def certify_seeded(
    inst: SeededExtractor, k: int, eps: Fraction, trials: int, rnd: RandomStream
) -> CertRecord:
    """Average-over-seeds SD from uniform on sampled flat k-sources, exact."""
    if k + inst.seed_bits > 22:
        raise ValueError(f"{k} source bits x {inst.seed_bits} seed bits too large")
    seeds = [BitVec(inst.seed_bits, v) for v in range(1 << inst.seed_bits)]
    mats = [inst.matrix_for(s) for s in seeds]
    worst = Fraction(0)
    for _ in range(trials):
        support = [BitVec(inst.n, v) for v in rnd.sample_distinct(1 << inst.n, 1 << k)]
        avg = Fraction(0)
        for mat in mats:
            counts: dict[int, int] = {}
            for x in support:
                w = mat.mul_vec(x).value
                counts[w] = counts.get(w, 0) + 1
            dist = Distribution.from_counts(inst.m, counts)
            avg += statistical_distance(dist, Distribution.uniform(inst.m))
        worst = max(worst, avg / len(seeds))
    return CertRecord(
        inst.name,
        inst.role,
        worst <= eps,
        "exact-avg-over-seeds",
        worst,
        eps,
        f"k={k},trials={trials}",
    )


def certify_condenser(
    inst: Condenser,
    k: int,
    k_prime: int,
    eps: Fraction,
    trials: int,
    rnd: RandomStream,
) -> CertRecord:
    """Some row within eps of a k'-source, for sampled flat k-sources."""
    worst = Fraction(0)
    ok = True
    for _ in range(trials):
        src = flat_source(inst.in_bits, k, rnd)
        rows = src.map(lambda x: cat(*inst.condense(x)))
        report = check_sw_condenser_rows(rows, inst.d_rows, inst.row_bits, k_prime, eps)
        best = min(report.row_distances)
        worst = max(worst, best)
        ok = ok and report.passed
    return CertRecord(
        inst.name,
        inst.role,
        ok,
        "sampled-flat-exact",
        worst,
        eps,
        f"k={k},k_prime={k_prime},trials={trials}",
    )


def certify_correlation_breaker(
    inst: CorrelationBreaker,
    k_x: int,
    k_y: int,
    eps: Fraction,
    trials: int,
    rnd: RandomStream,
    collision_eps: Fraction = Fraction(1, 4),
) -> CertRecord:
    """Sampled flat (X, Y) with tampered Y' and distinct advice, exact per trial.

    Desk widths put a hard floor of 1 - 2^{k_x - m} under the distance to
    uniform, so the distance component is judged as excess over that floor.
    A separate advice-collision component, P[out(a) = out(a')] near 2^-m,
    rejects tables that ignore the advice, which the floor cannot see.
    """
    floor = max(Fraction(0), 1 - Fraction(1 << k_x, 1 << inst.m))
    full_domain = inst.x_bits + inst.y_bits <= 14
    worst = Fraction(0)
    worst_coll = Fraction(0)
    for _ in range(trials):
        src_x = flat_source(inst.x_bits, k_x, rnd)
        y_support = [BitVec(inst.y_bits, v) for v in rnd.sample_distinct(1 << inst.y_bits, 1 << k_y)]
        table = [rnd.below(1 << inst.y_bits) for _ in range(1 << inst.y_bits)]
        pairs = Distribution.from_probs(
            2 * inst.y_bits,
            {
                cat(y, BitVec(inst.y_bits, table[y.value])).value: Fraction(1, len(y_support))
                for y in y_support
            },
        )
        joint = src_x.product(pairs)
        a = rnd.bitvec(inst.advice_bits)
        while True:
            ap = rnd.bitvec(inst.advice_bits)
            if ap != a:
                break
        err = check_adv_cb(
            inst.break_correlation,
            joint,
            (inst.x_bits, inst.y_bits, inst.y_bits),
            (a, ap),
        )
        worst = max(worst, err)
        if full_domain:
            domain = [
                (BitVec(inst.x_bits, xv), BitVec(inst.y_bits, yv))
                for xv in range(1 << inst.x_bits)
                for yv in range(1 << inst.y_bits)
            ]
        else:
            domain = [
                (BitVec(inst.x_bits, x.value), y)
                for x, _ in src_x.items()
                for y in y_support
            ]
        hits = sum(
            1 for x, y in domain
            if inst.break_correlation(x, y, a) == inst.break_correlation(x, y, ap)
        )
        worst_coll = max(worst_coll, Fraction(hits, len(domain)))
    coll_bound = Fraction(1, 1 << inst.m) + collision_eps
    passed = worst <= floor + eps and worst_coll <= coll_bound
    return CertRecord(
        inst.name,
        inst.role,
        passed,
        "sampled-flat-exact",
        worst,
        floor + eps,
        f"k_x={k_x},k_y={k_y},trials={trials},floor={floor},coll={worst_coll}",
    )


def certify_two_source_strong(
    inst: TwoSourceUneven,
    k1: int,
    k2: int,
    eps: Fraction,
    trials: int,
    rnd: RandomStream,
) -> CertRecord:
    """Exact SD((W, Y), (U, Y)) over sampled flat source pairs."""
    worst = Fraction(0)
    for _ in range(trials):
        xs = [BitVec(inst.n1, v) for v in rnd.sample_distinct(1 << inst.n1, 1 << k1)]
        ys = [BitVec(inst.n2, v) for v in rnd.sample_distinct(1 << inst.n2, 1 << k2)]
        rows = [
            (inst.extract(x, y).value, y.value, Fraction(1, len(xs) * len(ys)))
            for x in xs
            for y in ys
        ]
        worst = max(worst, nm_error(rows, inst.m))
    return CertRecord(
        inst.name,
        inst.role,
        worst <= eps,
        "sampled-flat-exact",
        worst,
        eps,
        f"k1={k1},k2={k2},trials={trials}",
    )


def _certify_multi_nm(inst: MultiSourceNM, spec: dict, rnd: RandomStream) -> CertRecord:
    """Certify the deployed table, restricting block domains when too wide.

    The restriction zero-pads each block's low-order cert bits into the full
    block width, so the checked function is the instance itself on an
    embedded subcube.
    """
    n_cert = min(inst.block_bits, spec.get("n_cert", inst.block_bits))
    k = spec["k"]
    eps = Fraction(spec["eps"])
    trials = spec["trials"]

    def restricted(blocks: tuple[BitVec, ...]) -> BitVec:
        padded = tuple(BitVec(inst.block_bits, b.value) for b in blocks)
        return inst.extract(padded)

    rep = certify_multisource_nm(restricted, inst.arity, n_cert, k, eps, trials, rnd)
    mode = "exact-per-trial" if n_cert == inst.block_bits else f"restricted-n={n_cert}"
    return CertRecord(
        inst.name, inst.role, rep.passed, mode, rep.max_error, rep.threshold,
        f"arity={inst.arity},k={k},trials={trials}",
    )


def _certify_affine(inst: AffineExtractor, spec: dict, rnd: RandomStream) -> CertRecord:
    rep = certify_affine_extractor(
        inst.extract, inst.n, spec["k"], Fraction(spec["eps"]), spec["trials"], rnd
    )
    return CertRecord(
        inst.name, inst.role, rep.passed, f"sampled-dim-{spec['k']}", rep.max_sd,
        rep.threshold, f"trials={spec['trials']}",
    )


def _certify_code(inst: CodeInstance, spec: dict, rnd: RandomStream) -> CertRecord:
    from .primitives import code_certify

    rep = code_certify(inst.code, spec["d"])
    return CertRecord(
        inst.name, inst.role, rep.passed, rep.mode, None, None,
        f"d={spec['d']},subsets={rep.subsets_checked}",
    )


# ---------------------------------------------------------------------------
# The suite container.


def _fmt_val(v) -> str:
    return v if isinstance(v, str) else str(v)


@dataclass
class PrimitiveSuite:
    """Named role instances plus their certification plan and cached records.

    ``cert_specs`` maps instance name to the parameters its role certifier
    needs; ``certify`` runs every spec with a stream derived from the master
    key so records are reproducible byte for byte.
    """

    name: str
    master: bytes
    instances: dict[str, Instance] = field(default_factory=dict)
    salts: dict[str, int] = field(default_factory=dict)
    cert_specs: dict[str, dict] = field(default_factory=dict)
    cert_records: list[CertRecord] = field(default_factory=list)

    def add(self, inst: Instance, salt: int = 0, cert: dict | None = None) -> None:
        if inst.name in self.instances:
            raise ValueError(f"duplicate instance {inst.name!r}")
        self.instances[inst.name] = inst
        self.salts[inst.name] = salt
        if cert is not None:
            self.cert_specs[inst.name] = cert

    def __getitem__(self, name: str) -> Instance:
        try:
            return self.instances[name]
        except KeyError:
            raise KeyError(f"suite {self.name!r} has no instance {name!r}") from None

    def key_for(self, name: str, salt: int) -> bytes:
        return _instance_key(self.master, name, salt)

    def certify(self) -> list[CertRecord]:
        records = []
        for name, spec in sorted(self.cert_specs.items()):
            inst = self.instances[name]
            rnd = RandomStream(derive_key(self.master, "cert", name))
            if inst.role == "seeded":
                rec = certify_seeded(inst, spec["k"], Fraction(spec["eps"]), spec["trials"], rnd)
            elif inst.role == "affine":
                rec = _certify_affine(inst, spec, rnd)
            elif inst.role == "multi_nm":
                rec = _certify_multi_nm(inst, spec, rnd)
            elif inst.role == "two_source":
                rec = certify_two_source_strong(
                    inst, spec["k1"], spec["k2"], Fraction(spec["eps"]), spec["trials"], rnd
                )
            elif inst.role == "condenser":
                rec = certify_condenser(
                    inst, spec["k"], spec["k_prime"], Fraction(spec["eps"]), spec["trials"], rnd
                )
            elif inst.role == "corr_breaker":
                rec = certify_correlation_breaker(
                    inst, spec["k_x"], spec["k_y"], Fraction(spec["eps"]), spec["trials"], rnd
                )
            elif inst.role == "code":
                rec = _certify_code(inst, spec, rnd)
            else:
                raise ValueError(f"no certifier for role {inst.role!r}")
            records.append(rec)
        self.cert_records = records
        return records

    @property
    def certified(self) -> bool:
        return bool(self.cert_records) and all(r.passed for r in self.cert_records)

    # -- serialization ------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"suite {self.name}", f"master = {self.master.hex()}"]
        for name in sorted(self.instances):
            inst = self.instances[name]
            parts = [f"instance {name} role={inst.role} salt={self.salts.get(name, 0)}"]
            parts += [f"{k}={_fmt_val(v)}" for k, v in inst.params().items()]
            lines.append(" ".join(parts))
        for name in sorted(self.cert_specs):
            spec = self.cert_specs[name]
            kv = " ".join(f"{k}={_fmt_val(v)}" for k, v in sorted(spec.items()))
            lines.append(f"certspec {name} {kv}")
        for rec in self.cert_records:
            lines.append(rec.to_line())
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "PrimitiveSuite":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("suite "):
            raise ValueError("suite text must start with a 'suite <name>' line")
        suite = None
        master = None
        name = lines[0].split(None, 1)[1]
        records: list[CertRecord] = []
        for ln in lines[1:]:
            if ln.startswith("master = "):
                master = bytes.fromhex(ln.split("=", 1)[1].strip())
                suite = PrimitiveSuite(name, master)
            elif ln.startswith("instance "):
                if suite is None:
                    raise ValueError("instance line before master line")
                head, *kvs = ln.split()
                inst_name = kvs[0]
                fields = dict(kv.split("=", 1) for kv in kvs[1:])
                role = fields.pop("role")
                salt = int(fields.pop("salt"))
                suite.add(
                    _build_instance(role, inst_name, suite.key_for(inst_name, salt), fields),
                    salt=salt,
                )
            elif ln.startswith("certspec "):
                if suite is None:
                    raise ValueError("certspec line before master line")
                _, inst_name, *kvs = ln.split()
                spec = {}
                for kv in kvs:
                    k, v = kv.split("=", 1)
                    spec[k] = _parse_spec_val(v)
                suite.cert_specs[inst_name] = spec
            elif ln.startswith("cert "):
                records.append(_parse_cert_line(ln))
            else:
                raise ValueError(f"unrecognized suite line: {ln!r}")
        if suite is None:
            raise ValueError("suite text has no master line")
        suite.cert_records = records
        return suite


def _parse_spec_val(v: str):
    if "/" in v:
        return Fraction(v)
    try:
        return int(v)
    except ValueError:
        return v


def _parse_cert_line(ln: str) -> CertRecord:
    parts = ln.split()
    inst_name = parts[1]
    fields = dict(p.split("=", 1) for p in parts[2:] if "=" in p)
    passed = parts[3] == "pass"
    max_err = None if fields["max"] == "-" else Fraction(fields["max"])
    thr = None if fields["eps"] == "-" else Fraction(fields["eps"])
    return CertRecord(
        inst_name, fields["role"], passed, fields["mode"], max_err, thr,
        fields.get("detail", ""),
    )


def _build_instance(role: str, name: str, key: bytes, fields: dict[str, str]) -> Instance:
    if role == "seeded":
        return SeededExtractor(
            name, key, int(fields["n"]), int(fields["m"]), int(fields["seed_bits"])
        )
    if role == "affine":
        return AffineExtractor(name, key, int(fields["n"]), int(fields["m"]), fields["kind"])
    if role == "multi_nm":
        return MultiSourceNM(
            name, key, int(fields["arity"]), int(fields["block_bits"]), int(fields["m"])
        )
    if role == "two_source":
        return TwoSourceUneven(
            name, key, int(fields["n1"]), int(fields["n2"]), int(fields["m"]), fields["path"]
        )
    if role == "condenser":
        return Condenser(
            name, key, int(fields["in_bits"]), int(fields["d_rows"]), int(fields["row_bits"])
        )
    if role == "corr_breaker":
        return CorrelationBreaker(
            name,
            key,
            int(fields["x_bits"]),
            int(fields["y_bits"]),
            int(fields["advice_bits"]),
            int(fields["m"]),
            int(fields["t"]),
        )
    if role == "code":
        return CodeInstance(
            name, fields["family"], int(fields["k"]), key, int(fields.get("n_prime", "0"))
        )
    raise ValueError(f"unknown role {role!r}")
