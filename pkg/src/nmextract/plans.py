"""Block layout plans for the composed extractors.

A plan fixes every block width, slice width, output width, and advice size
one construction uses, and names the primitive path filling each role.  Desk
flavor plans keep widths small enough for exact verification; paper flavor
plans keep the constant-fraction sizings and exist to document the
inequalities, so they validate but do not execute.

Validation is structural and runs at load time: a plan whose widths break an
algorithm step is rejected with the violated constraint named.  Sizing rules
that only bind at constant-fraction scale are checked in paper flavor alone.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from fractions import Fraction

from .rng import derive_key
from .suite import (
    AffineExtractor,
    CodeInstance,
    Condenser,
    CorrelationBreaker,
    MultiSourceNM,
    PrimitiveSuite,
    SeededExtractor,
    TwoSourceUneven,
)

__all__ = [
    "PlanError",
    "BreakerShape",
    "AffinePlan",
    "SplitPlan",
    "SeededPlan",
    "UnevenPlan",
    "BreakerPlan",
    "InstanceSpec",
    "get_plan",
    "plan_names",
    "plan_from_text",
    "plan_to_text",
    "suite_for_plan",
]


class PlanError(ValueError):
    pass


def _check(plan_name: str, constraints: list[tuple[str, bool, str]]) -> None:
    for name, ok, detail in constraints:
        if not ok:
            raise PlanError(f"plan {plan_name}: constraint {name} violated ({detail})")


def _ctr_bits(count: int) -> int:
    return max(1, (count - 1).bit_length())


@dataclass(frozen=True)
class BreakerShape:
    """Interior widths of the composed correlation breaker.

    Both inputs are d bits.  A w_sl slice of each side feeds the inner
    product, whose w_ip bits split into l_in blocks; each block joins the
    advice through the multi-source row, every row is condensed into d_rows
    candidate seeds, and each candidate drives one Raz-then-breaker round.
    """

    d: int
    w_sl: int
    w_ip: int
    l_in: int
    d_rows: int
    m_c: int
    m_raz: int
    m_cb: int
    a_bits: int

    @property
    def block_width(self) -> int:
        return self.w_ip // self.l_in

    @property
    def rows(self) -> int:
        return self.l_in + 1

    @property
    def total_rows(self) -> int:
        return self.rows * self.d_rows

    @property
    def ctr_bits(self) -> int:
        return _ctr_bits(self.total_rows)

    @property
    def t(self) -> int:
        return 2 * (self.total_rows - 1)

    def constraints(self) -> list[tuple[str, bool, str]]:
        return [
            ("slice_below_half", 2 * self.w_sl < self.d, f"2*{self.w_sl} >= {self.d}"),
            ("ip_within_slice", 0 < self.w_ip < self.w_sl, f"w_ip={self.w_ip} w_sl={self.w_sl}"),
            ("blocks_divide_ip", self.l_in >= 1 and self.w_ip % self.l_in == 0,
             f"l_in={self.l_in} w_ip={self.w_ip}"),
            ("condenser_rows", self.d_rows >= 1 and self.m_c >= 1,
             f"d_rows={self.d_rows} m_c={self.m_c}"),
            ("round_widths", self.m_raz >= 1 and self.m_cb >= 1,
             f"m_raz={self.m_raz} m_cb={self.m_cb}"),
        ]


@dataclass(frozen=True)
class InstanceSpec:
    """One suite slot a plan requires: role, constructor params, cert params."""

    name: str
    role: str
    params: dict
    cert: dict | None


def _code_spec(name: str, family: str, k: int, n_prime: int) -> InstanceSpec:
    params = {"family": family, "k": k}
    if family == "random":
        params["n_prime"] = n_prime
    return InstanceSpec(name, "code", params, {"d": 2})


@dataclass(frozen=True)
class AffinePlan:
    """Layout for the affine-source construction.

    x splits as x0 | x1 | b middle blocks | x13 | x14 | x_hat.  The two short
    prefixes key advice sampling from the encoded tail, middle blocks feed
    per-row extraction, x13 carries the per-row breaker, x14 is hashed with
    the merged row output.
    """

    name: str
    flavor: str
    n: int
    w0: int
    b: int
    w_block: int
    w13: int
    w14: int
    w_hat: int
    wz: int
    wv: int
    s_samp: int
    s_r: int
    m: int
    code_family: str
    code_len: int
    codec: bool
    advice_cover: bool
    eps_claim: Fraction
    kind = "affine"

    @property
    def w2(self) -> int:
        return self.b * self.w_block + self.w13 + self.w14 + self.w_hat

    @property
    def rows(self) -> int:
        return self.b + 1

    @property
    def ctr_bits(self) -> int:
        return _ctr_bits(self.rows)

    @property
    def t(self) -> int:
        return 2 * self.b

    @property
    def alpha_bits(self) -> int:
        return 2 * self.w0 + 2 * self.s_samp

    @property
    def code_k(self) -> int:
        return self.w2

    @property
    def code_n(self) -> int:
        return self.code_len if self.code_len else (1 << self.code_k) - 1

    @property
    def executable(self) -> bool:
        return self.flavor == "desk"

    def __post_init__(self):
        base = [
            ("width_sum", 2 * self.w0 + self.w2 == self.n,
             f"2*{self.w0}+{self.w2} != {self.n}"),
            ("positive_blocks",
             min(self.w0, self.w_block, self.w13, self.w14) >= 1 and self.b >= 1
             and self.w_hat >= 0,
             "a required block is empty"),
            ("key_within_prefix", 1 <= self.wz <= self.w0, f"wz={self.wz} w0={self.w0}"),
            ("row_within_block", 1 <= self.wv <= self.w_block,
             f"wv={self.wv} w_block={self.w_block}"),
            ("sample_count", 1 <= self.s_samp <= self.code_n,
             f"s_samp={self.s_samp} outside code length"),
            ("hash_output", 10 * self.m <= 3 * self.s_r, f"10*{self.m} > 3*{self.s_r}"),
            ("output_fits", 1 <= self.m <= self.w14, f"m={self.m} w14={self.w14}"),
            ("cover_needs_full_tail",
             (not self.advice_cover) or self.s_samp >= self.w2,
             f"s_samp={self.s_samp} w2={self.w2}"),
            ("codec_tail_room", (not self.codec) or self.w_hat >= 2 * self.s_samp,
             f"w_hat={self.w_hat} 2s={2 * self.s_samp}"),
        ]
        if self.flavor == "paper":
            n = self.n
            base += [
                ("prefix_sizing", 4 * self.w0 * 1000 <= n * 8, f"w0={self.w0}"),
                ("ten_middle_blocks", self.b == 10, f"b={self.b}"),
                ("mid_vs_breaker_block", self.w13 == 30 * self.w_block,
                 f"w13={self.w13} w_block={self.w_block}"),
                ("hash_block_sizing", self.w14 == 100 * self.w_block,
                 f"w14={self.w14} w_block={self.w_block}"),
                ("tail_majority", 3 * self.w_hat >= 2 * n, f"w_hat={self.w_hat} n={n}"),
                ("sample_budget", 2 * self.s_samp * self.n <= 2 * self.w0 * self.n,
                 f"s={self.s_samp} w0={self.w0}"),
                ("advice_degree", self.t == 20, f"t={self.t}"),
            ]
        _check(self.name, base)

    def instance_specs(self) -> list[InstanceSpec]:
        if not self.executable:
            return []
        czext_ncert = min(self.w_block + self.alpha_bits, 10 if self.b == 1 else 1)
        czext_k = max(1, min(8, 16 // self.rows if self.rows <= 16 else 1, czext_ncert))
        return [
            InstanceSpec("aext_z", "affine", {"n": self.w0, "m": self.wz, "kind": "perm"},
                         {"k": self.w0, "eps": Fraction(1, 100), "trials": 5}),
            InstanceSpec("aext_mid", "affine",
                         {"n": self.w_block, "m": self.wv, "kind": "perm"},
                         {"k": self.w_block, "eps": Fraction(1, 100), "trials": 5}),
            InstanceSpec("czext", "multi_nm",
                         {"arity": self.b, "block_bits": self.w_block + self.alpha_bits,
                          "m": self.wv},
                         {"n_cert": czext_ncert, "k": czext_k, "eps": Fraction(1, 4),
                          "trials": 20}),
            InstanceSpec("acb", "corr_breaker",
                         {"x_bits": self.w13, "y_bits": self.wv,
                          "advice_bits": self.ctr_bits, "m": self.s_r, "t": self.t},
                         {"k_x": min(self.w13, 3), "k_y": min(self.wv, 2),
                          "eps": Fraction(1, 4), "trials": 20}),
            _code_spec("code", self.code_family, self.code_k, self.code_len),
        ]


@dataclass(frozen=True)
class SplitPlan:
    """Layout for the two-source split-state construction.

    Each side splits as x1 | x3 | x4 | x5.  The x1 slices key advice sampling
    from both encoded tails, (x3, y3) feed the correlation breaker under the
    advice, y4 is hashed with the breaker output.
    """

    name: str
    flavor: str
    n: int
    w1: int
    w3: int
    w4: int
    w5: int
    m_z: int
    s_samp: int
    d_v: int
    m: int
    cb_path: str
    code_family: str
    code_len: int
    codec: bool
    advice_cover: bool
    eps_claim: Fraction
    breaker: BreakerShape | None = None
    kind = "split"

    @property
    def w2(self) -> int:
        return self.w3 + self.w4 + self.w5

    @property
    def alpha_bits(self) -> int:
        return 2 * self.w1 + 2 * self.s_samp

    @property
    def code_k(self) -> int:
        return self.w2

    @property
    def code_n(self) -> int:
        return self.code_len if self.code_len else (1 << self.code_k) - 1

    @property
    def executable(self) -> bool:
        return self.flavor == "desk"

    def __post_init__(self):
        base = [
            ("width_sum", self.w1 + self.w2 == self.n, f"{self.w1}+{self.w2} != {self.n}"),
            ("positive_blocks", min(self.w1, self.w3, self.w4) >= 1 and self.w5 >= 0,
             "a required block is empty"),
            ("key_within_slice", 1 <= self.m_z <= self.w1, f"m_z={self.m_z} w1={self.w1}"),
            ("sample_count", 1 <= self.s_samp <= self.code_n,
             f"s_samp={self.s_samp} outside code length"),
            ("hash_output", 10 * self.m <= 3 * self.d_v, f"10*{self.m} > 3*{self.d_v}"),
            ("output_fits", 1 <= self.m <= self.w4, f"m={self.m} w4={self.w4}"),
            ("breaker_path", self.cb_path in ("table", "composed"), self.cb_path),
            ("cover_needs_full_tail",
             (not self.advice_cover) or self.s_samp >= self.w2,
             f"s_samp={self.s_samp} w2={self.w2}"),
            ("codec_tail_room", (not self.codec) or self.w5 >= self.s_samp,
             f"w5={self.w5} s={self.s_samp}"),
        ]
        if self.cb_path == "composed":
            base.append(("breaker_shape", self.breaker is not None, "missing shape"))
            if self.breaker is not None:
                base += [(f"breaker.{n}", ok, d) for n, ok, d in self.breaker.constraints()]
                base += [
                    ("breaker_input", self.breaker.d == self.w3,
                     f"d={self.breaker.d} w3={self.w3}"),
                    ("breaker_advice", self.breaker.a_bits == self.alpha_bits,
                     f"a={self.breaker.a_bits} alpha={self.alpha_bits}"),
                    ("breaker_output", self.breaker.m_cb == self.d_v,
                     f"m_cb={self.breaker.m_cb} d_v={self.d_v}"),
                ]
        else:
            base.append(("no_stray_shape", self.breaker is None, "shape on table path"))
        if self.flavor == "paper":
            base += [
                ("big_block_sizing", self.w4 == 30 * self.w3, f"w4={self.w4} w3={self.w3}"),
                ("tail_majority", 2 * self.w5 >= self.n, f"w5={self.w5} n={self.n}"),
                ("hash_below_half_breaker", 2 * self.m < self.w3,
                 f"m={self.m} w3={self.w3}"),
                ("sample_budget", self.s_samp <= self.w1, f"s={self.s_samp} w1={self.w1}"),
            ]
        _check(self.name, base)

    def instance_specs(self) -> list[InstanceSpec]:
        if not self.executable:
            return []
        specs: list[InstanceSpec] = []
        if self.cb_path == "table":
            specs.append(
                InstanceSpec("cb", "corr_breaker",
                             {"x_bits": self.w3, "y_bits": self.w3,
                              "advice_bits": self.alpha_bits, "m": self.d_v, "t": 2},
                             {"k_x": min(self.w3, 2), "k_y": min(self.w3, 2),
                              "eps": Fraction(1, 4), "trials": 20}),
            )
        else:
            sh = self.breaker
            specs += [
                InstanceSpec("nml", "multi_nm",
                             {"arity": sh.l_in,
                              "block_bits": sh.block_width + sh.a_bits,
                              "m": sh.block_width},
                             {"n_cert": min(8, sh.block_width + sh.a_bits),
                              "k": min(6, 16 // sh.l_in), "eps": Fraction(1, 4),
                              "trials": 15}),
                InstanceSpec("cond", "condenser",
                             {"in_bits": sh.block_width, "d_rows": sh.d_rows,
                              "row_bits": sh.m_c},
                             {"k": min(sh.block_width, 3), "k_prime": 1,
                              "eps": Fraction(1, 8), "trials": 2}),
                InstanceSpec("raz", "two_source",
                             {"n1": sh.d, "n2": sh.m_c, "m": sh.m_raz, "path": "table"},
                             {"k1": min(sh.d, 6), "k2": min(sh.m_c, 2),
                              "eps": Fraction(1, 4), "trials": 20}),
                InstanceSpec("acb", "corr_breaker",
                             {"x_bits": sh.d, "y_bits": sh.m_raz,
                              "advice_bits": sh.ctr_bits, "m": sh.m_cb, "t": sh.t},
                             {"k_x": min(sh.d, 6), "k_y": min(sh.m_raz, 2),
                              "eps": Fraction(3, 5), "trials": 20}),
            ]
        specs.append(_code_spec("code", self.code_family, self.code_k, self.code_len))
        return specs


@dataclass(frozen=True)
class SeededPlan:
    """Layout for the seeded construction with tampered seeds.

    The seed y contributes slices y[0:d1] and y[0:d4]; the source x feeds
    every hashing step.  Advice is the Z slice plus bits sampled from the
    encoded seed, and the final two hashes fold the breaker output back
    through both inputs.
    """

    name: str
    flavor: str
    n_x: int
    n_y: int
    d1: int
    s_z: int
    d2: int
    s_y: int
    d3: int
    d4: int
    d5: int
    m_v1: int
    m: int
    t: int
    eps_claim: Fraction
    kind = "seeded"

    @property
    def alpha_bits(self) -> int:
        return self.d2 + self.s_y

    @property
    def executable(self) -> bool:
        return self.flavor == "desk"

    @property
    def code_n(self) -> int:
        return (1 << self.n_y) - 1

    def __post_init__(self):
        _check(self.name, [
            ("seed_slice_one", 1 <= self.d1 <= self.n_y, f"d1={self.d1} n_y={self.n_y}"),
            ("seed_slice_two", self.d1 <= self.d4 <= self.n_y,
             f"d4={self.d4} d1={self.d1} n_y={self.n_y}"),
            ("z_slices", 1 <= self.d2 <= self.d3 <= self.s_z,
             f"d2={self.d2} d3={self.d3} s_z={self.s_z}"),
            ("sample_count", 1 <= self.s_y <= self.code_n,
             f"s_y={self.s_y} code_n={self.code_n}"),
            ("fold_width", self.m_v1 >= 1, f"m_v1={self.m_v1}"),
            ("output_fits", 1 <= self.m <= self.n_x, f"m={self.m} n_x={self.n_x}"),
            ("degree", self.t >= 1, f"t={self.t}"),
        ])

    def instance_specs(self) -> list[InstanceSpec]:
        if not self.executable:
            return []
        return [
            InstanceSpec("ext_z", "seeded",
                         {"n": self.n_x, "m": self.s_z, "seed_bits": self.d1},
                         {"k": 6, "eps": Fraction(3, 10), "trials": 15}),
            InstanceSpec("raz", "two_source",
                         {"n1": self.d3, "n2": self.d4, "m": self.d2, "path": "table"},
                         {"k1": min(self.d3, 3), "k2": min(self.d4, 3),
                          "eps": Fraction(2, 5), "trials": 20}),
            InstanceSpec("ext_wx", "seeded",
                         {"n": self.n_x, "m": self.d5, "seed_bits": self.d2},
                         {"k": 6, "eps": Fraction(1, 4), "trials": 15}),
            InstanceSpec("ext_wy", "seeded",
                         {"n": self.n_y, "m": self.d5, "seed_bits": self.d2},
                         {"k": 3, "eps": Fraction(1, 2), "trials": 15}),
            InstanceSpec("cb", "corr_breaker",
                         {"x_bits": self.d5, "y_bits": self.d5,
                          "advice_bits": self.alpha_bits, "m": self.m_v1, "t": self.t},
                         {"k_x": min(self.d5, 3), "k_y": min(self.d5, 3),
                          "eps": Fraction(1, 2), "trials": 20}),
            InstanceSpec("ext_v2", "seeded",
                         {"n": self.n_y, "m": self.d1, "seed_bits": self.m_v1},
                         {"k": 3, "eps": Fraction(1, 2), "trials": 15}),
            InstanceSpec("ext_out", "seeded",
                         {"n": self.n_x, "m": self.m, "seed_bits": self.d1},
                         {"k": 4, "eps": Fraction(1, 4), "trials": 15}),
            _code_spec("code", "simplex", self.n_y, 0),
        ]


@dataclass(frozen=True)
class UnevenPlan:
    """Layout for the uneven two-source construction.

    The longer source x is condensed through its first-third slice into
    candidate rows; each row seeds an extraction chain ending in one run of
    the inner split-state plan, and the per-row outputs are folded by XOR.
    """

    name: str
    flavor: str
    n_x: int
    n_y: int
    w_x1: int
    d_rows: int
    m_c: int
    m_v: int
    w_seed: int
    m_t: int
    w_tilde: int
    m_h: int
    s_u: int
    m_r: int
    m_out: int
    inner_name: str
    eps_claim: Fraction
    kind = "uneven"

    @property
    def alpha_bits(self) -> int:
        return 2 * self.s_u + 2 * self.w_tilde

    @property
    def ctr_bits(self) -> int:
        return _ctr_bits(self.d_rows)

    @property
    def t(self) -> int:
        return 2 * (self.d_rows - 1)

    @property
    def executable(self) -> bool:
        return self.flavor == "desk"

    def __post_init__(self):
        _check(self.name, [
            ("uneven_order", self.n_x > self.n_y, f"n_x={self.n_x} n_y={self.n_y}"),
            ("third_slice", 3 * self.w_x1 == self.n_x, f"w_x1={self.w_x1} n_x={self.n_x}"),
            ("condenser_rows", self.d_rows >= 1 and self.m_c >= 1,
             f"d_rows={self.d_rows} m_c={self.m_c}"),
            ("row_seed_slices",
             1 <= self.w_seed <= self.m_v and 1 <= self.w_tilde <= min(self.m_v, self.m_t),
             f"w_seed={self.w_seed} w_tilde={self.w_tilde} m_v={self.m_v} m_t={self.m_t}"),
            ("ip_output", 1 <= self.m_h <= self.w_tilde,
             f"m_h={self.m_h} w_tilde={self.w_tilde}"),
            ("matched_row_widths", self.m_v == self.m_t, f"m_v={self.m_v} m_t={self.m_t}"),
            ("sample_count", self.s_u >= 1, f"s_u={self.s_u}"),
            ("fold_output", 1 <= self.m_out, f"m_out={self.m_out}"),
        ])

    def check_inner(self, inner: SplitPlan) -> None:
        _check(self.name, [
            ("inner_width", inner.n == self.m_v + self.alpha_bits,
             f"inner n={inner.n} needs {self.m_v + self.alpha_bits}"),
            ("inner_output", inner.m == self.m_r, f"inner m={inner.m} m_r={self.m_r}"),
        ])

    def instance_specs(self) -> list[InstanceSpec]:
        if not self.executable:
            return []
        return [
            InstanceSpec("cond", "condenser",
                         {"in_bits": self.w_x1, "d_rows": self.d_rows,
                          "row_bits": self.m_c},
                         {"k": min(self.w_x1, 3), "k_prime": 2, "eps": Fraction(1, 4),
                          "trials": 10}),
            InstanceSpec("raz_v", "two_source",
                         {"n1": self.n_y, "n2": self.m_c, "m": self.m_v, "path": "table"},
                         {"k1": min(self.n_y, 5), "k2": min(self.m_c, 4),
                          "eps": Fraction(2, 5), "trials": 15}),
            InstanceSpec("ext_t", "seeded",
                         {"n": self.n_x, "m": self.m_t, "seed_bits": self.w_seed},
                         {"k": 6, "eps": Fraction(1, 3), "trials": 15}),
            InstanceSpec("acb_row", "corr_breaker",
                         {"x_bits": self.n_y, "y_bits": self.m_r,
                          "advice_bits": self.ctr_bits, "m": self.m_out, "t": self.t},
                         {"k_x": min(self.n_y, 5), "k_y": min(self.m_r, 2),
                          "eps": Fraction(1, 8), "trials": 20}),
            _code_spec("code_x", "simplex", self.n_x, 0),
            _code_spec("code_y", "simplex", self.n_y, 0),
        ]


@dataclass(frozen=True)
class BreakerPlan:
    """Standalone shape for exercising the composed correlation breaker.

    When n_x exceeds the breaker width d, the general entry point condenses
    x to d bits with a hash seeded by the first w_slice bits of y, so y is
    d + w_slice bits wide.  At n_x == d the slice is empty and the general
    entry point coincides with the breaker itself.
    """

    name: str
    flavor: str
    shape: BreakerShape
    n_x: int
    eps_claim: Fraction
    w_slice: int = 0
    kind = "breaker"

    @property
    def executable(self) -> bool:
        return self.flavor == "desk"

    @property
    def d_general(self) -> int:
        return self.shape.d + self.w_slice

    def __post_init__(self):
        base = [(f"breaker.{n}", ok, d) for n, ok, d in self.shape.constraints()]
        base.append(("general_source_width", self.n_x >= self.shape.d,
                     f"n_x={self.n_x} d={self.shape.d}"))
        base.append(("slice_iff_reduction",
                     (self.w_slice == 0) == (self.n_x == self.shape.d),
                     f"n_x={self.n_x} d={self.shape.d} w_slice={self.w_slice}"))
        base.append(("slice_small", 0 <= self.w_slice <= self.shape.d,
                     f"w_slice={self.w_slice} d={self.shape.d}"))
        _check(self.name, base)

    def instance_specs(self) -> list[InstanceSpec]:
        if not self.executable:
            return []
        sh = self.shape
        return [
            InstanceSpec("nml", "multi_nm",
                         {"arity": sh.l_in, "block_bits": sh.block_width + sh.a_bits,
                          "m": sh.block_width},
                         {"n_cert": min(8, sh.block_width + sh.a_bits),
                          "k": min(5, 16 // sh.l_in), "eps": Fraction(1, 4),
                          "trials": 15}),
            InstanceSpec("cond", "condenser",
                         {"in_bits": sh.block_width, "d_rows": sh.d_rows,
                          "row_bits": sh.m_c},
                         {"k": min(sh.block_width, 3), "k_prime": 1,
                          "eps": Fraction(1, 8), "trials": 2}),
            InstanceSpec("raz", "two_source",
                         {"n1": sh.d, "n2": sh.m_c, "m": sh.m_raz, "path": "table"},
                         {"k1": min(sh.d, 6), "k2": min(sh.m_c, 2),
                          "eps": Fraction(1, 4), "trials": 20}),
            InstanceSpec("acb", "corr_breaker",
                         {"x_bits": sh.d, "y_bits": sh.m_raz,
                          "advice_bits": sh.ctr_bits, "m": sh.m_cb, "t": sh.t},
                         {"k_x": min(sh.d, 8), "k_y": min(sh.m_raz, 1),
                          "eps": Fraction(1, 4), "trials": 20}),
        ]


Plan = AffinePlan | SplitPlan | SeededPlan | UnevenPlan | BreakerPlan


# ---------------------------------------------------------------------------
# Registry.


def _build_registry() -> dict[str, Plan]:
    plans: list[Plan] = [
        AffinePlan(
            name="affine_tiny", flavor="desk", n=10, w0=1, b=1, w_block=2,
            w13=1, w14=4, w_hat=1, wz=1, wv=2, s_samp=8, s_r=4, m=1,
            code_family="simplex", code_len=0, codec=False, advice_cover=True,
            eps_claim=Fraction(1, 4),
        ),
        AffinePlan(
            name="affine_fiber", flavor="desk", n=12, w0=1, b=1, w_block=2,
            w13=1, w14=4, w_hat=3, wz=1, wv=2, s_samp=1, s_r=4, m=1,
            code_family="simplex", code_len=0, codec=True, advice_cover=False,
            eps_claim=Fraction(1, 2),
        ),
        AffinePlan(
            name="affine_desk", flavor="desk", n=40, w0=2, b=10, w_block=2,
            w13=2, w14=7, w_hat=7, wz=2, wv=2, s_samp=3, s_r=7, m=2,
            code_family="random", code_len=101, codec=True, advice_cover=False,
            eps_claim=Fraction(1, 2),
        ),
        AffinePlan(
            name="affine_paper", flavor="paper", n=2_000_000, w0=2000, b=10,
            w_block=2000, w13=60000, w14=200000, w_hat=1_716_000, wz=500, wv=500,
            s_samp=500, s_r=1000, m=100, code_family="simplex", code_len=0,
            codec=True, advice_cover=False, eps_claim=Fraction(1, 100),
        ),
        SplitPlan(
            name="split_tiny", flavor="desk", n=8, w1=2, w3=2, w4=4, w5=0,
            m_z=1, s_samp=6, d_v=4, m=1, cb_path="table", code_family="simplex",
            code_len=0, codec=False, advice_cover=True, eps_claim=Fraction(1, 4),
        ),
        SplitPlan(
            name="split_micro", flavor="desk", n=10, w1=2, w3=2, w4=3, w5=3,
            m_z=1, s_samp=2, d_v=4, m=1, cb_path="table", code_family="simplex",
            code_len=0, codec=True, advice_cover=False, eps_claim=Fraction(1, 2),
        ),
        SplitPlan(
            name="split_small_m2", flavor="desk", n=14, w1=4, w3=2, w4=7, w5=1,
            m_z=2, s_samp=2, d_v=7, m=2, cb_path="table", code_family="simplex",
            code_len=0, codec=False, advice_cover=False, eps_claim=Fraction(3, 10),
        ),
        SplitPlan(
            name="split_desk", flavor="desk", n=24, w1=4, w3=12, w4=4, w5=4,
            m_z=2, s_samp=3, d_v=4, m=1, cb_path="composed",
            code_family="random", code_len=60, codec=True, advice_cover=False,
            eps_claim=Fraction(1, 2),
            breaker=BreakerShape(d=12, w_sl=5, w_ip=2, l_in=2, d_rows=2, m_c=2,
                                 m_raz=2, m_cb=4, a_bits=14),
        ),
        SplitPlan(
            name="split_paper", flavor="paper", n=100_000, w1=1000, w3=100,
            w4=3000, w5=95_900, m_z=10, s_samp=100, d_v=10, m=3,
            cb_path="composed", code_family="simplex", code_len=0, codec=True,
            advice_cover=False, eps_claim=Fraction(1, 100),
            breaker=BreakerShape(d=100, w_sl=35, w_ip=10, l_in=10, d_rows=2,
                                 m_c=1, m_raz=1, m_cb=10, a_bits=2200),
        ),
        SeededPlan(
            name="seeded_tiny", flavor="desk", n_x=8, n_y=4, d1=3, s_z=4, d2=2,
            s_y=5, d3=3, d4=4, d5=3, m_v1=3, m=1, t=1, eps_claim=Fraction(1, 4),
        ),
        UnevenPlan(
            name="uneven_tiny", flavor="desk", n_x=12, n_y=8, w_x1=4, d_rows=2,
            m_c=4, m_v=4, w_seed=2, m_t=4, w_tilde=3, m_h=1, s_u=2, m_r=2,
            m_out=1, inner_name="split_small_m2", eps_claim=Fraction(3, 10),
        ),
        BreakerPlan(
            name="breaker_demo", flavor="desk",
            shape=BreakerShape(d=16, w_sl=5, w_ip=2, l_in=2, d_rows=2, m_c=2,
                               m_raz=1, m_cb=3, a_bits=4),
            n_x=16, eps_claim=Fraction(1, 4),
        ),
        BreakerPlan(
            name="breaker_general", flavor="desk",
            shape=BreakerShape(d=12, w_sl=5, w_ip=2, l_in=2, d_rows=2, m_c=2,
                               m_raz=1, m_cb=3, a_bits=4),
            n_x=24, w_slice=4, eps_claim=Fraction(1, 4),
        ),
    ]
    registry = {p.name: p for p in plans}
    for p in plans:
        if isinstance(p, UnevenPlan):
            inner = registry.get(p.inner_name)
            if not isinstance(inner, SplitPlan):
                raise PlanError(f"plan {p.name}: inner plan {p.inner_name!r} missing")
            p.check_inner(inner)
    return registry


_REGISTRY = _build_registry()


def get_plan(name: str) -> Plan:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise PlanError(f"unknown plan {name!r}") from None


def plan_names() -> list[str]:
    return sorted(_REGISTRY)


# ---------------------------------------------------------------------------
# Text serialization.

_KINDS: dict[str, type] = {
    "affine": AffinePlan,
    "split": SplitPlan,
    "seeded": SeededPlan,
    "uneven": UnevenPlan,
    "breaker": BreakerPlan,
}


def _field_to_text(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return str(value)


def plan_to_text(plan: Plan) -> str:
    lines = [f"plan {plan.name}", f"kind = {plan.kind}"]
    for f in fields(plan):
        if f.name == "name":
            continue
        value = getattr(plan, f.name)
        if value is None:
            continue
        if isinstance(value, BreakerShape):
            for sf in fields(value):
                lines.append(f"breaker.{sf.name} = {_field_to_text(getattr(value, sf.name))}")
        else:
            lines.append(f"{f.name} = {_field_to_text(value)}")
    return "\n".join(lines) + "\n"


def _coerce(raw: str, target_type) -> object:
    if target_type is bool:
        if raw not in ("true", "false"):
            raise PlanError(f"bad boolean {raw!r}")
        return raw == "true"
    if target_type is Fraction:
        return Fraction(raw)
    if target_type is int:
        return int(raw)
    return raw


def plan_from_text(text: str) -> Plan:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("plan "):
        raise PlanError("plan text must start with a 'plan <name>' line")
    name = lines[0].split(None, 1)[1]
    kv: dict[str, str] = {}
    shape_kv: dict[str, str] = {}
    for ln in lines[1:]:
        if "=" not in ln:
            raise PlanError(f"bad plan line: {ln!r}")
        key, value = (part.strip() for part in ln.split("=", 1))
        if key.startswith("breaker."):
            shape_kv[key.removeprefix("breaker.")] = value
        else:
            kv[key] = value
    kind = kv.pop("kind", None)
    if kind not in _KINDS:
        raise PlanError(f"unknown plan kind {kind!r}")
    cls = _KINDS[kind]
    types = {f.name: f.type for f in fields(cls)}
    args: dict[str, object] = {"name": name}
    for key, value in kv.items():
        if key not in types:
            raise PlanError(f"plan {name}: unknown field {key!r}")
        base = {"int": int, "str": str, "bool": bool, "Fraction": Fraction}.get(
            types[key].split(" ")[0], str
        )
        args[key] = _coerce(value, base)
    if shape_kv:
        args["breaker"] = BreakerShape(**{k: int(v) for k, v in shape_kv.items()})
    if cls is BreakerPlan:
        args["shape"] = args.pop("breaker")
    return cls(**args)


# ---------------------------------------------------------------------------
# Suite construction.


def _make_instance(spec: InstanceSpec, key: bytes):
    p = spec.params
    if spec.role == "seeded":
        return SeededExtractor(spec.name, key, p["n"], p["m"], p["seed_bits"])
    if spec.role == "affine":
        return AffineExtractor(spec.name, key, p["n"], p["m"], p["kind"])
    if spec.role == "multi_nm":
        return MultiSourceNM(spec.name, key, p["arity"], p["block_bits"], p["m"])
    if spec.role == "two_source":
        return TwoSourceUneven(spec.name, key, p["n1"], p["n2"], p["m"], p["path"])
    if spec.role == "condenser":
        return Condenser(spec.name, key, p["in_bits"], p["d_rows"], p["row_bits"])
    if spec.role == "corr_breaker":
        return CorrelationBreaker(
            spec.name, key, p["x_bits"], p["y_bits"], p["advice_bits"], p["m"], p["t"]
        )
    if spec.role == "code":
        return CodeInstance(
            spec.name, p["family"], p["k"], n_prime=p.get("n_prime", 0), key=key
        )
    raise PlanError(f"unknown role {spec.role!r}")


def all_instance_specs(plan: Plan) -> list[InstanceSpec]:
    """The plan's own slots plus, for uneven plans, the inner plan's slots."""
    specs = list(plan.instance_specs())
    if isinstance(plan, UnevenPlan):
        inner = get_plan(plan.inner_name)
        for spec in all_instance_specs(inner):
            specs.append(InstanceSpec("inner." + spec.name, spec.role, spec.params, spec.cert))
    return specs


def suite_for_plan(plan: Plan, master: bytes, salts: dict[str, int] | None = None) -> PrimitiveSuite:
    if not plan.executable:
        raise PlanError(f"plan {plan.name} is {plan.flavor} flavor and does not execute")
    salts = salts or {}
    suite = PrimitiveSuite(plan.name, master)
    for spec in all_instance_specs(plan):
        salt = salts.get(spec.name, 0)
        inst = _make_instance(spec, suite.key_for(spec.name, salt))
        suite.add(inst, salt=salt, cert=spec.cert)
    return suite
