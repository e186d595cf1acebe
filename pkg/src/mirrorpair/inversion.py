"""Lagrange inversion, a Bell-polynomial exponential identity, and roundtrips.

Everything here works with honest finite data: Laurent polynomials with a
simple pole normalized to residue-variable coefficient 1, their compositional
inverses order by order, and the check that the proper potential's constant
terms recover the mirror exponent it was built from.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from random import Random

from .ifunctions import MirrorChange, composed_exponent
from .series import NovikovSeries, TruncationPolicy, XLaurentSeries


# ---------------------------------------------------------------------------
# Laurent polynomials as plain dicts {exponent: Fraction}


def _poly_mul(a: dict[int, Fraction], b: dict[int, Fraction]) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = ea + eb
            out[e] = out.get(e, Fraction(0)) + ca * cb
    return {e: c for e, c in out.items() if c}


@dataclass(frozen=True)
class SimplePoleLaurent:
    """f(x) = x^{-1} + f_0 + f_1 x + ... — the pole coefficient must be 1."""

    tail: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "tail", tuple(Fraction(v) for v in self.tail))

    @staticmethod
    def from_dict(d: dict[int, Fraction]) -> "SimplePoleLaurent":
        if d.get(-1) != 1:
            raise ValueError("simple-pole Laurent input must have x^{-1} coefficient 1")
        if any(e < -1 for e in d):
            raise ValueError("higher-order pole terms are not allowed")
        top = max((e for e in d if e >= 0), default=-1)
        return SimplePoleLaurent(tuple(d.get(e, Fraction(0)) for e in range(0, top + 1)))

    def as_dict(self) -> dict[int, Fraction]:
        out = {-1: Fraction(1)}
        for j, c in enumerate(self.tail):
            if c:
                out[j] = c
        return out


def lagrange_inverse(f: SimplePoleLaurent, order: int) -> dict[int, Fraction]:
    """Coefficients g_k of the compositional inverse g(ω) = Σ_{k≥1} g_k ω^{-k}.

    g_k = (1/k)·[f^k]_{x^{-1}}; the result satisfies f(g(ω)) = ω order by order.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    fd = f.as_dict()
    out: dict[int, Fraction] = {}
    power = {0: Fraction(1)}
    for k in range(1, order + 1):
        power = _poly_mul(power, fd)
        c = power.get(-1, Fraction(0))
        if c:
            out[k] = c / k
    return out


def compose(f: SimplePoleLaurent, g: dict[int, Fraction], order: int) -> dict[int, Fraction]:
    """f(g(ω)) expanded in ω^{-1}, keyed by the ω-exponent (so ω itself is {1: 1}).

    g's keys are k ≥ 1 meaning g_k ω^{-k}; the leading order must be strictly
    negative (some key with a nonzero value), making 1/g(ω) well defined as a
    series in ω^{-1}.  The expansion is reported through ω^{-order}.
    """
    ks = sorted(k for k, v in g.items() if v)
    if not ks:
        raise ValueError("composition needs a series with strictly negative leading order")
    if ks[0] < 1:
        raise ValueError("inverse series must live in negative ω-powers")
    lead = ks[0]
    m = order + 2 * lead  # internal u-order margin (u = ω^{-1})
    pol = TruncationPolicy.make(1, max_total=m)
    gu = NovikovSeries(pol, {(k,): Fraction(v) for k, v in g.items()})
    # 1/g = u^{-lead} · 1/(g/u^lead); g/u^lead has a nonzero constant term
    shifted = NovikovSeries(pol, {(k - lead,): Fraction(v) for k, v in g.items()})
    inv = shifted.reciprocal()
    out: dict[int, Fraction] = {}

    def add(uexp: int, c: Fraction):
        if c and uexp <= order:
            oexp = -uexp
            out[oexp] = out.get(oexp, Fraction(0)) + c
            if not out[oexp]:
                del out[oexp]

    for (k,), c in inv.terms.items():
        add(k - lead, c)
    power = NovikovSeries.one(pol)  # g^j as j walks the tail
    for j, fj in enumerate(f.tail):
        if j:
            power = power * gu
        if fj:
            for (k,), c in power.terms.items():
                add(k, c * fj)
    return out


def inversion_roundtrip(f: SimplePoleLaurent, order: int) -> tuple[bool, dict[int, Fraction]]:
    """compose(f, lagrange_inverse(f)) compared against ω through ω^{-order}.

    The 1/g part of the composition at output order k draws on g_{k+2}, so the
    inverse is computed two orders deeper than the comparison window.
    """
    g = lagrange_inverse(f, order + 2)
    h = compose(f, g, order)
    ok = h.get(1) == 1 and all(c == 0 for e, c in h.items() if e != 1)
    return ok, h


# ---------------------------------------------------------------------------
# the Bell-polynomial exponential identity


@dataclass(frozen=True)
class BellReport:
    order: int
    ok: bool
    mismatches: tuple[tuple[int, Fraction, Fraction], ...]


def bell_identity_check(tail: tuple[Fraction, ...], order: int) -> BellReport:
    """For f = 1 + Σ_{k≥1} f_k x^k check, through y^{order-1},

        exp( Σ_{k≥1} (1/k) [f^k]_{x^k} y^k )  ==  Σ_{k≥1} (1/k) [f^k]_{x^{k-1}} y^{k-1}.
    """
    fd = {0: Fraction(1)}
    for j, c in enumerate(tail, start=1):
        if c:
            fd[j] = Fraction(c)
    pol = TruncationPolicy.make(1, max_total=order)
    arg = {}
    rhs = {}
    power = {0: Fraction(1)}
    for k in range(1, order + 1):
        power = _poly_mul(power, fd)
        ck = power.get(k, Fraction(0))
        if ck:
            arg[(k,)] = ck / k
        dk = power.get(k - 1, Fraction(0))
        if dk:
            rhs[(k - 1,)] = rhs.get((k - 1,), Fraction(0)) + dk / k
    lhs = NovikovSeries(pol, arg).exp()
    rterm = NovikovSeries(pol, rhs)
    mismatches = []
    for n in range(0, order):
        a = lhs.coefficient((n,))
        b = rterm.coefficient((n,))
        if a != b:
            mismatches.append((n, a, b))
    return BellReport(order, not mismatches, tuple(mismatches))


# ---------------------------------------------------------------------------
# potential roundtrip: the constant terms of W-powers recover the exponent


@dataclass(frozen=True)
class RoundtripReport:
    m: int
    curve_order: int
    ok: bool
    computed: tuple[tuple[int, Fraction], ...]   # t-degree -> recovered value
    expected: tuple[tuple[int, Fraction], ...]
    mismatches: tuple[tuple[int, Fraction, Fraction], ...]


def potential_roundtrip(g_coeffs: dict[int, Fraction], m: int, order: int) -> RoundtripReport:
    """Build W from the exponent g and recover g from W's constant terms.

    g_coeffs are the coefficients g_k of g = Σ_{k≥1} g_k y^k; the change of
    variables is q = y·exp(m·g).  The potential W = x + Σ w_k t^{mk} x^{1-mk}
    (w from exp(g(y(q)))) must satisfy, for every K ≥ 1,

        (1/K) [W^K]_{x^0, t^K}  ==  g_{K/m}   (0 when m does not divide K),

    checked through curve order `order` (t-degree m·order).
    """
    if m < 1:
        raise ValueError("the potential roundtrip needs a positive contact multiplier")
    if any(k < 1 for k in g_coeffs):
        raise ValueError("exponent coefficients are indexed by curve degree k >= 1")
    pol = TruncationPolicy.make(1, max_total=order)
    g = NovikovSeries(pol, {(k,): Fraction(v) for k, v in g_coeffs.items()})
    change = MirrorChange((m,), g)
    S = composed_exponent(change).exp()

    t_top = m * order
    w = XLaurentSeries.monomial(t_top, 1, 0, 1)
    for (k,), c in S.terms.items():
        if k == 0:
            continue
        d = m * k
        if d <= t_top:
            w = w + XLaurentSeries.monomial(t_top, 1 - d, d, c)

    computed: dict[int, Fraction] = {}
    running = XLaurentSeries.monomial(t_top, 0, 0, 1)
    for K in range(1, t_top + 1):
        running = running * w
        x0 = running.x_coefficient(0)
        stray = {t for t, c in x0.items() if t != K and c}
        if stray:
            raise ValueError(
                f"constant term of W^{K} has support at t-degrees {sorted(stray)} != {K}"
            )
        v = x0.get(K, Fraction(0))
        if v:
            computed[K] = v / K

    expected: dict[int, Fraction] = {}
    for k, v in g_coeffs.items():
        if v and k <= order:
            expected[m * k] = Fraction(v)
    mismatches = []
    for K in range(1, t_top + 1):
        a = computed.get(K, Fraction(0))
        b = expected.get(K, Fraction(0))
        if a != b:
            mismatches.append((K, a, b))
    return RoundtripReport(
        m,
        order,
        not mismatches,
        tuple(sorted(computed.items())),
        tuple(sorted(expected.items())),
        tuple(mismatches),
    )


# ---------------------------------------------------------------------------
# randomized-input helpers shared by the identity sweeps


def random_simple_pole(rng: Random, tail_len: int = 6, bound: int = 9) -> SimplePoleLaurent:
    tail = tuple(Fraction(rng.randint(-bound, bound)) for _ in range(tail_len))
    return SimplePoleLaurent(tail)


def random_unit_tail(rng: Random, length: int = 6, bound: int = 9) -> tuple[Fraction, ...]:
    return tuple(Fraction(rng.randint(-bound, bound)) for _ in range(length))


def random_exponent(rng: Random, curve_order: int, bound: int = 6) -> dict[int, Fraction]:
    out = {}
    for k in range(1, curve_order + 1):
        num = rng.randint(-bound, bound)
        den = rng.randint(1, 3)
        if num:
            out[k] = Fraction(num, den)
    return out
