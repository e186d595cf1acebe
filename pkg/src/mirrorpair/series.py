"""Truncated exact formal series: Novikov variables, z-Laurent windows, x-Laurent tails.

Three series shapes drive the computations:

* `NovikovSeries` — polynomial truncations of power series in finitely many
  Novikov variables with `Fraction` coefficients, truncated by a weighted total
  degree.  Carries ring operations plus exp/log/reciprocal and the per-variable
  Euler operator.

* `ZLaurentElement` — finite z-Laurent data with coefficients in a graded
  algebra, used for the hypergeometric factors.  Validity is tracked through a
  *window*: a pair (lo, hi) meaning "coefficients above hi are mathematically
  zero, those in [lo, hi] are stored exactly, and nothing is claimed below lo".
  A window of ``None`` marks a finite Laurent *polynomial*, exact everywhere
  (all the factors in the geometric templates are of that kind, so windows
  mostly matter as a safety net — but the net is load-bearing: extracting a
  coefficient outside a window raises instead of returning 0).

* `XLaurentSeries` — Laurent series in the potential variable x whose
  coefficients are single-variable polynomials in t; exponents in x are exact
  integers of either sign, t is truncated at a stated order.

The window arithmetic: if f is valid on [lo_f, hi_f] and g on [lo_g, hi_g],
their product is valid on [max(lo_f + hi_g, lo_g + hi_f), hi_f + hi_g].  (The
coefficient at k needs f_j for j down to k - hi_g, etc.)  An exact factor with
top support s shifts a window [lo, hi] to [lo + s, hi + s].
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .algebra import AlgebraError, Element, GradedAlgebra, nilpotency_index, rat


class WindowError(ValueError):
    """A coefficient was requested outside a series' validity window."""


class TruncationError(ValueError):
    """A computation needs a higher truncation order than configured."""


@dataclass(frozen=True)
class TruncationPolicy:
    """Weighted total-degree truncation for Novikov exponents plus a z-window."""

    weights: tuple[int, ...]
    max_total: int
    z_window: tuple[int, int]

    @staticmethod
    def make(
        nvars: int,
        max_total: int = 8,
        weights: tuple[int, ...] | None = None,
        z_window: tuple[int, int] | None = None,
    ) -> "TruncationPolicy":
        if weights is None:
            weights = (1,) * nvars
        if len(weights) != nvars:
            raise ValueError("weights/arity mismatch")
        if any(w <= 0 for w in weights):
            raise ValueError("truncation weights must be positive")
        if max_total < 0:
            raise ValueError("truncation order must be nonnegative")
        if z_window is None:
            z_window = (-(max_total + 3), 1)
        lo, hi = z_window
        if not (lo <= -1 and 1 <= hi):
            raise ValueError("z-window must contain [-1, 1]")
        return TruncationPolicy(tuple(weights), max_total, (lo, hi))

    @property
    def nvars(self) -> int:
        return len(self.weights)

    def weight(self, exps: tuple[int, ...]) -> int:
        return sum(w * e for w, e in zip(self.weights, exps))

    def admits(self, exps: tuple[int, ...]) -> bool:
        if len(exps) != self.nvars:
            raise ValueError("exponent arity mismatch")
        if any(e < 0 for e in exps):
            raise ValueError("Novikov exponents must be nonnegative")
        return self.weight(exps) <= self.max_total

    def same_shape(self, other: "TruncationPolicy") -> bool:
        return self.weights == other.weights and self.max_total == other.max_total


class NovikovSeries:
    """Exact multivariate power series truncated by a TruncationPolicy."""

    __slots__ = ("policy", "terms")

    def __init__(self, policy: TruncationPolicy, terms: Mapping[tuple[int, ...], Fraction]):
        self.policy = policy
        clean = {}
        for k, v in terms.items():
            k = tuple(int(e) for e in k)
            v = rat(v)
            if v and policy.admits(k):
                clean[k] = v
        self.terms = clean

    # -- constructors --------------------------------------------------

    @staticmethod
    def constant(policy: TruncationPolicy, c) -> "NovikovSeries":
        z = (0,) * policy.nvars
        return NovikovSeries(policy, {z: rat(c)})

    @staticmethod
    def zero(policy: TruncationPolicy) -> "NovikovSeries":
        return NovikovSeries(policy, {})

    @staticmethod
    def one(policy: TruncationPolicy) -> "NovikovSeries":
        return NovikovSeries.constant(policy, 1)

    @staticmethod
    def variable(policy: TruncationPolicy, i: int) -> "NovikovSeries":
        exps = [0] * policy.nvars
        exps[i] = 1
        return NovikovSeries(policy, {tuple(exps): Fraction(1)})

    # -- ring structure --------------------------------------------------

    def _check(self, other: "NovikovSeries") -> None:
        if not self.policy.same_shape(other.policy):
            raise ValueError("incompatible truncation policies")

    def __add__(self, other: "NovikovSeries") -> "NovikovSeries":
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return NovikovSeries(self.policy, out)

    def __sub__(self, other: "NovikovSeries") -> "NovikovSeries":
        return self + (-other)

    def __neg__(self) -> "NovikovSeries":
        return NovikovSeries(self.policy, {k: -v for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, NovikovSeries):
            c = rat(other)
            return NovikovSeries(self.policy, {k: c * v for k, v in self.terms.items()})
        self._check(other)
        out: dict[tuple[int, ...], Fraction] = {}
        pol = self.policy
        for ka, va in self.terms.items():
            wa = pol.weight(ka)
            for kb, vb in other.terms.items():
                if wa + pol.weight(kb) > pol.max_total:
                    continue
                k = tuple(a + b for a, b in zip(ka, kb))
                out[k] = out.get(k, Fraction(0)) + va * vb
        return NovikovSeries(self.policy, out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, NovikovSeries)
            and self.policy.same_shape(other.policy)
            and self.terms == other.terms
        )

    def __hash__(self):
        raise TypeError("NovikovSeries is not hashable")

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for k in sorted(self.terms):
            mono = "*".join(f"y{i}^{e}" for i, e in enumerate(k) if e) or "1"
            bits.append(f"{self.terms[k]}*{mono}")
        return " + ".join(bits)

    # -- structure queries ------------------------------------------------

    def coefficient(self, exps: Iterable[int]) -> Fraction:
        exps = tuple(int(e) for e in exps)
        if not self.policy.admits(exps):
            raise TruncationError(
                f"coefficient at {exps} lies beyond truncation order "
                f"{self.policy.max_total}; rerun with order >= {self.policy.weight(exps)}"
            )
        return self.terms.get(exps, Fraction(0))

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.policy.nvars, Fraction(0))

    def order(self) -> int | None:
        """Minimal weight of the support (None for the zero series)."""
        if not self.terms:
            return None
        return min(self.policy.weight(k) for k in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def map_coefficients(self, f: Callable[[Fraction], Fraction]) -> "NovikovSeries":
        return NovikovSeries(self.policy, {k: f(v) for k, v in self.terms.items()})

    # -- transcendental operations ----------------------------------------

    def exp(self) -> "NovikovSeries":
        """exp(f) for f with zero constant term."""
        if self.constant_term() != 0:
            raise ValueError("exp needs a series with zero constant term")
        out = NovikovSeries.one(self.policy)
        term = NovikovSeries.one(self.policy)
        o = self.order()
        if o is None:
            return out
        kmax = self.policy.max_total // max(o, 1)
        for k in range(1, kmax + 1):
            term = term * self * Fraction(1, k)
            if term.is_zero():
                break
            out = out + term
        return out

    def log(self) -> "NovikovSeries":
        """log(f) for f with constant term 1."""
        if self.constant_term() != 1:
            raise ValueError("log needs constant term 1")
        u = self - NovikovSeries.one(self.policy)
        o = u.order()
        out = NovikovSeries.zero(self.policy)
        if o is None:
            return out
        power = NovikovSeries.one(self.policy)
        kmax = self.policy.max_total // max(o, 1)
        for k in range(1, kmax + 1):
            power = power * u
            if power.is_zero():
                break
            out = out + power * Fraction((-1) ** (k + 1), k)
        return out

    def reciprocal(self) -> "NovikovSeries":
        """1/f for f with invertible (nonzero) constant term, via geometric series."""
        c = self.constant_term()
        if c == 0:
            raise ValueError("reciprocal needs a nonzero constant term")
        u = NovikovSeries.one(self.policy) - self * (Fraction(1) / c)
        out = NovikovSeries.one(self.policy)
        power = NovikovSeries.one(self.policy)
        o = u.order()
        if o is not None:
            for _ in range(self.policy.max_total // max(o, 1)):
                power = power * u
                if power.is_zero():
                    break
                out = out + power
        return out * (Fraction(1) / c)

    def euler_derive(self, i: int) -> "NovikovSeries":
        """The Euler operator y_i d/dy_i: scales each monomial by its i-th exponent."""
        if not (0 <= i < self.policy.nvars):
            raise ValueError(f"no Novikov variable with index {i}")
        return NovikovSeries(
            self.policy, {k: v * k[i] for k, v in self.terms.items() if k[i]}
        )

    def weighted_scaling(self, m: tuple[int, ...]) -> "NovikovSeries":
        """Σ_i m_i·(y_i d/dy_i) applied to the series."""
        if len(m) != self.policy.nvars:
            raise ValueError("weight vector arity mismatch")
        out = NovikovSeries.zero(self.policy)
        for i, mi in enumerate(m):
            if mi:
                out = out + self.euler_derive(i) * Fraction(mi)
        return out


# ---------------------------------------------------------------------------
# z-Laurent elements over a graded algebra


class ZLaurentElement:
    """Finite z-Laurent data with algebra coefficients and a validity window."""

    __slots__ = ("algebra", "terms", "window")

    def __init__(
        self,
        algebra: GradedAlgebra,
        terms: Mapping[int, Element],
        window: tuple[int, int] | None,
    ):
        self.algebra = algebra
        clean: dict[int, Element] = {}
        for k, v in terms.items():
            if v.algebra is not algebra:
                raise AlgebraError("coefficient from the wrong algebra")
            if not v.is_zero():
                if window is not None:
                    lo, hi = window
                    if k > hi:
                        raise WindowError(
                            f"stored z^{k} term above declared window top {hi}"
                        )
                    if k < lo:
                        continue  # silently out of validity range: drop
                clean[int(k)] = v
        self.terms = clean
        self.window = window

    # -- constructors --------------------------------------------------

    @staticmethod
    def exact(algebra: GradedAlgebra, terms: Mapping[int, Element]) -> "ZLaurentElement":
        return ZLaurentElement(algebra, terms, None)

    @staticmethod
    def from_element(x: Element) -> "ZLaurentElement":
        return ZLaurentElement.exact(x.algebra, {0: x})

    @staticmethod
    def linear(x: Element, a: int) -> "ZLaurentElement":
        """The exact polynomial x + a*z."""
        return ZLaurentElement.exact(
            x.algebra, {0: x, 1: x.algebra.unit().scale(a)}
        )

    @staticmethod
    def one(algebra: GradedAlgebra) -> "ZLaurentElement":
        return ZLaurentElement.from_element(algebra.unit())

    # -- window bookkeeping ----------------------------------------------

    def is_exact(self) -> bool:
        return self.window is None

    def support(self) -> tuple[int, int] | None:
        if not self.terms:
            return None
        return (min(self.terms), max(self.terms))

    def _bounds(self) -> tuple[int | None, int]:
        """(lo, hi) with lo=None meaning 'known everywhere below'."""
        if self.window is not None:
            return self.window
        sup = self.support()
        hi = sup[1] if sup else 0
        return (None, hi)

    def restrict_window(self, window: tuple[int, int]) -> "ZLaurentElement":
        """Re-declare the validity window (narrowing is always sound; widening
        down is refused; lowering the top requires the dropped range to be
        actually zero, since a window top claims everything above it vanishes)."""
        lo, hi = window
        mylo, myhi = self._bounds()
        if mylo is not None and lo < mylo:
            raise WindowError(f"cannot widen window below {mylo}")
        if hi < myhi and any(hi < k <= myhi and not v.is_zero() for k, v in self.terms.items()):
            raise WindowError(f"nonzero terms above requested window top {hi}")
        return ZLaurentElement(
            self.algebra, {k: v for k, v in self.terms.items() if lo <= k <= hi}, window
        )

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "ZLaurentElement") -> "ZLaurentElement":
        if self.algebra is not other.algebra:
            raise AlgebraError("adding z-Laurent data over different algebras")
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, self.algebra.zero()) + v
        la, ha = self._bounds()
        lb, hb = other._bounds()
        if la is None and lb is None:
            window = None
        else:
            lo = max(x for x in (la, lb) if x is not None)
            window = (lo, max(ha, hb))
            out = {k: v for k, v in out.items() if k >= lo}
        return ZLaurentElement(self.algebra, out, window)

    def __neg__(self) -> "ZLaurentElement":
        return ZLaurentElement(self.algebra, {k: -v for k, v in self.terms.items()}, self.window)

    def __sub__(self, other: "ZLaurentElement") -> "ZLaurentElement":
        return self + (-other)

    def scale(self, c) -> "ZLaurentElement":
        return ZLaurentElement(
            self.algebra, {k: v.scale(c) for k, v in self.terms.items()}, self.window
        )

    def __mul__(self, other: "ZLaurentElement") -> "ZLaurentElement":
        if self.algebra is not other.algebra:
            raise AlgebraError("multiplying z-Laurent data over different algebras")
        la, ha = self._bounds()
        lb, hb = other._bounds()
        if la is None and lb is None:
            window = None
        else:
            cands = []
            if la is not None:
                cands.append(la + hb)
            if lb is not None:
                cands.append(lb + ha)
            window = (max(cands), ha + hb)
        out: dict[int, Element] = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                k = ka + kb
                if window is not None and k < window[0]:
                    continue
                prod = va * vb
                if prod.is_zero():
                    continue
                out[k] = out.get(k, self.algebra.zero()) + prod
        return ZLaurentElement(self.algebra, out, window)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ZLaurentElement) or self.algebra is not other.algebra:
            return False
        return self.terms == other.terms and self.window == other.window

    def __hash__(self):
        raise TypeError("ZLaurentElement is not hashable")

    def coefficient(self, k: int) -> Element:
        """The z^k coefficient; raises WindowError outside the validity window."""
        lo, hi = self._bounds()
        if k > hi:
            return self.algebra.zero()  # known-zero above the top
        if lo is not None and k < lo:
            raise WindowError(
                f"z^{k} lies below the validity window bottom {lo}; "
                f"widen the z-window to at least {k}"
            )
        return self.terms.get(k, self.algebra.zero())

    def __repr__(self) -> str:
        bits = [f"({self.terms[k]!r})*z^{k}" for k in sorted(self.terms)]
        body = " + ".join(bits) if bits else "0"
        w = "exact" if self.window is None else f"window={self.window}"
        return f"<{body} | {w}>"


def nilpotent_reciprocal(c: Element, a: int) -> ZLaurentElement:
    """Exact reciprocal of (c + a z) for nilpotent c and integer a != 0.

    1/(c + az) = (1/(az)) Σ_{k≥0} (−c/(az))^k, a finite sum by nilpotency; the
    result is an exact Laurent polynomial supported on negative z-powers.
    Multiply-back (c + az)·result = 1 holds on the nose.
    """
    if a == 0:
        raise ValueError("nilpotent_reciprocal needs a nonzero z-slope")
    idx = nilpotency_index(c)  # raises if c is not nilpotent
    alg = c.algebra
    terms: dict[int, Element] = {}
    power = alg.unit()
    for k in range(idx):
        coeff = power.scale(Fraction((-1) ** k, a ** (k + 1)))
        if not coeff.is_zero():
            terms[-(k + 1)] = coeff
        power = power * c
    return ZLaurentElement.exact(alg, terms)


# ---------------------------------------------------------------------------
# x-Laurent series with t-polynomial coefficients


class XLaurentSeries:
    """Laurent series in x whose coefficients are t-polynomials (exact, truncated in t)."""

    __slots__ = ("t_order", "terms")

    def __init__(self, t_order: int, terms: Mapping[int, Mapping[int, Fraction]]):
        self.t_order = int(t_order)
        clean: dict[int, dict[int, Fraction]] = {}
        for x, poly in terms.items():
            row = {int(d): rat(c) for d, c in poly.items() if c and d <= self.t_order}
            if row:
                clean[int(x)] = row
        self.terms = clean

    @staticmethod
    def zero(t_order: int) -> "XLaurentSeries":
        return XLaurentSeries(t_order, {})

    @staticmethod
    def monomial(t_order: int, x_exp: int, t_deg: int, c) -> "XLaurentSeries":
        return XLaurentSeries(t_order, {x_exp: {t_deg: rat(c)}})

    def __add__(self, other: "XLaurentSeries") -> "XLaurentSeries":
        if self.t_order != other.t_order:
            raise ValueError("t-order mismatch")
        out = {x: dict(p) for x, p in self.terms.items()}
        for x, poly in other.terms.items():
            row = out.setdefault(x, {})
            for d, c in poly.items():
                row[d] = row.get(d, Fraction(0)) + c
        return XLaurentSeries(self.t_order, out)

    def __mul__(self, other: "XLaurentSeries") -> "XLaurentSeries":
        if self.t_order != other.t_order:
            raise ValueError("t-order mismatch")
        out: dict[int, dict[int, Fraction]] = {}
        for xa, pa in self.terms.items():
            for xb, pb in other.terms.items():
                x = xa + xb
                for da, ca in pa.items():
                    for db, cb in pb.items():
                        d = da + db
                        if d > self.t_order:
                            continue
                        row = out.setdefault(x, {})
                        row[d] = row.get(d, Fraction(0)) + ca * cb
        return XLaurentSeries(self.t_order, out)

    def power(self, n: int) -> "XLaurentSeries":
        if n < 0:
            raise ValueError("negative power")
        out = XLaurentSeries.monomial(self.t_order, 0, 0, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def x_coefficient(self, x_exp: int) -> dict[int, Fraction]:
        """The coefficient of x^x_exp as a t-polynomial {degree: value}."""
        return dict(self.terms.get(x_exp, {}))

    def coefficient(self, x_exp: int, t_deg: int) -> Fraction:
        if t_deg > self.t_order:
            raise TruncationError(
                f"t^{t_deg} beyond truncation order {self.t_order}; "
                f"rerun with order >= {t_deg}"
            )
        return self.terms.get(x_exp, {}).get(t_deg, Fraction(0))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, XLaurentSeries)
            and self.t_order == other.t_order
            and self.terms == other.terms
        )

    def __hash__(self):
        raise TypeError("XLaurentSeries is not hashable")

    def __repr__(self) -> str:
        bits = []
        for x in sorted(self.terms, reverse=True):
            for d in sorted(self.terms[x]):
                bits.append(f"{self.terms[x][d]}*t^{d}*x^{x}")
        return " + ".join(bits) if bits else "0"
