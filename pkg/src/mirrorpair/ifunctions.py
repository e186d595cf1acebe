"""Relative I-functions, contact-order state spaces, and mirror maps.

The central objects are series whose coefficients live in a *relative state
space*: pairs [γ]_n of a cohomology class and an integer contact order.  A
class at contact 0 is ambient-valued; at any other contact it is a class on
the divisor.  Products follow the convention (reported by the CLI metadata):

* both contacts 0: ambient cup product;
* both contacts ≥ 0, not both 0: restrict ambient factors, multiply on the
  divisor, add contacts;
* exactly one contact negative and the sum negative: restricted product;
* exactly one negative, sum zero: pairing-transpose pushforward of the
  restricted product (ambient-valued);
* exactly one negative, sum positive: restricted product cupped with the
  restricted divisor class;
* both negative: never produced by the pipeline; extended as the restricted
  product.

Relative I-functions are stored per curve class β as exact z-Laurent data
(every template factor is a finite Laurent polynomial), with the exponential
prefactor exp(Σ p_i log y_i / z) expanded into formal log-monomial slots.
The z-validity window of the ambient truncation policy is what the stored
object declares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct

from .algebra import (
    AlgebraError,
    Element,
    GradedAlgebra,
    RestrictionMap,
    divide_by_class,
    pairing_pushforward,
    rat,
)
from .geometry import MissingDataError, PairGeometry
from .series import (
    NovikovSeries,
    TruncationPolicy,
    TruncationError,
    WindowError,
    ZLaurentElement,
    nilpotent_reciprocal,
)


class CancellationError(AlgebraError):
    """A negative-contact coefficient failed to factor through the divisor class."""


class MalformedMirrorMapError(ValueError):
    """A mirror map's negative-contact part is not unit-classed / log-free."""


# ---------------------------------------------------------------------------
# hypergeometric building blocks


def hypergeometric_factor(u: Element, c: int) -> ZLaurentElement:
    """The ratio Π_{a≤0}(u + a z) / Π_{a≤c}(u + a z) as an exact z-Laurent element.

    For c < 0 this is the literal product Π_{c<a≤0}(u + a z) — note it keeps the
    bare a = 0 factor u.  For c > 0 it is the exact reciprocal product
    Π_{0<a≤c} 1/(u + a z) (u nilpotent).  c = 0 gives 1.
    """
    alg = u.algebra
    out = ZLaurentElement.one(alg)
    if c < 0:
        for a in range(c + 1, 1):
            out = out * ZLaurentElement.linear(u, a)
    elif c > 0:
        for a in range(1, c + 1):
            out = out * nilpotent_reciprocal(u, a)
    return out


def _rising_product(u: Element, c: int) -> ZLaurentElement:
    """Π_{0<a≤c}(u + a z) for c > 0 (exact polynomial)."""
    out = ZLaurentElement.one(u.algebra)
    for a in range(1, c + 1):
        out = out * ZLaurentElement.linear(u, a)
    return out


# ---------------------------------------------------------------------------
# state-space series


def _merge_add(terms: dict, key, value: Element) -> None:
    cur = terms.get(key)
    terms[key] = value if cur is None else cur + value
    if terms[key].is_zero():
        del terms[key]


class StateSeries:
    """z-free series with relative-state coefficients.

    Keys are (beta, contact, logpow); values are Elements of the ambient
    algebra when contact == 0 and of the divisor algebra otherwise.
    """

    __slots__ = ("geometry", "terms")

    def __init__(self, geometry: PairGeometry, terms: dict):
        self.geometry = geometry
        clean: dict = {}
        for (beta, contact, logpow), el in terms.items():
            beta = tuple(beta)
            logpow = tuple(logpow)
            if not geometry.policy.admits(beta):
                continue
            expected = geometry.ambient if contact == 0 else geometry.divisor
            if el.algebra is not expected:
                raise AlgebraError(
                    f"contact {contact} value must live in {expected.name}"
                )
            if not el.is_zero():
                clean[(beta, contact, logpow)] = el
        self.terms = clean

    # -- constructors ---------------------------------------------------

    @staticmethod
    def unit(geometry: PairGeometry) -> "StateSeries":
        z = (0,) * geometry.nvars
        return StateSeries(geometry, {(z, 0, z): geometry.ambient.unit()})

    @staticmethod
    def zero(geometry: PairGeometry) -> "StateSeries":
        return StateSeries(geometry, {})

    # -- basic ring ops ----------------------------------------------------

    def __add__(self, other: "StateSeries") -> "StateSeries":
        out = dict(self.terms)
        for k, v in other.terms.items():
            _merge_add(out, k, v)
        return StateSeries(self.geometry, out)

    def __sub__(self, other: "StateSeries") -> "StateSeries":
        return self + other.scale(-1)

    def scale(self, c) -> "StateSeries":
        c = rat(c)
        return StateSeries(
            self.geometry, {k: v.scale(c) for k, v in self.terms.items()}
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, StateSeries)
            and self.geometry is other.geometry
            and self.terms == other.terms
        )

    def __hash__(self):
        raise TypeError("StateSeries is not hashable")

    def is_zero(self) -> bool:
        return not self.terms

    def __mul__(self, other: "StateSeries") -> "StateSeries":
        geom = self.geometry
        pol = geom.policy
        out: dict = {}
        for (b1, c1, l1), e1 in self.terms.items():
            w1 = pol.weight(b1)
            for (b2, c2, l2), e2 in other.terms.items():
                if w1 + pol.weight(b2) > pol.max_total:
                    continue
                contact, el = _state_product(geom, c1, e1, c2, e2)
                if el.is_zero():
                    continue
                beta = tuple(a + b for a, b in zip(b1, b2))
                logpow = tuple(a + b for a, b in zip(l1, l2))
                _merge_add(out, (beta, contact, logpow), el)
        return StateSeries(geom, out)

    def reciprocal(self) -> "StateSeries":
        """Geometric-series inverse; the leading state must be c·[1]_0, c ≠ 0."""
        geom = self.geometry
        zkey = ((0,) * geom.nvars, 0, (0,) * geom.nvars)
        lead = self.terms.get(zkey)
        c = lead.unit_component() if lead is not None else Fraction(0)
        if c == 0:
            raise ValueError("state reciprocal needs a nonzero unit leading term")
        n = self.scale(Fraction(1) / c) - StateSeries.unit(geom)
        out = StateSeries.unit(geom)
        power = StateSeries.unit(geom)
        sign = 1
        cap = geom.policy.max_total + geom.ambient.top_degree + 3
        for _ in range(cap):
            power = power * n
            if power.is_zero():
                break
            sign = -sign
            out = out + power.scale(sign)
        else:
            raise ValueError("state reciprocal did not terminate (series not nilpotent)")
        return out.scale(Fraction(1) / c)

    # -- queries ---------------------------------------------------------

    def coefficient(self, beta, contact: int = 0, logpow=None) -> Element:
        beta = tuple(beta)
        if not self.geometry.policy.admits(beta):
            raise TruncationError(
                f"class {beta} beyond truncation order {self.geometry.policy.max_total}"
            )
        if logpow is None:
            logpow = (0,) * self.geometry.nvars
        alg = self.geometry.ambient if contact == 0 else self.geometry.divisor
        return self.terms.get((beta, contact, tuple(logpow)), alg.zero())

    def contacts(self) -> set[int]:
        return {c for (_, c, _) in self.terms}

    def __repr__(self) -> str:
        bits = []
        for (b, c, l) in sorted(self.terms):
            bits.append(f"[{self.terms[(b, c, l)]!r}]_{c} q^{b} log^{l}")
        return " + ".join(bits) if bits else "0"


def _state_product(
    geom: PairGeometry, c1: int, e1: Element, c2: int, e2: Element
) -> tuple[int, Element]:
    """The contact-order product rule (see module docstring)."""
    c = c1 + c2
    r = geom.restriction
    if c1 == 0 and c2 == 0:
        return 0, e1 * e2
    if c1 >= 0 and c2 >= 0:
        d1 = r(e1) if c1 == 0 else e1
        d2 = r(e2) if c2 == 0 else e2
        return c, d1 * d2
    if c1 < 0 and c2 < 0:
        return c, e1 * e2
    d1 = r(e1) if c1 == 0 else e1
    d2 = r(e2) if c2 == 0 else e2
    prod = d1 * d2
    if c < 0:
        return c, prod
    if c == 0:
        return 0, pairing_pushforward(r, prod)
    return c, prod * r(geom.divisor_class)


PRODUCT_RULE_TEXT = (
    "contact products: (0,0) ambient cup; both>=0 restrict-and-add; "
    "one negative: sum<0 restricted product, sum=0 pairing pushforward, "
    "sum>0 restricted product cup restricted divisor class"
)


# ---------------------------------------------------------------------------
# relative series (z-graded)


class RelativeSeries:
    """Contact-order-indexed z-Laurent series over a pair geometry.

    Keys are (beta, aux, contact, zexp, logpow) where aux is the extension
    variable power (0 unless extended); values follow the StateSeries
    convention (ambient at contact 0, divisor otherwise).  The window claims:
    z-coefficients above window[1] vanish, [window[0], window[1]] are stored
    exactly, below is not computed.
    """

    __slots__ = ("geometry", "terms", "window")

    def __init__(self, geometry: PairGeometry, terms: dict, window: tuple[int, int]):
        self.geometry = geometry
        self.window = window
        lo, hi = window
        clean: dict = {}
        for (beta, aux, contact, zexp, logpow), el in terms.items():
            if el.is_zero():
                continue
            if zexp > hi:
                raise WindowError(f"term at z^{zexp} above declared window top {hi}")
            if zexp < lo:
                continue
            expected = geometry.ambient if contact == 0 else geometry.divisor
            if el.algebra is not expected:
                raise AlgebraError("mis-homed state value")
            clean[(tuple(beta), aux, contact, zexp, tuple(logpow))] = el
        self.terms = clean

    def z_slice(self, zexp: int) -> StateSeries:
        lo, hi = self.window
        if zexp < lo:
            raise WindowError(
                f"z^{zexp} below the validity window {self.window}; "
                f"widen the z-window to at least {zexp}"
            )
        out: dict = {}
        for (beta, aux, contact, z, logpow), el in self.terms.items():
            if z != zexp:
                continue
            if aux != 0:
                raise ValueError("z_slice is only defined for non-extended series")
            _merge_add(out, (beta, contact, logpow), el)
        return StateSeries(self.geometry, out)

    def top_z(self) -> int | None:
        return max((z for (_, _, _, z, _) in self.terms), default=None)

    def coefficient(self, beta, contact: int, zexp: int, logpow=None, aux: int = 0) -> Element:
        lo, hi = self.window
        if zexp > hi:
            alg = self.geometry.ambient if contact == 0 else self.geometry.divisor
            return alg.zero()
        if zexp < lo:
            raise WindowError(
                f"z^{zexp} below the validity window {self.window}"
            )
        beta = tuple(beta)
        if not self.geometry.policy.admits(beta):
            raise TruncationError(
                f"class {beta} beyond truncation order {self.geometry.policy.max_total}"
            )
        if logpow is None:
            logpow = (0,) * self.geometry.nvars
        alg = self.geometry.ambient if contact == 0 else self.geometry.divisor
        return self.terms.get((beta, aux, contact, zexp, tuple(logpow)), alg.zero())

    def mul_state(self, state: StateSeries, z_floor: int | None = None) -> "RelativeSeries":
        """Multiply by a z-free state series (window is preserved).

        z_floor, when given, skips computing output z-levels below it and
        narrows the declared window accordingly.
        """
        geom = self.geometry
        pol = geom.policy
        lo, hi = self.window
        if z_floor is not None:
            lo = max(lo, z_floor)
        out: dict = {}
        for (b1, aux, c1, z, l1), e1 in self.terms.items():
            if z < lo:
                continue
            w1 = pol.weight(b1)
            for (b2, c2, l2), e2 in state.terms.items():
                if w1 + pol.weight(b2) > pol.max_total:
                    continue
                contact, el = _state_product(geom, c1, e1, c2, e2)
                if el.is_zero():
                    continue
                beta = tuple(a + b for a, b in zip(b1, b2))
                logpow = tuple(a + b for a, b in zip(l1, l2))
                _merge_add(out, (beta, aux, contact, z, logpow), el)
        return RelativeSeries(geom, out, (lo, hi))

    def __add__(self, other: "RelativeSeries") -> "RelativeSeries":
        lo = max(self.window[0], other.window[0])
        hi = max(self.window[1], other.window[1])
        out = dict(self.terms)
        for k, v in other.terms.items():
            _merge_add(out, k, v)
        return RelativeSeries(self.geometry, out, (lo, hi))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RelativeSeries)
            and self.geometry is other.geometry
            and self.window == other.window
            and self.terms == other.terms
        )

    def __hash__(self):
        raise TypeError("RelativeSeries is not hashable")


# ---------------------------------------------------------------------------
# the exponential prefactor


def _prefactor_terms(geom: PairGeometry) -> list[tuple[tuple[int, ...], int, Element]]:
    """Expansion of exp(Σ p_i ℓ_i / z): list of (log multi-index α, z-shift −|α|, class).

    The class is (Π p_i^{α_i}) / Π α_i!; nilpotency bounds |α| by the ambient
    top degree, so the list is finite.
    """
    top = geom.ambient.top_degree
    out: list[tuple[tuple[int, ...], int, Element]] = []
    for alpha in iproduct(*(range(top + 1) for _ in range(geom.nvars))):
        total = sum(alpha)
        if total > top:
            continue
        cls = geom.ambient.unit()
        denom = Fraction(1)
        for p, a in zip(geom.picard, alpha):
            if a:
                cls = cls * p.power(a)
                denom *= math.factorial(a)
        if cls.is_zero():
            continue
        out.append((alpha, -total, cls.scale(Fraction(1) / denom)))
    return out


# ---------------------------------------------------------------------------
# absolute inputs (the unit-direction data of the absolute theory)


def absolute_core(geom: PairGeometry, beta: tuple[int, ...]) -> ZLaurentElement:
    """Per-class core of the absolute series: the β-part with the overall z and
    the exponential prefactor stripped (core_0 = 1)."""
    amb = geom.ambient
    if all(b == 0 for b in beta):
        return ZLaurentElement.one(amb)
    if geom.j_source == "closed_form_projective":
        d = beta[0]
        p = geom.hyperplane
        out = ZLaurentElement.one(amb)
        for k in range(1, d + 1):
            rec = nilpotent_reciprocal(p, k)
            for _ in range(geom.projective_dim + 1):
                out = out * rec
        return out
    if geom.j_source == "invariant_table":
        table = geom.table
        if table is None:
            raise MissingDataError(f"{geom.name}: no invariant table attached")
        terms: dict[int, Element] = {}
        for b, a, v in table.rows_for("x_point"):
            if tuple(b) == tuple(beta):
                z = -a - 2
                cur = terms.get(z, amb.zero())
                terms[z] = cur + amb.unit().scale(v)
        return ZLaurentElement.exact(amb, terms)
    raise MissingDataError(
        f"{geom.name}: j_source {geom.j_source} has no per-class absolute core"
    )


def one_point_invariant(geom: PairGeometry, beta: tuple[int, ...]) -> Fraction:
    """⟨[pt] ψ^{d-2}⟩ at curve class β (d = D·β ≥ 2): the z^{-d} unit component
    of the absolute core."""
    d = geom.contact_weight(beta)
    if d < 2:
        raise ValueError("one-point descendants need D·β ≥ 2")
    core = absolute_core(geom, beta)
    return core.coefficient(-d).unit_component()


# ---------------------------------------------------------------------------
# divisor mirror map


@dataclass(frozen=True)
class DivisorMirrorMap:
    """z^{≥0} correction data of the divisor theory: {(beta, zexp): ambient class}."""

    geometry_name: str
    source: str
    reason: str | None
    terms: tuple[tuple[tuple[tuple[int, ...], int], Element], ...]

    def is_zero(self) -> bool:
        return not self.terms

    def as_dict(self) -> dict[tuple[tuple[int, ...], int], Element]:
        return dict(self.terms)


def divisor_mirror_map(geom: PairGeometry) -> DivisorMirrorMap:
    if geom.tau_d_source == "zero":
        return DivisorMirrorMap(geom.name, "zero", geom.tau_d_reason, ())
    if geom.tau_d_source in ("table", "closed_form_from_one_point_invariants"):
        if geom.table is None or geom.table.is_empty_for("d_point"):
            raise MissingDataError(
                f"{geom.name}: divisor mirror map needs d_point invariants: "
                "external data required"
            )
        terms: dict[tuple[tuple[int, ...], int], Element] = {}
        push_unit = pairing_pushforward(geom.restriction, geom.divisor.unit())
        for beta, a, v in geom.table.rows_for("d_point"):
            d = -geom.contact_weight(beta)
            if d < 2 or a != d - 2:
                continue  # only the normal-direction rows feed the mirror map
            coeff = v * Fraction((-1) ** (d - 1) * math.factorial(d - 1))
            cls = push_unit.scale(coeff)
            key = (tuple(beta), 0)
            cur = terms.get(key, geom.ambient.zero())
            terms[key] = cur + cls
        terms = {k: v for k, v in terms.items() if not v.is_zero()}
        return DivisorMirrorMap(geom.name, geom.tau_d_source, None, tuple(sorted(terms.items())))
    raise MissingDataError(f"{geom.name}: unknown tau_d_source {geom.tau_d_source}")


# -- the normal-bundle compactification route (machinery check for the above) --


@dataclass(frozen=True)
class NormalBundleModel:
    """The compactified normal-bundle geometry: divisor algebra extended by h0
    with h0² = −c1(N)·h0, plus the series data of its relative I-function."""

    algebra: GradedAlgebra
    h0_indices: tuple[int, ...]       # basis index of b⊗h0 for each divisor index b
    terms: dict                        # (beta, j, zexp, logpow0) -> Element of `algebra`


def build_normal_bundle_algebra(geom: PairGeometry) -> tuple[GradedAlgebra, tuple[int, ...]]:
    div = geom.divisor
    c1n = geom.restriction(geom.divisor_class)
    names = list(div.basis) + [f"{b}.h0" for b in div.basis]
    degrees = list(div.degrees) + [d + 1 for d in div.degrees]
    n = div.dim
    products: dict[tuple[str, str], dict[str, Fraction]] = {}

    def put(a: str, b: str, el_plain: Element | None, el_h0: Element | None):
        vec: dict[str, Fraction] = {}
        if el_plain is not None:
            for i, c in enumerate(el_plain.coeffs):
                if c:
                    vec[names[i]] = vec.get(names[i], Fraction(0)) + c
        if el_h0 is not None:
            for i, c in enumerate(el_h0.coeffs):
                if c:
                    vec[names[n + i]] = vec.get(names[n + i], Fraction(0)) + c
        if vec:
            products[(a, b)] = vec

    ui = div.unit_index
    for i in range(n):
        ei = div.basis_element(i)
        for j in range(n):
            ej = div.basis_element(j)
            plain = ei * ej
            if not (i == ui or j == ui):
                put(names[i], names[j], plain, None)
            # e_i * (e_j h0) = (e_i e_j) h0
            if i != ui:
                put(names[i], names[n + j], None, plain)
            # (e_i h0)(e_j h0) = e_i e_j h0² = −(e_i e_j c1N) h0
            put(names[n + i], names[n + j], None, -(plain * c1n))
    alg = GradedAlgebra.from_products(
        f"{div.name}.normal_bundle", names, degrees, products,
        unit=names[ui],
        point=names[n + (div.point_index if div.point_index is not None else 0)],
    )
    return alg, tuple(range(n, 2 * n))


def normal_bundle_i_function(geom: PairGeometry, max_aux: int | None = None) -> NormalBundleModel:
    """Relative I-function of (compactified normal bundle, zero section).

    Terms are indexed by the divisor curve class β together with the fiber
    offset j ≥ 0 (the extension variable exponent is c1(N)·β + j; the contact
    order is −j).  Only β=0 plus table-supplied d_point rows feed in; the
    divisor's own mirror-map seed is zero by assumption here.
    """
    alg, h0_idx = build_normal_bundle_algebra(geom)
    div = geom.divisor
    n = div.dim
    h0 = alg.basis_element(h0_idx[div.unit_index])
    c1n_y = alg.element(
        tuple(geom.restriction(geom.divisor_class).coeffs) + (Fraction(0),) * n
    )
    pol = geom.policy
    if max_aux is None:
        max_aux = pol.max_total
    rows = geom.table.rows_for("d_point") if geom.table is not None else []
    betas: list[tuple[int, ...]] = [tuple([0] * pol.nvars)]
    betas += sorted({tuple(b) for (b, _, _) in rows if pol.admits(tuple(b))})

    terms: dict = {}
    lo, hi = pol.z_window
    for beta in betas:
        if all(b == 0 for b in beta):
            base = ZLaurentElement.exact(alg, {1: alg.unit()})
        else:
            zterms: dict[int, Element] = {}
            for b, a, v in rows:
                if tuple(b) == beta:
                    z = -a - 1
                    zterms[z] = zterms.get(z, alg.zero()) + alg.unit().scale(v)
            if not zterms:
                continue
            base = ZLaurentElement.exact(alg, zterms)
        dbeta = geom.contact_weight(beta)
        wb = pol.weight(beta)
        for j in range(0, max_aux - wb + 1):
            k = dbeta + j
            factor = hypergeometric_factor(h0, k)
            term = base * factor
            if j > 0:
                pole_base = h0 - c1n_y
                term = term * nilpotent_reciprocal(pole_base, j)
            # prefactor exp(h0 · log y0 / z): log slot bounded by h0-nilpotency
            pref: list[tuple[int, int, Element]] = [(0, 0, alg.unit())]
            power = alg.unit()
            lev = 0
            while True:
                lev += 1
                power = power * h0
                if power.is_zero() or lev > alg.top_degree:
                    break
                pref.append((lev, -lev, power.scale(Fraction(1, math.factorial(lev)))))
            for z, el in term.terms.items():
                for a0, shift, pcls in pref:
                    zf = z + shift
                    if zf < lo:
                        continue
                    if zf > hi:
                        raise WindowError(
                            f"normal-bundle term at z^{zf} above window top {hi}"
                        )
                    val = el * pcls
                    if val.is_zero():
                        continue
                    key = (beta, j, zf, (a0,))
                    cur = terms.get(key)
                    terms[key] = val if cur is None else cur + val
                    if terms[key].is_zero():
                        del terms[key]
    return NormalBundleModel(alg, h0_idx, terms)


def divisor_map_from_normal_bundle(geom: PairGeometry, model: NormalBundleModel) -> DivisorMirrorMap:
    """Extract the z^{≥0} content at extension variable = 1 beyond the seed z·[1].

    Coefficients must be of the form v⊗h0 (fiber direction); the ambient class
    recorded is the pairing pushforward of v.
    """
    div = geom.divisor
    n = div.dim
    out: dict[tuple[tuple[int, ...], int], Element] = {}
    for (beta, j, z, logpow), el in model.terms.items():
        if z < 0 or logpow != (0,):
            continue
        plain = el.coeffs[:n]
        fiber = el.coeffs[n:]
        if all(b == 0 for b in beta) and z == 1 and j == 0:
            # the seed z·[1]: subtract the unit, anything else is a violation
            rem = list(plain)
            rem[div.unit_index] -= 1
            plain = tuple(rem)
        if any(c != 0 for c in plain):
            raise MalformedMirrorMapError(
                f"normal-bundle series has a base-direction z^{z} term at {beta}"
            )
        v = div.element(fiber)
        if v.is_zero():
            continue
        push = pairing_pushforward(geom.restriction, v)
        key = (tuple(beta), z)
        cur = out.get(key, geom.ambient.zero())
        out[key] = cur + push
    out = {k: v for k, v in out.items() if not v.is_zero()}
    return DivisorMirrorMap(geom.name, "normal_bundle_route", None, tuple(sorted(out.items())))


# ---------------------------------------------------------------------------
# relative I-function assembly


def _assemble(
    geom: PairGeometry,
    pieces: list[tuple[tuple[int, ...], int, ZLaurentElement]],
) -> RelativeSeries:
    """Shared final stage: overall z, prefactor expansion, contact attachment."""
    lo, hi = geom.policy.z_window
    pref = _prefactor_terms(geom)
    r = geom.restriction
    terms: dict = {}
    for beta, contact, zl in pieces:
        for z, el in zl.terms.items():
            for alpha, shift, pcls in pref:
                zf = z + 1 + shift  # +1: the overall z of the template
                if zf < lo:
                    continue
                val = el * pcls
                if val.is_zero():
                    continue
                if zf > hi:
                    raise WindowError(
                        f"I-function term at z^{zf} exceeds the declared window top {hi}; "
                        "raise z_max"
                    )
                stored = val if contact == 0 else r(val)
                if stored.is_zero():
                    continue
                key = (beta, 0, contact, zf, alpha)
                cur = terms.get(key)
                terms[key] = stored if cur is None else cur + stored
                if terms[key].is_zero():
                    del terms[key]
    return RelativeSeries(geom, terms, (lo, hi))


def _effective_classes(pol: TruncationPolicy):
    """All admissible exponent tuples (including 0)."""
    ranges = [range(0, pol.max_total // w + 1) for w in pol.weights]
    for beta in iproduct(*ranges):
        if pol.admits(beta):
            yield beta


def relative_i_function(
    geom: PairGeometry, divisor_map: DivisorMirrorMap | None = None
) -> RelativeSeries:
    """The relative I-function of the pair, at divisor mirror map τ_D.

    Dispatches on the geometry's absolute-input source.  A nonzero divisor
    mirror map would deform the absolute series input, which needs
    multi-insertion invariant data this table format does not carry — that
    case raises MissingDataError naming the gap.
    """
    if divisor_map is None:
        divisor_map = divisor_mirror_map(geom)
    if not divisor_map.is_zero():
        raise MissingDataError(
            f"{geom.name}: relative I-function at nonzero divisor mirror map "
            "needs deformed absolute invariants: external data required"
        )
    if geom.j_source == "toric_hypergeometric":
        return toric_i_function(geom)

    dcls = geom.divisor_class
    pieces: list[tuple[tuple[int, ...], int, ZLaurentElement]] = []
    for beta in _effective_classes(geom.policy):
        c = geom.contact_weight(beta)
        base = absolute_core(geom, beta)
        if not base.terms:
            continue
        if c > 0:
            term = base * _rising_product(dcls, c)
            term = term * nilpotent_reciprocal(dcls, c)
        elif c == 0:
            term = base
        else:
            # divide by the bare divisor class (a = 0), then the invertible part
            divided: dict[int, Element] = {}
            for z, el in base.terms.items():
                try:
                    divided[z] = divide_by_class(dcls, el)
                except AlgebraError as exc:
                    raise CancellationError(
                        f"{geom.name}: coefficient at {beta}, z^{z} does not factor "
                        f"through the divisor class"
                    ) from exc
            term = ZLaurentElement.exact(geom.ambient, divided)
            for a in range(c + 1, 0):
                term = term * nilpotent_reciprocal(dcls, a)
        pieces.append((beta, -c, term))
    return _assemble(geom, pieces)


def toric_i_function(geom: PairGeometry) -> RelativeSeries:
    """The toric hypergeometric template for bundle-type pairs.

    Per class β: Π_bundles Π_{k=1}^{b·β}(b + kz) over Π_dens Π_{k=1}^{t·β}(t + kz),
    a simple pole factor 1/(D + (D·β)z) with a [1]_{−D·β} state when D·β > 0,
    the overall z, and the exponential prefactor.  Factors of the relative ray
    are structurally cancelled against the hypergeometric modification.
    """
    if geom.toric is None:
        raise MissingDataError(f"{geom.name}: no toric data")
    dcls = geom.divisor_class
    dens = [(cls, geom.pairing(cls)) for cls in geom.toric.denominators]
    buns = [(cls, geom.pairing(cls)) for cls in geom.toric.bundles]
    pieces = []
    for beta in _effective_classes(geom.policy):
        c = geom.contact_weight(beta)
        term = ZLaurentElement.one(geom.ambient)
        for cls, pv in buns:
            top = sum(p * b for p, b in zip(pv, beta))
            term = term * _rising_product(cls, top) if top > 0 else term
        for cls, pv in dens:
            top = sum(p * b for p, b in zip(pv, beta))
            for k in range(1, top + 1):
                term = term * nilpotent_reciprocal(cls, k)
        if c > 0:
            term = term * nilpotent_reciprocal(dcls, c)
        pieces.append((beta, -c, term))
    return _assemble(geom, pieces)


def extended_i_function(geom: PairGeometry, divisor_map: DivisorMirrorMap | None = None) -> RelativeSeries:
    """The extension of the relative I-function by the large-contact column.

    Adds, for every k ≥ 0, the column with the extension monomial x1^k/(z^k k!)
    at contact −D·β + k; the relative pole factor survives exactly when
    D·β − k > 0.  The k = 0 column is the relative I-function itself.  The
    result is endpoint data only — nothing here inverts in x1.
    """
    if divisor_map is None:
        divisor_map = divisor_mirror_map(geom)
    if not divisor_map.is_zero():
        raise MissingDataError(
            f"{geom.name}: extended I-function at nonzero divisor mirror map: "
            "external data required"
        )
    if geom.j_source == "toric_hypergeometric":
        raise MissingDataError(
            f"{geom.name}: extended column for the toric template is not wired up"
        )
    dcls = geom.divisor_class
    lo, hi = geom.policy.z_window
    pref = _prefactor_terms(geom)
    r = geom.restriction
    terms: dict = {}
    pol = geom.policy
    for beta in _effective_classes(pol):
        c = geom.contact_weight(beta)
        base = absolute_core(geom, beta)
        if not base.terms:
            continue
        wb = pol.weight(beta)
        if c > 0:
            base = base * _rising_product(dcls, c)
        elif c < 0:
            divided: dict[int, Element] = {}
            for z, el in base.terms.items():
                try:
                    divided[z] = divide_by_class(dcls, el)
                except AlgebraError as exc:
                    raise CancellationError(
                        f"{geom.name}: no divisor-class factorization at {beta}, z^{z}"
                    ) from exc
            base = ZLaurentElement.exact(geom.ambient, divided)
            for a in range(c + 1, 0):
                base = base * nilpotent_reciprocal(dcls, a)
        for k in range(0, pol.max_total - wb + 1):
            term = base
            if c - k > 0:
                term = term * nilpotent_reciprocal(dcls, c - k)
            contact = -c + k
            scale = Fraction(1, math.factorial(k))
            for z, el in term.terms.items():
                for alpha, shift, pcls in pref:
                    zf = z + 1 + shift - k
                    if zf < lo:
                        continue
                    if zf > hi:
                        raise WindowError(f"extended term at z^{zf} above window top {hi}")
                    val = (el * pcls).scale(scale)
                    if val.is_zero():
                        continue
                    stored = val if contact == 0 else r(val)
                    if stored.is_zero():
                        continue
                    key = (beta, k, contact, zf, alpha)
                    cur = terms.get(key)
                    terms[key] = stored if cur is None else cur + stored
                    if terms[key].is_zero():
                        del terms[key]
    return RelativeSeries(geom, terms, (lo, hi))


# ---------------------------------------------------------------------------
# normalization and the mirror map


@dataclass(frozen=True)
class MirrorExponent:
    """The change-of-variables exponent g extracted from a mirror map."""

    g: NovikovSeries
    contact_one: NovikovSeries  # [1]_{-1} components, reported, never summed into g


@dataclass(frozen=True)
class NormalizedI:
    unit_part: StateSeries        # I1 = z^1 slice
    constant_part: StateSeries    # I0 = z^0 slice of I
    j_function: RelativeSeries    # I · reciprocal(I1)
    mirror_map: StateSeries       # z^0 slice of J
    exponent: MirrorExponent


def normalize_i(I: RelativeSeries, z_floor: int | None = None) -> NormalizedI:
    """Split off I1 and I0 and normalize to the J-shaped series.

    Verifies the shape J = z·[1]_0 + (z^0 part) + O(z^{-1}): nothing above z^1
    and the z^1 slice exactly the unit state.  Raises on violation.
    """
    geom = I.geometry
    i1 = I.z_slice(1)
    i0 = I.z_slice(0)
    top = I.top_z()
    if top is not None and top > 1:
        raise ValueError(f"I-function has content at z^{top} > z^1; shape check failed")
    if i1 == StateSeries.unit(geom):
        J = I
    else:
        recip = i1.reciprocal()
        J = I.mul_state(recip, z_floor=z_floor)
    j1 = J.z_slice(1)
    if j1 != StateSeries.unit(geom):
        raise ValueError("normalized series does not have unit z^1 slice")
    tau = J.z_slice(0)
    return NormalizedI(i1, i0, J, tau, extract_mirror_exponent(tau))


def extract_mirror_exponent(tau: StateSeries) -> MirrorExponent:
    """Read off g = Σ (coefficient of [1]_{-d}, d ≥ 2) and the [1]_{-1} report.

    Negative-contact components must be log-free multiples of the divisor unit;
    anything else raises MalformedMirrorMapError.
    """
    geom = tau.geometry
    pol = geom.policy
    g_terms: dict[tuple[int, ...], Fraction] = {}
    one_terms: dict[tuple[int, ...], Fraction] = {}
    unit_idx = geom.divisor.unit_index
    for (beta, contact, logpow), el in tau.terms.items():
        if contact >= 0:
            continue
        if any(logpow):
            raise MalformedMirrorMapError(
                f"negative-contact mirror-map term at {beta} carries log factors"
            )
        for i, c in enumerate(el.coeffs):
            if c and i != unit_idx:
                raise MalformedMirrorMapError(
                    f"negative-contact mirror-map term at {beta} has non-unit class "
                    f"{geom.divisor.basis[i]}"
                )
        c = el.coeffs[unit_idx]
        if contact == -1:
            one_terms[beta] = one_terms.get(beta, Fraction(0)) + c
        else:
            g_terms[beta] = g_terms.get(beta, Fraction(0)) + c
    return MirrorExponent(
        NovikovSeries(pol, g_terms), NovikovSeries(pol, one_terms)
    )


# ---------------------------------------------------------------------------
# the change of variables


@dataclass(frozen=True)
class MirrorChange:
    """q_i = y_i · exp(m_i · g(y)): the mirror change of variables."""

    m_vector: tuple[int, ...]
    g: NovikovSeries

    @property
    def policy(self) -> TruncationPolicy:
        return self.g.policy

    def contact_weight(self, beta: tuple[int, ...]) -> int:
        return sum(m * b for m, b in zip(self.m_vector, beta))


def composed_exponent(change: MirrorChange) -> NovikovSeries:
    """G(q) = g(y(q)) by fixed-point iteration (max_total rounds pin every term)."""
    pol = change.policy
    G = NovikovSeries.zero(pol)
    for _ in range(pol.max_total + 1):
        nxt = NovikovSeries.zero(pol)
        for beta, c in change.g.terms.items():
            d = change.contact_weight(beta)
            factor = (G * Fraction(-d)).exp()
            mono = NovikovSeries(pol, {beta: c})
            nxt = nxt + mono * factor
        if nxt == G:
            break
        G = nxt
    return G


def inverse_coordinates(change: MirrorChange) -> tuple[NovikovSeries, ...]:
    """The inverse substitution series y_i(q) = q_i · exp(−m_i · G(q))."""
    pol = change.policy
    G = composed_exponent(change)
    out = []
    for i, m in enumerate(change.m_vector):
        e = (G * Fraction(-m)).exp()
        out.append(NovikovSeries.variable(pol, i) * e)
    return tuple(out)


def substitute_inverse(series_y: NovikovSeries, change: MirrorChange) -> NovikovSeries:
    """f(y) ↦ f(y(q)): monomial-wise y^β ↦ q^β · exp(−(D·β)·G(q))."""
    pol = series_y.policy
    G = composed_exponent(change)
    out = NovikovSeries.zero(pol)
    cache: dict[int, NovikovSeries] = {}
    for beta, c in series_y.terms.items():
        d = change.contact_weight(beta)
        if d not in cache:
            cache[d] = (G * Fraction(-d)).exp()
        out = out + NovikovSeries(pol, {beta: c}) * cache[d]
    return out


def substitute_forward(series_q: NovikovSeries, change: MirrorChange) -> NovikovSeries:
    """f(q) ↦ f(q(y)): monomial-wise q^β ↦ y^β · exp((D·β)·g(y))."""
    pol = series_q.policy
    out = NovikovSeries.zero(pol)
    cache: dict[int, NovikovSeries] = {}
    for beta, c in series_q.terms.items():
        d = change.contact_weight(beta)
        if d not in cache:
            cache[d] = (change.g * Fraction(d)).exp()
        out = out + NovikovSeries(pol, {beta: c}) * cache[d]
    return out
