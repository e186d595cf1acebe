"""Quantum, regularized, and classical periods, and the proper potential.

The quantum period collects one-point descendant invariants ⟨[pt] ψ^{d-2}⟩
graded by the divisor pairing d = D·β; its degreewise d!-rescaling is the
regularized quantum period.  On the mirror side, the proper potential is
W = x · exp(G(q)) collapsed along D·β (each class β contributes its mirror
coefficient at t^{D·β} x^{1-D·β}), and the classical period is the constant
term Σ_n [W^n]_{x^0}.  `compare_periods` checks the two sides coefficient by
coefficient in exact arithmetic, with an optional deliberately-perturbed run
(`negative_control`) that must be caught at the first affected degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .geometry import (
    InvariantTable,
    MissingDataError,
    PairGeometry,
    tabulate_one_point_invariants,
)
from .ifunctions import (
    MirrorChange,
    composed_exponent,
    divisor_mirror_map,
    normalize_i,
    relative_i_function,
    substitute_forward,
)
from .series import (
    NovikovSeries,
    TruncationError,
    TruncationPolicy,
    XLaurentSeries,
)


@dataclass(frozen=True)
class PeriodSeries:
    """A power series in t with rational coefficients and constant term 1."""

    kind: str  # "quantum" | "regularized" | "classical"
    t_order: int
    coefficients: tuple[tuple[int, Fraction], ...]

    @staticmethod
    def make(kind: str, t_order: int, coeffs: dict[int, Fraction]) -> "PeriodSeries":
        clean = {d: Fraction(v) for d, v in coeffs.items() if v != 0 and d <= t_order}
        return PeriodSeries(kind, t_order, tuple(sorted(clean.items())))

    def coefficient(self, d: int) -> Fraction:
        if d > self.t_order:
            raise TruncationError(
                f"t^{d} beyond computed order {self.t_order}; rerun with order >= {d}"
            )
        return dict(self.coefficients).get(d, Fraction(0))

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.coefficients)


def quantum_period(geom: PairGeometry, t_order: int) -> PeriodSeries:
    """G(t) = 1 + Σ_{D·β = d ≥ 2} ⟨[pt] ψ^{d-2}⟩_β t^d."""
    dm = divisor_mirror_map(geom)
    if not dm.is_zero():
        raise MissingDataError(
            f"{geom.name}: quantum period at nonzero divisor mirror map needs "
            "deformed invariants: external data required"
        )
    table = tabulate_one_point_invariants(geom, t_order)
    return _quantum_from_rows(geom, table, t_order)


def _quantum_from_rows(
    geom: PairGeometry, table: InvariantTable, t_order: int
) -> PeriodSeries:
    coeffs: dict[int, Fraction] = {0: Fraction(1)}
    for beta, a, v in table.rows_for("x_point"):
        d = geom.contact_weight(beta)
        if d >= 2 and a == d - 2 and d <= t_order:
            coeffs[d] = coeffs.get(d, Fraction(0)) + v
    return PeriodSeries.make("quantum", t_order, coeffs)


def regularize(period: PeriodSeries) -> PeriodSeries:
    if period.kind != "quantum":
        raise ValueError(f"can only regularize a quantum period, got {period.kind}")
    coeffs = {d: v * math.factorial(d) for d, v in period.coefficients}
    return PeriodSeries.make("regularized", period.t_order, coeffs)


# ---------------------------------------------------------------------------
# the proper potential


@dataclass(frozen=True)
class ProperPotential:
    """W = x + Σ_{β≠0} w_β t^{D·β} x^{1-D·β}, with the per-class terms kept."""

    geometry_name: str
    m_vector: tuple[int, ...]
    policy: TruncationPolicy
    exponent: NovikovSeries          # g, in the curve variables y
    composed: NovikovSeries          # G = g(y(q)), in the flat variables q
    terms: tuple[tuple[tuple[int, ...], Fraction], ...]  # β ≠ 0 -> w_β

    def contact_weight(self, beta) -> int:
        return sum(m * b for m, b in zip(self.m_vector, beta))

    def as_dict(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self.terms)

    def collapse(self, t_order: int | None = None) -> XLaurentSeries:
        """The single-variable view: every class lands at t^{D·β} x^{1-D·β}."""
        degrees = [self.contact_weight(b) for b, _ in self.terms]
        if t_order is None:
            t_order = max(degrees, default=0)
        w = XLaurentSeries.monomial(t_order, 1, 0, 1)
        for (beta, c), d in zip(self.terms, degrees):
            if d < 2:
                raise ValueError(
                    f"potential term at {beta} has contact weight {d} < 2; "
                    "cannot collapse"
                )
            if d <= t_order:
                w = w + XLaurentSeries.monomial(t_order, 1 - d, d, c)
        return w


def _working_geometry(geom: PairGeometry, t_order: int | None) -> PairGeometry:
    if t_order is None:
        return geom
    if all(m > 0 for m in geom.m_vector):
        need = max(t_order // min(geom.m_vector), 1)
    else:
        need = t_order
    pol = geom.policy
    fresh = TruncationPolicy.make(pol.nvars, max_total=need, weights=pol.weights)
    return geom.with_policy(fresh)


def proper_potential(geom: PairGeometry, t_order: int | None = None) -> ProperPotential:
    """Run the mirror pipeline and exponentiate the change of variables.

    With t_order given, the truncation order is chosen so every class with
    D·β ≤ t_order is covered; otherwise the geometry's own policy is used.
    """
    work = _working_geometry(geom, t_order)
    norm = normalize_i(relative_i_function(work), z_floor=0)
    g = norm.exponent.g
    change = MirrorChange(work.m_vector, g)
    G = composed_exponent(change)
    S = G.exp()
    terms = {b: c for b, c in S.terms.items() if any(b)}
    return ProperPotential(
        geom.name,
        work.m_vector,
        work.policy,
        g,
        G,
        tuple(sorted(terms.items())),
    )


def theta_coefficient(w: XLaurentSeries, n: int) -> Fraction:
    """[W^n]_{x^0}: by (x,t)-homogeneity this is supported exactly at t^n.

    The support claim is asserted; a potential that violates it is malformed.
    """
    if w.t_order < n:
        raise TruncationError(
            f"potential truncated at t^{w.t_order}; rerun with order >= {n}"
        )
    x0 = w.power(n).x_coefficient(0)
    stray = {t: c for t, c in x0.items() if t != n and c != 0}
    if stray:
        raise ValueError(
            f"constant term of W^{n} has support at t-degrees {sorted(stray)} != {n}"
        )
    return x0.get(n, Fraction(0))


def classical_period(w: XLaurentSeries, t_order: int) -> PeriodSeries:
    """π(t) = Σ_{n≥0} [W^n]_{x^0} t-degree by t-degree."""
    coeffs: dict[int, Fraction] = {0: Fraction(1)}
    running = XLaurentSeries.monomial(w.t_order, 0, 0, 1)
    for n in range(1, t_order + 1):
        running = running * w
        x0 = running.x_coefficient(0)
        stray = {t: c for t, c in x0.items() if t != n and c != 0}
        if stray:
            raise ValueError(
                f"constant term of W^{n} has support at t-degrees {sorted(stray)} != {n}"
            )
        v = x0.get(n, Fraction(0))
        if v:
            coeffs[n] = v
    return PeriodSeries.make("classical", t_order, coeffs)


# ---------------------------------------------------------------------------
# the two-sided comparison


@dataclass(frozen=True)
class PeriodComparison:
    geometry_name: str
    t_order: int
    rows: tuple[tuple[int, Fraction, Fraction, bool], ...]  # (d, classical, regularized, ok)
    all_match: bool
    first_mismatch: int | None
    negative_control: bool
    expected_mismatch_degree: int | None

    @property
    def passed(self) -> bool:
        if not self.negative_control:
            return self.all_match
        return (not self.all_match) and self.first_mismatch == self.expected_mismatch_degree


def compare_periods(
    geom: PairGeometry, t_order: int, negative_control: bool = False
) -> PeriodComparison:
    """Regularized quantum period versus classical period of the potential.

    The classical side always runs on the geometry's own data.  Under
    negative_control the quantum-side table alone gets its lowest-degree
    entry bumped by 1, and passing means the mismatch is flagged exactly at
    that degree.
    """
    table = tabulate_one_point_invariants(geom, t_order)
    rows = list(table.rows_for("x_point"))
    expected_deg: int | None = None
    if negative_control:
        graded = sorted(
            (geom.contact_weight(b), i)
            for i, (b, a, v) in enumerate(rows)
            if geom.contact_weight(b) >= 2 and a == geom.contact_weight(b) - 2
        )
        if not graded:
            raise MissingDataError(
                f"{geom.name}: no quantum-side entries to perturb for the control run"
            )
        expected_deg, idx = graded[0]
        b, a, v = rows[idx]
        rows[idx] = (b, a, v + 1)
    perturbed = InvariantTable(
        tuple((("x_point", tuple(b), a), v) for b, a, v in rows)
    )
    quantum = _quantum_from_rows(geom, perturbed, t_order)
    reg = regularize(quantum)

    pot = proper_potential(geom, t_order)
    classical = classical_period(pot.collapse(t_order), t_order)

    out_rows = []
    first = None
    for d in range(0, t_order + 1):
        c = classical.coefficient(d)
        r = reg.coefficient(d)
        ok = c == r
        if not ok and first is None:
            first = d
        out_rows.append((d, c, r, ok))
    return PeriodComparison(
        geom.name,
        t_order,
        tuple(out_rows),
        first is None,
        first,
        negative_control,
        expected_deg,
    )


# ---------------------------------------------------------------------------
# the Euler-scaling identity of the change of variables


@dataclass(frozen=True)
class EulerScalingReport:
    geometry_name: str
    order: int
    coefficient_identity_ok: bool  # L == R
    scaling_ok: bool               # Δ_D L == Δ_D R
    display_ok: bool               # G·exp(-g)·(1 + Σ n_β u_β q^β(y)) == G
    endpoint_y_ok: bool            # 1 + Σ n_β u_β q^β(y) == exp(g)
    endpoint_q_ok: bool            # 1 + Σ n_β u_β q^β == exp(G)
    details: str

    @property
    def all_ok(self) -> bool:
        return (
            self.coefficient_identity_ok
            and self.scaling_ok
            and self.display_ok
            and self.endpoint_y_ok
            and self.endpoint_q_ok
        )


def _first_difference(a: NovikovSeries, b: NovikovSeries) -> str:
    keys = sorted(set(a.terms) | set(b.terms), key=lambda k: (sum(k), k))
    for k in keys:
        va = a.terms.get(k, Fraction(0))
        vb = b.terms.get(k, Fraction(0))
        if va != vb:
            return f"first difference at y^{k}: {va} != {vb}"
    return ""


def euler_scaling_check(geom: PairGeometry) -> EulerScalingReport:
    """Exact checks of the scaling identity tying the potential to the exponent.

    With n_β = D·β − 1 and u_β = w_β / n_β:
      * endpoint: 1 + Σ n_β u_β q^β(y) == exp(g(y)), and its q-variable twin;
      * coefficient identity: exp(-g)·Σ u_β q^β(y) − exp(-g) + 1
        == Σ g_β · (D·β)/(D·β−1) · y^β;
      * the Euler-scaling operator Δ_D f = Σ m_i y_i ∂_i f − f applied to both
        sides agrees (the operator is re-applied from scratch on each side);
      * the display form G·exp(-g)·(1 + Σ n_β u_β q^β(y)) == G with
        G = Σ m_i y_i ∂_i g rebuilt through the derivation operator.
    """
    pol = geom.policy
    norm = normalize_i(relative_i_function(geom), z_floor=0)
    g = norm.exponent.g
    m = geom.m_vector
    change = MirrorChange(m, g)
    Gq = composed_exponent(change)
    S = Gq.exp()

    one = NovikovSeries.one(pol)
    u_q = NovikovSeries.zero(pol)
    nu_q = NovikovSeries.zero(pol)
    for beta, w in S.terms.items():
        if not any(beta):
            continue
        d = change.contact_weight(beta)
        if d < 2:
            raise ValueError(
                f"{geom.name}: potential term at {beta} has contact weight {d} < 2"
            )
        mono = NovikovSeries(pol, {beta: Fraction(1)})
        u_q = u_q + mono * (w / (d - 1))
        nu_q = nu_q + mono * w

    u_y = substitute_forward(u_q, change)
    nu_y = substitute_forward(nu_q, change)

    endpoint_y = (one + nu_y) == g.exp()
    endpoint_q = (one + nu_q) == Gq.exp()

    E = (g * Fraction(-1)).exp()
    L = E * u_y - E + one
    R = NovikovSeries.zero(pol)
    for beta, c in g.terms.items():
        d = change.contact_weight(beta)
        if d < 2:
            raise ValueError(
                f"{geom.name}: exponent term at {beta} has contact weight {d} < 2"
            )
        R = R + NovikovSeries(pol, {beta: c * Fraction(d, d - 1)})
    ident = L == R

    dL = L.weighted_scaling(m) - L
    dR = R.weighted_scaling(m) - R
    scaling = dL == dR

    Gy = g.weighted_scaling(m)
    display = (Gy * E * (one + nu_y)) == Gy

    details = ""
    if not ident:
        details = _first_difference(L, R)
    elif not endpoint_y:
        details = _first_difference(one + nu_y, g.exp())

    return EulerScalingReport(
        geom.name, pol.max_total, ident, scaling, display, endpoint_y, endpoint_q, details
    )


def roundtrip_for_geometry(geom: PairGeometry):
    """Exercise the potential roundtrip on the geometry's own mirror exponent.

    Single-variable geometries pass (g, m) straight through; multi-variable
    exponents are collapsed along D·β first, after which the change of
    variables has multiplier 1.  Returns the inversion module's report.
    """
    from .inversion import potential_roundtrip

    pot = proper_potential(geom)
    g = pot.exponent
    if len(geom.m_vector) == 1 and geom.m_vector[0] >= 1:
        coeffs = {b[0]: c for b, c in g.terms.items()}
        return potential_roundtrip(coeffs, geom.m_vector[0], geom.policy.max_total)
    coeffs: dict[int, Fraction] = {}
    for beta, c in g.terms.items():
        d = pot.contact_weight(beta)
        if d < 2:
            raise ValueError(
                f"{geom.name}: exponent term at {beta} has contact weight {d} < 2"
            )
        coeffs[d] = coeffs.get(d, Fraction(0)) + c
    return potential_roundtrip(coeffs, 1, geom.policy.max_total)
