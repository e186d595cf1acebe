"""Lagrange inversion, the Bell exponential identity, potential roundtrips.

The inversion oracle below never uses the residue formula: it builds the
inverse order by order, solving each coefficient from the requirement that
the composition residual vanishes.  Agreement with ``lagrange_inverse`` is
therefore a genuine two-route check.
"""

import math
from fractions import Fraction
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mirrorpair import (
    SimplePoleLaurent,
    bell_identity_check,
    compose,
    inversion_roundtrip,
    lagrange_inverse,
    potential_roundtrip,
)
from mirrorpair.inversion import random_exponent, random_simple_pole, random_unit_tail


# ---------------------------------------------------------------------------
# an independent composition + solver (u = 1/omega throughout)


def _umul(a, b, n):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            if ea + eb <= n:
                out[ea + eb] = out.get(ea + eb, Fraction(0)) + ca * cb
    return {e: c for e, c in out.items() if c}


def _urecip(a, n):
    """1/a for a u-polynomial with a[0] != 0, through u^n."""
    inv = {0: 1 / a[0]}
    for k in range(1, n + 1):
        s = sum(a.get(j, Fraction(0)) * inv.get(k - j, Fraction(0)) for j in range(1, k + 1))
        inv[k] = -s / a[0]
    return {e: c for e, c in inv.items() if c}


def _compose_by_hand(f, g, n):
    """f(g) through u^n, for g = Σ_{k>=1} g_k u^k with g_1 != 0."""
    shifted = {k - 1: v for k, v in g.items()}
    one_over_g = _urecip(shifted, n + 1)  # then shift down by one u-power
    out = {e - 1: c for e, c in one_over_g.items() if e - 1 <= n}
    gpow = {0: Fraction(1)}
    for j, fj in enumerate(f.tail):
        if j:
            gpow = _umul(gpow, g, n)
        if fj:
            for e, c in gpow.items():
                if e <= n:
                    out[e] = out.get(e, Fraction(0)) + fj * c
    return {e: c for e, c in out.items() if c}


def _solve_inverse(f, n):
    """Order-by-order: g_k first touches f(g) at u^{k-2} (through 1/g), so
    each coefficient is pinned by zeroing that residual of f(g) - omega."""
    g = {1: Fraction(1)}  # the pole coefficient forces g_1 = 1
    for k in range(2, n + 1):
        resid = _compose_by_hand(f, g, k - 2).get(k - 2, Fraction(0))
        probe = dict(g)
        probe[k] = Fraction(1)
        slope = _compose_by_hand(f, probe, k - 2).get(k - 2, Fraction(0)) - resid
        assert slope != 0
        gk = -resid / slope
        if gk:
            g[k] = gk
    return g


@pytest.mark.parametrize("seed", range(8))
def test_inverse_matches_order_by_order_solver(seed):
    rng = Random(1000 + seed)
    f = random_simple_pole(rng, tail_len=5, bound=6)
    want = _solve_inverse(f, 9)
    got = lagrange_inverse(f, 9)
    assert got == {k: v for k, v in want.items() if v}


# ---------------------------------------------------------------------------
# frozen inverses


def test_bare_pole_inverts_to_itself():
    f = SimplePoleLaurent(())
    assert lagrange_inverse(f, 6) == {1: Fraction(1)}


def test_shifted_pole_has_all_ones_inverse():
    f = SimplePoleLaurent((Fraction(1),))  # x^{-1} + 1
    g = lagrange_inverse(f, 7)
    assert g == {k: Fraction(1) for k in range(1, 8)}


def test_catalan_pattern_inverse():
    # f = x^{-1} + x: g_k = C(k, (k-1)/2)/k for odd k, 0 for even k
    f = SimplePoleLaurent((Fraction(0), Fraction(1)))
    g = lagrange_inverse(f, 9)
    assert g == {1: 1, 3: 1, 5: 2, 7: 5, 9: 14}
    for k in (1, 3, 5, 7, 9):
        assert g[k] == Fraction(math.comb(k, (k - 1) // 2), k)


def test_lagrange_inverse_needs_positive_order():
    with pytest.raises(ValueError):
        lagrange_inverse(SimplePoleLaurent(()), 0)


# ---------------------------------------------------------------------------
# composition


def test_compose_recovers_omega():
    f = SimplePoleLaurent((Fraction(3), Fraction(-2), Fraction(7)))
    g = lagrange_inverse(f, 12)
    assert compose(f, g, 10) == {1: Fraction(1)}


def test_compose_rejects_bad_leading_orders():
    f = SimplePoleLaurent(())
    with pytest.raises(ValueError, match="leading order"):
        compose(f, {}, 5)
    with pytest.raises(ValueError, match="negative"):
        compose(f, {0: Fraction(1), 1: Fraction(1)}, 5)


def test_compose_handles_deeper_leading_order():
    # g = u^2: f(g) = u^{-2} + tail(g); pure bookkeeping, checked by hand
    f = SimplePoleLaurent((Fraction(5),))
    got = compose(f, {2: Fraction(1)}, 4)
    assert got == {2: Fraction(1), 0: Fraction(5)}


def test_roundtrip_without_margin_would_fail():
    """The output window is only clean because the inverse is computed two
    orders deep; composing with the same-order inverse pollutes the tail."""
    rng = Random(7)
    f = random_simple_pole(rng)
    ok, h = inversion_roundtrip(f, 10)
    assert ok, h
    shallow = compose(f, lagrange_inverse(f, 10), 10)
    assert shallow != {1: Fraction(1)}


@pytest.mark.parametrize("seed", range(25))
def test_random_inversion_roundtrips(seed):
    rng = Random(20_000 + seed)
    f = random_simple_pole(rng)
    ok, residual = inversion_roundtrip(f, 10)
    assert ok, residual


# ---------------------------------------------------------------------------
# simple-pole container validation


def test_from_dict_round_trip():
    f = SimplePoleLaurent.from_dict({-1: Fraction(1), 0: Fraction(4), 3: Fraction(-2)})
    assert f.tail == (Fraction(4), Fraction(0), Fraction(0), Fraction(-2))
    assert f.as_dict() == {-1: 1, 0: 4, 3: -2}


def test_from_dict_validation():
    with pytest.raises(ValueError, match="coefficient 1"):
        SimplePoleLaurent.from_dict({-1: Fraction(2), 0: Fraction(1)})
    with pytest.raises(ValueError, match="higher-order pole"):
        SimplePoleLaurent.from_dict({-2: Fraction(1), -1: Fraction(1)})


# ---------------------------------------------------------------------------
# the Bell exponential identity


def test_bell_identity_for_one_plus_x():
    # both sides collapse to the geometric series 1/(1-y)
    report = bell_identity_check((Fraction(1),), 12)
    assert report.ok
    # the right side literally: (1/k)·C(k, k-1) = 1 for every k
    for k in range(1, 13):
        assert Fraction(math.comb(k, k - 1), k) == 1


def test_bell_identity_empty_tail():
    assert bell_identity_check((), 8).ok  # f = 1: both sides are exp(0)-flavored


@pytest.mark.parametrize("seed", range(25))
def test_bell_identity_random_tails(seed):
    rng = Random(31_000 + seed)
    report = bell_identity_check(random_unit_tail(rng), 12)
    assert report.ok, report.mismatches


@given(tail=st.lists(st.integers(min_value=-5, max_value=5).map(Fraction), max_size=4))
@settings(max_examples=40, deadline=None)
def test_bell_identity_property(tail):
    assert bell_identity_check(tuple(tail), 8).ok


# ---------------------------------------------------------------------------
# potential roundtrips


def test_plane_catalog_roundtrip():
    report = potential_roundtrip(
        {1: Fraction(2), 2: Fraction(15), 3: Fraction(560, 3)}, 3, 3)
    assert report.ok
    assert dict(report.computed) == {3: 2, 6: 15, 9: Fraction(560, 3)}
    assert report.computed == report.expected


def test_space_catalog_roundtrip():
    report = potential_roundtrip(
        {1: Fraction(6), 2: Fraction(315), 3: Fraction(30800)}, 4, 3)
    assert report.ok
    assert dict(report.computed) == {4: 6, 8: 315, 12: 30800}


def test_roundtrip_validation():
    with pytest.raises(ValueError, match="positive contact multiplier"):
        potential_roundtrip({1: Fraction(1)}, 0, 3)
    with pytest.raises(ValueError, match="k >= 1"):
        potential_roundtrip({0: Fraction(1)}, 2, 3)


@pytest.mark.parametrize("seed", range(25))
def test_random_exponent_roundtrips(seed):
    rng = Random(45_000 + seed)
    m = rng.choice((1, 2, 3, 4))
    g = random_exponent(rng, 5)
    report = potential_roundtrip(g, m, 5)
    assert report.ok, report.mismatches


def test_flip_connects_potential_to_laurent_picture():
    """[W^K]_{x^0, t^K} equals [f^K]_{x^0} for the x -> 1/x flip of W at t=1.

    Uses the frozen plane potential; the left side is the graded theta
    extraction, the right a plain Laurent power expansion done here inline.
    """
    weights = {3: Fraction(2), 6: Fraction(5), 9: Fraction(32)}
    fd = {-1: Fraction(1)}
    fd.update({d - 1: w for d, w in weights.items()})
    power = {0: Fraction(1)}
    report = potential_roundtrip({1: Fraction(2), 2: Fraction(15), 3: Fraction(560, 3)}, 3, 3)
    recovered = dict(report.computed)
    for K in range(1, 10):
        out = {}
        for e, c in power.items():
            for ef, cf in fd.items():
                out[e + ef] = out.get(e + ef, Fraction(0)) + c * cf
        power = out
        expect = K * recovered.get(K, Fraction(0))
        assert power.get(0, Fraction(0)) == expect, K
