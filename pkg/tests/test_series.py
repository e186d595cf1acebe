"""Truncated Novikov series, windowed z-Laurent data, and x-Laurent layers.

Every assertion is exact rational equality; there is no float tolerance
anywhere in this suite.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mirrorpair import (
    NovikovSeries,
    TruncationError,
    TruncationPolicy,
    WindowError,
    XLaurentSeries,
    ZLaurentElement,
    builtin_geometry,
    nilpotent_reciprocal,
)

POL1 = TruncationPolicy.make(1, 8)
POL2 = TruncationPolicy.make(2, 6)


def y(c=1, e=1):
    return NovikovSeries(POL1, {(e,): Fraction(c)})


# ---------------------------------------------------------------------------
# truncation policy


def test_policy_defaults():
    p = TruncationPolicy.make(2)
    assert p.max_total == 8
    assert p.weights == (1, 1)
    assert p.z_window == (-11, 1)


def test_policy_validation():
    with pytest.raises(ValueError, match="positive"):
        TruncationPolicy.make(1, 4, weights=(0,))
    with pytest.raises(ValueError, match="mismatch"):
        TruncationPolicy.make(2, 4, weights=(1,))
    with pytest.raises(ValueError, match=r"\[-1, 1\]"):
        TruncationPolicy.make(1, 4, z_window=(0, 1))
    with pytest.raises(ValueError, match=r"\[-1, 1\]"):
        TruncationPolicy.make(1, 4, z_window=(-5, 0))


def test_policy_weighted_admission():
    p = TruncationPolicy.make(2, 6, weights=(2, 3))
    assert p.admits((3, 0))
    assert p.admits((0, 2))
    assert not p.admits((2, 1))
    with pytest.raises(ValueError):
        p.admits((-1, 0))


# ---------------------------------------------------------------------------
# Novikov series: frozen spot values


def test_product_of_binomials():
    f = NovikovSeries(POL1, {(0,): 1, (1,): 1})   # 1 + y
    g = NovikovSeries(POL1, {(0,): 1, (1,): -1})  # 1 - y
    assert f * g == NovikovSeries(POL1, {(0,): 1, (2,): -1})


def test_monomials_multiply_by_adding_exponents():
    a = NovikovSeries(POL2, {(1, 0): 1})
    b = NovikovSeries(POL2, {(0, 1): 1})
    assert (a * b).coefficient((1, 1)) == 1


def test_exp_spot_value():
    # exp(6y) carries 36/2 = 18 at y^2
    e = y(6).exp()
    assert e.coefficient((0,)) == 1
    assert e.coefficient((1,)) == 6
    assert e.coefficient((2,)) == 18
    assert e.coefficient((3,)) == 36


def test_exp_requires_no_constant_term():
    with pytest.raises(ValueError):
        NovikovSeries(POL1, {(0,): 1, (1,): 1}).exp()


def test_log_exp_roundtrip():
    f = NovikovSeries(POL1, {(1,): 2, (2,): 15})
    assert f.exp().log() == f


def test_log_needs_unit_constant():
    with pytest.raises(ValueError):
        y(3).log()


def test_reciprocal_spot_value():
    f = NovikovSeries(POL1, {(0,): 1, (1,): 24})
    r = f.reciprocal()
    assert r.coefficient((1,)) == -24
    assert r.coefficient((2,)) == 576
    assert f * r == NovikovSeries.one(POL1)


def test_reciprocal_alternating_signs():
    f = NovikovSeries(POL1, {(0,): 1, (1,): 1})
    r = f.reciprocal()
    for k in range(9):
        assert r.coefficient((k,)) == (-1) ** k


def test_euler_derive():
    f = NovikovSeries(POL1, {(2,): 1})
    assert f.euler_derive(0) == NovikovSeries(POL1, {(2,): 2})
    g = NovikovSeries(POL2, {(1, 2): 5})
    assert g.euler_derive(0).coefficient((1, 2)) == 5
    assert g.euler_derive(1).coefficient((1, 2)) == 10


def test_weighted_scaling():
    # Σ_i m_i y_i ∂_i acting on 24y with weight 3 gives 72y
    f = y(24)
    assert f.weighted_scaling((3,)) == NovikovSeries(POL1, {(1,): 72})
    g = NovikovSeries(POL2, {(2, 1): 1})
    assert g.weighted_scaling((-1, 1)).coefficient((2, 1)) == -1


def test_truncation_drops_heavy_terms():
    p = TruncationPolicy.make(1, 3)
    f = NovikovSeries(p, {(3,): 1})
    g = NovikovSeries(p, {(1,): 1})
    assert (f * g).is_zero()


def test_coefficient_past_order_raises():
    with pytest.raises(TruncationError, match="rerun"):
        y().coefficient((9,))


def test_policy_shape_mismatch_rejected():
    other = TruncationPolicy.make(1, 5)
    with pytest.raises(ValueError):
        y() + NovikovSeries(other, {(1,): 1})


# ---------------------------------------------------------------------------
# Novikov series: algebraic laws on random data


def _series(policy):
    exps = st.tuples(*[st.integers(min_value=0, max_value=3)] * policy.nvars)
    return st.dictionaries(
        exps, st.integers(min_value=-6, max_value=6).map(Fraction), max_size=5
    ).map(lambda d: NovikovSeries(policy, d))


@given(f=_series(POL2), g=_series(POL2), h=_series(POL2))
@settings(max_examples=60, deadline=None)
def test_ring_axioms(f, g, h):
    assert f * g == g * f
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert f + (-f) == NovikovSeries.zero(POL2)


@given(f=_series(POL2), g=_series(POL2))
@settings(max_examples=40, deadline=None)
def test_exp_is_a_homomorphism(f, g):
    f = f - NovikovSeries.constant(POL2, f.constant_term())
    g = g - NovikovSeries.constant(POL2, g.constant_term())
    assert (f + g).exp() == f.exp() * g.exp()


@given(f=_series(POL2))
@settings(max_examples=40, deadline=None)
def test_reciprocal_is_two_sided(f):
    f = f + NovikovSeries.one(POL2) - NovikovSeries.constant(POL2, f.constant_term())
    r = f.reciprocal()
    assert f * r == NovikovSeries.one(POL2)
    assert r * f == NovikovSeries.one(POL2)


@given(f=_series(POL2))
@settings(max_examples=40, deadline=None)
def test_log_inverts_exp(f):
    f = f - NovikovSeries.constant(POL2, f.constant_term())
    assert f.exp().log() == f


# ---------------------------------------------------------------------------
# z-Laurent data over a finite graded algebra


AMB = builtin_geometry("p2_cubic").ambient
H = AMB.named("H")
H2 = AMB.named("H2")
ONE = AMB.unit()


def test_nilpotent_reciprocal_of_linear_class():
    r = nilpotent_reciprocal(H, 1)
    assert r.coefficient(-1) == ONE
    assert r.coefficient(-2) == -H
    assert r.coefficient(-3) == H2
    assert r.coefficient(-4).is_zero()


def test_nilpotent_reciprocal_multiplies_back():
    for a in (1, 2, -1, 5):
        lin = ZLaurentElement.linear(H, a)
        assert lin * nilpotent_reciprocal(H, a) == ZLaurentElement.one(AMB)


def test_nilpotent_reciprocal_rejects_zero_slope():
    with pytest.raises(ValueError):
        nilpotent_reciprocal(H, 0)


def test_projective_space_factor_chain():
    # 1/((H+z)(H+2z)) assembled factor by factor, checked by multiplying back
    r = nilpotent_reciprocal(H, 1) * nilpotent_reciprocal(H, 2)
    back = r * ZLaurentElement.linear(H, 1) * ZLaurentElement.linear(H, 2)
    assert back == ZLaurentElement.one(AMB)


def test_exact_constructor_drops_zero_terms():
    z = ZLaurentElement.exact(AMB, {0: AMB.zero(), 1: H})
    assert list(z.terms) == [1]
    assert z.is_exact()


def test_window_storage_discipline():
    # above the declared top: refuse loudly; below the bottom: drop silently
    with pytest.raises(WindowError):
        ZLaurentElement(AMB, {2: H}, (-3, 1))
    z = ZLaurentElement(AMB, {-5: H, 0: ONE}, (-3, 1))
    assert list(z.terms) == [0]


def test_window_coefficient_reads():
    z = ZLaurentElement(AMB, {-1: H}, (-2, 1))
    assert z.coefficient(-1) == H
    assert z.coefficient(5).is_zero()        # above the top: known zero
    assert z.coefficient(-2).is_zero()       # inside the window: known value
    with pytest.raises(WindowError, match="widen the z-window"):
        z.coefficient(-3)                    # below the bottom: unknown


def test_restrict_window_rules():
    z = ZLaurentElement.exact(AMB, {0: ONE, 1: H})
    narrowed = z.restrict_window((-2, 1))
    assert narrowed.window == (-2, 1)
    with pytest.raises(WindowError):
        narrowed.restrict_window((-5, 1))    # widening downwards is unsound
    with pytest.raises(WindowError):
        z.restrict_window((-2, 0))           # would hide a nonzero z^1 term


def test_window_of_product():
    a = ZLaurentElement(AMB, {0: ONE}, (-2, 0))
    b = ZLaurentElement.exact(AMB, {-1: H, 1: H})
    prod = a * b
    assert prod.window == (-1, 1)
    s = ZLaurentElement(AMB, {0: ONE}, (-4, 2))
    assert (a * s).window == (-2 + 2, 0 + 2)


elem3 = st.lists(
    st.integers(min_value=-4, max_value=4).map(Fraction), min_size=3, max_size=3
).map(lambda c: AMB.element(tuple(c)))
laurent = st.dictionaries(
    st.integers(min_value=-4, max_value=2), elem3, max_size=4
).map(lambda d: ZLaurentElement.exact(AMB, d))


@given(a=laurent, b=laurent, lo=st.integers(min_value=-4, max_value=-1))
@settings(max_examples=60, deadline=None)
def test_windowed_product_agrees_with_exact_product(a, b, lo):
    """Soundness of the window rule: within the declared window of a product
    with one truncated factor, every coefficient must agree with the fully
    exact computation."""
    exact = a * b
    _, ha = a._bounds()
    cut = ZLaurentElement(AMB, {k: v for k, v in a.terms.items() if k >= lo}, (lo, max(ha, 1)))
    prod = cut * b
    wlo, whi = prod.window
    for k in range(wlo, whi + 1):
        assert prod.coefficient(k) == exact.coefficient(k)
    for k in range(whi + 1, whi + 4):
        assert exact.coefficient(k).is_zero()


@given(a=laurent, b=laurent)
@settings(max_examples=30, deadline=None)
def test_exact_laurent_commutes_and_distributes(a, b):
    assert a * b == b * a
    assert a * (b + b) == a * b + a * b


# ---------------------------------------------------------------------------
# x-Laurent series with t-coefficients


def test_xlaurent_monomial_and_product():
    x = XLaurentSeries.monomial(6, 1, 0, 1)
    w = x + XLaurentSeries.monomial(6, -2, 3, 2)
    sq = w * w
    assert sq.coefficient(2, 0) == 1
    assert sq.coefficient(-1, 3) == 4
    assert sq.coefficient(-4, 6) == 4


def test_xlaurent_power_matches_repeated_product():
    w = XLaurentSeries.monomial(9, 1, 0, 1) + XLaurentSeries.monomial(9, -2, 3, 2)
    by_power = w.power(5)
    by_mult = w
    for _ in range(4):
        by_mult = by_mult * w
    assert by_power == by_mult


def test_xlaurent_truncates_in_t():
    w = XLaurentSeries.monomial(4, 0, 3, 1)
    assert (w * w).coefficient(0, 4) == 0  # t^6 fell off the order-4 grid
    with pytest.raises(TruncationError, match="rerun with order >= 9"):
        w.coefficient(0, 9)


def test_xlaurent_coefficient_lookup():
    w = XLaurentSeries.monomial(5, -3, 2, Fraction(7, 2))
    assert w.x_coefficient(-3) == {2: Fraction(7, 2)}
    assert w.x_coefficient(0) == {}
