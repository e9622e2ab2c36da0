import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_extensions.errors import VariantMismatch
from dirac_extensions.inequalities import (
    Variant,
    decays_per_decade,
    estimate_infinity,
    hardy_check,
    hardy_variant,
    sharpness_probe,
    trace_probe,
)


def bumps(c, b, r0):
    c, b, r0 = map(np.asarray, (c, b, r0))

    def f(r):
        r = np.asarray(r, dtype=float)[..., None]
        return np.sum(c * np.exp(-b * (r - r0) ** 2), axis=-1)

    def df(r):
        r = np.asarray(r, dtype=float)[..., None]
        return np.sum(-2 * b * (r - r0) * c * np.exp(-b * (r - r0) ** 2), axis=-1)

    return f, df


def test_variant_selection():
    assert hardy_variant(0.0) is Variant.HARDY_BELOW_HALF
    assert hardy_variant(0.5) is Variant.HARDY_AT_HALF
    assert hardy_variant(0.9) is Variant.HARDY_ABOVE_HALF
    with pytest.raises(VariantMismatch):
        hardy_check(np.exp, 0.0, variant="HardyAboveHalf")


def test_worked_example():
    rep = hardy_check(lambda r: r * np.exp(-r), 0.0, lambda r: (1 - r) * np.exp(-r))
    assert rep.variant is Variant.HARDY_BELOW_HALF
    assert rep.lhs == pytest.approx(0.125, abs=1e-10)
    assert rep.rhs == pytest.approx(0.25, abs=1e-10)
    assert rep.passed and rep.pass_


def test_worked_example_numerical_derivative():
    rep = hardy_check(lambda r: r * np.exp(-r), 0.0)
    assert rep.rhs == pytest.approx(0.25, rel=1e-8)


def test_constant_function():
    rep = hardy_check(lambda r: np.full(np.shape(r), 3.0), 0.0, lambda r: np.zeros(np.shape(r)))
    assert rep.lhs == 0 and rep.rhs == 0 and rep.passed


def test_reference_override():
    # with f(0) replaced by a wrong reference the a < 1/2 left side diverges
    rep = hardy_check(lambda r: np.exp(-r), 0.0, lambda r: -np.exp(-r), reference=0.5)
    assert not rep.passed


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-2, 2), min_size=3, max_size=3),
    st.lists(st.floats(0.5, 3), min_size=3, max_size=3),
    st.lists(st.floats(0, 3), min_size=3, max_size=3),
    st.floats(-0.5, 0.45),
    st.floats(0.55, 2.0),
    st.floats(0.5, 3.0),
)
def test_random_bumps_all_variants(c, b, r0, a_low, a_high, R):
    f, df = bumps(c, b, r0)
    for a, RR in ((a_low, 1.0), (a_high, 1.0), (0.5, R)):
        for n in (4000, 8000):
            assert hardy_check(f, a, df, R=RR, n=n).passed


def test_resolution_independence():
    f, df = bumps([1.0, -0.5, 0.2], [1.0, 2.0, 0.7], [0.3, 1.2, 2.5])
    for a in (0.2, 0.8):
        r1 = hardy_check(f, a, df, n=4000)
        r2 = hardy_check(f, a, df, n=8000)
        assert r1.lhs == pytest.approx(r2.lhs, rel=1e-6)
        assert r1.rhs == pytest.approx(r2.rhs, rel=1e-6)


def test_estimate_infinity():
    assert estimate_infinity(lambda r: 2 - 1 / r) == pytest.approx(2, abs=1e-5)


@pytest.mark.parametrize("a", [-1.0, 0.0, 0.3, 0.9, 2.0])
@pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4])
def test_sharpness(a, eps):
    assert abs(sharpness_probe(a, eps) - 1) <= 1e-8


@pytest.mark.parametrize("eps", [1e-1, 1e-2, 1e-3])
def test_sharpness_at_half(eps):
    assert abs(sharpness_probe(0.5, eps) - 1) <= 1e-8


def test_sharpness_rejects_epsilon():
    with pytest.raises(ValueError):
        sharpness_probe(0.0, 0.7)


def test_sharpness_constant_is_optimal():
    # the extremizer nearly attains equality, so no larger constant can hold
    f = lambda r: np.sqrt(np.minimum(r, 1 / np.maximum(r, 1e-300))) * np.exp(-1e-3 * r)  # noqa: E731
    rep = hardy_check(f, 0.0, r_range=(1e-12, 1e4))
    assert rep.ratio > 0.9


def test_trace_examples():
    s = trace_probe(lambda r: r, 0.0, "TraceZero")
    t = np.array([x for x, _ in s])
    np.testing.assert_allclose([v for _, v in s], np.sqrt(t), rtol=1e-12)
    assert decays_per_decade(s)
    s = trace_probe(lambda r: 1 - np.exp(-r), 0.9, "TraceInfinity", decades=3)
    assert s[-1][1] < 1e-100 and decays_per_decade(s)
    s = trace_probe(np.sqrt, 0.0, "TraceZero")
    np.testing.assert_allclose([v for _, v in s], 1.0, rtol=1e-12)
    assert not decays_per_decade(s)


def test_trace_at_r():
    s = trace_probe(lambda r: np.sin(r) * np.exp(-r), 0.5, "TraceAtR", R=math.pi)
    assert decays_per_decade(s)
    # a function with f(0) != f(R) has a bounded but nonvanishing log quotient near 0
    s = trace_probe(lambda r: np.cos(r), 0.5, "TraceAtR", R=math.pi)
    assert not decays_per_decade(s)


def test_trace_variant_guards():
    with pytest.raises(VariantMismatch):
        trace_probe(np.sqrt, 0.7, "TraceZero")
    with pytest.raises(VariantMismatch):
        trace_probe(np.sqrt, 0.2, "TraceInfinity")
    with pytest.raises(VariantMismatch):
        trace_probe(np.sqrt, 0.2, "TraceAtR")
    with pytest.raises(VariantMismatch):
        trace_probe(np.sqrt, 0.2, "HardyBelowHalf")
