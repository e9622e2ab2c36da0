r"""Weighted one-dimensional Hardy inequalities and trace limits.

For a real exponent ``a`` and f with :math:`\int_0^\infty |f'|^2 r^{2a} dr < \infty`,

.. math::

    (a - 1/2)^2 \int_0^\infty \frac{|f(r) - f(\mathrm{ref})|^2}{r^{2-2a}} dr
    \le \int_0^\infty |f'(r)|^2 r^{2a} dr,

with ref = 0 for a < 1/2 and ref = +inf for a > 1/2.  At a = 1/2 the
weight becomes 1 / (4 r log^2(R/r)) and the reference value is f(R).

All integrals are trapezoid sums in s = log r, which converge spectrally
for the smooth, decaying integrands used here; power-law (or, at a = 1/2,
inverse-log-square) tails below the first node are added in closed form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import VariantMismatch

PASS_SLACK = 1e-10
TRUNCATION = 1e-18


class Variant(str, enum.Enum):
    HARDY_BELOW_HALF = "HardyBelowHalf"
    HARDY_ABOVE_HALF = "HardyAboveHalf"
    HARDY_AT_HALF = "HardyAtHalf"
    TRACE_ZERO = "TraceZero"
    TRACE_INFINITY = "TraceInfinity"
    TRACE_AT_R = "TraceAtR"


@dataclass(frozen=True)
class InequalityReport:
    variant: Variant
    lhs: float
    rhs: float
    ratio: float
    passed: bool

    @property
    def pass_(self) -> bool:
        return self.passed


def hardy_variant(a: float) -> Variant:
    if a < 0.5:
        return Variant.HARDY_BELOW_HALF
    if a > 0.5:
        return Variant.HARDY_ABOVE_HALF
    return Variant.HARDY_AT_HALF


def _log_trapezoid(g: np.ndarray, h: float) -> float:
    """Trapezoid sum of g(s) ds on a uniform s-grid."""
    return float(h * (g.sum() - 0.5 * (g[0] + g[-1])))


def _power_tail(g: np.ndarray, h: float) -> float:
    """Integral of g(s) ds below the first node, assuming g ~ C e^{p s} there."""
    if g[0] <= 0 or g[1] <= 0:
        return 0.0
    p = math.log(g[1] / g[0]) / h
    return g[0] / p if p > 1e-3 else 0.0


def _cutoff(values: np.ndarray, r: np.ndarray) -> float:
    """Largest r after which the integrand stays below TRUNCATION x peak."""
    peak = float(np.max(values))
    if peak == 0 or not math.isfinite(peak):
        return float(r[-1])
    above = np.nonzero(values > TRUNCATION * peak)[0]
    return float(r[min(above[-1] + 1, r.size - 1)])


def _derivative(f: Callable, df: Optional[Callable], r: np.ndarray, h: float) -> np.ndarray:
    if df is not None:
        return np.asarray(df(r), dtype=complex)
    # fourth-order central difference in s = log r
    s = np.log(r)
    stencil = [f(np.exp(s + j * h)) for j in (-2, -1, 1, 2)]
    ds = (stencil[0] - 8 * stencil[1] + 8 * stencil[2] - stencil[3]) / (12 * h)
    return np.asarray(ds, dtype=complex) / r


def estimate_infinity(f: Callable, r_far: float = 1e6) -> complex:
    """f(+inf) as the mean over the last sampled decade [r_far/10, r_far]."""
    r = np.geomspace(r_far / 10, r_far, 101)
    return complex(np.mean(np.asarray(f(r), dtype=complex)))


def hardy_check(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    df: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    R: float = 1.0,
    variant: Variant | str | None = None,
    reference: complex | None = None,
    n: int = 4000,
    r_range: tuple[float, float] = (1e-12, 1e6),
) -> InequalityReport:
    """Evaluate both sides of the weighted Hardy inequality for exponent ``a``.

    Parameters
    ----------
    f, df : callable
        The function and (optionally) its derivative, vectorized over r.
        Without ``df`` a fourth-order difference in log r is used.
    a : float
        Weight exponent; selects the variant.
    R : float
        Reference radius of the a = 1/2 variant.
    variant : Variant, optional
        Must agree with ``a`` when given.
    reference : complex, optional
        Overrides f(0), f(+inf) or f(R).
    n : int
        Number of log-spaced nodes after truncation.
    """
    expected = hardy_variant(a)
    if variant is not None and Variant(variant) is not expected:
        raise VariantMismatch(f"a = {a} selects {expected.value}, not {Variant(variant).value}")
    lo, hi = r_range
    if reference is None:
        if expected is Variant.HARDY_BELOW_HALF:
            reference = complex(np.asarray(f(np.array([0.0])), dtype=complex)[0])
        elif expected is Variant.HARDY_ABOVE_HALF:
            reference = estimate_infinity(f, hi)
        else:
            reference = complex(np.asarray(f(np.array([R])), dtype=complex)[0])

    def integrands(r, h):
        diff = np.abs(np.asarray(f(r), dtype=complex) - reference) ** 2
        deriv = np.abs(_derivative(f, df, r, h)) ** 2
        if expected is Variant.HARDY_AT_HALF:
            L = np.log(R / r)
            with np.errstate(divide="ignore", invalid="ignore"):
                left = 0.25 * diff / (r * L**2)
            # removable singularity at r = R: |f(r) - f(R)|^2 / log^2 -> R^2 |f'(R)|^2
            close = np.abs(L) < 1e-6
            if np.any(close):
                left = np.where(close, 0.25 * R * deriv, left)
            right = deriv * r
        else:
            left = (a - 0.5) ** 2 * diff * r ** (2 * a - 2)
            right = deriv * r ** (2 * a)
        return left, right

    coarse = np.geomspace(lo, hi, 2001)
    lc, rc = integrands(coarse, math.log(coarse[1] / coarse[0]))
    top = max(_cutoff(lc * coarse, coarse), _cutoff(rc * coarse, coarse))
    if expected is Variant.HARDY_AT_HALF:
        top = max(top, 2 * R)
    r = np.geomspace(lo, top, n)
    h = math.log(r[1] / r[0])
    left, right = integrands(r, h)
    gl, gr = left * r, right * r
    lhs = _log_trapezoid(gl, h)
    rhs = _log_trapezoid(gr, h)
    if expected is Variant.HARDY_AT_HALF:
        # g ~ C / log^2(R/r) below r[0]; the tail is g[0] log(R/r[0])
        lhs += float(gl[0] * math.log(R / r[0]))
    else:
        lhs += _power_tail(gl, h)
    rhs += _power_tail(gr, h)
    passed = lhs <= rhs * (1 + PASS_SLACK)
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    return InequalityReport(expected, float(lhs), float(rhs), float(ratio), bool(passed))


def sharpness_probe(a: float, epsilon: float, n: int = 20001, R: float = 1.0) -> float:
    """Ratio of the derivative side to the Hardy side for the truncated extremizer.

    For a != 1/2 the extremizer is f_a = r^{1/2 - a} on [eps, 1/eps] and both
    weighted integrands equal (a - 1/2)^2 / r.  For a = 1/2 the family
    f = log(R/r)^{-1/2} on [eps^2 R, eps R] is used with reference value 0;
    both integrands are then 1 / (4 r log^3(R/r)).  Derivatives are taken
    numerically, so the ratio measures the quadrature error only.
    """
    if not (1e-6 < epsilon < 0.5):
        raise ValueError(f"epsilon must lie in (1e-6, 0.5), got {epsilon}")
    if a == 0.5:
        r = np.geomspace(epsilon**2 * R, epsilon * R, n)

        def f(x):
            return np.log(R / x) ** -0.5

        h = math.log(r[1] / r[0])
        deriv = _derivative(f, None, r, h).real
        L = np.log(R / r)
        left = 0.25 * f(r) ** 2 / (r * L**2)
        right = deriv**2 * r
    else:
        r = np.geomspace(epsilon, 1 / epsilon, n)

        def f(x):
            return x ** (0.5 - a)

        h = math.log(r[1] / r[0])
        deriv = _derivative(f, None, r, h).real
        left = (a - 0.5) ** 2 * f(r) ** 2 * r ** (2 * a - 2)
        right = deriv**2 * r ** (2 * a)
    return _log_trapezoid(right * r, h) / _log_trapezoid(left * r, h)


def trace_probe(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    variant: Variant | str,
    R: float = 1.0,
    reference: complex | None = None,
    decades: int | None = None,
    per_decade: int = 4,
) -> list[tuple[float, float]]:
    """Scaled boundary differences along a geometric approach to the limit point.

    TraceZero:     |f(t) - f(0)| t^{-(1/2 - a)},  t = 10^-1 ... 10^-(1+decades)
    TraceInfinity: |f(t) - f(inf)| t^{a - 1/2},    t = 10^0 ... 10^decades
    TraceAtR:      |f(t) - f(R)| / log(R/t),       t = R 10^-1 ... R 10^-(1+decades)

    The last variant is read as t -> 0: approaching R itself the quotient
    tends to R |f'(R)| and carries no information.
    """
    variant = Variant(variant)
    if decades is None:
        decades = 6
    steps = decades * per_decade + 1
    if variant is Variant.TRACE_ZERO:
        if a >= 0.5:
            raise VariantMismatch("TraceZero needs a < 1/2")
        t = np.logspace(-1, -1 - decades, steps)
        ref = complex(np.asarray(f(np.array([0.0])), dtype=complex)[0]) if reference is None else reference
        vals = np.abs(np.asarray(f(t), dtype=complex) - ref) * t ** (a - 0.5)
    elif variant is Variant.TRACE_INFINITY:
        if a <= 0.5:
            raise VariantMismatch("TraceInfinity needs a > 1/2")
        t = np.logspace(0, decades, steps)
        ref = estimate_infinity(f, 10.0 ** (decades + 4)) if reference is None else reference
        vals = np.abs(np.asarray(f(t), dtype=complex) - ref) * t ** (a - 0.5)
    elif variant is Variant.TRACE_AT_R:
        if a != 0.5:
            raise VariantMismatch("TraceAtR needs a = 1/2")
        t = R * np.logspace(-1, -1 - decades, steps)
        ref = complex(np.asarray(f(np.array([R])), dtype=complex)[0]) if reference is None else reference
        vals = np.abs(np.asarray(f(t), dtype=complex) - ref) / np.log(R / t)
    else:
        raise VariantMismatch(f"{variant.value} is not a trace variant")
    return [(float(ti), float(vi)) for ti, vi in zip(t, vals)]


def decays_per_decade(samples: list[tuple[float, float]], factor: float = 2.0, decades: int = 3) -> bool:
    """True when the scaled differences fall by ``factor`` per decade over the final ``decades``."""
    t = np.array([s[0] for s in samples])
    v = np.array([s[1] for s in samples])
    logt = np.log10(t)
    end = logt[-1]
    direction = np.sign(logt[-1] - logt[0])
    for d in range(decades):
        a_t = end - direction * (d + 1)
        b_t = end - direction * d
        va = v[np.argmin(np.abs(logt - a_t))]
        vb = v[np.argmin(np.abs(logt - b_t))]
        if not vb <= va / factor:
            return False
    return True
