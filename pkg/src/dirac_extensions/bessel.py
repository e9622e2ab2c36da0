r"""Modified Bessel function of the second kind :math:`K_\nu(x)` for real order.

The order is split as :math:`\nu = \mu + n` with :math:`|\mu| \le 1/2`.
:math:`K_\mu` and :math:`K_{\mu+1}` are obtained from Temme's series for
:math:`x < 2` and from Steed's continued fraction (CF2) otherwise; the
forward recurrence

.. math::
    K_{\mu+i+1}(x) = \frac{2(\mu+i)}{x} K_{\mu+i}(x) + K_{\mu+i-1}(x)

is stable for :math:`K` and carries the result to order :math:`\nu`.

References
----------
N. M. Temme, J. Comput. Phys. 19 (1975) 324-337.
https://dlmf.nist.gov/10.40 (large-argument behaviour)
"""

import math

import numpy as np

from .errors import DomainError

_EPS = 1e-17
_MAXIT = 10000
_XMIN = 2.0

# Taylor coefficients c_k of 1/Gamma(z) = sum c_k z^k, used only for tiny |mu|
_RGAM = (1.0, 0.5772156649015329, -0.6558780715202538, -0.0420026350340952,
         0.1665386113822915, -0.0421977345555443)


def _gam12(xmu):
    """Return (gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu)).

    gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu),
    gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2.
    """
    gampl = 1.0 / math.gamma(1.0 + xmu)
    gammi = 1.0 / math.gamma(1.0 - xmu)
    gam2 = 0.5 * (gammi + gampl)
    if abs(xmu) < 1e-3:
        x2 = xmu * xmu
        gam1 = -(_RGAM[1] + _RGAM[3] * x2 + _RGAM[5] * x2 * x2)
    else:
        gam1 = (gammi - gampl) / (2.0 * xmu)
    return gam1, gam2, gampl, gammi


def _temme(xmu, x):
    """K_mu(x), K_{mu+1}(x) for x < 2 by Temme's series."""
    xmu2 = xmu * xmu
    x2 = 0.5 * x
    pimu = math.pi * xmu
    fact = 1.0 if abs(pimu) < _EPS else pimu / math.sin(pimu)
    d = -math.log(x2)
    e = xmu * d
    fact2 = 1.0 if abs(e) < _EPS else math.sinh(e) / e
    gam1, gam2, gampl, gammi = _gam12(xmu)
    ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
    total = ff
    e = math.exp(e)
    p = 0.5 * e / gampl
    q = 0.5 / (e * gammi)
    c = 1.0
    d = x2 * x2
    total1 = p
    for i in range(1, _MAXIT):
        ff = (i * ff + p + q) / (i * i - xmu2)
        c *= d / i
        p /= i - xmu
        q /= i + xmu
        delta = c * ff
        total += delta
        total1 += c * (p - i * ff)
        if abs(delta) < abs(total) * _EPS:
            break
    else:  # pragma: no cover - series always converges for x < 2
        raise ArithmeticError("Temme series failed to converge")
    return total, total1 * 2.0 / x


def _steed(xmu, x):
    """exp(x) K_mu(x), exp(x) K_{mu+1}(x) for x >= 2 by continued fraction CF2."""
    xmu2 = xmu * xmu
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25 - xmu2
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(1, _MAXIT):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:  # pragma: no cover
        raise ArithmeticError("continued fraction CF2 failed to converge")
    h = a1 * h
    kmu = math.sqrt(math.pi / (2.0 * x)) / s
    k1 = kmu * (xmu + x + 0.5 - h) / x
    return kmu, k1


def _kv_scalar(order, x, scaled):
    if not x > 0.0:
        raise DomainError(f"bessel_k needs x > 0, got {x}")
    nu = abs(float(order))
    nl = int(nu + 0.5)
    xmu = nu - nl
    if x < _XMIN:
        kmu, k1 = _temme(xmu, x)
        if scaled:
            ex = math.exp(x)
            kmu, k1 = kmu * ex, k1 * ex
    else:
        kmu, k1 = _steed(xmu, x)
        if not scaled:
            ex = math.exp(-x)
            kmu, k1 = kmu * ex, k1 * ex
    xi2 = 2.0 / x
    for i in range(1, nl + 1):
        kmu, k1 = k1, (xmu + i) * xi2 * k1 + kmu
    return kmu


def bessel_k(order, x, scaled=False):
    """Modified Bessel function of the second kind, K_order(x).

    Parameters
    ----------
    order : float
        Real order; K is even in the order so negative values are reflected.
    x : float or array_like
        Positive argument(s).
    scaled : bool
        If True return ``exp(x) * K_order(x)``, which stays representable for
        large ``x``.

    Returns
    -------
    float or ndarray
        Same shape as ``x``.
    """
    if np.ndim(x) == 0:
        return _kv_scalar(order, float(x), scaled)
    xs = np.asarray(x, dtype=float)
    out = np.empty(xs.shape)
    flat = out.reshape(-1)
    for idx, xv in enumerate(xs.reshape(-1)):
        flat[idx] = _kv_scalar(order, float(xv), scaled)
    return out
