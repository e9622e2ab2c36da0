"""Bound states inside the gap (-m, m).

Three sources of eigenpairs live here:

* closed forms in modified Bessel functions for a pure anomalous-magnetic
  coupling (nu = mu = 0, 0 < |k + lam| < 1/2),
* the explicit Dirac-Coulomb ground state in the k = -1 channels,
* a general shooting solver that matches an outward solution started in a
  chosen extension subspace against the decaying solution from infinity.

Sign convention: every eigenpair returned satisfies ``h f = a f`` for the
radial operator of :mod:`dirac_extensions.radial`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .bessel import bessel_k
from .channel_core import (
    Channel,
    Coupling,
    ExtensionParameter,
    Regime,
    boundary_seed,
    classify,
    reduce_theta,
)
from .errors import DomainError, RegimeMismatch
from .radial import (
    DEFAULT_N,
    DEFAULT_R_MIN,
    RadialFunction,
    RadialGrid,
    _inward_batch,
    _outward_batch,
    _solve_rescaled,
    _system_matrices,
)

A_TOL = 1e-10
#: normalized Wronskian accepted at a refined root
ROOT_ACCEPT = 1e-6


@dataclass(frozen=True)
class EigenResult:
    a: float
    theta: ExtensionParameter
    mismatch: float
    eigenfunction: RadialFunction = field(repr=False)


# --------------------------------------------------------------------- Bessel closed forms

def _check_gap(m: float, a: float) -> float:
    if not m > 0:
        raise DomainError(f"mass must be positive, got {m}")
    if not abs(a) < m:
        raise DomainError(f"eigenvalue {a} outside the gap (-{m}, {m})")
    return math.sqrt(m * m - a * a)


def bessel_eigenpair(
    k_plus_lambda: float,
    m: float,
    a: float,
    amplitude: complex = 1.0,
    grid: RadialGrid | None = None,
) -> RadialFunction:
    """Decaying solution of h f = a f for nu = mu = 0.

    With s = sqrt(m^2 - a^2) and g = |k + lam|,

        k + lam > 0:  f+ = A sqrt(m+a) sqrt(r) K_{g+1/2}(s r),  f- = -A sqrt(m-a) sqrt(r) K_{g-1/2}(s r)
        k + lam < 0:  f+ = A sqrt(m+a) sqrt(r) K_{g-1/2}(s r),  f- = -A sqrt(m-a) sqrt(r) K_{g+1/2}(s r)

    The roles of sqrt(m+a) and sqrt(m-a) are fixed by the eigenvalue sign
    convention; exchanging them gives a solution of h f = -a f instead.
    """
    if k_plus_lambda == 0:
        raise DomainError("k + lam must be nonzero")
    s = _check_gap(m, a)
    if grid is None:
        grid = RadialGrid.geometric(DEFAULT_R_MIN, 40.0 / s, DEFAULT_N)
    g = abs(k_plus_lambda)
    r = grid.points
    hi, lo = (g + 0.5, g - 0.5) if k_plus_lambda > 0 else (g - 0.5, g + 0.5)
    fp = amplitude * math.sqrt(m + a) * np.sqrt(r) * bessel_k(hi, s * r)
    fm = -amplitude * math.sqrt(m - a) * np.sqrt(r) * bessel_k(lo, s * r)
    return RadialFunction(grid, fp, fm)


def theta_of_eigenvalue_bessel(sign_k_plus_lambda: int, m: float, a: float) -> ExtensionParameter:
    """theta in [0, pi) solving the printed resonance condition.

    sign +1: sin(theta) sqrt(m+a) + cos(theta) sqrt(m-a) = 0
    sign -1: sin(theta) sqrt(m-a) + cos(theta) sqrt(m+a) = 0
    """
    _check_gap(m, a)
    if sign_k_plus_lambda > 0:
        p, q = math.sqrt(m + a), math.sqrt(m - a)
    else:
        p, q = math.sqrt(m - a), math.sqrt(m + a)
    # p sin + q cos = 0  <=>  theta = atan2(-q, p) mod pi
    return ExtensionParameter(reduce_theta(math.atan2(-q, p)))


def eigenvalue_of_theta_bessel(sign_k_plus_lambda: int, m: float, theta: float) -> Optional[float]:
    """Inverse of :func:`theta_of_eigenvalue_bessel`.

    Both conditions are solvable only for theta in (pi/2, pi), where
    a = m cos(2 theta) (sign +1) or a = -m cos(2 theta) (sign -1).
    """
    theta = float(theta)
    if not (math.pi / 2 < theta < math.pi):
        return None
    a = m * math.cos(2 * theta)
    return a if sign_k_plus_lambda > 0 else -a


def _bessel_ratio_constant(gamma: float) -> float:
    return math.gamma(gamma + 0.5) / math.gamma(0.5 - gamma)


def bessel_theta_exact(k_plus_lambda: float, m: float, a: float) -> ExtensionParameter:
    """theta of the subspace that contains the Bessel eigenfunction at eigenvalue a.

    From the leading terms of K_nu at small argument,

        tan(theta) = sgn(kl) sqrt((m + sgn(kl) a) / (m - sgn(kl) a)) G (s/2)^(-2g),
        G = Gamma(g + 1/2) / Gamma(1/2 - g),   s = sqrt(m^2 - a^2).

    Only 0 < g = |k + lam| < 1/2 admits extensions.
    """
    g = abs(k_plus_lambda)
    if not 0 < g < 0.5:
        raise RegimeMismatch(f"|k + lam| = {g} is outside (0, 1/2)")
    s = _check_gap(m, a)
    sg = 1.0 if k_plus_lambda > 0 else -1.0
    # log form keeps the ratio finite close to the gap edges
    log_t = 0.5 * (math.log(m + sg * a) - math.log(m - sg * a)) + math.log(_bessel_ratio_constant(g)) - 2 * g * math.log(s / 2)
    return ExtensionParameter(reduce_theta(math.atan(sg * math.exp(log_t))))


def bessel_eigenvalue_exact(k_plus_lambda: float, m: float, theta: float) -> Optional[float]:
    """Eigenvalue in (-m, m) of the extension theta, or None when there is none.

    theta(a) is a bijection of (-m, m) onto (0, pi/2) for k + lam > 0 and onto
    (pi/2, pi) for k + lam < 0; theta = 0 has no eigenvalue.
    """
    g = abs(k_plus_lambda)
    if not 0 < g < 0.5:
        raise RegimeMismatch(f"|k + lam| = {g} is outside (0, 1/2)")
    theta = float(theta)
    if k_plus_lambda > 0 and not (0 < theta < math.pi / 2):
        return None
    if k_plus_lambda < 0 and not (math.pi / 2 < theta < math.pi):
        return None
    sg = 1.0 if k_plus_lambda > 0 else -1.0
    target = math.log(abs(math.tan(theta)))
    lg = math.log(_bessel_ratio_constant(g))

    def h(a):
        s = math.sqrt(m * m - a * a)
        return 0.5 * (math.log(m + sg * a) - math.log(m - sg * a)) + lg - 2 * g * math.log(s / 2) - target

    eps = m * 1e-15
    lo, hi = -m + eps, m - eps
    if h(lo) * h(hi) > 0:
        return None
    return brentq(h, lo, hi, xtol=1e-14 * m, rtol=1e-15)


# --------------------------------------------------------------------- Coulomb ground state

@dataclass(frozen=True)
class CoulombState:
    """Ground state a = m sqrt(1 - nu^2) of the attractive Coulomb field -nu/|x|.

    ``coupling`` is expressed in the signed convention of :class:`Coupling`,
    i.e. its ``nu`` field equals minus the Coulomb strength.
    """

    a: float
    coupling: Coupling
    channels: dict = field(repr=False)

    def cartesian(self, x: np.ndarray) -> np.ndarray:
        """The 4-spinor at points x of shape (..., 3)."""
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        m = self.coupling.mass
        s = math.sqrt(m * m - self.a * self.a)
        ca = math.sqrt((m - self.a) / (m + self.a))
        radial = np.exp(-s * r) / r ** (1 - self.a / m)
        xh = x / r[..., None]
        # sigma.xhat (1, 1)^T
        low0 = xh[..., 2] + xh[..., 0] - 1j * xh[..., 1]
        low1 = xh[..., 0] + 1j * xh[..., 1] - xh[..., 2]
        out = np.stack([np.ones_like(r), np.ones_like(r), 1j * ca * low0, 1j * ca * low1], axis=-1)
        return out * radial[..., None]


def coulomb_eigenfunction(nu: float, m: float = 1.0, grid: RadialGrid | None = None) -> CoulombState:
    """The explicit ground state of the Coulomb strength ``nu`` in (0, 1].

    In the k = -1 channels (m_j = +-1/2) the radial coefficients are
    f+ = -i sqrt(4 pi) g(r) and f- = i c sqrt(4 pi) g(r) with
    g = e^{-s r} r^{a/m}, s = sqrt(m^2 - a^2), c = sqrt((m-a)/(m+a)).
    """
    if not (0 < nu <= 1):
        raise DomainError(f"Coulomb strength must lie in (0, 1], got {nu}")
    if not m > 0:
        raise DomainError(f"mass must be positive, got {m}")
    a = m * math.sqrt(1 - nu * nu)
    s = math.sqrt(m * m - a * a)
    ca = math.sqrt((m - a) / (m + a))
    if grid is None:
        grid = RadialGrid.geometric(DEFAULT_R_MIN, 40.0 / s, DEFAULT_N)
    g = np.exp(-s * grid.points) * grid.points ** (a / m)
    c4 = math.sqrt(4 * math.pi)
    channels = {}
    for m_j in (-0.5, 0.5):
        channels[Channel(0.5, m_j, -1)] = RadialFunction(grid, -1j * c4 * g, 1j * ca * c4 * g)
    return CoulombState(a, Coupling(nu=-nu, mass=m), channels)


# --------------------------------------------------------------------- shooting

def matching_radius(m: float) -> float:
    return 1.0 / max(abs(m), 1.0)


def _mismatch(f_out: np.ndarray, g_in: np.ndarray) -> np.ndarray:
    """Normalized Wronskian (f+ g- - f- g+) / (|f| |g|) for rows of shape (N, 2).

    The inward solution is real.  A complex outward solution (supercritical
    seeds) is real up to a constant phase e^{i alpha}; e^{2 i alpha} is read
    off from f+^2 + f-^2 and divided out.  The remaining sign ambiguity only
    produces brackets without a root, which the caller discards.
    """
    w = f_out[:, 0] * g_in[:, 1] - f_out[:, 1] * g_in[:, 0]
    norm = np.linalg.norm(f_out, axis=1) * np.linalg.norm(g_in, axis=1)
    if np.all(f_out.imag == 0):
        return w.real / norm
    sq = f_out[:, 0] ** 2 + f_out[:, 1] ** 2
    phase = np.sqrt(sq / np.abs(sq))
    return (w / phase).real / norm


def _mismatch_batch(coupling, k, report, seed, energies):
    m = coupling.mass
    s_mid = math.log(matching_radius(m))
    s0 = math.log(DEFAULT_R_MIN)
    f_out = _outward_batch(coupling, k, energies, seed, np.array([s0, s_mid]), report)[-1]
    kap = np.sqrt(m * m - np.asarray(energies) ** 2)
    g_in = _inward_batch(coupling, k, energies, np.log(40.0 / kap), s_mid)[-1]
    return _mismatch(f_out, g_in)


def _eigenfunction(coupling, k, report, seed, a, grid: RadialGrid | None) -> RadialFunction:
    m = coupling.mass
    kap = math.sqrt(m * m - a * a)
    if grid is None:
        grid = RadialGrid.geometric(DEFAULT_R_MIN, max(40.0 / kap, 2 * matching_radius(m)), DEFAULT_N)
    r_mid = matching_radius(m)
    r = grid.points
    inner = r[r <= r_mid]
    outer = r[r > r_mid]
    s_in = np.concatenate([np.log(inner), [math.log(r_mid)]])
    f_out = _outward_batch(coupling, k, [a], seed, s_in, report)[:, 0, :]
    # inward from the far end of the grid (or the standard start, whichever is further)
    A0, Bm, Ba = _system_matrices(coupling, k)
    r_start = 40.0 / kap
    far = outer[::-1]
    if far.size and far[0] >= r_start:
        s_out = np.concatenate([np.log(far), [math.log(r_mid)]])
        skip = 0
    else:
        s_out = np.concatenate([[math.log(r_start)], np.log(far), [math.log(r_mid)]])
        skip = 1

    def rhs(s, y):
        return (A0 + math.exp(s) * (Bm + a * Ba)) @ y

    y0 = np.array([1.0, -kap / (m + a)], dtype=complex)
    vals, logs = _solve_rescaled(rhs, s_out, y0)
    g = vals * np.exp(logs - logs[-1])[:, None]
    g_mid = g[-1]
    f_mid = f_out[-1]
    c = np.vdot(g_mid, f_mid) / np.vdot(g_mid, g_mid)
    tail = c * g[skip:-1][::-1]
    vals = np.concatenate([f_out[:-1], tail], axis=0)
    fr = RadialFunction(grid, vals[:, 0], vals[:, 1])
    norm = fr.l2_norm()
    i_mid = min(np.searchsorted(r, r_mid), grid.n - 1)
    pivot = fr.f_plus[i_mid] if abs(fr.f_plus[i_mid]) > 0 else fr.f_minus[i_mid]
    phase = np.conj(pivot) / abs(pivot)
    return fr.scaled(phase / norm)


def shoot_eigenvalues(
    coupling: Coupling,
    channel: Channel | int,
    theta: float | ExtensionParameter,
    search: tuple[float, float] | None = None,
    n_scan: int = 400,
    grid: RadialGrid | None = None,
) -> list[EigenResult]:
    """Eigenvalues in ``search`` of the extension with parameter theta.

    The outward solution is seeded in the theta-subspace, the decaying
    solution is integrated in from 40/kappa, and the normalized Wronskian of
    the two at r_mid = 1/max(|m|, 1) is scanned on ``n_scan`` energies.  Each
    sign change is refined by Brent's method to |da| <= 1e-10.  An empty list
    means no bracket was found.
    """
    k = channel.k if isinstance(channel, Channel) else int(channel)
    report = classify(coupling, k)
    if not report.regime.has_extensions:
        raise RegimeMismatch(f"no theta family in the regime {report.regime.value}")
    theta = float(theta)
    m = abs(coupling.mass)
    lo, hi = search if search is not None else (-m + 1e-6, m - 1e-6)
    if not (-m + 1e-9 <= lo < hi <= m - 1e-9):
        raise DomainError(f"search interval [{lo}, {hi}] must lie inside (-m + 1e-9, m - 1e-9)")
    seed = np.array(boundary_seed(theta, report))
    energies = np.linspace(lo, hi, n_scan)
    w = _mismatch_batch(coupling, k, report, seed, energies)

    def scalar(a):
        return float(_mismatch_batch(coupling, k, report, seed, np.array([a]))[0])

    results = []
    for i in np.nonzero(np.sign(w[:-1]) * np.sign(w[1:]) <= 0)[0]:
        if w[i] == 0:
            root = energies[i]
        elif w[i + 1] == 0:
            continue  # picked up as the left end of the next bracket
        else:
            root = brentq(scalar, energies[i], energies[i + 1], xtol=A_TOL, rtol=1e-15)
        mismatch = abs(scalar(root))
        if mismatch > ROOT_ACCEPT:
            continue  # sign flip of the phase convention, not a zero
        ef = _eigenfunction(coupling, k, report, seed, root, grid)
        results.append(EigenResult(float(root), ExtensionParameter(reduce_theta(theta)), mismatch, ef))
    return sorted(results, key=lambda e: e.a)


def mismatch_scan(coupling: Coupling, channel: Channel | int, theta: float, energies) -> np.ndarray:
    """The normalized Wronskian W(a) on the given energies (diagnostics)."""
    k = channel.k if isinstance(channel, Channel) else int(channel)
    report = classify(coupling, k)
    if not report.regime.has_extensions:
        raise RegimeMismatch(f"no theta family in the regime {report.regime.value}")
    seed = np.array(boundary_seed(float(theta), report))
    return _mismatch_batch(coupling, k, report, seed, np.asarray(energies, dtype=float))
