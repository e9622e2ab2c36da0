"""Algebra of a single partial-wave channel.

For the radial Dirac system with potential strengths (nu, mu, lam) the
behaviour at the origin is governed by

    delta = (k + lam)**2 + mu**2 - nu**2,    gamma = sqrt(|delta|).

This module classifies a channel by delta, builds the transfer matrices that
map boundary coefficients (A+, A-) onto the leading small-r asymptotics, and
selects the extension parameter theta from coefficients or from the
distinguished-extension rules.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .errors import NoDistinguishedExtension, NotInAnyThetaSubspace, RegimeMismatch

#: inputs within this distance of delta = 1/4 or delta = 0 are snapped onto the threshold
THRESHOLD_SNAP = 1e-12
#: relative tolerance for the k + lam - gamma = 0 branch of the transfer matrix
BRANCH_TOL = 1e-12
MEMBERSHIP_TOL = 1e-8


@dataclass(frozen=True)
class Coupling:
    """Potential and mass parameters.

    ``nu`` is the electric (Coulomb) strength, ``mu`` the Lorentz-scalar
    strength, ``lam`` the anomalous-magnetic strength and ``mass`` the
    particle mass.  The potential enters as ``+nu/r``, so an attractive
    Coulomb field has ``nu < 0``.
    """

    nu: float = 0.0
    mu: float = 0.0
    lam: float = 0.0
    mass: float = 1.0

    def __post_init__(self):
        for name in ("nu", "mu", "lam", "mass"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"coupling field {name} must be finite, got {value}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class Channel:
    """Partial-wave labels (j, m_j, k) with k = +-(j + 1/2)."""

    j: float
    m_j: float
    k: int

    def __post_init__(self):
        two_j = 2 * self.j
        if two_j != round(two_j) or round(two_j) % 2 != 1 or self.j < 0.5:
            raise ValueError(f"j must be a positive half-odd integer, got {self.j}")
        two_m = 2 * self.m_j
        if two_m != round(two_m) or (round(two_m) - round(two_j)) % 2 != 0 or abs(self.m_j) > self.j:
            raise ValueError(f"m_j={self.m_j} is not in -j..j for j={self.j}")
        if int(self.k) != self.k or abs(self.k) != round(self.j + 0.5):
            raise ValueError(f"k must be +-(j + 1/2), got k={self.k} for j={self.j}")
        object.__setattr__(self, "j", float(self.j))
        object.__setattr__(self, "m_j", float(self.m_j))
        object.__setattr__(self, "k", int(self.k))

    @classmethod
    def from_k(cls, k: int, m_j: float | None = None) -> "Channel":
        j = abs(k) - 0.5
        return cls(j, j if m_j is None else m_j, k)


def iter_channels(j_max: float) -> Iterator[Channel]:
    """All channels with j <= j_max, ordered by (j, k, m_j)."""
    j = 0.5
    while j <= j_max + 1e-12:
        for k in (-int(j + 0.5), int(j + 0.5)):
            m = -j
            while m <= j + 1e-12:
                yield Channel(j, m, k)
                m += 1.0
        j += 1.0


class Regime(str, enum.Enum):
    ESS_SA_STRICT = "EssSelfAdjointStrict"
    ESS_SA_BORDERLINE = "EssSelfAdjointBorderline"
    SUBCRITICAL = "Subcritical"
    CRITICAL = "Critical"
    SUPERCRITICAL = "Supercritical"

    @property
    def has_extensions(self) -> bool:
        return self in (Regime.SUBCRITICAL, Regime.CRITICAL, Regime.SUPERCRITICAL)


class TransferKind(str, enum.Enum):
    D_REAL = "D_real"
    M_NILPOTENT = "M_nilpotent"
    D_COMPLEX = "D_complex"
    NONE = "None"


@dataclass(frozen=True)
class TransferMatrix:
    kind: TransferKind
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.entries, dtype=complex).reshape(2, 2)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @classmethod
    def none(cls) -> "TransferMatrix":
        return cls(TransferKind.NONE, np.zeros((2, 2)))


@dataclass(frozen=True)
class RegimeReport:
    delta: float
    gamma: float
    regime: Regime
    transfer: TransferMatrix
    tau: Optional[float] = None
    kappa: float = 0.0  # k + lam


@dataclass(frozen=True)
class ExtensionParameter:
    theta: float

    def __post_init__(self):
        t = float(self.theta)
        if not (0.0 <= t < math.pi):
            raise ValueError(f"theta must lie in [0, pi), got {t}")
        object.__setattr__(self, "theta", t)

    def __float__(self) -> float:
        return self.theta


def reduce_theta(theta: float) -> float:
    """Map any real angle to [0, pi)."""
    t = math.fmod(theta, math.pi)
    if t < 0:
        t += math.pi
    if t >= math.pi:
        t = 0.0
    return t


def compute_delta(coupling: Coupling, k: int) -> float:
    if k == 0:
        raise ValueError("k must be nonzero")
    kappa = k + coupling.lam
    return kappa * kappa + coupling.mu * coupling.mu - coupling.nu * coupling.nu


def _snap(delta: float) -> float:
    if abs(delta - 0.25) <= THRESHOLD_SNAP:
        return 0.25
    if abs(delta) <= THRESHOLD_SNAP:
        return 0.0
    return delta


def regime_of_delta(delta: float) -> Regime:
    delta = _snap(delta)
    if delta > 0.25:
        return Regime.ESS_SA_STRICT
    if delta == 0.25:
        return Regime.ESS_SA_BORDERLINE
    if delta > 0.0:
        return Regime.SUBCRITICAL
    if delta == 0.0:
        return Regime.CRITICAL
    return Regime.SUPERCRITICAL


def _kappa_gamma(coupling: Coupling, k: int) -> tuple[float, float, float]:
    delta = _snap(compute_delta(coupling, k))
    return k + coupling.lam, delta, math.sqrt(abs(delta))


def _generic_branch(kappa: float, gamma: float) -> bool:
    return abs(kappa - gamma) > BRANCH_TOL * max(1.0, abs(kappa))


def transfer_matrix(coupling: Coupling, k: int, regime: Regime) -> TransferMatrix:
    """Matrix mapping (A+ r^g, A- r^-g) (or its critical/supercritical analogue) onto (f+, f-)."""
    kappa, _, gamma = _kappa_gamma(coupling, k)
    nu, mu = coupling.nu, coupling.mu
    if regime is Regime.SUBCRITICAL:
        if _generic_branch(kappa, gamma):
            p = kappa - gamma
            mat = np.array([[p, nu - mu], [-(nu + mu), -p]]) / (2 * gamma * p)
        else:
            mat = np.array([[mu - nu, 2 * gamma], [2 * gamma, -(nu + mu)]]) / (-4 * gamma**2)
        return TransferMatrix(TransferKind.D_REAL, mat)
    if regime is Regime.CRITICAL:
        mat = np.array([[-kappa, -nu + mu], [nu + mu, kappa]])
        return TransferMatrix(TransferKind.M_NILPOTENT, mat)
    if regime is Regime.SUPERCRITICAL:
        p = kappa - 1j * gamma
        mat = np.array([[p, nu - mu], [-(nu + mu), -p]]) / (2j * gamma * p)
        return TransferMatrix(TransferKind.D_COMPLEX, mat)
    raise RegimeMismatch(f"no transfer matrix in the essentially self-adjoint regime {regime.value}")


def representation_matrix(coupling: Coupling, k: int, regime: Regime) -> TransferMatrix:
    """The matrix M with phi = M f that diagonalises the leading small-r behaviour.

    Subcritically and supercritically this is the inverse of the transfer
    matrix D.  Critically it is the nilpotent M itself.
    """
    kappa, _, gamma = _kappa_gamma(coupling, k)
    nu, mu = coupling.nu, coupling.mu
    if regime is Regime.SUBCRITICAL:
        if _generic_branch(kappa, gamma):
            p = kappa - gamma
            mat = np.array([[-p, -nu + mu], [nu + mu, p]])
        else:
            q = kappa + gamma
            mat = np.array([[-nu - mu, -q], [-q, -nu + mu]])
        return TransferMatrix(TransferKind.D_REAL, mat)
    if regime is Regime.CRITICAL:
        return transfer_matrix(coupling, k, regime)
    if regime is Regime.SUPERCRITICAL:
        p = kappa - 1j * gamma
        mat = np.array([[-p, -nu + mu], [nu + mu, p]])
        return TransferMatrix(TransferKind.D_COMPLEX, mat)
    raise RegimeMismatch(f"no representation matrix in the regime {regime.value}")


def classify(coupling: Coupling, channel: Channel | int) -> RegimeReport:
    k = channel.k if isinstance(channel, Channel) else int(channel)
    kappa, delta, gamma = _kappa_gamma(coupling, k)
    regime = regime_of_delta(delta)
    if regime.has_extensions:
        transfer = transfer_matrix(coupling, k, regime)
    else:
        transfer = TransferMatrix.none()
    tau = None
    if regime is Regime.SUPERCRITICAL:
        tau = math.sqrt((coupling.nu + coupling.mu) / (coupling.nu - coupling.mu))
    return RegimeReport(delta=delta, gamma=gamma, regime=regime, transfer=transfer, tau=tau, kappa=kappa)


def distinguished_theta(coupling: Coupling, channel: Channel | int) -> ExtensionParameter:
    report = classify(coupling, channel)
    if report.regime is Regime.SUBCRITICAL:
        return ExtensionParameter(0.0)
    if report.regime is Regime.CRITICAL:
        s = coupling.nu + coupling.mu
        if abs(s) > THRESHOLD_SNAP:
            # arccot on the branch (0, pi)
            return ExtensionParameter(reduce_theta(math.pi / 2 - math.atan(report.kappa / s)))
        if coupling.nu != 0.0:
            return ExtensionParameter(0.0)
        raise NoDistinguishedExtension("critical channel with nu = mu = 0 has no distinguished extension")
    raise RegimeMismatch(f"distinguished extension undefined in the regime {report.regime.value}")


def theta_from_coefficients(
    A_plus: complex,
    A_minus: complex,
    regime: Regime,
    tau: float | None = None,
    tol: float = MEMBERSHIP_TOL,
) -> ExtensionParameter:
    """Recover theta from boundary coefficients.

    For delta >= 0 the subspaces are {A+ sin(theta) + A- cos(theta) = 0}.
    In the supercritical case they are spanned by (tau e^{i theta}, e^{-i theta}),
    i.e. ``tau`` is the modulus ratio |A+| / |A-|.
    """
    ap, am = complex(A_plus), complex(A_minus)
    if ap == 0 and am == 0:
        raise ValueError("(A+, A-) must not both vanish")
    if regime in (Regime.SUBCRITICAL, Regime.CRITICAL):
        # distance to the nearest real line, relative to |A|; stable when one entry underflows
        pivot = ap if abs(ap) >= abs(am) else am
        phase = pivot / abs(pivot)
        x, y = ap / phase, am / phase
        if max(abs(x.imag), abs(y.imag)) > tol * math.hypot(abs(ap), abs(am)):
            raise NotInAnyThetaSubspace(f"A+ conj(A-) = {ap * am.conjugate()} is not real")
        x, y = x.real, y.real
        return ExtensionParameter(reduce_theta(math.atan2(-y, x)))
    if regime is Regime.SUPERCRITICAL:
        if tau is None or not tau > 0:
            raise ValueError("supercritical membership needs tau > 0")
        if abs(abs(ap) - tau * abs(am)) > tol * (abs(ap) + tau * abs(am)):
            raise NotInAnyThetaSubspace(f"|A+| = {abs(ap)} differs from tau |A-| = {tau * abs(am)}")
        return ExtensionParameter(reduce_theta(0.5 * (np.angle(ap) - np.angle(am))))
    raise RegimeMismatch(f"no theta family in the regime {regime.value}")


def boundary_seed(theta: float, report: RegimeReport) -> tuple[complex, complex]:
    """A nonzero (A+, A-) spanning the extension subspace for ``theta``.

    Supercritically the self-adjoint subspaces satisfy |A-| = tau |A+|, which
    is what makes the boundary Wronskian vanish; the seed is
    (e^{i theta}, tau e^{-i theta}).
    """
    if report.regime in (Regime.SUBCRITICAL, Regime.CRITICAL):
        return complex(math.cos(theta)), complex(-math.sin(theta))
    if report.regime is Regime.SUPERCRITICAL:
        return complex(np.exp(1j * theta)), complex(report.tau * np.exp(-1j * theta))
    raise RegimeMismatch(f"no theta family in the regime {report.regime.value}")


def theta_of_seed(A_plus: complex, A_minus: complex, report: RegimeReport, tol: float = MEMBERSHIP_TOL) -> ExtensionParameter:
    """Inverse of :func:`boundary_seed`, i.e. theta of the self-adjoint subspace containing (A+, A-)."""
    tau = None if report.tau is None else 1.0 / report.tau
    return theta_from_coefficients(A_plus, A_minus, report.regime, tau=tau, tol=tol)
