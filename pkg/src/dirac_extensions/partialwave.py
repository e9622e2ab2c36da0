r"""Spinor spherical harmonics and the partial-wave decomposition of 4-spinors.

With complex spherical harmonics :math:`Y^l_n` (Condon-Shortley phase) the
two-component spinor harmonics are

.. math::

    \psi^{m_j}_{j-1/2} = \frac{1}{\sqrt{2j}}
        \begin{pmatrix} \sqrt{j+m_j}\, Y^{m_j-1/2}_{j-1/2} \\
                        \sqrt{j-m_j}\, Y^{m_j+1/2}_{j-1/2} \end{pmatrix},
    \qquad
    \psi^{m_j}_{j+1/2} = \frac{1}{\sqrt{2j+2}}
        \begin{pmatrix} \sqrt{j+1-m_j}\, Y^{m_j-1/2}_{j+1/2} \\
                        -\sqrt{j+1+m_j}\, Y^{m_j+1/2}_{j+1/2} \end{pmatrix},

and the channel basis is :math:`\Phi^+_{m_j,\pm(j+1/2)} = (i\psi^{m_j}_{j\pm1/2}, 0)`,
:math:`\Phi^-_{m_j,\pm(j+1/2)} = (0, \psi^{m_j}_{j\mp1/2})`.  A field is
:math:`\sum r^{-1}(f^+\Phi^+ + f^-\Phi^-)`, and on each channel the Dirac
operator with the potential :math:`V` acts as the radial operator of
:mod:`dirac_extensions.radial`.

Angular integrals use Gauss-Legendre nodes in cos(polar) times a uniform
azimuthal rule, which is exact for band-limited integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import sph_harm_y

from .channel_core import Channel, Coupling, iter_channels
from .errors import QuadratureUnderresolved
from .radial import RadialFunction, RadialGrid, apply_radial_operator, log_derivative, trapezoid_log

MAX_DEGREE = 24

SIGMA = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]],
    dtype=complex,
)
BETA = np.diag([1, 1, -1, -1]).astype(complex)
ALPHA = np.array(
    [np.block([[np.zeros((2, 2)), s], [s, np.zeros((2, 2))]]) for s in SIGMA],
    dtype=complex,
)


@dataclass(frozen=True)
class AngularPoint:
    """A point of the unit sphere by polar angle ``theta_s`` and azimuth ``phi_s``."""

    theta_s: float
    phi_s: float

    def __post_init__(self):
        if not (0.0 <= self.theta_s <= math.pi):
            raise ValueError(f"polar angle must lie in [0, pi], got {self.theta_s}")
        if not (0.0 <= self.phi_s < 2 * math.pi):
            raise ValueError(f"azimuth must lie in [0, 2pi), got {self.phi_s}")

    @property
    def unit_vector(self) -> np.ndarray:
        return unit_vectors(self.theta_s, self.phi_s)


def _angles(theta, phi):
    if isinstance(theta, AngularPoint):
        return np.asarray(theta.theta_s, dtype=float), np.asarray(theta.phi_s, dtype=float)
    return np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)


def unit_vectors(theta, phi) -> np.ndarray:
    theta, phi = _angles(theta, phi)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


# --------------------------------------------------------------------- scalar harmonics

def _ylm(n: int, l: int, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    if n < 0 or abs(l) > n:
        return np.zeros(np.broadcast(theta, phi).shape, dtype=complex)
    return sph_harm_y(n, l, theta, phi)


def spherical_harmonic(n: int, l: int, theta, phi=None) -> np.ndarray:
    """Orthonormal :math:`Y^l_n` with the Condon-Shortley phase.

    ``theta`` is the polar angle (or an :class:`AngularPoint`), ``phi`` the azimuth.
    """
    if int(n) != n or int(l) != l or not (0 <= n <= MAX_DEGREE) or abs(l) > n:
        raise IndexError(f"need integers |l| <= n <= {MAX_DEGREE}, got n={n}, l={l}")
    theta, phi = _angles(theta, phi)
    return _ylm(int(n), int(l), theta, phi)


def sphere_laplacian_fd(func: Callable, theta, phi, h: float = 1e-3) -> np.ndarray:
    r"""Angular Laplacian by central differences, in the sign convention with
    :math:`\Delta_{S^2} Y^l_n = n(n+1) Y^l_n` (the non-negative operator).

    Valid away from the poles.
    """
    theta, phi = _angles(theta, phi)
    f0 = func(theta, phi)
    d_theta = (np.sin(theta + h / 2) * (func(theta + h, phi) - f0)
               - np.sin(theta - h / 2) * (f0 - func(theta - h, phi))) / (h * h * np.sin(theta))
    d_phi = (func(theta, phi + h) - 2 * f0 + func(theta, phi - h)) / (h * h * np.sin(theta) ** 2)
    return -(d_theta + d_phi)


# --------------------------------------------------------------------- spinor harmonics

def _check_jm(j: float, m_j: float) -> None:
    two_j, two_m = 2 * j, 2 * m_j
    if (two_j != round(two_j) or round(two_j) % 2 != 1 or j < 0.5 or two_m != round(two_m)
            or (round(two_m) - round(two_j)) % 2 or abs(m_j) > j or j + 0.5 > MAX_DEGREE):
        raise IndexError(f"invalid spinor labels j={j}, m_j={m_j}")


def _branch_sign(branch: float) -> int:
    if branch not in (0.5, -0.5, 1, -1):
        raise IndexError(f"branch must be +-1/2, got {branch}")
    return 1 if branch > 0 else -1


def pauli_terms(j: float, m_j: float, branch: float) -> dict:
    """:math:`\\psi^{m_j}_{j\\pm1/2}` as a map (component, n, l) -> coefficient of Y^l_n."""
    _check_jm(j, m_j)
    up = _branch_sign(branch) > 0
    lo, hi = int(round(m_j - 0.5)), int(round(m_j + 0.5))
    if up:
        n = int(round(j + 0.5))
        c0 = math.sqrt((j + 1 - m_j) / (2 * j + 2))
        c1 = -math.sqrt((j + 1 + m_j) / (2 * j + 2))
    else:
        n = int(round(j - 0.5))
        c0 = math.sqrt((j + m_j) / (2 * j))
        c1 = math.sqrt((j - m_j) / (2 * j))
    terms = {}
    if abs(lo) <= n and c0 != 0:
        terms[(0, n, lo)] = c0
    if abs(hi) <= n and c1 != 0:
        terms[(1, n, hi)] = c1
    return terms


def evaluate_terms(terms: dict, theta, phi) -> np.ndarray:
    """Two-spinor with the given harmonic coefficients, shape (..., 2)."""
    theta, phi = _angles(theta, phi)
    shape = np.broadcast(theta, phi).shape
    out = np.zeros(shape + (2,), dtype=complex)
    for (comp, n, l), c in terms.items():
        out[..., comp] += c * _ylm(n, l, theta, phi)
    return out


def pauli_spinor(j: float, m_j: float, branch: float, theta, phi=None) -> np.ndarray:
    """:math:`\\psi^{m_j}_{j+\\mathrm{branch}}` at the given angles, shape (..., 2)."""
    return evaluate_terms(pauli_terms(j, m_j, branch), theta, phi)


def _accumulate(out: dict, key: tuple, value: complex) -> None:
    if value != 0:
        out[key] = out.get(key, 0.0) + value


def sigma_dot_L_terms(terms: dict) -> dict:
    """Exact action of :math:`\\sigma\\cdot L = [[L_3, L_-], [L_+, -L_3]]` on harmonic coefficients."""
    out: dict = {}
    for (comp, n, l), c in terms.items():
        q = n * (n + 1)
        if comp == 0:
            _accumulate(out, (0, n, l), l * c)
            if l < n:
                _accumulate(out, (1, n, l + 1), math.sqrt(q - l * (l + 1)) * c)
        else:
            _accumulate(out, (1, n, l), -l * c)
            if l > -n:
                _accumulate(out, (0, n, l - 1), math.sqrt(q - l * (l - 1)) * c)
    return out


def spin_orbit_terms(terms: dict) -> dict:
    """Coefficients of :math:`(1 + \\sigma\\cdot L)\\psi`."""
    out = dict(sigma_dot_L_terms(terms))
    for key, c in terms.items():
        _accumulate(out, key, c)
    return out


def spin_orbit_eigenvalue(j: float, branch: float) -> float:
    """Eigenvalue of :math:`1 + \sigma\cdot L` on :math:`\psi^{m_j}_{j+\mathrm{branch}}`.

    With :math:`L = -i x\times\nabla` it depends only on the orbital degree
    n = j + branch: it is j + 1/2 for n = j - 1/2 and -(j + 1/2) for n = j + 1/2.
    """
    return -_branch_sign(branch) * (j + 0.5)


def sigma_dot_xhat(spinor: np.ndarray, theta, phi=None) -> np.ndarray:
    """Pointwise :math:`(\\sigma\\cdot\\hat x)\\psi` for two-spinor samples of shape (..., 2)."""
    xh = unit_vectors(*_angles(theta, phi))
    mat = np.einsum("...i,iab->...ab", xh, SIGMA)
    return np.einsum("...ab,...b->...a", mat, spinor)


# --------------------------------------------------------------------- channel basis

def _pairing(channel: Channel, sign: int) -> float:
    """Branch of psi in the upper (sign=+1) or lower (sign=-1) slot of the channel."""
    upper = 0.5 if channel.k > 0 else -0.5
    return upper if sign > 0 else -upper


def _sign(sign) -> int:
    if sign in (1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise ValueError(f"sign must be +1 or -1, got {sign!r}")


def basis_spinor(channel: Channel, sign, theta, phi=None) -> np.ndarray:
    """:math:`\\Phi^\\pm_{m_j,k}` at the given angles, shape (..., 4)."""
    s = _sign(sign)
    psi = pauli_spinor(channel.j, channel.m_j, _pairing(channel, s), theta, phi)
    out = np.zeros(psi.shape[:-1] + (4,), dtype=complex)
    if s > 0:
        out[..., :2] = 1j * psi
    else:
        out[..., 2:] = psi
    return out


# --------------------------------------------------------------------- quadrature

@dataclass(frozen=True)
class SphereQuadrature:
    """Gauss-Legendre in cos(theta) times the uniform azimuthal rule."""

    n_theta: int
    n_phi: int
    theta: np.ndarray = field(init=False, repr=False)
    phi: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_theta < 1 or self.n_phi < 1:
            raise ValueError("node counts must be positive")
        x, w = np.polynomial.legendre.leggauss(self.n_theta)
        az = 2 * math.pi * np.arange(self.n_phi) / self.n_phi
        th, ph = np.meshgrid(np.arccos(x), az, indexing="ij")
        wt = np.repeat(w[:, None] * (2 * math.pi / self.n_phi), self.n_phi, axis=1)
        for name, arr in (("theta", th.ravel()), ("phi", ph.ravel()), ("weights", wt.ravel())):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def for_j_max(cls, j_max: float, extra_degree: int = 0) -> "SphereQuadrature":
        n = int(round(2 * j_max + 4)) + extra_degree
        return cls(n, 2 * n)

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def points(self) -> np.ndarray:
        return unit_vectors(self.theta, self.phi)

    @property
    def max_degree(self) -> int:
        """Largest n such that products of two degree-n harmonics integrate exactly."""
        return min(self.n_theta - 1, (self.n_phi - 1) // 2)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Sum over the node axis (the last axis) with quadrature weights."""
        return np.asarray(values) @ self.weights


def _require_capacity(quad: SphereQuadrature, degree: int) -> None:
    if degree > quad.max_degree:
        raise QuadratureUnderresolved(
            f"harmonic degree {degree} exceeds the node capacity {quad.max_degree} "
            f"of a {quad.n_theta} x {quad.n_phi} rule"
        )


def gram_matrix(j_max: float, quad: SphereQuadrature | None = None) -> np.ndarray:
    """Gram matrix of all Phi^+- with j <= j_max, ordered as :func:`basis_labels`."""
    quad = quad or SphereQuadrature.for_j_max(j_max)
    _require_capacity(quad, int(round(j_max + 0.5)))
    B = _basis_values(j_max, quad)
    return np.einsum("anc,bnc,n->ab", B.conj(), B, quad.weights)


def basis_labels(j_max: float) -> list[tuple[Channel, int]]:
    return [(c, s) for c in iter_channels(j_max) for s in (1, -1)]


def _basis_values(j_max: float, quad: SphereQuadrature) -> np.ndarray:
    return np.stack([basis_spinor(c, s, quad.theta, quad.phi) for c, s in basis_labels(j_max)])


# --------------------------------------------------------------------- decomposition

@dataclass(frozen=True)
class ChannelCoefficients:
    """Radial coefficients (f+, f-) of every channel with j <= j_max on one grid."""

    grid: RadialGrid
    j_max: float
    functions: dict = field(repr=False)

    def __post_init__(self):
        for c, f in self.functions.items():
            if not isinstance(c, Channel):
                raise TypeError(f"keys must be Channel instances, got {c!r}")
            if c.j > self.j_max + 1e-12:
                raise ValueError(f"channel {c} exceeds j_max={self.j_max}")
            if f.grid is not self.grid and not np.array_equal(f.grid.points, self.grid.points):
                raise ValueError(f"channel {c} lives on a different grid")

    def __getitem__(self, channel: Channel) -> RadialFunction:
        return self.functions[channel]

    def __iter__(self):
        return iter(self.functions)

    def norm_squared(self) -> float:
        """:math:`\\sum \\|f^\\pm\\|^2`, equal to the squared L^2(R^3) norm of the field."""
        return float(sum(f.l2_norm() ** 2 for f in self.functions.values()))

    def nonzero(self, tol: float = 1e-12) -> list[Channel]:
        """Channels whose coefficient norm exceeds ``tol`` times the largest one."""
        norms = {c: f.l2_norm() for c, f in self.functions.items()}
        top = max(norms.values(), default=0.0)
        return [c for c, v in norms.items() if v > tol * top]

    def map(self, func: Callable[[Channel, RadialFunction], RadialFunction]) -> "ChannelCoefficients":
        return ChannelCoefficients(self.grid, self.j_max, {c: func(c, f) for c, f in self.functions.items()})


def sample_field(func: Callable[[np.ndarray], np.ndarray], grid: RadialGrid, quad: SphereQuadrature) -> np.ndarray:
    """Samples of a Cartesian 4-spinor field, shape (n_r, n_nodes, 4)."""
    x = grid.points[:, None, None] * quad.points[None, :, :]
    return np.asarray(func(x), dtype=complex)


def decompose(
    field_values: np.ndarray,
    grid: RadialGrid,
    j_max: float,
    quad: SphereQuadrature | None = None,
) -> ChannelCoefficients:
    """Channel coefficients :math:`f^\\pm_c(r) = r \\langle \\psi(r,\\cdot), \\Phi^\\pm_c\\rangle`.

    Parameters
    ----------
    field_values : ndarray, shape (n_r, n_nodes, 4)
        Field samples at ``grid`` radii times the nodes of ``quad``.
    j_max : float
        Largest total angular momentum kept.
    """
    quad = quad or SphereQuadrature.for_j_max(j_max)
    _require_capacity(quad, int(round(j_max + 0.5)))
    values = np.asarray(field_values, dtype=complex)
    if values.shape != (grid.n, quad.size, 4):
        raise ValueError(f"field has shape {values.shape}, expected {(grid.n, quad.size, 4)}")
    labels = basis_labels(j_max)
    B = _basis_values(j_max, quad)
    proj = np.einsum("bnc,rnc,n->br", B.conj(), values, quad.weights) * grid.points
    functions = {}
    for idx in range(0, len(labels), 2):
        functions[labels[idx][0]] = RadialFunction(grid, proj[idx], proj[idx + 1])
    return ChannelCoefficients(grid, float(j_max), functions)


def reconstruct(coeffs: ChannelCoefficients, theta, phi=None) -> np.ndarray:
    """Field samples :math:`\\sum r^{-1}(f^+\\Phi^+ + f^-\\Phi^-)`, shape (n_r, n_points, 4).

    ``theta`` may be a :class:`SphereQuadrature`, in which case its nodes are used.
    """
    if isinstance(theta, SphereQuadrature):
        theta, phi = theta.theta, theta.phi
    theta, phi = _angles(theta, phi)
    theta, phi = np.atleast_1d(theta), np.atleast_1d(phi)
    r = coeffs.grid.points
    out = np.zeros((r.size, np.broadcast(theta, phi).size, 4), dtype=complex)
    for c, f in coeffs.functions.items():
        out += np.einsum("r,nc->rnc", f.f_plus / r, basis_spinor(c, 1, theta, phi))
        out += np.einsum("r,nc->rnc", f.f_minus / r, basis_spinor(c, -1, theta, phi))
    return out


def field_norm(values: np.ndarray, grid: RadialGrid, quad: SphereQuadrature) -> float:
    """:math:`L^2(\\mathbb{R}^3)` norm of field samples on grid x quadrature nodes."""
    dens = quad.integrate(np.sum(np.abs(values) ** 2, axis=-1)) * grid.points**2
    return math.sqrt(trapezoid_log(dens, grid))


# --------------------------------------------------------------------- operators on samples

def apply_potential(
    coupling: Coupling,
    values: np.ndarray,
    grid: RadialGrid,
    quad: SphereQuadrature,
    extra: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    times_r: bool = False,
) -> np.ndarray:
    """Pointwise :math:`V\\psi` with :math:`V = (\\nu + \\mu\\beta - i\\lambda\\,\\alpha\\cdot\\hat x\\,\\beta)/|x|`.

    ``extra(x)`` adds a scalar multiple of the identity to V.  With
    ``times_r`` the result is :math:`|x| V\\psi`.
    """
    xh = quad.points
    ax = np.einsum("ni,iab->nab", xh, ALPHA)
    mat = coupling.nu * np.eye(4) + coupling.mu * BETA - 1j * coupling.lam * ax @ BETA
    out = np.einsum("nab,rnb->rna", mat, values)
    r = grid.points[:, None, None]
    if extra is not None:
        x = grid.points[:, None, None] * xh[None, :, :]
        out = out + (np.asarray(extra(x))[..., None] * r) * values
    return out if times_r else out / r


def _harmonic_transform(values: np.ndarray, quad: SphereQuadrature, n_max: int) -> dict:
    """Coefficients of each component on Y^l_n, n <= n_max: {(n, l): array (..., comps)}."""
    coeffs = {}
    for n in range(n_max + 1):
        for l in range(-n, n + 1):
            y = _ylm(n, l, quad.theta, quad.phi)
            coeffs[(n, l)] = np.einsum("n,...nc->...c", y.conj() * quad.weights, values)
    return coeffs


def apply_spin_orbit(values: np.ndarray, quad: SphereQuadrature, n_max: int) -> np.ndarray:
    """:math:`K\\psi` with :math:`K = \\mathrm{diag}(1+\\sigma\\cdot L, -(1+\\sigma\\cdot L))`.

    The field is expanded in harmonics up to degree ``n_max`` and sigma.L is
    applied through the ladder relations.
    """
    _require_capacity(quad, n_max)
    coeffs = _harmonic_transform(values, quad, n_max)
    out = np.zeros_like(values, dtype=complex)
    for (n, l), c in coeffs.items():
        for block, sgn in ((slice(0, 2), 1.0), (slice(2, 4), -1.0)):
            u = c[..., block]
            for comp in range(2):
                image = spin_orbit_terms({(comp, n, l): 1.0})
                for (oc, on, ol), w in image.items():
                    y = _ylm(on, ol, quad.theta, quad.phi)
                    out[..., block.start + oc] += sgn * w * u[..., comp, None] * y
    return out


@dataclass(frozen=True)
class CommutatorReport:
    k_v: float
    dr_rv: float
    norm: float

    @property
    def k_v_relative(self) -> float:
        return self.k_v / self.norm

    @property
    def dr_rv_relative(self) -> float:
        return self.dr_rv / self.norm


def commutator_checks(
    coupling: Coupling,
    field: ChannelCoefficients,
    quad: SphereQuadrature | None = None,
    extra: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> CommutatorReport:
    """L^2 norms of :math:`[K, V]\\psi` and :math:`[\\partial_r, |x|V]\\psi`.

    Both commutators are assembled from sampled operator applications: K by
    harmonic expansion and ladder action, V pointwise, and d/dr by
    fourth-order differences along the radial grid.  ``extra`` adds a scalar
    term to V, e.g. a non-invariant negative control.
    """
    n_field = int(round(field.j_max + 0.5))
    n_max = n_field + 1  # V raises the harmonic degree by at most one
    quad = quad or SphereQuadrature.for_j_max(field.j_max, extra_degree=2)
    _require_capacity(quad, n_max)
    grid = field.grid
    psi = reconstruct(field, quad)

    kv = apply_spin_orbit(apply_potential(coupling, psi, grid, quad, extra), quad, n_max)
    vk = apply_potential(coupling, apply_spin_orbit(psi, quad, n_max), grid, quad, extra)

    rv_psi = apply_potential(coupling, psi, grid, quad, extra, times_r=True)
    d_rv = log_derivative(rv_psi, grid)
    rv_d = apply_potential(coupling, log_derivative(psi, grid), grid, quad, extra, times_r=True)
    return CommutatorReport(
        field_norm(kv - vk, grid, quad),
        field_norm(d_rv - rv_d, grid, quad),
        field_norm(psi, grid, quad),
    )


def apply_dirac_channels(coupling: Coupling, coeffs: ChannelCoefficients) -> ChannelCoefficients:
    """The Dirac operator with potential V applied channel by channel."""
    return coeffs.map(lambda c, f: apply_radial_operator(coupling, c, f))


def apply_dirac_cartesian(
    coupling: Coupling,
    func: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    h: float = 1e-3,
) -> np.ndarray:
    """:math:`(-i\\alpha\\cdot\\nabla + m\\beta + V)\\psi` at points x by fourth-order central differences."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1] + (4,), dtype=complex)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        d = (func(x - 2 * e) - 8 * func(x - e) + 8 * func(x + e) - func(x + 2 * e)) / (12 * h)
        out += -1j * np.einsum("ab,...b->...a", ALPHA[i], d)
    psi = np.asarray(func(x), dtype=complex)
    r = np.linalg.norm(x, axis=-1)
    xh = x / r[..., None]
    ax = np.einsum("...i,iab->...ab", xh, ALPHA)
    V = (coupling.nu * np.eye(4) + coupling.mu * BETA - 1j * coupling.lam * ax @ BETA) / r[..., None, None]
    out += coupling.mass * np.einsum("ab,...b->...a", BETA, psi)
    out += np.einsum("...ab,...b->...a", V, psi)
    return out


def channel_field(coeffs: dict) -> Callable[[np.ndarray], np.ndarray]:
    """Cartesian field :math:`\\sum r^{-1}(g^+_c\\Phi^+_c + g^-_c\\Phi^-_c)` from radial callables.

    ``coeffs`` maps Channel -> (g_plus, g_minus), each a callable of r.
    """
    def psi(x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        theta = np.arccos(np.clip(x[..., 2] / r, -1, 1))
        phi = np.mod(np.arctan2(x[..., 1], x[..., 0]), 2 * math.pi)
        out = np.zeros(x.shape[:-1] + (4,), dtype=complex)
        for c, (gp, gm) in coeffs.items():
            out += (gp(r) / r)[..., None] * basis_spinor(c, 1, theta, phi)
            out += (gm(r) / r)[..., None] * basis_spinor(c, -1, theta, phi)
        return out

    return psi
