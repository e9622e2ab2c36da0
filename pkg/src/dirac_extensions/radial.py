"""Radial 2x2 Dirac system on a geometric grid.

The radial operator of one channel is

    h = [[ m + (nu+mu)/r ,  -d/dr + (k+lam)/r ],
         [ d/dr + (k+lam)/r,  -m + (nu-mu)/r  ]]

acting on (f+, f-).  Near r = 0 every solution of ``h f = a f`` follows the
leading fundamental matrix ``P(r)``: ``D diag(r^g, r^-g)`` subcritically,
``I + M log r`` critically and ``D diag(r^{ig}, r^{-ig})`` supercritically.
The coordinates ``psi = P(r)^-1 f`` converge to the boundary coefficients
(A+, A-) as r -> 0; both the integrators and the boundary fit work in them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .channel_core import (
    Channel,
    Coupling,
    Regime,
    RegimeReport,
    TransferMatrix,
    classify,
    representation_matrix,
    reduce_theta,
    theta_of_seed,
)
from .errors import (
    ExponentForbidden,
    GridTooSmall,
    IllConditionedFit,
    NotInAnyThetaSubspace,
    RegimeMismatch,
    StepSizeUnderflow,
)

DEFAULT_R_MIN = 1e-6
DEFAULT_N = 4000
DEFAULT_FIT_HI = 1e-2
RTOL = 1e-10
MAX_FIT_CONDITION = 1e12


@dataclass(frozen=True)
class RadialGrid:
    points: np.ndarray = field(repr=False)
    r_min: float
    r_max: float
    n: int

    @classmethod
    def geometric(cls, r_min: float = DEFAULT_R_MIN, r_max: float = 40.0, n: int = DEFAULT_N) -> "RadialGrid":
        if not (0 < r_min < r_max) or n < 2:
            raise ValueError(f"invalid grid r_min={r_min}, r_max={r_max}, n={n}")
        h = math.log(r_max / r_min) / (n - 1)
        pts = r_min * np.exp(h * np.arange(n))
        pts[-1] = r_max
        pts.setflags(write=False)
        return cls(pts, float(r_min), float(r_max), int(n))

    @property
    def log_step(self) -> float:
        return math.log(self.r_max / self.r_min) / (self.n - 1)

    def refined(self, factor: float = 10.0) -> "RadialGrid":
        """Same r_max, r_min divided by ``factor`` and the log step halved."""
        r_min = self.r_min / factor
        n = int(round(math.log(self.r_max / r_min) / (0.5 * self.log_step))) + 1
        return RadialGrid.geometric(r_min, self.r_max, n)


@dataclass(frozen=True)
class RadialFunction:
    grid: RadialGrid
    f_plus: np.ndarray = field(repr=False)
    f_minus: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("f_plus", "f_minus"):
            arr = np.array(getattr(self, name), dtype=complex)
            if arr.shape != (self.grid.n,):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({self.grid.n},)")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_callable(cls, grid: RadialGrid, func: Callable[[np.ndarray], tuple]) -> "RadialFunction":
        fp, fm = func(grid.points)
        return cls(grid, fp, fm)

    def __add__(self, other: "RadialFunction") -> "RadialFunction":
        return RadialFunction(self.grid, self.f_plus + other.f_plus, self.f_minus + other.f_minus)

    def __sub__(self, other: "RadialFunction") -> "RadialFunction":
        return RadialFunction(self.grid, self.f_plus - other.f_plus, self.f_minus - other.f_minus)

    def scaled(self, c: complex) -> "RadialFunction":
        return RadialFunction(self.grid, c * self.f_plus, c * self.f_minus)

    def l2_norm(self) -> float:
        dens = np.abs(self.f_plus) ** 2 + np.abs(self.f_minus) ** 2
        return math.sqrt(trapezoid_log(dens, self.grid))

    def stacked(self) -> np.ndarray:
        return np.stack([self.f_plus, self.f_minus], axis=-1)


@dataclass(frozen=True)
class BoundaryData:
    A_plus: complex
    A_minus: complex
    residual: float
    condition: float = 1.0

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.A_plus, self.A_minus])


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    boundary: BoundaryData
    defect: float
    theta_found: float | None = None

    def __bool__(self) -> bool:
        return self.member


# --------------------------------------------------------------------- quadrature

def trapezoid_log(values: np.ndarray, grid: RadialGrid) -> float:
    """Composite trapezoid of int values dr on a geometric grid (dr = r ds)."""
    return float(np.trapezoid(np.asarray(values) * grid.points, dx=grid.log_step).real)


def log_derivative(values: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """d/dr along axis 0 by fourth-order differences in s = log r, one-sided at the ends."""
    y = np.asarray(values)
    n = y.shape[0]
    if n < 5:
        raise GridTooSmall(f"need at least 5 grid points, got {n}")
    h = grid.log_step
    d = np.empty_like(y, dtype=np.result_type(y, float))
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * h)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * h)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * h)
    return d / grid.points.reshape((-1,) + (1,) * (y.ndim - 1))


# --------------------------------------------------------------------- operator

def apply_radial_operator(coupling: Coupling, channel: Channel | int, f: RadialFunction) -> RadialFunction:
    k = channel.k if isinstance(channel, Channel) else int(channel)
    grid = f.grid
    if grid.n < 5:
        raise GridTooSmall(f"need at least 5 grid points, got {grid.n}")
    r = grid.points
    kappa = k + coupling.lam
    m = coupling.mass
    dp = log_derivative(f.f_plus, grid)
    dm = log_derivative(f.f_minus, grid)
    top = (m + (coupling.nu + coupling.mu) / r) * f.f_plus - dm + kappa / r * f.f_minus
    bottom = dp + kappa / r * f.f_plus + (-m + (coupling.nu - coupling.mu) / r) * f.f_minus
    return RadialFunction(grid, top, bottom)


def phi_transform(f: RadialFunction, M_paper: TransferMatrix | np.ndarray) -> RadialFunction:
    mat = M_paper.entries if isinstance(M_paper, TransferMatrix) else np.asarray(M_paper, dtype=complex)
    phi = f.stacked() @ mat.T
    return RadialFunction(f.grid, phi[:, 0], phi[:, 1])


# --------------------------------------------------------------------- origin asymptotics

def fundamental_matrix(report: RegimeReport, r) -> np.ndarray:
    """Leading fundamental matrix P(r), shape (..., 2, 2), with f ~ P(r) (A+, A-)."""
    r = np.asarray(r, dtype=float)
    T = report.transfer.entries
    regime = report.regime
    if regime is Regime.SUBCRITICAL:
        g = report.gamma
        cols = np.stack([r**g, r**-g], axis=-1).astype(complex)
    elif regime is Regime.SUPERCRITICAL:
        g = report.gamma
        cols = np.stack([r ** (1j * g), r ** (-1j * g)], axis=-1)
    elif regime is Regime.CRITICAL:
        return np.eye(2) + np.log(r)[..., None, None] * T
    else:
        raise RegimeMismatch(f"no origin model in the regime {regime.value}")
    return T * cols[..., None, :]


def origin_model(report: RegimeReport, A: BoundaryData | Sequence[complex], r):
    """Leading small-r behaviour (f+(r), f-(r)) for boundary coefficients A."""
    vec = A.vector if isinstance(A, BoundaryData) else np.asarray(A, dtype=complex)
    out = fundamental_matrix(report, r) @ vec
    return out[..., 0], out[..., 1]


def _correction_exponents(report: RegimeReport) -> list:
    """Subleading powers of psi = P^-1 f through second order.

    Non-critically psi - A carries r^{n} and r^{n +- 2g} (g -> i g when
    supercritical); critically it carries r^n log^j r with j <= 2.
    """
    if report.regime is Regime.CRITICAL:
        return [(n, j) for n in (1, 2) for j in (0, 1, 2)]
    s = report.gamma if report.regime is Regime.SUBCRITICAL else 1j * report.gamma
    return [1 - 2 * s, 1.0, 1 + 2 * s, 2 - 2 * s, 2.0, 2 + 2 * s]


def _correction_columns(report: RegimeReport, r: np.ndarray) -> list:
    cols = []
    for p in _correction_exponents(report):
        if isinstance(p, tuple):
            n, j = p
            cols.append((r**n * np.log(r) ** j).astype(complex))
        else:
            cols.append(r.astype(complex) ** p)
    return cols


def extract_boundary_data(
    f: RadialFunction,
    report: RegimeReport,
    fit_window: tuple[float, float] | None = None,
    corrections: bool = True,
) -> BoundaryData:
    """Weighted least-squares fit of f against the origin model.

    Each sample carries the weight r^-1 (residuals scaled by r^-1/2).  With
    ``corrections`` the model is augmented by the subleading powers through
    second order (r^{n}, r^{n +- 2g} in psi coordinates, or r^n log^j r
    critically); their coefficients are nuisance parameters that keep the
    subdominant coefficient unbiased.  ``residual`` is the weighted misfit
    relative to the weighted norm of the data.
    """
    grid = f.grid
    lo, hi = fit_window if fit_window is not None else (grid.r_min, DEFAULT_FIT_HI)
    if hi > 1e-1:
        raise ValueError(f"fit window upper end {hi} exceeds 1e-1")
    mask = (grid.points >= lo * (1 - 1e-12)) & (grid.points <= hi * (1 + 1e-12))
    if mask.sum() < 20:
        raise GridTooSmall(f"fit window [{lo}, {hi}] holds only {mask.sum()} grid points")
    r = grid.points[mask]
    P = fundamental_matrix(report, r)  # (n, 2, 2)
    basis = [P[:, :, 0], P[:, :, 1]]
    if corrections:
        for col in _correction_columns(report, r):
            basis.append(P[:, :, 0] * col[:, None])
            basis.append(P[:, :, 1] * col[:, None])
    design = np.stack(basis, axis=-1)  # (n, 2, ncols)
    w = r ** -0.5
    design = (design * w[:, None, None]).reshape(-1, design.shape[-1])
    data = (np.stack([f.f_plus[mask], f.f_minus[mask]], axis=-1) * w[:, None]).reshape(-1)
    scale = np.linalg.norm(design, axis=0)
    scale[scale == 0] = 1.0
    normed = design / scale
    sv = np.linalg.svd(normed, compute_uv=False)
    cond = float(sv[0] / sv[-1]) ** 2 if sv[-1] > 0 else math.inf
    if cond > MAX_FIT_CONDITION:
        raise IllConditionedFit(f"normal-equation condition number {cond:.3e} exceeds {MAX_FIT_CONDITION:.0e}")
    coef, *_ = np.linalg.lstsq(normed, data, rcond=None)
    coef = coef / scale
    misfit = np.linalg.norm(design @ coef - data)
    norm = np.linalg.norm(data)
    residual = float(misfit / norm) if norm > 0 else float(misfit)
    return BoundaryData(complex(coef[0]), complex(coef[1]), residual, cond)


def membership_theta(
    f: RadialFunction,
    theta: float,
    report: RegimeReport,
    tol: float = 1e-6,
    fit_window: tuple[float, float] | None = None,
) -> MembershipResult:
    """Test whether the boundary coefficients of f lie in the theta-subspace.

    delta >= 0: |A+ sin(theta) + A- cos(theta)| <= tol |A|.
    delta < 0: the subspace is spanned by (e^{i theta}, tau e^{-i theta});
    both the modulus ratio and the phase difference are tested.
    """
    theta = float(theta)
    bd = extract_boundary_data(f, report, fit_window)
    A = bd.vector
    norm = float(np.linalg.norm(A))
    if norm == 0:
        return MembershipResult(False, bd, math.inf)
    if report.regime in (Regime.SUBCRITICAL, Regime.CRITICAL):
        defect = abs(A[0] * math.sin(theta) + A[1] * math.cos(theta)) / norm
        try:
            found = theta_of_seed(A[0], A[1], report, tol=1.0).theta
        except NotInAnyThetaSubspace:  # pragma: no cover - tol=1 accepts everything
            found = None
        return MembershipResult(defect <= tol, bd, defect, found)
    if report.regime is Regime.SUPERCRITICAL:
        tau = report.tau
        modulus = abs(abs(A[1]) - tau * abs(A[0])) / (abs(A[1]) + tau * abs(A[0]))
        found = reduce_theta(0.5 * (np.angle(A[0]) - np.angle(A[1])))
        phase = abs(math.sin(found - theta))
        defect = max(modulus, phase)
        return MembershipResult(defect <= tol, bd, defect, found)
    raise RegimeMismatch(f"no theta family in the regime {report.regime.value}")


# --------------------------------------------------------------------- ODE integration

def _report(coupling: Coupling, channel: Channel | int) -> RegimeReport:
    return classify(coupling, channel)


def _leading_report(coupling: Coupling, k: int) -> RegimeReport:
    """Report whose fundamental matrix is usable for outward seeding in every regime.

    Essentially self-adjoint channels have no extension family, but their
    regular solution still follows D diag(r^g, r^-g) with A- = 0.
    """
    report = classify(coupling, k)
    if report.regime.has_extensions:
        return report
    sub = Regime.SUBCRITICAL
    from .channel_core import transfer_matrix  # local: avoids widening the public import list

    return RegimeReport(report.delta, report.gamma, sub, transfer_matrix(coupling, k, sub), None, report.kappa)


def _system_matrices(coupling: Coupling, k: int):
    kappa = k + coupling.lam
    nu, mu, m = coupling.nu, coupling.mu, coupling.mass
    A0 = np.array([[-kappa, -(nu - mu)], [nu + mu, kappa]], dtype=complex)
    Bm = np.array([[0.0, m], [m, 0.0]], dtype=complex)
    Ba = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
    return A0, Bm, Ba


def _solve(rhs, span, y0, t_eval, what):
    # atol scales with the data so that c * seed reproduces the same step sequence
    atol = 1e-14 * max(float(np.max(np.abs(y0))), 1e-300)
    sol = solve_ivp(rhs, span, y0, method="RK45", rtol=RTOL, atol=atol, t_eval=t_eval)
    if sol.status != 0:
        raise StepSizeUnderflow(f"{what} integration failed: {sol.message}")
    return sol


def frobenius_solution(coupling, k, energies, A, r, report) -> np.ndarray:
    """Convergent Frobenius series of the solution with leading coefficients A at radius r.

    Returns f(r) with shape (N, 2), one row per energy.  The series carries
    every subleading power (r^{1-2g} and so on after multiplying through by
    P(r)^-1), so it is exact to rounding at the small radii where the
    integrators start.
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    A = np.asarray(A, dtype=complex)
    A0, Bm, Ba = _system_matrices(coupling, k)
    T = report.transfer.entries

    def apply_B(v):
        return v @ Bm.T + energies[:, None] * (v @ Ba.T)

    nb = energies.size
    total = np.zeros((nb, 2), dtype=complex)
    if report.regime is Regime.CRITICAL:
        L = math.log(r)
        c = np.tile(A, (nb, 1))
        d = c @ T.T
        total += c + d * L
        for n in range(1, 80):
            N = np.linalg.inv(n * np.eye(2) - A0)
            d = apply_B(d) @ N.T
            c = (apply_B(c) - d) @ N.T
            term = r**n * (c + d * L)
            total += term
            if np.max(np.abs(term)) <= 1e-17 * np.max(np.abs(total)):
                break
        return total
    g = report.gamma * (1j if report.regime is Regime.SUPERCRITICAL else 1.0)
    for sigma, col, amp in ((g, T[:, 0], A[0]), (-g, T[:, 1], A[1])):
        if amp == 0:
            continue
        c = np.tile(col * amp, (nb, 1))
        part = c * r**sigma
        for n in range(1, 80):
            N = np.linalg.inv((sigma + n) * np.eye(2) - A0)
            c = apply_B(c) @ N.T
            term = c * r ** (sigma + n)
            part = part + term
            if np.max(np.abs(term)) <= 1e-17 * np.max(np.abs(part)):
                break
        total += part
    return total


def _outward_batch(coupling, k, energies, seed, s_eval, report):
    """Integrate psi' = r P^-1 B(a) P psi from s = s_eval[0]; returns f at s_eval, shape (len(s_eval), N, 2)."""
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    nb = energies.size
    _, Bm, Ba = _system_matrices(coupling, k)
    seed = np.asarray(seed, dtype=complex)

    def rhs(s, y):
        r = math.exp(s)
        P = fundamental_matrix(report, r)
        Pinv = np.linalg.inv(P)
        Cm = r * (Pinv @ Bm @ P)
        Ca = r * (Pinv @ Ba @ P)
        Y = y.reshape(nb, 2)
        out = Y @ Cm.T + energies[:, None] * (Y @ Ca.T)
        return out.reshape(-1)

    r0 = math.exp(s_eval[0])
    f0 = frobenius_solution(coupling, k, energies, seed, r0, report)
    if len(s_eval) == 1:
        return f0[None]
    y0 = (f0 @ np.linalg.inv(fundamental_matrix(report, r0)).T).reshape(-1)
    sol = _solve(rhs, (s_eval[0], s_eval[-1]), y0, s_eval, "outward")
    psi = sol.y.T.reshape(len(s_eval), nb, 2)
    P = fundamental_matrix(report, np.exp(s_eval))  # (n, 2, 2)
    return np.einsum("nij,nbj->nbi", P, psi)


def _inward_batch(coupling, k, energies, s_start, s_stop, n_chunks: int = 32):
    """Decaying solution at s_stop, integrated from s_start[i] for each energy.

    Every element gets its own start point; the shared independent variable
    sigma in [0, 1] is mapped linearly onto [s_start[i], s_stop].  Rows are
    rescaled to unit norm between chunks because power-law tails near the
    gap edges overflow otherwise; the result is normalized per row.
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    s_start = np.broadcast_to(np.asarray(s_start, dtype=float), energies.shape)
    nb = energies.size
    m = coupling.mass
    A0, Bm, Ba = _system_matrices(coupling, k)
    kap = np.sqrt(m * m - energies**2)
    length = s_stop - s_start

    def rhs(sigma, y):
        s = s_start + sigma * length
        r = np.exp(s)
        Y = y.reshape(nb, 2)
        out = Y @ A0.T + r[:, None] * (Y @ Bm.T + energies[:, None] * (Y @ Ba.T))
        return (out * length[:, None]).reshape(-1)

    Y = np.stack([np.ones(nb), -kap / (m + energies)], axis=-1).astype(complex)
    edges = np.linspace(0.0, 1.0, n_chunks + 1)
    for t0, t1 in zip(edges[:-1], edges[1:]):
        Y /= np.linalg.norm(Y, axis=1, keepdims=True)
        sol = _solve(rhs, (t0, t1), Y.reshape(-1), [t1], "inward")
        Y = sol.y[:, -1].reshape(nb, 2)
    return (Y / np.linalg.norm(Y, axis=1, keepdims=True))[None]


def _solve_rescaled(rhs, s_points: np.ndarray, y0: np.ndarray, chunk: int = 50, what: str = "inward"):
    """Integrate through s_points in chunks, rescaling to unit norm between them.

    Returns (values, log_scale) with true solution = values * exp(log_scale).
    """
    n = len(s_points)
    vals = np.empty((n, y0.size), dtype=complex)
    logs = np.empty(n)
    y = np.asarray(y0, dtype=complex)
    acc = 0.0
    vals[0], logs[0] = y, 0.0
    i = 0
    while i < n - 1:
        j = min(i + chunk, n - 1)
        nrm = float(np.linalg.norm(y))
        y = y / nrm
        acc += math.log(nrm)
        sol = _solve(rhs, (s_points[i], s_points[j]), y, s_points[i : j + 1], what)
        vals[i + 1 : j + 1] = sol.y.T[1:]
        logs[i + 1 : j + 1] = acc
        y = sol.y[:, -1]
        i = j
    return vals, logs


def _seed_vector(seed) -> np.ndarray:
    if isinstance(seed, BoundaryData):
        return seed.vector
    return np.asarray(seed, dtype=complex).reshape(2)


def integrate_outward(
    coupling: Coupling,
    channel: Channel | int,
    a: float,
    seed: BoundaryData | Sequence[complex],
    grid: RadialGrid,
) -> RadialFunction:
    """Solve h f = a f outward from grid.r_min for the solution with leading coefficients ``seed``.

    The start value at r_min is the Frobenius series of that solution, i.e.
    origin_model(seed, r_min) plus its subleading powers.  Integration runs in psi = P(r)^-1 f, which tends to the seed as r -> 0,
    with an adaptive Dormand-Prince 5(4) scheme at relative tolerance 1e-10.
    In essentially self-adjoint channels the seed (1, 0) selects the regular
    solution.
    """
    k = channel.k if isinstance(channel, Channel) else int(channel)
    vec = _seed_vector(seed)
    if not np.any(vec):
        zero = np.zeros(grid.n)
        return RadialFunction(grid, zero, zero)
    report = _leading_report(coupling, k)
    s = np.log(grid.points)
    f = _outward_batch(coupling, k, [a], vec, s, report)[:, 0, :]
    return RadialFunction(grid, f[:, 0], f[:, 1])


def decay_rate(coupling: Coupling, a: float) -> float:
    m = coupling.mass
    if not abs(a) < abs(m) - 1e-9:
        raise ValueError(f"|a| = {abs(a)} must be below |m| - 1e-9 = {abs(m) - 1e-9}")
    return math.sqrt(m * m - a * a)


def integrate_inward(coupling: Coupling, channel: Channel | int, a: float, grid: RadialGrid) -> RadialFunction:
    """Decaying solution started at grid.r_max with e^{-kappa r}(1, -kappa/(m+a)), integrated to r_min."""
    k = channel.k if isinstance(channel, Channel) else int(channel)
    kap = decay_rate(coupling, a)
    m = coupling.mass
    A0, Bm, Ba = _system_matrices(coupling, k)

    def rhs(s, y):
        r = math.exp(s)
        return (A0 + r * (Bm + a * Ba)) @ y

    s = np.log(grid.points)[::-1]
    y0 = np.array([1.0, -kap / (m + a)], dtype=complex)
    vals, logs = _solve_rescaled(rhs, s, y0)
    f = (vals * np.exp(logs - kap * grid.r_max)[:, None])[::-1]
    return RadialFunction(grid, f[:, 0], f[:, 1])


# --------------------------------------------------------------------- the space J

def j_norm(u, grid: RadialGrid, a_exponent: float = 0.0, squared: bool = False) -> float:
    """Norm int |d/dr (r^a u)|^2 r^{-2a} dr of a sampled scalar function.

    ``u`` is an array on ``grid`` or a callable of r.  The exponent a = -1/2
    is excluded because the norm degenerates there.
    """
    if a_exponent == -0.5:
        raise ExponentForbidden("the J-norm is undefined for a = -1/2")
    r = grid.points
    vals = u(r) if callable(u) else np.asarray(u)
    g = log_derivative(r**a_exponent * vals, grid)
    value = trapezoid_log(np.abs(g) ** 2 * r ** (-2 * a_exponent), grid)
    return value if squared else math.sqrt(value)


def j_components(u, grid: RadialGrid) -> tuple[float, float]:
    """(int |u/r|^2 dr, int |u'|^2 dr) on the grid."""
    r = grid.points
    vals = u(r) if callable(u) else np.asarray(u)
    hardy = trapezoid_log(np.abs(vals / r) ** 2, grid)
    energy = trapezoid_log(np.abs(log_derivative(vals, grid)) ** 2, grid)
    return hardy, energy


def in_J(u: Callable[[np.ndarray], np.ndarray], grid: RadialGrid, rel_increment: float = 1e-3) -> bool:
    """Decide u/r, u' in L^2 near the origin by refining the grid twice.

    Each refinement divides r_min by 10 and halves the log step.  A component
    is declared divergent when it grows more than tenfold, or when the last
    refinement still adds more than ``rel_increment`` of its value (this
    catches logarithmic and slow power divergences that never grow tenfold
    in one step).
    """
    g1 = grid
    g2 = g1.refined()
    g3 = g2.refined()
    vals = [j_components(u, g) for g in (g1, g2, g3)]
    for idx in range(2):
        v1, v2, v3 = (vals[0][idx], vals[1][idx], vals[2][idx])
        if not all(map(math.isfinite, (v1, v2, v3))):
            return False
        if v1 > 0 and v3 / v1 > 10.0:
            return False
        if abs(v3 - v2) > rel_increment * max(abs(v3), 1e-300):
            return False
    return True


def distinguished_phi_minus(f: RadialFunction, coupling: Coupling, channel: Channel | int, regime: Regime | None = None) -> np.ndarray:
    """The combination of f+ and f- whose membership in J singles out the distinguished extension."""
    k = channel.k if isinstance(channel, Channel) else int(channel)
    report = classify(coupling, k)
    regime = report.regime if regime is None else regime
    nu, mu = coupling.nu, coupling.mu
    kappa, gamma = report.kappa, report.gamma
    if regime is Regime.SUBCRITICAL:
        row = representation_matrix(coupling, k, regime).entries[1]
        return row[0] * f.f_plus + row[1] * f.f_minus
    if regime is Regime.CRITICAL:
        if abs(nu + mu) > 1e-12:
            return (nu + mu) * f.f_plus + kappa * f.f_minus
        return -2 * nu * f.f_minus
    raise RegimeMismatch(f"no distinguished combination in the regime {regime.value}")
