"""Registry of numerical acceptance checks.

Every check is a small deterministic experiment returning a
:class:`CheckResult`.  Checks are grouped by module (``channel_core``,
``radial``, ``spectral``, ``hardy``, ``partialwave``) and most carry the
number of the acceptance criterion they implement.  :func:`run_checks` runs
a filtered subset; ``inject_fault="D"`` perturbs every transfer matrix the
checks obtain, as a negative control of the suite itself.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .channel_core import (
    Channel,
    Coupling,
    Regime,
    TransferMatrix,
    classify,
    compute_delta,
    distinguished_theta,
    iter_channels,
    representation_matrix,
    transfer_matrix,
)
from .inequalities import decays_per_decade, hardy_check, sharpness_probe, trace_probe
from .partialwave import (
    ChannelCoefficients,
    SphereQuadrature,
    commutator_checks,
    decompose,
    evaluate_terms,
    field_norm,
    gram_matrix,
    pauli_spinor,
    pauli_terms,
    reconstruct,
    sigma_dot_xhat,
    spin_orbit_terms,
)
from .radial import (
    RadialFunction,
    RadialGrid,
    apply_radial_operator,
    extract_boundary_data,
    integrate_outward,
    membership_theta,
)
from .spectral import bessel_theta_exact, coulomb_eigenfunction, shoot_eigenvalues

SEED = 20240607
FAULT_SIZE = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    group: str
    criterion: Optional[int]
    passed: bool
    detail: str
    seconds: float = 0.0


@dataclass(frozen=True)
class Check:
    name: str
    group: str
    criterion: Optional[int]
    func: Callable[["Context"], tuple[bool, str]]


class Context:
    """Shared inputs of the checks; the only mutable knob is the fault injection."""

    def __init__(self, inject_fault: Optional[str] = None):
        if inject_fault not in (None, "D"):
            raise ValueError(f"unknown fault {inject_fault!r}; the only fault is 'D'")
        self.fault = inject_fault

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng(SEED + salt)

    def transfer(self, coupling: Coupling, k: int, regime: Regime) -> np.ndarray:
        D = transfer_matrix(coupling, k, regime).entries
        if self.fault == "D":
            D = D + FAULT_SIZE * np.array([[1.0, 0.0], [0.0, 0.0]])
        return D

    def classify(self, coupling: Coupling, k: int):
        report = classify(coupling, k)
        if self.fault == "D" and report.regime.has_extensions:
            D = TransferMatrix(report.transfer.kind, self.transfer(coupling, k, report.regime))
            report = type(report)(report.delta, report.gamma, report.regime, D, report.tau, report.kappa)
        return report


REGISTRY: list[Check] = []


def check(name: str, group: str, criterion: Optional[int] = None):
    def wrap(func):
        REGISTRY.append(Check(name, group, criterion, func))
        return func

    return wrap


def _fmt(x: float) -> str:
    return f"{x:.3e}"


# --------------------------------------------------------------------- channel_core

@check("channel_core.threshold", "channel_core", 1)
def _threshold(ctx: Context):
    root = math.sqrt(3) / 2
    nus = np.concatenate([np.arange(-12000, 12001) * 1e-4, [root, -root]])
    wrong = 0
    for nu in nus:
        coupling = Coupling(nu=float(nu))
        esa = all(not classify(coupling, k).regime.has_extensions for k in (-3, -2, -1, 1, 2, 3))
        wrong += esa != (abs(nu) <= root)
    return wrong == 0, f"{nus.size} couplings, {wrong} misclassified"


@check("channel_core.scalar_potential", "channel_core", 2)
def _scalar(ctx: Context):
    rng = ctx.rng(2)
    bad = 0
    for _ in range(200):
        mu = float(rng.uniform(-5, 5))
        k = int(rng.choice([-6, -5, -4, -3, -2, -1, 1, 2, 3, 4, 5, 6]))
        bad += classify(Coupling(mu=mu), k).regime.has_extensions
    return bad == 0, f"200 draws, {bad} with extensions"


@check("channel_core.distinguished_coulomb", "channel_core", 3)
def _distinguished(ctx: Context):
    coupling = Coupling(nu=-1.0)
    expect = {1: 3 * math.pi / 4, -1: math.pi / 4}
    err = 0.0
    for k, target in expect.items():
        for m_j in (-0.5, 0.5):
            err = max(err, abs(distinguished_theta(coupling, Channel(0.5, m_j, k)).theta - target))
    return err <= 1e-14, f"max error {_fmt(err)}"


def _draw(rng: np.random.Generator, regime: Regime) -> tuple[Coupling, int]:
    """A random coupling and k with delta in the given extension regime."""
    while True:
        k = int(rng.choice([-3, -2, -1, 1, 2, 3]))
        lam = float(rng.uniform(-1, 1))
        mu = float(rng.uniform(-1, 1))
        base = (k + lam) ** 2 + mu**2
        if regime is Regime.SUBCRITICAL:
            delta = float(rng.uniform(0.01, 0.24))
        elif regime is Regime.CRITICAL:
            delta = 0.0
        else:
            delta = float(rng.uniform(-2.0, -0.01))
        if base > delta:
            nu = math.sqrt(base - delta) * float(rng.choice([-1, 1]))
            return Coupling(nu=nu, mu=mu, lam=lam), k


def _matrix_identities(ctx: Context, regime: Regime, draws: int = 1000) -> tuple[bool, str]:
    rng = ctx.rng(4 + list(Regime).index(regime))
    worst = 0.0
    used = 0
    while used < draws:
        coupling, k = _draw(rng, regime)
        report = classify(coupling, k)
        if report.regime is not regime:
            continue  # float rounding moved delta across a threshold
        used += 1
        D = ctx.transfer(coupling, k, regime)
        kappa, g = report.kappa, report.gamma
        if regime is Regime.CRITICAL:
            worst = max(worst, np.abs(D @ D).max() / max(1.0, np.abs(D).max() ** 2))
            continue
        M = representation_matrix(coupling, k, regime).entries
        worst = max(worst, np.abs(D @ M - np.eye(2)).max())
        if regime is Regime.SUBCRITICAL:
            if abs(kappa - g) > 1e-6:
                target = 1 / (2 * g * (kappa - g))
                worst = max(worst, abs(np.linalg.det(D) - target) / abs(target))
        else:
            target = -1 / (2j * g * (kappa - 1j * g))
            worst = max(worst, np.abs(D @ D - target * np.eye(2)).max() / abs(target))
    return worst <= 1e-12, f"{draws} draws, max relative error {_fmt(worst)}"


@check("channel_core.matrices_subcritical", "channel_core", 4)
def _mat_sub(ctx):
    return _matrix_identities(ctx, Regime.SUBCRITICAL)


@check("channel_core.matrices_critical", "channel_core", 4)
def _mat_crit(ctx):
    return _matrix_identities(ctx, Regime.CRITICAL)


@check("channel_core.matrices_supercritical", "channel_core", 4)
def _mat_super(ctx):
    return _matrix_identities(ctx, Regime.SUPERCRITICAL)


# --------------------------------------------------------------------- spectral

BESSEL = Coupling(nu=0.0, mu=0.0, lam=-0.7, mass=1.0)  # k + lam = 0.3 for k = 1


@check("spectral.bessel_printed_condition", "spectral", 5)
def _bessel_printed(ctx: Context):
    """Shooting at theta in {2pi/3, 3pi/4, 5pi/6} against a = m cos(2 theta); no eigenvalue at theta = 0."""
    lines, ok = [], True
    for theta in (2 * math.pi / 3, 3 * math.pi / 4, 5 * math.pi / 6):
        target = math.cos(2 * theta)
        found = [e.a for e in shoot_eigenvalues(BESSEL, 1, theta)]
        err = min((abs(a - target) for a in found), default=math.inf)
        ok &= err < 1e-6
        lines.append(f"theta={theta:.4f}: target {target:+.3f}, found {[round(a, 6) for a in found]}")
    zero = shoot_eigenvalues(BESSEL, 1, 0.0)
    ok &= not zero
    lines.append(f"theta=0: {len(zero)} eigenvalues")
    return ok, "; ".join(lines)


@check("spectral.bessel_exact_condition", "spectral", 5)
def _bessel_exact(ctx: Context):
    """Companion: shooting at the theta implied by the exact Bessel pair recovers a to 1e-6."""
    worst = 0.0
    for target in (-0.5, 0.0, 0.5):
        theta = bessel_theta_exact(0.3, 1.0, target).theta
        found = [e.a for e in shoot_eigenvalues(BESSEL, 1, theta, search=(target - 0.2, target + 0.2), n_scan=40)]
        worst = max(worst, min((abs(a - target) for a in found), default=math.inf))
    return worst < 1e-6, f"max |da| {_fmt(worst)}"


@check("spectral.coulomb_eigenfunction", "spectral", 6)
def _coulomb(ctx: Context):
    lines, ok = [], True
    for nu in (0.99, 1.0):
        state = coulomb_eigenfunction(nu)
        for channel, f in state.channels.items():
            res = apply_radial_operator(state.coupling, channel, f) - f.scaled(state.a)
            rel = res.l2_norm() / f.l2_norm()
            report = ctx.classify(state.coupling, channel.k)
            theta = distinguished_theta(state.coupling, channel).theta
            member = membership_theta(f, theta, report, tol=1e-6)
            ok &= rel < 1e-8 and member.member
            lines.append(f"nu={nu} m_j={channel.m_j:+.1f}: residual {_fmt(rel)}, defect {_fmt(member.defect)}")
    return ok, "; ".join(lines)


@check("spectral.coulomb_ground_state", "spectral")
def _coulomb_shoot(ctx: Context):
    coupling = Coupling(nu=-0.99)
    exact = math.sqrt(1 - 0.99**2)
    found = shoot_eigenvalues(coupling, -1, 0.0, search=(exact - 0.05, exact + 0.05), n_scan=20)
    err = min((abs(e.a - exact) for e in found), default=math.inf)
    return err < 1e-8, f"|da| {_fmt(err)}"


# --------------------------------------------------------------------- hardy

def _random_bumps(rng: np.random.Generator):
    c = rng.normal(size=3)
    b = rng.uniform(0.5, 3.0, size=3)
    r0 = rng.uniform(0.0, 3.0, size=3)

    def f(r):
        r = np.asarray(r, dtype=float)[..., None]
        return np.sum(c * np.exp(-b * (r - r0) ** 2), axis=-1)

    def df(r):
        r = np.asarray(r, dtype=float)[..., None]
        return np.sum(-2 * b * (r - r0) * c * np.exp(-b * (r - r0) ** 2), axis=-1)

    return f, df


@check("hardy.random_functions", "hardy", 7)
def _hardy_random(ctx: Context):
    rng = ctx.rng(7)
    failures, worst = 0, 0.0
    for _ in range(100):
        f, df = _random_bumps(rng)
        for a, R in ((float(rng.uniform(-0.5, 0.45)), 1.0), (float(rng.uniform(0.55, 2.0)), 1.0),
                     (0.5, float(rng.uniform(0.5, 3.0)))):
            rep = hardy_check(f, a, df, R=R)
            failures += not rep.passed
            worst = max(worst, rep.ratio)
    return failures == 0, f"300 checks, {failures} failures, max lhs/rhs {worst:.4f}"


@check("hardy.sharpness", "hardy", 7)
def _hardy_sharp(ctx: Context):
    worst = max(abs(sharpness_probe(a, eps) - 1) for a in (-1.0, 0.0, 0.3, 0.9, 2.0) for eps in (1e-2, 1e-3))
    return worst <= 1e-8, f"max |ratio - 1| {_fmt(worst)}"


@check("hardy.worked_example", "hardy", 7)
def _hardy_example(ctx: Context):
    rep = hardy_check(lambda r: r * np.exp(-r), 0.0, lambda r: (1 - r) * np.exp(-r))
    err = max(abs(rep.lhs - 0.125), abs(rep.rhs - 0.25))
    return err <= 1e-10, f"(lhs, rhs) = ({rep.lhs:.15f}, {rep.rhs:.15f})"


@check("hardy.trace_decay", "hardy", 8)
def _trace(ctx: Context):
    conforming = [
        trace_probe(lambda r: r, 0.0, "TraceZero"),
        trace_probe(lambda r: 1 - 1 / (1 + r), 0.9, "TraceInfinity"),
        trace_probe(lambda r: np.sin(r) * np.exp(-r), 0.5, "TraceAtR", R=math.pi),
    ]
    decays = [decays_per_decade(s) for s in conforming]
    control = decays_per_decade(trace_probe(np.sqrt, 0.0, "TraceZero"))
    return all(decays) and not control, f"conforming {decays}, sqrt control decays: {control}"


# --------------------------------------------------------------------- partialwave

def _random_coefficients(rng: np.random.Generator, j_max: float, grid: RadialGrid) -> ChannelCoefficients:
    bump = np.exp(-4 * (grid.points - 2) ** 2)
    functions = {}
    for c in iter_channels(j_max):
        z = rng.normal(size=4)
        functions[c] = RadialFunction(grid, (z[0] + 1j * z[1]) * bump, (z[2] + 1j * z[3]) * bump * grid.points)
    return ChannelCoefficients(grid, j_max, functions)


@check("partialwave.round_trip", "partialwave", 9)
def _round_trip(ctx: Context):
    rng = ctx.rng(9)
    grid = RadialGrid.geometric(0.5, 4.0, 120)
    worst = 0.0
    for j_max in (0.5, 1.5, 2.5, 3.5):
        quad = SphereQuadrature.for_j_max(j_max)
        values = reconstruct(_random_coefficients(rng, j_max, grid), quad)
        again = reconstruct(decompose(values, grid, j_max, quad), quad)
        worst = max(worst, field_norm(again - values, grid, quad) / field_norm(values, grid, quad))
    gram = gram_matrix(3.5)
    gerr = float(np.abs(gram - np.eye(gram.shape[0])).max())
    return worst < 1e-10 and gerr < 1e-10, f"round trip {_fmt(worst)}, Gram {_fmt(gerr)}"


def _spinor_identities(printed_sign: bool) -> float:
    quad = SphereQuadrature.for_j_max(3.5)
    worst = 0.0
    for c in iter_channels(3.5):
        if c.k < 0:
            continue  # each (j, m_j) once
        for branch in (0.5, -0.5):
            psi = pauli_spinor(c.j, c.m_j, branch, quad.theta, quad.phi)
            swap = sigma_dot_xhat(psi, quad.theta, quad.phi) - pauli_spinor(c.j, c.m_j, -branch, quad.theta, quad.phi)
            sign = math.copysign(1.0, branch) if printed_sign else -math.copysign(1.0, branch)
            lhs = evaluate_terms(spin_orbit_terms(pauli_terms(c.j, c.m_j, branch)), quad.theta, quad.phi)
            eig = lhs - sign * (c.j + 0.5) * psi
            worst = max(worst, np.abs(swap).max(), np.abs(eig).max())
    return float(worst)


@check("partialwave.identities_printed", "partialwave", 9)
def _ident_printed(ctx: Context):
    """sigma.xhat swap and (1 + sigma.L) psi_{j+-1/2} = +-(j+1/2) psi as printed."""
    err = _spinor_identities(printed_sign=True)
    return err < 1e-10, f"max pointwise defect {_fmt(err)}"


@check("partialwave.identities_corrected", "partialwave", 9)
def _ident_corrected(ctx: Context):
    """Companion with (1 + sigma.L) psi_{j+-1/2} = -+(j+1/2) psi, the value for L = -i x cross grad."""
    err = _spinor_identities(printed_sign=False)
    return err < 1e-10, f"max pointwise defect {_fmt(err)}"


@check("partialwave.commutators", "partialwave", 10)
def _commutators(ctx: Context):
    rng = ctx.rng(10)
    grid = RadialGrid.geometric(1.0, 3.0, 200)
    field = _random_coefficients(rng, 2.5, grid)
    coupling = Coupling(nu=-0.7, mu=0.3, lam=0.4)
    rep = commutator_checks(coupling, field)
    ctrl_k = commutator_checks(coupling, field, extra=lambda x: x[..., 0] / np.sum(x * x, axis=-1))
    ctrl_r = commutator_checks(coupling, field, extra=lambda x: 1 / np.sum(x * x, axis=-1))
    ok = (rep.k_v_relative < 1e-8 and rep.dr_rv_relative < 1e-6
          and ctrl_k.k_v_relative > 1e-2 and ctrl_r.dr_rv_relative > 1e-2)
    return ok, (f"[K,V] {_fmt(rep.k_v_relative)}, [d_r,|x|V] {_fmt(rep.dr_rv_relative)}, "
                f"controls {_fmt(ctrl_k.k_v_relative)} / {_fmt(ctrl_r.dr_rv_relative)}")


# --------------------------------------------------------------------- radial

FIT_CASES = (
    ("subcritical", Coupling(nu=0.99, mu=0.1, lam=0.05), 1),
    ("critical", Coupling(nu=1.0), 1),
    ("supercritical", Coupling(nu=1.2, mu=0.3, lam=0.1), 1),
)


@check("radial.boundary_fit", "radial", 11)
def _fit(ctx: Context):
    grid = RadialGrid.geometric(1e-6, 1.0, 800)
    worst = 0.0
    lines = []
    for label, coupling, k in FIT_CASES:
        report = ctx.classify(coupling, k)
        A = np.array([0.7 - 0.2j, 1.1 + 0.4j])
        if report.regime is Regime.SUPERCRITICAL:
            # planted in modulus/phase form |A-| = tau |A+|
            A = np.array([np.exp(0.4j), report.tau * np.exp(-0.4j)])
        f = integrate_outward(coupling, k, 0.3, A, grid)
        bd = extract_boundary_data(f, report)
        err = float(np.abs(bd.vector - A).max() / np.abs(A).max())
        if report.regime is Regime.SUPERCRITICAL:
            member = membership_theta(f, 0.4, report, tol=1e-8)
            err = max(err, member.defect)
        worst = max(worst, err)
        lines.append(f"{label} {_fmt(err)}")
    return worst <= 1e-8, ", ".join(lines)


@check("radial.determinant_limits", "radial", 11)
def _determinant(ctx: Context):
    grid = RadialGrid.geometric(1e-6, 1.0, 800)
    worst = 0.0
    A = np.array([0.7 - 0.2j, 1.1 + 0.4j])
    B = np.array([-0.3 + 0.5j, 0.9 - 0.1j])
    for _, coupling, k in FIT_CASES:
        report = ctx.classify(coupling, k)
        if report.regime is Regime.SUPERCRITICAL:
            continue  # the constant differs there; covered by the boundary fit
        f = integrate_outward(coupling, k, 0.3, A, grid)
        g = integrate_outward(coupling, k, 0.3, B, grid)
        W = f.f_plus * np.conj(g.f_minus) - f.f_minus * np.conj(g.f_plus)
        cross = A[0] * np.conj(B[1]) - A[1] * np.conj(B[0])
        if report.regime is Regime.SUBCRITICAL:
            pred = np.linalg.det(ctx.transfer(coupling, k, report.regime)) * cross
        else:
            pred = cross
        worst = max(worst, float(np.abs(W[:50] - pred).max() / abs(pred)))
    return worst <= 1e-6, f"max relative error {_fmt(worst)}"


@check("radial.bessel_operator_residual", "radial")
def _bessel_residual(ctx: Context):
    from .spectral import bessel_eigenpair

    f = bessel_eigenpair(0.3, 1.0, 0.5)
    res = apply_radial_operator(BESSEL, 1, f) - f.scaled(0.5)
    rel = res.l2_norm() / f.l2_norm()
    return rel < 1e-8, f"relative residual {_fmt(rel)}"


@check("channel_core.delta_formula", "channel_core")
def _delta(ctx: Context):
    rng = ctx.rng(13)
    worst = 0.0
    for _ in range(200):
        nu, mu, lam = rng.uniform(-2, 2, size=3)
        k = int(rng.choice([-2, -1, 1, 2]))
        worst = max(worst, abs(compute_delta(Coupling(nu, mu, lam), k) - ((k + lam) ** 2 + mu**2 - nu**2)))
    return worst < 1e-12, f"max error {_fmt(worst)}"


# --------------------------------------------------------------------- runner

GROUP_ALIASES = {"inequality_lab": "hardy", "radial_engine": "radial"}


def select(filter_name: Optional[str] = None) -> list[Check]:
    if not filter_name:
        return list(REGISTRY)
    key = GROUP_ALIASES.get(filter_name, filter_name)
    return [c for c in REGISTRY if c.group == key or key in c.name]


def run_check(chk: Check, ctx: Context) -> CheckResult:
    start = time.perf_counter()
    try:
        passed, detail = chk.func(ctx)
    except Exception as exc:  # a crashing check is a failing check
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(chk.name, chk.group, chk.criterion, bool(passed), detail, time.perf_counter() - start)


def run_checks(filter_name: Optional[str] = None, inject_fault: Optional[str] = None) -> list[CheckResult]:
    ctx = Context(inject_fault)
    return [run_check(c, ctx) for c in select(filter_name)]
