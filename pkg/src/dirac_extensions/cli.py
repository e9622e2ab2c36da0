"""Command-line front end: ``dirac-ext {classify,spectrum,fit,hardy,verify}``.

Records are flat maps with a fixed key order per command, written as JSON
lines (the default) or CSV with a fixed header.  Floats are printed with 17
significant digits, so every record round-trips bit for bit, and records
are sorted by (nu, mu, lambda, m, k, theta) whatever the execution order.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 distinguished extension requested where none exists.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channel_core import (
    Coupling,
    boundary_seed,
    classify,
    distinguished_theta,
    reduce_theta,
    theta_of_seed,
)
from .errors import DiracExtensionError, NoDistinguishedExtension, RegimeMismatch
from .radial import RadialGrid, extract_boundary_data, integrate_outward, membership_theta

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NO_DIST = 0, 1, 2, 3
COMMANDS = ("classify", "spectrum", "fit", "hardy", "verify")

COLUMNS = {
    "classify": ["schema_version", "command", "nu", "mu", "lambda", "m", "k", "j",
                 "delta", "gamma", "regime", "kappa", "tau", "theta_distinguished"],
    "spectrum": ["schema_version", "command", "nu", "mu", "lambda", "m", "k", "j",
                 "delta", "regime", "theta_input", "theta", "eigenvalues", "mismatch", "residuals"],
    "fit": ["schema_version", "command", "nu", "mu", "lambda", "m", "k", "j", "regime",
            "theta", "a", "A_plus_re", "A_plus_im", "A_minus_re", "A_minus_im",
            "residual", "condition", "theta_found"],
    "hardy": ["schema_version", "command", "function", "a", "R", "variant", "lhs", "rhs", "ratio", "passed"],
    "verify": ["schema_version", "command", "name", "group", "criterion", "passed", "seconds", "detail"],
}

HARDY_FUNCTIONS = {
    "r_exp": (lambda r: r * np.exp(-r), lambda r: (1 - r) * np.exp(-r)),
    "gauss": (lambda r: np.exp(-r * r), lambda r: -2 * r * np.exp(-r * r)),
    "bump": (lambda r: np.exp(-((r - 1) ** 2)), lambda r: -2 * (r - 1) * np.exp(-((r - 1) ** 2))),
    "rational": (lambda r: 1 / (1 + r) ** 2, lambda r: -2 / (1 + r) ** 3),
}


class ConfigError(Exception):
    """Raised for malformed flags or config files (exit code 2)."""


# --------------------------------------------------------------------- configuration

@dataclass(frozen=True)
class RunConfig:
    command: str
    nu: tuple = (0.0,)
    mu: tuple = (0.0,)
    lam: tuple = (0.0,)
    mass: float = 1.0
    ks: tuple = (-1, 1)
    thetas: tuple = ("dist",)
    energies: tuple = (0.0,)
    hardy_a: tuple = (0.0,)
    hardy_R: float = 1.0
    functions: tuple = ("r_exp",)
    grid_rmin: Optional[float] = None
    grid_rmax: Optional[float] = None
    grid_n: Optional[int] = None
    n_scan: int = 400
    fmt: str = "jsonl"
    out: Optional[str] = None
    filter: Optional[str] = None
    inject_fault: Optional[str] = None
    jobs: int = 1

    def __post_init__(self):
        for name in ("nu", "mu", "lam", "ks", "thetas"):
            if not getattr(self, name):
                raise ConfigError(f"{name} range is empty")
        for name in ("grid_rmin", "grid_rmax", "grid_n"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name.replace('_', '-')} must be positive, got {v}")
        if self.n_scan < 2:
            raise ConfigError("n-scan must be at least 2")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")

    def couplings(self) -> list[Coupling]:
        return [Coupling(nu, mu, lam, self.mass) for nu in self.nu for mu in self.mu for lam in self.lam]

    def grid(self, default: tuple[float, float, int]) -> RadialGrid:
        r_min = self.grid_rmin if self.grid_rmin is not None else default[0]
        r_max = self.grid_rmax if self.grid_rmax is not None else default[1]
        n = self.grid_n if self.grid_n is not None else default[2]
        try:
            return RadialGrid.geometric(r_min, r_max, int(n))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def has_grid(self) -> bool:
        return any(v is not None for v in (self.grid_rmin, self.grid_rmax, self.grid_n))


def parse_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise ConfigError(f"not a number: {text!r}") from exc
    if not math.isfinite(value):
        raise ConfigError(f"not a finite number: {text!r}")
    return value


def parse_range(text: str) -> tuple:
    """``lo:hi:step`` inclusive of both ends, values rounded to 12 decimals."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"range must be lo:hi:step, got {text!r}")
    lo, hi, step = (parse_float(p) for p in parts)
    if step <= 0 or hi < lo:
        raise ConfigError(f"range {text!r} needs step > 0 and hi >= lo")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(round(lo + i * step, 12) for i in range(count))


def parse_theta(text: str):
    if text.strip().lower() in ("dist", "distinguished"):
        return "dist"
    return parse_float(text)


def parse_k(text: str) -> int:
    try:
        k = int(text)
    except ValueError as exc:
        raise ConfigError(f"k must be a nonzero integer, got {text!r}") from exc
    if k == 0:
        raise ConfigError("k must be nonzero")
    return k


def read_config_file(path: str) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment; list values are comma separated."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for number, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{number}: unknown key {key!r}")
        values[key] = value
    return values


LIST_KEYS = {"k", "theta", "a", "energy", "function"}
CONFIG_KEYS = {
    "nu", "mu", "lambda", "m", "k", "j_max", "theta", "nu_range", "mu_range", "lambda_range",
    "grid_rmin", "grid_rmax", "grid_n", "format", "out", "filter", "inject_fault", "energy",
    "a", "R", "function", "n_scan", "jobs",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dirac-ext", description="Self-adjoint extensions of Dirac operators with Coulomb-type potentials.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in (
        ("classify", "criticality index, regime and distinguished theta per channel"),
        ("spectrum", "eigenvalues in the gap for given extension parameters"),
        ("fit", "boundary coefficients recovered from an outward solution"),
        ("hardy", "weighted Hardy inequality on built-in test functions"),
        ("verify", "run the acceptance checks"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--nu", type=str)
        p.add_argument("--mu", type=str)
        p.add_argument("--lambda", dest="lambda_", type=str)
        p.add_argument("--m", type=str)
        p.add_argument("--k", action="append")
        p.add_argument("--j-max", type=str)
        p.add_argument("--theta", action="append")
        p.add_argument("--nu-range", type=str)
        p.add_argument("--mu-range", type=str)
        p.add_argument("--lambda-range", type=str)
        p.add_argument("--grid-rmin", type=str)
        p.add_argument("--grid-rmax", type=str)
        p.add_argument("--grid-n", type=str)
        p.add_argument("--format", choices=("jsonl", "csv"))
        p.add_argument("--out", type=str)
        p.add_argument("--config", type=str)
        p.add_argument("--filter", type=str)
        p.add_argument("--inject-fault", type=str, help="verify only: 'D' perturbs every transfer matrix")
        p.add_argument("--energy", action="append", help="fit only: energy a of the outward solution")
        p.add_argument("--a", action="append", help="hardy only: weight exponent")
        p.add_argument("--R", type=str, help="hardy only: reference radius at a = 1/2")
        p.add_argument("--function", action="append", help=f"hardy only: one of {', '.join(HARDY_FUNCTIONS)}")
        p.add_argument("--n-scan", type=str, help="spectrum only: scan points")
        p.add_argument("--jobs", type=str, help="worker processes (output order is unaffected)")
    return parser


def _merged(args: argparse.Namespace, file_values: dict) -> dict:
    """Flag values, falling back to the config file; lists from the file are comma separated."""
    flags = {
        "nu": args.nu, "mu": args.mu, "lambda": args.lambda_, "m": args.m, "k": args.k,
        "j_max": args.j_max, "theta": args.theta, "nu_range": args.nu_range,
        "mu_range": args.mu_range, "lambda_range": args.lambda_range,
        "grid_rmin": args.grid_rmin, "grid_rmax": args.grid_rmax, "grid_n": args.grid_n,
        "format": args.format, "out": args.out, "filter": args.filter,
        "inject_fault": args.inject_fault, "energy": args.energy, "a": args.a, "R": args.R,
        "function": args.function, "n_scan": args.n_scan, "jobs": args.jobs,
    }
    merged = {}
    for key, value in flags.items():
        if value is None and key in file_values:
            value = file_values[key]
            if key in LIST_KEYS:
                value = [v.strip() for v in value.split(",") if v.strip()]
        merged[key] = value
    # a range given on one side and a value on the other: the flag wins
    for name in ("nu", "mu", "lambda"):
        if flags[name] is not None and flags[f"{name}_range"] is None:
            merged[f"{name}_range"] = None
        if flags[f"{name}_range"] is not None and flags[name] is None:
            merged[name] = None
    return merged


def _values(merged: dict, name: str) -> tuple:
    single, rng = merged[name], merged[f"{name}_range"]
    if single is not None and rng is not None:
        raise ConfigError(f"--{name} and --{name}-range are mutually exclusive")
    if rng is not None:
        return parse_range(rng)
    return (parse_float(single),) if single is not None else (0.0,)


def config_from_args(argv: Sequence[str]) -> RunConfig:
    args = build_parser().parse_args(list(argv))
    file_values = read_config_file(args.config) if args.config else {}
    merged = _merged(args, file_values)
    if merged["k"] is not None and merged["j_max"] is not None:
        raise ConfigError("--k and --j-max are mutually exclusive")
    if merged["k"] is not None:
        ks = tuple(sorted({parse_k(k) for k in merged["k"]}))
    elif merged["j_max"] is not None:
        j_max = parse_float(merged["j_max"])
        if j_max < 0.5 or (2 * j_max) % 2 != 1:
            raise ConfigError(f"j-max must be a positive half-odd integer, got {merged['j_max']}")
        top = int(j_max + 0.5)
        ks = tuple(k for n in range(1, top + 1) for k in (-n, n))
        ks = tuple(sorted(ks))
    else:
        ks = (-1, 1)
    thetas = tuple(parse_theta(t) for t in merged["theta"]) if merged["theta"] else ("dist",)
    energies = tuple(parse_float(a) for a in merged["energy"]) if merged["energy"] else (0.0,)
    hardy_a = tuple(parse_float(a) for a in merged["a"]) if merged["a"] else (0.0,)
    functions = tuple(merged["function"]) if merged["function"] else ("r_exp",)
    for name in functions:
        if name not in HARDY_FUNCTIONS:
            raise ConfigError(f"unknown function {name!r}; choose from {', '.join(HARDY_FUNCTIONS)}")
    fmt = merged["format"] or "jsonl"
    if fmt not in ("jsonl", "csv"):
        raise ConfigError(f"format must be jsonl or csv, got {fmt!r}")

    def opt_float(key):
        return None if merged[key] is None else parse_float(merged[key])

    def opt_int(key, default=None):
        if merged[key] is None:
            return default
        try:
            return int(merged[key])
        except ValueError as exc:
            raise ConfigError(f"{key} must be an integer, got {merged[key]!r}") from exc

    mass = opt_float("m")
    return RunConfig(
        command=args.command,
        nu=_values(merged, "nu"),
        mu=_values(merged, "mu"),
        lam=_values(merged, "lambda"),
        mass=1.0 if mass is None else mass,
        ks=ks,
        thetas=thetas,
        energies=energies,
        hardy_a=hardy_a,
        hardy_R=opt_float("R") or 1.0,
        functions=functions,
        grid_rmin=opt_float("grid_rmin"),
        grid_rmax=opt_float("grid_rmax"),
        grid_n=opt_int("grid_n"),
        n_scan=opt_int("n_scan", 400),
        fmt=fmt,
        out=merged["out"],
        filter=merged["filter"],
        inject_fault=merged["inject_fault"],
        jobs=opt_int("jobs", 1),
    )


# --------------------------------------------------------------------- serialization

def _encode(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return format(value, ".17g") if math.isfinite(value) else "null"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_encode(v) for v in value) + "]"
    return json.dumps(str(value), ensure_ascii=False)


def _csv_cell(value) -> str:
    if isinstance(value, (list, tuple)):
        return ";".join(_csv_cell(v) for v in value)
    text = _encode(value)
    if isinstance(value, str):
        return value
    return "" if text == "null" else text


def format_records(records: list[dict], command: str, fmt: str) -> str:
    columns = COLUMNS[command]
    if fmt == "jsonl":
        lines = []
        for rec in records:
            body = ",".join(f"{json.dumps(key)}:{_encode(rec.get(key))}" for key in columns)
            lines.append("{" + body + "}")
        return "".join(line + "\n" for line in lines)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_csv_cell(rec.get(key)) for key in columns])
    return buf.getvalue()


def _base(command: str, coupling: Coupling, k: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION, "command": command, "nu": coupling.nu, "mu": coupling.mu,
        "lambda": coupling.lam, "m": coupling.mass, "k": k, "j": abs(k) - 0.5,
    }


def _sort_key(rec: dict):
    theta = rec.get("theta")
    return (rec.get("nu", 0.0), rec.get("mu", 0.0), rec.get("lambda", 0.0), rec.get("m", 0.0), rec.get("k", 0),
            -math.inf if theta is None else theta, rec.get("a", 0.0))


# --------------------------------------------------------------------- commands

def _classify_job(job):
    coupling, k = job
    report = classify(coupling, k)
    try:
        theta = distinguished_theta(coupling, k).theta
    except (NoDistinguishedExtension, RegimeMismatch):
        theta = None
    rec = _base("classify", coupling, k)
    rec.update(delta=report.delta, gamma=report.gamma, regime=report.regime.value,
               kappa=report.kappa, tau=report.tau, theta_distinguished=theta)
    return rec


def _resolve_theta(coupling: Coupling, k: int, theta):
    if theta != "dist":
        return reduce_theta(float(theta))
    try:
        return distinguished_theta(coupling, k).theta
    except RegimeMismatch as exc:
        raise NoDistinguishedExtension(str(exc)) from exc


def _spectrum_job(job):
    from .spectral import shoot_eigenvalues

    coupling, k, theta_input, n_scan, grid = job
    report = classify(coupling, k)
    if not report.regime.has_extensions:
        raise RegimeMismatch(f"k={k} is essentially self-adjoint ({report.regime.value}); no theta family")
    theta = _resolve_theta(coupling, k, theta_input)
    results = shoot_eigenvalues(coupling, k, theta, n_scan=n_scan, grid=grid)
    residuals = [membership_theta(e.eigenfunction, theta, report).defect for e in results]
    rec = _base("spectrum", coupling, k)
    rec.update(delta=report.delta, regime=report.regime.value,
               theta_input="dist" if theta_input == "dist" else float(theta_input), theta=theta,
               eigenvalues=[e.a for e in results], mismatch=[e.mismatch for e in results],
               residuals=residuals)
    return rec


def _fit_job(job):
    coupling, k, theta_input, a, grid = job
    report = classify(coupling, k)
    if not report.regime.has_extensions:
        raise RegimeMismatch(f"k={k} is essentially self-adjoint ({report.regime.value}); no theta family")
    theta = _resolve_theta(coupling, k, theta_input)
    f = integrate_outward(coupling, k, a, boundary_seed(theta, report), grid)
    bd = extract_boundary_data(f, report)
    try:
        found = theta_of_seed(bd.A_plus, bd.A_minus, report, tol=1e-6).theta
    except DiracExtensionError:
        found = None
    rec = _base("fit", coupling, k)
    rec.update(regime=report.regime.value, theta=theta, a=a,
               A_plus_re=bd.A_plus.real, A_plus_im=bd.A_plus.imag,
               A_minus_re=bd.A_minus.real, A_minus_im=bd.A_minus.imag,
               residual=bd.residual, condition=bd.condition, theta_found=found)
    return rec


def _hardy_job(job):
    from .inequalities import hardy_check

    name, a, R = job
    f, df = HARDY_FUNCTIONS[name]
    rep = hardy_check(f, a, df, R=R)
    return {"schema_version": SCHEMA_VERSION, "command": "hardy", "function": name, "a": a, "R": R,
            "variant": rep.variant.value, "lhs": rep.lhs, "rhs": rep.rhs, "ratio": rep.ratio,
            "passed": rep.passed}


def _map(func, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [func(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, jobs))


def run_classify(config: RunConfig) -> tuple[int, list[dict]]:
    jobs = [(c, k) for c in config.couplings() for k in config.ks]
    return EXIT_OK, sorted(_map(_classify_job, jobs, config.jobs), key=_sort_key)


def run_spectrum(config: RunConfig) -> tuple[int, list[dict]]:
    grid = config.grid((1e-6, 40.0, 4000)) if config.has_grid else None
    jobs = [(c, k, t, config.n_scan, grid) for c in config.couplings() for k in config.ks for t in config.thetas]
    return EXIT_OK, sorted(_map(_spectrum_job, jobs, config.jobs), key=_sort_key)


def run_fit(config: RunConfig) -> tuple[int, list[dict]]:
    grid = config.grid((1e-6, 1.0, 800))
    jobs = [(c, k, t, a, grid) for c in config.couplings() for k in config.ks
            for t in config.thetas for a in config.energies]
    return EXIT_OK, sorted(_map(_fit_job, jobs, config.jobs), key=_sort_key)


def run_hardy(config: RunConfig) -> tuple[int, list[dict]]:
    jobs = [(name, a, config.hardy_R) for name in config.functions for a in config.hardy_a]
    records = _map(_hardy_job, jobs, config.jobs)
    records.sort(key=lambda r: (r["function"], r["a"]))
    return EXIT_OK, records


def run_verify(config: RunConfig, stream=None) -> tuple[int, list[dict]]:
    from .verification import run_checks, select

    stream = stream if stream is not None else sys.stdout
    if config.filter and not select(config.filter):
        raise ConfigError(f"filter {config.filter!r} selects no checks")
    try:
        results = run_checks(config.filter, config.inject_fault)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    width = max(len(r.name) for r in results)
    for r in results:
        crit = f"C{r.criterion}" if r.criterion else "--"
        status = "PASS" if r.passed else "FAIL"
        stream.write(f"{status}  {crit:>3}  {r.name:<{width}}  {r.seconds:7.2f}s  {r.detail}\n")
    failed = [r.name for r in results if not r.passed]
    total = sum(r.seconds for r in results)
    stream.write(f"{len(results) - len(failed)}/{len(results)} checks passed in {total:.1f}s\n")
    if failed:
        stream.write("failed: " + ", ".join(failed) + "\n")
    records = [{"schema_version": SCHEMA_VERSION, "command": "verify", "name": r.name, "group": r.group,
                "criterion": r.criterion, "passed": r.passed, "seconds": r.seconds, "detail": r.detail}
               for r in results]
    return (EXIT_VERIFY if failed else EXIT_OK), records


RUNNERS = {"classify": run_classify, "spectrum": run_spectrum, "fit": run_fit, "hardy": run_hardy}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = config_from_args(argv)
        if config.command == "verify":
            code, records = run_verify(config)
            if config.out:
                _write(format_records(records, "verify", config.fmt), config.out)
            return code
        code, records = RUNNERS[config.command](config)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except NoDistinguishedExtension as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NO_DIST
    except (RegimeMismatch, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    _write(format_records(records, config.command, config.fmt), config.out)
    return code


def _write(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
