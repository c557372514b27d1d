"""Command-line front end.

Exit codes: 0 all checks passed, 1 a property was violated, 2 usage or
precondition error, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import checks
from .channels import AMPLIFIER, ATTENUATOR, COMPOSITE, ChannelSpec, thinning
from .errors import ConvergenceError, DomainError
from .kkt import geometric_l1_gap, kkt_residuals, maximize_simplex
from .moe import FAMILIES, renyi_chain_check
from .norms import brute_force_ratio, norm, norm_by_shooting, thermal_argmax_distance
from .serialize import dumps, dumps_csv, norm_report_dict, read_spectrum, spectrum_csv
from .sobolev import F_a, SobolevPoint, logsobolev_margin, normalize_admissible, ode_shoot, thermal_admissible

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

BRUTE_REL_TOL = 1e-5


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    channel: str | None = None
    lam: float | None = None
    kappa: float | None = None
    p: float | None = None
    q: float | None = None
    z: float | None = None
    a: float | None = None
    dim: int = 24
    trials: int = 1000
    seed: int = 42
    tol: float = 1e-10
    method: str = "gaussian"
    quick: bool = False
    timing: bool = False
    input: str | None = None
    out: str | None = None
    format: str = "json"


# ---- argument validation: each numeric flag mirrors one precondition


def _need(cfg, *names):
    for n in names:
        if getattr(cfg, n) is None:
            raise UsageError(f"--{'lambda' if n == 'lam' else n} is required for {cfg.command}")


def _check(cond: bool, msg: str):
    if not cond:
        raise UsageError(msg)


def _channel(cfg: RunConfig) -> ChannelSpec:
    kind = cfg.channel or ATTENUATOR
    if kind == ATTENUATOR:
        _need(cfg, "lam")
        _check(0.0 <= cfg.lam <= 1.0, f"--lambda must satisfy 0 <= lambda <= 1, got {cfg.lam}")
        return ChannelSpec.attenuator(cfg.lam)
    if kind == AMPLIFIER:
        _need(cfg, "kappa")
        _check(cfg.kappa >= 1.0, f"--kappa must satisfy kappa >= 1, got {cfg.kappa}")
        return ChannelSpec.amplifier(cfg.kappa)
    _need(cfg, "lam", "kappa")
    _check(0.0 <= cfg.lam <= 1.0, f"--lambda must satisfy 0 <= lambda <= 1, got {cfg.lam}")
    _check(cfg.kappa >= 1.0, f"--kappa must satisfy kappa >= 1, got {cfg.kappa}")
    return ChannelSpec.composite(cfg.lam, cfg.kappa)


def _exponent(name, v):
    _check(v > 1.0, f"--{name} must satisfy {name} > 1, got {v}")


# ---- commands; each returns (payload, violations)


def cmd_norm(cfg: RunConfig):
    spec = _channel(cfg)
    _need(cfg, "p", "q")
    _exponent("p", cfg.p)
    _exponent("q", cfg.q)
    violations = []
    if cfg.method == "shooting":
        _check(spec.kind == ATTENUATOR and 0 < spec.lam < 1, "--method shooting needs an attenuator with 0 < lambda < 1")
        _check(cfg.p < cfg.q, f"--method shooting needs p < q, got p={cfg.p}, q={cfg.q}")
        return norm_report_dict(norm_by_shooting(spec.lam, cfg.p, cfg.q, cfg.tol), cfg.timing), violations
    out = {}
    g = None
    if cfg.method in ("gaussian", "both"):
        g = norm(spec, cfg.p, cfg.q)
        if g.residuals.get("boundary_anomaly"):
            violations.append("thermal optimum pushed to z -> 1 although p < q")
        out["gaussian"] = norm_report_dict(g, cfg.timing)
    if cfg.method in ("brute", "both"):
        _check(0 <= cfg.dim <= 64, f"--dim must satisfy 0 <= N <= 64 for brute force, got {cfg.dim}")
        b = brute_force_ratio(spec, cfg.p, cfg.q, cfg.dim, seed=cfg.seed)
        out["brute"] = norm_report_dict(b, cfg.timing)
        if g is not None and not g.infinite:
            out["gap"] = g.value - b.value
            if b.value > g.value * (1.0 + BRUTE_REL_TOL):
                violations.append(f"brute force exceeds the thermal optimum by {b.value / g.value - 1:.3g} relative")
            if g.z_star is not None:
                out["argmax_l1"] = thermal_argmax_distance(b, g.z_star, cfg.p)
    if cfg.method == "gaussian":
        return out["gaussian"], violations
    if cfg.method == "brute":
        return out["brute"], violations
    return out, violations


def cmd_logsobolev(cfg: RunConfig):
    _need(cfg, "z", "a")
    _check(0.0 < cfg.z < 1.0, f"--z must satisfy 0 < z < 1, got {cfg.z}")
    _check(0.0 < cfg.a < 1.0, f"--a must satisfy 0 < a < 1, got {cfg.a}")
    _check(cfg.trials >= 1, f"--trials must be >= 1, got {cfg.trials}")
    _check(cfg.dim >= 1, f"--dim must be >= 1, got {cfg.dim}")
    pt = SobolevPoint(cfg.z, cfg.a)
    rng = np.random.default_rng(cfg.seed)
    worst_m, worst_f = math.inf, -math.inf
    for _ in range(cfg.trials):
        x = normalize_admissible(checks.random_spectrum(rng, cfg.dim), cfg.a)
        worst_m = min(worst_m, logsobolev_margin(pt, x))
        worst_f = max(worst_f, F_a(x, cfg.a) - (1.0 - cfg.a))
    ref_gap = abs(logsobolev_margin(pt, thermal_admissible(pt)))
    out = {"z": cfg.z, "a": cfg.a, "trials": cfg.trials, "min_margin": worst_m,
           "max_Fa_minus_bound": worst_f, "thermal_reference_gap": ref_gap}
    violations = []
    if worst_m < -1e-9:
        violations.append(f"log-Sobolev margin {worst_m:.3g} < -1e-9")
    if worst_f > 1e-9:
        violations.append(f"F_a exceeds 1 - a by {worst_f:.3g}")
    if ref_gap > 1e-8:
        violations.append(f"thermal reference margin {ref_gap:.3g} > 1e-8")
    if cfg.lam is not None or cfg.p is not None or cfg.q is not None:
        _need(cfg, "lam", "p", "q")
        _check(0.0 < cfg.lam < 1.0, f"--lambda must satisfy 0 < lambda < 1 for shooting, got {cfg.lam}")
        _check(1.0 < cfg.p < cfg.q, f"shooting needs 1 < p < q, got p={cfg.p}, q={cfg.q}")
        _check(cfg.tol > 0, f"--tol must be > 0, got {cfg.tol}")
        try:
            sr = ode_shoot(cfg.lam, cfg.p, cfg.q, tol=cfg.tol)
            out["shooting"] = sr.to_dict()
            if not sr.converged:
                violations.append(f"shooting residual {sr.residual:.3g} above tol")
        except ConvergenceError as exc:
            out["shooting"] = {"error": str(exc), "scan": exc.payload}
            violations.append("shooting found no sign change")
    return out, violations


def cmd_kkt(cfg: RunConfig):
    _need(cfg, "z", "a")
    _check(0.0 < cfg.z < 1.0, f"--z must satisfy 0 < z < 1, got {cfg.z}")
    _check(0.0 < cfg.a < 1.0, f"--a must satisfy 0 < a < 1, got {cfg.a}")
    _check(cfg.dim >= 1, f"--dim must satisfy N >= 1, got {cfg.dim}")
    pt = SobolevPoint(cfg.z, cfg.a)
    sp = maximize_simplex(pt, cfg.dim, seed=cfg.seed)
    rep = kkt_residuals(sp, pt)
    out = {"z": cfg.z, "a": cfg.a, "N": cfg.dim, "objective": sp.objective, "converged": sp.converged,
           "x": sp.x, "geometric_l1_gap": geometric_l1_gap(sp, pt.xi),
           "local_maxima": [{"objective": f, "p": p} for f, p in sp.local_maxima], "kkt": rep.to_dict()}
    violations = []
    if rep.max_residual > 1e-6:
        violations.append(f"interior stationarity residual {rep.max_residual:.3g} > 1e-6")
    if not rep.monotone:
        violations.append("ratios w_n are not nonincreasing from xi")
    return out, violations


def cmd_moe(cfg: RunConfig):
    spec = _channel(cfg)
    _need(cfg, "z")
    _check(0.0 < cfg.z < 1.0, f"--z must satisfy 0 < z < 1, got {cfg.z}")
    _check(cfg.trials >= 1, f"--trials must be >= 1, got {cfg.trials}")
    r = checks.moe_trials(spec, cfg.z, cfg.trials, cfg.seed)
    out = {"channel": spec.to_dict(), "z": cfg.z, "trials": cfg.trials, "families": list(FAMILIES), **r}
    violations = []
    if r["min_gap"] < -1e-8:
        violations.append(f"output entropy gap {r['min_gap']:.3g} < -1e-8")
    if r["thermal_gap"] > 1e-10:
        violations.append(f"thermal gap {r['thermal_gap']:.3g} > 1e-10")
    if cfg.q is not None:
        _check(spec.kind == AMPLIFIER, "the Renyi chain (--q) applies to the amplifier only")
        _check(1.0 < cfg.q < 1.5, f"--q must satisfy 1 < q < 3/2 for the Renyi chain, got {cfg.q}")
        ch = renyi_chain_check(spec.kappa, cfg.z, cfg.q, n_states=max(1, cfg.trials // 10), seed=cfg.seed)
        out["renyi_chain"] = ch.to_dict()
        if not ch.found:
            violations.append("no p with z_star(p) = z")
        elif ch.slack < -1e-7:
            violations.append(f"Renyi chain slack {ch.slack:.3g} < -1e-7")
    return out, violations


def cmd_thin(cfg: RunConfig):
    _need(cfg, "lam")
    _check(0.0 <= cfg.lam <= 1.0, f"--lambda must satisfy 0 <= lambda <= 1, got {cfg.lam}")
    if cfg.input is None:
        raise UsageError("--input is required for thin")
    x = read_spectrum(cfg.input)
    return thinning(x, cfg.lam), []


def cmd_suite(cfg: RunConfig):
    scale = 0.1 if cfg.quick else 1.0
    results = checks.run_all(scale=scale, seed=cfg.seed)
    for r in results:
        _status(r.line(), r.passed)
    out = {"seed": cfg.seed, "quick": cfg.quick, "criteria": [r.to_dict(cfg.timing) for r in results]}
    return out, [r.line() for r in results if not r.passed]


def _status(line: str, ok: bool):
    use_color = sys.stderr.isatty() and "NO_COLOR" not in os.environ
    if use_color:
        line = ("\033[32m" if ok else "\033[31m") + line + "\033[0m"
    print(line, file=sys.stderr)


COMMANDS = {
    "norm": cmd_norm,
    "verify-logsobolev": cmd_logsobolev,
    "verify-kkt": cmd_kkt,
    "verify-moe": cmd_moe,
    "thin": cmd_thin,
    "suite": cmd_suite,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gaussmax", description="p->q norms of Gaussian attenuators and amplifiers, with numerical certificates.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        if seed:
            sp.add_argument("--seed", type=int, default=42, help="64-bit master seed (default 42)")
        sp.add_argument("--out", help="output path (default: standard output)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--timing", action="store_true", help="record wall-clock runtimes (reports are then not byte-reproducible)")

    def chan(sp):
        sp.add_argument("--channel", choices=(ATTENUATOR, AMPLIFIER, COMPOSITE), default=ATTENUATOR)
        sp.add_argument("--lambda", dest="lam", type=float, help="transmissivity, 0 <= lambda <= 1")
        sp.add_argument("--kappa", type=float, help="amplification, kappa >= 1")

    sp = sub.add_parser("norm", help="p->q norm of a channel")
    chan(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--q", type=float, required=True)
    sp.add_argument("--method", choices=("gaussian", "brute", "both", "shooting"), default="gaussian")
    sp.add_argument("--dim", type=int, default=24, help="truncation N for brute force (N+1 levels, N <= 64)")
    sp.add_argument("--tol", type=float, default=1e-10, help="shooting tolerance")
    common(sp)

    sp = sub.add_parser("verify-logsobolev", help="log-Sobolev margin on random spectra; optional exponent-flow shooting")
    sp.add_argument("--z", type=float, required=True)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--dim", type=int, default=32, help="maximum spectrum dimension")
    sp.add_argument("--lambda", dest="lam", type=float)
    sp.add_argument("--p", type=float)
    sp.add_argument("--q", type=float)
    sp.add_argument("--tol", type=float, default=1e-10)
    common(sp)

    sp = sub.add_parser("verify-kkt", help="finite-N maximizer and its stationarity certificate")
    sp.add_argument("--z", type=float, required=True)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--dim", type=int, default=24, help="truncation N")
    common(sp)

    sp = sub.add_parser("verify-moe", help="output entropy of entropy-matched states against the thermal state")
    chan(sp)
    sp.add_argument("--z", type=float, required=True)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--q", type=float, help="also run the Renyi chain at this q (amplifier, 1 < q < 3/2)")
    common(sp)

    sp = sub.add_parser("thin", help="binomial thinning of a count distribution")
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--input", required=True, help="CSV (one probability per line) or JSON array")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("json", "csv"), default="csv")

    sp = sub.add_parser("suite", help="run every acceptance check")
    sp.add_argument("--quick", action="store_true", help="scale trial counts by 1/10")
    common(sp)
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    keys = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in vars(ns).items() if k in keys and v is not None})


def render(payload, fmt: str, command: str) -> str:
    if command == "thin":
        if fmt == "csv":
            return spectrum_csv(payload)
        return dumps(np.asarray(payload))
    return dumps(payload) if fmt == "json" else dumps_csv(payload)


def run(cfg: RunConfig) -> int:
    try:
        payload, violations = COMMANDS[cfg.command](cfg)
        if violations and isinstance(payload, dict):
            payload = {**payload, "violations": violations}
        text = render(payload, cfg.format, cfg.command)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        if cfg.out:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for v in violations:
        print(f"violation: {v}", file=sys.stderr)
    return EXIT_VIOLATION if violations else EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
