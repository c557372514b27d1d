"""The twelve acceptance checks, each returning a ``CheckResult``.

``scale`` multiplies trial counts; ``suite --quick`` uses 0.1.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelSpec, apply, attenuator_kernel, duality_residual, thermal_image
from .fock import fock_rearrange, make_thermal, thermal_entropy
from .kkt import kkt_residuals, maximize_simplex
from .moe import FAMILIES, match_entropy_state, output_entropy_gap, thermal_matched_state
from .norms import (
    brute_force_ratio,
    composite_bound,
    divergence_diagnostic,
    gaussian_ratio,
    norm_pp,
    optimize_gaussian_z,
    thermal_argmax_distance,
)
from .sobolev import (
    F_a,
    F_a_fd_check,
    SobolevPoint,
    dlnnorm_da_check,
    logsobolev_margin,
    normalize_admissible,
    ode_shoot,
    thermal_admissible,
)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    runtime_s: float = 0.0
    budget_s: float = math.inf

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.name} ({self.runtime_s:.2f} s / {self.budget_s:g} s)"

    def to_dict(self, timing: bool = False) -> dict:
        d = {"number": self.number, "name": self.name, "passed": self.passed, "measured": self.measured,
             "budget_s": self.budget_s}
        if timing:
            d["runtime_s"] = self.runtime_s
        return d


def _trials(n: int, scale: float) -> int:
    return max(1, int(round(n * scale)))


def _timed(number, name, budget, fn):
    t0 = time.perf_counter()
    passed, measured = fn()
    dt = time.perf_counter() - t0
    return CheckResult(number, name, bool(passed and dt < budget), measured, dt, budget)


def random_spectrum(rng: np.random.Generator, max_dim: int) -> np.ndarray:
    """Nonnegative test spectrum from a mix of shapes: flat, geometric, sparse, spiky, near-thermal."""
    dim = int(rng.integers(1, max_dim + 1))
    kind = int(rng.integers(5))
    if kind == 0:
        x = rng.uniform(0.0, 1.0, dim)
    elif kind == 1:
        x = rng.uniform(0.01, 0.99) ** np.arange(dim)
    elif kind == 2:
        x = rng.uniform(0.0, 1.0, dim) * (rng.uniform(size=dim) < 0.4)
    elif kind == 3:
        x = rng.exponential(1.0, dim) ** 4
    else:
        x = rng.uniform(0.05, 0.95) ** np.arange(dim) * (1.0 + 0.05 * rng.standard_normal(dim))
    x = np.abs(x)
    if rng.uniform() < 0.5:
        x = np.sort(x)[::-1]
    if not np.any(x > 0):
        x[0] = 1.0
    return x


def check_kernels(scale: float = 1.0) -> CheckResult:
    def run():
        col_err, cov_err = 0.0, 0.0
        for lam in np.round(np.arange(0.1, 0.95, 0.1), 10):
            K = attenuator_kernel(float(lam), 64).matrix
            col_err = max(col_err, float(np.abs(K.sum(axis=0) - 1.0).max()))
            for z in np.round(np.arange(0.0, 0.95, 0.1), 10):
                w = make_thermal(float(z))
                out = apply(attenuator_kernel(float(lam), w.size), w)
                zp = thermal_image(ChannelSpec.attenuator(float(lam)), float(z))
                ref = (1.0 - zp) * zp ** np.arange(out.size)
                cov_err = max(cov_err, float(np.abs(out - ref).max()))
        return col_err <= 1e-12 and cov_err <= 1e-10, {"column_sum_error": col_err, "thermal_linf_error": cov_err}

    return _timed(1, "kernel stochasticity and thermal covariance", 1.0, run)


def check_duality(scale: float = 1.0, seed: int = 42) -> CheckResult:
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for kappa in (1.5, 2.0, 4.0):
            for _ in range(_trials(100, scale)):
                worst = max(worst, duality_residual(rng.uniform(size=64), rng.uniform(size=64), kappa))
        return worst <= 1e-10, {"max_residual": worst}

    return _timed(2, "amplifier/attenuator duality", 5.0, run)


def _logsobolev_run(scale, seed):
    rng = np.random.default_rng(seed)
    worst_margin, worst_Fa, worst_ref = math.inf, -math.inf, 0.0
    n = _trials(10_000, scale)
    for z in (0.1, 0.3, 0.6):
        for a in (0.25, 0.5, 0.75):
            pt = SobolevPoint(z, a)
            worst_ref = max(worst_ref, abs(logsobolev_margin(pt, thermal_admissible(pt))))
            for _ in range(n):
                x = normalize_admissible(random_spectrum(rng, 32), a)
                worst_margin = min(worst_margin, logsobolev_margin(pt, x))
                worst_Fa = max(worst_Fa, F_a(x, a) - (1.0 - a))
    return worst_margin, worst_Fa, worst_ref


def check_logsobolev(scale: float = 1.0, seed: int = 42, _cache: dict | None = None) -> CheckResult:
    def run():
        m, f, r = _logsobolev_run(scale, seed)
        if _cache is not None:
            _cache["fa"] = f
        return m >= -1e-9 and r <= 1e-8, {"min_margin": m, "thermal_reference_gap": r}

    return _timed(3, "log-Sobolev margin", 30.0, run)


def check_fa_bound(scale: float = 1.0, seed: int = 42, _cache: dict | None = None) -> CheckResult:
    def run():
        if _cache is not None and "fa" in _cache:
            f = _cache["fa"]
        else:
            f = _logsobolev_run(scale, seed)[1]
        return f <= 1e-9, {"max_Fa_minus_bound": f}

    return _timed(4, "F_a upper bound", 30.0, run)


def check_pp(scale: float = 1.0) -> CheckResult:
    def run():
        zs = np.linspace(0.0, 1.0, 1002)[1:-1]
        worst_limit, worst_excess = 0.0, -math.inf
        specs = [ChannelSpec.attenuator(l) for l in (0.25, 0.5, 0.75)] + [ChannelSpec.amplifier(k) for k in (1.5, 2.0, 4.0)]
        for spec in specs:
            for p in (1.5, 2.0, 3.0):
                closed = norm_pp(spec, p).value
                worst_limit = max(worst_limit, abs(gaussian_ratio(spec, p, p, 1.0 - 1e-4) / closed - 1.0))
                sup = max(gaussian_ratio(spec, p, p, float(z)) for z in zs)
                worst_excess = max(worst_excess, sup / closed - 1.0)
        return worst_limit <= 0.01 and worst_excess <= 1e-6, {"max_limit_rel_error": worst_limit, "max_rel_excess": worst_excess}

    return _timed(5, "p->p closed form", 1.0, run)


def check_gaussian_maximizer(scale: float = 1.0, seed: int = 42) -> CheckResult:
    def run():
        out, ok = {}, True
        for spec in (ChannelSpec.attenuator(0.6), ChannelSpec.amplifier(2.0)):
            t0 = time.perf_counter()
            g = optimize_gaussian_z(spec, 1.5, 2.5)
            b = brute_force_ratio(spec, 1.5, 2.5, 24, seed=seed, n_starts=16)
            dt = time.perf_counter() - t0
            rel = (b.value - g.value) / g.value
            dist = thermal_argmax_distance(b, g.z_star, 1.5)
            # 60 s budget per channel
            ok &= abs(rel) <= 1e-5 and dist <= 1e-3 and dt < 60.0
            out[spec.kind] = {"gaussian": g.value, "brute": b.value, "rel_diff": rel, "argmax_l1": dist, "z_star": g.z_star}
        return ok, out

    return _timed(6, "thermal maximizer against brute force", 120.0, run)


SHOOT_CASES = ((0.6, 1.5, 2.5), (0.4, 1.2, 2.0), (0.8, 2.0, 3.0))


def check_shooting(scale: float = 1.0) -> CheckResult:
    def run():
        worst, rows = 0.0, []
        for lam, p, q in SHOOT_CASES:
            z0 = ode_shoot(lam, p, q).z0
            zs = optimize_gaussian_z(ChannelSpec.attenuator(lam), p, q).z_star
            worst = max(worst, abs(z0 - zs))
            rows.append({"lambda": lam, "p": p, "q": q, "z0": z0, "z_star": zs})
        return worst <= 1e-4, {"max_abs_diff": worst, "cases": rows}

    return _timed(7, "shooting z0 against scan z_star", 10.0, run)


def check_kkt(scale: float = 1.0, seed: int = 42) -> CheckResult:
    def run():
        pt = SobolevPoint(0.25, 0.5)
        sp = maximize_simplex(pt, 24, seed=seed)
        rep = kkt_residuals(sp, pt)
        ok = rep.max_residual <= 1e-6 and rep.monotone and rep.w[0] <= pt.xi + 1e-9
        return ok, {"max_interior_residual": rep.max_residual, "monotone": rep.monotone, "w0": float(rep.w[0]), "xi": pt.xi}

    return _timed(8, "KKT stationarity and ratio monotonicity", 30.0, run)


def check_divergence(scale: float = 1.0) -> CheckResult:
    def run():
        d = divergence_diagnostic(ChannelSpec.attenuator(0.5), 3.0, 1.5, (1e-2, 1e-3, 1e-4))
        rel = abs(d["slope"] / d["predicted_slope"] - 1.0)
        ratios = [r for _, r in d["pairs"]]
        ok = rel <= 0.05 and all(b > a for a, b in zip(ratios, ratios[1:]))
        return ok, {"slope": d["slope"], "predicted": d["predicted_slope"], "rel_error": rel}

    return _timed(9, "q < p divergence slope", 1.0, run)


MOE_CHANNELS = (
    ChannelSpec.attenuator(0.3), ChannelSpec.attenuator(0.5), ChannelSpec.attenuator(0.8),
    ChannelSpec.amplifier(1.5), ChannelSpec.amplifier(2.0), ChannelSpec.amplifier(4.0),
    ChannelSpec.composite(0.7, 1.5),
)
MOE_ZS = (0.1, 0.3, 0.6)


def moe_trials(channel: ChannelSpec, z: float, trials: int, seed: int, dim: int = 32) -> dict:
    """Min output-entropy gap over matched random states; families alternate and every other pair is sorted."""
    S = thermal_entropy(z)
    seeds = np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint32)
    worst, worst_i = math.inf, -1
    for i in range(trials):
        st = match_entropy_state(S, dim, FAMILIES[i % 2], int(seeds[i]))
        if (i // 2) % 2:
            st.spectrum = fock_rearrange(st.spectrum)
        g = output_entropy_gap(channel, st, z)
        if g < worst:
            worst, worst_i = g, i
    thermal_gap = abs(output_entropy_gap(channel, thermal_matched_state(z), z))
    return {"min_gap": worst, "worst_trial": worst_i, "thermal_gap": thermal_gap}


def check_moe(scale: float = 1.0, seed: int = 42) -> CheckResult:
    def run():
        worst, worst_thermal, rows = math.inf, 0.0, []
        n = _trials(1000, scale)
        for ci, ch in enumerate(MOE_CHANNELS):
            for zi, z in enumerate(MOE_ZS):
                r = moe_trials(ch, z, n, seed * 1000 + ci * 10 + zi)
                worst = min(worst, r["min_gap"])
                worst_thermal = max(worst_thermal, r["thermal_gap"])
                rows.append({"channel": ch.to_dict(), "z": z, **r})
        return worst >= -1e-8 and worst_thermal <= 1e-10, {"min_gap": worst, "max_thermal_gap": worst_thermal,
                                                          "trials_per_combo": n, "combos": rows}

    return _timed(10, "constrained minimum output entropy", 120.0, run)


def check_composite(scale: float = 1.0, seed: int = 42) -> CheckResult:
    def run():
        lam, kappa, p, q = 0.7, 1.5, 1.5, 2.5
        bound = composite_bound(lam, kappa, p, q)
        b = brute_force_ratio(ChannelSpec.composite(lam, kappa), p, q, 24, seed=seed)
        return bound["value"] >= b.value - 1e-6, {"bound": bound["value"], "r_star": bound["r_star"],
                                                  "brute": b.value, "gap": bound["value"] - b.value}

    return _timed(11, "composite channel bound", 90.0, run)


def check_derivatives(scale: float = 1.0, seed: int = 42) -> CheckResult:
    def run():
        rng = np.random.default_rng(seed)
        worst_t, worst_a = 0.0, 0.0
        for _ in range(_trials(100, scale)):
            a = float(rng.uniform(0.2, 0.8))
            # generic positive spectra; adjacent entries many decades apart inflate the O(dt^2) constant
            x = rng.uniform(0.05, 1.0, int(rng.integers(1, 17)))
            worst_t = max(worst_t, F_a_fd_check(normalize_admissible(x, a), a, 1e-5))
            worst_a = max(worst_a, dlnnorm_da_check(rng.uniform(0.05, 1.0, int(rng.integers(1, 17))), a, 1e-5))
        return worst_t <= 1e-7 and worst_a <= 1e-7, {"max_dt_residual": worst_t, "max_da_residual": worst_a}

    return _timed(12, "derivative identities", 2.0, run)


def run_all(scale: float = 1.0, seed: int = 42, only=None) -> list[CheckResult]:
    cache: dict = {}
    table = [
        (1, lambda: check_kernels(scale)),
        (2, lambda: check_duality(scale, seed)),
        (3, lambda: check_logsobolev(scale, seed, cache)),
        (4, lambda: check_fa_bound(scale, seed, cache)),
        (5, lambda: check_pp(scale)),
        (6, lambda: check_gaussian_maximizer(scale, seed)),
        (7, lambda: check_shooting(scale)),
        (8, lambda: check_kkt(scale, seed)),
        (9, lambda: check_divergence(scale)),
        (10, lambda: check_moe(scale, seed)),
        (11, lambda: check_composite(scale, seed)),
        (12, lambda: check_derivatives(scale, seed)),
    ]
    return [fn() for k, fn in table if only is None or k in only]
