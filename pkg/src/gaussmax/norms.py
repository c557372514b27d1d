"""p->q norms of the attenuator and amplifier on Fock-diagonal inputs.

The thermal candidate is optimized over a single parameter in closed form;
``brute_force_ratio`` is an independent multi-start ascent over all
nonnegative spectra of a fixed dimension, used as a certificate.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import expit, logit

from .channels import AMPLIFIER, ATTENUATOR, COMPOSITE, ChannelSpec, apply_channel, channel_kernel, thermal_image, thermal_image_gap
from .errors import DomainError
from .fock import DEFAULT_POLICY, TruncationPolicy, log_f_p_closed, make_thermal, schatten_norm

GAUSSIAN_SCAN = "gaussian_scan"
BRUTE_FORCE = "brute_force"
CLOSED_FORM = "closed_form"
SHOOTING = "shooting"

# logit range of the z scan
U_MIN, U_MAX = logit(1e-12), logit(1.0 - 1e-12)


@dataclass
class NormReport:
    channel: ChannelSpec
    p: float
    q: float
    method: str
    z_star: float | None
    value: float  # math.inf for a divergent norm
    residuals: dict = field(default_factory=dict)
    runtime_ms: int = 0

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)


def _exponents(p: float, q: float) -> None:
    if not (p > 1 and q > 1):
        raise DomainError(f"exponents must satisfy p > 1 and q > 1, got p={p}, q={q}")


def _log_f(p: float, z: float, omz: float) -> float:
    # log f_p with 1 - z supplied separately; z itself may have rounded to 1
    if omz <= 0.0:
        raise DomainError("thermal parameter rounded to 1")
    z = min(z, math.nextafter(1.0, 0.0))
    return log_f_p_closed(z, p, one_minus_z=omz)


def log_gaussian_ratio_u(channel: ChannelSpec, p: float, q: float, u: float) -> float:
    """ln(f_q(z') / f_p(z)) at z = expit(u), with 1 - z kept exact."""
    z, omz = float(expit(u)), float(expit(-u))
    gap = thermal_image_gap(channel, z, one_minus_z=omz)
    zp = 1.0 - gap if gap < 0.5 else thermal_image(channel, z)
    return _log_f(q, zp, gap) - _log_f(p, z, omz)


def gaussian_ratio(channel: ChannelSpec, p: float, q: float, z: float) -> float:
    """||Phi(omega_z)||_q / ||omega_z||_p in closed form."""
    _exponents(p, q)
    if not 0.0 <= z < 1.0:
        raise DomainError(f"thermal parameter z must satisfy 0 <= z < 1, got {z}")
    if z == 0.0:
        zp = thermal_image(channel, 0.0)
        return math.exp(_log_f(q, zp, thermal_image_gap(channel, 0.0)))
    return math.exp(log_gaussian_ratio_u(channel, p, q, float(logit(z))))


def _identity(channel: ChannelSpec) -> bool:
    return channel.lam == 1.0 and channel.kappa == 1.0


def optimize_gaussian_z(channel: ChannelSpec, p: float, q: float, n_grid: int = 64, refinements: int = 2) -> NormReport:
    """Maximize the thermal ratio over z by a logit grid, two zoomed regrids, then golden section."""
    _exponents(p, q)
    if not p < q:
        raise DomainError(f"the thermal scan needs 1 < p < q, got p={p}, q={q}")
    if _identity(channel):
        raise DomainError("the identity channel has no interior thermal maximizer")
    t0 = time.perf_counter()

    def f(u):
        return log_gaussian_ratio_u(channel, p, q, u)

    lo, hi = U_MIN, U_MAX
    for _ in range(refinements + 1):
        us = np.linspace(lo, hi, n_grid)
        vals = np.array([f(u) for u in us])
        i = int(np.argmax(vals))
        lo, hi = us[max(i - 1, 0)], us[min(i + 1, n_grid - 1)]
    u_best, v_grid = us[i], vals[i]
    cell = (U_MAX - U_MIN) / (n_grid - 1)
    boundary = "low" if u_best - U_MIN < cell else "high" if U_MAX - u_best < cell else None
    at_boundary = boundary is not None
    flat = False
    if not at_boundary:
        try:
            res = minimize_scalar(lambda u: -f(u), bracket=(lo, u_best, hi), method="golden", tol=1e-10)
            if -res.fun >= v_grid:
                u_best = float(res.x)
        except ValueError:
            # neighbours tie with the centre to rounding: the grid point is already optimal
            flat = True
    value = f(u_best)
    residuals = {
        "truncation_loss": 0.0,
        "optimizer_gap": float(value - v_grid),
        "boundary": boundary,
        # for p < q the maximizer is interior, so an optimum pushed to z -> 1 signals a numerical problem
        "boundary_anomaly": boundary == "high",
        "flat_bracket": flat,
    }
    return NormReport(
        channel=channel, p=p, q=q, method=GAUSSIAN_SCAN, z_star=float(expit(u_best)),
        value=math.exp(value), residuals=residuals,
        runtime_ms=int(round(1000 * (time.perf_counter() - t0))),
    )


def norm_pp(channel: ChannelSpec, p: float) -> NormReport:
    """Closed-form p->p norm, approached by thermal states as z -> 1."""
    if not p > 1:
        raise DomainError(f"p must be > 1, got {p}")
    e = (1.0 - p) / p
    value = channel.lam**e * channel.kappa**e
    return NormReport(channel=channel, p=p, q=p, method=CLOSED_FORM, z_star=None, value=value)


def _exact_thermal_image_norm(channel: ChannelSpec, z: float, q: float) -> float:
    return math.exp(_log_f(q, thermal_image(channel, z), thermal_image_gap(channel, z)))


def amplifier_duality_check(kappa: float, p: float, q: float) -> dict:
    """Compare the amplifier p->q optimum with the attenuator 1/kappa optimum at q'->p'.

    ||A_kappa||_{p->q} = ||E_{1/kappa}||_{q'->p'} / kappa, and the amplifier
    maximizer is the thermal state proportional to E_{1/kappa}(omega)^(p'-1).
    """
    if not kappa > 1:
        raise DomainError(f"kappa must be > 1, got {kappa}")
    amp = optimize_gaussian_z(ChannelSpec.amplifier(kappa), p, q)
    pc, qc = p / (p - 1.0), q / (q - 1.0)
    att_spec = ChannelSpec.attenuator(1.0 / kappa)
    att = optimize_gaussian_z(att_spec, qc, pc)
    z_mapped = thermal_image(att_spec, att.z_star) ** (pc - 1.0)
    dual_value = att.value / kappa
    mapped_value = gaussian_ratio(ChannelSpec.amplifier(kappa), p, q, z_mapped)
    return {
        "amplifier_value": amp.value,
        "dual_value": dual_value,
        "value_residual": abs(amp.value - dual_value) / dual_value,
        "mapped_value_residual": abs(mapped_value - dual_value) / dual_value,
        "z_star": amp.z_star,
        "z_mapped": z_mapped,
        "z_residual": abs(amp.z_star - z_mapped),
    }


def divergence_diagnostic(channel: ChannelSpec, p: float, q: float, eps_grid=(1e-2, 1e-3, 1e-4)) -> dict:
    """Thermal ratio at z = 1 - eps for q < p, with its log-log slope against the predicted exponent."""
    _exponents(p, q)
    if not q < p:
        raise DomainError(f"divergence diagnostic needs 1 < q < p, got p={p}, q={q}")
    eps = np.asarray(eps_grid, dtype=np.float64)
    if eps.size < 2 or np.any(eps <= 0) or np.any(eps >= 1):
        raise DomainError("eps_grid needs at least two values in (0, 1)")
    lr = np.array([log_gaussian_ratio_u(channel, p, q, float(np.log((1 - e) / e))) for e in eps])
    slope = float(np.polyfit(np.log(eps), lr, 1)[0])
    return {
        "pairs": [(float(e), float(math.exp(v))) for e, v in zip(eps, lr)],
        "slope": slope,
        "predicted_slope": (q - 1.0) / q - (p - 1.0) / p,
    }


def norm(channel: ChannelSpec, p: float, q: float) -> NormReport:
    """Dispatch: closed form for p = q, divergence for q < p, thermal scan otherwise."""
    _exponents(p, q)
    if p == q:
        return norm_pp(channel, p)
    if _identity(channel):
        # the identity is a contraction from l^p into l^q when p < q
        if p < q:
            return NormReport(channel=channel, p=p, q=q, method=CLOSED_FORM, z_star=None, value=1.0)
        return NormReport(channel=channel, p=p, q=q, method=CLOSED_FORM, z_star=None, value=math.inf)
    if q < p:
        diag = divergence_diagnostic(channel, p, q)
        return NormReport(channel=channel, p=p, q=q, method=CLOSED_FORM, z_star=None, value=math.inf,
                          residuals={"divergence": diag})
    return optimize_gaussian_z(channel, p, q)


def norm_by_shooting(lam: float, p: float, q: float, tol: float = 1e-10) -> NormReport:
    """Attenuator p->q norm evaluated at the z0 found by the exponent flow."""
    from .sobolev import ode_shoot

    t0 = time.perf_counter()
    sr = ode_shoot(lam, p, q, tol=tol)
    spec = ChannelSpec.attenuator(lam)
    return NormReport(
        channel=spec, p=p, q=q, method=SHOOTING, z_star=sr.z0, value=gaussian_ratio(spec, p, q, sr.z0),
        residuals={"truncation_loss": 0.0, "optimizer_gap": sr.residual, "roots": sr.roots},
        runtime_ms=int(round(1000 * (time.perf_counter() - t0))),
    )


def _objective_and_grad(M: np.ndarray, x: np.ndarray, p: float, q: float):
    """ln ||M x||_q - ln ||x||_p and its gradient, for x >= 0 with ||x||_p = 1."""
    y = M @ x
    yq = np.power(y, q)
    xp = np.power(x, p)
    sy, sx = yq.sum(), xp.sum()
    val = math.log(sy) / q - math.log(sx) / p
    grad = M.T @ (np.power(y, q - 1.0)) / sy - np.power(x, p - 1.0) / sx
    return val, grad


def _normalize_p(x: np.ndarray, p: float) -> np.ndarray:
    return x / schatten_norm(x, p)


def _ascent(M, x, p, q, max_iter: int, tol: float):
    """Projected gradient ascent with Barzilai-Borwein steps and a monotone backtracking guard."""
    x = _normalize_p(x, p)
    f, g = _objective_and_grad(M, x, p, q)
    eta = 1e-1
    x_old = g_old = None
    converged = False
    for _ in range(max_iter):
        if x_old is not None:
            s, dg = x - x_old, g - g_old
            sy = float(np.dot(s, dg))
            if sy < 0:
                eta = min(max(float(np.dot(s, s)) / -sy, 1e-10), 1e4)
        while True:
            cand = np.maximum(x + eta * g, 0.0)
            if not np.any(cand > 0):
                eta *= 0.5
                continue
            cand = _normalize_p(cand, p)
            fc, gc = _objective_and_grad(M, cand, p, q)
            if fc >= f - 1e-15 * abs(f) or eta < 1e-14:
                break
            eta *= 0.5
        x_old, g_old = x, g
        step = float(np.abs(cand - x).max())
        x, f, g = cand, fc, gc
        if step <= tol:
            converged = True
            break
    # first-order optimality: g = 0 on the support, g <= 0 off it (x.g = 0 by scale invariance)
    kkt = float(np.max(np.where(x > 0, np.abs(g), np.maximum(g, 0.0))))
    return x, f, converged, kkt


def _log_objective(M, theta, p, q):
    x = np.exp(theta)
    y = M @ x
    my, mx = y.max(), x.max()
    return (math.log(my) + math.log(np.sum((y / my) ** q)) / q) - (math.log(mx) + math.log(np.sum((x / mx) ** p)) / p)


def _newton_log(M, x, p, q, iters: int = 60):
    """Damped Newton on ln ||M e^theta||_q - ln ||e^theta||_p; the scale direction is left to lstsq."""
    theta = np.log(x)
    f = _log_objective(M, theta, p, q)
    for _ in range(iters):
        x = np.exp(theta - theta.max())
        y = M @ x
        Y = np.sum(y**q)
        u = y ** (q - 1.0) / Y
        G = M.T @ u
        pi = x**p / np.sum(x**p)
        grad = x * G - pi
        W = (M * (y ** (q - 2.0) / Y)[:, None]).T @ M
        H = np.diag(x * G) + np.outer(x, x) * ((q - 1.0) * W - q * np.outer(G, G))
        H -= p * (np.diag(pi) - np.outer(pi, pi))
        if np.abs(grad).max() <= 1e-15:
            break
        step = np.linalg.lstsq(H, -grad, rcond=1e-13)[0]
        if np.dot(step, grad) <= 0:
            step = grad
        t = 1.0
        while t > 1e-12:
            cand = theta + t * step
            fc = _log_objective(M, cand, p, q)
            if np.isfinite(fc) and fc >= f:
                break
            t *= 0.5
        else:
            break
        if fc - f <= 0 and t < 1.0:
            break
        theta, f = cand, fc
    x = np.exp(theta - theta.max())
    return _normalize_p(x, p)


def brute_force_ratio(
    channel: ChannelSpec,
    p: float,
    q: float,
    N: int,
    seed: int = 0,
    n_starts: int = 16,
    max_iter: int = 2000,
    tol: float = 1e-13,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> NormReport:
    """Multi-start ascent of ||Phi(x)||_q / ||x||_p over nonnegative x of dimension N+1.

    Starts: thermal spectra on a z grid and seeded uniform random vectors.
    The reported maximizer is normalized to unit p-norm; distinct local maxima
    are listed in ``residuals['local_maxima']``.
    """
    _exponents(p, q)
    if not 0 <= N <= 64:
        raise DomainError(f"brute force needs 0 <= N <= 64, got {N}")
    if n_starts < 1:
        raise DomainError(f"n_starts must be >= 1, got {n_starts}")
    t0 = time.perf_counter()
    kern = channel_kernel(channel, N + 1, policy)
    M = kern.matrix
    dim = N + 1
    n_thermal = n_starts // 2
    rng = np.random.default_rng(seed)
    starts = []
    for z in np.linspace(0.05, 0.9, n_thermal) if n_thermal else []:
        starts.append((1.0 - z) * z ** np.arange(dim))
    while len(starts) < n_starts:
        starts.append(rng.uniform(0.0, 1.0, dim))
    found = []
    for x0 in starts:
        x, f, conv, kkt = _ascent(M, x0, p, q, max_iter, tol)
        # projection may zero tail entries; lift them so the log-coordinate polish can move them
        xn = _newton_log(M, np.maximum(x, 1e-30 * x.max()), p, q)
        fn, gn = _objective_and_grad(M, xn, p, q)
        if fn >= f:
            # log-coordinate gradient x*g: the certificate that is scale-free along the tail
            x, f, kkt = xn, fn, float(np.abs(xn * gn).max())
            conv = kkt <= 1e-10
        found.append((f, x, conv, kkt))
    found.sort(key=lambda t: (-t[0], tuple(t[1])))
    best_f, best_x, best_conv, best_kkt = found[0]
    distinct = []
    for f, x, _, _ in found:
        if not any(np.abs(x - y).sum() < 1e-6 for _, y in distinct):
            distinct.append((float(f), x))
    residuals = {
        "truncation_loss": kern.truncation_loss,
        "optimizer_gap": best_kkt,
        "converged": bool(best_conv),
        "argmax": best_x.tolist(),
        "local_maxima": [{"value": math.exp(f), "x": x.tolist()} for f, x in distinct],
    }
    return NormReport(
        channel=channel, p=p, q=q, method=BRUTE_FORCE, z_star=None, value=math.exp(best_f),
        residuals=residuals, runtime_ms=int(round(1000 * (time.perf_counter() - t0))),
    )


def thermal_argmax_distance(report: NormReport, z_star: float, p: float) -> float:
    """l1 distance between a brute-force argmax and the p-normalized truncated thermal state at z_star."""
    x = np.asarray(report.residuals["argmax"])
    ref = (1.0 - z_star) * z_star ** np.arange(x.size)
    ref = ref / schatten_norm(ref, p)
    return float(np.abs(x - ref).sum())


def _factor(channel: ChannelSpec, r_in: float, r_out: float) -> float:
    if _identity(channel):
        return 1.0
    if r_in == r_out:
        return norm_pp(channel, r_in).value
    return optimize_gaussian_z(channel, r_in, r_out).value


def chebyshev_grid(lo: float, hi: float, n: int = 33) -> np.ndarray:
    """Chebyshev-Lobatto points on [lo, hi], endpoints included, ascending."""
    k = np.arange(n)
    return np.sort(0.5 * (lo + hi) - 0.5 * (hi - lo) * np.cos(np.pi * k / (n - 1)))


def composite_bound(lam: float, kappa: float, p: float, q: float, r_grid=None) -> dict:
    """min over r in [p, q] of ||A_kappa||_{r->q} ||E_lam||_{p->r}, refined by golden section."""
    _exponents(p, q)
    if not p <= q:
        raise DomainError(f"the composite bound needs 1 < p <= q, got p={p}, q={q}")
    amp, att = ChannelSpec.amplifier(kappa), ChannelSpec.attenuator(lam)

    def product(r):
        return _factor(amp, r, q) * _factor(att, p, r)

    if p == q:
        v = product(p)
        return {"value": v, "r_star": p, "grid": [(p, v)]}
    rs = chebyshev_grid(p, q) if r_grid is None else np.asarray(r_grid, dtype=np.float64)
    rs = rs[(rs >= p) & (rs <= q)]
    if rs.size == 0:
        raise DomainError(f"no grid point lies in the feasible range [{p}, {q}]")
    vals = np.array([product(r) for r in rs])
    i = int(np.argmin(vals))
    r_best, v_best = float(rs[i]), float(vals[i])
    if 0 < i < rs.size - 1:
        res = minimize_scalar(product, bracket=(rs[i - 1], rs[i], rs[i + 1]), method="golden", tol=1e-8)
        if p <= res.x <= q and res.fun < v_best:
            r_best, v_best = float(res.x), float(res.fun)
    return {"value": v_best, "r_star": r_best, "grid": [(float(r), float(v)) for r, v in zip(rs, vals)]}


def thermal_image_norm_check(channel: ChannelSpec, z: float, q: float, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Relative gap between the truncated numeric q-norm of Phi(omega_z) and its closed form."""
    y = apply_channel(channel, make_thermal(z, policy), policy)
    exact = _exact_thermal_image_norm(channel, z, q)
    return abs(schatten_norm(y, q) - exact) / exact
