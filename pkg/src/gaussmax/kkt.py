"""Finite-N maximization of the log-Sobolev functional and its KKT certificate.

Work in p = x**(1/a), a point of the probability simplex, and its logarithm
theta = ln p. In these variables the functional reads

    G(p) = sum_{n>=1} n (p_n^a p_{n-1}^(1-a) - p_n) - mu(z, a) sum_n p_n ln p_n

and its p-gradient minus the multiplier is exactly the stationarity
quantity K_n: the first two terms of K_n are n (a s^(a-1) - 1) with
s = p_n / p_{n-1}, the third is (n+1)(1-a) w^a with w = p_{n+1} / p_n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .sobolev import SobolevPoint, h_plus_sh_prime, mu, nu, s2h_prime

MAX_ASCENT_ITERS = 2000
NEWTON_ITERS = 100
NEWTON_TOL = 1e-12


@dataclass
class SimplexPoint:
    x: np.ndarray
    a: float
    objective: float = float("nan")
    converged: bool = True
    kkt_max: float = float("nan")
    # distinct local maxima found across starts: list of (objective, p-vector)
    local_maxima: list = field(default_factory=list)

    @property
    def p(self) -> np.ndarray:
        return np.power(self.x, 1.0 / self.a)


@dataclass
class KKTReport:
    multiplier: float
    stationarity_residuals: np.ndarray
    w: np.ndarray
    xi: float
    monotone: bool
    max_residual: float
    boundary_residual: float

    def to_dict(self) -> dict:
        return {
            "multiplier": self.multiplier,
            "stationarity_residuals": self.stationarity_residuals.tolist(),
            "w": self.w.tolist(),
            "xi": self.xi,
            "monotone": self.monotone,
            "max_residual": self.max_residual,
            "boundary_residual": self.boundary_residual,
        }


def objective_theta(theta: np.ndarray, a: float, m: float) -> float:
    p = np.exp(theta)
    n = np.arange(1, theta.size)
    F = np.sum(n * (np.exp(a * theta[1:] + (1.0 - a) * theta[:-1]) - p[1:]))
    return float(F - m * np.sum(p * theta))


def gradient_p(theta: np.ndarray, a: float, m: float) -> np.ndarray:
    """dG/dp_n evaluated at p = exp(theta)."""
    n = np.arange(theta.size, dtype=np.float64)
    g = -m * (theta + 1.0)
    d = np.diff(theta)
    g[1:] += n[1:] * (a * np.exp((a - 1.0) * d) - 1.0)
    g[:-1] += n[1:] * (1.0 - a) * np.exp(a * d)
    return g


def _jacobian_theta(theta: np.ndarray, a: float, m: float) -> np.ndarray:
    """d gradient_p / d theta, tridiagonal."""
    N1 = theta.size
    n = np.arange(1, N1, dtype=np.float64)
    d = np.diff(theta)
    A = n * a * (1.0 - a) * np.exp((a - 1.0) * d)
    B = n * (1.0 - a) * a * np.exp(a * d)
    J = np.diag(np.full(N1, -m))
    idx = np.arange(N1 - 1)
    J[idx + 1, idx + 1] -= A
    J[idx + 1, idx] += A
    J[idx, idx] -= B
    J[idx, idx + 1] += B
    return J


def _log_total(theta: np.ndarray) -> float:
    m = theta.max()
    return float(m + np.log(np.sum(np.exp(theta - m))))


def _project_log_simplex(theta: np.ndarray) -> np.ndarray:
    return theta - _log_total(theta)


def _mirror_ascent(theta: np.ndarray, a: float, m: float, iters: int) -> tuple[np.ndarray, float, bool]:
    """Entropic mirror ascent on the simplex with adaptive step; keeps every entry positive."""
    f = objective_theta(theta, a, m)
    eta = 1e-2
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(iters):
            g = gradient_p(theta, a, m)
            while True:
                cand = _project_log_simplex(theta + eta * g)
                fc = objective_theta(cand, a, m)
                if np.isfinite(fc) and fc >= f:
                    break
                eta *= 0.5
                if eta < 1e-14:
                    return theta, f, True
            if fc - f <= 1e-15 * max(1.0, abs(f)):
                return cand, fc, True
            theta, f = cand, fc
            eta *= 1.5
    return theta, f, False


def _kkt_residual(theta, lam, a, m):
    return np.concatenate([gradient_p(theta, a, m) - lam, [np.expm1(_log_total(theta))]])


def _newton_polish(theta: np.ndarray, a: float, m: float) -> tuple[np.ndarray, float, float]:
    """Damped Newton on (gradient - lambda = 0, sum p = 1) in log coordinates."""
    N1 = theta.size
    p = np.exp(theta)
    lam = float(np.dot(p, gradient_p(theta, a, m)))
    with np.errstate(over="ignore", invalid="ignore"):
        R = _kkt_residual(theta, lam, a, m)
        r0 = np.max(np.abs(R))
        for _ in range(NEWTON_ITERS):
            if r0 <= NEWTON_TOL:
                break
            K = np.zeros((N1 + 1, N1 + 1))
            K[:N1, :N1] = _jacobian_theta(theta, a, m)
            K[:N1, N1] = -1.0
            K[N1, :N1] = np.exp(theta)
            try:
                step = np.linalg.solve(K, -R)
            except np.linalg.LinAlgError:
                break
            t = 1.0
            while t > 1e-10:
                th2 = theta + t * step[:N1]
                lam2 = lam + t * step[N1]
                R2 = _kkt_residual(th2, lam2, a, m)
                r2 = np.max(np.abs(R2))
                if np.isfinite(r2) and r2 < (1.0 - 1e-4 * t) * r0:
                    break
                t *= 0.5
            else:
                break
            theta, lam, R, r0 = th2, lam2, R2, r2
    return _project_log_simplex(theta), lam, float(r0)


def _starts(point: SobolevPoint, N: int, seed: int, n_geometric: int = 8, n_random: int = 8) -> list[np.ndarray]:
    xi = point.xi
    ratios = xi * np.logspace(-1.0, 1.0, n_geometric)
    ratios = np.clip(ratios, 1e-6, 0.999)
    starts = [_project_log_simplex(np.arange(N + 1) * np.log(r)) for r in ratios]
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        starts.append(_project_log_simplex(np.log(rng.dirichlet(np.ones(N + 1)))))
    return starts


def maximize_simplex(point: SobolevPoint, N: int, seed: int = 0, ascent_iters: int = MAX_ASCENT_ITERS) -> SimplexPoint:
    """Multi-start maximizer of the functional over admissible spectra of dimension N+1.

    Each start runs mirror ascent, is sorted nonincreasing (rearrangement
    never lowers the functional), then polished by Newton on the KKT system.
    The best objective wins; ties go to the lexicographically smallest p.
    """
    if N < 0:
        raise DomainError(f"N must be >= 0, got {N}")
    a = point.a
    if N == 0:
        return SimplexPoint(x=np.ones(1), a=a, objective=0.0, converged=True, kkt_max=0.0,
                            local_maxima=[(0.0, np.ones(1))])
    m = float(mu(point.z, a))
    found = []
    for theta0 in _starts(point, N, seed):
        theta, f_asc, ok = _mirror_ascent(theta0, a, m, ascent_iters)
        theta = np.sort(theta)[::-1]
        polished, _, res = _newton_polish(theta, a, m)
        f_pol = objective_theta(polished, a, m)
        if np.isfinite(f_pol) and f_pol >= objective_theta(theta, a, m) - 1e-12:
            theta, res_ok = polished, res <= 1e-8
        else:
            res_ok = False
        found.append((objective_theta(theta, a, m), np.exp(theta), ok or res_ok))
    found.sort(key=lambda t: (-t[0], tuple(t[1])))
    best_f, best_p, best_ok = found[0]
    distinct = []
    for f, p, _ in found:
        if not any(np.abs(p - q).sum() < 1e-6 for _, q in distinct):
            distinct.append((f, p))
    theta = np.log(best_p)
    kmax = float(np.max(np.abs(gradient_p(theta, a, m) - np.dot(best_p, gradient_p(theta, a, m)))))
    return SimplexPoint(x=np.power(best_p, a), a=a, objective=best_f, converged=best_ok,
                        kkt_max=kmax, local_maxima=distinct)


def kkt_residuals(xbar, point: SobolevPoint, monotone_slack: float = 1e-9) -> KKTReport:
    """Stationarity residuals |K_n| with the least-squares multiplier.

    The multiplier is fit over n < N; the boundary index n = N is reported
    separately and excluded from ``max_residual``.
    """
    x = xbar.x if isinstance(xbar, SimplexPoint) else np.asarray(xbar, dtype=np.float64)
    a = point.a
    if np.any(x <= 0):
        raise DomainError("KKT residuals need strictly positive entries; a true maximizer has full support")
    p = np.power(x, 1.0 / a)
    p = p / p.sum()
    theta = np.log(p)
    m = float(mu(point.z, a))
    g = gradient_p(theta, a, m)
    inner = g[:-1] if g.size > 1 else g
    lam = float(np.mean(inner))
    res = np.abs(g - lam)
    w = np.append(p[1:] / p[:-1], 0.0)
    xi = point.xi
    seq = np.concatenate([[xi], w[:-1]])
    monotone = bool(np.all(np.diff(seq) <= monotone_slack))
    return KKTReport(
        multiplier=lam,
        stationarity_residuals=res,
        w=w,
        xi=xi,
        monotone=monotone,
        max_residual=float(res[:-1].max() if res.size > 1 else res.max()),
        boundary_residual=float(res[-1]),
    )


def recursion_residual(w, a: float, xi: float, n: int) -> float:
    """|LHS - RHS| of the ratio recursion obtained by differencing K_n - K_{n-1}.

    (n+1)(w_n^2 h'(w_n) - w_{n-1}^2 h'(w_{n-1}))
      = (n-1)(g(w_{n-1}) - g(w_{n-2})) + (nu(w_{n-1}) - nu(xi)) ln w_{n-1},
    with g(s) = h(s) + s h'(s). The last term uses nu at xi.
    """
    w = np.asarray(w, dtype=np.float64)
    if not 1 <= n <= w.size - 1:
        raise DomainError(f"n must satisfy 1 <= n <= len(w)-1, got n={n}, len(w)={w.size}")
    lhs = (n + 1) * (s2h_prime(w[n], a) - s2h_prime(w[n - 1], a))
    rhs = (nu(w[n - 1], a) - nu(xi, a)) * np.log(w[n - 1])
    if n >= 2:
        rhs += (n - 1) * (h_plus_sh_prime(w[n - 1], a) - h_plus_sh_prime(w[n - 2], a))
    return float(abs(lhs - rhs))


def geometric_l1_gap(sp: SimplexPoint, xi: float) -> float:
    """l1 distance between the maximizer's p-vector and the infinite geometric (1-xi) xi^n."""
    p = sp.p
    ref = (1.0 - xi) * xi ** np.arange(p.size)
    tail = xi ** p.size
    return float(np.abs(p - ref).sum() + tail)
