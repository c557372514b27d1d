"""Log-Sobolev functionals for the attenuator semigroup and the exponent-flow shooting.

Admissible spectra ``x`` satisfy ``sum x**(1/a) == 1``; the probability
vector ``p = x**(1/a)`` is the natural coordinate throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.optimize import brentq
from scipy.special import logit, expit

from .channels import generator_matrix
from .errors import ConvergenceError, DomainError
from .fock import DEFAULT_POLICY, as_spectrum, make_thermal, schatten_norm, shannon, thermal_entropy

ADMISSIBLE_TOL = 1e-10


@dataclass(frozen=True)
class SobolevPoint:
    z: float
    a: float

    def __post_init__(self):
        if not 0.0 < self.z < 1.0:
            raise DomainError(f"z must lie in (0, 1), got {self.z}")
        if not 0.0 < self.a < 1.0:
            raise DomainError(f"a must lie in (0, 1), got {self.a}")

    @property
    def xi(self) -> float:
        return self.z ** (1.0 / self.a)


def _check_a(a: float) -> None:
    if not 0.0 < a < 1.0:
        raise DomainError(f"a must lie in (0, 1), got {a}")


# 1/k! for the series branch of mu
_INV_FACT = tuple(1.0 / math.factorial(k) for k in range(10))


def _mu_scalar(z: float, a: float) -> float:
    if z == 1.0:
        return 0.0
    if z == 0.0:
        return -math.inf
    L = math.log(z)
    c = (a - 1.0) / a
    if abs(c * L) <= 1e-3:
        return a * sum(L ** (k - 1) * _INV_FACT[k] * (a * c**k + 1.0 - a) for k in range(2, 10))
    try:
        return a * (a * math.expm1(c * L) + (1.0 - a) * math.expm1(L)) / L
    except OverflowError:
        return -math.inf


def mu(z, a):
    """Coefficient of S_a in the log-Sobolev functional; mu(1, a) = 0.

    Written as a * (a*expm1(c L) + (1-a)*expm1(L)) / L with L = ln z and
    c = (a-1)/a; the first-order terms cancel, so a Taylor series takes
    over when |c L| is small.
    """
    if isinstance(z, float) and isinstance(a, float):
        return _mu_scalar(z, a)
    z = np.asarray(z, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        L = np.log(z)
        c = (a - 1.0) / a
        direct = a * (a * np.expm1(c * L) + (1.0 - a) * np.expm1(L)) / L
        series = np.zeros(np.broadcast(L, a).shape)
        for k in range(2, 10):
            series = series + L ** (k - 1) / math.factorial(k) * (a * c**k + 1.0 - a)
        series = a * series
        small = np.abs(c * L) <= 1e-3
        out = np.where(small, series, direct)
        out = np.where(z == 1.0, 0.0, out)
    return out[()] if out.ndim == 0 else out


def mu_upper_bound(z, a):
    """The cruder bound (a z^((a-1)/a) - 1) / ln z^(1/a) >= mu, used only as a diagnostic."""
    z = np.asarray(z, dtype=np.float64)
    with np.errstate(divide="ignore", over="ignore"):
        out = (a * np.power(z, (a - 1.0) / a) - 1.0) / (np.log(z) / a)
    return out[()] if out.ndim == 0 else out


def h(s, a):
    return np.power(s, a - 1.0) - 1.0


def h_prime(s, a):
    return (a - 1.0) * np.power(s, a - 2.0)


def s2h_prime(s, a):
    """s^2 h'(s) = -(1-a) s^a, continuous at s = 0."""
    return -(1.0 - a) * np.power(s, a)


def h_plus_sh_prime(s, a):
    """h(s) + s h'(s) = a s^(a-1) - 1."""
    return a * np.power(s, a - 1.0) - 1.0


def nu(s, a):
    """mu(s**a, a)."""
    return mu(np.power(s, a), a)


def normalize_admissible(x, a: float) -> np.ndarray:
    """Rescale a nonnegative vector so that sum x**(1/a) = 1."""
    _check_a(a)
    x = as_spectrum(x)
    tot = np.sum(x ** (1.0 / a))
    if tot == 0:
        raise DomainError("cannot normalize the zero spectrum")
    return x / tot**a


def _admissible(x, a: float) -> np.ndarray:
    _check_a(a)
    x = as_spectrum(x)
    tot = float(np.sum(x ** (1.0 / a)))
    if abs(tot - 1.0) > ADMISSIBLE_TOL:
        raise DomainError(f"spectrum must satisfy sum x^(1/a) = 1 within {ADMISSIBLE_TOL}, measured {tot!r}")
    return x / tot**a


def F_a(x, a: float) -> float:
    """Derivative of ln ||e^{tL} x||_{1/a} at t = 0, for admissible x."""
    x = _admissible(x, a)
    if x.size == 1:
        return 0.0
    n = np.arange(1, x.size)
    e = 1.0 / a
    terms = x[1:] * np.power(x[:-1], e - 1.0) - np.power(x[1:], e)
    return float(np.sum(n * terms))


def S_a(x, a: float) -> float:
    x = _admissible(x, a)
    return shannon(np.power(x, 1.0 / a))


def script_F(point: SobolevPoint, x) -> float:
    return F_a(x, point.a) + float(mu(point.z, point.a)) * S_a(x, point.a)


def thermal_reference(point: SobolevPoint) -> float:
    """Closed-form value of the functional at the thermal state.

    With xi = z^(1/a): xi h(xi) / (1 - xi) + nu(xi, a) S(omega_xi), and xi h(xi) = z - xi.
    """
    z, a, xi = point.z, point.a, point.xi
    return (z - xi) / (1.0 - xi) + float(mu(z, a)) * thermal_entropy(xi)


def thermal_admissible(point: SobolevPoint, policy=DEFAULT_POLICY) -> np.ndarray:
    """Truncated thermal spectrum scaled to be admissible at exponent 1/a."""
    p = make_thermal(point.xi, policy)
    p = p / p.sum()
    return np.power(p, point.a)


def logsobolev_margin(point: SobolevPoint, x) -> float:
    return thermal_reference(point) - script_F(point, x)


def _log_norm_flow(t: float, x: np.ndarray, e: float) -> float:
    # e^{tL} via the matrix exponential so that negative t is available for finite rank
    y = expm(t * generator_matrix(x.size)) @ x
    return math.log(schatten_norm(y, e))


def F_a_fd_check(x, a: float, dt: float = 1e-5) -> float:
    """|F_a(x) - central difference of ln ||e^{tL} x||_{1/a} at t = 0|."""
    if not 0.0 < dt <= 1e-3:
        raise DomainError(f"dt must lie in (0, 1e-3], got {dt}")
    x = _admissible(x, a)
    if x.size == 1:
        return 0.0
    e = 1.0 / a
    fd = (_log_norm_flow(dt, x, e) - _log_norm_flow(-dt, x, e)) / (2.0 * dt)
    return abs(F_a(x, a) - fd)


def dlnnorm_da_check(x, a: float, da: float = 1e-5) -> float:
    """|S_a(x) - central difference in a of ln ||x||_{1/a}| for positive finite-rank x."""
    if not (0.0 < a - da and a + da < 1.0):
        raise DomainError(f"need 0 < a - da and a + da < 1, got a={a}, da={da}")
    x = as_spectrum(x)
    if not np.any(x > 0):
        raise DomainError("spectrum must be nonzero")

    def lnorm(b):
        return math.log(schatten_norm(x, 1.0 / b))

    fd = (lnorm(a + da) - lnorm(a - da)) / (2.0 * da)
    pw = np.power(x, 1.0 / a)
    return abs(shannon(pw / pw.sum()) - fd)


@dataclass
class ShootingResult:
    z0: float
    trajectory: np.ndarray  # rows (t, a(t), z(t))
    converged: bool
    residual: float
    lam: float
    p: float
    q: float
    roots: list = field(default_factory=list)
    monotone: bool = True

    def to_dict(self) -> dict:
        return {
            "z0": self.z0,
            "lambda": self.lam,
            "p": self.p,
            "q": self.q,
            "converged": self.converged,
            "residual": self.residual,
            "monotone": self.monotone,
            "roots": list(self.roots),
            "trajectory": self.trajectory.tolist(),
        }


def thermal_flow_z(t, z0: float):
    """Thermal parameter of e^{tL} applied to omega_{z0}."""
    et = np.exp(-t)
    return et * z0 / (1.0 - (1.0 - et) * z0)


def _integrate(z0: float, T: float, a0: float, a_floor: float, tol: float, dense: bool = False):
    def rhs(t, y):
        return [_mu_scalar(float(thermal_flow_z(t, z0)), float(y[0]))]

    def hit_floor(t, y):
        return y[0] - a_floor

    hit_floor.terminal = True
    hit_floor.direction = -1
    return solve_ivp(
        rhs, (0.0, T), [a0], method="DOP853", rtol=tol / 100, atol=tol / 100,
        events=hit_floor, dense_output=dense,
    )


def ode_shoot(lam: float, p: float, q: float, tol: float = 1e-10, n_scan: int = 33, n_samples: int = 65) -> ShootingResult:
    """Find z0 so that a' = mu(z(t), a), a(0) = 1/p reaches a(T) = 1/q at T = -ln lam.

    A logit-spaced scan of z0 brackets every sign change of a(T) - 1/q; each
    bracket is refined by Brent's method. The flow is stopped early once a
    falls to 1/(2q), since a is decreasing and the sign is then settled.
    """
    if not 0.0 < lam < 1.0:
        raise DomainError(f"lambda must lie in (0, 1), got {lam}")
    if not 1.0 < p < q:
        raise DomainError(f"need 1 < p < q, got p={p}, q={q}")
    if not tol > 0:
        raise DomainError(f"tol must be > 0, got {tol}")
    T = -math.log(lam)
    a0, target = 1.0 / p, 1.0 / q
    a_floor = 0.5 * target

    def resid(z0):
        sol = _integrate(z0, T, a0, a_floor, tol)
        if sol.status == 1:
            # stopped at the floor: a(T) lies below it, the exact value is not needed
            return a_floor - target
        if sol.status == -1:
            # a collapses toward 0 in finite time when z0 is tiny. mu grows in both
            # z and a, and both decrease along the flow, so the slope at the last
            # accepted step bounds a' for the rest of [0, T].
            t1, a1 = sol.t[-1], sol.y[0, -1]
            if a1 + _mu_scalar(float(thermal_flow_z(t1, z0)), float(a1)) * (T - t1) < a_floor:
                return a_floor - target
            raise ConvergenceError(f"integration failed at t={t1!r}: {sol.message}", payload=np.array([t1, a1]))
        return sol.y[0, -1] - target

    grid = expit(np.linspace(logit(1e-12), logit(1.0 - 1e-12), n_scan))
    vals = np.array([resid(z) for z in grid])
    monotone = bool(np.all(np.diff(vals) >= -tol))
    brackets = [i for i in range(n_scan - 1) if vals[i] < 0 <= vals[i + 1] or vals[i] >= 0 > vals[i + 1]]
    if not brackets:
        traj = np.column_stack([grid, vals + target])
        raise ConvergenceError("no sign change of a(T) - 1/q over z0 in [1e-12, 1-1e-12]", payload=traj)
    roots = [brentq(resid, grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps) for i in brackets]
    z0 = roots[0]
    sol = _integrate(z0, T, a0, a_floor, tol, dense=True)
    residual = abs(sol.y[0, -1] - target)
    ts = np.linspace(0.0, sol.t[-1], n_samples)
    traj = np.column_stack([ts, sol.sol(ts)[0], thermal_flow_z(ts, z0)])
    return ShootingResult(
        z0=float(z0), trajectory=traj, converged=bool(residual <= tol and sol.t[-1] == T),
        residual=float(residual), lam=lam, p=p, q=q, roots=[float(r) for r in roots], monotone=monotone,
    )
