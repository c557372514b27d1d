"""Fock-diagonal spectra: thermal family, Schatten norms, entropies, rearrangement.

A spectrum is a 1-D float array ``x`` standing for the operator
``sum_n x[n] |n><n|``; index is photon number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class TruncationPolicy:
    eps_tail: float = 1e-14
    max_dim: int = 512

    def __post_init__(self):
        if not 0.0 < self.eps_tail < 1.0:
            raise DomainError(f"eps_tail must lie in (0, 1), got {self.eps_tail}")
        if self.max_dim < 2:
            raise DomainError(f"max_dim must be >= 2, got {self.max_dim}")


DEFAULT_POLICY = TruncationPolicy()


def as_spectrum(x, signed: bool = False) -> np.ndarray:
    """Validate and return ``x`` as a contiguous float64 spectrum."""
    arr = np.array(x, dtype=np.float64, ndmin=1)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError(f"spectrum must be a non-empty 1-D sequence, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("spectrum contains non-finite values")
    if not signed and np.any(arr < 0):
        raise DomainError(f"spectrum has negative entries (min {arr.min():.3g})")
    return arr


def _check_z(z: float) -> float:
    if not 0.0 <= z < 1.0:
        raise DomainError(f"thermal parameter z must satisfy 0 <= z < 1, got {z}")
    return float(z)


def thermal_dim(z: float, policy: TruncationPolicy = DEFAULT_POLICY) -> int:
    """Smallest N+1 with z**(N+1) <= eps_tail, capped at max_dim."""
    z = _check_z(z)
    if z == 0.0:
        return 1
    k = max(1, math.ceil(math.log(policy.eps_tail) / math.log(z)))
    # float log ratio can land one off either way
    while k > 1 and z ** (k - 1) <= policy.eps_tail:
        k -= 1
    while z**k > policy.eps_tail:
        k += 1
    return min(k, policy.max_dim)


def make_thermal(z: float, policy: TruncationPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Truncated geometric spectrum (1-z) z**n of the thermal state."""
    dim = thermal_dim(z, policy)
    if z == 0.0:
        return np.ones(1)
    return (1.0 - z) * np.power(z, np.arange(dim, dtype=np.float64))


def thermal_tail(z: float, dim: int) -> float:
    """Mass of the thermal state beyond the first ``dim`` levels."""
    return float(_check_z(z)) ** dim


def thermal_energy(z: float) -> float:
    z = _check_z(z)
    return z / (1.0 - z)


def thermal_entropy(z: float) -> float:
    z = _check_z(z)
    if z == 0.0:
        return 0.0
    return -math.log1p(-z) - z * math.log(z) / (1.0 - z)


def entropy_to_z(target_S: float, tol: float = 1e-12) -> float:
    """Invert the thermal entropy by bisection on [0, 1 - 1e-15]."""
    if target_S < 0:
        raise DomainError(f"target entropy must be >= 0, got {target_S}")
    if target_S == 0:
        return 0.0
    lo, hi = 0.0, 1.0 - 1e-15
    if thermal_entropy(hi) < target_S:
        raise DomainError(f"target entropy {target_S} exceeds the representable range")
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        s = thermal_entropy(mid)
        if abs(s - target_S) <= tol * 0.1 or hi - lo <= 1e-17:
            break
        if s < target_S:
            lo = mid
        else:
            hi = mid
    return mid


def schatten_norm(x, p: float) -> float:
    """l^p norm of the (absolute) spectrum, rescaled by its max entry."""
    if not p >= 1:
        raise DomainError(f"Schatten exponent must be >= 1, got {p}")
    a = np.abs(as_spectrum(x, signed=True))
    m = a.max()
    if m == 0.0:
        return 0.0
    if math.isinf(p):
        return float(m)
    return float(m * np.sum((a / m) ** p) ** (1.0 / p))


def _power_sum_root(x: np.ndarray, p: float) -> float:
    # (sum x^p)^(1/p) for any p > 0; not a norm when p < 1
    m = x.max()
    if m == 0.0:
        return 0.0
    return float(m * np.sum((x / m) ** p) ** (1.0 / p))


def f_p_closed(z: float, p: float) -> float:
    """Closed-form p-norm of the infinite thermal spectrum."""
    z = _check_z(z)
    if not p > 1:
        raise DomainError(f"f_p requires p > 1, got {p}")
    if z == 0.0:
        return 1.0
    one_minus_zp = -math.expm1(p * math.log(z))
    return (1.0 - z) / one_minus_zp ** (1.0 / p)


def log_f_p_closed(z: float, p: float, one_minus_z: float | None = None) -> float:
    """log f_p(z); ``one_minus_z`` may be supplied to avoid cancellation near z=1."""
    z = _check_z(z)
    if z == 0.0:
        return 0.0
    omz = 1.0 - z if one_minus_z is None else one_minus_z
    lz = math.log1p(-omz) if omz < 0.5 else math.log(z)
    return math.log(omz) - math.log(-math.expm1(p * lz)) / p


def renyi_entropy(x, p: float) -> float:
    """p/(1-p) ln (sum x^p)^(1/p)."""
    if not p > 0 or p == 1:
        raise DomainError(f"Renyi order must be > 0 and != 1, got {p} (use von_neumann_entropy at p=1)")
    x = as_spectrum(x)
    return p / (1.0 - p) * math.log(_power_sum_root(x, p))


def _xlogx(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    nz = x > 0
    out[nz] = x[nz] * np.log(x[nz])
    return out


def shannon(p: np.ndarray) -> float:
    """-sum p ln p with 0 ln 0 = 0, no normalization check."""
    return float(-np.sum(_xlogx(np.asarray(p, dtype=np.float64))))


def von_neumann_entropy(x, tol: float = 1e-10) -> float:
    x = as_spectrum(x)
    tr = float(np.sum(x))
    if abs(tr - 1.0) > tol:
        raise DomainError(f"state must have unit trace within {tol}, measured trace {tr!r}")
    return shannon(x)


def fock_rearrange(x) -> np.ndarray:
    x = as_spectrum(x)
    return np.sort(x)[::-1].copy()


def majorizes(x, y, slack: float = 1e-12, tol: float = 1e-10) -> bool:
    """True iff x majorizes y (partial sums of the sorted spectra dominate)."""
    x = fock_rearrange(x)
    y = fock_rearrange(y)
    if abs(x.sum() - y.sum()) > tol:
        raise DomainError(f"majorization needs equal totals, got {x.sum()!r} vs {y.sum()!r}")
    d = max(x.size, y.size)
    xs = np.cumsum(np.pad(x, (0, d - x.size)))
    ys = np.cumsum(np.pad(y, (0, d - y.size)))
    return bool(np.all(xs >= ys - slack))
