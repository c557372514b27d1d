"""Transition kernels of the quantum-limited attenuator and amplifier on Fock-diagonal inputs.

``kernel.matrix[n, k]`` is the probability of output photon number ``n``
given input photon number ``k``; a spectrum ``x`` maps to ``matrix @ x``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.stats import nbinom

from .errors import DomainError
from .fock import DEFAULT_POLICY, TruncationPolicy, as_spectrum

ATTENUATOR = "attenuator"
AMPLIFIER = "amplifier"
COMPOSITE = "composite"

# hard ceiling on amplifier output dimension
MAX_OUT_DIM = 1 << 16


@dataclass(frozen=True)
class ChannelSpec:
    """Phase-covariant channel: attenuator(lam), amplifier(kappa), or amplifier(kappa) after attenuator(lam)."""

    kind: str
    lam: float = 1.0
    kappa: float = 1.0

    def __post_init__(self):
        if self.kind not in (ATTENUATOR, AMPLIFIER, COMPOSITE):
            raise DomainError(f"unknown channel kind {self.kind!r}")
        if not 0.0 <= self.lam <= 1.0:
            raise DomainError(f"transmissivity lambda must lie in [0, 1], got {self.lam}")
        if not self.kappa >= 1.0:
            raise DomainError(f"amplification kappa must be >= 1, got {self.kappa}")
        if self.kind == ATTENUATOR and self.kappa != 1.0:
            raise DomainError("an attenuator takes no kappa")
        if self.kind == AMPLIFIER and self.lam != 1.0:
            raise DomainError("an amplifier takes no lambda")

    @classmethod
    def attenuator(cls, lam: float) -> "ChannelSpec":
        return cls(ATTENUATOR, lam=lam)

    @classmethod
    def amplifier(cls, kappa: float) -> "ChannelSpec":
        return cls(AMPLIFIER, kappa=kappa)

    @classmethod
    def composite(cls, lam: float, kappa: float) -> "ChannelSpec":
        return cls(COMPOSITE, lam=lam, kappa=kappa)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lambda": self.lam, "kappa": self.kappa}


@dataclass(frozen=True)
class KernelMatrix:
    matrix: np.ndarray
    # worst per-column probability mass lost to output truncation
    truncation_loss: float = 0.0
    label: str = field(default="", compare=False)

    @property
    def in_dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def out_dim(self) -> int:
        return self.matrix.shape[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        np.savetxt(buf, self.matrix, delimiter=",", fmt="%.17g")
        return buf.getvalue()


@lru_cache(maxsize=8)
def _log_factorials(n: int) -> np.ndarray:
    out = np.zeros(n + 1)
    if n:
        out[1:] = np.cumsum(np.log(np.arange(1, n + 1, dtype=np.float64)))
    return out


def _log_binom(top: np.ndarray, bottom: np.ndarray) -> np.ndarray:
    lf = _log_factorials(int(max(top.max(), 1)))
    diff = np.clip(top - bottom, 0, None)
    return lf[top] - lf[np.clip(bottom, 0, None)] - lf[diff]


def _frozen(m: np.ndarray) -> np.ndarray:
    m.setflags(write=False)
    return m


@lru_cache(maxsize=64)
def attenuator_kernel(lam: float, in_dim: int) -> KernelMatrix:
    """Binomial thinning kernel C(k,n) lam^n (1-lam)^(k-n), n <= k. Cached; the matrix is read-only."""
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"transmissivity lambda must lie in [0, 1], got {lam}")
    if in_dim < 1:
        raise DomainError(f"in_dim must be >= 1, got {in_dim}")
    if lam == 1.0:
        return KernelMatrix(_frozen(np.eye(in_dim)), label=f"attenuator({lam})")
    if lam == 0.0:
        m = np.zeros((in_dim, in_dim))
        m[0, :] = 1.0
        return KernelMatrix(_frozen(m), label="attenuator(0)")
    n = np.arange(in_dim)[:, None]
    k = np.arange(in_dim)[None, :]
    logr = _log_binom(np.broadcast_to(k, (in_dim, in_dim)), np.broadcast_to(n, (in_dim, in_dim)))
    logr = logr + n * math.log(lam) + (k - n) * math.log1p(-lam)
    m = np.where(n <= k, np.exp(np.where(n <= k, logr, -np.inf)), 0.0)
    return KernelMatrix(_frozen(m), label=f"attenuator({lam})")


def amplifier_out_dim(kappa: float, in_dim: int, policy: TruncationPolicy = DEFAULT_POLICY) -> tuple[int, float]:
    """Output dimension making every column's lost mass <= eps_tail, and that loss.

    Column k is k plus a negative-binomial count with k+1 successes at rate 1/kappa;
    the last column has the heaviest tail.
    """
    if kappa == 1.0:
        return in_dim, 0.0
    k = in_dim - 1
    dist = nbinom(k + 1, 1.0 / kappa)
    m = int(dist.isf(policy.eps_tail))
    while m > 0 and dist.sf(m - 1) <= policy.eps_tail:
        m -= 1
    while dist.sf(m) > policy.eps_tail:
        m += 1
    out = k + m + 1
    if out > MAX_OUT_DIM:
        raise DomainError(f"amplifier output dimension {out} exceeds the ceiling {MAX_OUT_DIM}")
    return out, float(dist.sf(m))


@lru_cache(maxsize=64)
def amplifier_kernel(
    kappa: float,
    in_dim: int,
    policy: TruncationPolicy = DEFAULT_POLICY,
    out_dim: int | None = None,
) -> KernelMatrix:
    """Kernel (1/kappa) C(n,k) kappa^-k (1-1/kappa)^(n-k), n >= k; columns are not renormalized.

    Cached; the matrix is read-only.
    """
    if not kappa >= 1.0:
        raise DomainError(f"amplification kappa must be >= 1, got {kappa}")
    if in_dim < 1:
        raise DomainError(f"in_dim must be >= 1, got {in_dim}")
    if kappa == 1.0:
        d = in_dim if out_dim is None else out_dim
        return KernelMatrix(_frozen(np.eye(d, in_dim)), label="amplifier(1)")
    if out_dim is None:
        out_dim, loss = amplifier_out_dim(kappa, in_dim, policy)
    else:
        loss = float(nbinom(in_dim, 1.0 / kappa).sf(out_dim - in_dim)) if out_dim >= in_dim else 1.0
    n = np.arange(out_dim)[:, None]
    k = np.arange(in_dim)[None, :]
    shape = (out_dim, in_dim)
    lower = n >= k
    logr = _log_binom(np.broadcast_to(n, shape), np.broadcast_to(k, shape))
    logr = logr - (k + 1) * math.log(kappa) + (n - k) * math.log1p(-1.0 / kappa)
    m = np.where(lower, np.exp(np.where(lower, logr, -np.inf)), 0.0)
    return KernelMatrix(_frozen(m), truncation_loss=loss, label=f"amplifier({kappa})")


def apply(kernel: KernelMatrix, x) -> np.ndarray:
    x = as_spectrum(x, signed=True)
    if x.size > kernel.in_dim:
        raise DomainError(f"spectrum dim {x.size} exceeds kernel in_dim {kernel.in_dim}")
    return kernel.matrix[:, : x.size] @ x


def semigroup_apply(t: float, x) -> np.ndarray:
    """exp(t L) on a diagonal spectrum, i.e. the attenuator with lam = e^-t."""
    if not t >= 0:
        raise DomainError(f"semigroup time must be >= 0, got {t}")
    x = as_spectrum(x, signed=True)
    return apply(attenuator_kernel(math.exp(-t), x.size), x)


def generator_matrix(dim: int) -> np.ndarray:
    """Generator on diagonal spectra: (L x)_n = (n+1) x_{n+1} - n x_n."""
    n = np.arange(dim, dtype=np.float64)
    return np.diag(-n) + np.diag(n[1:], 1)


def thermal_image(spec: ChannelSpec, z: float) -> float:
    if not 0.0 <= z < 1.0:
        raise DomainError(f"thermal parameter z must satisfy 0 <= z < 1, got {z}")
    if spec.kind in (ATTENUATOR, COMPOSITE):
        lam = spec.lam
        z = lam * z / (1.0 - (1.0 - lam) * z)
    if spec.kind in (AMPLIFIER, COMPOSITE):
        kap = spec.kappa
        z = (z + kap - 1.0) / kap
    return z


def thermal_image_gap(spec: ChannelSpec, z: float, one_minus_z: float | None = None) -> float:
    """1 - z' for the image thermal parameter, computed without cancellation."""
    omz = 1.0 - z if one_minus_z is None else one_minus_z
    if spec.kind in (ATTENUATOR, COMPOSITE):
        lam = spec.lam
        omz = omz / (lam + (1.0 - lam) * omz)
    if spec.kind in (AMPLIFIER, COMPOSITE):
        omz = omz / spec.kappa
    return omz


def duality_residual(x, y, kappa: float) -> float:
    """|kappa <y, A_kappa x> - <E_{1/kappa} y, x>|.

    Only the first len(y) output rows of A_kappa x pair with y, so the
    amplifier is evaluated exactly on those rows and no tail is lost.
    """
    x = as_spectrum(x, signed=True)
    y = as_spectrum(y, signed=True)
    if not kappa >= 1.0:
        raise DomainError(f"amplification kappa must be >= 1, got {kappa}")
    d = max(x.size, y.size)
    amp = amplifier_kernel(kappa, x.size, out_dim=d)
    lhs = kappa * float(np.dot(np.pad(y, (0, d - y.size)), apply(amp, x)))
    att = attenuator_kernel(1.0 / kappa, y.size)
    ey = apply(att, y)
    m = min(ey.size, x.size)
    rhs = float(np.dot(ey[:m], x[:m]))
    return abs(lhs - rhs)


def channel_kernel(spec: ChannelSpec, in_dim: int, policy: TruncationPolicy = DEFAULT_POLICY) -> KernelMatrix:
    """Single kernel for the whole channel; composite is amplifier @ attenuator."""
    if spec.kind == ATTENUATOR:
        return attenuator_kernel(spec.lam, in_dim)
    if spec.kind == AMPLIFIER:
        return amplifier_kernel(spec.kappa, in_dim, policy)
    att = attenuator_kernel(spec.lam, in_dim)
    amp = amplifier_kernel(spec.kappa, in_dim, policy)
    return KernelMatrix(amp.matrix @ att.matrix, truncation_loss=amp.truncation_loss, label=f"composite({spec.lam},{spec.kappa})")


def apply_channel(spec: ChannelSpec, x, policy: TruncationPolicy = DEFAULT_POLICY) -> np.ndarray:
    x = as_spectrum(x, signed=True)
    if spec.kind == ATTENUATOR:
        return apply(attenuator_kernel(spec.lam, x.size), x)
    if spec.kind == AMPLIFIER:
        return apply(amplifier_kernel(spec.kappa, x.size, policy), x)
    y = apply(attenuator_kernel(spec.lam, x.size), x)
    return apply(amplifier_kernel(spec.kappa, y.size, policy), y)


def thinning(p_dist, lam: float, tol: float = 1e-10) -> np.ndarray:
    """Binomial thinning of a photon-number distribution."""
    p = as_spectrum(p_dist)
    if abs(p.sum() - 1.0) > tol:
        raise DomainError(f"thinning needs a probability distribution, measured total {p.sum()!r}")
    return apply(attenuator_kernel(lam, p.size), p)
