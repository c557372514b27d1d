"""Entropy-constrained output entropy checks and the Renyi chain for the amplifier."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelSpec, apply_channel, thermal_image, thermal_image_gap
from .errors import DomainError
from .fock import (
    DEFAULT_POLICY,
    TruncationPolicy,
    as_spectrum,
    log_f_p_closed,
    make_thermal,
    renyi_entropy,
    shannon,
    thermal_entropy,
)
from .norms import optimize_gaussian_z

TEMPERED_RANDOM = "tempered_random"
TWO_POINT_MIX = "two_point_mix"
FAMILIES = (TEMPERED_RANDOM, TWO_POINT_MIX)
MATCH_TOL = 1e-9


@dataclass
class MatchedState:
    spectrum: np.ndarray
    target_entropy: float
    achieved_entropy: float
    family: str
    seed: int


def _bisect(fun, lo: float, hi: float, target: float, tol: float, iters: int = 300) -> float:
    """Root of an increasing scalar function by bisection."""
    mid = 0.5 * (lo + hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        v = fun(mid)
        if abs(v - target) <= tol:
            break
        if v < target:
            lo = mid
        else:
            hi = mid
    return mid


def _tempered(logv: np.ndarray, beta: float) -> np.ndarray:
    w = np.exp(beta * (logv - logv.max()))
    return w / w.sum()


def match_entropy_state(target_S: float, dim: int, family: str = TEMPERED_RANDOM, seed: int = 0) -> MatchedState:
    """Seeded random state of dimension ``dim`` whose entropy equals ``target_S``.

    tempered_random: v**beta / sum v**beta for uniform random v, beta found by
    bisection on log beta (entropy falls from ln dim at beta = 0 to 0 as beta grows).
    two_point_mix: (1-t) delta_k + t * uniform over m random levels containing k;
    two eigenvalue levels, entropy increasing in t from 0 to ln m.
    """
    if dim < 1:
        raise DomainError(f"dim must be >= 1, got {dim}")
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}; expected one of {FAMILIES}")
    S_max = math.log(dim)
    if not 0.0 <= target_S <= S_max + 1e-15:
        raise DomainError(f"target entropy must lie in [0, ln dim] = [0, {S_max}], got {target_S}")
    rng = np.random.default_rng(seed)
    if target_S == 0.0:
        x = np.zeros(dim)
        x[int(rng.integers(dim))] = 1.0
        return MatchedState(x, target_S, 0.0, family, seed)
    if target_S >= S_max:
        x = np.full(dim, 1.0 / dim)
        return MatchedState(x, target_S, shannon(x), family, seed)

    if family == TEMPERED_RANDOM:
        logv = np.log(rng.uniform(1e-3, 1.0, dim))

        def ent(lb):
            return -shannon(_tempered(logv, math.exp(lb)))

        # entropy decreases in beta, so bisect on its negative
        lb = _bisect(ent, -40.0, 40.0, -target_S, 1e-13)
        x = _tempered(logv, math.exp(lb))
    else:
        m_min = max(2, math.ceil(math.exp(target_S)))
        m = int(rng.integers(m_min, dim + 1)) if m_min < dim else dim
        support = rng.choice(dim, size=m, replace=False)
        peak = support[0]

        def build(t):
            x = np.zeros(dim)
            x[support] = t / m
            x[peak] += 1.0 - t
            return x

        t = _bisect(lambda t: shannon(build(t)), 0.0, 1.0, target_S, 1e-13)
        x = build(t)
    achieved = shannon(x)
    if abs(achieved - target_S) > MATCH_TOL:
        raise DomainError(f"entropy matching missed the target by {abs(achieved - target_S):.3g}")
    return MatchedState(x, target_S, achieved, family, seed)


def thermal_output_entropy(channel: ChannelSpec, z: float) -> float:
    """Closed-form entropy of Phi(omega_z), itself thermal."""
    return thermal_entropy(thermal_image(channel, z))


def entropy_tail_bound(mass: float, dim: int) -> float:
    """Upper bound -m ln(m / dim) on the entropy carried by lost mass m spread over dim levels."""
    if mass <= 0.0:
        return 0.0
    return -mass * math.log(mass / dim)


def output_entropy_terms(channel: ChannelSpec, rho: MatchedState, z: float, policy: TruncationPolicy = DEFAULT_POLICY) -> dict:
    if abs(rho.target_entropy - thermal_entropy(z)) > MATCH_TOL:
        raise DomainError(
            f"state entropy {rho.target_entropy!r} does not match S(omega_z) = {thermal_entropy(z)!r} within {MATCH_TOL}"
        )
    y = apply_channel(channel, rho.spectrum, policy)
    lost = max(0.0, float(np.sum(rho.spectrum) - np.sum(y)))
    s_out = shannon(y)
    s_ref = thermal_output_entropy(channel, z)
    return {"output_entropy": s_out, "thermal_output_entropy": s_ref, "gap": s_out - s_ref,
            "tail_mass": lost, "tail_entropy_bound": entropy_tail_bound(lost, y.size)}


def output_entropy_gap(channel: ChannelSpec, rho: MatchedState, z: float, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """S(Phi(rho)) - S(Phi(omega_z)) for rho with the entropy of omega_z."""
    return output_entropy_terms(channel, rho, z, policy)["gap"]


def thermal_matched_state(z: float, policy: TruncationPolicy = DEFAULT_POLICY) -> MatchedState:
    x = make_thermal(z, policy)
    return MatchedState(x, thermal_entropy(z), shannon(x), "thermal", 0)


def _renyi_thermal(z: float, one_minus_z: float, p: float) -> float:
    return p / (1.0 - p) * log_f_p_closed(z, p, one_minus_z=one_minus_z)


@dataclass
class ChainResult:
    p_found: float | None
    lhs: float
    rhs: float
    slack: float
    candidates: list = field(default_factory=list)
    curve: list = field(default_factory=list)
    found: bool = True

    def to_dict(self) -> dict:
        return {"p_found": self.p_found, "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                "candidates": self.candidates, "curve": self.curve, "found": self.found}


def z_star_of_p(kappa: float, p: float, q: float) -> float:
    return optimize_gaussian_z(ChannelSpec.amplifier(kappa), p, q).z_star


def find_p_for_z(kappa: float, z: float, q: float, n_scan: int = 24, p_tol: float = 1e-4) -> tuple[list, list]:
    """All p in (1, q) with z_star(p) = z, by a scan for sign changes and bisection in p."""
    ps = 1.0 + (q - 1.0) * np.linspace(0.01, 0.99, n_scan)
    d = [z_star_of_p(kappa, p, q) - z for p in ps]
    curve = [(float(p), float(v + z)) for p, v in zip(ps, d)]
    found = []
    for i in range(n_scan - 1):
        if d[i] == 0.0:
            found.append(float(ps[i]))
            continue
        if (d[i] < 0) != (d[i + 1] < 0):
            lo, hi, dlo = ps[i], ps[i + 1], d[i]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                dm = z_star_of_p(kappa, mid, q) - z
                if (dm < 0) == (dlo < 0):
                    lo, dlo = mid, dm
                else:
                    hi = mid
                if hi - lo <= 1e-13:
                    break
            pm = 0.5 * (lo + hi)
            if abs(z_star_of_p(kappa, pm, q) - z) <= p_tol:
                found.append(float(pm))
    return found, curve


def chain_terms(kappa: float, z: float, p: float, q: float, rho, policy: TruncationPolicy = DEFAULT_POLICY) -> tuple[float, float]:
    """(S_q(A rho), S_q(A omega_z) + (p-1)/(q-1) q/p (S_p(rho) - S_p(omega_z)))."""
    amp = ChannelSpec.amplifier(kappa)
    rho = as_spectrum(rho)
    lhs = renyi_entropy(apply_channel(amp, rho, policy), q)
    zp, gap = thermal_image(amp, z), thermal_image_gap(amp, z)
    rhs = _renyi_thermal(zp, gap, q) + (p - 1.0) / (q - 1.0) * q / p * (
        renyi_entropy(rho, p) - _renyi_thermal(z, 1.0 - z, p)
    )
    return lhs, rhs


def renyi_chain_check(kappa: float, z: float, q: float, n_states: int = 100, seed: int = 0, dim: int = 32,
                      p_tol: float = 1e-4, policy: TruncationPolicy = DEFAULT_POLICY) -> ChainResult:
    """Locate p with omega_z maximizing the amplifier p->q ratio, then test the Renyi chain on random states.

    The thermal state itself is always the first test state (equality case).
    The worst slack over all states and all p candidates is reported.
    """
    if not 1.0 < q < 1.5:
        raise DomainError(f"q must lie in (1, 3/2), got {q}")
    if not kappa >= 1.0:
        raise DomainError(f"kappa must be >= 1, got {kappa}")
    if not 0.0 < z < 1.0:
        raise DomainError(f"z must lie in (0, 1), got {z}")
    if kappa == 1.0:
        return ChainResult(None, math.nan, math.nan, math.nan, found=False)
    cands, curve = find_p_for_z(kappa, z, q, p_tol=p_tol)
    if not cands:
        return ChainResult(None, math.nan, math.nan, math.nan, curve=curve, found=False)
    rng = np.random.default_rng(seed)
    states = [make_thermal(z, policy)]
    S_max = math.log(dim)
    for i in range(n_states - 1):
        fam = FAMILIES[i % 2]
        states.append(match_entropy_state(float(rng.uniform(0.0, S_max)), dim, fam, int(rng.integers(2**32))).spectrum)
    worst = (math.inf, math.nan, math.nan, None)
    for p in cands:
        for x in states:
            lhs, rhs = chain_terms(kappa, z, p, q, x, policy)
            if lhs - rhs < worst[0]:
                worst = (lhs - rhs, lhs, rhs, p)
    slack, lhs, rhs, p_w = worst
    return ChainResult(p_w, lhs, rhs, slack, candidates=cands, curve=curve)
