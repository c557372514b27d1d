import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussmax.channels import ChannelSpec
from gaussmax.errors import DomainError
from gaussmax.fock import f_p_closed
from gaussmax.norms import (
    BRUTE_FORCE,
    CLOSED_FORM,
    GAUSSIAN_SCAN,
    amplifier_duality_check,
    brute_force_ratio,
    chebyshev_grid,
    composite_bound,
    divergence_diagnostic,
    gaussian_ratio,
    norm,
    norm_by_shooting,
    norm_pp,
    optimize_gaussian_z,
    thermal_argmax_distance,
    thermal_image_norm_check,
)

# thermal-scan optima from mpmath (findroot on d/dz of the log ratio, 30 digits)
ATT_OPTIMA = [
    (0.6, 1.5, 2.5, 0.17954139817381127835, 1.0238965038665349254),
    (0.4, 1.2, 2.0, 0.08786440927605214160, 1.0086041645077354067),
    (0.8, 2.0, 3.0, 0.22967038573099193750, 1.0225674444701503765),
]
AMP_Z, AMP_VALUE = 0.05642752363648945935, 0.54253970427240166164  # kappa=2, p=1.5, q=2.5


def test_gaussian_ratio_examples():
    ident = ChannelSpec.attenuator(1.0)
    for z in (0.1, 0.5, 0.9):
        assert gaussian_ratio(ident, 2.0, 2.0, z) == pytest.approx(1.0, rel=1e-14)
    assert gaussian_ratio(ChannelSpec.attenuator(0.5), 2.0, 2.0, 0.5) == pytest.approx(math.sqrt(1.5), rel=1e-14)
    assert gaussian_ratio(ChannelSpec.amplifier(2.0), 1.5, 2.0, 0.0) == pytest.approx(1 / math.sqrt(3), rel=1e-14)


@given(st.floats(0.01, 0.99), st.floats(0.05, 1.0), st.floats(1.05, 4.0), st.floats(1.05, 4.0))
def test_gaussian_ratio_closed_form(z, lam, p, q):
    spec = ChannelSpec.attenuator(lam)
    zp = lam * z / (1 - (1 - lam) * z)
    assert gaussian_ratio(spec, p, q, z) == pytest.approx(f_p_closed(zp, q) / f_p_closed(z, p), rel=1e-10)


def test_gaussian_ratio_domain():
    with pytest.raises(DomainError):
        gaussian_ratio(ChannelSpec.attenuator(0.5), 1.0, 2.0, 0.5)
    with pytest.raises(DomainError):
        gaussian_ratio(ChannelSpec.attenuator(0.5), 2.0, 2.0, 1.0)


@pytest.mark.parametrize("lam,p,q,z_ref,v_ref", ATT_OPTIMA)
def test_attenuator_scan_frozen(lam, p, q, z_ref, v_ref):
    r = optimize_gaussian_z(ChannelSpec.attenuator(lam), p, q)
    assert r.method == GAUSSIAN_SCAN
    assert r.z_star == pytest.approx(z_ref, abs=1e-7)
    assert r.value == pytest.approx(v_ref, rel=1e-13)
    assert r.residuals["boundary"] is None and not r.residuals["boundary_anomaly"]


def test_amplifier_scan_frozen():
    r = optimize_gaussian_z(ChannelSpec.amplifier(2.0), 1.5, 2.5)
    assert r.z_star == pytest.approx(AMP_Z, abs=1e-7)
    assert r.value == pytest.approx(AMP_VALUE, rel=1e-13)


def test_scan_preconditions():
    with pytest.raises(DomainError):
        optimize_gaussian_z(ChannelSpec.attenuator(0.5), 2.0, 2.0)
    with pytest.raises(DomainError):
        optimize_gaussian_z(ChannelSpec.attenuator(1.0), 1.5, 2.0)


@pytest.mark.parametrize("kappa,p,q", [(2.0, 1.5, 2.5), (1.5, 1.3, 3.0), (4.0, 2.0, 2.5)])
def test_amplifier_duality(kappa, p, q):
    d = amplifier_duality_check(kappa, p, q)
    assert d["value_residual"] <= 1e-8
    assert d["mapped_value_residual"] <= 1e-8


def test_norm_pp_examples():
    assert norm_pp(ChannelSpec.attenuator(0.25), 2.0).value == pytest.approx(2.0, rel=1e-15)
    assert norm_pp(ChannelSpec.amplifier(4.0), 2.0).value == pytest.approx(0.5, rel=1e-15)
    assert norm_pp(ChannelSpec.attenuator(0.3), 1.0 + 1e-9).value == pytest.approx(1.0, abs=1e-8)
    r = norm_pp(ChannelSpec.attenuator(0.5), 3.0)
    assert r.method == CLOSED_FORM and r.z_star is None
    with pytest.raises(DomainError):
        norm_pp(ChannelSpec.attenuator(0.5), 1.0)


@pytest.mark.parametrize("spec", [ChannelSpec.attenuator(0.3), ChannelSpec.amplifier(2.5), ChannelSpec.composite(0.5, 2.0)])
@pytest.mark.parametrize("p", [1.3, 2.0, 4.0])
def test_pp_thermal_limit(spec, p):
    closed = norm_pp(spec, p).value
    zs = 1 - np.logspace(-6, -0.05, 200)
    sup = max(gaussian_ratio(spec, p, p, float(z)) for z in zs)
    assert sup <= closed * (1 + 1e-6)
    assert gaussian_ratio(spec, p, p, 1 - 1e-4) == pytest.approx(closed, rel=1e-2)


def test_divergence_examples():
    d = divergence_diagnostic(ChannelSpec.attenuator(0.5), 3.0, 1.5, (1e-2, 1e-3, 1e-4))
    r = [v for _, v in d["pairs"]]
    assert r[2] > r[1] > r[0]
    assert d["predicted_slope"] == pytest.approx(-1 / 3)
    assert d["slope"] == pytest.approx(-1 / 3, rel=0.05)
    with pytest.raises(DomainError):
        divergence_diagnostic(ChannelSpec.attenuator(0.5), 2.0, 2.0)


def test_norm_dispatch():
    att = ChannelSpec.attenuator(0.6)
    assert norm(att, 2.0, 2.0).method == CLOSED_FORM
    inf = norm(att, 3.0, 1.5)
    assert inf.infinite and "divergence" in inf.residuals
    assert norm(att, 1.5, 2.5).value == pytest.approx(ATT_OPTIMA[0][4], rel=1e-13)
    ident = ChannelSpec.attenuator(1.0)
    assert norm(ident, 1.5, 2.0).value == 1.0
    assert norm(ident, 2.0, 1.5).infinite


def test_norm_by_shooting():
    r = norm_by_shooting(0.6, 1.5, 2.5)
    assert r.z_star == pytest.approx(ATT_OPTIMA[0][3], abs=1e-4)
    assert r.value == pytest.approx(ATT_OPTIMA[0][4], rel=1e-10)


def test_brute_force_identity():
    r = brute_force_ratio(ChannelSpec.attenuator(1.0), 2.0, 2.0, 6, n_starts=4)
    assert r.method == BRUTE_FORCE
    assert r.value == pytest.approx(1.0, rel=1e-12)


def test_brute_force_singleton():
    assert brute_force_ratio(ChannelSpec.attenuator(0.5), 1.5, 2.5, 0, n_starts=2).value == pytest.approx(1.0)


@pytest.mark.parametrize("spec,p,q", [
    (ChannelSpec.attenuator(0.6), 1.5, 2.5),
    (ChannelSpec.amplifier(2.0), 1.5, 2.5),
])
def test_brute_force_agrees_with_scan(spec, p, q):
    g = optimize_gaussian_z(spec, p, q)
    b = brute_force_ratio(spec, p, q, 24, seed=0)
    assert b.value <= g.value * (1 + 1e-5)
    assert b.value == pytest.approx(g.value, rel=1e-5)
    assert thermal_argmax_distance(b, g.z_star, p) <= 1e-4
    assert b.residuals["converged"]


@pytest.mark.parametrize("N", [4, 12, 32])
def test_brute_force_below_scan_small_N(N):
    spec = ChannelSpec.attenuator(0.4)
    g = optimize_gaussian_z(spec, 1.2, 2.0)
    b = brute_force_ratio(spec, 1.2, 2.0, N, seed=N, n_starts=8)
    assert b.value <= g.value * (1 + 1e-5)


def test_brute_force_domain():
    with pytest.raises(DomainError):
        brute_force_ratio(ChannelSpec.attenuator(0.5), 1.5, 2.5, 65)
    with pytest.raises(DomainError):
        brute_force_ratio(ChannelSpec.attenuator(0.5), 1.5, 2.5, 4, n_starts=0)


def test_chebyshev_grid():
    g = chebyshev_grid(1.5, 2.5)
    assert g.size == 33 and g[0] == pytest.approx(1.5) and g[-1] == pytest.approx(2.5)
    assert np.all(np.diff(g) > 0)


def test_composite_identities():
    p, q = 1.5, 2.5
    c1 = composite_bound(0.6, 1.0, p, q)
    assert c1["value"] == pytest.approx(optimize_gaussian_z(ChannelSpec.attenuator(0.6), p, q).value, rel=1e-12)
    c2 = composite_bound(1.0, 2.0, p, q)
    assert c2["value"] == pytest.approx(optimize_gaussian_z(ChannelSpec.amplifier(2.0), p, q).value, rel=1e-12)


def test_composite_bound_dominates_brute_force():
    c = composite_bound(0.7, 1.5, 1.5, 2.5)
    b = brute_force_ratio(ChannelSpec.composite(0.7, 1.5), 1.5, 2.5, 24)
    assert math.isfinite(c["value"])
    assert c["value"] >= b.value - 1e-6


def test_composite_domain():
    with pytest.raises(DomainError):
        composite_bound(0.5, 2.0, 2.5, 1.5)
    with pytest.raises(DomainError):
        composite_bound(0.5, 2.0, 1.5, 2.5, r_grid=[3.0, 4.0])
    pp = composite_bound(0.5, 2.0, 2.0, 2.0)
    assert pp["value"] == pytest.approx(norm_pp(ChannelSpec.composite(0.5, 2.0), 2.0).value)


@pytest.mark.parametrize("spec", [ChannelSpec.attenuator(0.3), ChannelSpec.amplifier(3.0)])
def test_thermal_image_norm_check(spec):
    assert thermal_image_norm_check(spec, 0.4, 2.0) <= 1e-12
