import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gaussmax.errors import ConvergenceError, DomainError
from gaussmax.fock import entropy_to_z, make_thermal, thermal_entropy
from gaussmax.norms import optimize_gaussian_z
from gaussmax.channels import ChannelSpec
from gaussmax.sobolev import (
    F_a,
    F_a_fd_check,
    S_a,
    SobolevPoint,
    dlnnorm_da_check,
    h,
    logsobolev_margin,
    mu,
    mu_upper_bound,
    normalize_admissible,
    nu,
    ode_shoot,
    script_F,
    thermal_admissible,
    thermal_reference,
)

# mpmath, 30 digits
MU_QUARTER_HALF = -0.40575798025002095832
MU_07_HALF = -0.090118068816122005336
Z0_SHOOT = 0.17954139817381127835  # scan maximizer at lambda=0.6, p=1.5, q=2.5

unit = st.floats(0.01, 0.99)
raw = arrays(np.float64, st.integers(1, 64), elements=st.floats(0.0, 1.0)).filter(lambda x: x.max() > 1e-3)


def test_mu_examples():
    assert mu(1.0, 0.5) == 0.0
    assert mu(0.5, 0.5) < 0
    assert mu(0.25, 0.5) == pytest.approx(MU_QUARTER_HALF, rel=1e-14)
    assert mu(0.25, 0.5) == pytest.approx(1.125 / math.log(0.0625), rel=1e-14)


def test_mu_vector_matches_scalar():
    z, a = np.meshgrid(np.linspace(0.01, 0.99, 13), np.linspace(0.01, 0.99, 11))
    vec = mu(z, a)
    scal = np.vectorize(lambda u, b: mu(float(u), float(b)))(z, a)
    assert np.allclose(vec, scal, rtol=1e-12, atol=0)


def test_mu_negative_grid():
    z, a = np.meshgrid(np.linspace(0.0, 1.0, 52)[1:-1], np.linspace(0.0, 1.0, 52)[1:-1])
    assert np.all(mu(z, a) < 0)


def test_mu_continuous_at_one():
    # the series branch must join the closed form smoothly
    for a in (0.2, 0.5, 0.8):
        zs = 1.0 - np.logspace(-12, -1, 40)
        vals = mu(zs, a)
        assert np.all(vals < 0)
        # z decreases along the grid
        assert np.all(np.diff(vals) < 0)
        assert abs(vals[0]) < 1e-10


@given(unit, unit)
def test_mu_below_crude_bound(z, a):
    m, phi = mu(z, a), mu_upper_bound(z, a)
    assert m <= phi + 1e-12 * abs(phi)


def test_nu_examples():
    assert nu(0.3, 0.4) < 0
    assert nu(0.49, 0.5) == pytest.approx(MU_07_HALF, rel=1e-14)
    assert nu(0.49, 0.5) == pytest.approx(mu(0.7, 0.5), rel=1e-15)
    assert h(1.0 - 1e-12, 0.5) == pytest.approx(0.0, abs=1e-11)


@pytest.mark.parametrize("a", [0.2, 0.5, 0.8])
def test_nu_increasing(a):
    s = np.linspace(0.0, 1.0, 1002)[1:-1]
    assert np.all(np.diff(nu(s, a)) > 0)


def test_F_a_examples():
    assert F_a([1.0, 0.0, 0.0], 0.5) == 0.0
    x0, x1 = math.cos(0.4), math.sin(0.4)
    assert F_a([x0, x1], 0.5) == pytest.approx(x1 * x0 - x1**2, rel=1e-14)


def test_F_a_rejects_unnormalized():
    with pytest.raises(DomainError, match="measured"):
        F_a([1.0, 1.0], 0.5)
    with pytest.raises(DomainError):
        F_a([1.0], 1.0)


@given(raw, unit)
def test_F_a_bounded(x, a):
    assert F_a(normalize_admissible(x, a), a) <= 1 - a + 1e-9


def test_F_a_bounded_batch():
    rng = np.random.default_rng(0)
    for _ in range(2000):
        a = rng.uniform(0.02, 0.98)
        x = normalize_admissible(rng.uniform(size=rng.integers(1, 65)) ** rng.uniform(0.2, 6), a)
        assert F_a(x, a) <= 1 - a + 1e-9


def test_S_a_examples():
    assert S_a([1.0, 0.0], 0.5) == 0.0
    assert S_a([2**-0.5, 2**-0.5], 0.5) == pytest.approx(math.log(2), rel=1e-15)


@pytest.mark.parametrize("z,a", [(0.25, 0.5), (0.6, 0.3), (0.9, 0.7)])
def test_S_a_thermal(z, a):
    x = thermal_admissible(SobolevPoint(z, a))
    assert S_a(x, a) == pytest.approx(thermal_entropy(z ** (1 / a)), abs=1e-12)


def test_script_F_vacuum():
    assert script_F(SobolevPoint(0.3, 0.5), [1.0, 0.0]) == 0.0


@pytest.mark.parametrize("z,a", [(0.25, 0.5), (0.5, 0.5), (0.6, 0.3), (0.8, 0.9), (0.1, 0.1)])
def test_thermal_reference_matches_truncated(z, a):
    pt = SobolevPoint(z, a)
    xi = pt.xi
    closed = xi * h(xi, a) / (1 - xi) + nu(xi, a) * thermal_entropy(xi)
    assert thermal_reference(pt) == pytest.approx(closed, rel=1e-12, abs=1e-15)
    assert abs(logsobolev_margin(pt, thermal_admissible(pt))) <= 1e-10


def test_margin_vacuum_equals_reference():
    pt = SobolevPoint(0.4, 0.6)
    assert logsobolev_margin(pt, [1.0, 0.0, 0.0]) == thermal_reference(pt)
    assert thermal_reference(pt) >= 0


def test_margin_batch():
    rng = np.random.default_rng(1)
    worst = math.inf
    for _ in range(2000):
        pt = SobolevPoint(rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99))
        x = normalize_admissible(rng.uniform(size=rng.integers(1, 33)) ** rng.uniform(0.2, 6), pt.a)
        worst = min(worst, logsobolev_margin(pt, x))
    assert worst >= -1e-9


@given(raw, unit, unit)
def test_margin_nonnegative(x, z, a):
    assert logsobolev_margin(SobolevPoint(z, a), normalize_admissible(x, a)) >= -1e-9


@given(raw, unit)
def test_matched_entropy_thermal_dominates(x, a):
    x = normalize_admissible(x, a)
    s = S_a(x, a)
    assume(1e-6 < s < 20)
    xi = entropy_to_z(s)
    # F_a of the infinite thermal state at exponent 1/a, whose p-vector is omega_xi
    f_thermal = (xi**a - xi) / (1 - xi)
    assert F_a(x, a) <= f_thermal + 1e-9


def test_thermal_F_a_closed_form():
    a, xi = 0.4, 0.3
    x = thermal_admissible(SobolevPoint(xi**a, a))
    assert F_a(x, a) == pytest.approx((xi**a - xi) / (1 - xi), rel=1e-12)


def test_fd_check_examples():
    assert F_a_fd_check([1.0], 0.3) == 0.0
    assert F_a_fd_check(thermal_admissible(SobolevPoint(0.3, 0.5)), 0.5, 1e-5) <= 1e-8
    rng = np.random.default_rng(2)
    x = normalize_admissible(rng.uniform(0.05, 1.0, 16), 0.5)
    assert F_a_fd_check(x, 0.5) <= 1e-7
    with pytest.raises(DomainError):
        F_a_fd_check([1.0], 0.5, dt=1e-2)


# entries bounded away from zero so that the backward step stays positive;
# at a zero crossing |x|^(1/a) is not smooth and the order drops
@given(arrays(np.float64, st.integers(2, 16), elements=st.floats(0.05, 1.0)), st.floats(0.1, 0.9))
def test_fd_residual_second_order(x, a):
    x = normalize_admissible(x, a)
    r1 = F_a_fd_check(x, a, 1e-3)
    r2 = F_a_fd_check(x, a, 5e-4)
    # below this the difference quotient is dominated by rounding, not truncation
    assume(r1 > 1e-8)
    assert 2.0 <= r1 / r2 <= 8.0


def test_dlnnorm_da_examples():
    assert dlnnorm_da_check([3.0], 0.5) <= 1e-10
    # ||(1,1)||_{1/a} = 2^a, derivative ln 2 = S_a
    assert dlnnorm_da_check([1.0, 1.0], 0.4) <= 1e-9
    rng = np.random.default_rng(4)
    assert dlnnorm_da_check(rng.uniform(0.01, 1.0, 8), 0.5, 1e-5) <= 1e-7
    with pytest.raises(DomainError):
        dlnnorm_da_check([1.0], 0.99, 0.02)


def test_shoot_matches_scan():
    r = ode_shoot(0.6, 1.5, 2.5)
    assert r.converged
    assert r.z0 == pytest.approx(Z0_SHOOT, abs=1e-8)
    scan = optimize_gaussian_z(ChannelSpec.attenuator(0.6), 1.5, 2.5).z_star
    assert abs(r.z0 - scan) <= 1e-4
    assert r.residual <= 1e-10


def test_shoot_trajectory_shape():
    r = ode_shoot(0.5, 1.2, 2.0)
    t, a, z = r.trajectory.T
    assert a[0] == pytest.approx(1 / 1.2, rel=1e-15)
    assert a[-1] == pytest.approx(1 / 2.0, abs=1e-9)
    assert t[-1] == pytest.approx(math.log(2), rel=1e-14)
    assert np.all(np.diff(a) < 0)
    assert np.all(np.diff(z) <= 0)
    assert r.monotone
    d = r.to_dict()
    assert d["lambda"] == 0.5 and len(d["trajectory"]) == len(t)


def test_shoot_domain_errors():
    with pytest.raises(DomainError):
        ode_shoot(1.0, 1.5, 2.5)
    with pytest.raises(DomainError):
        ode_shoot(0.5, 2.5, 1.5)
    with pytest.raises(DomainError):
        ode_shoot(0.5, 1.5, 2.5, tol=0.0)


def test_shoot_no_bracket_dumps_curve():
    # lambda near 1 cannot move a from 1/p to a far smaller 1/q
    with pytest.raises(ConvergenceError) as exc:
        ode_shoot(0.999, 1.01, 50.0, n_scan=9)
    assert exc.value.payload.shape == (9, 2)


def test_sobolev_point_validation():
    with pytest.raises(DomainError):
        SobolevPoint(1.0, 0.5)
    with pytest.raises(DomainError):
        SobolevPoint(0.5, 0.0)
    assert SobolevPoint(0.25, 0.5).xi == pytest.approx(0.0625)


def test_thermal_admissible_normalized():
    x = thermal_admissible(SobolevPoint(0.7, 0.3))
    assert np.sum(x ** (1 / 0.3)) == pytest.approx(1.0, abs=1e-13)
    assert np.all(np.diff(x) <= 0)
    assert x.size == make_thermal(0.7 ** (1 / 0.3)).size
