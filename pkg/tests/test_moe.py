import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussmax.channels import ChannelSpec, apply_channel
from gaussmax.errors import DomainError
from gaussmax.fock import make_thermal, renyi_entropy, shannon, thermal_entropy, von_neumann_entropy
from gaussmax.moe import (
    FAMILIES,
    MATCH_TOL,
    MatchedState,
    chain_terms,
    entropy_tail_bound,
    find_p_for_z,
    match_entropy_state,
    output_entropy_gap,
    output_entropy_terms,
    renyi_chain_check,
    thermal_matched_state,
    thermal_output_entropy,
    z_star_of_p,
)

CHAIN_P = 1.2023827815181743960  # mpmath: z_star(p) = 0.3 for kappa=2, q=1.3

CHANNELS = [ChannelSpec.attenuator(0.5), ChannelSpec.amplifier(2.0), ChannelSpec.composite(0.7, 1.5)]


@pytest.mark.parametrize("family", FAMILIES)
def test_match_extremes(family):
    pm = match_entropy_state(0.0, 8, family, seed=1).spectrum
    assert sorted(pm.tolist())[-1] == 1.0 and np.count_nonzero(pm) == 1
    u = match_entropy_state(math.log(8), 8, family, seed=1).spectrum
    assert np.allclose(u, 1 / 8)


@pytest.mark.parametrize("family", FAMILIES)
def test_match_target(family):
    st_ = match_entropy_state(1.0, 32, family, seed=7)
    assert abs(st_.achieved_entropy - 1.0) <= 1e-9
    assert abs(shannon(st_.spectrum) - 1.0) <= 1e-9
    assert st_.spectrum.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all(st_.spectrum >= 0)


@given(st.floats(0.0, 1.0), st.integers(2, 40), st.sampled_from(FAMILIES), st.integers(0, 2**32 - 1))
def test_match_property(frac, dim, family, seed):
    target = frac * math.log(dim)
    st_ = match_entropy_state(target, dim, family, seed)
    assert abs(von_neumann_entropy(st_.spectrum) - target) <= MATCH_TOL


def test_match_two_point_levels():
    x = match_entropy_state(1.2, 16, "two_point_mix", seed=5).spectrum
    assert len(set(np.round(x[x > 0], 15))) == 2


def test_match_errors():
    with pytest.raises(DomainError):
        match_entropy_state(math.log(4) + 0.1, 4)
    with pytest.raises(DomainError):
        match_entropy_state(-0.1, 4)
    with pytest.raises(DomainError):
        match_entropy_state(0.5, 4, family="dirichlet")
    with pytest.raises(DomainError):
        match_entropy_state(0.5, 0)


def test_match_deterministic():
    a = match_entropy_state(0.8, 20, "tempered_random", 11).spectrum
    b = match_entropy_state(0.8, 20, "tempered_random", 11).spectrum
    assert np.array_equal(a, b)


@pytest.mark.parametrize("spec", CHANNELS + [ChannelSpec.attenuator(0.3), ChannelSpec.amplifier(4.0)])
@pytest.mark.parametrize("z", [0.1, 0.3, 0.6])
def test_thermal_gap_zero(spec, z):
    assert abs(output_entropy_gap(spec, thermal_matched_state(z), z)) <= 1e-10


@pytest.mark.parametrize("spec", CHANNELS)
def test_gap_nonnegative_sample(spec):
    z = 0.3
    S = thermal_entropy(z)
    seeds = np.random.SeedSequence(9).generate_state(100)
    gaps = [output_entropy_gap(spec, match_entropy_state(S, 32, FAMILIES[i % 2], int(s)), z) for i, s in enumerate(seeds)]
    assert min(gaps) >= -1e-8


@given(st.floats(0.05, 0.7), st.integers(0, 10**6), st.sampled_from(FAMILIES), st.sampled_from(CHANNELS))
def test_gap_property(z, seed, family, spec):
    st_ = match_entropy_state(thermal_entropy(z), 32, family, seed)
    assert output_entropy_gap(spec, st_, z) >= -1e-8


def test_gap_entropy_mismatch():
    st_ = match_entropy_state(0.5, 16, seed=0)
    with pytest.raises(DomainError, match="does not match"):
        output_entropy_gap(ChannelSpec.amplifier(2.0), st_, 0.3)


def test_output_terms_tail_reported():
    t = output_entropy_terms(ChannelSpec.amplifier(2.0), thermal_matched_state(0.3), 0.3)
    assert t["tail_mass"] <= 1e-13
    assert 0.0 <= t["tail_entropy_bound"] <= 1e-10
    assert t["thermal_output_entropy"] == pytest.approx(thermal_output_entropy(ChannelSpec.amplifier(2.0), 0.3))


def test_entropy_tail_bound():
    assert entropy_tail_bound(0.0, 10) == 0.0
    assert entropy_tail_bound(0.5, 10) == pytest.approx(-0.5 * math.log(0.05))


def test_thermal_output_entropy_closed():
    # amplifier kappa=2 on vacuum gives the thermal state at z = 1/2
    assert thermal_output_entropy(ChannelSpec.amplifier(2.0), 0.0) == pytest.approx(2 * math.log(2), rel=1e-14)


@pytest.fixture(scope="module")
def chain():
    return renyi_chain_check(2.0, 0.3, 1.3, n_states=100, seed=0)


def test_chain_p_found(chain):
    assert chain.found
    assert 1.0 < chain.p_found < 1.3
    assert chain.candidates[0] == pytest.approx(CHAIN_P, abs=1e-8)
    assert abs(z_star_of_p(2.0, chain.candidates[0], 1.3) - 0.3) <= 1e-4


def test_chain_slack(chain):
    assert chain.slack >= -1e-7


def test_chain_thermal_equality():
    lhs, rhs = chain_terms(2.0, 0.3, CHAIN_P, 1.3, make_thermal(0.3))
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_chain_serializes(chain):
    d = chain.to_dict()
    assert set(d) == {"p_found", "lhs", "rhs", "slack", "candidates", "curve", "found"}
    assert len(d["curve"]) == 24


def test_chain_q_to_one():
    z, kappa = 0.3, 2.0
    rho = match_entropy_state(thermal_entropy(z), 32, "tempered_random", 3).spectrum
    amp = ChannelSpec.amplifier(kappa)
    s_rho = shannon(apply_channel(amp, rho))
    s_th = shannon(apply_channel(amp, make_thermal(z)))
    errs = []
    for q in (1.4, 1.2, 1.1, 1.05):
        (p,), _ = find_p_for_z(kappa, z, q)
        lhs, rhs = chain_terms(kappa, z, p, q, rho)
        errs.append((q - 1, abs(lhs - s_rho), abs(rhs - s_th)))
    # both sides approach the entropy statement at rate O(q - 1)
    for (d0, l0, r0), (d1, l1, r1) in zip(errs, errs[1:]):
        assert l1 < l0 and r1 < r0
    assert max(l / d for d, l, _ in errs) <= 1.0
    assert max(r / d for d, _, r in errs) <= 1.0


def test_chain_identity_amplifier():
    r = renyi_chain_check(1.0, 0.3, 1.3)
    assert not r.found and r.p_found is None


def test_chain_domain():
    with pytest.raises(DomainError):
        renyi_chain_check(2.0, 0.3, 1.6)
    with pytest.raises(DomainError):
        renyi_chain_check(0.5, 0.3, 1.3)
    with pytest.raises(DomainError):
        renyi_chain_check(2.0, 1.0, 1.3)


def test_renyi_limit_rate():
    x = match_entropy_state(1.5, 16, "tempered_random", 2).spectrum
    S = shannon(x)
    e1, e2 = abs(renyi_entropy(x, 1.01) - S), abs(renyi_entropy(x, 1.001) - S)
    assert e1 / e2 == pytest.approx(10, rel=0.05)


def test_matched_state_fields():
    m = thermal_matched_state(0.4)
    assert isinstance(m, MatchedState) and m.family == "thermal"
    assert m.target_entropy == thermal_entropy(0.4)
