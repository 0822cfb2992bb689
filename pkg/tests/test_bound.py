import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from abcone.bound import (ExtensionParam, Method, Provenance, bound_wavefunction, energy_bg, energy_ks,
                          energy_ks_oracle, extension_param, matching_residual)
from abcone.channel import ChannelParams, coupling_ratio, effective_channel
from abcone.errors import BracketError, DomainError, NoBoundState
from abcone.specfun import gamma_ratio_sym
from abcone.verify import draw_bound_channels

WORKED = ChannelParams(1.0, -1.5, 1, 1)


def test_worked_energy_ks():
    st_ = energy_ks(1.0, 1.0, WORKED)
    assert st_.energy == pytest.approx(-0.125, rel=1e-15)
    assert st_.method is Method.KS_CLOSED_FORM
    assert st_.channel.nu == 0.5


def test_worked_lambda():
    ext = extension_param(1.0, WORKED)
    assert ext.lam == pytest.approx(-2.0, rel=1e-15)
    assert ext.provenance is Provenance.PHYSICAL
    assert ext.coupling_ratio == pytest.approx(0.5)


def test_worked_bg_and_oracle():
    assert energy_bg(1.0, extension_param(1.0, WORKED)).energy == pytest.approx(-0.125, rel=1e-14)
    assert energy_ks_oracle(1.0, 1.0, WORKED).energy == pytest.approx(-0.125, abs=1e-11)


def test_bg_hand_value():
    assert energy_bg(1.0, ExtensionParam.user(-1.0, 0.5)).energy == pytest.approx(-0.5, rel=1e-15)


def test_bg_requires_negative_lambda():
    with pytest.raises(NoBoundState):
        energy_bg(1.0, ExtensionParam.user(0.5, 0.5))
    with pytest.raises(NoBoundState):
        energy_bg(1.0, ExtensionParam.dirichlet(0.5))
    with pytest.raises(NoBoundState):
        energy_bg(1.0, ExtensionParam.at_infinity(0.5))


def test_bg_limits():
    small = energy_bg(1.0, ExtensionParam.user(-1e-6, 0.4)).energy
    big = energy_bg(1.0, ExtensionParam.user(-1e6, 0.4)).energy
    assert small < -1e10 and -1e-10 < big < 0


def test_no_bound_state_repulsive():
    with pytest.raises(NoBoundState):
        energy_ks(1.0, 1.0, ChannelParams(1.0, 0.5, 1, 0))


def test_extension_param_regular_channel():
    with pytest.raises(DomainError):
        extension_param(1.0, ChannelParams(1.0, 0.0, 1, 2))


def test_extension_param_validation():
    with pytest.raises(DomainError):
        ExtensionParam.user(1.0, 1.5)
    with pytest.raises(DomainError):
        ExtensionParam.user(math.inf, 0.5)


def test_r0_scaling_of_lambda():
    p = ChannelParams(0.8, -2.3, 1, 2)
    nu = effective_channel(p).nu
    base = extension_param(1.0, p).lam
    for r0 in (1e-3, 0.2, 7.0):
        assert extension_param(r0, p).lam == pytest.approx(base * r0 ** (2 * nu), rel=1e-14)


def test_scaling_law():
    vals = [energy_ks(M, r0, WORKED).energy * M * r0 ** 2
            for M in (0.5, 1.0, 2.0, 10.0) for r0 in (1e-3, 1e-1, 1.0)]
    assert max(vals) - min(vals) <= 4 * np.finfo(float).eps * 0.125


def test_against_mpmath_closed_form():
    for p, M, r0 in draw_bound_channels(20, seed=11):
        ch = effective_channel(p)
        nu = mp.mpf(ch.nu)
        r = mp.mpf(coupling_ratio(p))
        ref = -2 / (mp.mpf(M) * mp.mpf(r0) ** 2) * (r * mp.gamma(1 + nu) / mp.gamma(1 - nu)) ** (1 / nu)
        assert energy_ks(M, r0, p).energy == pytest.approx(float(ref), rel=1e-11)


def test_bridge_random():
    for p, M, r0 in draw_bound_channels(200, seed=21):
        assert energy_bg(M, extension_param(r0, p)).energy == pytest.approx(
            energy_ks(M, r0, p).energy, rel=1e-13)


def test_bound_implies_negative_lambda():
    for p, _, r0 in draw_bound_channels(100, seed=22):
        assert extension_param(r0, p).lam < 0


def test_oracle_random():
    for p, M, r0 in draw_bound_channels(30, seed=23):
        assert energy_ks_oracle(M, r0, p).energy == pytest.approx(energy_ks(M, r0, p).energy, rel=1e-9)


def test_oracle_root_is_a_zero_of_the_residual():
    p, M, r0 = draw_bound_channels(1, seed=24)[0]
    e = energy_ks_oracle(M, r0, p).energy
    assert abs(matching_residual(e, M, r0, p)) < 1e-8


def test_oracle_invalid_region():
    # coupling ratio negative: no real energy solves the matching relation
    p = ChannelParams(1.0, 0.3, 1, -1)
    assert coupling_ratio(p) < 0
    with pytest.raises(BracketError):
        energy_ks_oracle(1.0, 1.0, p)


def test_realness_gate():
    for p, _, _ in draw_bound_channels(50, seed=25):
        nu = effective_channel(p).nu
        assert coupling_ratio(p) * gamma_ratio_sym(nu) > 0
    with pytest.raises(NoBoundState):
        energy_ks(1.0, 1.0, ChannelParams(1.0, 0.3, 1, -1))


@pytest.mark.parametrize("p", [WORKED, ChannelParams(0.9, -1.0, 1, 1), ChannelParams(0.7, -1.8, 1, 1)])
def test_wavefunction_normalised_and_decaying(p):
    state = energy_ks(1.0, 1.0, p)
    wf = bound_wavefunction(state, 1.0)
    kappa = math.sqrt(-2 * state.energy)
    f = lambda r: wf(r) ** 2 * r
    total = sum(integrate.quad(f, a, b, epsabs=0, epsrel=1e-12, limit=200)[0]
                for a, b in ((0, 1 / kappa), (1 / kappa, 60 / kappa)))
    assert total == pytest.approx(1.0, abs=1e-8)
    rs = np.geomspace(0.01, 20, 60) / kappa
    vals = [wf(float(r)) for r in rs]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_wavefunction_k_half_closed_form_normalisation():
    # int x K_nu(x)^2 dx = pi nu / (2 sin pi nu)
    state = energy_ks(1.0, 1.0, WORKED)
    wf = bound_wavefunction(state, 1.0)
    kappa = math.sqrt(-2 * state.energy)
    assert wf.norm == pytest.approx(kappa / math.sqrt(math.pi * 0.5 / (2 * math.sin(math.pi * 0.5))),
                                    rel=1e-10)


def test_wavefunction_rejects_positive_energy():
    state = energy_ks(1.0, 1.0, WORKED)
    bad = type(state)(state.channel, 0.3, state.method)
    with pytest.raises(DomainError):
        bound_wavefunction(bad, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=-10, max_value=-0.01), st.floats(min_value=0.05, max_value=0.95),
       st.floats(min_value=0.1, max_value=10))
def test_bg_monotone_in_lambda(lam, nu, M):
    e1 = energy_bg(M, ExtensionParam.user(lam, nu)).energy
    e2 = energy_bg(M, ExtensionParam.user(lam * 1.5, nu)).energy
    assert e1 < e2 < 0


@pytest.mark.parametrize("p", [ChannelParams(0.9, -1.0, 1, 1), ChannelParams(0.7, -1.8, 1, 1)])
def test_wavefunction_norm_closed_form(p):
    state = energy_ks(1.0, 1.0, p)
    nu = state.channel.nu
    kappa = math.sqrt(-2 * state.energy)
    expected = kappa / math.sqrt(math.pi * nu / (2 * math.sin(math.pi * nu)))
    assert bound_wavefunction(state, 1.0).norm == pytest.approx(expected, rel=1e-9)
