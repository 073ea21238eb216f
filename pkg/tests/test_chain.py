import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pendula_lab import (ChainConfig, ChainState, DimensionalParams, ExcitationConfig, chain_rhs, equilibrium_angle,
                         morse_derivative, morse_potential, time_unit_ps, total_energy)
from pendula_lab.chain import potential_energy

angles = st.floats(-20, 20, allow_nan=False)


def _mp_morse(theta, a=7, d0=mp.mpf("0.3")):
    return (mp.exp(-a * (1 + mp.cos(theta) - d0)) - 1) ** 2


def test_morse_at_equilibrium_and_saddle(cfg):
    te = equilibrium_angle(cfg)
    assert morse_potential(te, cfg) == pytest.approx(0.0, abs=1e-15)
    assert abs(morse_potential(2.346, cfg)) < 1e-6
    # exact oracle (1 - e^{-11.9})^2
    assert morse_potential(0.0, cfg) == pytest.approx(float(_mp_morse(0)), rel=1e-14)
    assert morse_potential(0.0, cfg) == pytest.approx(0.9999864, abs=1e-7)


@given(angles)
def test_morse_even_bitwise(theta):
    cfg = ChainConfig()
    assert morse_potential(-theta, cfg) == morse_potential(theta, cfg)
    assert morse_potential(theta, cfg) >= 0


@given(st.floats(-6, 6))
def test_morse_derivative_matches_mpmath(theta):
    cfg = ChainConfig()
    ref = float(mp.diff(_mp_morse, mp.mpf(theta)))
    assert morse_derivative(theta, cfg) == pytest.approx(ref, rel=1e-10, abs=1e-13)


def test_equilibrium_angle_values():
    assert equilibrium_angle(ChainConfig()) == pytest.approx(2.3462, abs=1e-4)
    assert equilibrium_angle(ChainConfig(d0=1.0)) == pytest.approx(math.pi / 2, abs=1e-15)
    cfg = ChainConfig()
    assert abs(morse_derivative(equilibrium_angle(cfg), cfg)) < 1e-12
    with pytest.raises(ValueError):
        ChainConfig(d0=2.5)


def test_equilibrium_angle_at_d0_two():
    # d0 = 2 is outside the open config domain but the formula itself is total on [0, 2]
    cfg = ChainConfig()
    object.__setattr__(cfg, "d0", 2.0)
    assert equilibrium_angle(cfg) == 0.0


def test_total_energy_examples(cfg):
    te = equilibrium_angle(cfg)
    zero = np.zeros(30)
    assert total_energy(ChainState(np.full(30, te), zero), cfg) == pytest.approx(0.0, abs=1e-15)
    assert total_energy(ChainState(zero, zero), cfg) == pytest.approx(0.021428, abs=1e-6)
    # a pendulum at pi with no coupling contribution: eps (e^{a d0} - 1)^2 each
    two = ChainConfig(n=2)
    e = total_energy(ChainState(np.full(2, math.pi), np.zeros(2)), two)
    assert e / 2 == pytest.approx(0.03669, abs=1e-5)
    assert e / 2 == pytest.approx(two.epsilon * math.expm1(two.a * two.d0) ** 2, rel=1e-14)
    with pytest.raises(ValueError):
        total_energy(ChainState(np.zeros(3), np.zeros(3)), cfg)


def test_equilibria_are_critical(cfg):
    te = equilibrium_angle(cfg)
    for th in (np.full(30, te), np.zeros(30), np.full(30, -te)):
        dth, dp = chain_rhs(ChainState(th, np.zeros(30)), cfg)
        assert np.max(np.abs(dth)) == 0
        assert np.max(np.abs(dp)) < 1e-15


def test_force_is_negative_gradient(cfg, rng):
    h = 1e-6
    for _ in range(100):
        th = rng.uniform(-3, 3, 30)
        p = rng.normal(size=30)
        _, dp = chain_rhs(ChainState(th, p), cfg)
        grad = np.empty(30)
        for k in range(30):
            e = np.zeros(30)
            e[k] = h
            grad[k] = (potential_energy(th + e, cfg) - potential_energy(th - e, cfg)) / (2 * h)
        assert np.max(np.abs(dp + grad)) <= 1e-6 * np.max(np.abs(grad))


@settings(max_examples=50)
@given(st.integers(0, 29), st.integers(0, 2**32 - 1))
def test_energy_cyclic_and_flip_invariance(shift, seed):
    cfg = ChainConfig()
    r = np.random.default_rng(seed)
    th, p = r.uniform(-4, 4, 30), r.normal(size=30)
    e0 = total_energy(ChainState(th, p), cfg)
    assert total_energy(ChainState(np.roll(th, shift), np.roll(p, shift)), cfg) == pytest.approx(e0, rel=1e-12)
    assert total_energy(ChainState(-th, -p), cfg) == pytest.approx(e0, rel=1e-12)


def test_unforced_excitation_is_conservative(cfg, rng):
    exc = ExcitationConfig.from_detuning(cfg, 6, 0.0, 0.0, 0.3)
    st_ = ChainState(rng.uniform(-3, 3, 30), rng.normal(size=30), t=12.5)
    a, b = chain_rhs(st_, cfg), chain_rhs(st_, cfg, exc)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_forcing_terms(cfg, rng):
    exc = ExcitationConfig.from_detuning(cfg, 6, 2.5, 0.4, 0.0)
    s = ChainState(rng.uniform(-3, 3, 30), rng.normal(size=30), t=0.7)
    _, dp0 = chain_rhs(s, cfg)
    _, dp = chain_rhs(s, cfg, exc)
    extra = cfg.epsilon * (2.5 * math.cos(exc.Omega * 0.7) * s.theta - 0.4 * s.p)
    assert np.allclose(dp - dp0, extra, rtol=1e-12, atol=1e-15)


def test_time_unit():
    dim = DimensionalParams()
    cfg = ChainConfig.from_dimensional(dim)
    assert cfg.epsilon == pytest.approx(1 / 1400, rel=1e-12)
    assert time_unit_ps(cfg) == pytest.approx(0.272, abs=5e-4)
    t4s = time_unit_ps(ChainConfig.from_dimensional(DimensionalParams(S=168.0, D=1.68)))
    t4m = time_unit_ps(ChainConfig.from_dimensional(DimensionalParams(m=1200.0)))
    assert t4s == pytest.approx(time_unit_ps(cfg) / 2, rel=1e-12)
    assert t4m == pytest.approx(time_unit_ps(cfg) * 2, rel=1e-12)
    with pytest.raises(ValueError):
        time_unit_ps(ChainConfig())


def test_inconsistent_dimensional_record():
    with pytest.raises(ValueError):
        ChainConfig(epsilon=1e-3, dimensional=DimensionalParams())


def test_sigma_omega_consistency(cfg):
    exc = ExcitationConfig.from_detuning(cfg, 6, 2.5, 0.4, 1.3)
    back = ExcitationConfig.from_frequency(cfg, 6, 2.5, 0.4, exc.Omega)
    assert back.sigma == pytest.approx(1.3, rel=1e-9)
    assert exc.retuned(0.0).Omega == pytest.approx(2 * exc.omega_gamma, rel=1e-15)
    with pytest.raises(ValueError):
        ExcitationConfig(2.5, 2.0, 0.4, 6, 5.0, exc.omega_gamma, cfg.epsilon)
