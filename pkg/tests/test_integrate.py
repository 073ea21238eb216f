import math

import numpy as np
import pytest

from pendula_lab import (IntegrationError, ModalSystem, SaturationError, Trajectory, detect_division, division_time,
                         integrate, min_activation_energy_numeric)
from pendula_lab.chain import morse_potential
from pendula_lab.modal import activation_state

E_MIN_6 = 1.2026  # full-model threshold of mode 6 at horizon 3000, bisection tol 1e-3


def chain_energy(traj, basis, cfg):
    """Total energy along a full modal trajectory, vectorized."""
    n = basis.n
    q, p = traj.states[:, :n], traj.states[:, n:]
    harmonic = 0.5 * p**2 + 0.5 * (basis.omega * q) ** 2
    theta = q @ basis.T.T
    return harmonic.sum(axis=1) + cfg.epsilon * morse_potential(theta, cfg).sum(axis=1)


def _oscillator(t, y):
    return np.array([y[1], -y[0]])


@pytest.mark.parametrize("method", ["rk4", "kdk"])
def test_harmonic_period(method):
    tr = integrate(_oscillator, [1.0, 0.0], 0.01, 2 * math.pi, method=method)
    assert tr.times[-1] == pytest.approx(2 * math.pi, rel=1e-14)
    assert np.max(np.abs(tr.states[-1] - [1.0, 0.0])) < 1e-4


def test_zero_field_is_constant():
    tr = integrate(lambda t, y: np.zeros(3), [1.0, -2.0, 3.0], 0.1, 5.0)
    assert np.all(tr.states == [1.0, -2.0, 3.0])


def test_sampling_and_metadata(cfg, basis):
    init = activation_state(cfg, basis, 6, 1.0)
    tr = integrate(ModalSystem(cfg, basis), np.concatenate([init.q, init.p]), 0.01, 10.0, sample_stride=7)
    steps = np.diff(tr.times)
    assert np.all(steps > 0) and np.allclose(steps, 0.07, rtol=1e-12)
    assert tr.meta["scheme"] == "split4" and tr.meta["fidelity"] == "full"
    assert tr.component("q0")[0] == init.q[0]
    with pytest.raises(ValueError):
        integrate(ModalSystem(cfg, basis), np.zeros(4), 0.01, 1.0)
    with pytest.raises(ValueError):
        integrate(_oscillator, [1.0, 0.0], 0.1, 0.01)


def test_non_finite_state_reports_step():
    with pytest.raises(IntegrationError) as err, np.errstate(over="ignore", invalid="ignore"):
        integrate(lambda t, y: y * y, [1.0], 0.01, 5.0)
    assert err.value.step is not None and 90 < err.value.step < 200


def test_energy_conservation(cfg, basis):
    init = activation_state(cfg, basis, 6, 1.221)
    tr = integrate(ModalSystem(cfg, basis), np.concatenate([init.q, init.p]), 0.01, 3000, sample_stride=10)
    E = chain_energy(tr, basis, cfg)
    assert E[0] == pytest.approx(1.221, rel=1e-14)
    assert np.max(np.abs(E - E[0])) / E[0] <= 1e-6


@pytest.mark.parametrize("method", ["split", "split4"])
def test_energy_error_is_not_secular(cfg, basis, method):
    init = activation_state(cfg, basis, 6, 1.221)
    y0 = np.concatenate([init.q, init.p])
    tr = integrate(ModalSystem(cfg, basis), y0, 0.01, 3000, sample_stride=10, method=method)
    E = chain_energy(tr, basis, cfg)
    half = np.max(np.abs(E[: E.size // 2 + 1] - E[0]))
    full = np.max(np.abs(E - E[0]))
    # linear growth would double the error; bounded oscillation keeps it flat
    assert full < 1.5 * half


def test_detect_division_linear():
    t = np.arange(0, 3.01, 0.5)
    tr = Trajectory(t, (-1 + t)[:, None], {"labels": ["q0"]})
    assert detect_division(tr, 0, -1) == pytest.approx(1.0, abs=1e-15)
    flat = Trajectory(t, np.full((t.size, 1), -12.85))
    assert detect_division(flat, 0, -1) is None
    with pytest.raises(IndexError):
        detect_division(tr, 3, -1)


def test_division_examples(cfg, basis):
    r = division_time(cfg, basis, 6, 1.221)
    assert r.divided and 0 < r.division_time <= 3000
    assert not division_time(cfg, basis, 6, 0.5).divided
    assert not division_time(cfg, basis, 6, 0.0).divided
    with pytest.raises(ValueError):
        division_time(cfg, basis, 0, 1.0)
    with pytest.raises(ValueError):
        division_time(cfg, basis, 6, -1.0)


def test_division_is_deterministic(cfg, basis):
    a = division_time(cfg, basis, 6, 1.3)
    b = division_time(cfg, basis, 6, 1.3)
    assert a.division_time == b.division_time
    init = activation_state(cfg, basis, 6, 1.3)
    y0 = np.concatenate([init.q, init.p])
    t1 = integrate(ModalSystem(cfg, basis), y0, 0.01, 200, 5)
    t2 = integrate(ModalSystem(cfg, basis), y0, 0.01, 200, 5)
    assert np.array_equal(t1.states, t2.states)


def test_step_halving(cfg, basis):
    e = 1.1 * E_MIN_6
    a = division_time(cfg, basis, 6, e, dt=0.01).division_time
    b = division_time(cfg, basis, 6, e, dt=0.005).division_time
    assert abs(a - b) <= 0.01


def test_full_vs_two_mode_division_time(cfg, basis):
    for e in (1.1 * E_MIN_6, 1.5 * E_MIN_6, 3.0):
        full = division_time(cfg, basis, 6, e, fidelity="full").division_time
        two = division_time(cfg, basis, 6, e, fidelity="two-mode").division_time
        assert abs(full - two) / full < 0.05


def test_two_mode_threshold_mode6(cfg, basis):
    e = min_activation_energy_numeric(cfg, basis, 6, fidelity="two-mode")
    assert e == pytest.approx(1.205, rel=0.02)


def test_saturation(cfg, basis):
    with pytest.raises(SaturationError):
        min_activation_energy_numeric(cfg, basis, 6, horizon=1.0, fidelity="two-mode")
    with pytest.raises(ValueError):
        min_activation_energy_numeric(cfg, basis, 6, tol=0.0)
