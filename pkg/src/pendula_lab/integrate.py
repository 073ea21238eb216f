"""Fixed-step time integration, division detection and numeric activation thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .chain import ChainConfig, ExcitationConfig, morse_derivative
from .errors import IntegrationError, SaturationError
from .modal import BathInitialConditions, ModalBasis, ModalState, activation_state, bath_frozen_rhs

__all__ = [
    "Trajectory",
    "DivisionResult",
    "ModalSystem",
    "BathFrozenSystem",
    "integrate",
    "detect_division",
    "division_time",
    "division_time_from_state",
    "min_activation_energy_numeric",
]


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    meta: dict = field(default_factory=dict)

    def component(self, label: str) -> np.ndarray:
        return self.states[:, self.meta["labels"].index(label)]


@dataclass(frozen=True)
class DivisionResult:
    activation_energy: float
    division_time: float | None

    @property
    def divided(self) -> bool:
        return self.division_time is not None


@dataclass(frozen=True)
class ModalSystem:
    """Chain dynamics in modal coordinates, restricted to ``modes``.

    State vector layout is ``[q_modes..., p_modes...]``.  With all ``n`` modes
    this is the full chain (an orthogonal change of variables); with a subset
    it is the corresponding truncation.  Forcing in modal form is
    ``eps f q_a cos(Omega t) - eps mu p_a``.
    """

    cfg: ChainConfig
    basis: ModalBasis
    modes: tuple | None = None
    exc: ExcitationConfig | None = None

    def __post_init__(self):
        modes = tuple(range(self.basis.n)) if self.modes is None else tuple(int(m) for m in self.modes)
        if modes[0] != 0:
            raise ValueError("mode set must start with the reactive mode 0")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "_T", np.ascontiguousarray(self.basis.T[:, list(modes)]))
        object.__setattr__(self, "_om", np.ascontiguousarray(self.basis.omega[list(modes)]))

    @property
    def size(self) -> int:
        return len(self.modes)

    @property
    def fidelity(self) -> str:
        return "full" if self.size == self.basis.n else "reduced"

    @property
    def labels(self) -> list:
        return [f"q{m}" for m in self.modes] + [f"p{m}" for m in self.modes]

    def __call__(self, t, y):
        y = np.asarray(y, dtype=float)
        m = self.size
        q, p = y[:m], y[m:]
        eps = self.cfg.epsilon
        dp = -self._om**2 * q - eps * (self._T.T @ morse_derivative(self._T @ q, self.cfg))
        if self.exc is not None:
            dp = dp + eps * (self.exc.f * math.cos(self.exc.Omega * t) * q - self.exc.mu * p)
        return np.concatenate([p, dp])


@dataclass(frozen=True)
class BathFrozenSystem:
    """Reactive mode ``(Q0, P0)`` driven by frozen linear bath solutions."""

    cfg: ChainConfig
    basis: ModalBasis
    bath: BathInitialConditions

    def __post_init__(self):
        if self.bath.A.shape[0] != self.basis.n - 1:
            raise ValueError(f"bath arrays must have length n-1 = {self.basis.n - 1}")

    labels = ["Q0", "P0"]

    def __call__(self, t, y):
        return np.array(bath_frozen_rhs(self.basis, self.cfg, self.bath, y[0], y[1], t))


def _n_steps(dt: float, horizon: float) -> int:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if horizon < dt:
        raise ValueError("horizon must be at least one step")
    return int(round(horizon / dt))


def _fit_steps(dt: float, horizon: float):
    # whole number of steps landing exactly on the horizon; dt shrinks slightly if needed
    n = _n_steps(dt, horizon)
    if abs(n * dt - horizon) <= 1e-9 * horizon:
        return n, dt
    n = math.ceil(horizon / dt)
    return n, horizon / n


def _check(status: int, dt: float):
    if status >= 0:
        raise IntegrationError(f"non-finite state at step {status} (t={status * dt:g})", step=status)


def _rk4_step(rhs, t, y, dt):
    k1 = np.asarray(rhs(t, y), dtype=float)
    k2 = np.asarray(rhs(t + 0.5 * dt, y + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(rhs(t + 0.5 * dt, y + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(rhs(t + dt, y + dt * k3), dtype=float)
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _generic(rhs, y0, dt, nsteps, stride, method, t0):
    y = np.array(y0, dtype=float)
    out = np.empty((nsteps // stride + 1, y.size))
    out[0] = y
    row = 0
    if method == "kdk":
        if y.size % 2:
            raise ValueError("kick-drift-kick needs a state of the form [q, p]")
        m = y.size // 2
        acc = np.asarray(rhs(t0, y), dtype=float)[m:]
    for step in range(1, nsteps + 1):
        t = t0 + (step - 1) * dt
        if method == "kdk":
            y[m:] += 0.5 * dt * acc
            y[:m] += dt * y[m:]
            acc = np.asarray(rhs(t + dt, y), dtype=float)[m:]
            y[m:] += 0.5 * dt * acc
        else:
            y = _rk4_step(rhs, t, y, dt)
        if not np.all(np.isfinite(y)):
            _check(step, dt)
        if step % stride == 0:
            row += 1
            out[row] = y
    return out


def integrate(rhs, y0, dt: float, horizon: float, sample_stride: int = 1, method: str | None = None,
              t0: float = 0.0, labels=None) -> Trajectory:
    """Fixed-step integration from ``t0`` to ``t0 + horizon``.

    When ``horizon`` is not a whole number of steps, the step is shortened
    just enough to land on it (the value used is ``meta["dt"]``).

    ``rhs`` is either a :class:`ModalSystem` / :class:`BathFrozenSystem`
    (dispatched to compiled loops) or any callable ``rhs(t, y)``.  Conservative
    modal systems default to ``"split4"``, a 4th-order composition of
    kick-drift-kick steps; ``"split"`` is the plain 2nd-order step.  Anything
    else defaults to RK4; ``method="kdk"`` forces velocity-Verlet on a generic
    callable whose state is ``[q, p]`` with ``dq/dt = p``.
    """
    nsteps, dt = _fit_steps(dt, horizon)
    stride = int(sample_stride)
    if stride < 1:
        raise ValueError("sample_stride must be >= 1")
    y0 = np.array(y0, dtype=float)
    rows = nsteps // stride + 1
    meta = {"dt": dt, "stride": stride}

    if isinstance(rhs, ModalSystem):
        m = rhs.size
        if y0.size != 2 * m:
            raise ValueError(f"state length {y0.size} does not match {m} modes")
        cfg = rhs.cfg
        out = np.empty((rows, 2 * m))
        if rhs.exc is None and method in (None, "split4", "split", "kdk"):
            q, p = y0[:m].copy(), y0[m:].copy()
            order = 2 if method in ("split", "kdk") else 4
            status = _kernels.split_run(rhs._T, rhs._om, q, p, cfg.epsilon, cfg.a, cfg.d0, dt, nsteps, stride, out,
                                        order)
            scheme = "split" if order == 2 else "split4"
        elif method in (None, "rk4"):
            exc = rhs.exc
            f, Om, mu = (0.0, 1.0, 0.0) if exc is None else (exc.f, exc.Omega, exc.mu)
            status = _kernels.rk4_run(rhs._T, rhs._om, y0.copy(), t0, cfg.epsilon, cfg.a, cfg.d0,
                                      f, Om, mu, dt, nsteps, stride, out)
            scheme = "rk4"
        else:
            raise ValueError(f"method {method!r} not available for this system")
        _check(status, dt)
        meta.update(fidelity=rhs.fidelity, modes=rhs.modes, labels=rhs.labels, scheme=scheme)
    elif isinstance(rhs, BathFrozenSystem) and method in (None, "split", "kdk"):
        out = np.empty((rows, 2))
        cfg = rhs.cfg
        status = _kernels.bath_split_run(np.ascontiguousarray(rhs.basis.T), rhs.basis.omega[1:].copy(),
                                         rhs.bath.A, rhs.bath.B, y0.copy(), t0, cfg.epsilon, cfg.a, cfg.d0,
                                         dt, nsteps, stride, out)
        _check(status, dt)
        meta.update(fidelity="bath-frozen", labels=list(rhs.labels), scheme="split")
    else:
        method = method or "rk4"
        if method not in ("rk4", "kdk"):
            raise ValueError(f"unknown method {method!r}")
        out = _generic(rhs, y0, dt, nsteps, stride, method, t0)
        meta.update(fidelity=getattr(rhs, "fidelity", "generic"), scheme=method,
                    labels=list(labels) if labels is not None else [f"y{i}" for i in range(y0.size)])
    times = t0 + dt * stride * np.arange(rows)
    return Trajectory(times, out, meta)


def detect_division(traj: Trajectory, q0_index: int = 0, start_sign: float = -1.0) -> float | None:
    """Time at which component ``q0_index`` first leaves the ``start_sign`` side.

    Linear interpolation between the bracketing samples; ``None`` if it never
    crosses.
    """
    if not -traj.states.shape[1] <= q0_index < traj.states.shape[1]:
        raise IndexError(f"q0_index {q0_index} out of range")
    x = traj.states[:, q0_index] * np.sign(start_sign)
    hit = np.flatnonzero(x <= 0.0)
    if hit.size == 0:
        return None
    i = int(hit[0])
    if i == 0:
        return float(traj.times[0])
    x0, x1 = x[i - 1], x[i]
    t0, t1 = traj.times[i - 1], traj.times[i]
    return float(t0 + (t1 - t0) * x0 / (x0 - x1))


def _fidelity_modes(basis: ModalBasis, gamma: int, fidelity: str, modes):
    if modes is not None:
        return tuple(modes)
    if fidelity == "full":
        return tuple(range(basis.n))
    if fidelity == "two-mode":
        return (0, gamma)
    raise ValueError(f"unknown fidelity {fidelity!r} (expected 'full' or 'two-mode')")


def division_time(cfg: ChainConfig, basis: ModalBasis, gamma: int, energy: float, horizon: float = 3000.0,
                  fidelity: str = "full", dt: float = 0.01, modes=None) -> DivisionResult:
    """Inject ``energy`` into mode ``gamma`` at rest on ``-theta_e``; time until ``q0`` reaches 0."""
    if not 0 < gamma < basis.n:
        raise ValueError(f"gamma must satisfy 0 < gamma < n, got {gamma}")
    modes = _fidelity_modes(basis, gamma, fidelity, modes)
    if gamma not in modes:
        raise ValueError("the trigger mode must be part of the simulated mode set")
    init = activation_state(cfg, basis, gamma, energy)
    idx = list(modes)
    q = np.ascontiguousarray(init.q[idx])
    p = np.ascontiguousarray(init.p[idx])
    T = np.ascontiguousarray(basis.T[:, idx])
    om = np.ascontiguousarray(basis.omega[idx])
    t_d, status = _kernels.split_first_crossing(T, om, q, p, cfg.epsilon, cfg.a, cfg.d0, dt,
                                                _n_steps(dt, horizon), -1.0)
    _check(status, dt)
    return DivisionResult(float(energy), None if t_d < 0 else float(t_d))


def division_time_from_state(cfg: ChainConfig, basis: ModalBasis, state: ModalState, horizon: float = 3000.0,
                             dt: float = 0.01, modes=None) -> float | None:
    """First time ``q0`` leaves its initial side, starting from an arbitrary modal state."""
    idx = list(range(basis.n)) if modes is None else list(modes)
    if idx[0] != 0:
        raise ValueError("mode set must start with the reactive mode 0")
    q = np.ascontiguousarray(state.q[idx])
    p = np.ascontiguousarray(state.p[idx])
    sign = -1.0 if q[0] < 0 else 1.0
    t_d, status = _kernels.split_first_crossing(np.ascontiguousarray(basis.T[:, idx]),
                                                np.ascontiguousarray(basis.omega[idx]), q, p, cfg.epsilon,
                                                cfg.a, cfg.d0, dt, _n_steps(dt, horizon), sign)
    _check(status, dt)
    return None if t_d < 0 else float(t_d)


def min_activation_energy_numeric(cfg: ChainConfig, basis: ModalBasis, gamma: int, horizon: float = 3000.0,
                                  fidelity: str = "full", tol: float = 1e-3, dt: float = 0.01,
                                  e_start: float = 1.0 / 16.0, e_cap: float = 64.0, modes=None) -> float:
    """Smallest injected energy that divides within ``horizon``, by bisection to width ``tol``.

    "No division within the horizon" counts as below threshold.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")

    def divides(e):
        return division_time(cfg, basis, gamma, e, horizon, fidelity, dt, modes).divided

    lo, hi = 0.0, e_start
    while not divides(hi):
        lo = hi
        hi *= 2.0
        if hi > e_cap:
            raise SaturationError(f"no division for mode {gamma} up to E={e_cap:g}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if divides(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
