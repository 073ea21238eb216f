"""Chain of pendula in a Morse potential.

Dimensionless Hamiltonian of ``n`` torsionally coupled pendula with periodic
boundary (``theta_0 = theta_n``)::

    H = sum_k [ p_k**2 / 2 + (theta_k - theta_{k-1})**2 / 2 + epsilon * U(theta_k) ]
    U(theta) = (exp(-a * (1 + cos(theta) - d0)) - 1)**2

Angles are never wrapped: the collective coordinate has to be able to travel
from ``-theta_e`` through the saddle at 0 to ``+theta_e``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

__all__ = [
    "DimensionalParams",
    "ChainConfig",
    "ChainState",
    "ExcitationConfig",
    "morse_potential",
    "morse_derivative",
    "equilibrium_angle",
    "total_energy",
    "potential_energy",
    "chain_rhs",
    "time_unit_ps",
]


@dataclass(frozen=True)
class DimensionalParams:
    """Physical parameters of the chain.

    Units: ``m`` in amu, ``h`` and ``x0`` in nm, ``S`` and ``D`` in eV,
    ``a_d`` in 1/nm.
    """

    m: float = 300.0
    h: float = 1.0
    S: float = 42.0
    D: float = 0.42
    x0: float = 0.3
    a_d: float = 7.0

    def epsilon(self) -> float:
        return self.D / (2.0 * self.S * self.a_d * self.h)

    def a(self) -> float:
        return self.a_d * self.h

    def d0(self) -> float:
        return self.a_d * self.x0 / (self.a_d * self.h)


def _rel_close(x: float, y: float, tol: float = 1e-12) -> bool:
    return abs(x - y) <= tol * max(abs(x), abs(y))


@dataclass(frozen=True)
class ChainConfig:
    """Dimensionless chain parameters (defaults: 30 pendula, eps = 1/1400, a = 7, d0 = 0.3)."""

    n: int = 30
    epsilon: float = 1.0 / 1400.0
    a: float = 7.0
    d0: float = 0.3
    dimensional: DimensionalParams | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a!r}")
        if not 0 < self.d0 < 2:
            raise ValueError(f"d0 must lie in (0, 2), got {self.d0!r}")
        dim = self.dimensional
        if dim is not None:
            for name, derived in (("epsilon", dim.epsilon()), ("a", dim.a()), ("d0", dim.d0())):
                if not _rel_close(getattr(self, name), derived):
                    raise ValueError(
                        f"{name}={getattr(self, name)!r} inconsistent with dimensional "
                        f"parameters (expected {derived!r})"
                    )

    @classmethod
    def from_dimensional(cls, dim: DimensionalParams, n: int = 30) -> "ChainConfig":
        return cls(n=n, epsilon=dim.epsilon(), a=dim.a(), d0=dim.d0(), dimensional=dim)


@dataclass
class ChainState:
    """Angles ``theta``, momenta ``p = dtheta/dtau`` and time ``t``."""

    theta: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        if self.theta.ndim != 1 or self.theta.shape != self.p.shape:
            raise ValueError("theta and p must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(self.theta)) and np.all(np.isfinite(self.p))):
            raise ValueError("state contains non-finite entries")

    @property
    def n(self) -> int:
        return self.theta.shape[0]

    def check(self, cfg: ChainConfig) -> None:
        if self.n != cfg.n:
            raise ValueError(f"state has {self.n} pendula, config expects {cfg.n}")


@dataclass(frozen=True)
class ExcitationConfig:
    """Parametric forcing ``eps*theta_k*f*cos(Omega t)`` and friction ``-eps*mu*p_k``.

    ``sigma`` is the detuning defined by ``Omega**2 / 4 = omega_gamma**2 + eps*sigma``;
    it is stored alongside ``Omega`` and checked against it on construction.
    Use :meth:`from_detuning` or :meth:`from_frequency` rather than the raw
    constructor.
    """

    f: float
    Omega: float
    mu: float
    gamma: int
    sigma: float
    omega_gamma: float = field(repr=False, default=float("nan"))
    epsilon: float = field(repr=False, default=float("nan"))

    def __post_init__(self):
        if self.f < 0 or self.mu < 0:
            raise ValueError("f and mu must be non-negative")
        if not self.Omega > 0:
            raise ValueError("Omega must be positive")
        if int(self.gamma) != self.gamma or self.gamma < 1:
            raise ValueError("gamma must be a positive mode index")
        if math.isfinite(self.omega_gamma) and math.isfinite(self.epsilon):
            mismatch = self.Omega**2 / 4 - self.omega_gamma**2 - self.epsilon * self.sigma
            if abs(mismatch) > 1e-12 * max(1.0, self.Omega**2):
                raise ValueError("sigma is inconsistent with Omega and omega_gamma")

    @classmethod
    def from_detuning(cls, cfg: ChainConfig, gamma: int, f: float, mu: float, sigma: float = 0.0):
        if not 0 < gamma < cfg.n:
            raise ValueError(f"gamma must satisfy 0 < gamma < n, got {gamma}")
        w = 2.0 * math.sin(math.pi * gamma / cfg.n)
        Omega = 2.0 * math.sqrt(w * w + cfg.epsilon * sigma)
        return cls(f=f, Omega=Omega, mu=mu, gamma=gamma, sigma=sigma, omega_gamma=w, epsilon=cfg.epsilon)

    @classmethod
    def from_frequency(cls, cfg: ChainConfig, gamma: int, f: float, mu: float, Omega: float):
        if not 0 < gamma < cfg.n:
            raise ValueError(f"gamma must satisfy 0 < gamma < n, got {gamma}")
        w = 2.0 * math.sin(math.pi * gamma / cfg.n)
        sigma = (Omega**2 / 4 - w * w) / cfg.epsilon
        return cls(f=f, Omega=Omega, mu=mu, gamma=gamma, sigma=sigma, omega_gamma=w, epsilon=cfg.epsilon)

    def retuned(self, sigma: float) -> "ExcitationConfig":
        """Same forcing at a different detuning (requires a config-bound instance)."""
        if not (math.isfinite(self.omega_gamma) and math.isfinite(self.epsilon)):
            raise ValueError("excitation is not bound to a chain config")
        Omega = 2.0 * math.sqrt(self.omega_gamma**2 + self.epsilon * sigma)
        return ExcitationConfig(self.f, Omega, self.mu, self.gamma, sigma, self.omega_gamma, self.epsilon)


def _morse_exp(theta, cfg: ChainConfig):
    return np.exp(-cfg.a * (1.0 + np.cos(theta) - cfg.d0))


def morse_potential(theta, cfg: ChainConfig):
    """Single-pendulum Morse term ``U(theta)``; even in ``theta``, zero at ``theta_e``."""
    g = _morse_exp(theta, cfg)
    return (g - 1.0) ** 2


def morse_derivative(theta, cfg: ChainConfig):
    """Closed-form ``dU/dtheta = 2 a (g - 1) g sin(theta)`` with ``g = exp(-a(1 + cos - d0))``."""
    g = _morse_exp(theta, cfg)
    return 2.0 * cfg.a * (g - 1.0) * g * np.sin(theta)


def equilibrium_angle(cfg: ChainConfig) -> float:
    """Positive angle ``arccos(d0 - 1)`` where the Morse term vanishes."""
    if not 0 <= cfg.d0 <= 2:
        raise ValueError(f"d0 - 1 = {cfg.d0 - 1} outside [-1, 1]")
    return math.acos(cfg.d0 - 1.0)


def potential_energy(theta, cfg: ChainConfig) -> float:
    theta = np.asarray(theta, dtype=float)
    diff = theta - np.roll(theta, 1)
    return 0.5 * float(diff @ diff) + cfg.epsilon * float(np.sum(morse_potential(theta, cfg)))


def total_energy(state: ChainState, cfg: ChainConfig) -> float:
    state.check(cfg)
    return 0.5 * float(state.p @ state.p) + potential_energy(state.theta, cfg)


def chain_rhs(state: ChainState, cfg: ChainConfig, exc: ExcitationConfig | None = None):
    """Time derivatives ``(dtheta, dp)`` of the full chain.

    ``dp_k = (theta_{k+1} - 2 theta_k + theta_{k-1}) - eps U'(theta_k)``, plus
    ``eps theta_k f cos(Omega t) - eps mu p_k`` when forcing is given.
    """
    state.check(cfg)
    th = state.theta
    dp = np.roll(th, -1) - 2.0 * th + np.roll(th, 1) - cfg.epsilon * morse_derivative(th, cfg)
    if exc is not None:
        dp = dp + cfg.epsilon * (exc.f * math.cos(exc.Omega * state.t) * th - exc.mu * state.p)
    return state.p.copy(), dp


def time_unit_ps(cfg: ChainConfig) -> float:
    """Physical duration of one dimensionless time unit, ``sqrt(m h^2 / S)``, in picoseconds."""
    dim = cfg.dimensional
    if dim is None:
        raise ValueError("time unit needs the dimensional parameters (m, h, S)")
    m = dim.m * constants.physical_constants["atomic mass constant"][0]
    h = dim.h * 1e-9
    S = dim.S * constants.electron_volt
    return math.sqrt(m * h * h / S) * 1e12
