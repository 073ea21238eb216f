"""Fourier modal coordinates and reduced (truncated) models.

The basis ``T`` satisfies ``theta = T @ q``.  Column 0 is the constant
``1/sqrt(n)`` (reactive mode, ``q_0 = sqrt(n) * mean(theta)``); columns
``0 < alpha < n/2`` are ``sqrt(2/n) cos(2 pi k alpha / n)``; for even ``n`` the
column ``n/2`` alternates ``(-1)**k / sqrt(n)``; columns ``alpha > n/2`` are
``sqrt(2/n) sin(2 pi k alpha / n)``.  With this layout every column ``alpha``
is an eigenvector of the coupling Laplacian with frequency
``omega_alpha = 2 sin(pi alpha / n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainConfig, ChainState, ExcitationConfig, equilibrium_angle, morse_derivative, morse_potential

__all__ = [
    "ModalBasis",
    "ModalState",
    "ReducedModel",
    "BathInitialConditions",
    "modal_frequencies",
    "build_basis",
    "to_modal",
    "from_modal",
    "modal_energies",
    "reduced_model",
    "reduced_potential",
    "reduced_gradient",
    "reduced_rhs",
    "bath_frozen_rhs",
    "activation_state",
]


def modal_frequencies(n: int) -> np.ndarray:
    alpha = np.arange(n)
    return 2.0 * np.sin(np.pi * alpha / n)


@dataclass(frozen=True)
class ModalBasis:
    n: int
    T: np.ndarray
    omega: np.ndarray

    def column(self, alpha: int) -> np.ndarray:
        return self.T[:, alpha]


@dataclass
class ModalState:
    q: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        if self.q.shape != self.p.shape or self.q.ndim != 1:
            raise ValueError("q and p must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.p))):
            raise ValueError("modal state contains non-finite entries")


def build_basis(n: int) -> ModalBasis:
    if n < 2:
        raise ValueError("n must be >= 2")
    k = np.arange(1, n + 1)
    T = np.empty((n, n))
    T[:, 0] = 1.0 / math.sqrt(n)
    for alpha in range(1, n):
        if 2 * alpha < n:
            T[:, alpha] = math.sqrt(2.0 / n) * np.cos(2 * np.pi * k * alpha / n)
        elif 2 * alpha == n:
            T[:, alpha] = (-1.0) ** k / math.sqrt(n)
        else:
            T[:, alpha] = math.sqrt(2.0 / n) * np.sin(2 * np.pi * k * alpha / n)
    return ModalBasis(n=n, T=T, omega=modal_frequencies(n))


def _check_dim(size: int, basis: ModalBasis):
    if size != basis.n:
        raise ValueError(f"dimension mismatch: got {size}, basis has n={basis.n}")


def to_modal(state: ChainState, basis: ModalBasis) -> ModalState:
    _check_dim(state.n, basis)
    return ModalState(basis.T.T @ state.theta, basis.T.T @ state.p, state.t)


def from_modal(modal: ModalState, basis: ModalBasis) -> ChainState:
    _check_dim(modal.q.shape[0], basis)
    return ChainState(basis.T @ modal.q, basis.T @ modal.p, modal.t)


def modal_energies(modal: ModalState, basis: ModalBasis) -> np.ndarray:
    """Harmonic energy ``p_a**2/2 + omega_a**2 q_a**2/2`` of each mode."""
    _check_dim(modal.q.shape[0], basis)
    return 0.5 * modal.p**2 + 0.5 * (basis.omega * modal.q) ** 2


@dataclass(frozen=True)
class ReducedModel:
    """Truncation of the chain to the reactive mode plus one or two other modes.

    ``modes[0]`` is always 0 and ``modes[1]`` is the trigger mode ``gamma``.
    """

    basis: ModalBasis
    modes: tuple

    def __post_init__(self):
        modes = tuple(int(m) for m in self.modes)
        if len(modes) < 2 or len(modes) > 3 or modes[0] != 0:
            raise ValueError("modes must be (0, gamma) or (0, gamma1, gamma2)")
        if len(set(modes)) != len(modes) or not all(0 < m < self.basis.n for m in modes[1:]):
            raise ValueError(f"invalid mode set {modes} for n={self.basis.n}")
        object.__setattr__(self, "modes", modes)

    @property
    def gamma(self) -> int:
        return self.modes[1]

    @property
    def col0(self) -> np.ndarray:
        return self.basis.T[:, 0]

    @property
    def colg(self) -> np.ndarray:
        return self.basis.T[:, self.gamma]

    @property
    def omega_gamma(self) -> float:
        return float(self.basis.omega[self.gamma])

    @property
    def columns(self) -> np.ndarray:
        return self.basis.T[:, list(self.modes)]

    @property
    def omegas(self) -> np.ndarray:
        return self.basis.omega[list(self.modes)]


def reduced_model(basis: ModalBasis, gamma: int, extra: int | None = None) -> ReducedModel:
    modes = (0, gamma) if extra is None else (0, gamma, extra)
    return ReducedModel(basis, modes)


def reduced_potential(model: ReducedModel, cfg: ChainConfig, q) -> float:
    """Reduced Morse term ``M(q) = sum_k U(sum_b T_kb q_b)`` over the model's modes."""
    theta = model.columns @ np.asarray(q, dtype=float)
    return float(np.sum(morse_potential(theta, cfg)))


def reduced_gradient(model: ReducedModel, cfg: ChainConfig, q) -> np.ndarray:
    """Partial derivatives ``dM/dq_b`` for each mode of the model."""
    cols = model.columns
    theta = cols @ np.asarray(q, dtype=float)
    return cols.T @ morse_derivative(theta, cfg)


def reduced_rhs(model: ReducedModel, cfg: ChainConfig, q0, p0, qg, pg, t=0.0, exc: ExcitationConfig | None = None):
    """Two-mode equations of motion; returns ``(dq0, dp0, dqg, dpg)``."""
    if len(model.modes) != 2:
        raise ValueError("reduced_rhs takes a two-mode model; use integrate.ModalSystem for three modes")
    eps = cfg.epsilon
    M0, Mg = reduced_gradient(model, cfg, (q0, qg))
    w = model.omega_gamma
    dp0 = -eps * M0
    dpg = -w * w * qg - eps * Mg
    if exc is not None:
        c = exc.f * math.cos(exc.Omega * t)
        dp0 += eps * (c * q0 - exc.mu * p0)
        dpg += eps * (c * qg - exc.mu * pg)
    return p0, dp0, pg, dpg


@dataclass(frozen=True)
class BathInitialConditions:
    """Amplitudes ``A_a, B_a`` for the harmonic bath modes ``a = 1..n-1``."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B, dtype=float)
        if A.shape != B.shape or A.ndim != 1:
            raise ValueError("A and B must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise ValueError("bath amplitudes must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @classmethod
    def zeros(cls, n: int) -> "BathInitialConditions":
        return cls(np.zeros(n - 1), np.zeros(n - 1))


def bath_modes(basis: ModalBasis, bath: BathInitialConditions, t: float) -> np.ndarray:
    """Frozen harmonic amplitudes ``Q_a(t) = A_a cos(w_a t) + B_a/w_a sin(w_a t)``."""
    w = basis.omega[1:]
    return bath.A * np.cos(w * t) + bath.B / w * np.sin(w * t)


def bath_frozen_rhs(basis: ModalBasis, cfg: ChainConfig, bath: BathInitialConditions, Q0, P0, t):
    """Reactive-mode equation with all other modes replaced by their linear solutions."""
    if bath.A.shape[0] != basis.n - 1:
        raise ValueError(f"bath arrays must have length n-1 = {basis.n - 1}")
    theta = basis.T[:, 0] * Q0 + basis.T[:, 1:] @ bath_modes(basis, bath, t)
    M0 = float(basis.T[:, 0] @ morse_derivative(theta, cfg))
    return P0, -cfg.epsilon * M0


def activation_state(cfg: ChainConfig, basis: ModalBasis, gamma: int, energy: float) -> ModalState:
    """Rest at ``-theta_e`` with kinetic energy ``energy`` injected into mode ``gamma``."""
    if energy < 0:
        raise ValueError("activation energy must be non-negative")
    q = np.zeros(basis.n)
    p = np.zeros(basis.n)
    q[0] = -math.sqrt(basis.n) * equilibrium_angle(cfg)
    p[gamma] = math.sqrt(2.0 * energy)
    return ModalState(q, p, 0.0)
