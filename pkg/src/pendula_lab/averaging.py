"""Partial averaging of the two-mode Hamiltonian over the trigger-mode phase.

The Morse term is replaced by its Taylor polynomial (degree 26 by default)
about ``theta = 0`` (saddle) or ``theta = -theta_e`` (equilibrium).  With
``q_gamma = sqrt(2 I / omega) sin(phi)`` the phase average of

    sum_k sum_j a_j (T_k0 x + T_kgamma q_gamma)**j

is an explicit polynomial ``sum C[k, j] x**k I**j`` in the reactive coordinate
``x`` (shifted by ``sqrt(n) theta_e`` for the equilibrium expansion) and the
action ``I``.  The averaged Hamiltonian is

    Hbar = y**2/2 + omega I + eps (n a_0 + sum_k c_k(I) x**k),   c_k(I) = sum_j C[k, j] I**j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

from .chain import ChainConfig, equilibrium_angle
from .errors import BracketError
from .modal import ModalBasis, ReducedModel, build_basis, reduced_model
from .series import cos_about

__all__ = [
    "TaylorSeries",
    "AveragedHamiltonian",
    "taylor_expand_morse",
    "average_reduced_hamiltonian",
    "build_averaged_hamiltonian",
    "averaged_rhs",
    "equilibrium_curve",
    "min_activation_energy_analytic",
    "pitchfork_locus",
    "real_positive_roots",
    "save_coefficients",
    "load_coefficients",
    "wallis_average",
]

CACHE_FORMAT = "pendula-lab averaged-hamiltonian v1"


@dataclass(frozen=True)
class TaylorSeries:
    center: float
    degree: int
    coeffs: np.ndarray
    cfg: ChainConfig

    def __call__(self, theta):
        return P.polyval(np.asarray(theta, dtype=float) - self.center, self.coeffs)


def taylor_expand_morse(cfg: ChainConfig, center: float = 0.0, degree: int = 26) -> TaylorSeries:
    """Taylor coefficients of ``U`` about ``center`` through ``degree``.

    Built by series arithmetic on ``cos -> affine -> exp -> square``.
    """
    if degree < 2:
        raise ValueError("degree must be >= 2")
    c = cos_about(center, degree)
    g = (-cfg.a * (1.0 + c - cfg.d0)).exp()
    u = (g - 1.0) * (g - 1.0)
    coeffs = u.coeffs
    if center == 0.0:
        coeffs = coeffs.copy()
        coeffs[1::2] = 0.0
    return TaylorSeries(float(center), int(degree), coeffs, cfg)


def wallis_average(m: int) -> float:
    """Phase average of ``sin(phi)**m`` over a period."""
    return 0.0 if m % 2 else comb(m, m // 2) / 2.0**m


@dataclass(frozen=True, eq=False)
class AveragedHamiltonian:
    center_tag: str
    shift: float
    omega: float
    gamma: int
    na0: float
    C: np.ndarray
    epsilon: float
    n: int
    _derivs: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def degree(self) -> int:
        return self.C.shape[0] - 1

    def _coef(self, nx: int, nI: int) -> np.ndarray:
        key = (nx, nI)
        if key not in self._derivs:
            d = self.C
            if nx:
                d = P.polyder(d, nx, axis=0)
            if nI:
                d = P.polyder(d, nI, axis=1)
            self._derivs[key] = d
        return self._derivs[key]

    def c(self, k: int, I, dI: int = 0):
        """Coefficient polynomial ``c_k(I)`` (or its ``dI``-th derivative)."""
        row = self.C[k]
        if dI:
            row = P.polyder(row, dI)
        return P.polyval(I, row)

    def potential(self, x, I):
        """Averaged Morse term ``Mbar(x, I)`` including the constant ``n a_0``."""
        xs, I = np.broadcast_arrays(np.asarray(x, dtype=float) + self.shift, np.asarray(I, dtype=float))
        return self.na0 + P.polyval2d(xs, I, self.C)

    def derivative(self, x, I, nx: int = 0, nI: int = 0):
        if nx == 0 and nI == 0:
            return self.potential(x, I)
        xs, I = np.broadcast_arrays(np.asarray(x, dtype=float) + self.shift, np.asarray(I, dtype=float))
        return P.polyval2d(xs, I, self._coef(nx, nI))

    def gradient(self, x: float, I: float):
        """``(Mbar_x, Mbar_I)`` at a scalar point; cheaper than two :meth:`derivative` calls."""
        d = self.C.shape[0]
        xp = (float(x) + self.shift) ** np.arange(d)
        Ip = float(I) ** np.arange(self.C.shape[1])
        Mx = xp[: d - 1] @ self._coef(1, 0) @ Ip
        MI = xp @ self._coef(0, 1) @ Ip[:-1]
        return float(Mx), float(MI)

    def hamiltonian(self, x, y, I):
        return 0.5 * np.asarray(y) ** 2 + self.omega * np.asarray(I) + self.epsilon * self.potential(x, I)


def _power_sums(col0: np.ndarray, colg: np.ndarray, degree: int) -> np.ndarray:
    # S[p, m] = sum_k col0_k**p colg_k**m, compensated
    S = np.zeros((degree + 1, degree + 1))
    for p in range(degree + 1):
        for m in range(degree + 1 - p):
            S[p, m] = math.fsum(col0**p * colg**m)
    return S


def average_reduced_hamiltonian(model: ReducedModel, series: TaylorSeries) -> AveragedHamiltonian:
    """Average the Taylor-approximated two-mode Hamiltonian over the trigger phase."""
    if len(model.modes) != 2:
        raise ValueError("averaging is defined for two-mode truncations only")
    cfg = series.cfg
    theta_e = equilibrium_angle(cfg)
    if series.center == 0.0:
        tag = "saddle"
    elif math.isclose(series.center, -theta_e, rel_tol=0, abs_tol=1e-12):
        tag = "equilibrium"
    else:
        raise ValueError("expansion center must be 0 or -theta_e")
    col0, colg = model.col0, model.colg
    w = model.omega_gamma
    deg = series.degree
    a = series.coeffs
    S = _power_sums(col0, colg, deg)
    C = np.zeros((deg + 1, deg // 2 + 1))
    for j in range(deg + 1):
        if a[j] == 0.0:
            continue
        for m in range(0, j + 1, 2):
            term = a[j] * comb(j, m) * S[j - m, m] * wallis_average(m) * (2.0 / w) ** (m // 2)
            if not math.isfinite(term):
                raise OverflowError(f"coefficient overflow at j={j}, m={m}")
            C[j - m, m // 2] += term
    if tag == "saddle":
        C[1::2, :] = 0.0
    na0 = C[0, 0]
    C[0, 0] = 0.0
    shift = -series.center / col0[0]
    return AveragedHamiltonian(tag, float(shift), float(w), model.gamma, float(na0), C, cfg.epsilon, model.basis.n)


def _header(cfg: ChainConfig, gamma: int, center: str, degree: int) -> str:
    return (f"# {CACHE_FORMAT}\n"
            f"# n={cfg.n} epsilon={cfg.epsilon!r} a={cfg.a!r} d0={cfg.d0!r} "
            f"gamma={gamma} center={center} degree={degree}\n")


def save_coefficients(path, avg: AveragedHamiltonian, cfg: ChainConfig) -> None:
    """Write the coefficient table as ``k, j, coefficient`` rows under a keyed header."""
    lines = [_header(cfg, avg.gamma, avg.center_tag, avg.degree),
             f"# na0={avg.na0!r} shift={avg.shift!r} omega={avg.omega!r}\n",
             "k, j, coefficient\n"]
    for k in range(avg.C.shape[0]):
        for j in range(avg.C.shape[1]):
            lines.append(f"{k}, {j}, {avg.C[k, j]:.17g}\n")
    Path(path).write_text("".join(lines), encoding="utf-8", newline="\n")


def load_coefficients(path, cfg: ChainConfig, gamma: int, center: str, degree: int) -> AveragedHamiltonian | None:
    """Read a table written by :func:`save_coefficients`; ``None`` if absent or keyed differently."""
    path = Path(path)
    if not path.exists():
        return None
    text = path.read_text(encoding="utf-8").splitlines(keepends=True)
    head = _header(cfg, gamma, center, degree)
    if "".join(text[:2]) != head:
        return None
    meta = dict(item.split("=", 1) for item in text[2][1:].split())
    C = np.zeros((degree + 1, degree // 2 + 1))
    for line in text[4:]:
        k, j, v = (s.strip() for s in line.split(","))
        C[int(k), int(j)] = float(v)
    w = float(meta["omega"])
    return AveragedHamiltonian(center, float(meta["shift"]), w, gamma, float(meta["na0"]), C, cfg.epsilon, cfg.n)


def build_averaged_hamiltonian(cfg: ChainConfig, gamma: int, center: str = "saddle", degree: int = 26,
                               basis: ModalBasis | None = None, cache_dir=None) -> AveragedHamiltonian:
    """Averaged Hamiltonian for trigger mode ``gamma``, optionally through an on-disk cache."""
    if center not in ("saddle", "equilibrium"):
        raise ValueError("center must be 'saddle' or 'equilibrium'")
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"avg_n{cfg.n}_g{gamma}_{center}_d{degree}.txt"
        cached = load_coefficients(path, cfg, gamma, center, degree)
        if cached is not None:
            return cached
    basis = basis or build_basis(cfg.n)
    theta = 0.0 if center == "saddle" else -equilibrium_angle(cfg)
    avg = average_reduced_hamiltonian(reduced_model(basis, gamma), taylor_expand_morse(cfg, theta, degree))
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        save_coefficients(path, avg, cfg)
    return avg


def averaged_rhs(avg: AveragedHamiltonian, x, y, I, phi):
    """Hamilton's equations of the averaged Hamiltonian: ``(dx, dy, dI, dphi)``.

    The action is a constant of motion.
    """
    if avg.center_tag != "saddle":
        raise ValueError("averaged equations use the saddle-centered expansion")
    eps = avg.epsilon
    dy = -eps * avg.derivative(x, I, nx=1)
    dphi = avg.omega + eps * avg.derivative(x, I, nI=1)
    return y, dy, 0.0 * np.asarray(I), dphi


def equilibrium_curve(avg: AveragedHamiltonian, I: float) -> np.ndarray:
    """Nonzero equilibria ``x_e(I)`` of the averaged reactive mode, as sorted ``-/+`` pairs.

    Roots of ``sum_k 2k c_2k(I) u**(k-1)`` with ``u = x**2`` from the companion
    matrix, keeping real ``u > 0``.
    """
    if avg.center_tag != "saddle":
        raise ValueError("equilibrium curve uses the saddle-centered expansion")
    if I < 0:
        raise ValueError("action must be non-negative")
    kmax = avg.degree // 2
    coef = np.array([2 * k * avg.c(2 * k, I) for k in range(1, kmax + 1)])
    x = np.sqrt(real_positive_roots(coef))
    return np.concatenate([-x[::-1], x])


def real_positive_roots(coef, upper: float = np.inf) -> np.ndarray:
    """Real roots in ``(0, upper]`` of ``sum coef[i] t**i`` via the companion matrix.

    Each root is refined by Brent's method on a tight bracket when the
    polynomial changes sign across it; otherwise the eigenvalue is kept.
    """
    coef = np.asarray(coef, dtype=float)
    nz = np.flatnonzero(coef)
    if nz.size == 0:
        return np.array([])
    coef = coef[: nz[-1] + 1]
    if coef.size < 2:
        return np.array([])
    roots = P.polyroots(coef)
    keep = np.abs(roots.imag) <= 1e-9 * np.maximum(1.0, np.abs(roots))
    r = np.sort(roots.real[keep & (roots.real > 0) & (roots.real <= upper)])
    out = []
    for t in r:
        h = 1e-7 * max(abs(t), 1e-12)
        lo, hi = t - h, t + h
        vlo, vhi = P.polyval(lo, coef), P.polyval(hi, coef)
        if vlo * vhi < 0:
            t = brentq(lambda v: P.polyval(v, coef), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        out.append(t)
    return np.array(out)


def _first_root(func, lo: float, hi: float, n_grid: int = 2000, what: str = "function"):
    grid = np.linspace(lo, hi, n_grid + 1)
    vals = np.array([func(g) for g in grid])
    for i in range(n_grid):
        if vals[i] == 0.0:
            return float(grid[i])
        if vals[i] * vals[i + 1] < 0:
            return float(brentq(func, grid[i], grid[i + 1], xtol=1e-13, rtol=4 * np.finfo(float).eps))
    raise BracketError(f"{what} has no sign change on ({lo:g}, {hi:g}]: "
                       f"endpoint values {vals[0]:.6g}, {vals[-1]:.6g}")


def min_activation_energy_analytic(avg_saddle: AveragedHamiltonian, avg_equilibrium: AveragedHamiltonian,
                                   I_max: float = 200.0):
    """Action ``I_m`` and energy ``omega I_m`` at which the initial equilibrium reaches the separatrix.

    Solves ``c'_0(I) - c_0(I) - n a_0 = 0`` where ``c'_0`` comes from the
    equilibrium-centered expansion (its value at the equilibrium, constant
    term included).
    """
    if avg_saddle.gamma != avg_equilibrium.gamma:
        raise ValueError("both averaged Hamiltonians must be built for the same mode")
    if avg_saddle.center_tag != "saddle" or avg_equilibrium.center_tag != "equilibrium":
        raise ValueError("expected a saddle-centered and an equilibrium-centered Hamiltonian")

    def residual(I):
        return (avg_equilibrium.na0 + avg_equilibrium.c(0, I)) - avg_saddle.c(0, I) - avg_saddle.na0

    I_m = _first_root(residual, 0.0, I_max, what="activation residual")
    return I_m, avg_saddle.omega * I_m


def pitchfork_locus(avg: AveragedHamiltonian, I_max: float = 200.0) -> float:
    """Smallest positive simple zero of ``c_2(I)``, where the origin changes from saddle to center."""
    if avg.center_tag != "saddle":
        raise ValueError("pitchfork locus uses the saddle-centered expansion")
    I_b = _first_root(lambda I: avg.c(2, I), 1e-9, I_max, what="c_2(I)")
    h = 1e-6 * max(1.0, I_b)
    if not (avg.c(2, I_b - h) < 0 < avg.c(2, I_b + h) or avg.c(2, I_b - h) > 0 > avg.c(2, I_b + h)):
        raise BracketError(f"zero of c_2 at I={I_b:g} is not simple")
    return I_b
