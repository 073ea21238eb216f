"""Parametric-resonance analysis of the averaged two-mode model.

With ``Omega**2 / 4 = omega**2 + eps*sigma`` and the trigger mode written as
``q = sqrt(2I/omega) sin(Omega t/2 + beta)``, averaging gives

    x' = y
    y' = -eps (Mbar_x + mu y)
    I' = eps I (f sin(2 beta) / (2 omega) - mu)
    beta' = eps (Mbar_I - sigma / (2 omega) + f cos(2 beta) / (4 omega))

whose frictionless part is generated by the effective Hamiltonian
``H_PR = y**2/2 + eps Mbar - eps sigma I / (2 omega) + eps f I cos(2 beta) / (4 omega)``
with ``(x, y)`` and ``(beta, I)`` canonical pairs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .averaging import AveragedHamiltonian, build_averaged_hamiltonian, equilibrium_curve, real_positive_roots
from .chain import ChainConfig, ExcitationConfig
from .errors import ConvergenceError, IntegrationError
from .integrate import ModalSystem, Trajectory, integrate
from .modal import ModalBasis

__all__ = [
    "AveragedPRState",
    "FixedPoint",
    "ResponseRow",
    "Bifurcation",
    "ResponseTable",
    "averaged_pr_rhs",
    "averaged_pr_cartesian_rhs",
    "effective_hamiltonian",
    "effective_potential",
    "beta_equilibria",
    "find_fixed_points",
    "stability",
    "classify",
    "numeric_jacobian",
    "frequency_response",
    "control_trajectory",
    "action_angle",
    "crossing_time",
    "swing_period",
    "energy_routing",
]

log = logging.getLogger(__name__)

DEAD_BAND = 1e-10
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class AveragedPRState:
    x: float
    y: float
    I: float
    beta: float

    def __post_init__(self):
        vals = (self.x, self.y, self.I, self.beta)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("state contains non-finite entries")
        if self.I < 0:
            raise ValueError("action I must be non-negative")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.I, self.beta])


@dataclass(frozen=True)
class FixedPoint:
    case_label: str
    coords: AveragedPRState
    sigma: float
    branch: str = ""
    eigenvalues: np.ndarray | None = field(default=None, compare=False)
    stability: str = ""
    residual: float = 0.0


def _check(avg: AveragedHamiltonian, exc: ExcitationConfig):
    if avg.center_tag != "saddle":
        raise ValueError("resonance analysis uses the saddle-centered averaged Hamiltonian")
    if avg.gamma != exc.gamma:
        raise ValueError(f"averaged model is for mode {avg.gamma}, excitation drives mode {exc.gamma}")


def _sig(exc, sigma):
    return exc.sigma if sigma is None else float(sigma)


def averaged_pr_rhs(avg: AveragedHamiltonian, exc: ExcitationConfig, s: AveragedPRState, sigma=None):
    """Right-hand side ``(dx, dy, dI, dbeta)`` of the averaged forced equations."""
    _check(avg, exc)
    eps, w, f, mu = avg.epsilon, avg.omega, exc.f, exc.mu
    sg = _sig(exc, sigma)
    dx = s.y
    dy = -eps * (avg.derivative(s.x, s.I, nx=1) + mu * s.y)
    dI = eps * s.I * (f * math.sin(2 * s.beta) / (2 * w) - mu)
    db = eps * (avg.derivative(s.x, s.I, nI=1) - sg / (2 * w) + f * math.cos(2 * s.beta) / (4 * w))
    return float(dx), float(dy), float(dI), float(db)


def averaged_pr_cartesian_rhs(avg: AveragedHamiltonian, exc: ExcitationConfig, x, y, q, p, sigma=None):
    """Same vector field in ``q = sqrt(2I/omega) sin(beta)``, ``p = sqrt(2 I omega) cos(beta)``.

    Regular at ``I = 0``; used for the fixed points on the ``I = 0`` plane.
    """
    _check(avg, exc)
    eps, w, f, mu = avg.epsilon, avg.omega, exc.f, exc.mu
    sg = _sig(exc, sigma)
    I = 0.5 * (p * p / w + w * q * q)
    d = avg.derivative(x, I, nI=1) - sg / (2 * w)
    dq = -0.5 * eps * mu * q + eps * p * d / w + eps * f * p / (4 * w * w)
    dp = -0.5 * eps * mu * p - eps * w * q * d + eps * f * q / 4
    dy = -eps * (avg.derivative(x, I, nx=1) + mu * y)
    return float(y), float(dy), float(dq), float(dp)


def effective_hamiltonian(avg: AveragedHamiltonian, exc: ExcitationConfig, s: AveragedPRState, sigma=None) -> float:
    _check(avg, exc)
    eps, w = avg.epsilon, avg.omega
    sg = _sig(exc, sigma)
    return float(0.5 * s.y**2 + eps * avg.potential(s.x, s.I) - eps * sg * s.I / (2 * w)
                 + eps * exc.f * s.I * math.cos(2 * s.beta) / (4 * w))


def effective_potential(avg: AveragedHamiltonian, exc: ExcitationConfig, x, I, sigma=None):
    """``H_PR(x, 0, I, pi/2)``; vectorized over ``x`` and ``I``."""
    _check(avg, exc)
    eps, w = avg.epsilon, avg.omega
    sg = _sig(exc, sigma)
    I = np.asarray(I, dtype=float)
    return eps * avg.potential(x, I) - eps * sg * I / (2 * w) - eps * exc.f * I / (4 * w)


def beta_equilibria(avg: AveragedHamiltonian, exc: ExcitationConfig):
    """The two roots of ``sin(2 beta) = 2 omega mu / f`` in ``(0, pi/2)``: ``(b1, b2)`` with ``b1 <= pi/4``."""
    if exc.f <= 0:
        raise ValueError("beta_e needs f > 0")
    s = 2 * avg.omega * exc.mu / exc.f
    if s > 1:
        raise ValueError(f"no phase-locked state: 2 omega mu / f = {s:.6g} exceeds 1")
    b1 = 0.5 * math.asin(s)
    return b1, 0.5 * math.pi - b1


def _i_target(avg, exc, sigma, beta):
    # value of Mbar_I that makes beta' vanish
    return (sigma - 0.5 * exc.f * math.cos(2 * beta)) / (2 * avg.omega)


def _residual(avg, exc, s, sigma) -> float:
    if s.I == 0.0:
        r = averaged_pr_cartesian_rhs(avg, exc, s.x, s.y, 0.0, 0.0, sigma)
    else:
        r = averaged_pr_rhs(avg, exc, s, sigma)
    return float(np.max(np.abs(r)))


def _ix(avg, x, I):
    # Mbar_x / x as a polynomial in x**2
    kmax = avg.degree // 2
    u = x * x
    return sum(2 * k * avg.c(2 * k, I) * u ** (k - 1) for k in range(1, kmax + 1))


def _newton2(F, z0, tol=1e-13, maxit=60, h=1e-6):
    """Damped Newton with a central-difference Jacobian."""
    z = np.array(z0, dtype=float)
    r = F(z)
    for _ in range(maxit):
        nr = np.linalg.norm(r)
        if nr <= tol:
            break
        J = np.empty((2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            J[:, j] = (F(z + e) - F(z - e)) / (2 * h)
        try:
            dz = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-6:
            zn = z + lam * dz
            rn = F(zn)
            if np.all(np.isfinite(rn)) and np.linalg.norm(rn) < nr:
                break
            lam *= 0.5
        else:
            break
        z, r = zn, rn
    return z, float(np.linalg.norm(r))


def _case_iv(avg, exc, sigma, bname, beta, I_max, n_grid, seeds):
    target = _i_target(avg, exc, sigma, beta)

    def F(z):
        x, I = z
        return np.array([_ix(avg, x, I), avg.derivative(x, I, nI=1) - target])

    found = []
    grid = np.linspace(I_max / n_grid, I_max, n_grid)
    roots = [equilibrium_curve(avg, I) for I in grid]
    pos = [r[r > 0] for r in roots]
    for i in range(n_grid - 1):
        a, b = pos[i], pos[i + 1]
        for j in range(min(a.size, b.size)):
            ha = avg.derivative(a[j], grid[i], nI=1) - target
            hb = avg.derivative(b[j], grid[i + 1], nI=1) - target
            if ha * hb > 0:
                continue

            def h(I, j=j):
                xs = equilibrium_curve(avg, I)
                xs = xs[xs > 0]
                if xs.size <= j:
                    return np.nan
                return avg.derivative(xs[j], I, nI=1) - target

            try:
                I0 = brentq(h, grid[i], grid[i + 1], xtol=1e-14)
                x0 = equilibrium_curve(avg, I0)
                x0 = x0[x0 > 0][j]
            except (ValueError, IndexError):
                x0 = 0.5 * (a[j] + b[j])
                I0 = 0.5 * (grid[i] + grid[i + 1])
            z, res = _newton2(F, (x0, I0))
            if res > RESIDUAL_TOL:
                raise ConvergenceError(f"case (iv) solve stalled at sigma={sigma:g}, best residual {res:.3g}",
                                       residual=res)
            found.append(z)
    for sx, sI in seeds:
        z, res = _newton2(F, (abs(sx), sI))
        if res <= RESIDUAL_TOL and z[1] > 0 and abs(z[0]) > 1e-6:
            found.append(z)
        else:
            log.debug("case (iv) seed (%g, %g) did not converge (residual %.3g)", sx, sI, res)
    out = []
    for z in found:
        x, I = abs(z[0]), z[1]
        if I <= 0:
            continue
        if any(abs(x - u) < 1e-7 and abs(I - v) < 1e-7 for u, v in out):
            continue
        out.append((x, I))
    return [(sgn * x, I, bname, beta) for x, I in sorted(out, key=lambda p: p[1]) for sgn in (-1.0, 1.0)]


def find_fixed_points(avg: AveragedHamiltonian, exc: ExcitationConfig, sigma=None, I_max: float = 200.0,
                      n_grid: int = 240, seeds=(), with_stability: bool = True) -> list:
    """All fixed points of the averaged forced equations at detuning ``sigma``.

    Cases: (i) the origin; (ii) ``(+-x_e, 0, 0, 0)``; (iii) ``(0, 0, I_e, beta_e)``
    for each positive root ``I_e <= I_max``; (iv) ``(x*, 0, I*, beta_e)`` from a
    scan along the equilibrium curve followed by Newton polishing.  Both phase
    roots ``beta_e`` are used; the ``branch`` tag records which (``b1``/``b2``).
    ``seeds`` are extra ``(x, I)`` starting points for case (iv).
    """
    _check(avg, exc)
    sg = _sig(exc, sigma)
    pts = [FixedPoint("i", AveragedPRState(0.0, 0.0, 0.0, 0.0), sg)]
    for xe in equilibrium_curve(avg, 0.0):
        pts.append(FixedPoint("ii", AveragedPRState(float(xe), 0.0, 0.0, 0.0), sg, "+" if xe > 0 else "-"))
    betas = ()
    if exc.f > 0 and 2 * avg.omega * exc.mu <= exc.f:
        betas = tuple(zip(("b1", "b2"), beta_equilibria(avg, exc)))
    row = P.polyder(avg.C[0])
    for bname, beta in betas:
        target = _i_target(avg, exc, sg, beta)
        coef = row.copy()
        coef[0] -= target
        for I in real_positive_roots(coef, I_max):
            pts.append(FixedPoint("iii", AveragedPRState(0.0, 0.0, float(I), beta), sg, bname))
    for bname, beta in betas:
        bseeds = [(x, I) for x, I, b in seeds if b == bname]
        for x, I, bn, beta in _case_iv(avg, exc, sg, bname, beta, I_max, n_grid, bseeds):
            pts.append(FixedPoint("iv", AveragedPRState(float(x), 0.0, float(I), beta), sg,
                                  f"{bn}{'+' if x > 0 else '-'}"))
    out = []
    for fp in pts:
        res = _residual(avg, exc, fp.coords, sg)
        if res > RESIDUAL_TOL:
            raise ConvergenceError(f"case ({fp.case_label}) fixed point residual {res:.3g}", residual=res)
        fp = replace(fp, residual=res)
        out.append(stability(avg, exc, fp) if with_stability else fp)
    return out


def _pair_class(lams, db=DEAD_BAND) -> str:
    re = np.real(lams)
    if np.any(np.abs(re) < db):
        return "marginal"
    npos = int(np.sum(re > 0))
    return ("stable foci", "saddle", "unstable foci")[npos]


_ORDER = {"saddle": 0, "stable foci": 1, "unstable foci": 2, "marginal": 3}


def _join(a: str, b: str) -> str:
    a, b = sorted((a, b), key=_ORDER.__getitem__)
    return f"{a}×{b}"


def classify(eigenvalues, coupled: bool = False, db: float = DEAD_BAND) -> str:
    """Stability string from the real parts.

    Decoupled spectra are read as two pairs ``(lam1, lam2), (lam3, lam4)``;
    any pair whose real parts straddle zero is a saddle, both negative a
    stable focus, both positive an unstable focus.  Coupled spectra are
    labeled by the number of eigenvalues with positive real part.
    """
    lam = np.asarray(eigenvalues)
    if np.any(np.abs(np.real(lam)) < db):
        return "marginal"
    if not coupled:
        return _join(_pair_class(lam[:2], db), _pair_class(lam[2:], db))
    npos = int(np.sum(np.real(lam) > 0))
    return ("stable foci×stable foci", "saddle×stable foci", "saddle×saddle",
            "saddle×unstable foci", "unstable foci×unstable foci")[npos]


def _quad(b, c):
    # roots of lam**2 + b lam + c
    disc = np.sqrt(complex(b * b - 4 * c))
    return np.array([(-b - disc) / 2, (-b + disc) / 2])


def stability(avg: AveragedHamiltonian, exc: ExcitationConfig, fp: FixedPoint) -> FixedPoint:
    """Fill eigenvalues and stability class of ``fp``.

    Closed forms for cases (i)-(iii); for case (iv) the roots of
    ``lam**4 + t1 lam**3 + t2 lam**2 + t3 lam + t4`` with
    ``t1 = 2 eps mu``, ``t2 = eps**2 mu**2 + eps A - eps**2 D K``,
    ``t3 = eps**2 mu A - eps**3 mu D K``, ``t4 = eps**3 K (B**2 - A D)``,
    where ``A, B, D = Mbar_xx, Mbar_xI, Mbar_II`` and ``K = f I cos(2 beta) / omega``.
    """
    _check(avg, exc)
    eps, w, f, mu = avg.epsilon, avg.omega, exc.f, exc.mu
    s = fp.coords
    A = float(avg.derivative(s.x, s.I, nx=2))
    xpair = _quad(eps * mu, eps * A)
    if fp.case_label in ("i", "ii"):
        d = fp.sigma - 2 * w * float(avg.derivative(s.x, 0.0, nI=1))
        r = eps / (4 * w) * np.sqrt(complex(f * f - 4 * d * d))
        lam = np.concatenate([xpair, [-eps * mu / 2 - r, -eps * mu / 2 + r]])
        coupled = False
    elif fp.case_label == "iii":
        D = float(avg.derivative(0.0, s.I, nI=2))
        r = eps / (2 * w) * np.sqrt(complex((w * mu) ** 2 + 4 * w * f * s.I * D * math.cos(2 * s.beta)))
        lam = np.concatenate([xpair, [-eps * mu / 2 - r, -eps * mu / 2 + r]])
        coupled = False
    elif fp.case_label == "iv":
        B = float(avg.derivative(s.x, s.I, nx=1, nI=1))
        D = float(avg.derivative(s.x, s.I, nI=2))
        K = f * s.I * math.cos(2 * s.beta) / w
        tau = [2 * eps * mu,
               eps**2 * mu**2 + eps * A - eps**2 * D * K,
               eps**2 * mu * A - eps**3 * mu * D * K,
               eps**3 * K * (B * B - A * D)]
        lam = P.polyroots([tau[3], tau[2], tau[1], tau[0], 1.0])
        lam = lam[np.argsort(lam.real)]
        coupled = True
    else:
        raise ValueError(f"unknown case label {fp.case_label!r}")
    lam = np.asarray(lam, dtype=complex)
    return replace(fp, eigenvalues=lam, stability=classify(lam, coupled))


def numeric_jacobian(avg: AveragedHamiltonian, exc: ExcitationConfig, fp: FixedPoint, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian at ``fp``: Cartesian ``(x, y, q, p)`` on ``I = 0``, else polar ``(x, y, I, beta)``."""
    z = fp.coords.as_array()
    if fp.coords.I == 0.0:
        z = np.array([z[0], z[1], 0.0, 0.0])

        def F(v):
            return np.array(averaged_pr_cartesian_rhs(avg, exc, *v, sigma=fp.sigma))
    else:
        def F(v):
            return np.array(averaged_pr_rhs(avg, exc, AveragedPRState(*v), fp.sigma))
    J = np.empty((4, 4))
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        J[:, j] = (F(z + e) - F(z - e)) / (2 * h)
    return J


# -- frequency response ----------------------------------------------------------


@dataclass(frozen=True)
class ResponseRow:
    sigma: float
    branch_id: str
    case: str
    x: float
    I: float
    beta: float
    stability: str
    re_lambda: tuple


@dataclass(frozen=True)
class Bifurcation:
    sigma: float
    branch_id: str
    case: str
    before: str
    after: str


@dataclass
class ResponseTable:
    rows: list
    bifurcations: list

    def branch(self, branch_id: str) -> list:
        return [r for r in self.rows if r.branch_id == branch_id]

    def to_csv(self, path) -> None:
        """Versioned header, ``, ``-separated columns, 17 significant digits, LF endings."""
        lines = ["# pendula-lab response v1",
                 ", ".join(["sigma", "branch_id", "case", "x", "I", "beta", "class",
                            "re_lambda_1", "re_lambda_2", "re_lambda_3", "re_lambda_4"])]
        for r in self.rows:
            vals = [f"{r.sigma:.17g}", r.branch_id, r.case, f"{r.x:.17g}", f"{r.I:.17g}", f"{r.beta:.17g}",
                    r.stability] + [f"{v:.17g}" for v in r.re_lambda]
            lines.append(", ".join(vals))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _family(fp: FixedPoint) -> str:
    return f"{fp.case_label}{fp.branch}"


def _match(prev: dict, pts: list, counter: dict) -> list:
    """Assign branch ids by nearest ``(x, I)`` within each family."""
    ids = [None] * len(pts)
    by_fam = {}
    for k, fp in enumerate(pts):
        by_fam.setdefault(_family(fp), []).append(k)
    for fam, idx in by_fam.items():
        cands = [(bid, fp) for bid, fp in prev.items() if _family(fp) == fam]
        pairs = sorted(((abs(pts[k].coords.x - fp.coords.x) + abs(pts[k].coords.I - fp.coords.I), k, bid)
                        for k in idx for bid, fp in cands))
        used_k, used_b = set(), set()
        for dist, k, bid in pairs:
            if k in used_k or bid in used_b or dist > 5.0:
                continue
            ids[k] = bid
            used_k.add(k)
            used_b.add(bid)
        for k in idx:
            if ids[k] is None:
                counter[fam] = counter.get(fam, -1) + 1
                ids[k] = fam if fam in ("i", "ii+", "ii-") and counter[fam] == 0 else f"{fam}#{counter[fam]}"
    return ids


def _nearest(pts, ref: FixedPoint):
    cands = [p for p in pts if _family(p) == _family(ref)]
    if not cands:
        return None
    return min(cands, key=lambda p: abs(p.coords.x - ref.coords.x) + abs(p.coords.I - ref.coords.I))


def frequency_response(avg: AveragedHamiltonian, exc: ExcitationConfig, sigma_range, steps: int,
                       refine_tol: float = 1e-3, **solver) -> ResponseTable:
    """Continue all fixed points over ``sigma`` and locate stability changes.

    Each step re-solves (closed forms and the case-(iv) scan) and also seeds
    Newton from the previous step's case-(iv) points; branches are linked by
    proximity.  Where a branch's class changes between steps the detuning is
    bisected to ``refine_tol``.
    """
    _check(avg, exc)
    if steps < 2:
        raise ValueError("steps must be >= 2")
    sigmas = np.linspace(float(sigma_range[0]), float(sigma_range[1]), int(steps))
    rows, bifs = [], []
    prev: dict = {}
    counter: dict = {}
    for sg in sigmas:
        seeds = [(fp.coords.x, fp.coords.I, fp.branch[:2]) for fp in prev.values() if fp.case_label == "iv"]
        pts = find_fixed_points(avg, exc, sg, seeds=seeds, **solver)
        ids = _match(prev, pts, counter)
        cur = dict(zip(ids, pts))
        lost = set(prev) - set(cur)
        if lost:
            log.info("sigma=%g: branches ended %s", sg, sorted(lost))
        for bid, fp in cur.items():
            old = prev.get(bid)
            if old is not None and old.stability != fp.stability:
                bifs.append(_refine(avg, exc, bid, old, fp, refine_tol, solver))
            rows.append(ResponseRow(float(sg), bid, fp.case_label, fp.coords.x, fp.coords.I, fp.coords.beta,
                                    fp.stability, tuple(float(v) for v in np.real(fp.eigenvalues))))
        prev = cur
    return ResponseTable(rows, bifs)


def _refine(avg, exc, bid, left: FixedPoint, right: FixedPoint, tol, solver) -> Bifurcation:
    lo, hi = left.sigma, right.sigma
    a = left
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if a.case_label in ("i", "ii"):
            m = stability(avg, exc, replace(a, sigma=mid))
        else:
            m = _nearest(find_fixed_points(avg, exc, mid, seeds=[(a.coords.x, a.coords.I, a.branch[:2])],
                                           **solver), a)
            if m is None:
                break
        if m.stability == a.stability:
            lo, a = mid, m
        else:
            hi = mid
    return Bifurcation(0.5 * (lo + hi), bid, left.case_label, left.stability, right.stability)


# -- control trajectories --------------------------------------------------------


def _pr_system(avg, exc, sigma):
    _check(avg, exc)
    eps, w, f, mu = avg.epsilon, avg.omega, exc.f, exc.mu

    def rhs(t, y):
        x, v, I, b = y
        Mx, MI = avg.gradient(x, max(I, 0.0))
        return [v, -eps * (Mx + mu * v), eps * I * (f * math.sin(2 * b) / (2 * w) - mu),
                eps * (MI - sigma / (2 * w) + f * math.cos(2 * b) / (4 * w))]
    return rhs


def control_trajectory(fidelity: str, cfg: ChainConfig, basis: ModalBasis, exc: ExcitationConfig, init,
                       horizon: float, dt: float | None = None, sample_stride: int = 1,
                       avg: AveragedHamiltonian | None = None) -> Trajectory:
    """Forced, damped trajectory from ``init = (x0, y0, I0, beta0)``.

    ``averaged`` integrates the averaged equations (state ``x, y, I, beta``,
    adaptive DOP853 sampled every ``dt * sample_stride``);
    ``reduced`` and ``full`` integrate the two-mode truncation or the whole
    chain in modal coordinates, starting from
    ``q_gamma = sqrt(2 I0 / omega) sin(beta0)``, ``p_gamma = sqrt(2 I0 omega) cos(beta0)``,
    ``q_0 = x0``, ``p_0 = y0`` and all other modes at rest.  Full-fidelity
    output carries the pendulum angles in ``meta["theta"]``.
    """
    x0, y0, I0, b0 = (float(v) for v in init)
    if I0 < 0:
        raise ValueError("initial action must be non-negative")
    g = exc.gamma
    w = float(basis.omega[g])
    if fidelity == "averaged":
        avg = avg or build_averaged_hamiltonian(cfg, g, basis=basis)
        step = (dt or 0.5) * int(sample_stride)
        times = np.arange(0.0, horizon + 0.5 * step, step)
        sol = solve_ivp(_pr_system(avg, exc, exc.sigma), (0.0, times[-1]), [x0, y0, I0, b0], method="DOP853",
                        t_eval=times, rtol=1e-10, atol=1e-12)
        if sol.status != 0:
            raise IntegrationError(f"averaged control integration failed: {sol.message}")
        return Trajectory(sol.t, sol.y.T.copy(), {"fidelity": "averaged", "labels": ["x", "y", "I", "beta"],
                                                  "scheme": "DOP853", "nfev": sol.nfev})
    if fidelity not in ("reduced", "full"):
        raise ValueError(f"unknown fidelity {fidelity!r}")
    modes = (0, g) if fidelity == "reduced" else None
    sys = ModalSystem(cfg, basis, modes, exc)
    y = np.zeros(2 * sys.size)
    ig = sys.modes.index(g)
    y[0], y[sys.size] = x0, y0
    y[ig] = math.sqrt(2 * I0 / w) * math.sin(b0)
    y[sys.size + ig] = math.sqrt(2 * I0 * w) * math.cos(b0)
    traj = integrate(sys, y, dt or 0.01, horizon, sample_stride, method="rk4")
    traj.meta.update(gamma=g, Omega=exc.Omega)
    if fidelity == "full":
        traj.meta["theta"] = traj.states[:, : basis.n] @ basis.T.T
    return traj


def action_angle(traj: Trajectory, exc: ExcitationConfig, omega: float) -> np.ndarray:
    """Project a modal trajectory onto ``(x, y, I, beta)`` columns."""
    if traj.meta.get("fidelity") == "averaged":
        return traj.states.copy()
    g = exc.gamma
    x, y = traj.component("q0"), traj.component("p0")
    q, p = traj.component(f"q{g}"), traj.component(f"p{g}")
    I = 0.5 * (p * p / omega + omega * q * q)
    beta = np.mod(np.arctan2(omega * q, p) - 0.5 * exc.Omega * traj.times, 2 * np.pi)
    return np.column_stack([x, y, I, beta])


def crossing_time(traj: Trajectory) -> float | None:
    """First time the collective coordinate (column 0) reaches zero from its starting side."""
    x = traj.states[:, 0]
    s0 = np.sign(x[0]) or 1.0
    hit = np.flatnonzero(x * s0 <= 0)
    if hit.size == 0:
        return None
    i = int(hit[0])
    if i == 0:
        return float(traj.times[0])
    return float(traj.times[i - 1] + (traj.times[i] - traj.times[i - 1]) * x[i - 1] / (x[i - 1] - x[i]))


def swing_period(traj: Trajectory, gamma: int, window: float = 1.0) -> float | None:
    """Mean spacing of successive zero crossings of ``q_gamma`` while ``|q_0| < window``.

    Each crossing flips the six-peak profile, so this is the swing period of
    the open chain (half the linear period of the trigger mode).
    """
    q = traj.component(f"q{gamma}")
    x = traj.states[:, 0]
    t = traj.times
    idx = np.flatnonzero((q[:-1] * q[1:] < 0) & (np.abs(x[:-1]) < window))
    if idx.size < 3:
        return None
    tc = t[idx] + (t[idx + 1] - t[idx]) * q[idx] / (q[idx] - q[idx + 1])
    gaps = np.diff(tc)
    # crossings separated by an exit from the window are not consecutive
    gaps = gaps[gaps < 4 * np.median(gaps)]
    return float(np.mean(gaps))


def energy_routing(traj: Trajectory, basis: ModalBasis, gamma: int) -> float:
    """Peak harmonic energy of any mode other than 0 and ``gamma``, relative to the peak of ``E_gamma``."""
    n = basis.n
    if traj.states.shape[1] != 2 * n:
        raise ValueError("energy routing needs a full-fidelity trajectory")
    q, p = traj.states[:, :n], traj.states[:, n:]
    E = 0.5 * p**2 + 0.5 * (basis.omega * q) ** 2
    others = np.delete(E, [0, gamma], axis=1)
    return float(others.max() / E[:, gamma].max())
