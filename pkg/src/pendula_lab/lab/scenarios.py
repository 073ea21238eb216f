"""Scenario runners: one function per scenario kind, each returning emitted files and headline results."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..averaging import (build_averaged_hamiltonian, equilibrium_curve, min_activation_energy_analytic,
                         pitchfork_locus)
from ..chain import ChainConfig, ExcitationConfig, equilibrium_angle
from ..errors import IntegrationError
from ..integrate import ModalSystem, division_time, division_time_from_state, integrate, min_activation_energy_numeric
from ..modal import ModalState, activation_state, build_basis
from ..resonance import (action_angle, control_trajectory, crossing_time, energy_routing, frequency_response,
                         swing_period)
from .config import Scenario
from .manifest import write_csv

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    files: list = field(default_factory=list)
    results: dict = field(default_factory=dict)


def _pmap(fn, items, threads: int):
    """Map preserving input order; threads > 1 overlaps the nogil kernels."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def chain_config(s: Scenario) -> ChainConfig:
    return ChainConfig(n=s["n"], epsilon=s["epsilon"], a=s["a"], d0=s["d0"])


def excitation(s: Scenario, cfg: ChainConfig, basis) -> ExcitationConfig:
    w = float(basis.omega[s["mode"]])
    mu = s.parameters.get("mu")
    if mu is None:
        mu = s["mu_times_omega"] / w
    return ExcitationConfig.from_detuning(cfg, s["mode"], s["f"], mu, s["sigma"])


def _out(s: Scenario, name: str) -> Path:
    return Path(s.output_dir) / name


# -- simulate --------------------------------------------------------------------


def run_simulate(s: Scenario, threads: int = 1) -> RunResult:
    cfg = chain_config(s)
    basis = build_basis(cfg.n)
    g = s["mode"]
    modes = None if s["fidelity"] == "full" else (0, g)
    sys = ModalSystem(cfg, basis, modes)
    init = activation_state(cfg, basis, g, s["energy"])
    idx = list(sys.modes)
    traj = integrate(sys, np.concatenate([init.q[idx], init.p[idx]]), s["dt"], s["horizon"], s["sample_stride"])
    m = sys.size
    q, p = traj.states[:, :m], traj.states[:, m:]
    E = 0.5 * p**2 + 0.5 * (basis.omega[idx] * q) ** 2
    f1 = write_csv(_out(s, "trajectory.csv"), "trajectory", ["t"] + sys.labels,
                   [[t, *row] for t, row in zip(traj.times, traj.states)])
    f2 = write_csv(_out(s, "modal_energies.csv"), "modal-energies", ["t"] + [f"E{a}" for a in idx],
                   [[t, *row] for t, row in zip(traj.times, E)])
    t_d = division_time(cfg, basis, g, s["energy"], s["horizon"], s["fidelity"], s["dt"]).division_time
    return RunResult([f1, f2], {"division_time": t_d})


# -- activation curves -----------------------------------------------------------


def _random_state(cfg, basis, energy, rng) -> ModalState:
    v = rng.standard_normal(cfg.n)
    v *= math.sqrt(2.0 * energy) / np.linalg.norm(v)
    q = np.zeros(cfg.n)
    q[0] = -math.sqrt(cfg.n) * equilibrium_angle(cfg)
    return ModalState(q, basis.T.T @ v, 0.0)


def run_activation_curve(s: Scenario, threads: int = 1) -> RunResult:
    cfg = chain_config(s)
    basis = build_basis(cfg.n)
    modes = s["mode"]
    fid = s["fidelity"]
    results = {}
    if "energies" in s.parameters:
        grids = {m: list(s["energies"]) for m in modes}
    else:
        maes = _pmap(lambda m: min_activation_energy_numeric(cfg, basis, m, s["horizon"], fid, s["tol"], s["dt"]),
                     modes, threads)
        results["mae"] = dict(zip(map(str, modes), maes))
        grids = {m: list(np.geomspace(s["grid_low"] * e, s["grid_high"] * e, s["points"]))
                 for m, e in zip(modes, maes)}
    rows = []
    if s["random"]:
        rng = np.random.default_rng(s["seed"])
        energies = sorted({e for g in grids.values() for e in g})
        states = [_random_state(cfg, basis, e, rng) for e in energies]

        def probe(k):
            try:
                return division_time_from_state(cfg, basis, states[k], s["horizon"], s["dt"]), "ok"
            except IntegrationError as err:
                log.warning("random activation E=%g failed: %s", energies[k], err)
                return None, "failed"

        for e, (t_d, status) in zip(energies, _pmap(probe, range(len(energies)), threads)):
            rows.append(["random", e, t_d, status])
        results["seed"] = s["seed"]
    else:
        jobs = [(m, e) for m in modes for e in grids[m]]

        def probe(job):
            m, e = job
            try:
                return division_time(cfg, basis, m, e, s["horizon"], fid, s["dt"]).division_time, "ok"
            except IntegrationError as err:
                log.warning("mode %d E=%g failed: %s", m, e, err)
                return None, "failed"

        for (m, e), (t_d, status) in zip(jobs, _pmap(probe, jobs, threads)):
            rows.append([m, e, t_d, status])
    f = write_csv(_out(s, "activation_curve.csv"), "activation-curve", ["mode", "E_a", "t_d", "status"], rows)
    return RunResult([f], results)


# -- MAE table -------------------------------------------------------------------


def parabola_fit(omega, energy):
    """Least-squares ``E = c * omega**2`` through the origin; returns ``(c, residuals)``."""
    w2 = np.asarray(omega, dtype=float) ** 2
    e = np.asarray(energy, dtype=float)
    c = float(w2 @ e / (w2 @ w2))
    return c, e - c * w2


def run_mae_table(s: Scenario, threads: int = 1) -> RunResult:
    cfg = chain_config(s)
    basis = build_basis(cfg.n)
    modes = s["mode"]
    jobs = [(m, fid) for m in modes for fid in ("full", "two-mode")]
    num = _pmap(lambda j: min_activation_energy_numeric(cfg, basis, j[0], s["horizon"], j[1], s["tol"], s["dt"]),
                jobs, threads)
    num = dict(zip(jobs, num))
    ana = []
    for m in modes:
        sad = build_averaged_hamiltonian(cfg, m, "saddle", s["degree"], basis)
        eq = build_averaged_hamiltonian(cfg, m, "equilibrium", s["degree"], basis)
        ana.append(min_activation_energy_analytic(sad, eq)[1])
    omega = [float(basis.omega[m]) for m in modes]
    c, res = parabola_fit(omega, ana)
    rows = [[m, w, num[(m, "full")], num[(m, "two-mode")], e, r] for m, w, e, r in zip(modes, omega, ana, res)]
    f = write_csv(_out(s, "mae.csv"), "mae",
                  ["mode", "omega", "E_numeric_full", "E_numeric_2mode", "E_analytic", "parabola_fit_residual"], rows)
    return RunResult([f], {"parabola_coefficient": c})


# -- averaged analysis -----------------------------------------------------------


def run_phase_portrait(s: Scenario, threads: int = 1) -> RunResult:
    cfg = chain_config(s)
    basis = build_basis(cfg.n)
    avg = build_averaged_hamiltonian(cfg, s["mode"], "saddle", s["degree"], basis)
    xs = np.linspace(-s["x_max"], s["x_max"], s["grid"])
    ys = np.linspace(-s["y_max"], s["y_max"], s["grid"])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    rows, eq_rows = [], []
    for I in s["actions"]:
        H = avg.hamiltonian(X, Y, I)
        rows.extend([I, x, y, h] for x, y, h in zip(X.ravel(), Y.ravel(), H.ravel()))
        eq_rows.append([I, 0.0, "saddle" if avg.c(2, I) < 0 else "center", float(avg.hamiltonian(0.0, 0.0, I))])
        for xe in equilibrium_curve(avg, I):
            kind = "center" if avg.derivative(xe, I, nx=2) > 0 else "saddle"
            eq_rows.append([I, xe, kind, float(avg.hamiltonian(xe, 0.0, I))])
    f1 = write_csv(_out(s, "phase_portrait.csv"), "phase-portrait", ["I", "x", "y", "H"], rows)
    f2 = write_csv(_out(s, "equilibria.csv"), "equilibria", ["I", "x", "type", "H"], eq_rows)
    return RunResult([f1, f2], {})


def run_pitchfork(s: Scenario, threads: int = 1) -> RunResult:
    cfg = chain_config(s)
    basis = build_basis(cfg.n)
    avg = build_averaged_hamiltonian(cfg, s["mode"], "saddle", s["degree"], basis)
    rows = []
    for I in np.linspace(0.0, s["I_max"], s["points"]):
        c2 = avg.c(2, I)
        xe = equilibrium_curve(avg, I)
        xe = xe[xe > 0]
        if xe.size:
            rows.extend([I, c2, x] for x in xe)
        else:
            rows.append([I, c2, None])
    I_b = pitchfork_locus(avg)
    f = write_csv(_out(s, "pitchfork.csv"), "pitchfork", ["I", "c2", "x_e"], rows)
    return RunResult([f], {"I_b": I_b, "I_b_over_omega": I_b / avg.omega, "c2_at_0": float(avg.c(2, 0.0))})


def run_response(s: Scenario, threads: int = 1) -> RunResult:
    cfg = chain_config(s)
    basis = build_basis(cfg.n)
    avg = build_averaged_hamiltonian(cfg, s["mode"], "saddle", s["degree"], basis)
    exc = excitation(s, cfg, basis)
    table = frequency_response(avg, exc, (s["sigma_min"], s["sigma_max"]), s["steps"], s["refine_tol"])
    f1 = _out(s, "response.csv")
    table.to_csv(f1)
    f2 = write_csv(_out(s, "bifurcations.csv"), "bifurcations", ["sigma", "branch_id", "case", "before", "after"],
                   [[b.sigma, b.branch_id, b.case, b.before, b.after] for b in table.bifurcations])
    bifs = [{"sigma": b.sigma, "branch_id": b.branch_id, "case": b.case, "before": b.before, "after": b.after}
            for b in table.bifurcations]
    return RunResult([f1, f2], {"bifurcations": bifs})


# -- time-domain control and snapshots ---------------------------------------------


def run_control(s: Scenario, threads: int = 1) -> RunResult:
    cfg = chain_config(s)
    basis = build_basis(cfg.n)
    exc = excitation(s, cfg, basis)
    g = s["mode"]
    w = float(basis.omega[g])
    I0 = s.parameters.get("I0")
    if I0 is None:
        I0 = s["I0_over_omega"] * w
    fid = s["fidelity"]
    avg = build_averaged_hamiltonian(cfg, g, "saddle", s["degree"], basis) if fid == "averaged" else None
    traj = control_trajectory(fid, cfg, basis, exc, (s["x0"], s["y0"], I0, s["beta0"]), s["horizon"], s["dt"],
                              s["sample_stride"], avg)
    aa = action_angle(traj, exc, w)
    files = [write_csv(_out(s, "control.csv"), "control-averaged", ["t", "x", "y", "I", "beta"],
                       [[t, *row] for t, row in zip(traj.times, aa)])]
    results = {"crossing_time": crossing_time(traj)}
    if fid == "full":
        theta = traj.meta["theta"]
        files.append(write_csv(_out(s, "control_theta.csv"), "control-theta",
                               ["t"] + [f"theta_{k}" for k in range(1, cfg.n + 1)],
                               [[t, *row] for t, row in zip(traj.times, theta)]))
        results["swing_period"] = swing_period(traj, g)
        results["energy_routing"] = energy_routing(traj, basis, g)
    return RunResult(files, results)


def run_snapshots(s: Scenario, threads: int = 1) -> RunResult:
    cfg = chain_config(s)
    basis = build_basis(cfg.n)
    g = s["mode"]
    dt = s["dt"]
    times = s.parameters.get("times")
    t_d = division_time(cfg, basis, g, s["energy"], s["horizon"], "full", dt).division_time
    if times is None:
        if t_d is None:
            raise IntegrationError(f"no division within {s['horizon']:g} for E={s['energy']:g}; give times explicitly")
        span = min(0.05 * t_d, 50.0)
        times = list(np.linspace(t_d - span, min(t_d + span, s["horizon"]), s["count"]))
    steps = sorted({int(round(t / dt)) for t in times})
    sys = ModalSystem(cfg, basis)
    init = activation_state(cfg, basis, g, s["energy"])
    y = np.concatenate([init.q, init.p])
    rows, done = [], 0
    for k in steps:
        if k > done:
            seg = integrate(sys, y, dt, (k - done) * dt, sample_stride=k - done, t0=done * dt)
            y = seg.states[-1]
            done = k
        theta = basis.T @ y[: cfg.n]
        rows.append([k * dt, float(np.max(np.abs(theta - theta.mean()))), *theta])
    f = write_csv(_out(s, "snapshots.csv"), "snapshots",
                  ["t", "spread"] + [f"theta_{k}" for k in range(1, cfg.n + 1)], rows)
    return RunResult([f], {"division_time": t_d})


RUNNERS = {
    "simulate": run_simulate,
    "activation-curve": run_activation_curve,
    "mae": run_mae_table,
    "averaged-phase-portrait": run_phase_portrait,
    "pitchfork": run_pitchfork,
    "response": run_response,
    "control": run_control,
    "snapshots": run_snapshots,
}
