"""
Minimum activation energies
===========================

Bisection on the injected energy gives the numeric threshold; the averaged
two-mode Hamiltonian gives a closed-form estimate that scales like omega**2.
"""

from pendula_lab import (ChainConfig, build_averaged_hamiltonian, build_basis, min_activation_energy_analytic,
                         min_activation_energy_numeric)
from pendula_lab.lab.scenarios import parabola_fit

cfg = ChainConfig()
basis = build_basis(cfg.n)

# numeric thresholds at both fidelities for the trigger mode 6
for fid in ("full", "two-mode"):
    print(f"{fid:>8} MAE, mode 6: {min_activation_energy_numeric(cfg, basis, 6, fidelity=fid):.5f}")

# analytic estimates across modes 1..14
E = []
for m in range(1, 15):
    sad = build_averaged_hamiltonian(cfg, m, "saddle", 26, basis)
    eq = build_averaged_hamiltonian(cfg, m, "equilibrium", 26, basis)
    I_m, e = min_activation_energy_analytic(sad, eq)
    E.append(e)
    print(f"mode {m:2d}  omega = {basis.omega[m]:.4f}  I_m/omega = {I_m / basis.omega[m]:.4f}  E = {e:.4f}")

c, res = parabola_fit(basis.omega[1:15], E)
print(f"E ~ {c:.4f} omega^2")
