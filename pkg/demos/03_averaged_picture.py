"""
The averaged reactive-mode potential
====================================

Averaging over the fast trigger phase leaves a one-degree-of-freedom
Hamiltonian in (x, y) with the action I as a parameter.  The saddle at x = 0
turns into a centre once c2(I) changes sign.
"""

import numpy as np

from pendula_lab import ChainConfig, build_averaged_hamiltonian, build_basis, equilibrium_curve, pitchfork_locus

cfg = ChainConfig()
basis = build_basis(cfg.n)
avg = build_averaged_hamiltonian(cfg, 6, "saddle", 26, basis)
w = avg.omega

print(f"eps*n*U(0) = {cfg.epsilon * avg.na0:.5f}, c2(0) = {avg.c(2, 0.0):.3e}")

# wells of the averaged potential shrink towards the origin as I grows
for I in np.linspace(0.0, 44.0, 12):
    xe = equilibrium_curve(avg, I)
    print(f"I/omega = {I / w:6.2f}   c2 = {avg.c(2, I):+.3e}   wells at {np.round(xe, 3)}")

I_b = pitchfork_locus(avg)
print(f"pitchfork at I = {I_b:.4f} ({I_b / w:.3f} in units of omega_6)")
