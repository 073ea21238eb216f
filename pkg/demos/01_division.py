"""
Division of a 30-pendulum chain
===============================

Energy placed in a single Fourier mode drains into the reactive mode q0,
which then swings from the equilibrium well over the saddle at q0 = 0.
"""

import numpy as np

from pendula_lab import ChainConfig, ModalSystem, build_basis, division_time, integrate
from pendula_lab.modal import activation_state

cfg = ChainConfig()
basis = build_basis(cfg.n)
print("frequencies omega_1, omega_6, omega_15:", basis.omega[[1, 6, 15]].round(5))

# kick mode 6 with E = 1.221 while the chain rests at theta_e
init = activation_state(cfg, basis, 6, 1.221)
y0 = np.concatenate([init.q, init.p])
traj = integrate(ModalSystem(cfg, basis), y0, 0.01, 400.0, sample_stride=100)

# the reactive coordinate starts at -sqrt(n) theta_e and crosses zero
q0 = traj.component("q0")
for t, v in zip(traj.times[::40], q0[::40]):
    print(f"t = {t:7.1f}   q0 = {v:+8.4f}")

print("division time:", division_time(cfg, basis, 6, 1.221).division_time)
print("below threshold (E = 0.5):", division_time(cfg, basis, 6, 0.5).division_time)
