"""
Capacitance coefficients of the dimer screen
============================================

The leading-order physics of the screen is carried by a handful of numbers:
the periodic capacitance C11^0, the dipole vector (c_par, c_perp) of the
leading density, and the quasiperiodic capacitance matrix C^alpha whose
eigenvalues set the two subwavelength bands.
"""
import numpy as np

from metascreen import Incidence, MetascreenConfig
from metascreen.capacitance import (
    c1_matrix,
    c1_matrix_richardson,
    capacitance_periodic,
    capacitance_quasi,
    dipole_vector,
)
from metascreen.nystrom import nystrom_capacitance_periodic

# reference dimer: period 1, radius 0.05, separation 0.3, tilted by 0.05 pi
cfg = MetascreenConfig()
print(cfg)

# periodic capacitance from the mean-zero solve; the Fourier basis converges fast
for N in (2, 4, 6, 8):
    C11, _ = capacitance_periodic(cfg, N)
    print(f"N={N}: C11^0 = {C11:.14f}")

# an independent Nystrom discretization with Kress quadrature gives the same value
C11_ny, cpar_ny, cperp_ny = nystrom_capacitance_periodic(cfg, 256)
print(f"Nystrom M=256: C11^0 = {C11_ny:.14f}")

# the dipole vector: c_perp controls how strongly the sharp mode radiates
for th in (0.0, 0.025, 0.05, 0.5):
    cpar, cperp = dipole_vector(cfg.replace(theta=th * np.pi), 8)
    print(f"theta = {th:5.3f} pi: c_par = {cpar:+.6f}, c_perp = {cperp:+.6f}")

# quasiperiodic capacitance: Hermitian, two positive eigenvalues
for alpha in (0.5, np.pi / 2, np.pi):
    C, lam = capacitance_quasi(cfg, alpha, 8)
    print(f"alpha = {alpha:.4f}: eigenvalues {lam[0]:.6f}, {lam[1]:.6f}")

# first-order correction: closed form against a Richardson finite difference
inc = Incidence(0.3)
print("C^1 closed form\n", c1_matrix(cfg, inc))
print("C^1 finite difference\n", c1_matrix_richardson(cfg, inc))
