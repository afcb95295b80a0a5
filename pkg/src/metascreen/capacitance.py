"""Capacitance coefficients of the dimer screen.

``C^alpha`` comes from the static quasiperiodic single layer.  The periodic
capacitance ``C^0`` and the leading density ``psi^0`` come from the static
periodic single layer restricted to mean-zero densities: ``psi_j^0`` solves
``S^{0,0}[psi] + K chi_{dD} = chi_{dD_j}`` with ``int psi = 0`` for an
unknown constant ``K``.  The first-order matrix ``C^{1,alpha0}`` has a closed
form in terms of the dipole moment of ``psi_1^0``; a finite-difference route
through the full frequency-dependent operator checks it.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import Incidence, MetascreenConfig, disk_centers
from .layer_ops import (
    assemble_single_layer_periodic,
    assemble_single_layer_quasi,
    basis_size,
    boundary_integrals,
    indicator,
    split,
)

ALPHA_MIN = 1e-6


@dataclass(frozen=True)
class CapacitanceData:
    C11_0: float
    c_par: float
    c_perp: float
    psi1_0: np.ndarray
    N: int
    C_quasi: np.ndarray | None = None
    C1_matrix: np.ndarray | None = None

    @property
    def C0(self) -> np.ndarray:
        return self.C11_0 * np.array([[1.0, -1.0], [-1.0, 1.0]])

    @property
    def c1(self) -> np.ndarray:
        return np.array([self.c_par, self.c_perp])


def capacitance_quasi(cfg: MetascreenConfig, alpha: float, N: int = 6):
    """Quasiperiodic capacitance matrix and its ascending eigenvalues.

    ``C_ij = -int_{dD_i} psi_j`` with ``psi_j = (S^{alpha,0})^{-1}[chi_{dD_j}]``.
    """
    if abs(alpha) < ALPHA_MIN:
        raise ValueError("alpha = 0: use capacitance_periodic")
    S = assemble_single_layer_quasi(cfg, alpha, 0.0, N).entries
    rhs = np.stack([indicator(1, N), indicator(2, N)], axis=1)
    psi = np.linalg.solve(S, rhs)
    C = -np.stack([boundary_integrals(cfg, psi[:, j], N) for j in range(2)], axis=1)
    lam = np.linalg.eigvalsh(0.5 * (C + C.conj().T))
    return C, lam


def solve_mean_zero(S: np.ndarray, rhs: np.ndarray, cfg: MetascreenConfig, N: int):
    """Solve ``S psi + K chi_{dD} = rhs`` subject to ``int_{dD} psi = 0``.

    Returns ``(psi, K)``.
    """
    n = basis_size(N)
    chi = indicator(1, N) + indicator(2, N)
    aug = np.zeros((n + 1, n + 1), dtype=complex)
    aug[:n, :n] = S
    aug[:n, n] = chi
    aug[n, :n] = chi * 2 * np.pi * cfg.R_D
    b = np.concatenate([rhs, [0.0]])
    x = np.linalg.solve(aug, b)
    return x[:n], x[n]


def periodic_densities(cfg: MetascreenConfig, N: int = 6, constant_shift: float = 0.0):
    """``(psi_1^0, psi_2^0)`` as coefficient vectors."""
    S = assemble_single_layer_periodic(cfg, N, constant_shift).entries
    psi1, _ = solve_mean_zero(S, indicator(1, N), cfg, N)
    psi2, _ = solve_mean_zero(S, indicator(2, N), cfg, N)
    return psi1, psi2


def periodic_capacitance_matrix(cfg: MetascreenConfig, N: int = 6, constant_shift: float = 0.0):
    """Full ``C^0`` from independent solves for both columns."""
    psi = periodic_densities(cfg, N, constant_shift)
    return -np.stack([boundary_integrals(cfg, p, N) for p in psi], axis=1)


def capacitance_periodic(cfg: MetascreenConfig, N: int = 6, constant_shift: float = 0.0):
    """``(C11^0, psi_1^0)``."""
    psi1, _ = periodic_densities(cfg, N, constant_shift)
    C11 = -boundary_integrals(cfg, psi1, N)[0]
    return float(C11.real), psi1


def first_moment(cfg: MetascreenConfig, coeffs, N: int) -> np.ndarray:
    """``int_{dD} y phi(y) dsigma(y)`` for a density given by coefficients."""
    R = cfg.R_D
    total = np.zeros(2, dtype=complex)
    for c, a in zip(disk_centers(cfg), split(coeffs, N)):
        a0, ap, am = a[N], a[N + 1], a[N - 1]
        total += 2 * np.pi * R * a0 * c
        total += np.pi * R**2 * np.array([ap + am, 1j * (ap - am)])
    return total


def dipole_vector(cfg: MetascreenConfig, N: int = 6, psi1_0=None) -> tuple[float, float]:
    """``(c_par, c_perp) = int_{dD} y psi_1^0(y) dsigma(y)``."""
    if psi1_0 is None:
        _, psi1_0 = capacitance_periodic(cfg, N)
    c = first_moment(cfg, psi1_0, N)
    return float(c[0].real), float(c[1].real)


@lru_cache(maxsize=64)
def periodic_data(cfg: MetascreenConfig, N: int = 8) -> CapacitanceData:
    """Cached ``C11^0``, dipole vector and ``psi_1^0`` for a configuration."""
    C11, psi1 = capacitance_periodic(cfg, N)
    cpar, cperp = dipole_vector(cfg, N, psi1)
    psi1.setflags(write=False)
    return CapacitanceData(C11, cpar, cperp, psi1, N)


def c1_matrix(cfg: MetascreenConfig, incidence: Incidence, N: int = 8,
              data: CapacitanceData | None = None) -> np.ndarray:
    """Closed-form first-order capacitance matrix ``C^{1,alpha0}``."""
    if data is None:
        data = periodic_data(cfg, N)
    L, w = cfg.L, incidence.w_perp
    J = np.array([[1.0, 1.0], [1.0, 1.0]])
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    K = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return (-0.5j * w * L * J + 1j * incidence.alpha0 * data.c_par * A
            - 0.5j * w * data.c_perp**2 / L * K)


def frequency_capacitance(cfg: MetascreenConfig, incidence: Incidence, omega: complex, N: int = 8):
    """``-int_{dD_i} (S^{omega alpha0, omega})^{-1}[chi_{dD_j}]``; tends to ``C^0`` as omega -> 0."""
    S = assemble_single_layer_quasi(cfg, omega * incidence.alpha0, omega, N).entries
    rhs = np.stack([indicator(1, N), indicator(2, N)], axis=1)
    psi = np.linalg.solve(S, rhs)
    return -np.stack([boundary_integrals(cfg, psi[:, j], N) for j in range(2)], axis=1)


def c1_matrix_numeric(cfg: MetascreenConfig, incidence: Incidence, omega_fd: float = 1e-2,
                      N: int = 8) -> np.ndarray:
    """Central difference of :func:`frequency_capacitance` at ``+/- omega_fd``.

    The negative frequency uses the analytic continuation of the lattice
    kernel along the fixed incidence direction.
    """
    if not 1e-3 <= omega_fd <= 1e-1:
        raise ValueError("omega_fd must lie in [1e-3, 1e-1]")
    plus = frequency_capacitance(cfg, incidence, omega_fd, N)
    minus = frequency_capacitance(cfg, incidence, -omega_fd, N)
    return (plus - minus) / (2 * omega_fd)


def c1_matrix_richardson(cfg: MetascreenConfig, incidence: Incidence, omega_fd: float = 1e-2,
                         N: int = 8) -> np.ndarray:
    """Fourth-order estimate from central differences at ``h`` and ``h/2``."""
    coarse = c1_matrix_numeric(cfg, incidence, omega_fd, N)
    fine = c1_matrix_numeric(cfg, incidence, omega_fd / 2, N)
    return (4 * fine - coarse) / 3
