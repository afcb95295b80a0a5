"""Point-collocation Nystrom discretization used as an independent oracle.

Each circle carries ``M`` equispaced nodes.  On a disk's own boundary the
logarithmic singularity of the kernel is split off,

    G(x(t) - y(tau)) = M1(t, tau) ln(4 sin^2((t - tau)/2)) + M2(t, tau),

and integrated with Kress's product weights; everything else uses the
trapezoid rule.  The static periodic kernel is taken from its closed form,
so this path shares no lattice-sum code with the Fourier assembly in that
case.  Intended for tests and golden values, not for production sweeps.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import hankel1, jv

from .geometry import Incidence, MetascreenConfig, disk_centers
from .lattice_green import (
    greens_free,
    greens_free_gradient,
    greens_periodic_static,
    greens_quasi_ewald,
    lattice_remainder,
    periodic_static_remainder,
)
from .layer_ops import OperatorMatrix

EULER_GAMMA = 0.5772156649015329
M_MAX = 4096
ORACLE_E = 3.5


def kress_weights(M: int) -> np.ndarray:
    """Weights ``W[i, j]`` with ``sum_j W[i, j] f(t_j)`` approximating
    ``int_0^{2 pi} ln(4 sin^2((t_i - tau)/2)) f(tau) dtau``."""
    n = M // 2
    t = 2 * np.pi * np.arange(M) / M
    d = t[:, None] - t[None, :]
    m = np.arange(1, n)
    W = -(2 * np.pi / n) * (np.cos(d[..., None] * m) / m).sum(-1) - (np.pi / n**2) * np.cos(n * d)
    return W


def _nodes(cfg, M):
    t = 2 * np.pi * np.arange(M) / M
    e = np.stack([np.cos(t), np.sin(t)], -1)
    pts = [c + cfg.R_D * e for c in disk_centers(cfg)]
    return t, e, pts


def _check_M(M):
    if M < 128 or M % 2:
        raise ValueError("M must be even and at least 128")
    if M > M_MAX:
        raise MemoryError(f"M={M} exceeds the oracle limit {M_MAX}")


def _kernel(kind, diff, alpha, k, L, gradient):
    if kind == "periodic":
        return greens_periodic_static(diff, L, gradient=gradient)
    if kind == "quasi":
        return greens_quasi_ewald(diff, alpha, k, ORACLE_E, L, gradient=gradient)
    v = greens_free(diff, k)
    return (v, greens_free_gradient(diff, k)) if gradient else v


def _self_blocks(cfg, kind, alpha, k, M, W, need_np):
    """Single layer and adjoint double layer of one circle on itself."""
    R = cfg.R_D
    t, e, _ = _nodes(cfg, M)
    d = t[:, None] - t[None, :]
    log4s2 = np.log(4 * np.sin(d / 2) ** 2 + np.eye(M))  # diagonal masked below
    rho = 2 * R * np.abs(np.sin(d / 2))
    h = 2 * np.pi / M
    diag = np.eye(M, dtype=bool)
    off = ~diag
    static = k == 0
    if static:
        M1 = np.full((M, M), 1 / (4 * np.pi), dtype=complex)
        M2 = np.full((M, M), math.log(R) / (2 * np.pi), dtype=complex)
    else:
        k = complex(k)
        M1 = jv(0, k * rho) / (4 * np.pi)
        G = np.zeros((M, M), dtype=complex)
        G[off] = -0.25j * hankel1(0, k * rho[off])
        M2 = G - M1 * log4s2
        M2[diag] = -0.25j + (np.log(k / 2) + EULER_GAMMA) / (2 * np.pi) + math.log(R) / (2 * np.pi)
    rel = R * (e[:, None, :] - e[None, :, :])
    if kind == "periodic":
        rem = periodic_static_remainder(rel, cfg.L)
        grem = None
        if need_np:
            grem = np.zeros(rel.shape, dtype=complex)
            nz = off
            grem[nz] = greens_periodic_static(rel[nz], cfg.L, gradient=True)[1] \
                - rel[nz] / (2 * np.pi * rho[nz, None] ** 2)
    elif kind == "quasi":
        res = lattice_remainder(rel, alpha, k, ORACLE_E, cfg.L, gradient=need_np)
        rem, grem = res if need_np else (res, None)
    else:
        rem, grem = 0.0, None
    S = R * (W * M1 + h * (M2 + rem))
    if not need_np:
        return S, None
    if static:
        L1 = np.zeros((M, M), dtype=complex)
        L2 = np.full((M, M), 1 / (4 * np.pi * R), dtype=complex)
    else:
        L1 = -k * rho * jv(1, k * rho) / (8 * np.pi * R)
        Kf = np.zeros((M, M), dtype=complex)
        Kf[off] = 1j * k * rho[off] * hankel1(1, k * rho[off]) / (8 * R)
        L2 = Kf - L1 * log4s2
        L2[diag] = 1 / (4 * np.pi * R)
    if grem is not None:
        L2 = L2 + np.einsum("pqi,pi->pq", grem, e)
    K = R * (W * L1 + h * L2)
    return S, K


def _assemble(cfg, kind, alpha, k, M, need_np):
    _check_M(M)
    W = kress_weights(M)
    t, e, pts = _nodes(cfg, M)
    h = 2 * np.pi / M * cfg.R_D
    S = np.zeros((2 * M, 2 * M), dtype=complex)
    K = np.zeros((2 * M, 2 * M), dtype=complex) if need_np else None
    Ss, Ks = _self_blocks(cfg, kind, alpha, k, M, W, need_np)
    for a in range(2):
        sa = slice(a * M, (a + 1) * M)
        S[sa, sa] = Ss
        if need_np:
            K[sa, sa] = Ks
        b = 1 - a
        sb = slice(b * M, (b + 1) * M)
        diff = pts[a][:, None, :] - pts[b][None, :, :]
        res = _kernel(kind, diff, alpha, k, cfg.L, need_np)
        if need_np:
            v, g = res
            K[sa, sb] = h * np.einsum("pqi,pi->pq", g, e)
        else:
            v = res
        S[sa, sb] = h * v
    return S, K


def nystrom_oracle_single_layer(cfg: MetascreenConfig, alpha: float | None, k: complex,
                                M: int = 512, kind: str | None = None) -> OperatorMatrix:
    """Nystrom matrix of the single layer at the ``2M`` boundary nodes.

    ``kind`` is ``'periodic'`` (static, ``alpha = 0``, ``k = 0``), ``'quasi'``
    or ``'free'``; by default it is inferred from ``alpha`` and ``k``.
    """
    if kind is None:
        kind = "free" if alpha is None else ("periodic" if alpha == 0 and k == 0 else "quasi")
    S, _ = _assemble(cfg, kind, alpha, k, M, need_np=False)
    return OperatorMatrix(S, M, f"S_nystrom_{kind}", {"alpha": alpha, "k": k})


def nystrom_oracle_np(cfg: MetascreenConfig, alpha: float | None, k: complex, M: int = 512,
                      kind: str | None = None) -> OperatorMatrix:
    if kind is None:
        kind = "free" if alpha is None else ("periodic" if alpha == 0 and k == 0 else "quasi")
    _, K = _assemble(cfg, kind, alpha, k, M, need_np=True)
    return OperatorMatrix(K, M, f"K_nystrom_{kind}", {"alpha": alpha, "k": k})


def _disk_integrals(cfg, values, M):
    h = 2 * np.pi / M * cfg.R_D
    return h * np.array([values[:M].sum(), values[M:].sum()])


def nystrom_capacitance_periodic(cfg: MetascreenConfig, M: int = 512):
    """``(C11^0, c_par, c_perp)`` from the mean-zero periodic solve."""
    S = nystrom_oracle_single_layer(cfg, 0.0, 0.0, M, kind="periodic").entries
    h = 2 * np.pi / M * cfg.R_D
    n = 2 * M
    aug = np.zeros((n + 1, n + 1), dtype=complex)
    aug[:n, :n] = S
    aug[:n, n] = 1.0
    aug[n, :n] = h
    rhs = np.zeros(n + 1, dtype=complex)
    rhs[:M] = 1.0
    psi = np.linalg.solve(aug, rhs)[:n]
    C11 = -_disk_integrals(cfg, psi, M)[0]
    _, _, pts = _nodes(cfg, M)
    y = np.concatenate(pts)
    c = h * (y * psi[:, None]).sum(0)
    return float(C11.real), float(c[0].real), float(c[1].real)


def nystrom_capacitance_quasi(cfg: MetascreenConfig, alpha: float, M: int = 512) -> np.ndarray:
    S = nystrom_oracle_single_layer(cfg, alpha, 0.0, M, kind="quasi").entries
    chi = np.zeros((2 * M, 2), dtype=complex)
    chi[:M, 0] = 1.0
    chi[M:, 1] = 1.0
    psi = np.linalg.solve(S, chi)
    return -np.stack([_disk_integrals(cfg, psi[:, j], M) for j in range(2)], axis=1)


def nystrom_scattering(cfg: MetascreenConfig, incidence: Incidence, delta: float, omega: float,
                       M: int = 512) -> tuple[complex, complex]:
    """``(r, t)`` from a full Nystrom solve of the transmission problem."""
    alpha = omega * incidence.alpha0
    S_in, K_in = _assemble(cfg, "free", None, omega / cfg.v_b, M, True)
    S_out, K_out = _assemble(cfg, "quasi", alpha, omega, M, True)
    I = np.eye(2 * M)
    interior = np.linalg.solve(S_in.T, (K_in - 0.5 * I).T).T
    exterior = np.linalg.solve(S_out.T, (K_out + 0.5 * I).T).T
    A = interior - delta * exterior
    _, e, pts = _nodes(cfg, M)
    y = np.concatenate(pts)
    nu = np.concatenate([e, e])
    kp, km = incidence.wavevectors(omega)
    u = np.exp(1j * y @ kp)
    du = 1j * (nu @ kp) * u
    F = delta * du - interior @ u
    eta = np.linalg.solve(A, F)
    psi = np.linalg.solve(S_out, eta)
    h = 2 * np.pi / M * cfg.R_D
    scale = 1 / (2j * omega * incidence.w_perp * cfg.L)
    up = scale * h * np.sum(np.exp(-1j * y @ kp) * psi)
    down = scale * h * np.sum(np.exp(-1j * y @ km) * psi)
    return down, 1 + up
