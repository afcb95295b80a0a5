"""Layer potentials on the dimer boundary in a per-disk Fourier basis.

A boundary density is stored as ``2 (2N+1)`` complex coefficients: the modes
``-N..N`` of disk 1 followed by those of disk 2, with
``phi(c_j + R e(t)) = sum_n a^{(j)}_n exp(i n t)``.  Operators act on these
coefficient vectors; an entry ``(m, n)`` is the ``m``-th Fourier coefficient
of the operator applied to ``exp(i n t)``.  In this basis the arc-length
inner product is ``2 pi R`` times the Euclidean one, so self-adjoint
operators are Hermitian matrices.

Self-disk blocks split the kernel into the free-space part, diagonal in the
Fourier basis by Graf's addition theorem, and the smooth lattice remainder.
Everything smooth is integrated by the tensor trapezoid rule, which is
spectrally accurate for periodic integrands.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import h1vp, hankel1, jv, jvp

from .geometry import Incidence, MetascreenConfig, disk_centers
from .lattice_green import (
    greens_free,
    greens_free_gradient,
    greens_periodic_static,
    periodic_static_remainder,
    greens_quasi_ewald,
    lattice_remainder,
)

OMEGA_FLOOR = 1e-3
COND_LIMIT = 1e12


class IllConditionedError(RuntimeError):
    pass


@dataclass(frozen=True)
class OperatorMatrix:
    entries: np.ndarray
    N: int
    kind: str
    params: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.entries.shape

    def __matmul__(self, other):
        return self.entries @ np.asarray(other)


def modes(N: int) -> np.ndarray:
    return np.arange(-N, N + 1)


def basis_size(N: int) -> int:
    return 2 * (2 * N + 1)


def quadrature_order(N: int) -> int:
    return 4 * N + 16


def indicator(disk: int, N: int) -> np.ndarray:
    """Coefficients of the characteristic function of ``boundary(D_disk)``."""
    v = np.zeros(basis_size(N), dtype=complex)
    v[(disk - 1) * (2 * N + 1) + N] = 1.0
    return v


def split(coeffs, N: int):
    c = np.asarray(coeffs)
    return c[: 2 * N + 1], c[2 * N + 1 :]


def boundary_integrals(cfg: MetascreenConfig, coeffs, N: int) -> np.ndarray:
    """``(int_{dD_1} phi, int_{dD_2} phi)``."""
    a1, a2 = split(coeffs, N)
    return 2 * np.pi * cfg.R_D * np.array([a1[N], a2[N]])


def synthesize(coeffs, N: int, t) -> tuple[np.ndarray, np.ndarray]:
    """Point values of a density on both disks at angles ``t``."""
    E = np.exp(1j * np.outer(t, modes(N)))
    a1, a2 = split(coeffs, N)
    return E @ a1, E @ a2


def analyze(values1, values2, N: int) -> np.ndarray:
    """Fourier coefficients from equispaced samples on both disks."""
    M = len(values1)
    t = 2 * np.pi * np.arange(M) / M
    F = np.exp(-1j * np.outer(modes(N), t)) / M
    return np.concatenate([F @ values1, F @ values2])


def inversion_map(N: int) -> np.ndarray:
    """Matrix of ``phi -> phi(-x)`` in the coefficient basis.

    The point reflection swaps the disks and shifts the angle by ``pi``,
    so mode ``n`` picks up ``(-1)^n``.
    """
    n = 2 * N + 1
    sign = np.diag((-1.0) ** modes(N))
    P = np.zeros((2 * n, 2 * n))
    P[:n, n:] = sign
    P[n:, :n] = sign
    return P


def flip_x1_map(N: int) -> np.ndarray:
    """Matrix of ``phi -> phi(-x1, x2)``; carries the dimer at angle theta to the one at -theta."""
    n = 2 * N + 1
    sign = np.diag((-1.0) ** modes(N))
    R = sign[:, ::-1]  # a_n -> (-1)^n a_{-n}
    P = np.zeros((2 * n, 2 * n))
    P[:n, n:] = R
    P[n:, :n] = R
    return P


# ---------------------------------------------------------------------------
# analytic single-disk parts
# ---------------------------------------------------------------------------
def _disk_single_layer_diag(k, R, N):
    n = modes(N)
    if k == 0:
        out = np.where(n == 0, R * math.log(R), -R / (2 * np.maximum(np.abs(n), 1)))
        return out.astype(complex)
    z = complex(k) * R
    return -0.5j * np.pi * R * jv(n, z) * hankel1(n, z)


def _disk_np_diag(k, R, N):
    n = modes(N)
    if k == 0:
        return np.where(n == 0, 0.5, 0.0).astype(complex)
    k = complex(k)
    z = k * R
    return -0.25j * np.pi * k * R * (jv(n, z) * h1vp(n, z) + hankel1(n, z) * jvp(n, z))


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------
def _galerkin(K, N):
    """Fourier-project a nodal kernel matrix ``K[p, q]`` (weights included)."""
    M = K.shape[0]
    t = 2 * np.pi * np.arange(M) / M
    Fl = np.exp(-1j * np.outer(modes(N), t)) / M
    Fr = np.exp(1j * np.outer(t, modes(N)))
    return Fl @ K @ Fr


def _kernel_blocks(cfg, k, N, alpha, E, need_np):
    """Nodal kernel values for the smooth parts of every block.

    Returns dict with keys ``self``, ``12``, ``21`` holding ``(values,
    normal_derivatives)`` evaluated at ``x_i(t_p) - y_j(tau_q)``.
    """
    M = quadrature_order(N)
    R = cfg.R_D
    t = 2 * np.pi * np.arange(M) / M
    e = np.stack([np.cos(t), np.sin(t)], -1)
    rel = R * (e[:, None, :] - e[None, :, :])
    c1, c2 = disk_centers(cfg)
    out = {}
    quasi = alpha is not None

    def _eval(diff, smooth_self):
        if quasi and smooth_self:
            res = lattice_remainder(diff, alpha, k, E, cfg.L, gradient=need_np)
        elif quasi:
            res = greens_quasi_ewald(diff, alpha, k, E, cfg.L, gradient=need_np)
        elif smooth_self:
            res = (np.zeros(diff.shape[:-1], complex), np.zeros(diff.shape, complex))
            return res if need_np else res[0]
        else:
            v = greens_free(diff, k)
            res = (v, greens_free_gradient(diff, k)) if need_np else v
        return res

    for key, diff, smooth in (("self", rel, True), ("12", (c1 - c2) + rel, False),
                              ("21", (c2 - c1) + rel, False)):
        res = _eval(diff, smooth)
        if need_np:
            v, g = res
            dn = np.einsum("pqi,pi->pq", g, e)
        else:
            v, dn = res, None
        out[key] = (v, dn)
    return out


def _assemble(cfg, k, N, alpha=None, E=None, need_np=True):
    """Single layer and adjoint Neumann-Poincare matrices, free or quasiperiodic."""
    M = quadrature_order(N)
    R = cfg.R_D
    w = R * 2 * np.pi / M
    blocks = _kernel_blocks(cfg, k, N, alpha, E, need_np)
    n = 2 * N + 1
    S = np.zeros((2 * n, 2 * n), dtype=complex)
    K = np.zeros((2 * n, 2 * n), dtype=complex) if need_np else None
    sd = np.diag(_disk_single_layer_diag(k, R, N))
    self_S = sd + (_galerkin(blocks["self"][0] * w, N) if alpha is not None else 0)
    S[:n, :n] = self_S
    S[n:, n:] = self_S
    S[:n, n:] = _galerkin(blocks["12"][0] * w, N)
    S[n:, :n] = _galerkin(blocks["21"][0] * w, N)
    if need_np:
        kd = np.diag(_disk_np_diag(k, R, N))
        self_K = kd + (_galerkin(blocks["self"][1] * w, N) if alpha is not None else 0)
        K[:n, :n] = self_K
        K[n:, n:] = self_K
        K[:n, n:] = _galerkin(blocks["12"][1] * w, N)
        K[n:, :n] = _galerkin(blocks["21"][1] * w, N)
    return S, K


def assemble_single_layer_quasi(cfg: MetascreenConfig, alpha: float, k: complex, N: int = 6,
                                E: float | None = None) -> OperatorMatrix:
    S, _ = _assemble(cfg, k, N, alpha=alpha, E=E, need_np=False)
    return OperatorMatrix(S, N, "S_quasi", {"alpha": alpha, "k": k})


def assemble_single_layer_periodic(cfg: MetascreenConfig, N: int = 6,
                                   constant_shift: float = 0.0) -> OperatorMatrix:
    """Single layer with the static periodic kernel ``G^{0,0}`` (closed form).

    ``constant_shift`` adds a constant to the kernel; solves restricted to
    mean-zero densities do not see it.
    """
    M = quadrature_order(N)
    R = cfg.R_D
    w = R * 2 * np.pi / M
    t = 2 * np.pi * np.arange(M) / M
    e = np.stack([np.cos(t), np.sin(t)], -1)
    rel = R * (e[:, None, :] - e[None, :, :])
    c1, c2 = disk_centers(cfg)
    n = 2 * N + 1
    S = np.zeros((2 * n, 2 * n), dtype=complex)
    self_S = np.diag(_disk_single_layer_diag(0, R, N)) + _galerkin(
        (periodic_static_remainder(rel, cfg.L) + constant_shift) * w, N)
    S[:n, :n] = self_S
    S[n:, n:] = self_S
    S[:n, n:] = _galerkin((greens_periodic_static((c1 - c2) + rel, cfg.L) + constant_shift) * w, N)
    S[n:, :n] = _galerkin((greens_periodic_static((c2 - c1) + rel, cfg.L) + constant_shift) * w, N)
    return OperatorMatrix(S, N, "S_periodic", {"alpha": 0.0, "k": 0.0})


def assemble_single_layer_free(cfg: MetascreenConfig, k: complex, N: int = 6) -> OperatorMatrix:
    if k == 0:
        raise ValueError("the static free-space single layer is not assembled on its own")
    S, _ = _assemble(cfg, k, N, need_np=False)
    return OperatorMatrix(S, N, "S_free", {"k": k})


def assemble_neumann_poincare(cfg: MetascreenConfig, k: complex, N: int = 6,
                              alpha: float | None = None, E: float | None = None) -> OperatorMatrix:
    """Adjoint Neumann-Poincare operator; ``alpha=None`` selects free space."""
    _, K = _assemble(cfg, k, N, alpha=alpha, E=E)
    kind = "K_free" if alpha is None else "K_quasi"
    return OperatorMatrix(K, N, kind, {"alpha": alpha, "k": k})


def _right_solve(X, S):
    """``X S^{-1}`` through a linear solve."""
    return np.linalg.solve(S.T, X.T).T


def _check_cond(S, what):
    c = np.linalg.cond(S)
    if not np.isfinite(c) or c > COND_LIMIT:
        raise IllConditionedError(f"{what} is ill-conditioned (cond={c:.3g})")
    return c


@dataclass
class BoundarySystem:
    """Assembled operators of the boundary integral formulation at one frequency."""

    cfg: MetascreenConfig
    N: int
    omega: complex
    alpha: complex
    delta: float
    S_in: np.ndarray
    K_in: np.ndarray
    S_out: np.ndarray
    K_out: np.ndarray
    interior: np.ndarray   # (-1/2 I + K_in) S_in^{-1}
    exterior: np.ndarray   # (1/2 I + K_out) S_out^{-1}

    @property
    def A(self) -> np.ndarray:
        return self.interior - self.delta * self.exterior


def assemble_system(cfg: MetascreenConfig, delta: float, omega: complex, N: int = 6,
                    incidence: Incidence | None = None, alpha: float | None = None,
                    E: float | None = None) -> BoundarySystem:
    """Assemble all operators entering ``A^omega``.

    With ``incidence`` given, the quasimomentum is slaved to the frequency,
    ``alpha = omega * alpha0``; otherwise ``alpha`` is held fixed.
    """
    if abs(omega) < OMEGA_FLOOR:
        raise ValueError(f"|omega| < {OMEGA_FLOOR}: use the asymptotic formulas")
    if (incidence is None) == (alpha is None):
        raise ValueError("give exactly one of incidence or alpha")
    if incidence is not None:
        alpha = omega * incidence.alpha0
        if incidence.alpha0 == 0:
            alpha = 0.0
    kb = omega / cfg.v_b
    S_in, K_in = _assemble(cfg, kb, N)
    S_out, K_out = _assemble(cfg, omega, N, alpha=alpha, E=E)
    _check_cond(S_in, "interior single layer")
    _check_cond(S_out, "quasiperiodic single layer")
    eye = np.eye(basis_size(N))
    interior = _right_solve(K_in - 0.5 * eye, S_in)
    exterior = _right_solve(K_out + 0.5 * eye, S_out)
    return BoundarySystem(cfg, N, omega, alpha, delta, S_in, K_in, S_out, K_out, interior, exterior)


def assemble_A(cfg: MetascreenConfig, delta: float, omega: complex, N: int = 6,
               incidence: Incidence | None = None, alpha: float | None = None) -> OperatorMatrix:
    sysm = assemble_system(cfg, delta, omega, N, incidence=incidence, alpha=alpha)
    return OperatorMatrix(sysm.A, N, "A_omega",
                          {"omega": omega, "alpha": sysm.alpha, "delta": delta})


# ---------------------------------------------------------------------------
# plane waves
# ---------------------------------------------------------------------------
def plane_wave_coefficients(cfg: MetascreenConfig, kvec, N: int, derivative: bool = False):
    """Jacobi-Anger coefficients of ``exp(i k.x)`` (or its normal derivative).

    ``kvec = omega * w`` with ``w`` a real unit vector and ``omega`` possibly complex.
    """
    kvec = np.asarray(kvec, dtype=complex)
    omega = np.sqrt(kvec @ kvec)
    if omega == 0:
        raise ValueError("zero wave vector")
    # keep the sign of omega consistent with the real direction
    w = kvec / omega
    if np.any(np.abs(w.imag) > 1e-12):
        raise ValueError("plane wave direction must be real")
    w = w.real
    phi = math.atan2(w[1], w[0])
    n = modes(N)
    R = cfg.R_D
    radial = omega * jvp(n, omega * R) if derivative else jv(n, omega * R)
    base = (1j**n) * radial * np.exp(-1j * n * phi)
    out = []
    for c in disk_centers(cfg):
        out.append(np.exp(1j * (kvec @ c)) * base)
    coeffs = np.concatenate(out)
    if abs(coeffs[0]) > 1e-12 * max(1.0, np.max(np.abs(coeffs))):
        warnings.warn("plane-wave expansion truncated at |n|=N with non-negligible tail", stacklevel=2)
    return coeffs


def plane_wave_integrals(cfg: MetascreenConfig, coeffs, kvec, N: int) -> complex:
    """``int_{dD} exp(-i k.y) phi(y) dsigma(y)`` for a density given by coefficients."""
    kvec = np.asarray(kvec, dtype=complex)
    omega = np.sqrt(kvec @ kvec)
    w = (kvec / omega).real
    phi = math.atan2(w[1], w[0])
    n = modes(N)
    R = cfg.R_D
    kern = ((-1j) ** n) * jv(n, omega * R) * np.exp(1j * n * phi)
    total = 0j
    for c, a in zip(disk_centers(cfg), split(coeffs, N)):
        total += 2 * np.pi * R * np.exp(-1j * (kvec @ c)) * (kern @ a)
    return total


def assemble_rhs(cfg: MetascreenConfig, incidence: Incidence, delta: float, omega: complex,
                 N: int = 6, system: BoundarySystem | None = None) -> np.ndarray:
    """Coefficients of ``F[u_in] = delta du_in/dnu - (-1/2 I + K_in) S_in^{-1} u_in``."""
    if system is None:
        system = assemble_system(cfg, delta, omega, N, incidence=incidence)
    kp, _ = incidence.wavevectors(omega)
    u = plane_wave_coefficients(cfg, kp, N)
    du = plane_wave_coefficients(cfg, kp, N, derivative=True)
    return delta * du - system.interior @ u


# ---------------------------------------------------------------------------
# off-surface evaluation
# ---------------------------------------------------------------------------
def _disk_potential_free(a, N, R, k, r, theta, gradient):
    """Free-space single layer of one disk at polar points ``(r, theta)`` around its centre."""
    n = modes(N)
    out_side = r > R
    ph = np.exp(1j * np.outer(theta, n))
    if k == 0:
        nn = np.maximum(np.abs(n), 1)
        ratio_out = (R / r[:, None]) ** nn
        ratio_in = (r[:, None] / R) ** nn
        rad = np.where(out_side[:, None],
                       np.where(n == 0, R * np.log(r)[:, None], -R / (2 * nn) * ratio_out),
                       np.where(n == 0, R * math.log(R), -R / (2 * nn) * ratio_in))
        # d/dr of -(R/2n)(r/R)^n is -(1/2)(r/R)^{n-1}; of -(R/2n)(R/r)^n it is (1/2)(R/r)^{n+1}
        drad = np.where(out_side[:, None],
                        np.where(n == 0, (R / r)[:, None], 0.5 * (R / r[:, None]) ** (nn + 1)),
                        np.where(n == 0, 0.0, -0.5 * (r[:, None] / R) ** (nn - 1)))
        dtheta = rad * 1j * n
    else:
        k = complex(k)
        z = k * R
        zr = k * r[:, None]
        pre = -0.5j * np.pi * R
        rad = np.where(out_side[:, None], pre * jv(n, z) * hankel1(n, zr), pre * hankel1(n, z) * jv(n, zr))
        drad = np.where(out_side[:, None], pre * jv(n, z) * k * h1vp(n, zr), pre * hankel1(n, z) * k * jvp(n, zr))
        dtheta = rad * 1j * n
    val = (rad * ph) @ a
    if not gradient:
        return val, None
    dr = (drad * ph) @ a
    dt = (dtheta * ph) @ a / r
    g = np.stack([dr * np.cos(theta) - dt * np.sin(theta), dr * np.sin(theta) + dt * np.cos(theta)], -1)
    return val, g


def evaluate_single_layer(cfg: MetascreenConfig, coeffs, points, k: complex, N: int,
                          alpha: float | None = None, M: int = 256, gradient: bool = False,
                          E: float | None = None):
    """Single layer potential of a Fourier density at arbitrary points.

    Each disk's own free-space contribution uses the exact interior/exterior
    multipole expansion, so points arbitrarily close to a boundary are
    handled; the lattice remainder and the other disk are integrated by the
    trapezoid rule with ``M`` nodes.  Points are assumed to lie in the
    central cell near the dimer.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    R = cfg.R_D
    t = 2 * np.pi * np.arange(M) / M
    e = np.stack([np.cos(t), np.sin(t)], -1)
    w = R * 2 * np.pi / M
    dens = synthesize(coeffs, N, t)
    centers = disk_centers(cfg)
    val = np.zeros(len(pts), dtype=complex)
    grad = np.zeros((len(pts), 2), dtype=complex)
    for j, (c, a, phi) in enumerate(zip(centers, split(coeffs, N), dens)):
        rel = pts - c
        r = np.hypot(rel[:, 0], rel[:, 1])
        th = np.arctan2(rel[:, 1], rel[:, 0])
        v, g = _disk_potential_free(a, N, R, k, r, th, gradient)
        if alpha is not None:
            diff = rel[:, None, :] - R * e[None, :, :]
            res = lattice_remainder(diff, alpha, k, E, cfg.L, gradient=gradient)
            if gradient:
                rv, rg = res
                g = g + np.einsum("pqi,q->pi", rg, phi) * w
            else:
                rv = res
            v = v + rv @ phi * w
        val += v
        if gradient:
            grad += g
    if gradient:
        return val, grad
    return val
