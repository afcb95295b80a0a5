"""Plane-wave scattering by the dimer screen.

The scattered field outside the disks is the quasiperiodic single layer of
a density ``psi`` and the field inside is the interior single layer.  With
``eta = S_out psi`` the transmission conditions reduce to
``A^omega eta = F[u_in]``.  Only the zeroth diffraction order propagates in
the first continuum, so

    t = 1 + (1 / (2 i k3 L)) int exp(-i k_+ . y) psi(y) dsigma(y),
    r =     (1 / (2 i k3 L)) int exp(-i k_- . y) psi(y) dsigma(y),

with ``k3 = omega w_perp``.  The field above the screen is ``t exp(i k_+ . x)``
and below it ``exp(i k_+ . x) + r exp(i k_- . x)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .capacitance import c1_matrix, periodic_data
from .geometry import Incidence, MetascreenConfig
from .layer_ops import (
    assemble_rhs,
    assemble_system,
    flip_x1_map,
    plane_wave_coefficients,
    plane_wave_integrals,
    split,
)
from .lattice_green import regime_classify
from .resonance import (
    ResonanceError,
    res0_asymptotic,
    resonance_mode,
    resonance_muller,
)

J = np.array([[1.0, 1.0], [1.0, 1.0]])
K = np.array([[1.0, -1.0], [-1.0, 1.0]])
C_PERP_MIN = 1e-9


@dataclass(frozen=True)
class ScatteringResult:
    omega: float
    r: complex
    t: complex
    method: str
    residual: float = 0.0

    @property
    def T(self) -> float:
        return abs(self.t) ** 2

    @property
    def R(self) -> float:
        return abs(self.r) ** 2

    @property
    def S(self) -> np.ndarray:
        return np.array([[self.r, self.t], [self.t, self.r]])


def _check_regime(cfg, incidence, omega):
    if omega <= 0:
        raise ValueError("omega must be positive")
    regime = regime_classify(omega * incidence.alpha0, omega, cfg.L)
    if regime != "first-continuum":
        raise ValueError(f"omega={omega} is not in the first radiation continuum ({regime})")


def radiation_amplitudes(cfg, incidence, omega, psi, N):
    """Up- and downgoing zeroth-order amplitudes of the single layer of ``psi``."""
    kp, km = incidence.wavevectors(omega)
    k3 = omega * incidence.w_perp
    scale = 1 / (2j * k3 * cfg.L)
    return scale * plane_wave_integrals(cfg, psi, kp, N), scale * plane_wave_integrals(cfg, psi, km, N)


def solve_scattering(cfg: MetascreenConfig, incidence: Incidence, delta: float, omega: float,
                     N: int = 6) -> ScatteringResult:
    """Reflection and transmission coefficients from the full boundary integral solve."""
    _check_regime(cfg, incidence, omega)
    system = assemble_system(cfg, delta, omega, N, incidence=incidence)
    F = assemble_rhs(cfg, incidence, delta, omega, N, system=system)
    A = system.A
    eta = np.linalg.solve(A, F)
    residual = float(np.linalg.norm(A @ eta - F) / np.linalg.norm(F))
    psi = np.linalg.solve(system.S_out, eta)
    up, down = radiation_amplitudes(cfg, incidence, omega, psi, N)
    return ScatteringResult(omega, down, 1 + up, "numeric", residual)


def smatrix_asymptotic(cfg: MetascreenConfig, incidence: Incidence, delta: float, omega: float,
                       one_resonance: bool = False) -> ScatteringResult:
    """Two-resonance asymptotic scattering matrix.

    ``one_resonance=True`` keeps only the broad resonance and the identity,
    which is the comparison used when the sharp resonance decouples.
    """
    pair = res0_asymptotic(cfg, incidence, delta)
    w1, w2 = pair.omega1, pair.omega2
    S = w1 / (w1 - omega) * J - np.eye(2)
    if not one_resonance:
        if abs(periodic_data(cfg).c_perp) < C_PERP_MIN:
            raise ValueError("c_perp = 0: the sharp resonance decouples, use bic_check")
        S = S + 2j * omega * w2.imag / (w2**2 - omega**2) * K
    return ScatteringResult(omega, S[0, 0], S[0, 1], "asymptotic")


def solve_q(cfg: MetascreenConfig, incidence: Incidence, delta: float, omega: float, N: int = 6):
    """Mode amplitudes ``q`` of the capacitance system and the numeric forcing ``p``.

    ``p_i = int_{dD_i} (S^{omega alpha0, omega})^{-1}[u_in]`` and ``q`` solves
    ``(C^0 + omega C^1 - omega^2 |D1| / (delta v_b^2)) q = -p``.
    """
    _check_regime(cfg, incidence, omega)
    system = assemble_system(cfg, delta, omega, N, incidence=incidence)
    kp, _ = incidence.wavevectors(omega)
    u = plane_wave_coefficients(cfg, kp, N)
    phi = np.linalg.solve(system.S_out, u)
    a1, a2 = split(phi, N)
    p = 2 * np.pi * cfg.R_D * np.array([a1[N], a2[N]])
    data = periodic_data(cfg)
    M = data.C0 + omega * c1_matrix(cfg, incidence, data=data) \
        - omega**2 * cfg.area / (delta * cfg.v_b**2) * np.eye(2)
    if np.linalg.cond(M) > 1e12:
        raise ValueError("capacitance system is singular at this frequency")
    q = np.linalg.solve(M, -p)
    return q, p


def uin_normalization(cfg: MetascreenConfig, incidence: Incidence, omega: float, N: int = 6) -> complex:
    """Radiation quadrature of ``(S^{omega alpha0, omega})^{-1}[u_in]``; equals ``1 + O(omega)``."""
    system = assemble_system(cfg, 0.5, omega, N, incidence=incidence)
    kp, _ = incidence.wavevectors(omega)
    phi = np.linalg.solve(system.S_out, plane_wave_coefficients(cfg, kp, N))
    return radiation_amplitudes(cfg, incidence, omega, phi, N)[0]


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------
@dataclass
class SpectrumRow:
    omega: float
    T_num: float
    R_num: float
    T_asym: float
    R_asym: float
    t: complex
    r: complex
    residual: float
    ok: bool = True
    message: str = ""


@dataclass
class Spectrum:
    rows: list
    omega2: complex | None = None
    omega_star: float | None = None
    features: dict = field(default_factory=dict)

    def column(self, name):
        return np.array([getattr(row, name) for row in self.rows])

    @property
    def failed(self) -> int:
        return sum(not row.ok for row in self.rows)


def _row(cfg, incidence, delta, omega, N):
    try:
        asym = smatrix_asymptotic(cfg, incidence, delta, omega,
                                  one_resonance=abs(periodic_data(cfg).c_perp) < C_PERP_MIN)
        Ta, Ra = asym.T, asym.R
    except Exception:
        Ta = Ra = math.nan
    try:
        res = solve_scattering(cfg, incidence, delta, omega, N)
        return SpectrumRow(omega, res.T, res.R, Ta, Ra, res.t, res.r, res.residual)
    except Exception as exc:
        return SpectrumRow(omega, math.nan, math.nan, Ta, Ra, math.nan, math.nan, math.nan,
                           ok=False, message=str(exc))


def sharp_resonance(cfg: MetascreenConfig, incidence: Incidence, delta: float, N: int = 6):
    """Numeric ``omega2`` and the Fano offset ``omega* = Re w2 Im w2 / Im w1``."""
    asym = res0_asymptotic(cfg, incidence, delta)
    w2 = asym.omega2
    try:
        w2, _ = resonance_muller(cfg, delta, asym.omega2, N, incidence=incidence)
    except ResonanceError:
        pass
    w_star = w2.real * w2.imag / asym.omega1.imag
    return w2, w_star


def spectrum_sweep(cfg: MetascreenConfig, incidence: Incidence, delta: float, omega_grid,
                   N: int = 6, refine: int = 40, workers: int = 1) -> Spectrum:
    """Numeric and asymptotic ``T``, ``R`` over a frequency grid.

    ``refine`` extra points are placed within ``5 omega*`` of the sharp
    resonance (located by Muller), clustered on the scale ``|Im omega2|`` of
    its peak; failing that, they go around the steepest jump of the numeric
    transmittance.
    """
    grid = sorted(float(w) for w in omega_grid)

    def run(ws):
        if workers <= 1:
            return [_row(cfg, incidence, delta, w, N) for w in ws]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda w: _row(cfg, incidence, delta, w, N), ws))

    rows = run(grid)
    w2, w_star = sharp_resonance(cfg, incidence, delta, N)
    extra = []
    if refine:
        half = 5 * abs(w_star)
        if half > 0 and abs(w2.imag) > 0 and grid[0] < w2.real < grid[-1]:
            # dense near the Lorentzian peak of width |Im w2|, reaching out to +/- 5 omega*
            phi_max = math.atan(half / abs(w2.imag))
            phi = np.linspace(-phi_max, phi_max, refine)
            extra = w2.real + abs(w2.imag) * np.tan(phi)
        else:
            T = np.array([row.T_num for row in rows])
            jumps = np.abs(np.diff(T))
            if len(jumps) and np.nanmax(jumps) > 0.05:
                i = int(np.nanargmax(jumps))
                lo, hi = grid[max(i - 1, 0)], grid[min(i + 2, len(grid) - 1)]
                extra = np.linspace(lo, hi, refine + 2)[1:-1]
    extra = [float(w) for w in extra if w > 0 and float(w) not in set(grid)]
    rows = sorted(rows + run(extra), key=lambda row: row.omega)
    spec = Spectrum(rows, w2, w_star)
    T = spec.column("T_num")
    if np.any(np.isfinite(T)):
        spec.features = {"T_min_omega": float(spec.column("omega")[np.nanargmin(T)]),
                         "T_min": float(np.nanmin(T))}
    return spec


# ---------------------------------------------------------------------------
# bound state in the continuum
# ---------------------------------------------------------------------------
def boundary_norm(cfg: MetascreenConfig, coeffs) -> float:
    return float(math.sqrt(2 * np.pi * cfg.R_D * np.vdot(coeffs, coeffs).real))


def mode_far_field(cfg: MetascreenConfig, incidence: Incidence, delta: float, omega: complex,
                   N: int = 6) -> float:
    """Normalized radiated amplitude of the resonant mode at ``omega``.

    ``max_+- |int exp(-i k_+- . y) psi| / (|dD|^{1/2} ||psi||)``, which is at
    most 1 by Cauchy-Schwarz and vanishes for a non-radiating mode.
    """
    eta = resonance_mode(cfg, delta, omega, N, incidence=incidence)
    system = assemble_system(cfg, delta, omega, N, incidence=incidence)
    psi = np.linalg.solve(system.S_out, eta)
    kp, km = incidence.wavevectors(omega.real)
    amp = max(abs(plane_wave_integrals(cfg, psi, kp, N)), abs(plane_wave_integrals(cfg, psi, km, N)))
    perimeter = 4 * np.pi * cfg.R_D
    return float(amp / (math.sqrt(perimeter) * boundary_norm(cfg, psi)))


@dataclass
class BICReport:
    omega2: complex
    imag_ok: bool
    far_field: float
    far_field_ok: bool
    max_deviation: float
    deviation_ok: bool
    parity_error: float
    parity_ok: bool
    scan_theta: list = field(default_factory=list)
    scan_amplitude: list = field(default_factory=list)
    scan_r2: float = math.nan
    scan_ok: bool = False

    @property
    def passed(self) -> bool:
        return self.imag_ok and self.far_field_ok and self.deviation_ok and self.parity_ok


def linear_fit_r2(x, y) -> tuple[float, float, float]:
    """Least-squares line ``y = a x + b``; returns ``(a, b, R^2)``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    a, b = np.polyfit(x, y, 1)
    ss_res = np.sum((y - (a * x + b)) ** 2)
    ss_tot = np.sum((y - y.mean()) ** 2)
    return float(a), float(b), float(1 - ss_res / ss_tot)


def bic_check(cfg: MetascreenConfig, delta: float, N: int = 6, n_spectrum: int = 41,
              scan=(1e-3 * math.pi, 2e-3 * math.pi, 4e-3 * math.pi)) -> BICReport:
    """Non-radiation and non-excitation checks for the symmetric dimer at normal incidence."""
    if cfg.theta != 0:
        raise ValueError("bic_check requires theta = 0")
    incidence = Incidence(0.0)
    asym = res0_asymptotic(cfg, incidence, delta)
    w2, _ = resonance_muller(cfg, delta, asym.omega2, N, incidence=incidence)
    far = mode_far_field(cfg, incidence, delta, w2, N)

    eta = resonance_mode(cfg, delta, w2, N, incidence=incidence)
    parity = float(np.linalg.norm(flip_x1_map(N) @ eta + eta) / np.linalg.norm(eta))

    half = 0.05 * w2.real
    ws = np.linspace(w2.real - half, w2.real + half, n_spectrum + 1)
    ws = 0.5 * (ws[1:] + ws[:-1])  # stay off the real characteristic value itself
    dev = 0.0
    for w in ws:
        num = solve_scattering(cfg, incidence, delta, float(w), N)
        one = smatrix_asymptotic(cfg, incidence, delta, float(w), one_resonance=True)
        dev = max(dev, abs(num.T - one.T))

    amps = []
    for th in scan:
        c = cfg.replace(theta=th)
        a = res0_asymptotic(c, incidence, delta)
        w, _ = resonance_muller(c, delta, a.omega2, N, incidence=incidence)
        amps.append(mode_far_field(c, incidence, delta, w, N))
    _, _, r2 = linear_fit_r2(scan, amps)

    return BICReport(w2, abs(w2.imag) < 1e-8, far, far < 1e-6, dev, dev < 5 * math.sqrt(delta),
                     parity, parity < 1e-8, list(scan), amps, r2, r2 > 0.99)
