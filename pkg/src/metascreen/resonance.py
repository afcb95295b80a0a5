"""Subwavelength resonant frequencies of the dimer screen.

Resonances are the complex frequencies at which ``A^omega`` has a kernel.
Leading-order values come from the capacitance formulation; the full
boundary-integral roots are found by Muller's method on the eigenvalue of
``A^omega`` closest to zero, which is analytic in omega near a simple root
(the smallest singular value is not, which slows secant-type iterations).

Two settings are supported: a fixed real quasimomentum ``alpha`` (band
structure) and the scattering setting in which ``alpha = omega * alpha0``
follows the frequency along a fixed incidence direction.
"""
from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .capacitance import capacitance_quasi, periodic_data
from .geometry import Incidence, MetascreenConfig
from .layer_ops import assemble_system, indicator
from .lattice_green import regime_classify

WINDOW_K = 3.0
ALPHA_MIN = 1e-3


class ResonanceError(RuntimeError):
    """Muller iteration failed or left the subwavelength window."""


@dataclass(frozen=True)
class ResonancePair:
    omega1: complex
    omega2: complex
    method: str
    delta: float
    alpha: float | None = None
    alpha0: float | None = None
    iterations: tuple[int, int] = (0, 0)
    residual: tuple[float, float] = (0.0, 0.0)
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class BandPoint:
    alpha: float
    omega1: float
    omega2: float
    regime: str
    imag1: float = 0.0
    imag2: float = 0.0
    ok: bool = True
    message: str = ""

    @property
    def continuum_boundary(self) -> float:
        return abs(self.alpha)


def subwavelength_scale(cfg: MetascreenConfig, delta: float) -> float:
    """Natural size ``v_b sqrt(delta / |D1|)`` of subwavelength frequencies."""
    return cfg.v_b * math.sqrt(delta / cfg.area)


# ---------------------------------------------------------------------------
# asymptotics
# ---------------------------------------------------------------------------
def band_asymptotic(cfg: MetascreenConfig, delta: float, alpha: float, N: int = 8):
    """Leading-order band frequencies ``v_b sqrt(delta lambda_i / |D1|)``, ascending."""
    if abs(alpha) < ALPHA_MIN:
        raise ValueError("alpha too close to 0; use res0_asymptotic")
    _, lam = capacitance_quasi(cfg, alpha, N)
    lam = np.clip(lam, 0.0, None)
    w = cfg.v_b * np.sqrt(delta * lam / cfg.area)
    return float(w[0]), float(w[1])


def res0_asymptotic(cfg: MetascreenConfig, incidence: Incidence, delta: float,
                    N: int = 8) -> ResonancePair:
    """Leading-order resonances for quasimomentum slaved to the frequency."""
    data = periodic_data(cfg, N)
    vb2, A, L, w = cfg.v_b**2, cfg.area, cfg.L, incidence.w_perp
    om1 = -1j * delta * vb2 * w * L / A
    om2 = math.sqrt(2 * delta * vb2 * data.C11_0 / A) - 1j * delta * vb2 * w * data.c_perp**2 / (2 * A * L)
    return ResonancePair(om1, om2, "asymptotic", delta, alpha0=incidence.alpha0)


# ---------------------------------------------------------------------------
# characteristic values
# ---------------------------------------------------------------------------
def characteristic_matrix(cfg, delta, omega, N=6, incidence=None, alpha=None):
    return assemble_system(cfg, delta, omega, N, incidence=incidence, alpha=alpha).A


def smallest_eigenvalue(A: np.ndarray) -> complex:
    lam = np.linalg.eigvals(A)
    return complex(lam[np.argmin(np.abs(lam))])


def _muller(f, x0, x1, x2, tol, maxiter):
    f0, f1, f2 = f(x0), f(x1), f(x2)
    for it in range(1, maxiter + 1):
        h1, h2 = x1 - x0, x2 - x1
        d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        disc = cmath.sqrt(b * b - 4 * f2 * a)
        den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
        step = -2 * f2 / den if den != 0 else -f2 / (d2 if d2 != 0 else 1.0)
        x3 = x2 + step
        yield it, x3, abs(step)
        if abs(step) < tol:
            return
        x0, x1, x2 = x1, x2, x3
        f0, f1 = f1, f2
        f2 = f(x3)


def resonance_muller(cfg: MetascreenConfig, delta: float, guess: complex, N: int = 6,
                     incidence: Incidence | None = None, alpha: float | None = None,
                     tol: float = 1e-10, maxiter: int = 50, window_K: float = WINDOW_K):
    """Characteristic value of ``A^omega`` near ``guess``.

    Returns ``(omega, info)`` where ``info`` holds the iteration count, the
    smallest singular value and its ratio to ``||A||``.
    """
    guess = complex(guess)
    radius = window_K * subwavelength_scale(cfg, delta)
    slaved = incidence is not None and incidence.alpha0 != 0

    def f(om):
        if abs(om) > radius:
            raise ResonanceError(f"iterate {om} left the subwavelength window |omega| <= {radius:.4g}")
        if slaved and abs(om.imag) > 0.2 * abs(om.real):
            raise ResonanceError(f"iterate {om} outside the continuation guard |Im| < 0.2 |Re|")
        return smallest_eigenvalue(characteristic_matrix(cfg, delta, om, N, incidence, alpha))

    h = 1e-3 * abs(guess)
    pts = (guess - h, guess + 0.5j * h, guess)
    omega = guess
    converged = False
    iterations = 0
    for iterations, omega, step in _muller(f, *pts, tol=tol, maxiter=maxiter):
        if step < tol:
            converged = True
    if not converged:
        raise ResonanceError(f"Muller did not converge in {maxiter} iterations")
    A = characteristic_matrix(cfg, delta, omega, N, incidence, alpha)
    sv = np.linalg.svd(A, compute_uv=False)
    info = {"iterations": iterations, "sigma_min": float(sv[-1]),
            "relative_residual": float(sv[-1] / sv[0])}
    if info["relative_residual"] > 1e-8:
        raise ResonanceError(f"root residual too large: {info['relative_residual']:.3g}")
    return omega, info


def resonances_slaved(cfg: MetascreenConfig, incidence: Incidence, delta: float, N: int = 6,
                      tol: float = 1e-10) -> ResonancePair:
    """Both subwavelength resonances for the scattering setting, seeded asymptotically.

    For oblique incidence the broad root ``omega1`` is nearly imaginary and lies
    outside the continuation guard; it is then reported from the asymptotic
    formula, ``method`` becomes ``'mixed'`` and ``notes`` says so.
    """
    asym = res0_asymptotic(cfg, incidence, delta)
    notes = []
    try:
        w1, i1 = resonance_muller(cfg, delta, asym.omega1, N, incidence=incidence, tol=tol)
    except ResonanceError as exc:
        if incidence.alpha0 == 0:
            raise
        w1, i1 = asym.omega1, {"iterations": 0, "relative_residual": math.nan}
        notes.append(f"omega1 from asymptotics: {exc}")
    w2, i2 = resonance_muller(cfg, delta, asym.omega2, N, incidence=incidence, tol=tol)
    return ResonancePair(w1, w2, "mixed" if notes else "muller", delta, alpha0=incidence.alpha0,
                         iterations=(i1["iterations"], i2["iterations"]),
                         residual=(i1["relative_residual"], i2["relative_residual"]),
                         notes=tuple(notes))


def resonance_mode(cfg, delta, omega, N=6, incidence=None, alpha=None) -> np.ndarray:
    """Unit-norm right singular vector of ``A^omega`` for its smallest singular value."""
    A = characteristic_matrix(cfg, delta, omega, N, incidence, alpha)
    _, _, vh = np.linalg.svd(A)
    return vh[-1].conj()


def mode_projections(eta: np.ndarray, N: int) -> tuple[float, float]:
    """Fractions of ``|eta|^2`` along the mode-0 directions ``(1, 1)`` and ``(1, -1)``."""
    e1, e2 = indicator(1, N), indicator(2, N)
    sym = (e1 + e2) / math.sqrt(2)
    anti = (e1 - e2) / math.sqrt(2)
    nrm = np.vdot(eta, eta).real
    return abs(np.vdot(sym, eta)) ** 2 / nrm, abs(np.vdot(anti, eta)) ** 2 / nrm


# ---------------------------------------------------------------------------
# root counting
# ---------------------------------------------------------------------------
def sector_contour(radius: float, inner: float, lower: float = -math.pi / 2 - 0.1,
                   upper: float = 0.1, n_arc: int = 96, n_ray: int = 48) -> np.ndarray:
    """Counterclockwise boundary of ``{inner < |w| < radius, lower < arg w < upper}``."""
    a_out = np.linspace(lower, upper, n_arc)
    r_in = np.geomspace(radius, inner, n_ray)
    a_in = np.linspace(upper, lower, max(n_arc // 4, 16))
    r_out = np.geomspace(inner, radius, n_ray)
    path = np.concatenate([
        radius * np.exp(1j * a_out),
        r_in[1:] * np.exp(1j * upper),
        inner * np.exp(1j * a_in[1:]),
        r_out[1:] * np.exp(1j * lower),
    ])
    return path


def winding_number(func, contour: np.ndarray, max_jump: float = 0.5, max_depth: int = 8) -> float:
    """Total phase change of ``func`` along a closed polyline, divided by ``2 pi``.

    Segments whose phase increment exceeds ``max_jump`` radians are bisected.
    """
    cache = {}

    def phase(z):
        if z not in cache:
            cache[z] = func(z)
        return cache[z]

    def seg(a, b, pa, pb, depth):
        d = cmath.phase(pb / pa)
        if abs(d) <= max_jump or depth >= max_depth:
            return d
        m = 0.5 * (a + b)
        pm = phase(m)
        return seg(a, m, pa, pm, depth + 1) + seg(m, b, pm, pb, depth + 1)

    pts = list(contour) + [contour[0]]
    vals = [phase(z) for z in pts]
    total = sum(seg(pts[i], pts[i + 1], vals[i], vals[i + 1], 0) for i in range(len(pts) - 1))
    return total / (2 * math.pi)


def det_phase(cfg, delta, N=4, incidence=None, alpha=None):
    """Unit complex number ``det A^omega / |det A^omega|`` as a function of omega."""
    def f(om):
        sign, _ = np.linalg.slogdet(characteristic_matrix(cfg, delta, complex(om), N, incidence, alpha))
        return complex(sign)
    return f


def count_resonances(cfg: MetascreenConfig, incidence: Incidence, delta: float, N: int = 4,
                     K: float = 2.5) -> float:
    """Winding number of ``det A^omega`` around the lower-right sector of radius
    ``K v_b sqrt(delta/|D1|)``, indented around the origin.

    The sector spares the mirror roots ``-conj(omega)`` of the left half-plane.
    """
    radius = K * subwavelength_scale(cfg, delta)
    inner = 0.25 * delta * cfg.v_b**2 * incidence.w_perp * cfg.L / cfg.area
    contour = sector_contour(radius, inner)
    return winding_number(det_phase(cfg, delta, N, incidence=incidence), contour)


# ---------------------------------------------------------------------------
# band structure
# ---------------------------------------------------------------------------
def band_point(cfg: MetascreenConfig, delta: float, alpha: float, N: int = 6) -> BandPoint:
    regime = "subcritical"
    try:
        seeds = band_asymptotic(cfg, delta, alpha)
        roots = [resonance_muller(cfg, delta, s, N, alpha=alpha)[0] for s in seeds]
        r1, r2 = sorted(roots, key=lambda z: z.real)
        regime = regime_classify(alpha, r2.real, cfg.L)
        return BandPoint(alpha, r1.real, r2.real, regime, r1.imag, r2.imag)
    except Exception as exc:  # recorded, the sweep continues
        return BandPoint(alpha, math.nan, math.nan, regime, ok=False, message=str(exc))


def band_sweep(cfg: MetascreenConfig, delta: float, alpha_grid, N: int = 6,
               workers: int = 1) -> list[BandPoint]:
    """Band functions over a quasimomentum grid, in input order."""
    alphas = [float(a) for a in alpha_grid]
    if workers <= 1:
        return [band_point(cfg, delta, a, N) for a in alphas]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda a: band_point(cfg, delta, a, N), alphas))
