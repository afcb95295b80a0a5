"""Green's functions of the 2D Helmholtz/Laplace operators for a 1D lattice.

Sign convention: every Green's function here solves ``(Delta + k^2) G = delta``
so the free-space kernel is ``-(i/4) H0(k|x|)`` and its static limit is
``(1/2pi) ln|x|``.  The quasiperiodic kernel sums the free kernel over the
source lattice ``{(mL, 0)}`` with Bloch phases ``exp(i alpha m L)``.

Three evaluators of the quasiperiodic kernel are provided:

* :func:`greens_quasi_spectral` - plane-wave (Rayleigh) series; converges
  exponentially for ``|x2| > 0`` and is the far-field workhorse.
* :func:`greens_quasi_ewald` - Ewald splitting into a spectral sum damped by
  complementary error functions plus a spatial sum of exponential
  integrals; valid everywhere off the source lattice.
* :func:`lattice_remainder` - ``G^{alpha,k} - G^k``, i.e. the kernel with the
  nearest source removed.  Smooth across the origin; used for on-surface
  quadrature.

Vertical wavenumbers ``gamma_q = sqrt(k^2 - (alpha + q)^2)`` are continued
analytically into complex ``k`` (see :func:`vertical_wavenumber`), which the
resonance search relies on.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcx, expn, hankel1

EULER_GAMMA = 0.5772156649015329
WOOD_GUARD = 1e-12


class WoodAnomalyError(ValueError):
    """Raised when a diffraction order grazes, ``k = |alpha + q|``."""


class SingularPointError(ValueError):
    """Raised when a kernel is evaluated on its source lattice."""


@dataclass(frozen=True)
class GreenEval:
    value: complex
    gradient: np.ndarray | None
    representation: str


def _split(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0], x[..., 1]


def vertical_wavenumber(beta, k):
    """Branch of ``sqrt(k^2 - beta^2)`` used by the lattice sums.

    For real ``k`` it is the outgoing/decaying choice: positive for
    propagating orders (``|beta| < k``), ``i sqrt(beta^2 - k^2)`` for
    evanescent ones.  For complex ``k`` the propagating form is written as
    ``k sqrt(1 - (beta/k)^2)`` which is analytic in ``k`` along ``beta = k*a0``
    with ``|a0| < 1`` (the fixed-incidence family), including negative and
    imaginary ``k``.
    """
    beta = np.asarray(beta, dtype=complex)
    k = complex(k)
    out = np.empty(np.broadcast(beta, k).shape, dtype=complex)
    prop = np.abs(beta) < abs(k)
    if np.any(prop):
        out[prop] = k * np.sqrt(1 - (beta[prop] / k) ** 2)
    ev = ~prop
    out[ev] = 1j * np.sqrt(beta[ev] ** 2 - k**2)
    if np.any(np.abs(out) < WOOD_GUARD):
        raise WoodAnomalyError(f"grazing diffraction order at k={k}")
    return out


def _check_real_wood(alpha, k, L, qs):
    if abs(complex(k).imag) > 0:
        return
    beta = alpha + 2 * np.pi * qs / L
    if np.any(np.abs(abs(complex(k).real) - np.abs(beta)) < WOOD_GUARD):
        raise WoodAnomalyError(f"k={k} collides with |alpha+q| (Wood anomaly)")


# ---------------------------------------------------------------------------
# free space
# ---------------------------------------------------------------------------
def greens_free(x, k: complex):
    """Outgoing fundamental solution ``-(i/4) H0(k|x|)``; ``(1/2pi) ln|x|`` for k=0."""
    x1, x2 = _split(x)
    r = np.hypot(x1, x2)
    if np.any(r == 0):
        raise SingularPointError("free-space Green's function is singular at x=0")
    if k == 0:
        return np.log(r) / (2 * np.pi)
    return -0.25j * hankel1(0, complex(k) * r)


def greens_free_gradient(x, k: complex):
    x1, x2 = _split(x)
    r = np.hypot(x1, x2)
    if np.any(r == 0):
        raise SingularPointError("free-space Green's function is singular at x=0")
    if k == 0:
        f = 1 / (2 * np.pi * r**2)
    else:
        k = complex(k)
        f = 0.25j * k * hankel1(1, k * r) / r
    return np.stack([f * x1, f * x2], axis=-1)


# ---------------------------------------------------------------------------
# spectral (Rayleigh) series
# ---------------------------------------------------------------------------
def greens_quasi_spectral(x, alpha: float, k: complex, Q: int = 60, L: float = 1.0,
                          gradient: bool = False):
    """Plane-wave expansion of the quasiperiodic Green's function.

    ``sum_q exp(i(alpha+q)x1) exp(i gamma_q |x2|) / (2 i L gamma_q)`` over
    ``q = 2 pi n / L``, ``|n| <= Q``.
    """
    x1, x2 = _split(x)
    if np.any(x2 == 0):
        raise ValueError("spectral representation needs |x2| > 0")
    if np.min(np.abs(x2)) < L / 10:
        warnings.warn("spectral series converges slowly for |x2| < L/10", stacklevel=2)
    n = np.arange(-Q, Q + 1)
    _check_real_wood(alpha, k, L, n)
    beta = alpha + 2 * np.pi * n / L
    gam = vertical_wavenumber(beta, k)
    ay = np.abs(x2)[..., None]
    term = np.exp(1j * beta * x1[..., None]) * np.exp(1j * gam * ay) / (2j * L * gam)
    val = term.sum(axis=-1)
    if not gradient:
        return val
    g1 = (1j * beta * term).sum(axis=-1)
    g2 = (1j * gam * term).sum(axis=-1) * np.sign(x2)
    return val, np.stack([g1, g2], axis=-1)


# ---------------------------------------------------------------------------
# Ewald splitting
# ---------------------------------------------------------------------------
U_CUT = 36.0


def default_ewald_parameter(L: float = 1.0) -> float:
    return 5.0 / L


def _series_coefficients(k: complex, E: float) -> np.ndarray:
    """``(k/2E)^{2j} / j!`` truncated once negligible."""
    z = (complex(k) / (2 * E)) ** 2
    coeffs = [1.0 + 0j]
    if z == 0:
        return np.array(coeffs)
    j = 0
    while True:
        j += 1
        c = coeffs[-1] * z / j
        coeffs.append(c)
        if abs(c) < 1e-18 or j > 80:
            break
    return np.array(coeffs)


def _expn_complex_safe(n, u):
    # scipy.special.expn needs n >= 0 and real u; E_0(u) = exp(-u)/u
    if n == 0:
        with np.errstate(divide="ignore"):
            return np.exp(-u) / u
    return expn(n, u)


def _ewald_spectral(x1, x2, alpha, k, E, L, gradient):
    qmax = int(math.ceil((13.0 * E + abs(complex(k)) + abs(alpha)) * L / (2 * np.pi))) + 1
    n = np.arange(-qmax, qmax + 1)
    _check_real_wood(alpha, k, L, n)
    beta = alpha + 2 * np.pi * n / L
    gl = -1j * vertical_wavenumber(beta, k)   # Re(gl) >= 0 on the real axis
    ay = np.abs(x2)[..., None]
    P = np.exp(-(gl / (2 * E)) ** 2 - (ay * E) ** 2)
    z1 = gl / (2 * E) + ay * E
    z2 = gl / (2 * E) - ay * E
    t1 = erfcx(z1) * P
    t2 = np.empty(np.broadcast(z2, P).shape, dtype=complex)
    pos = np.broadcast_to(z2.real >= 0, t2.shape)
    zb = np.broadcast_to(z2, t2.shape)
    Pb = np.broadcast_to(P, t2.shape)
    glb = np.broadcast_to(gl, t2.shape)
    ayb = np.broadcast_to(ay, t2.shape)
    t2[pos] = erfcx(zb[pos]) * Pb[pos]
    neg = ~pos
    t2[neg] = np.exp(-glb[neg] * ayb[neg]) * erfc(zb[neg])
    phase = np.exp(1j * beta * x1[..., None]) * (-0.25 / L)
    val = (phase * (t1 + t2) / gl).sum(axis=-1)
    if not gradient:
        return val, None
    g1 = (1j * beta * phase * (t1 + t2) / gl).sum(axis=-1)
    g2 = (phase * (t1 - t2)).sum(axis=-1) * np.sign(x2)
    return val, np.stack([g1, g2], axis=-1)


def _ewald_spatial_term(X, Y, coeffs, E, gradient):
    """Single image contribution ``-(1/4pi) sum_j c_j E_{j+1}(rho^2 E^2)``.

    Entries with ``rho^2 E^2 > U_CUT`` are below ``exp(-U_CUT)`` and skipped.
    """
    u = (X**2 + Y**2) * E**2
    val = np.zeros(np.shape(u), dtype=complex)
    grad = np.zeros(np.shape(u) + (2,), dtype=complex) if gradient else None
    near = u <= U_CUT
    if not np.any(near):
        return val, grad
    un = u[near]
    acc = np.zeros(un.shape, dtype=complex)
    for j, c in enumerate(coeffs):
        acc += c * expn(j + 1, un)
    val[near] = -acc / (4 * np.pi)
    if not gradient:
        return val, None
    s = np.zeros(un.shape, dtype=complex)
    for j, c in enumerate(coeffs):
        s += c * _expn_complex_safe(j, un)
    f = (E**2 / (2 * np.pi)) * s
    grad[near] = np.stack([f * np.broadcast_to(X, u.shape)[near],
                           f * np.broadcast_to(Y, u.shape)[near]], axis=-1)
    return val, grad


def _ewald_spatial(x1, x2, alpha, k, E, L, gradient, skip_origin=False):
    coeffs = _series_coefficients(k, E)
    ms = int(math.ceil(6.5 / (E * L))) + 2
    mc = np.rint(np.asarray(x1) / L)
    lo, hi = int(np.min(mc)) - ms, int(np.max(mc)) + ms
    val = np.zeros(np.shape(x1), dtype=complex)
    grad = np.zeros(np.shape(x1) + (2,), dtype=complex) if gradient else None
    for m in range(lo, hi + 1):
        if skip_origin and m == 0:
            continue
        ph = np.exp(1j * alpha * m * L)
        v, g = _ewald_spatial_term(x1 - m * L, x2, coeffs, E, gradient)
        val += ph * v
        if gradient:
            grad += ph * g
    return val, grad


def greens_quasi_ewald(x, alpha: float, k: complex, E: float | None = None, L: float = 1.0,
                       gradient: bool = False):
    """Ewald-summed quasiperiodic Green's function; valid off the source lattice."""
    if E is None:
        E = default_ewald_parameter(L)
    if not 2 / L <= E <= 8 / L:
        warnings.warn(f"Ewald parameter E={E} outside the tested range [2/L, 8/L]", stacklevel=2)
    x1, x2 = _split(x)
    m = np.rint(x1 / L)
    if np.any((np.abs(x1 - m * L) == 0) & (x2 == 0)):
        raise SingularPointError("quasiperiodic Green's function is singular on the lattice")
    v1, g1 = _ewald_spectral(x1, x2, alpha, k, E, L, gradient)
    v2, g2 = _ewald_spatial(x1, x2, alpha, k, E, L, gradient)
    if gradient:
        return v1 + v2, g1 + g2
    return v1 + v2


def _origin_image_minus_free(rho, k, E, gradient):
    """``h(rho) = (m=0 spatial Ewald term) - G^k`` and its radial derivative / rho.

    Both pieces share the logarithmic singularity, so ``h`` is smooth; the
    closed-form limit is used at ``rho = 0``.
    """
    coeffs = _series_coefficients(k, E)
    rho = np.asarray(rho, dtype=float)
    h = np.empty(rho.shape, dtype=complex)
    dh = np.zeros(rho.shape, dtype=complex) if gradient else None
    at0 = rho < 1e-10
    rr = rho[~at0]
    if rr.size:
        u = (rr * E) ** 2
        sp = np.zeros(rr.shape, dtype=complex)
        for j, c in enumerate(coeffs):
            sp += c * expn(j + 1, u)
        sp *= -1 / (4 * np.pi)
        if k == 0:
            free = np.log(rr) / (2 * np.pi)
        else:
            free = -0.25j * hankel1(0, complex(k) * rr)
        h[~at0] = sp - free
        if gradient:
            s = np.zeros(rr.shape, dtype=complex)
            for j, c in enumerate(coeffs):
                s += c * _expn_complex_safe(j, u)
            f = (E**2 / (2 * np.pi)) * s
            if k == 0:
                ff = 1 / (2 * np.pi * rr**2)
            else:
                ff = 0.25j * complex(k) * hankel1(1, complex(k) * rr) / rr
            dh[~at0] = f - ff
    if np.any(at0):
        if k == 0:
            h0 = EULER_GAMMA / (4 * np.pi) + math.log(E) / (2 * np.pi)
        else:
            tail = sum(c / j for j, c in enumerate(coeffs) if j > 0)
            h0 = (0.25j - EULER_GAMMA / (4 * np.pi)
                  + np.log(2 * E / complex(k)) / (2 * np.pi) - tail / (4 * np.pi))
        h[at0] = h0
    return h, dh


def lattice_remainder(x, alpha: float, k: complex, E: float | None = None, L: float = 1.0,
                      gradient: bool = False):
    """Smooth part ``G^{alpha,k}(x) - G^k(x)``, finite at ``x = 0``.

    Valid for ``x`` near the origin (``|x1| < L/2``); the removed free-space
    term is the source at the origin.
    """
    if E is None:
        E = default_ewald_parameter(L)
    x1, x2 = _split(x)
    v1, g1 = _ewald_spectral(x1, x2, alpha, k, E, L, gradient)
    v2, g2 = _ewald_spatial(x1, x2, alpha, k, E, L, gradient, skip_origin=True)
    rho = np.hypot(x1, x2)
    h, dh = _origin_image_minus_free(rho, k, E, gradient)
    val = v1 + v2 + h
    if not gradient:
        return val
    g3 = np.stack([dh * x1, dh * x2], axis=-1)
    return val, g1 + g2 + g3


# ---------------------------------------------------------------------------
# static periodic kernel
# ---------------------------------------------------------------------------
def greens_periodic_static(x, L: float = 1.0, gradient: bool = False):
    """Periodic Laplace Green's function ``G^{0,0}``.

    Closed form ``(1/4pi) ln(sinh^2(pi x2/L) + sin^2(pi x1/L)) + ln 2/(2pi)``,
    written as ``|x2|/(2L) + (1/4pi) ln(1 - 2 e^{-2a} cos 2b + e^{-4a})`` with
    ``a = pi|x2|/L`` and ``b = pi x1/L``, so that it matches the spectral series
    term by term and never overflows.
    """
    x1, x2 = _split(x)
    a = np.pi * np.abs(x2) / L
    b = np.pi * x1 / L
    e2 = np.exp(-2 * a)
    arg = 1 - 2 * e2 * np.cos(2 * b) + e2**2
    if np.any(arg <= 0):
        raise SingularPointError("periodic Green's function is singular on the lattice")
    val = np.abs(x2) / (2 * L) + np.log(arg) / (4 * np.pi)
    if not gradient:
        return val
    dx1 = (4 * np.pi / L) * e2 * np.sin(2 * b) / arg / (4 * np.pi)
    dx2 = (1 / (2 * L) + (1 / (4 * np.pi)) * (4 * np.pi / L) * (e2 * np.cos(2 * b) - e2**2) / arg)
    return val, np.stack([dx1, dx2 * np.sign(x2)], axis=-1)


def greens_periodic_static_spectral(x, Q: int = 200, L: float = 1.0):
    """``|x2|/(2L) - sum_{q != 0} e^{i q x1} e^{-|q||x2|} / (2L|q|)``."""
    x1, x2 = _split(x)
    n = np.arange(1, Q + 1)
    q = 2 * np.pi * n / L
    ay = np.abs(x2)[..., None]
    s = (np.cos(q * x1[..., None]) * np.exp(-q * ay) / (L * q)).sum(axis=-1)
    return np.abs(x2) / (2 * L) - s


def periodic_static_remainder(x, L: float = 1.0):
    """``G^{0,0}(x) - (1/2pi) ln|x|``, smooth at the origin."""
    x1, x2 = _split(x)
    r = np.hypot(x1, x2)
    out = np.full(r.shape, math.log(2 * np.pi / L) / (2 * np.pi))
    nz = r > 1e-10
    if np.any(nz):
        out[nz] = greens_periodic_static(np.stack([x1[nz], x2[nz]], -1), L) - np.log(r[nz]) / (2 * np.pi)
    return out


# ---------------------------------------------------------------------------
def regime_classify(alpha: float, k: float, L: float = 1.0) -> str:
    """Radiation regime of the pair ``(alpha, k)``.

    ``'subcritical'`` when every diffraction order is evanescent,
    ``'first-continuum'`` when only the zeroth order propagates, ``'higher'``
    otherwise.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    a = abs(alpha)
    n = np.arange(-3, 4)
    others = np.abs(alpha + 2 * np.pi * n[n != 0] / L)
    upper = float(others.min())
    for thr in (a, upper):
        if abs(k - thr) < 1e-10:
            warnings.warn(f"k={k} lies on a regime boundary {thr}", stacklevel=2)
    if k < a:
        return "subcritical"
    if k < upper:
        return "first-continuum"
    return "higher"


def evaluate(x, alpha: float, k: complex, representation: str = "ewald", L: float = 1.0,
             **kw) -> GreenEval:
    """Single-point evaluation bundling value and gradient."""
    x = np.asarray(x, dtype=float)
    if representation == "ewald":
        v, g = greens_quasi_ewald(x, alpha, k, L=L, gradient=True, **kw)
    elif representation == "spectral":
        v, g = greens_quasi_spectral(x, alpha, k, L=L, gradient=True, **kw)
    elif representation == "spatial":
        # free-space kernel of the single source at the origin
        v, g = greens_free(x, k), greens_free_gradient(x, k)
    elif representation == "closed-form-static":
        v, g = greens_periodic_static(x, L, gradient=True)
    else:
        raise ValueError(f"unknown representation {representation!r}")
    return GreenEval(complex(v), np.asarray(g), representation)


@dataclass(frozen=True)
class CrossCheck:
    n_points: int
    max_rel_spectral_vs_ewald: float
    max_rel_quasiperiodicity: float
    table: tuple = ()   # (x1, x2, alpha, k, rel_spectral_vs_ewald, rel_quasiperiodicity) per point

    def passed(self, tol_repr: float = 1e-8, tol_qp: float = 1e-12) -> bool:
        return self.max_rel_spectral_vs_ewald < tol_repr and self.max_rel_quasiperiodicity < tol_qp


def green_cross_check(n_points: int = 100, seed: int = 0, L: float = 1.0, Q: int = 60) -> CrossCheck:
    """Compare spectral and Ewald values at random points of the first continuum.

    Points satisfy ``L/10 <= |x2| <= L/2`` so that the spectral series with
    ``Q`` modes is converged; the quasiperiodicity identity
    ``G(x + L e1) = exp(i alpha L) G(x)`` is checked on the Ewald side.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n_points):
        alpha = rng.uniform(-0.9 * np.pi / L, 0.9 * np.pi / L)
        k = rng.uniform(abs(alpha) + 0.1 / L, 2 * np.pi / L - abs(alpha) - 0.1 / L)
        x = np.array([rng.uniform(-L / 2, L / 2), rng.choice([-1, 1]) * rng.uniform(L / 10, L / 2)])
        ew = greens_quasi_ewald(x, alpha, k, L=L)
        sp = greens_quasi_spectral(x, alpha, k, Q=Q, L=L)
        shifted = greens_quasi_ewald(x + np.array([L, 0.0]), alpha, k, L=L)
        rows.append((float(x[0]), float(x[1]), float(alpha), float(k), float(abs(ew - sp) / abs(sp)),
                     float(abs(shifted - np.exp(1j * alpha * L) * ew) / abs(ew))))
    return CrossCheck(n_points, max(r[4] for r in rows), max(r[5] for r in rows), tuple(rows))
