import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from metascreen.lattice_green import (
    SingularPointError,
    WoodAnomalyError,
    evaluate,
    green_cross_check,
    greens_free,
    greens_free_gradient,
    greens_periodic_static,
    greens_periodic_static_spectral,
    greens_quasi_ewald,
    greens_quasi_spectral,
    lattice_remainder,
    periodic_static_remainder,
    regime_classify,
    vertical_wavenumber,
)


def laplacian5(f, x, h):
    e1, e2 = np.array([h, 0.0]), np.array([0.0, h])
    return (f(x + e1) + f(x - e1) + f(x + e2) + f(x - e2) - 4 * f(x)) / h**2


# ---------------------------------------------------------------- free space
def test_free_helmholtz_residual():
    x, k = np.array([0.3, 0.2]), 1.0
    f = lambda p: greens_free(p, k)
    h = 1e-3
    lap = (4 * laplacian5(f, x, h / 2) - laplacian5(f, x, h)) / 3  # Richardson on the 5-point stencil
    assert abs(lap + k**2 * f(x)) < 1e-8


def test_free_even():
    x = np.array([0.37, -0.21])
    assert greens_free(x, 0.8) == greens_free(-x, 0.8)


def test_free_hankel_value_against_mpmath():
    mpmath.mp.dps = 30
    h = complex(mpmath.hankel1(0, 1))
    ref = -0.25j * h
    got = greens_free(np.array([0.6, 0.8]), 1.0)
    assert abs(got - ref) < 1e-14
    # published ten-digit values of J0(1) and Y0(1)
    assert abs(h.real - 0.7651976866) < 1e-10
    assert abs(h.imag - 0.0882569642) < 1e-10


def test_free_static_log():
    x = np.array([0.3, 0.4])
    assert greens_free(x, 0.0) == pytest.approx(math.log(0.5) / (2 * math.pi))


def test_free_singular():
    with pytest.raises(SingularPointError):
        greens_free(np.zeros(2), 1.0)


# ---------------------------------------------------------------- spectral
def test_vertical_wavenumber_branch():
    g = vertical_wavenumber(np.array([0.3, 2.0]), 1.0)
    assert g[0].real > 0 and abs(g[0].imag) < 1e-15
    assert g[1].imag > 0 and abs(g[1].real) < 1e-15


def test_spectral_quasiperiodicity():
    x = np.array([0.13, 0.3])
    a, k = 0.4, 1.3
    g0 = greens_quasi_spectral(x, a, k)
    g1 = greens_quasi_spectral(x + np.array([1.0, 0.0]), a, k)
    assert abs(g1 - np.exp(1j * a) * g0) < 1e-12 * abs(g0)


def test_spectral_matches_ewald_reference_point():
    x = np.array([0.1, 0.4])
    assert abs(greens_quasi_spectral(x, 0.0, 0.5) - greens_quasi_ewald(x, 0.0, 0.5)) < 1e-8


def test_spectral_far_field_is_single_mode():
    a, k, L = 0.3, 1.1, 1.0
    x = np.array([0.2, 2.0])
    k3 = math.sqrt(k**2 - a**2)
    lead = np.exp(1j * a * x[0]) * np.exp(1j * k3 * x[1]) / (2j * k3 * L)
    g = greens_quasi_spectral(x, a, k)
    assert abs(g - lead) / abs(lead) < math.exp(-2 * math.pi * x[1] * 0.9)


def test_spectral_slow_convergence_warning():
    with pytest.warns(UserWarning):
        greens_quasi_spectral(np.array([0.1, 0.05]), 0.0, 0.5)


def test_wood_anomaly_guard():
    with pytest.raises(WoodAnomalyError):
        greens_quasi_spectral(np.array([0.1, 0.4]), 0.3, 2 * math.pi - 0.3)
    with pytest.raises(WoodAnomalyError):
        greens_quasi_ewald(np.array([0.1, 0.4]), 0.3, 0.3)


# ---------------------------------------------------------------- Ewald
def test_ewald_parameter_independence():
    x = np.array([0.2, 0.05])
    a = greens_quasi_ewald(x, 0.3, 0.7, E=3.0)
    b = greens_quasi_ewald(x, 0.3, 0.7, E=6.0)
    assert abs(a - b) < 1e-10


def test_ewald_parameter_warning():
    with pytest.warns(UserWarning):
        greens_quasi_ewald(np.array([0.2, 0.05]), 0.3, 0.7, E=10.0)


def test_ewald_conjugate_lattice_symmetry():
    x = np.array([0.23, -0.11])
    a = greens_quasi_ewald(x, 0.5, 0.9)
    b = greens_quasi_ewald(np.array([-x[0], x[1]]), -0.5, 0.9)
    assert abs(a - b) < 1e-13


def test_ewald_reciprocity():
    x = np.array([0.31, 0.07])
    assert abs(greens_quasi_ewald(x, 0.5, 0.9) - greens_quasi_ewald(-x, -0.5, 0.9)) < 1e-13


def test_ewald_static_limit():
    # k -> 0 at fixed alpha: the difference to the k = 0 sum shrinks like k^2
    x, a = np.array([0.2, 0.1]), 0.3
    g0 = greens_quasi_ewald(x, a, 0.0)
    d1 = abs(greens_quasi_ewald(x, a, 0.02) - g0)
    d2 = abs(greens_quasi_ewald(x, a, 0.01) - g0)
    assert d2 < d1
    assert d1 / d2 == pytest.approx(4.0, rel=0.05)


def test_ewald_singular_on_lattice():
    with pytest.raises(SingularPointError):
        greens_quasi_ewald(np.array([1.0, 0.0]), 0.3, 0.7)


def test_representation_agreement_100_points():
    res = green_cross_check(100, seed=1)
    assert res.max_rel_spectral_vs_ewald < 1e-8
    assert res.max_rel_quasiperiodicity < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(0.1, 1.0), st.floats(-3.0, 3.0), st.floats(0.05, 0.9))
def test_agreement_property(x1, x2, alpha, frac):
    # k inside the first continuum
    lo, hi = abs(alpha), 2 * math.pi - abs(alpha)
    k = lo + 0.02 + frac * (hi - lo - 0.04)
    x = np.array([x1, x2])
    sp = greens_quasi_spectral(x, alpha, k)
    ew = greens_quasi_ewald(x, alpha, k)
    assert abs(sp - ew) < 1e-8 * abs(ew)


def test_small_frequency_pole_structure():
    # G^{w a0, w} - 1/(2 i w w_perp L) converges as w -> 0
    a0, x = 0.6, np.array([0.2, 0.1])
    wp = math.sqrt(1 - a0**2)
    vals = [greens_quasi_ewald(x, w * a0, w) - 1 / (2j * w * wp) for w in (1e-2, 1e-3, 1e-4)]
    assert abs(vals[2] - vals[1]) < abs(vals[1] - vals[0])
    assert abs(vals[2] - vals[1]) < 1e-2


def test_complex_frequency_continuation():
    # analytic in k: the Cauchy-Riemann equations hold for the slaved kernel
    x, a0, w, h = np.array([0.25, 0.05]), 0.3, 0.7 - 0.01j, 1e-6
    f = lambda z: greens_quasi_ewald(x, z * a0, z)
    d_re = (f(w + h) - f(w - h)) / (2 * h)
    d_im = (f(w + 1j * h) - f(w - 1j * h)) / (2j * h)
    assert abs(d_re - d_im) < 1e-6 * abs(d_re)


# ---------------------------------------------------------------- gradients
def fd_gradient(f, x, h=1e-5):
    e = np.eye(2) * h
    return np.array([(f(x + e[i]) - f(x - e[i])) / (2 * h) for i in range(2)])


@pytest.mark.parametrize("name", ["free", "ewald", "spectral", "static", "remainder"])
def test_gradient_consistency(name):
    x = np.array([0.21, 0.17])
    fns = {
        "free": (lambda p: greens_free(p, 0.8), lambda p: greens_free_gradient(p, 0.8)),
        "ewald": (lambda p: greens_quasi_ewald(p, 0.4, 0.8),
                  lambda p: greens_quasi_ewald(p, 0.4, 0.8, gradient=True)[1]),
        "spectral": (lambda p: greens_quasi_spectral(p, 0.4, 0.8),
                     lambda p: greens_quasi_spectral(p, 0.4, 0.8, gradient=True)[1]),
        "static": (lambda p: greens_periodic_static(p), lambda p: greens_periodic_static(p, gradient=True)[1]),
        "remainder": (lambda p: lattice_remainder(p, 0.4, 0.8),
                      lambda p: lattice_remainder(p, 0.4, 0.8, gradient=True)[1]),
    }
    f, g = fns[name]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        num = fd_gradient(f, x)
        ana = g(x)
    assert np.linalg.norm(num - ana) < 1e-5 * np.linalg.norm(ana)


# ---------------------------------------------------------------- remainder
def test_remainder_is_ewald_minus_free():
    x = np.array([0.04, -0.03])
    r = lattice_remainder(x, 0.3, 0.7)
    assert abs(r - (greens_quasi_ewald(x, 0.3, 0.7) - greens_free(x, 0.7))) < 1e-13


def test_remainder_continuous_at_origin():
    # smooth through the origin: first-order Taylor error shrinks like h^2
    r0, g0 = lattice_remainder(np.zeros(2), 0.3, 0.7, gradient=True)
    errs = []
    for h in (1e-3, 1e-4):
        x = np.array([h, 0.6 * h])
        errs.append(abs(lattice_remainder(x, 0.3, 0.7) - r0 - g0 @ x))
    assert errs[1] < 1e-8
    assert errs[0] / errs[1] == pytest.approx(100, rel=0.05)


def test_static_remainder_limit():
    r0 = periodic_static_remainder(np.zeros(2))
    r1 = periodic_static_remainder(np.array([1e-5, 1e-5]))
    assert r0 == pytest.approx(math.log(2 * math.pi) / (2 * math.pi), abs=1e-15)
    assert abs(r0 - r1) < 1e-9


# ---------------------------------------------------------------- static periodic
def test_static_matches_spectral_series():
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = np.array([rng.uniform(-0.5, 0.5), rng.choice([-1, 1]) * rng.uniform(0.05, 1.0)])
        assert abs(greens_periodic_static(x) - greens_periodic_static_spectral(x, Q=200)) < 1e-10


def test_static_reference_point():
    x = np.array([0.25, 0.25])
    assert abs(greens_periodic_static(x) - greens_periodic_static_spectral(x, Q=400)) < 1e-10


def test_static_far_field_and_evenness():
    far = greens_periodic_static(np.array([0.0, 3.0]))
    assert abs(far - 3.0 / 2) < 1e-8
    x = np.array([0.17, 0.33])
    assert greens_periodic_static(x) == pytest.approx(greens_periodic_static(x * [1, -1]), abs=1e-15)


def test_static_closed_form_log_sinh():
    # the same constant as (1/4pi) ln(sinh^2 + sin^2) + ln2/(2pi)
    x1, x2 = 0.3, 0.2
    ref = math.log(math.sinh(math.pi * x2) ** 2 + math.sin(math.pi * x1) ** 2) / (4 * math.pi) \
        + math.log(2) / (2 * math.pi)
    assert greens_periodic_static(np.array([x1, x2])) == pytest.approx(ref, abs=1e-14)


def test_static_singular():
    with pytest.raises(SingularPointError):
        greens_periodic_static(np.array([2.0, 0.0]))


# ---------------------------------------------------------------- regimes
def test_regime_examples():
    assert regime_classify(0.0, 0.5) == "first-continuum"
    assert regime_classify(0.6, 0.5) == "subcritical"
    assert regime_classify(0.1, 2 * math.pi - 0.1 + 1e-6) == "higher"


def test_regime_boundary_warning():
    with pytest.warns(UserWarning):
        regime_classify(0.5, 0.5 + 1e-12)


def test_evaluate_bundle():
    for rep in ("ewald", "spectral", "spatial", "closed-form-static"):
        e = evaluate(np.array([0.1, 0.3]), 0.0, 0.5 if rep != "closed-form-static" else 0.0, rep)
        assert e.representation == rep
        assert np.isfinite(e.value) and e.gradient.shape == (2,)
    with pytest.raises(ValueError):
        evaluate(np.array([0.1, 0.3]), 0.0, 0.5, "nonsense")
