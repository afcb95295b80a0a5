import math

import numpy as np
import pytest

from metascreen.capacitance import (
    c1_matrix,
    c1_matrix_numeric,
    c1_matrix_richardson,
    capacitance_periodic,
    capacitance_quasi,
    dipole_vector,
    periodic_capacitance_matrix,
    periodic_data,
    periodic_densities,
)
from metascreen.geometry import Incidence, MetascreenConfig
from metascreen.layer_ops import boundary_integrals, inversion_map

PI = math.pi
# golden values, multipole N=8; the Nystrom oracle (M=512) agrees to ~1e-15
C11_GOLD = 1.92480905370745
CPAR_GOLD = -0.54747165934
CPERP_GOLD = -0.0836428432207
C11_HALF_PI_GOLD = 2.5115512971645


def test_quasi_hermitian(cfg):
    C, lam = capacitance_quasi(cfg, PI / 2, 8)
    assert np.max(np.abs(C - C.conj().T)) < 1e-10
    assert lam[0] <= lam[1]


def test_quasi_value(cfg):
    C, _ = capacitance_quasi(cfg, PI / 2, 8)
    assert abs(C[0, 0].real - C11_HALF_PI_GOLD) < 1e-7 * C11_HALF_PI_GOLD


def test_quasi_alpha_conjugation(cfg):
    a, _ = capacitance_quasi(cfg, 0.7, 6)
    b, _ = capacitance_quasi(cfg, -0.7, 6)
    assert np.max(np.abs(a - b.conj())) < 1e-12


def test_quasi_rejects_zero(cfg):
    with pytest.raises(ValueError):
        capacitance_quasi(cfg, 0.0)


def test_quasi_eigenvalues_positive(cfg):
    for a in np.linspace(0.05, PI, 32):
        _, lam = capacitance_quasi(cfg, a, 6)
        assert lam[0] > 0


def test_periodic_structure(cfg):
    C = periodic_capacitance_matrix(cfg, 8)
    C11 = C[0, 0].real
    assert C11 > 0
    assert abs(C[0, 1] + C[0, 0]) < 1e-9 * C11
    assert np.max(np.abs(C.imag)) < 1e-10


def test_periodic_value(cfg):
    C11, _ = capacitance_periodic(cfg, 8)
    assert abs(C11 - C11_GOLD) < 1e-10


def test_periodic_mean_zero_and_antisymmetry(cfg):
    psi1, psi2 = periodic_densities(cfg, 8)
    assert abs(boundary_integrals(cfg, psi1, 8).sum()) < 1e-10
    assert np.max(np.abs(psi1 + psi2)) < 1e-12
    # a real density has a_{-n} = conj(a_n) on each disk
    n = 2 * 8 + 1
    for a in (psi1[:n], psi1[n:]):
        assert np.max(np.abs(a[::-1] - a.conj())) < 1e-12
    integrals = boundary_integrals(cfg, psi1, 8)
    assert abs(integrals[1] + integrals[0]) < 1e-9


def test_psi_odd_under_inversion(cfg):
    _, psi1 = capacitance_periodic(cfg, 8)
    P = inversion_map(8)
    assert np.max(np.abs(P @ psi1 + psi1)) < 1e-12


@pytest.mark.parametrize("shift", [-3.0, 0.7, 25.0])
def test_constant_shift_invariance(cfg, shift):
    C0, _ = capacitance_periodic(cfg, 8)
    Cs, _ = capacitance_periodic(cfg, 8, constant_shift=shift)
    assert abs(C0 - Cs) < 1e-12 * C0


def test_spectral_convergence(cfg):
    a, _ = capacitance_periodic(cfg, 6)
    b, _ = capacitance_periodic(cfg, 10)
    assert abs(a - b) < 1e-10


def test_dipole_value(cfg):
    cpar, cperp = dipole_vector(cfg, 8)
    assert cpar == pytest.approx(CPAR_GOLD, abs=1e-10)
    assert cperp == pytest.approx(CPERP_GOLD, abs=1e-10)


def test_dipole_symmetric_cases(cfg):
    assert abs(dipole_vector(cfg.replace(theta=0.0), 8)[1]) < 1e-9
    assert abs(dipole_vector(cfg.replace(theta=PI / 2), 8)[0]) < 1e-9


def test_theta_reflection(cfg):
    m = cfg.replace(theta=-cfg.theta)
    assert capacitance_periodic(m, 8)[0] == pytest.approx(capacitance_periodic(cfg, 8)[0], abs=1e-12)
    p, q = dipole_vector(cfg, 8), dipole_vector(m, 8)
    assert p[0] == pytest.approx(q[0], abs=1e-12)
    assert p[1] == pytest.approx(-q[1], abs=1e-12)


def test_relabeling_disks(cfg):
    # rotating the dimer by pi swaps the disks
    swapped = cfg.replace(theta=cfg.theta + PI)
    assert capacitance_periodic(swapped, 8)[0] == pytest.approx(capacitance_periodic(cfg, 8)[0], abs=1e-11)


def test_dipole_norm_continuous_in_theta(cfg):
    thetas = np.linspace(0, PI / 2, 9)
    norms = [np.hypot(*dipole_vector(cfg.replace(theta=t), 6)) for t in thetas]
    assert np.max(np.abs(np.diff(norms))) < 0.05 * max(norms)


def test_c1_closed_form_normal_symmetric(cfg_sym, normal):
    C1 = c1_matrix(cfg_sym, normal, 8)
    ref = -0.5j * normal.w_perp * cfg_sym.L * np.ones((2, 2))
    assert np.max(np.abs(C1 - ref)) < 1e-12


def test_c1_antisymmetric_part(cfg):
    inc = Incidence(0.3)
    C1 = c1_matrix(cfg, inc, 8)
    anti = 0.5 * (C1 - C1.T)
    cpar = dipole_vector(cfg, 8)[0]
    assert np.max(np.abs(anti - 1j * 0.3 * cpar * np.array([[0, 1], [-1, 0]]))) < 1e-12
    assert np.max(np.abs(C1.real)) == 0


@pytest.mark.parametrize("alpha0", [0.0, 0.3])
def test_c1_against_finite_differences(cfg, alpha0):
    inc = Incidence(alpha0)
    ref = c1_matrix(cfg, inc, 8)
    num = c1_matrix_numeric(cfg, inc, 1e-2, 8)
    assert np.max(np.abs(num - ref)) < 5e-2 * np.max(np.abs(ref))
    rich = c1_matrix_richardson(cfg, inc, 1e-2, 8)
    assert np.max(np.abs(rich - ref)) < np.max(np.abs(num - ref)) + 1e-12
    assert np.max(np.abs(rich - ref)) < 1e-6 * np.max(np.abs(ref))


def test_c1_numeric_row_sum_and_zero_antisymmetry(cfg, normal):
    num = c1_matrix_numeric(cfg, normal, 1e-2, 8)
    assert abs(num[0, 0] + num[0, 1] - (-1j * normal.w_perp * cfg.L)) < 1e-4
    assert np.max(np.abs(num - num.T)) < 1e-8


def test_c1_numeric_step_guard(cfg, normal):
    with pytest.raises(ValueError):
        c1_matrix_numeric(cfg, normal, 0.5)


def test_periodic_data_cached(cfg):
    a = periodic_data(cfg, 8)
    assert periodic_data(cfg, 8) is a
    assert np.allclose(a.C0, a.C11_0 * np.array([[1, -1], [-1, 1]]))
    assert a.c1.shape == (2,)
    with pytest.raises(ValueError):
        a.psi1_0[0] = 1.0
