"""Subwavelength resonances and Fano-type scattering of a periodic dimer screen.

A one-dimensional array of high-contrast disk pairs in the plane is driven by
plane waves.  The package provides the quasiperiodic Green's function,
boundary-operator assembly in a Fourier basis on the circles, capacitance
coefficients, resonance and band-structure computations, and the
reflection/transmission spectra together with their asymptotic models.
"""
from .geometry import Incidence, MetascreenConfig, disk_centers
from .capacitance import (
    CapacitanceData,
    c1_matrix,
    c1_matrix_numeric,
    capacitance_periodic,
    capacitance_quasi,
    dipole_vector,
)
from .resonance import (
    BandPoint,
    ResonancePair,
    band_asymptotic,
    band_sweep,
    res0_asymptotic,
    resonance_muller,
    resonances_slaved,
)
from .scattering import (
    ScatteringResult,
    bic_check,
    smatrix_asymptotic,
    solve_q,
    solve_scattering,
    spectrum_sweep,
)

__version__ = "0.1.0"
