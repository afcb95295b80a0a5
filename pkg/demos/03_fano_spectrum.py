"""
Fano-type transmission spectra
==============================

The broad resonance makes the screen nearly transparent at low frequency.
The sharp resonance interferes with it: transmission climbs to one just below
Re omega2 and drops to zero at Re omega2 + omega*, giving an asymmetric line.
The asymptotic scattering matrix reproduces this, better as delta shrinks.
"""
from pathlib import Path

import numpy as np

from metascreen import Incidence, MetascreenConfig, res0_asymptotic, spectrum_sweep
from metascreen.svg import line_plot

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)
inc = Incidence(0.0)

for delta, theta in ((0.02, 0.025 * np.pi), (1e-3, 0.05 * np.pi), (2e-4, 0.05 * np.pi)):
    cfg = MetascreenConfig(theta=theta, delta=delta)
    w2 = res0_asymptotic(cfg, inc, delta).omega2
    spec = spectrum_sweep(cfg, inc, delta, np.linspace(0.01, 1.5 * w2.real, 120), refine=40)
    w = spec.column("omega")
    T, Ta = spec.column("T_num"), spec.column("T_asym")
    print(f"delta={delta:g}: sharp resonance {spec.omega2:.6f}, omega* = {spec.omega_star:.2e}, "
          f"min T = {np.nanmin(T):.1e} at {w[np.nanargmin(T)]:.5f}, "
          f"sup |T - T_asym| = {np.nanmax(np.abs(T - Ta)):.3f}, "
          f"max |R+T-1| = {np.nanmax(np.abs(spec.column('R_num') + T - 1)):.1e}")
    panels = [{"title": f"transmittance, delta = {delta:g}", "x": w,
               "series": [("numeric", T, True), ("asymptotic", Ta, False)]},
              {"title": "reflectance", "x": w,
               "series": [("numeric", spec.column("R_num"), True),
                          ("asymptotic", spec.column("R_asym"), False)]}]
    name = out / f"spectrum_delta_{delta:g}.svg"
    name.write_text(line_plot(panels))
    print("wrote", name)
