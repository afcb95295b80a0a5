"""
Subwavelength resonances and the band structure
===============================================

At normal incidence the screen has two resonances below the diffraction
threshold: a broad one, omega1, almost on the imaginary axis, and a sharp
one, omega2, with a small imaginary part proportional to c_perp^2.  With the
quasimomentum held fixed instead, the same two modes trace out two bands.
"""
from pathlib import Path

import numpy as np

from metascreen import Incidence, MetascreenConfig, band_sweep, res0_asymptotic, resonances_slaved
from metascreen.resonance import band_asymptotic, count_resonances
from metascreen.svg import line_plot

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)
cfg, inc = MetascreenConfig(), Incidence(0.0)

# leading-order values and the Muller roots of the full boundary-integral operator
for delta in (1e-3, 5e-4, 2e-4):
    a = res0_asymptotic(cfg, inc, delta)
    p = resonances_slaved(cfg, inc, delta)
    print(f"delta={delta:g}: omega2 asymptotic {a.omega2:.6f}, Muller {p.omega2:.6f}, "
          f"gap/delta {abs(p.omega2 - a.omega2) / delta:.3f}")

# the argument principle confirms there are exactly two roots in the window
print("winding number:", round(count_resonances(cfg, inc, 1e-3), 6))

# band structure at delta = 2e-4 over half the Brillouin zone
delta = 2e-4
alphas = np.linspace(0.1, np.pi, 30)
pts = band_sweep(cfg, delta, alphas)
asym = np.array([band_asymptotic(cfg, delta, a) for a in alphas])
panels = [{"title": "band functions, delta = 2e-4",
           "x": alphas,
           "series": [("band 1 (Muller)", [p.omega1 for p in pts], True),
                      ("band 2 (Muller)", [p.omega2 for p in pts], True),
                      ("band 1 (asymptotic)", asym[:, 0], False),
                      ("band 2 (asymptotic)", asym[:, 1], False)]}]
(out / "bands.svg").write_text(line_plot(panels))
print("wrote", out / "bands.svg")
