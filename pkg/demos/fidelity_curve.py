"""Single-molecule loading fidelity versus reservoir temperature.

The depth is re-optimised at every temperature. Pair states with J <= 2 are
included at the chosen depth, which takes a few tens of seconds per new
depth.
"""

import numpy as np

from tweezerload import get_species, scan_depths
from tweezerload.quantities import CONSTANTS
from tweezerload.thermo import NoBlockadeWindowError, fidelity_at_optimum, fugacity

kHz = CONSTANTS.h * 1e3
species = get_species("KAg")
waist = 300e-9
density = 1e12 * 1e6  # m^-3

points = scan_depths(species, waist, np.geomspace(2.0, 60.0, 40) * kHz)
cache = {}

print(f"{'T/nK':>7} {'D*/kHz':>8} {'F_sp':>8} {'F_gs':>8} {'p0':>8} {'p2':>8}")
for T in np.geomspace(50, 800, 9):
    res = fugacity(T * 1e-9, density, species.mass)
    try:
        r = fidelity_at_optimum(points, res, species, waist, cache=cache)
    except NoBlockadeWindowError:
        print(f"{T:7.1f}  no depth with 2 eps > U > eps")
        continue
    print(f"{T:7.1f} {r.depth / kHz:8.3g} {r.F_sp:8.4f} {r.F_gs:8.4f} {r.p0:8.2e} {r.p2:8.2e}")
