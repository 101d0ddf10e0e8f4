"""Binding energy, interaction energy and loading regime versus tweezer depth.

Prints a table for one species and waist; pass e.g. ``FrAg 300`` on the
command line to change them.
"""

import sys

import numpy as np

from tweezerload import get_species, scan_depths
from tweezerload.quantities import CONSTANTS

kHz = CONSTANTS.h * 1e3

name = sys.argv[1] if len(sys.argv) > 1 else "KAg"
waist_nm = float(sys.argv[2]) if len(sys.argv) > 2 else 300.0
species = get_species(name)

depths = np.geomspace(1.0, 300.0, 16) * kHz
points = scan_depths(species, waist_nm * 1e-9, depths)

print(f"{name}, w0 = {waist_nm:g} nm")
print(f"{'D/kHz':>9} {'eps/kHz':>10} {'U/kHz':>10} {'U-eps':>9}  regime")
for p in points:
    U = p.U
    if U is None:
        print(f"{p.depth / kHz:9.3g} {p.epsilon / kHz:10.4g} {'':>10} {'':>9}  {p.regime}")
        continue
    print(f"{p.depth / kHz:9.3g} {p.epsilon / kHz:10.4g} {U / kHz:10.4g} {(U - p.epsilon) / kHz:9.3g}  {p.regime}")

# the blockade window is where eps < U < 2 eps
inside = [p.depth / kHz for p in points if p.U is not None and p.epsilon < p.U < 2 * p.epsilon]
if inside:
    print(f"window: {min(inside):.3g} to {max(inside):.3g} kHz ({np.log10(max(inside) / min(inside)):.2f} decades)")
else:
    print("no blockade window on this grid")
