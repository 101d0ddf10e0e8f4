"""Elastic collision estimates for the builtin molecules."""

from tweezerload.quantities import builtin_species
from tweezerload.thermo import elastic_rates

for T_nK, n_cm3 in [(1, 1e10), (100, 1e12)]:
    print(f"T = {T_nK} nK, n = {n_cm3:.0e} cm^-3")
    for sp in builtin_species():
        r = elastic_rates(sp, T_nK * 1e-9, n_cm3 * 1e6)
        print(f"  {sp.name:5s} sigma = {r.sigma * 1e12:6.3f} um^2  v = {r.velocity * 1e3:6.2f} mm/s  "
              f"tau = {r.tau:.3g} s")
