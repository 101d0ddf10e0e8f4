"""Deterministic loading of shielded polar molecules into optical tweezers.

Modules
-------
quantities  constants, units and the molecule registry
specfun     Legendre, scaled Bessel, Wigner symbols, Li_{3/2}
angular     coupled |l L J M> basis and the trap's Legendre expansion
radial      sinc-DVR on the half-line and contracted radial bases
spectrum    single- and two-molecule tweezer spectra
thermo      occupation statistics, fidelities and collision rates
cli         command-line front end
"""

__version__ = "0.1.0"

from .quantities import CONSTANTS, Species, TweezerConfig, convert, get_species
from .spectrum import BasisParams, scan_depths, solve_depth, solve_pair, solve_single
from .thermo import fugacity, occupation_probabilities, optimize_depth

__all__ = [
    "__version__",
    "CONSTANTS",
    "Species",
    "TweezerConfig",
    "convert",
    "get_species",
    "BasisParams",
    "solve_single",
    "solve_pair",
    "solve_depth",
    "scan_depths",
    "fugacity",
    "occupation_probabilities",
    "optimize_depth",
]
