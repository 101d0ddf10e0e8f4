"""Physical constants, unit conversion and the molecule registry.

Everything downstream works in SI (J, m, kg, s). The lab-facing units used
when talking about tweezers (h*kHz, k_B*nK, a0, cm^-3) only appear at the
boundary through :func:`convert`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import scipy.constants as _sc

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "Species",
    "TweezerConfig",
    "DimensionError",
    "builtin_species",
    "get_species",
    "characteristic_energy",
    "convert",
    "UNITS",
]


@dataclass(frozen=True)
class PhysicalConstants:
    h: float
    hbar: float
    k_B: float
    a0: float
    u: float
    debye: float


# h and k_B are exact in the SI; hbar is derived so that h == 2*pi*hbar holds
# for the stored values.
CONSTANTS = PhysicalConstants(
    h=_sc.h,
    hbar=_sc.h / (2.0 * math.pi),
    k_B=_sc.k,
    a0=_sc.physical_constants["Bohr radius"][0],
    u=_sc.physical_constants["atomic mass constant"][0],
    debye=1e-21 / _sc.c,
)


class DimensionError(ValueError):
    """Raised when converting between units of different dimension."""


# unit name -> (dimension, SI value of one unit)
UNITS: dict[str, tuple[str, float]] = {
    "J": ("energy", 1.0),
    "h*Hz": ("energy", CONSTANTS.h),
    "h*kHz": ("energy", CONSTANTS.h * 1e3),
    "h*MHz": ("energy", CONSTANTS.h * 1e6),
    "kB*nK": ("energy", CONSTANTS.k_B * 1e-9),
    "kB*uK": ("energy", CONSTANTS.k_B * 1e-6),
    "K": ("temperature", 1.0),
    "nK": ("temperature", 1e-9),
    "uK": ("temperature", 1e-6),
    "m": ("length", 1.0),
    "nm": ("length", 1e-9),
    "um": ("length", 1e-6),
    "a0": ("length", CONSTANTS.a0),
    "kg": ("mass", 1.0),
    "u": ("mass", CONSTANTS.u),
    "m^-3": ("density", 1.0),
    "cm^-3": ("density", 1e6),
    "C*m": ("dipole", 1.0),
    "D": ("dipole", CONSTANTS.debye),
}

_ALIASES = {
    "hHz": "h*Hz",
    "hkHz": "h*kHz",
    "hMHz": "h*MHz",
    "kBnK": "kB*nK",
    "kBuK": "kB*uK",
    "kB*μK": "kB*uK",
    "μK": "uK",
    "μm": "um",
    "m-3": "m^-3",
    "cm-3": "cm^-3",
    "amu": "u",
}


def _lookup(unit: str) -> tuple[str, float]:
    name = _ALIASES.get(unit, unit)
    try:
        return UNITS[name]
    except KeyError:
        raise ValueError(f"unknown unit {unit!r}") from None


def convert(value, from_unit: str, to_unit: str):
    """Convert ``value`` between two units of the same dimension.

    Works elementwise on numpy arrays.

    >>> round(convert(3000, "a0", "nm"), 2)
    158.75
    """
    dim_a, scale_a = _lookup(from_unit)
    dim_b, scale_b = _lookup(to_unit)
    if dim_a != dim_b:
        raise DimensionError(f"cannot convert {dim_a} ({from_unit}) to {dim_b} ({to_unit})")
    if scale_a == scale_b:
        return value * 1.0
    return value * (scale_a / scale_b)


@dataclass(frozen=True)
class Species:
    """A shielded molecule: mass and the range of its repulsive c6/r^6 shield.

    Either ``R6`` or ``c6`` may be given; the other is filled in from
    ``R6 = (m c6 / hbar^2)**(1/4)``.
    """

    name: str
    mass: float
    R6: float | None = None
    c6: float | None = None
    dipole: float = 0.0  # Debye, informational only
    reference_waists: tuple[float, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        hb2 = CONSTANTS.hbar**2
        if self.R6 is None and self.c6 is None:
            raise ValueError("one of R6 or c6 is required")
        if self.R6 is None:
            if self.c6 < 0:
                raise ValueError("c6 must be non-negative")
            object.__setattr__(self, "R6", (self.mass * self.c6 / hb2) ** 0.25)
        elif self.c6 is None:
            if not self.R6 > 0:
                raise ValueError("R6 must be positive")
            object.__setattr__(self, "c6", hb2 * self.R6**4 / self.mass)
        else:
            r6 = (self.mass * self.c6 / hb2) ** 0.25
            if not math.isclose(r6, self.R6, rel_tol=1e-10):
                raise ValueError("R6 and c6 are inconsistent")

    @classmethod
    def from_atoms(cls, name, masses_u, R6_a0, dipole=0.0, reference_waists=()):
        return cls(
            name=name,
            mass=sum(masses_u) * CONSTANTS.u,
            R6=R6_a0 * CONSTANTS.a0,
            dipole=dipole,
            reference_waists=tuple(reference_waists),
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "mass_u": self.mass / CONSTANTS.u,
            "R6_a0": self.R6 / CONSTANTS.a0,
            "c6_J_m6": self.c6,
            "dipole_D": self.dipole,
            "reference_waists_nm": [w * 1e9 for w in self.reference_waists],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Species":
        waists = [w * 1e-9 for w in d.get("reference_waists_nm", ())]
        if "R6_a0" in d or "R6_nm" in d:
            R6 = d["R6_a0"] * CONSTANTS.a0 if "R6_a0" in d else d["R6_nm"] * 1e-9
            return cls(d["name"], d["mass_u"] * CONSTANTS.u, R6=R6,
                       dipole=d.get("dipole_D", 0.0), reference_waists=tuple(waists))
        return cls(d["name"], d["mass_u"] * CONSTANTS.u, c6=d["c6_J_m6"],
                   dipole=d.get("dipole_D", 0.0), reference_waists=tuple(waists))


@dataclass(frozen=True)
class TweezerConfig:
    """Gaussian tweezer ``-D exp(-2 r^2 / w0^2)`` acting on ``species``."""

    waist: float
    depth: float
    species: Species

    def __post_init__(self):
        if not self.waist > 0:
            raise ValueError("waist must be positive")
        if not self.depth >= 0:
            raise ValueError("depth must be non-negative")

    def harmonic_frequency(self) -> float:
        """Angular trap frequency of one molecule at the bottom of the well."""
        return math.sqrt(4.0 * self.depth / (self.species.mass * self.waist**2))


# Isotope masses (u) from the AME; isotopes 23Na133Cs, 39K107Ag, 223Fr107Ag.
_ISOTOPE_MASS = {
    "23Na": 22.98976928,
    "133Cs": 132.905451961,
    "39K": 38.9637064864,
    "107Ag": 106.9050916,
    "223Fr": 223.0197360,
}


def builtin_species() -> list[Species]:
    return [
        Species.from_atoms("NaCs", (_ISOTOPE_MASS["23Na"], _ISOTOPE_MASS["133Cs"]), 3000.0,
                           dipole=4.6, reference_waists=(420e-9, 700e-9)),
        Species.from_atoms("KAg", (_ISOTOPE_MASS["39K"], _ISOTOPE_MASS["107Ag"]), 9000.0,
                           dipole=8.5, reference_waists=(300e-9,)),
        Species.from_atoms("FrAg", (_ISOTOPE_MASS["223Fr"], _ISOTOPE_MASS["107Ag"]), 14000.0,
                           dipole=9.2, reference_waists=(300e-9,)),
    ]


def get_species(name: str) -> Species:
    for sp in builtin_species():
        if sp.name.lower() == name.lower():
            return sp
    raise KeyError(f"unknown species {name!r}; builtin: NaCs, KAg, FrAg")


def characteristic_energy(species: Species) -> float:
    """E6 = hbar^2 / (2 m R6^2), the shield energy scale in J."""
    return CONSTANTS.hbar**2 / (2.0 * species.mass * species.R6**2)
