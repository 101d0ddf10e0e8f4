"""Coupled angular basis |l L J M> for two molecules in a spherical tweezer.

``l`` is the partial wave of the relative coordinate r = r1 - r2 and ``L``
that of the centre of mass R = (r1 + r2)/2. Exchanging two identical
molecules sends r -> -r, so bosons only populate even ``l``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import legendre_p, scaled_bessel_i, wigner_3j, wigner_6j

__all__ = [
    "Channel",
    "ChannelBasis",
    "enumerate_channels",
    "trap_legendre_term",
    "trap_potential_expanded",
    "legendre_matrix_element",
    "legendre_matrix",
]


@dataclass(frozen=True, order=True)
class Channel:
    l: int
    L: int
    J: int

    def __post_init__(self):
        if not abs(self.l - self.L) <= self.J <= self.l + self.L:
            raise ValueError(f"triangle rule violated for {self}")

    @property
    def exchange(self) -> str:
        return "symmetric" if self.l % 2 == 0 else "antisymmetric"


@dataclass(frozen=True)
class ChannelBasis:
    J: int
    channels: tuple[Channel, ...]
    bosonic: bool = True

    def __post_init__(self):
        pairs = [(c.l, c.L) for c in self.channels]
        if len(set(pairs)) != len(pairs):
            raise ValueError("duplicate (l, L) channel")
        if any(c.J != self.J for c in self.channels):
            raise ValueError("all channels must share J")

    def __len__(self):
        return len(self.channels)

    def __iter__(self):
        return iter(self.channels)


def enumerate_channels(J: int, l_max: int, bosonic: bool = True) -> ChannelBasis:
    """All (l, L) with l, L <= l_max coupling to total J, ordered by (l, L)."""
    if J < 0 or l_max < 0:
        raise ValueError("J and l_max must be non-negative")
    chans = []
    for l in range(0, l_max + 1, 2 if bosonic else 1):
        for L in range(l_max + 1):
            if abs(l - L) <= J <= l + L:
                chans.append(Channel(l, L, J))
    return ChannelBasis(J, tuple(chans), bosonic)


def trap_legendre_term(ell: int, r, R, depth: float, waist: float):
    """Radial coefficient of P_ell(cos theta) in the two-molecule trap potential.

    The pair potential -D[exp(-2 r1^2/w0^2) + exp(-2 r2^2/w0^2)] expands as
    sum over even ell of V_ell(r, R) P_ell(cos theta). The Bessel growth
    exp(2rR/w0^2) is folded into the Gaussian prefactor, which keeps the
    result finite for arbitrarily large arguments. ``r`` and ``R`` broadcast.
    """
    if ell % 2:
        raise ValueError("odd Legendre terms vanish for a symmetric pair potential")
    r = np.asarray(r, dtype=float)
    R = np.asarray(R, dtype=float)
    x = 2.0 * r * R / waist**2
    gauss = np.exp(-((math.sqrt(2.0) * R - r / math.sqrt(2.0)) ** 2) / waist**2)
    return -2.0 * depth * (2 * ell + 1) * gauss * scaled_bessel_i(ell, x)


def trap_potential_expanded(r, R, cos_theta, depth, waist, ell_max):
    """Sum of the Legendre terms up to ``ell_max``; used to check truncation."""
    total = 0.0
    for ell in range(0, ell_max + 1, 2):
        total = total + trap_legendre_term(ell, r, R, depth, waist) * legendre_p(ell, cos_theta)
    return total


def legendre_matrix_element(ch: Channel, chp: Channel, ell: int, J: int | None = None) -> float:
    """<l L J M | P_ell(r^.R^) | l' L' J M>, independent of M."""
    if J is None:
        J = ch.J
    if ch.J != J or chp.J != J:
        raise ValueError("channels must share J")
    l, L, lp, Lp = ch.l, ch.L, chp.l, chp.L
    if ell > l + lp or ell > L + Lp:
        return 0.0
    three = wigner_3j(l, ell, lp, 0, 0, 0)
    if three == 0.0:
        return 0.0
    three *= wigner_3j(L, ell, Lp, 0, 0, 0)
    if three == 0.0:
        return 0.0
    six = wigner_6j(l, lp, ell, Lp, L, J)
    sign = -1.0 if (l + lp + J) % 2 else 1.0
    return sign * math.sqrt((2 * l + 1) * (2 * lp + 1) * (2 * L + 1) * (2 * Lp + 1)) * six * three


def legendre_matrix(basis: ChannelBasis, ell: int) -> np.ndarray:
    n = len(basis)
    out = np.zeros((n, n))
    for i, a in enumerate(basis.channels):
        for j in range(i, n):
            out[i, j] = out[j, i] = legendre_matrix_element(a, basis.channels[j], ell, basis.J)
    return out
