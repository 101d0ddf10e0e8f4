"""Special functions for the angular and thermodynamic layers.

Angular momenta are passed as ordinary numbers; half-integers are accepted
(``1.5``) and handled internally as twice their value.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special

__all__ = [
    "legendre_p",
    "scaled_bessel_i",
    "wigner_3j",
    "wigner_6j",
    "polylog_3_2",
    "ZETA_3_2",
]

ZETA_3_2 = 2.612375348685488


def legendre_p(ell: int, x):
    """Legendre polynomial P_ell(x) by upward recurrence.

    Arguments slightly outside [-1, 1] (by less than 1e-12) are clamped.
    """
    if ell < 0:
        raise ValueError("ell must be non-negative")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise ValueError("x must lie in [-1, 1]")
    x = np.clip(x, -1.0, 1.0)
    p_prev = np.ones_like(x)
    if ell == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = x.copy()
    for k in range(1, ell):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return p if p.ndim else float(p)


def scaled_bessel_i(ell: int, x):
    """Exponentially scaled modified spherical Bessel function exp(-x) i_ell(x).

    Finite for every x >= 0; the limits at x = 0 are 1 (ell = 0) and 0.
    """
    if ell < 0:
        raise ValueError("ell must be non-negative")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be non-negative")
    out = np.empty_like(x)
    small = x < 1e-3
    xs = x[small]
    if np.any(small):
        # i_l(x) = x^l/(2l+1)!! * (1 + x^2/(2(2l+3)) + x^4/(8(2l+3)(2l+5)))
        dfact = special.factorial2(2 * ell + 1, exact=True)
        series = (xs**ell / dfact) * (
            1.0 + xs**2 / (2 * (2 * ell + 3)) + xs**4 / (8 * (2 * ell + 3) * (2 * ell + 5))
        )
        out[small] = np.exp(-xs) * series
    xl = x[~small]
    out[~small] = np.sqrt(np.pi / (2.0 * xl)) * special.ive(ell + 0.5, xl)
    return out if out.ndim else float(out)


def _twice(j) -> int:
    t = 2 * j
    ti = int(round(t))
    if abs(t - ti) > 1e-9:
        raise ValueError(f"{j} is not an integer or half-integer")
    return ti


@lru_cache(maxsize=None)
def _log_fact(n: int) -> float:
    return math.lgamma(n + 1)


def _triangle_ok(a: int, b: int, c: int) -> bool:
    # arguments are doubled angular momenta
    return (a + b + c) % 2 == 0 and abs(a - b) <= c <= a + b


def _log_delta(a: int, b: int, c: int) -> float:
    # log of the triangle coefficient Delta(abc), doubled arguments
    return 0.5 * (
        _log_fact((a + b - c) // 2)
        + _log_fact((a - b + c) // 2)
        + _log_fact((-a + b + c) // 2)
        - _log_fact((a + b + c) // 2 + 1)
    )


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol from the Racah sum, accumulated with log-factorials.

    Returns 0 instead of raising for any selection-rule violation.
    """
    a, b, c = _twice(j1), _twice(j2), _twice(j3)
    ma, mb, mc = _twice(m1), _twice(m2), _twice(m3)
    return _wigner_3j_twice(a, b, c, ma, mb, mc)


@lru_cache(maxsize=65536)
def _wigner_3j_twice(a, b, c, ma, mb, mc) -> float:
    if ma + mb + mc != 0:
        return 0.0
    if not _triangle_ok(a, b, c):
        return 0.0
    if abs(ma) > a or abs(mb) > b or abs(mc) > c:
        return 0.0
    if (a + ma) % 2 or (b + mb) % 2 or (c + mc) % 2:
        return 0.0
    # integer combinations entering the Racah formula
    t1 = (b - c - ma) // 2
    t2 = (a - c + mb) // 2
    t3 = (a + b - c) // 2
    t4 = (a - ma) // 2
    t5 = (b + mb) // 2
    tmin = max(0, t1, t2)
    tmax = min(t3, t4, t5)
    if tmin > tmax:
        return 0.0
    pre = _log_delta(a, b, c) + 0.5 * (
        _log_fact((a + ma) // 2) + _log_fact((a - ma) // 2)
        + _log_fact((b + mb) // 2) + _log_fact((b - mb) // 2)
        + _log_fact((c + mc) // 2) + _log_fact((c - mc) // 2)
    )
    total = 0.0
    for t in range(tmin, tmax + 1):
        log_den = (
            _log_fact(t) + _log_fact(t - t1) + _log_fact(t - t2)
            + _log_fact(t3 - t) + _log_fact(t4 - t) + _log_fact(t5 - t)
        )
        term = math.exp(pre - log_den)
        total += -term if t % 2 else term
    phase = (a - b - mc) // 2
    return -total if phase % 2 else total


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol {j1 j2 j3; j4 j5 j6} from the Racah sum."""
    return _wigner_6j_twice(*(_twice(j) for j in (j1, j2, j3, j4, j5, j6)))


@lru_cache(maxsize=65536)
def _wigner_6j_twice(a, b, c, d, e, f) -> float:
    triads = ((a, b, c), (a, e, f), (d, b, f), (d, e, c))
    if not all(_triangle_ok(*t) for t in triads):
        return 0.0
    sums = [sum(t) // 2 for t in triads]
    cols = [(a + b + d + e) // 2, (a + c + d + f) // 2, (b + c + e + f) // 2]
    tmin = max(sums)
    tmax = min(cols)
    log_pre = sum(_log_delta(*t) for t in triads)
    total = 0.0
    for t in range(tmin, tmax + 1):
        log_den = sum(_log_fact(t - s) for s in sums) + sum(_log_fact(q - t) for q in cols)
        term = math.exp(log_pre + _log_fact(t + 1) - log_den)
        total += -term if t % 2 else term
    return total


_POLYLOG_TERMS = 64


def _tail_derivatives(a: float, x: float) -> tuple[float, float]:
    """f'(x) and f'''(x) for f(x) = exp(-a x) x^(-3/2)."""
    # derivatives of x^(-3/2): d^k x^s = s(s-1)...(s-k+1) x^(s-k)
    s = -1.5
    pw = [x**s, s * x ** (s - 1), s * (s - 1) * x ** (s - 2), s * (s - 1) * (s - 2) * x ** (s - 3)]
    e = math.exp(-a * x)
    d1 = e * (pw[1] - a * pw[0])
    d3 = e * (pw[3] - 3 * a * pw[2] + 3 * a * a * pw[1] - a**3 * pw[0])
    return d1, d3


def polylog_3_2(z):
    """Polylogarithm Li_{3/2}(z) for 0 <= z <= 1.

    The first terms of the series are summed directly; the remainder is the
    Euler-Maclaurin tail, whose integral part has the closed form
    ``2 e^{-aK}/sqrt(K) - 2 sqrt(pi a) erfc(sqrt(aK))`` with ``a = -ln z``.
    """
    zs = np.asarray(z, dtype=float)
    if np.any(zs < 0) or np.any(zs > 1):
        raise ValueError("Li_3/2 is only implemented for 0 <= z <= 1")
    out = np.array([_polylog_scalar(float(v)) for v in zs.ravel()]).reshape(zs.shape)
    return out if out.ndim else float(out)


def _polylog_scalar(z: float) -> float:
    if z == 0.0:
        return 0.0
    K = _POLYLOG_TERMS
    k = np.arange(1, K)
    if z < 0.5:
        # plain series converges geometrically
        kk = np.arange(1, 80)
        return float(np.sum(z**kk / kk**1.5))
    a = -math.log(z)
    head = float(np.sum(np.exp(-a * k) / k**1.5))
    integral = 2.0 * math.exp(-a * K) / math.sqrt(K) - 2.0 * math.sqrt(math.pi * a) * math.erfc(
        math.sqrt(a * K)
    )
    fK = math.exp(-a * K) * K**-1.5
    d1, d3 = _tail_derivatives(a, K)
    tail = integral + 0.5 * fK - d1 / 12.0 + d3 / 720.0
    return head + tail
