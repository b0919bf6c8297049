"""Radial vortex profiles and the entire functions they are built from.

Everything in this module is a function of the single similarity variable
``r`` (or of ``z = r**2 / 4``).  The building blocks are the entire functions

    F0(z) = exp(z) - z - 1
    F1(z) = (1 - exp(-z)) / z
    F2(z) = exp(-z / 2)
    F3(z) = (2 z**2 / F0(z) - 3 + 2 z) * z / F0(z)

from which the angular velocity ``sigma(r) = F1(r**2/4)``, the Gaussian
envelope ``g(r) = F2(r**2/4)``, and the ratio profile ``f(r) = F3(r**2/4)``
are obtained.  ``F1``, ``F1p`` and ``F0`` switch to truncated Taylor series
below ``|z| < 1/2`` so that cancellation near ``z = 0`` never degrades
accuracy; ``F3`` inherits the stable branch through ``F0``.

All functions accept real or complex arguments.  Complex radial arguments
must lie in the closed sector ``|arg r| <= pi/4`` (so that ``Re(r**2) >= 0``
and every Gaussian factor stays bounded); arguments outside the sector raise
``ValueError``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "F0",
    "F1",
    "F1_defect",
    "F1p",
    "F2",
    "F3",
    "sigma",
    "sigma_prime",
    "g",
    "f",
    "S_profile",
    "G_profile",
    "m_cum",
    "ProfileSet",
    "default_profiles",
]

# Complex radial arguments are trusted only inside this sector (half-angle
# pi/4, with a whisker of slack for round-off in angle computations).
_SECTOR_HALF_ANGLE = np.pi / 4.0
_SECTOR_SLACK = 1e-12

# Series/closed-form switch radius for the F-functions.
_SERIES_RADIUS = 0.5
_SERIES_TERMS = 20


def _check_sector(r: np.ndarray) -> None:
    """Reject complex radial arguments outside ``|arg r| <= pi/4``."""
    if not np.iscomplexobj(r):
        return
    rr = np.asarray(r)
    nz = rr[np.abs(rr) > 0]
    if nz.size and np.max(np.abs(np.angle(nz))) > _SECTOR_HALF_ANGLE + _SECTOR_SLACK:
        worst = float(np.max(np.abs(np.angle(nz))))
        raise ValueError(
            f"complex radial argument leaves the sector |arg r| <= pi/4 "
            f"(worst angle {worst:.6g} rad)"
        )


def _prepare(z) -> np.ndarray:
    z = np.asarray(z)
    if np.iscomplexobj(z):
        return z.astype(complex)
    return z.astype(float)


def F0(z):
    """``exp(z) - z - 1``, series below ``|z| < 1/2`` (double zero at 0)."""
    z = _prepare(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z, dtype=complex if np.iscomplexobj(z) else float)
    small = np.abs(z) < _SERIES_RADIUS
    zs = z[small]
    acc = np.zeros_like(zs)
    term = zs * zs / 2.0
    for n in range(2, 2 + _SERIES_TERMS):
        acc = acc + term
        term = term * zs / (n + 1)
    out[small] = acc
    zb = z[~small]
    out[~small] = np.exp(zb) - zb - 1.0
    return out[0] if scalar else out


def F1(z):
    """``(1 - exp(-z)) / z``, series below ``|z| < 1/2``; ``F1(0) = 1``."""
    z = _prepare(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z, dtype=complex if np.iscomplexobj(z) else float)
    small = np.abs(z) < _SERIES_RADIUS
    zs = z[small]
    acc = np.zeros_like(zs)
    term = np.ones_like(zs)
    for n in range(_SERIES_TERMS):
        acc = acc + term
        term = term * (-zs) / (n + 2)
    out[small] = acc
    zb = z[~small]
    out[~small] = (1.0 - np.exp(-zb)) / zb
    return out[0] if scalar else out


def F1_defect(z):
    """``F1(z) - 1 + z/2``, the quadratic-order defect of :func:`F1`.

    Evaluated by its own series below ``|z| < 1/2`` so the ``z^2/6``
    leading term is not lost to cancellation against the O(1) head;
    the direct formula takes over where the defect is no longer tiny.
    """
    z = _prepare(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z, dtype=complex if np.iscomplexobj(z) else float)
    small = np.abs(z) < _SERIES_RADIUS
    zs = z[small]
    acc = np.zeros_like(zs)
    term = zs * zs / 6.0
    for n in range(2, 2 + _SERIES_TERMS):
        acc = acc + term
        term = term * (-zs) / (n + 2)
    out[small] = acc
    zb = z[~small]
    out[~small] = (1.0 - np.exp(-zb)) / zb - 1.0 + zb / 2.0
    return out[0] if scalar else out


def F1p(z):
    """Derivative of :func:`F1`; closed form ``((1+z) exp(-z) - 1) / z**2``."""
    z = _prepare(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z, dtype=complex if np.iscomplexobj(z) else float)
    small = np.abs(z) < _SERIES_RADIUS
    zs = z[small]
    # d/dz sum (-z)^n/(n+1)! = sum_{n>=1} (-1)^n n z^{n-1} / (n+1)!
    acc = np.zeros_like(zs)
    sign = -1.0
    fact = 2.0  # (1+1)!
    zp = np.ones_like(zs)
    for n in range(1, 1 + _SERIES_TERMS):
        acc = acc + sign * n * zp / fact
        zp = zp * zs
        fact = fact * (n + 2)
        sign = -sign
    out[small] = acc
    zb = z[~small]
    out[~small] = (np.exp(-zb) * (1.0 + zb) - 1.0) / (zb * zb)
    return out[0] if scalar else out


def F2(z):
    """``exp(-z/2)``."""
    return np.exp(-_prepare(z) / 2.0)


def F3(z):
    """``(2 z**2 / F0 - 3 + 2 z) * z / F0``; behaves like ``2/z + 2/3`` at 0.

    For ``Re z`` beyond the exp overflow threshold the value is returned
    as 0: every term carries at least one factor ``z^p / F0 ~ z^p e^{-z}``,
    which underflows long before ``e^z`` overflows.
    """
    z = _prepare(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.zeros_like(z, dtype=complex if np.iscomplexobj(z) else float)
    ok = np.real(z) < 350.0
    zk = z[ok]
    f0 = F0(zk)
    out[ok] = (2.0 * zk * zk / f0 - 3.0 + 2.0 * zk) * zk / f0
    return out[0] if scalar else out


def sigma(r):
    """Angular-average profile ``sigma(r) = F1(r**2 / 4)``."""
    r = _prepare(r)
    _check_sector(r)
    return F1(r * r / 4.0)


def sigma_prime(r):
    """``d sigma / dr = (r/2) F1'(r**2 / 4)`` (negative for real ``r > 0``)."""
    r = _prepare(r)
    _check_sector(r)
    return (r / 2.0) * F1p(r * r / 4.0)


def g(r):
    """Gaussian envelope ``g(r) = exp(-r**2 / 8) = F2(r**2 / 4)``."""
    r = _prepare(r)
    _check_sector(r)
    return F2(r * r / 4.0)


def f(r):
    """Ratio profile ``f(r) = F3(r**2 / 4)``; strictly positive, ~ ``8/r**2`` at 0."""
    r = _prepare(r)
    _check_sector(r)
    return F3(r * r / 4.0)


def S_profile(r):
    """``S(r) = sigma(r) / (8 pi) = (1 - exp(-r**2/4)) / (2 pi r**2)``."""
    return sigma(r) / (8.0 * np.pi)


def G_profile(r):
    """Gaussian vorticity ``G(r) = exp(-r**2 / 4) / (4 pi)``."""
    r = _prepare(r)
    _check_sector(r)
    return np.exp(-r * r / 4.0) / (4.0 * np.pi)


def m_cum(r):
    """Cumulative moment ``m(r) = int_0^r s**3 g(s)**2 ds = 8 exp(-z) F0(z)``,
    with ``z = r**2 / 4``.  Satisfies ``sigma'(r) = -m(r) / r**3``."""
    r = _prepare(r)
    _check_sector(r)
    z = r * r / 4.0
    return 8.0 * np.exp(-z) * F0(z)


@dataclass(frozen=True)
class ProfileSet:
    """Bundle of the radial profiles used by the operator assemblers.

    Attributes
    ----------
    S, sigma, g, G, f : callable
        Vectorised profile functions of the radial variable.  Each accepts
        real arrays or complex arrays inside the sector ``|arg r| <= pi/4``.
    """

    S: Callable[[np.ndarray], np.ndarray]
    sigma: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], np.ndarray]
    G: Callable[[np.ndarray], np.ndarray]
    f: Callable[[np.ndarray], np.ndarray]


def default_profiles() -> ProfileSet:
    """The standard self-similar profile family used throughout."""
    return ProfileSet(S=S_profile, sigma=sigma, g=g, G=G_profile, f=f)
