"""Radial collocation grids on ``(0, R_max)`` with implicit Dirichlet ends.

Two schemes are provided.  ``mapped-chebyshev`` places Chebyshev–Lobatto
points on ``[0, R_max]`` and drops both endpoints, so every grid function
implicitly vanishes at ``r = 0`` and ``r = R_max``; derivative matrices are
the full-grid spectral differentiation matrices restricted to the interior
block, and quadrature weights are Clenshaw–Curtis.  ``uniform-interior``
uses equispaced interior nodes with central differences and trapezoid
weights.

``r = 0`` is never a node: all operators of interest carry ``c / r**2``
potentials and their eigenfunctions vanish at the origin at least like
``r**(3/2)``, so interior collocation with implicit Dirichlet data is
consistent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["RadialGrid", "build_grid", "second_derivative_check"]

SCHEMES = ("mapped-chebyshev", "uniform-interior")


@dataclass(frozen=True)
class RadialGrid:
    """Interior radial collocation grid.

    Attributes
    ----------
    nodes : ndarray, shape (n,)
        Strictly increasing interior nodes, ``0 < r_1 < ... < r_n < R_max``.
    quad_weights : ndarray, shape (n,)
        Positive weights with ``sum(w * f(nodes)) ~ int_0^R_max f dr`` for
        functions vanishing at both ends.
    D1, D2 : ndarray, shape (n, n)
        First/second derivative collocation matrices acting on interior
        samples of functions with homogeneous Dirichlet endpoint values.
    R_max : float
        Truncation radius.
    scheme : str
        One of ``mapped-chebyshev`` or ``uniform-interior``.
    """

    nodes: np.ndarray
    quad_weights: np.ndarray
    D1: np.ndarray
    D2: np.ndarray
    R_max: float
    scheme: str

    @property
    def n(self) -> int:
        return self.nodes.size

    def __post_init__(self):
        for name in ("nodes", "quad_weights", "D1", "D2"):
            getattr(self, name).setflags(write=False)


def _cheb_lobatto(m: int):
    """Chebyshev–Lobatto points (ascending) and differentiation matrix on [-1, 1]."""
    j = np.arange(m)
    x = -np.cos(np.pi * j / (m - 1))
    c = np.ones(m)
    c[0] = 2.0
    c[-1] = 2.0
    c = c * (-1.0) ** j
    dx = x[:, None] - x[None, :] + np.eye(m)
    D = np.outer(c, 1.0 / c) / dx
    D = D - np.diag(D.sum(axis=1))
    return x, D

def _clenshaw_curtis_weights(m: int) -> np.ndarray:
    """Clenshaw–Curtis weights for the m Lobatto points on [-1, 1]."""
    n = m - 1
    theta = np.pi * np.arange(n + 1) / n
    w = np.zeros(n + 1)
    v = np.ones(n - 1)
    if n % 2 == 0:
        w[0] = 1.0 / (n**2 - 1)
        w[n] = w[0]
        for k in range(1, n // 2):
            v -= 2.0 * np.cos(2 * k * theta[1:-1]) / (4 * k**2 - 1)
        v -= np.cos(n * theta[1:-1]) / (n**2 - 1)
    else:
        w[0] = 1.0 / n**2
        w[n] = w[0]
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[1:-1]) / (4 * k**2 - 1)
    w[1:-1] = 2.0 * v / n
    return w


def build_grid(n: int, R_max: float, scheme: str = "mapped-chebyshev") -> RadialGrid:
    """Build an interior radial grid.

    Parameters
    ----------
    n : int
        Number of interior nodes, at least 8.
    R_max : float
        Truncation radius, at least 4 (the Gaussian core must be resolved).
    scheme : str
        ``mapped-chebyshev`` (default) or ``uniform-interior``.

    Raises
    ------
    ValueError
        If a parameter is out of range; the message names the field.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ValueError(f"n must be an integer, got {n!r}")
    if n < 8:
        raise ValueError(f"n must be >= 8, got {n}")
    R_max = float(R_max)
    if not np.isfinite(R_max) or R_max < 4.0:
        raise ValueError(f"R_max must be >= 4, got {R_max}")
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")

    if scheme == "mapped-chebyshev":
        m = n + 2
        x, D = _cheb_lobatto(m)
        r = R_max * (x + 1.0) / 2.0
        Dfull = (2.0 / R_max) * D
        D2full = Dfull @ Dfull
        w = _clenshaw_curtis_weights(m) * (R_max / 2.0)
        sl = slice(1, m - 1)
        nodes = r[sl]
        weights = w[sl]
        # Restriction to the interior block encodes u(0) = u(R_max) = 0.
        D1 = Dfull[sl, sl]
        D2 = D2full[sl, sl]
    else:
        h = R_max / (n + 1)
        nodes = h * np.arange(1, n + 1)
        weights = np.full(n, h)
        D1 = np.zeros((n, n))
        idx = np.arange(n - 1)
        D1[idx, idx + 1] = 1.0 / (2.0 * h)
        D1[idx + 1, idx] = -1.0 / (2.0 * h)
        # Ghost values at r=0 and r=R_max are zero (Dirichlet), so the
        # one-sided rows need no correction.
        D2 = D1 @ D1

    return RadialGrid(
        nodes=np.ascontiguousarray(nodes),
        quad_weights=np.ascontiguousarray(weights),
        D1=np.ascontiguousarray(D1),
        D2=np.ascontiguousarray(D2),
        R_max=R_max,
        scheme=scheme,
    )


def second_derivative_check(grid: RadialGrid, trial: Callable, trial_dd: Callable) -> float:
    """Max-abs error of ``D2`` on a trial function with known second derivative.

    Parameters
    ----------
    grid : RadialGrid
    trial : callable
        Twice-differentiable function vanishing at ``0`` and ``R_max``.
    trial_dd : callable
        Exact second derivative of ``trial``.

    Returns
    -------
    float
        ``max_i |(D2 u)_i - u''(r_i)|`` over nodes away from the boundary
        layers (the innermost and outermost 2% of nodes are excluded).
    """
    r = grid.nodes
    u = np.asarray(trial(r), dtype=float)
    udd = np.asarray(trial_dd(r), dtype=float)
    err = np.abs(grid.D2 @ u - udd)
    skirt = max(1, grid.n // 50)
    return float(np.max(err[skirt:-skirt])) if grid.n > 2 * skirt else float(np.max(err))
