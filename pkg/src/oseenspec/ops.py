"""Dense assembly of the mode-restricted linearized vortex operators.

Every operator studied by the toolkit is produced here as a dense complex
matrix acting on interior samples over a :class:`~oseenspec.grid.RadialGrid`:
the nonlocal kernel ``K_k``, the half-integer-conjugated mode operators
``H_k``, the wave-reduced ``L1``, the quadratic-potential models ``Z1_hat``
and ``Zk_hat``, the complexly deformed compact-resolvent operators
``Lhat``/``Zz``/``Hk_z``/``Hscript``, the 2x2 velocity system, and the
exponentially weighted (Y-frame) cross-validation operator.

Conventions
-----------
* ``beta_k = k * alpha / (8 pi)`` is the only place ``alpha`` enters.
* All operators act on the half-integer-conjugated frame (plain ``L^2(dr)``
  on ``(0, R_max)``) unless ``space_tag`` says otherwise; the conjugation is
  ``w = r**(1/2) g(r)**(-1) f`` applied to each component.
* Complex deformation parameters live in the open sector
  ``S = {z != 0 : |arg z| < pi/8}``; profile evaluations at ``z * r`` then
  stay inside the admissible profile sector ``|arg| <= pi/4``.
* The kernel matrix is a quadrature realization of an integral operator
  whose integrand has a derivative kink on the diagonal; an exactly
  integrable kink template is used to correct the diagonal (see
  :func:`kernel_matrix`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional
import warnings

import numpy as np
import scipy.linalg as sla

from .grid import RadialGrid
from . import profiles as pf

__all__ = [
    "ModeParams",
    "OperatorMatrix",
    "SECTOR_S_HALF_ANGLE",
    "in_sector_S",
    "zeta_k",
    "kernel_value",
    "kernel_matrix",
    "kernel_inverse_realization",
    "assemble_Hk",
    "assemble_Hk_z",
    "assemble_L1_wavereduced",
    "assemble_Z1_hat",
    "assemble_Zk_hat",
    "assemble_Zz",
    "assemble_Lhat",
    "assemble_Hscript",
    "assemble_system_LPi",
    "assemble_system_k0",
    "assemble_Yframe_Lk",
    "assemble_fdiv_operator",
    "fdiv_reduce",
]

SPACE_TAGS = ("L2r", "Yk", "V", "L2r_pair")

#: Half-angle of the sector admissible for complex deformation points.
SECTOR_S_HALF_ANGLE = np.pi / 8.0

KERNEL_ROUTES = ("quadrature", "quadrature-plain", "inverse")


@dataclass(frozen=True)
class ModeParams:
    """Angular mode and circulation number.

    ``beta_k`` is always recomputed from ``k`` and ``alpha``; it is never
    stored independently, so the defining relation holds exactly.
    """

    k: int
    alpha: float

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or isinstance(self.k, bool):
            raise ValueError(f"k must be an integer, got {self.k!r}")
        if self.k == 0:
            raise ValueError("k must be a nonzero integer")
        alpha = float(self.alpha)
        if not np.isfinite(alpha):
            raise ValueError(f"alpha must be finite, got {self.alpha!r}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "alpha", alpha)

    @property
    def beta_k(self) -> float:
        return self.k * self.alpha / (8.0 * np.pi)


@dataclass(frozen=True)
class OperatorMatrix:
    """A dense discretized operator together with its provenance.

    Attributes
    ----------
    entries : ndarray
        ``n x n`` complex matrix (``2n x 2n`` when ``space_tag`` is
        ``L2r_pair``).
    grid : RadialGrid
    space_tag : str
        One of ``L2r``, ``Yk``, ``V``, ``L2r_pair``.
    label : str
        Operator identifier.
    params : ModeParams, optional
    deformation : complex, optional
        Deformation point ``z`` for complexly deformed assemblies.
    """

    entries: np.ndarray
    grid: RadialGrid
    space_tag: str
    label: str
    params: Optional[ModeParams] = None
    deformation: Optional[complex] = None

    def __post_init__(self):
        if self.space_tag not in SPACE_TAGS:
            raise ValueError(f"space_tag must be one of {SPACE_TAGS}, got {self.space_tag!r}")
        A = np.asarray(self.entries)
        n = self.grid.n
        want = 2 * n if self.space_tag == "L2r_pair" else n
        if A.shape != (want, want):
            raise ValueError(
                f"entries must be {want}x{want} for space_tag={self.space_tag!r}, got {A.shape}"
            )
        object.__setattr__(self, "entries", A)
        A.setflags(write=False)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def in_sector_S(z: complex) -> bool:
    """True iff ``z`` lies in the open deformation sector ``|arg z| < pi/8``."""
    z = complex(z)
    return z != 0 and abs(np.angle(z)) < SECTOR_S_HALF_ANGLE


def _require_sector(z: complex) -> complex:
    z = complex(z)
    if not in_sector_S(z):
        raise ValueError(
            f"deformation point z={z!r} lies outside the sector |arg z| < pi/8"
        )
    return z


def zeta_k(params: ModeParams) -> complex:
    """Principal fourth root ``zeta_k = (1/16 - i beta_k / 8)**(-1/4)``.

    For ``beta_k > 0`` the argument of ``zeta_k`` lies in ``(0, pi/8)``;
    asymptotically ``zeta_k ~ 2**(3/4) beta_k**(-1/4) e^{i pi/8}``.  The
    result is asserted to lie in the deformation sector.
    """
    omega = 1.0 / 16.0 - 1j * params.beta_k / 8.0
    zeta = omega ** (-0.25)
    if not in_sector_S(zeta):  # pragma: no cover - principal branch guarantees this
        raise AssertionError(f"zeta_k={zeta!r} escaped the sector |arg| < pi/8")
    return zeta


# ----------------------------------------------------------------------
# kernel
# ----------------------------------------------------------------------

def kernel_value(r, s, k: int):
    """Pointwise kernel ``K_k(r, s) = min(r/s, s/r)**|k| * sqrt(r s) / (2|k|)``."""
    if k == 0:
        raise ValueError("k must be nonzero (kernel undefined for k = 0)")
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    ratio = np.minimum(r / s, s / r)
    return ratio ** abs(k) * np.sqrt(r * s) / (2.0 * abs(k))


def _kink_correction(grid: RadialGrid) -> np.ndarray:
    """Diagonal quadrature correction for the kernel's diagonal kink.

    The integrand ``s -> K_k(r_i, s) f(s)`` has a jump of exactly ``-f(r_i)``
    in its ``s``-derivative at ``s = r_i``.  Adding ``f(r_i)`` times the
    template ``t_i(s) = (s - r_i)_+ e^{-(s - r_i)}`` (same unit kink, known
    integral ``1 - e^{-(R-r_i)} (1 + R - r_i)`` over ``[r_i, R]``) yields a
    C^1 integrand that the quadrature handles at full order.  The correction
    is therefore the diagonal matrix ``diag(q - iex)`` with ``q`` the
    quadrature value of the template and ``iex`` its exact integral.
    """
    r = grid.nodes
    w = grid.quad_weights
    d = np.clip(r[None, :] - r[:, None], 0.0, None)
    tmpl = d * np.exp(-d)
    q = tmpl @ w
    iex = 1.0 - np.exp(-(grid.R_max - r)) * (1.0 + grid.R_max - r)
    return q - iex


def kernel_matrix(grid: RadialGrid, k: int, corrected: bool = True) -> OperatorMatrix:
    """Quadrature realization of the nonlocal operator ``K_k``.

    Parameters
    ----------
    grid : RadialGrid
    k : int
        Nonzero mode number; only ``|k|`` enters.
    corrected : bool
        Apply the diagonal kink correction (default).  With
        ``corrected=False`` the entries are exactly
        ``K_k(r_i, r_j) * w_j``.

    Returns
    -------
    OperatorMatrix
        Maps grid samples of ``f`` to grid samples of
        ``int_0^R_max K_k(r, s) f(s) ds``; truncation at ``R_max`` loses
        mass like ``R_max**(-|k|-1)`` against Gaussian-weighted inputs.
    """
    if k == 0:
        raise ValueError("k must be nonzero (kernel undefined for k = 0)")
    r = grid.nodes
    M = kernel_value(r[:, None], r[None, :], k) * grid.quad_weights[None, :]
    if corrected:
        M = M + np.diag(_kink_correction(grid))
    return OperatorMatrix(entries=M, grid=grid, space_tag="L2r",
                          label=f"kernel_K{abs(k)}" + ("" if corrected else "_plain"))


def kernel_inverse_realization(grid: RadialGrid, k: int) -> np.ndarray:
    """Realize ``K_k`` as ``-(D2 - (k^2 - 1/4) r^{-2})^{-1}``.

    The kernel is the Green's function of that operator with the grid's
    implicit Dirichlet ends, so this route has no quadrature kink error;
    it is used for cross-validation of the quadrature realization.
    """
    if k == 0:
        raise ValueError("k must be nonzero (kernel undefined for k = 0)")
    r = grid.nodes
    A = grid.D2 - np.diag((k * k - 0.25) / r**2)
    return -sla.inv(A)


def _kernel_entries(grid: RadialGrid, k: int, route: str) -> np.ndarray:
    if route not in KERNEL_ROUTES:
        raise ValueError(f"kernel_route must be one of {KERNEL_ROUTES}, got {route!r}")
    if route == "inverse":
        return kernel_inverse_realization(grid, k)
    return kernel_matrix(grid, k, corrected=(route == "quadrature")).entries


# ----------------------------------------------------------------------
# weighted symmetrization
# ----------------------------------------------------------------------

def _symmetrize_weighted(A: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Symmetrize ``A`` in the quadrature-weighted inner product.

    Conjugating by ``diag(sqrt(w))`` turns the weighted inner product into
    the Euclidean one; the symmetric part is taken there and mapped back.
    Spectra of the discretizations of formally self-adjoint operators are
    insensitive to this at round-off level while making self-adjointness
    exact for downstream certificates.
    """
    s = np.sqrt(w)
    B = A * (s[:, None] / s[None, :])
    B = 0.5 * (B + B.T)
    return B * (s[None, :] / s[:, None])


# ----------------------------------------------------------------------
# scalar mode operators
# ----------------------------------------------------------------------

def assemble_Hk(grid: RadialGrid, params: ModeParams,
                kernel_route: str = "quadrature") -> OperatorMatrix:
    """Conjugated mode operator
    ``H_k = d_r^2 - (k^2 - 1/4)/r^2 - r^2/16 + 1/2 - i beta_k (sigma - g K_k[g .])``.
    """
    r = grid.nodes
    k = params.k
    beta = params.beta_k
    M = grid.D2.astype(complex) - np.diag((k * k - 0.25) / r**2 + r**2 / 16.0) \
        + 0.5 * np.eye(grid.n)
    if beta != 0.0:
        gv = pf.g(r)
        K = _kernel_entries(grid, k, kernel_route)
        M = M - 1j * beta * (np.diag(pf.sigma(r)) - gv[:, None] * K * gv[None, :])
    return OperatorMatrix(entries=M, grid=grid, space_tag="L2r",
                          label=f"H_k[k={k}]", params=params)


def assemble_L1_wavereduced(grid: RadialGrid, params: ModeParams) -> OperatorMatrix:
    """Wave-operator-reduced ``k = 1`` operator
    ``d_r^2 - 3/(4 r^2) - r^2/16 - f(r) + 1/2 - i beta_1 sigma(r)`` (purely local).
    """
    if params.k != 1:
        raise ValueError(f"wave-reduced operator requires k = 1, got k={params.k}")
    r = grid.nodes
    M = grid.D2.astype(complex) \
        - np.diag(0.75 / r**2 + r**2 / 16.0 + pf.f(r)) \
        + 0.5 * np.eye(grid.n) \
        - 1j * params.beta_k * np.diag(pf.sigma(r))
    return OperatorMatrix(entries=M, grid=grid, space_tag="V",
                          label="L1_wavereduced", params=params)


def assemble_Z1_hat(grid: RadialGrid, symmetrize: bool = True) -> OperatorMatrix:
    """Quadratic-potential model ``Z1_hat = d_r^2 - 35/(4 r^2) - r^2``
    (self-adjoint, negative; eigenvalues ``-8 - 4 l``)."""
    r = grid.nodes
    M = grid.D2 - np.diag(8.75 / r**2 + r**2)
    if symmetrize:
        M = _symmetrize_weighted(M, grid.quad_weights)
    return OperatorMatrix(entries=M.astype(complex), grid=grid, space_tag="L2r",
                          label="Z1_hat")


def assemble_Zk_hat(grid: RadialGrid, k: int, kernel_route: str = "quadrature",
                    symmetrize: bool = True) -> OperatorMatrix:
    """Quadratic-potential model for ``k >= 2``:
    ``Zk_hat = d_r^2 - (k^2 - 1/4)/r^2 - r^2 - 8 K_k`` (self-adjoint, negative)."""
    if not (isinstance(k, (int, np.integer)) and k >= 2):
        raise ValueError(f"k must be an integer >= 2, got {k!r}")
    k = int(k)
    r = grid.nodes
    K = _kernel_entries(grid, k, kernel_route)
    M = grid.D2 - np.diag((k * k - 0.25) / r**2 + r**2) - 8.0 * K
    if symmetrize:
        M = _symmetrize_weighted(M, grid.quad_weights)
    return OperatorMatrix(entries=M.astype(complex), grid=grid, space_tag="L2r",
                          label=f"Zk_hat[k={k}]")


def assemble_Lhat(grid: RadialGrid, params: ModeParams, which: str = "k1",
                  kernel_route: str = "quadrature") -> OperatorMatrix:
    """Rescaled deformed operators obtained by pushing the mode operator to
    the stationary-phase scale ``zeta_k`` and recentering:

    * ``which="k1"`` (requires ``k = 1``):
      ``d_r^2 - (3/(4 r^2) + zeta^2 f(zeta r) + zeta^4 r^2 / 16)
      + i beta_1 zeta^2 (1 - sigma(zeta r))``.
    * ``which="kgeneral"``:
      ``d_r^2 - (k^2 - 1/4)/r^2 - zeta_k^4 r^2 / 16
      + i beta_k zeta_k^2 (1 - sigma(zeta_k r))
      + i beta_k zeta_k^4 g(zeta_k r) K_k [g(zeta_k r) .]``.

    The kernel itself is never analytically continued; only the profile
    envelopes are evaluated at the complex argument ``zeta_k r``.
    """
    if which not in ("k1", "kgeneral"):
        raise ValueError(f"which must be 'k1' or 'kgeneral', got {which!r}")
    r = grid.nodes
    k = params.k
    beta = params.beta_k
    zeta = zeta_k(params)
    z2 = zeta * zeta
    z4 = z2 * z2
    if which == "k1":
        if k != 1:
            raise ValueError(f"which='k1' requires k = 1, got k={k}")
        M = grid.D2.astype(complex) \
            - np.diag(0.75 / r**2 + z2 * pf.f(zeta * r) + z4 * r**2 / 16.0) \
            + 1j * beta * z2 * np.diag(1.0 - pf.sigma(zeta * r))
        label = "Lhat_1"
    else:
        genv = pf.g(zeta * r)
        K = _kernel_entries(grid, k, kernel_route)
        M = grid.D2.astype(complex) \
            - np.diag((k * k - 0.25) / r**2 + z4 * r**2 / 16.0) \
            + 1j * beta * z2 * np.diag(1.0 - pf.sigma(zeta * r)) \
            + 1j * beta * z4 * (genv[:, None] * K * genv[None, :])
        label = f"Lhat_k[k={k}]"
    return OperatorMatrix(entries=M, grid=grid, space_tag="L2r", label=label,
                          params=params, deformation=zeta)


def assemble_Zz(grid: RadialGrid, params: ModeParams, z: complex,
                which: str = "k1", kernel_route: str = "quadrature") -> OperatorMatrix:
    """Deformed quadratic-model resolvent family, entire in ``z`` on the sector:

    * ``which="k1"``:
      ``z^{-2}(d_r^2 - 35/(4 r^2)) - z^2 omega r^2 - i beta_1 + 1/2``,
    * ``which="kgeneral"``:
      ``z^{-2}(d_r^2 - (k^2-1/4)/r^2) - z^2 omega r^2 + i beta_k z^2 K_k
      - i beta_k + 1/2``,

    with ``omega = 1/16 - i beta_k / 8``.  At ``z = zeta_k`` the ``k1``
    variant collapses to ``zeta^{-2} Z1_hat - i beta_1 + 1/2``.
    """
    if which not in ("k1", "kgeneral"):
        raise ValueError(f"which must be 'k1' or 'kgeneral', got {which!r}")
    z = _require_sector(z)
    r = grid.nodes
    beta = params.beta_k
    omega = 1.0 / 16.0 - 1j * beta / 8.0
    zi2 = z ** (-2.0)
    z2 = z * z
    if which == "k1":
        if params.k != 1:
            raise ValueError(f"which='k1' requires k = 1, got k={params.k}")
        pot = 8.75 / r**2
        M = zi2 * (grid.D2.astype(complex) - np.diag(pot)) \
            - z2 * omega * np.diag(r**2) \
            + (0.5 - 1j * beta) * np.eye(grid.n)
        label = "Zz_1"
    else:
        k = params.k
        K = _kernel_entries(grid, k, kernel_route)
        M = zi2 * (grid.D2.astype(complex) - np.diag((k * k - 0.25) / r**2)) \
            - z2 * omega * np.diag(r**2) \
            + 1j * beta * z2 * K \
            + (0.5 - 1j * beta) * np.eye(grid.n)
        label = f"Zz_k[k={k}]"
    return OperatorMatrix(entries=M, grid=grid, space_tag="L2r", label=label,
                          params=params, deformation=z)


def assemble_Hk_z(grid: RadialGrid, params: ModeParams, z: complex,
                  kernel_route: str = "quadrature") -> OperatorMatrix:
    """Deformed mode operator
    ``H_k^z = z^{-2}(d_r^2 - (k^2-1/4)/r^2) - z^2 r^2/16 + 1/2
    - i beta_k (sigma(z r) - z^2 g(z r) K_k [g(z r) .])``;
    coincides with ``assemble_Hk`` at ``z = 1``.
    """
    z = _require_sector(z)
    r = grid.nodes
    k = params.k
    beta = params.beta_k
    zi2 = z ** (-2.0)
    z2 = z * z
    M = zi2 * (grid.D2.astype(complex) - np.diag((k * k - 0.25) / r**2)) \
        - z2 * np.diag(r**2 / 16.0) + 0.5 * np.eye(grid.n)
    if beta != 0.0:
        genv = pf.g(z * r)
        K = _kernel_entries(grid, k, kernel_route)
        M = M - 1j * beta * (np.diag(pf.sigma(z * r))
                             - z2 * (genv[:, None] * K * genv[None, :]))
    return OperatorMatrix(entries=M, grid=grid, space_tag="L2r",
                          label=f"H_k_z[k={k}]", params=params, deformation=z)


def assemble_Hscript(grid: RadialGrid, params: ModeParams, z: complex) -> OperatorMatrix:
    """Kernel-free deformed comparison operator
    ``z^{-2}(d_r^2 - (k^2-1/4)/r^2) - z^2 r^2/16 + 1/2 - i beta_k sigma(z r)``.

    The canonical deformation point is ``z = e^{i sign(alpha k) pi/16}``,
    where the numerical range drops below ``C - c |alpha k|^{1/2}``.
    """
    z = _require_sector(z)
    r = grid.nodes
    k = params.k
    zi2 = z ** (-2.0)
    M = zi2 * (grid.D2.astype(complex) - np.diag((k * k - 0.25) / r**2)) \
        - (z * z) * np.diag(r**2 / 16.0) + 0.5 * np.eye(grid.n) \
        - 1j * params.beta_k * np.diag(pf.sigma(z * r))
    return OperatorMatrix(entries=M, grid=grid, space_tag="L2r",
                          label=f"Hscript[k={k}]", params=params, deformation=z)


# ----------------------------------------------------------------------
# the 2x2 velocity system
# ----------------------------------------------------------------------

def _Mk_block(grid: RadialGrid, k: int) -> np.ndarray:
    """Conjugation of ``L_k - r^{-2}``:
    ``D2 - (k^2 + 3/4)/r^2 - r^2/16 + 1/2``."""
    r = grid.nodes
    return grid.D2 - np.diag((k * k + 0.75) / r**2 + r**2 / 16.0) \
        + 0.5 * np.eye(grid.n)


def assemble_system_LPi(grid: RadialGrid, params: ModeParams) -> OperatorMatrix:
    """Half-integer-conjugated 2x2 velocity system for mode ``k != 0``.

    Blocks (each ``n x n``)::

        [ M_k - i alpha k S      -2ik / r^2              ]
        [ 2ik / r^2 + alpha r S'  M_k - i alpha k S      ]

    where ``M_k`` is the conjugation of ``L_k - r^{-2}``.  Multiplication
    operators commute with the scalar conjugation, so the coupling blocks
    are carried over verbatim.
    """
    r = grid.nodes
    k = params.k
    alpha = params.alpha
    n = grid.n
    Mk = _Mk_block(grid, k).astype(complex)
    diag_block = Mk - 1j * alpha * k * np.diag(pf.S_profile(r))
    coup = 2j * k * np.diag(r**-2.0)
    lower_extra = alpha * np.diag(r * pf.sigma_prime(r) / (8.0 * np.pi))
    M = np.zeros((2 * n, 2 * n), dtype=complex)
    M[:n, :n] = diag_block
    M[:n, n:] = -coup
    M[n:, :n] = coup + lower_extra
    M[n:, n:] = diag_block
    return OperatorMatrix(entries=M, grid=grid, space_tag="L2r_pair",
                          label=f"system_LPi[k={k}]", params=params)


def assemble_system_k0(grid: RadialGrid, alpha: float) -> OperatorMatrix:
    """The ``k = 0`` variant of the velocity system: lower triangular
    ``[[L1, 0], [alpha r S', L1]]`` with
    ``L1 = D2 - 3/(4 r^2) - r^2/16 + 1/2`` (spectral abscissa ``-1/2``)."""
    r = grid.nodes
    n = grid.n
    L1 = _Mk_block(grid, 0).astype(complex)
    M = np.zeros((2 * n, 2 * n), dtype=complex)
    M[:n, :n] = L1
    M[n:, n:] = L1
    M[n:, :n] = float(alpha) * np.diag(r * pf.sigma_prime(r) / (8.0 * np.pi))
    return OperatorMatrix(entries=M, grid=grid, space_tag="L2r_pair",
                          label="system_k0")


# ----------------------------------------------------------------------
# Y-frame cross-validation operator
# ----------------------------------------------------------------------

def assemble_Yframe_Lk(grid: RadialGrid, params: ModeParams,
                       kernel_route: str = "quadrature") -> OperatorMatrix:
    """Exponentially weighted frame operator
    ``L_k - alpha Lambda_k = d_r^2 + (1/r + r/2) d_r - k^2/r^2 + 1
    - i alpha k [S - (G/2) r^{-1/2} K_k r^{1/2}]``.

    Unitarily equivalent to ``assemble_Hk``.  For cross-validation at low
    resolution only: the weight ``G^{-1/2}`` overflows beyond ``r ~ 16``,
    so production eigensolves stay in the conjugated frame.
    """
    r = grid.nodes
    k = params.k
    alpha = params.alpha
    M = grid.D2.astype(complex) + np.diag(1.0 / r + r / 2.0) @ grid.D1 \
        - np.diag((k * k) / r**2) + np.eye(grid.n)
    if alpha != 0.0:
        K = _kernel_entries(grid, k, kernel_route)
        nonlocal_part = 0.5 * pf.G_profile(r)[:, None] * (r[:, None] ** -0.5) \
            * K * (r[None, :] ** 0.5)
        M = M - 1j * alpha * k * (np.diag(pf.S_profile(r)) - nonlocal_part)
    return OperatorMatrix(entries=M, grid=grid, space_tag="Yk",
                          label=f"Yframe_Lk[k={k}]", params=params)


def assemble_fdiv_operator(grid: RadialGrid, params: ModeParams) -> OperatorMatrix:
    """Scalar operator ``L_k + 1/2 - i alpha k S`` satisfied by the
    divergence reduction of a system eigenpair (Y frame)."""
    r = grid.nodes
    k = params.k
    M = grid.D2.astype(complex) + np.diag(1.0 / r + r / 2.0) @ grid.D1 \
        - np.diag((k * k) / r**2) + 1.5 * np.eye(grid.n) \
        - 1j * params.alpha * k * np.diag(pf.S_profile(r))
    return OperatorMatrix(entries=M, grid=grid, space_tag="Yk",
                          label=f"fdiv_residual[k={k}]", params=params)


def fdiv_reduce(eigvec_pair: np.ndarray, grid: RadialGrid, k: int,
                frame: str = "L2r") -> np.ndarray:
    """Divergence reduction ``f_div = r^{-1} d_r(r f_1) + i k f_2 / r`` of a
    system eigenvector pair.

    Parameters
    ----------
    eigvec_pair : ndarray, shape (2n,)
        Stacked pair.  With ``frame="L2r"`` (default) the components are in
        the conjugated frame and are unconjugated via ``f = r^{-1/2} g w``
        before differentiating; ``frame="Y"`` takes them as velocity
        components directly.
    grid : RadialGrid
    k : int
        Angular mode of the pair.

    Returns
    -------
    ndarray, shape (n,)
        Grid samples of ``f_div``.  If the pair is (numerically)
        divergence-free the reduction is uninformative; a warning flags
        ``norm(f_div) < 1e-8 * norm(pair)`` in the quadrature norm.
    """
    v = np.asarray(eigvec_pair)
    n = grid.n
    if v.shape != (2 * n,):
        raise ValueError(f"eigvec_pair must have shape ({2*n},), got {v.shape}")
    if frame not in ("L2r", "Y"):
        raise ValueError(f"frame must be 'L2r' or 'Y', got {frame!r}")
    r = grid.nodes
    w1, w2 = v[:n], v[n:]
    if frame == "L2r":
        conj = r ** (-0.5) * pf.g(r)
        f1, f2 = conj * w1, conj * w2
    else:
        f1, f2 = w1, w2
    fdiv = grid.D1 @ f1 + f1 / r + 1j * k * f2 / r
    wq = grid.quad_weights
    scale = np.sqrt(np.sum(wq * (np.abs(f1) ** 2 + np.abs(f2) ** 2)))
    if scale > 0 and np.sqrt(np.sum(wq * np.abs(fdiv) ** 2)) < 1e-8 * scale:
        warnings.warn("divergence-free pair: f_div is numerically null and the "
                      "reduction is uninformative", stacklevel=2)
    return fdiv
