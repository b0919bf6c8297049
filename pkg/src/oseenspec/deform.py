"""Complex-scaling machinery: the dilation family U_z, z-independence checks
for the deformed operator families, Riesz-projection eigenvalue counting, the
compact-comparison localization certificate, and the Moebius localization
discs in the spectral plane.

The scaling (U_z u)(r) = z^{1/2} u(z r) is applied *as a function operation*
only for real positive z (interpolation of sampled data); for complex z the
deformed operators are assembled symbolically in :mod:`.ops` (profiles
evaluated at ``z r``), never by interpolating samples along complex rays.

The localization certificate compares two compact (inverse) realizations
``A_alpha`` and ``A`` with ``d = ||A_alpha - A||``: whenever ``d <= delta^2/4``,
(i) every eigenvalue of ``A_alpha`` lies within ``delta`` of an eigenvalue of
``A``, and (ii) inside each ball ``B(mu_k, delta)`` whose closure is disjoint
from all the others, ``A_alpha`` has exactly the multiplicity of ``mu_k``
(counted by contour quadrature of the resolvent).

Localization discs: for each eigenvalue ``lambda_j < 0`` of the quadratic
model and ``delta < 1/|lambda_j|``, the disc ``B(1/lambda_j, delta)`` avoids
the origin, so its image under ``w -> zeta_k^{-2}/w - i beta_k + 1/2`` is
again an exact disc; these discs are the regions that trap the mode-operator
spectrum at large ``alpha``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.interpolate import BarycentricInterpolator, CubicSpline

from .grid import RadialGrid
from .ops import (
    SECTOR_S_HALF_ANGLE,
    ModeParams,
    OperatorMatrix,
    assemble_Hk_z,
    assemble_Hscript,
    assemble_Zz,
    in_sector_S,
    zeta_k,
)
from .spectral import _unpack, eig, weighted_opnorm

__all__ = [
    "DeformationPoint",
    "LocalizationRegion",
    "ProjectionCount",
    "BallCount",
    "CertificateReport",
    "apply_Uz",
    "spectrum_z_independence",
    "riesz_count",
    "perturbation_certificate",
    "localization_regions",
    "containment_check",
    "delta_from_policy",
]

SECTOR_TAGS = ("S", "S4")
DELTA_POLICIES = ("two-sqrt-d", "bauer-fike")

_S4_LO = np.pi / 16.0
_S4_HI = np.pi / 8.0


@dataclass(frozen=True)
class DeformationPoint:
    """A point of the deformation sector, tagged by which sub-sector it
    must lie in: ``S`` is the open sector ``|arg z| < pi/8``; ``S4`` is the
    closed upper wedge ``pi/16 <= arg z <= pi/8``."""

    z: complex
    sector_tag: str = "S"

    def __post_init__(self) -> None:
        if self.sector_tag not in SECTOR_TAGS:
            raise ValueError(
                f"sector_tag must be one of {SECTOR_TAGS}, got {self.sector_tag!r}"
            )
        z = complex(self.z)
        if z == 0:
            raise ValueError("deformation point z must be nonzero")
        theta = float(np.angle(z))
        if self.sector_tag == "S":
            if not in_sector_S(z):
                raise ValueError(
                    f"z={z!r} (arg {theta:.6f}) outside the open sector |arg z| < pi/8"
                )
        else:
            tol = 1e-12
            if not (_S4_LO - tol <= theta <= _S4_HI + tol):
                raise ValueError(
                    f"z={z!r} (arg {theta:.6f}) outside the wedge pi/16 <= arg z <= pi/8"
                )
        object.__setattr__(self, "z", z)


@dataclass(frozen=True)
class LocalizationRegion:
    """Exact disc image of ``B(1/source_eig, delta)`` under the mode-``k``
    map ``w -> zeta_k^{-2}/w - i beta_k + 1/2``."""

    mode: int
    index: int
    center: complex
    radius: float
    source_eig: float
    delta: float

    def __post_init__(self) -> None:
        if not (self.radius > 0):
            raise ValueError(f"radius must be positive, got {self.radius!r}")
        if not (self.delta > 0):
            raise ValueError(f"delta must be positive, got {self.delta!r}")

    def contains(self, lam: complex, slack: float = 0.0) -> bool:
        """True iff ``lam`` lies in the (slack-enlarged) closed disc."""
        return abs(complex(lam) - self.center) <= self.radius + slack


@dataclass(frozen=True)
class ProjectionCount:
    """Result of one contour-quadrature Riesz projection: the trace should be
    a near-real near-integer, and the projector should be idempotent."""

    center: complex
    radius: float
    n_quad: int
    trace: complex
    count: int
    projector_defect: float


@dataclass(frozen=True)
class BallCount:
    """Per-ball outcome of the localization certificate's part (ii)."""

    center: float
    multiplicity: int
    separated: bool
    count: int | None
    matches: bool | None


@dataclass(frozen=True)
class CertificateReport:
    """Outcome of the compact-comparison localization certificate."""

    d: float
    delta: float
    applicable: bool
    status: str
    max_escape: float
    no_escape: bool
    balls: tuple[BallCount, ...]


# ---------------------------------------------------------------------------
# function-level scaling
# ---------------------------------------------------------------------------

def _full_interpolant(v: np.ndarray, grid: RadialGrid):
    """Interpolant of the sampled vector on [0, R_max] with the implied
    homogeneous endpoint values of the discretization."""
    x_full = np.concatenate(([0.0], grid.nodes, [grid.R_max]))
    y_full = np.concatenate(([0.0], np.asarray(v, dtype=complex), [0.0]))
    if grid.scheme == "mapped-chebyshev":
        return BarycentricInterpolator(x_full, y_full)
    return CubicSpline(x_full, y_full)


def apply_Uz(v: np.ndarray, z: float, grid: RadialGrid) -> np.ndarray:
    """Samples of ``z^{1/2} v(z r)`` on the grid nodes.

    ``z`` must be a positive real (operator-level continuation to complex z
    is done in assembly, not by interpolation).  Values of ``v`` beyond
    ``R_max`` are taken to be zero; a warning is raised if the nodes pushed
    past ``R_max`` carry non-negligible quadrature mass.
    """
    z = float(z)
    if not (np.isfinite(z) and z > 0):
        raise ValueError(f"z must be a positive real number, got {z!r}")
    v = np.asarray(v, dtype=complex)
    if v.shape != (grid.n,):
        raise ValueError(f"v has shape {v.shape}, expected ({grid.n},)")
    if z == 1.0:
        return v.copy()
    target = z * grid.nodes
    inside = target <= grid.R_max
    if not np.all(inside):
        total = float(np.sum(grid.quad_weights * np.abs(v) ** 2))
        lost = float(np.sum((grid.quad_weights * np.abs(v) ** 2)[~inside]))
        if total > 0 and lost > 1e-12 * total:
            warnings.warn(
                f"apply_Uz: nodes scaled past R_max carry relative mass "
                f"{lost / total:.3e}; truncation is not negligible",
                stacklevel=2,
            )
    out = np.zeros(grid.n, dtype=complex)
    interp = _full_interpolant(v, grid)
    out[inside] = interp(target[inside])
    return np.sqrt(z) * out


# ---------------------------------------------------------------------------
# z-independence of the deformed spectra
# ---------------------------------------------------------------------------

_FAMILIES = ("Z1", "Zk", "H", "Hscript")


def _assemble_family(family: str, grid: RadialGrid, params: ModeParams,
                     z: complex) -> OperatorMatrix:
    if family == "Z1":
        return assemble_Zz(grid, params, z, which="k1")
    if family == "Zk":
        return assemble_Zz(grid, params, z, which="kgeneral")
    if family == "H":
        return assemble_Hk_z(grid, params, z)
    if family == "Hscript":
        return assemble_Hscript(grid, params, z)
    raise ValueError(f"family must be one of {_FAMILIES}, got {family!r}")


def spectrum_z_independence(family: str, params: ModeParams,
                            z_list, grid: RadialGrid,
                            n_lead: int = 5) -> float:
    """Max drift of the leading ``n_lead`` eigenvalues across the deformation
    points ``z_list`` (all in the open sector ``|arg z| < pi/8``).

    Eigenvalues at each ``z`` are matched to the reference spectrum (first
    entry of ``z_list``) by nearest-neighbour pairing; an ambiguous pairing
    (runner-up closer than twice the best match) is reported by a warning
    rather than silently resolved.
    """
    if family not in _FAMILIES:
        raise ValueError(f"family must be one of {_FAMILIES}, got {family!r}")
    z_list = [complex(z) for z in z_list]
    if len(z_list) == 0:
        raise ValueError("z_list must contain at least one deformation point")
    for z in z_list:
        if not in_sector_S(z):
            raise ValueError(
                f"z={z!r} lies outside the sector |arg z| < pi/8"
            )
    ref = eig(_assemble_family(family, grid, params, z_list[0]))
    lead = ref.eigenvalues[:n_lead]
    drift = 0.0
    for z in z_list[1:]:
        lam = eig(_assemble_family(family, grid, params, z)).eigenvalues
        for mu in lead:
            dist = np.abs(lam - mu)
            order = np.argsort(dist)
            best = float(dist[order[0]])
            if dist.size > 1:
                second = float(dist[order[1]])
                if best > 1e-10 and second < 2.0 * best:
                    warnings.warn(
                        f"ambiguous eigenvalue pairing at z={z:.6g}: "
                        f"distances {best:.3e} and {second:.3e} to {mu:.6g}",
                        stacklevel=2,
                    )
            drift = max(drift, best)
    return drift


# ---------------------------------------------------------------------------
# Riesz-projection counting
# ---------------------------------------------------------------------------

def _riesz_projector(M: np.ndarray, center: complex, radius: float,
                     n_quad: int) -> np.ndarray:
    """Trapezoidal contour quadrature of (1/2 pi i) \\oint (z - M)^{-1} dz."""
    n = M.shape[0]
    ident = np.eye(n, dtype=complex)
    P = np.zeros((n, n), dtype=complex)
    theta = 2.0 * np.pi * np.arange(n_quad) / n_quad
    for t in theta:
        phase = np.exp(1j * t)
        zj = center + radius * phase
        P += phase * sla.solve(zj * ident - M, ident)
    return (radius / n_quad) * P


def riesz_count(A, center: complex, radius: float,
                n_quad: int = 64) -> ProjectionCount:
    """Algebraic multiplicity of the spectrum of ``A`` inside the circle
    ``|z - center| = radius``, by trapezoidal contour quadrature of the
    resolvent.

    Preconditions: ``n_quad >= 32`` and no eigenvalue of ``A`` within
    ``0.05 * radius`` of the contour (checked against a dense eigensolve).
    The count must be stable under doubling ``n_quad``; otherwise the
    quadrature has not converged and an error is raised.
    """
    M, w, label, _, _ = _unpack(A)
    center = complex(center)
    radius = float(radius)
    if not (radius > 0):
        raise ValueError(f"radius must be positive, got {radius!r}")
    if not (isinstance(n_quad, (int, np.integer)) and n_quad >= 32):
        raise ValueError(f"n_quad must be an integer >= 32, got {n_quad!r}")
    n_quad = int(n_quad)

    lam = eig(A).eigenvalues
    gap = np.abs(np.abs(lam - center) - radius)
    if np.min(gap) < 0.05 * radius:
        j = int(np.argmin(gap))
        raise ValueError(
            f"eigenvalue {lam[j]:.6g} of {label} lies within 0.05*radius of "
            f"the contour |z - {center:.6g}| = {radius:.6g}"
        )

    P = _riesz_projector(M, center, radius, n_quad)
    trace = complex(np.trace(P))
    count = int(round(trace.real))
    P2 = _riesz_projector(M, center, radius, 2 * n_quad)
    count2 = int(round(np.trace(P2).real))
    if count2 != count:
        raise ValueError(
            f"contour quadrature did not converge: count {count} at "
            f"n_quad={n_quad} but {count2} at n_quad={2 * n_quad}"
        )
    defect = weighted_opnorm(P @ P - P, w)
    return ProjectionCount(center=center, radius=radius, n_quad=n_quad,
                           trace=trace, count=count, projector_defect=defect)


# ---------------------------------------------------------------------------
# compact-comparison localization certificate
# ---------------------------------------------------------------------------

_STATUS_NOT_APPLICABLE = "certificate not applicable at this alpha"


def _power_opnorm(M: np.ndarray, w: np.ndarray, n_iter: int = 20,
                  seed: int = 0) -> float:
    """Largest singular value in the quadrature inner product, by power
    iteration on the normal matrix (cross-check for the dense SVD)."""
    s = np.sqrt(w)
    B = M * (s[:, None] / s[None, :])
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(M.shape[0]) + 1j * rng.standard_normal(M.shape[0])
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(n_iter):
        y = B.conj().T @ (B @ x)
        est = float(np.linalg.norm(y)) ** 0.5
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0
        x = y / nrm
    return est


def _cluster_eigenvalues(mu: np.ndarray, tol: float):
    """Group a sorted eigenvalue list into clusters of width <= tol,
    returning (centers, multiplicities)."""
    centers: list[complex] = []
    mults: list[int] = []
    for m in mu:
        if centers and abs(m - centers[-1]) <= tol:
            k = mults[-1]
            centers[-1] = (centers[-1] * k + m) / (k + 1)
            mults[-1] = k + 1
        else:
            centers.append(complex(m))
            mults.append(1)
    return np.asarray(centers), np.asarray(mults, dtype=int)


def perturbation_certificate(A_alpha, A, eig_A, delta: float,
                        n_quad: int = 64,
                        max_balls: int | None = None) -> CertificateReport:
    """Certificate comparing a compact matrix family member ``A_alpha``
    against a self-adjoint negative reference ``A`` with eigenvalue data
    ``eig_A``.

    Computes ``d = ||A_alpha - A||`` in the quadrature operator norm (dense
    SVD, cross-checked by power iteration); if ``d > delta^2/4`` the report
    carries status ``"certificate not applicable at this alpha"`` and no ball
    checks are attempted.  Otherwise part (i) verifies that every eigenvalue
    of ``A_alpha`` lies within ``delta`` of an eigenvalue of ``A``, and part
    (ii) runs a Riesz count inside each ball ``B(mu_k, delta)`` whose closure
    is disjoint from all the other balls (centre gap > 2 delta), demanding
    the count equal the multiplicity of ``mu_k``.

    ``max_balls`` limits the (expensive) contour counts to the first few
    separated balls; ``None`` counts every separated ball.
    """
    Ma, wa, label_a, meta_a, _ = _unpack(A_alpha)
    M0, w0, label_0, meta_0, _ = _unpack(A)
    if Ma.shape != M0.shape or not np.allclose(wa, w0):
        raise ValueError(
            f"operators {label_a} and {label_0} live on different grids"
        )
    delta = float(delta)
    if not (delta > 0):
        raise ValueError(f"delta must be positive, got {delta!r}")

    s = np.sqrt(w0)
    S0 = M0 * (s[:, None] / s[None, :])
    sym_defect = np.linalg.norm(S0 - S0.conj().T) / max(1.0, np.linalg.norm(S0))
    if sym_defect > 1e-8:
        raise ValueError(
            f"reference operator {label_0} is not self-adjoint in the "
            f"quadrature inner product (relative defect {sym_defect:.3e})"
        )

    diff = Ma - M0
    d = weighted_opnorm(diff, w0)
    d_power = _power_opnorm(diff, w0)
    if d > 0 and abs(d - d_power) > 1e-2 * d:
        warnings.warn(
            f"power-iteration cross-check of ||A_alpha - A|| disagrees with "
            f"the SVD value: {d_power:.6e} vs {d:.6e}",
            stacklevel=2,
        )

    if d > (delta * delta / 4.0) * (1.0 + 1e-12):
        return CertificateReport(d=d, delta=delta, applicable=False,
                             status=_STATUS_NOT_APPLICABLE,
                             max_escape=float("nan"), no_escape=False,
                             balls=())

    mu = np.asarray(eig_A.eigenvalues)
    scale = float(np.max(np.abs(mu))) if mu.size else 1.0
    centers, mults = _cluster_eigenvalues(mu, tol=1e-8 * max(1.0, scale))
    # deepest (most negative) clusters first: those are the resolved model
    # eigenvalues, and the only candidates for separated balls
    order = np.argsort(centers.real)
    centers, mults = centers[order], mults[order]

    nu = eig(A_alpha).eigenvalues
    nearest = np.min(np.abs(nu[:, None] - centers[None, :]), axis=1)
    max_escape = float(np.max(nearest))
    no_escape = max_escape <= delta * (1.0 + 1e-12)

    balls: list[BallCount] = []
    counted = 0
    for k, (c, m) in enumerate(zip(centers, mults)):
        others = np.abs(centers - c)
        others[k] = np.inf
        separated = bool(np.min(others) > 2.0 * delta)
        count = None
        matches = None
        if separated and (max_balls is None or counted < max_balls):
            pc = riesz_count(A_alpha, center=complex(c), radius=delta,
                             n_quad=n_quad)
            count = pc.count
            matches = bool(count == int(m))
            counted += 1
        balls.append(BallCount(center=float(np.real(c)), multiplicity=int(m),
                               separated=separated, count=count,
                               matches=matches))

    if not no_escape:
        status = "escape detected"
    elif any(b.matches is False for b in balls):
        status = "count mismatch"
    else:
        status = "certified"
    return CertificateReport(d=d, delta=delta, applicable=True, status=status,
                         max_escape=max_escape, no_escape=no_escape,
                         balls=tuple(balls))


# ---------------------------------------------------------------------------
# localization discs
# ---------------------------------------------------------------------------

def delta_from_policy(d: float, policy: str = "two-sqrt-d") -> float:
    """Disc radius from a measured operator-norm distance ``d``.

    ``"two-sqrt-d"`` is the tightest radius admissible for the certificate
    hypothesis ``d <= delta^2/4``; ``"bauer-fike"`` is the near-optimal
    first-order radius ``1.05 d`` used for the figure datasets.
    """
    d = float(d)
    if not (d >= 0 and np.isfinite(d)):
        raise ValueError(f"d must be a finite non-negative real, got {d!r}")
    if policy == "two-sqrt-d":
        return 2.0 * np.sqrt(d)
    if policy == "bauer-fike":
        return 1.05 * d
    raise ValueError(f"policy must be one of {DELTA_POLICIES}, got {policy!r}")


def _invert_disc(c: float, rho: float) -> tuple[complex, float]:
    """Image of the disc B(c, rho) (real centre, 0 outside) under w -> 1/w."""
    denom = c * c - rho * rho
    if denom == 0 or abs(c) <= rho:
        raise ValueError(
            f"disc B({c}, {rho}) contains or touches the origin; "
            f"its inversion is not a disc"
        )
    return complex(c / denom), float(rho / abs(denom))


def localization_regions(params: ModeParams, eigs_of_Zhat, delta: float
                         ) -> list[LocalizationRegion]:
    """Exact disc parameters of the localization regions: images of
    ``B(1/lambda_j, delta)`` under ``w -> zeta_k^{-2}/w - i beta_k + 1/2``.

    ``eigs_of_Zhat`` must be the (negative, real) model eigenvalues sorted in
    descending order; ``delta`` must satisfy ``delta < min_j 1/|lambda_j|``
    so that every disc avoids the origin.
    """
    lam = np.asarray([float(x) for x in eigs_of_Zhat])
    if lam.size == 0:
        raise ValueError("eigs_of_Zhat must be non-empty")
    if np.any(lam >= 0):
        raise ValueError("eigs_of_Zhat must be negative reals")
    if np.any(np.diff(lam) > 0):
        raise ValueError("eigs_of_Zhat must be sorted in descending order")
    delta = float(delta)
    if not (delta > 0):
        raise ValueError(f"delta must be positive, got {delta!r}")
    dmax = float(np.min(1.0 / np.abs(lam)))
    if delta >= dmax:
        raise ValueError(
            f"delta={delta:.6g} too large: needs delta < min_j 1/|lambda_j| "
            f"= {dmax:.6g} so that 0 lies outside every disc"
        )
    zi2 = zeta_k(params) ** (-2.0)
    shift = -1j * params.beta_k + 0.5
    regions = []
    for j, lj in enumerate(lam, start=1):
        c_inv, rho_inv = _invert_disc(1.0 / lj, delta)
        regions.append(LocalizationRegion(
            mode=params.k, index=j,
            center=zi2 * c_inv + shift,
            radius=abs(zi2) * rho_inv,
            source_eig=float(lj), delta=delta,
        ))
    return regions


def containment_check(lams, params: ModeParams, eigs_of_Zhat,
                      delta: float) -> np.ndarray:
    """Flags, for each eigenvalue in ``lams``, membership of the union of
    localization discs (checked in the inverted plane ``w = 1/(zeta_k^2
    (lam + i beta_k - 1/2))``, where every region is the disc
    ``B(1/lambda_j, delta)``) or of the tail disc ``B(0, delta +
    1/|lambda_last|)`` that covers the model eigenvalues beyond the resolved
    list."""
    lam_model = np.asarray([float(x) for x in eigs_of_Zhat])
    if lam_model.size == 0 or np.any(lam_model >= 0):
        raise ValueError("eigs_of_Zhat must be a non-empty list of negative reals")
    delta = float(delta)
    if not (delta > 0):
        raise ValueError(f"delta must be positive, got {delta!r}")
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    z2 = zeta_k(params) ** 2.0
    shift = 1j * params.beta_k - 0.5
    w = 1.0 / (z2 * (lams + shift))
    inv_centers = 1.0 / lam_model
    dist = np.min(np.abs(w[:, None] - inv_centers[None, :]), axis=1)
    tail = delta + float(np.min(1.0 / np.abs(lam_model)))
    return (dist <= delta) | (np.abs(w) <= tail)
