"""Spectral toolkit for mode-restricted linearized vortex operators.

Assembles radial collocation discretizations of the swirl-linearized
operators mode by mode, deforms them along complex rays, and extracts
spectral quantities: decay abscissas, pseudospectral bounds, eigenvalue
localization regions, coercivity tables, and semigroup decay curves.

Subpackage layout
-----------------
``grid``
    Mapped Chebyshev radial grids with quadrature weights.
``profiles``
    Background vortex profile functions on the complex sector.
``ops``
    Operator assembly (mode blocks, kernels, frame changes).
``spectral``
    Eigen/resolvent solvers, weighted norms, robustness gates.
``deform``
    Complex-ray deformation, localization discs, Riesz counts.
``waveop``
    Wave-variable reduction for the first angular mode.
``semigroup``
    Heat-kernel propagation and decay-rate extraction.
``study``
    Parameter sweeps, scaling fits, inequality scans, figure data.
``cli``
    Command-line front end and self-test gates.
"""

from .grid import RadialGrid, build_grid
from .ops import ModeParams, OperatorMatrix

__all__ = ["ModeParams", "OperatorMatrix", "RadialGrid", "build_grid", "__version__"]

__version__ = "0.1.0"
