"""Figure renderer for the spectral-toolkit table outputs.

The package is a strict consumer of the CSV/JSON files the ``oseenspec``
command line writes: it draws what is in the files and never recomputes
operator-level mathematics.  The only arithmetic performed here is
presentation-level — least-squares slopes refit from the tabulated
values themselves (so annotations always agree with the data shown) and
point-in-disc / point-in-box membership for marking eigenvalues on the
localization maps.

Four figure kinds are supported, one per table family:

``localization``
    Discs from a regions file, the sampled numerical-range box, and the
    computed eigenvalues with grid-robustness and containment marking.
``scaling``
    Log-log growth of the ``sigma`` and ``psi`` columns of a sweep
    table, with slopes refit from the tabulated values.
``gap-decay``
    Log-log resolvent-gap values against the rotation rate, with the
    tabulated envelope constant and a reference ``beta^(-1/10)`` slope.
``decay-curves``
    Propagated-norm decay against time on a log scale, with the
    tabulated fitted rate and spectral abscissa overlaid.

Rendering is deterministic: fixed fonts, a fixed SVG hash salt, and no
timestamps in the output, so repeated renders of the same spec are
byte-identical.
"""

from .figspec import FigureSpec, SpecError, load_specs
from .readers import FormatError
from .render import RenderReport, render, render_all

__all__ = [
    "FigureSpec",
    "SpecError",
    "FormatError",
    "RenderReport",
    "render",
    "render_all",
    "load_specs",
]

__version__ = "0.1.0"
