"""Figure specifications: what to draw, from which files, to which path.

A figure spec is a small JSON object.  ``kind`` selects the renderer,
``inputs`` maps role names to input files, ``out`` is the output path
(vector formats only), and ``style`` holds presentation options.  A spec
file contains one such object or a list of them; the list is rendered
as a single-process batch.

Relative paths — both inputs and ``out`` — resolve against the
directory containing the spec file, so a spec bundle can be moved
around as a unit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
import json
import numbers

__all__ = ["KINDS", "FigureSpec", "SpecError", "load_specs"]

#: Supported figure kinds.
KINDS = ("localization", "scaling", "gap-decay", "decay-curves")

#: Input roles each kind requires.  Every role maps to one file, except
#: the curve-family roles (``gap``, ``decay``) which accept one or more.
REQUIRED_INPUTS = {
    "localization": ("regions", "box", "spectrum"),
    "scaling": ("sweep",),
    "gap-decay": ("gap",),
    "decay-curves": ("decay",),
}

#: Roles that accept a list of files (one curve per file).
_MULTI_ROLES = frozenset({"gap", "decay"})

#: Recognised style options.
_STYLE_KEYS = frozenset({
    "title",      # str, figure title
    "xlim",       # [lo, hi], x-axis limits
    "ylim",       # [lo, hi], y-axis limits
    "figsize",    # [width, height] in inches
    "annotate",   # bool, draw the text annotations (default True)
    "reference",  # bool, draw reference slopes / guide lines (default True)
    "legend",     # bool, draw the legend (default True)
})

#: Output suffixes accepted; rendering is vector-only.
_VECTOR_SUFFIXES = (".svg", ".pdf")


class SpecError(ValueError):
    """A figure spec is malformed; ``field`` names the offending entry."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(message)
        self.field = field


def _require_pair(value, name: str) -> tuple[float, float]:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, numbers.Real) for v in value)):
        raise SpecError(
            f"style option '{name}' must be a pair of numbers, got {value!r}",
            field=name)
    return (float(value[0]), float(value[1]))


@dataclass(frozen=True)
class FigureSpec:
    """One figure: kind, input files by role, output path, style options."""

    kind: str
    inputs: dict
    out: Path
    style: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path) -> "FigureSpec":
        """Validate a raw JSON object and resolve paths against ``base_dir``."""
        if not isinstance(raw, dict):
            raise SpecError(f"figure spec must be an object, got {type(raw).__name__}")
        unknown = set(raw) - {"kind", "inputs", "out", "style"}
        if unknown:
            raise SpecError(
                f"unknown figure-spec key {sorted(unknown)[0]!r}",
                field=sorted(unknown)[0])

        kind = raw.get("kind")
        if kind not in KINDS:
            raise SpecError(
                f"unknown figure kind {kind!r}; expected one of {list(KINDS)}",
                field="kind")

        inputs_raw = raw.get("inputs")
        if not isinstance(inputs_raw, dict):
            raise SpecError("figure spec needs an 'inputs' object mapping "
                            "role names to file paths", field="inputs")
        required = REQUIRED_INPUTS[kind]
        inputs: dict = {}
        for role in required:
            if role not in inputs_raw:
                raise SpecError(
                    f"figure spec for kind '{kind}' is missing input "
                    f"'{role}'", field=role)
        extra = set(inputs_raw) - set(required)
        if extra:
            raise SpecError(
                f"figure kind '{kind}' does not take input "
                f"{sorted(extra)[0]!r}; it takes {list(required)}",
                field=sorted(extra)[0])
        for role, value in inputs_raw.items():
            paths = value if isinstance(value, list) else [value]
            if not paths or not all(isinstance(p, str) and p for p in paths):
                raise SpecError(
                    f"input '{role}' must be a file path or a non-empty "
                    f"list of file paths, got {value!r}", field=role)
            if len(paths) > 1 and role not in _MULTI_ROLES:
                raise SpecError(
                    f"input '{role}' takes a single file, got {len(paths)}",
                    field=role)
            inputs[role] = tuple((base_dir / p).resolve() for p in paths)

        out_raw = raw.get("out")
        if not isinstance(out_raw, str) or not out_raw:
            raise SpecError("figure spec needs an 'out' file path",
                            field="out")
        out = (base_dir / out_raw).resolve()
        if out.suffix.lower() not in _VECTOR_SUFFIXES:
            raise SpecError(
                f"'out' must be a vector-graphic path ending in "
                f"{' or '.join(_VECTOR_SUFFIXES)}, got {out_raw!r}",
                field="out")

        style_raw = raw.get("style", {})
        if not isinstance(style_raw, dict):
            raise SpecError("'style' must be an object", field="style")
        style: dict = {}
        for key, value in style_raw.items():
            if key not in _STYLE_KEYS:
                raise SpecError(
                    f"unknown style option {key!r}; known options are "
                    f"{sorted(_STYLE_KEYS)}", field=key)
            if key in ("xlim", "ylim", "figsize"):
                style[key] = _require_pair(value, key)
            elif key in ("annotate", "reference", "legend"):
                if not isinstance(value, bool):
                    raise SpecError(
                        f"style option '{key}' must be a boolean, "
                        f"got {value!r}", field=key)
                style[key] = value
            else:  # title
                if not isinstance(value, str):
                    raise SpecError(
                        f"style option '{key}' must be a string, "
                        f"got {value!r}", field=key)
                style[key] = value

        return cls(kind=kind, inputs=inputs, out=out, style=style)


def load_specs(path) -> list[FigureSpec]:
    """Load a spec file: one JSON object or a list of them.

    Returns the specs in file order.  Malformed JSON or malformed specs
    raise :class:`SpecError`; the batch is validated up front so a bad
    entry is reported before any figure is written.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"cannot read spec file {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec file {path} is not valid JSON: {exc}") from exc
    entries = raw if isinstance(raw, list) else [raw]
    if not entries:
        raise SpecError(f"spec file {path} contains no figure specs")
    specs = []
    for i, entry in enumerate(entries):
        try:
            specs.append(FigureSpec.from_dict(entry, base_dir=path.parent))
        except SpecError as exc:
            raise SpecError(f"spec {i + 1} of {len(entries)}: {exc}",
                            field=exc.field) from exc
    return specs
