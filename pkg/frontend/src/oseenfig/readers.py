"""Strict readers for the spectral-toolkit table formats.

Each reader checks the file against the documented column set before
returning anything; a missing column is reported by name, and a bad
value is reported with the file line number it sits on (the header is
line 1, so the first data row is line 2).  JSON files are checked key
by key, with the entry index for array files.

Readers return plain ``dict``s of numpy arrays (CSV) or dicts/lists of
dicts (JSON) — no domain objects, no recomputation.
"""

from __future__ import annotations

from pathlib import Path
import csv
import json
import numbers

import numpy as np

__all__ = [
    "FormatError",
    "SWEEP_COLUMNS",
    "SPECTRUM_COLUMNS",
    "GAP_COLUMNS",
    "DECAY_COLUMNS",
    "REGION_KEYS",
    "BOX_KEYS",
    "read_sweep",
    "read_spectrum",
    "read_gap",
    "read_decay",
    "read_regions",
    "read_box",
]

#: Column sets of the CSV families (order as written by the toolkit CLI;
#: readers address columns by name, so extra columns are tolerated).
SWEEP_COLUMNS = ("alpha", "sigma", "psi", "argmax_k")
SPECTRUM_COLUMNS = ("k", "alpha", "re", "im", "residual", "grid_robust")
GAP_COLUMNS = ("k", "alpha", "beta", "d", "fitted_exponent", "C_fit")
DECAY_COLUMNS = ("k", "alpha", "tau", "norm", "fitted_rate", "abscissa")

#: Key sets of the JSON families.
REGION_KEYS = ("k", "j", "center_re", "center_im", "radius", "delta")
BOX_KEYS = ("k", "alpha", "delta_policy", "d", "delta",
            "re_max", "im_min", "im_max")


class FormatError(ValueError):
    """An input file does not conform to the documented table format."""


def _read_lines(path: Path) -> list[str]:
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FormatError(f"input file not found: {path}") from None
    except OSError as exc:
        raise FormatError(f"cannot read input file {path}: {exc}") from exc
    return text.splitlines()


def _read_csv(path, required: tuple[str, ...],
              int_columns: tuple[str, ...] = ()) -> dict:
    """Parse a toolkit CSV into named float/int arrays.

    ``required`` columns must all be present in the header; every data
    row must have one field per header column; numeric parse failures
    name the column and the 1-based file line.
    """
    path = Path(path)
    lines = _read_lines(path)
    if not lines:
        raise FormatError(f"{path}: empty file, expected a header line with "
                          f"columns {list(required)}")
    rows = list(csv.reader(lines))
    header = [h.strip() for h in rows[0]]
    for col in required:
        if col not in header:
            raise FormatError(
                f"{path}: missing column '{col}' (header has {header})")
    index = {col: header.index(col) for col in required}

    data: dict = {col: [] for col in required}
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise FormatError(
                f"{path}: row at line {line_no}: expected {len(header)} "
                f"fields, got {len(row)}")
        for col in required:
            cell = row[index[col]]
            try:
                value = int(cell) if col in int_columns else float(cell)
            except ValueError:
                kind = "an integer" if col in int_columns else "a number"
                raise FormatError(
                    f"{path}: row at line {line_no}: column '{col}': "
                    f"could not parse {cell!r} as {kind}") from None
            data[col].append(value)

    out = {}
    for col in required:
        dtype = int if col in int_columns else float
        out[col] = np.asarray(data[col], dtype=dtype)
    out["n_rows"] = len(data[required[0]])
    out["path"] = path
    return out


def read_sweep(path) -> dict:
    """Sweep table: ``alpha,sigma,psi,argmax_k`` rows, alpha increasing."""
    data = _read_csv(path, SWEEP_COLUMNS, int_columns=("argmax_k",))
    if data["n_rows"] and np.any(np.diff(data["alpha"]) <= 0):
        bad = int(np.argmax(np.diff(data["alpha"]) <= 0))
        raise FormatError(
            f"{data['path']}: column 'alpha' must increase row to row; "
            f"violated at line {bad + 3}")
    return data


def read_spectrum(path) -> dict:
    """Spectrum table: ``k,alpha,re,im,residual,grid_robust`` rows."""
    data = _read_csv(path, SPECTRUM_COLUMNS,
                     int_columns=("k", "grid_robust"))
    flags = data["grid_robust"]
    bad = np.nonzero((flags != 0) & (flags != 1))[0]
    if bad.size:
        raise FormatError(
            f"{data['path']}: row at line {int(bad[0]) + 2}: column "
            f"'grid_robust' must be 0 or 1, got {int(flags[bad[0]])}")
    return data


def read_gap(path) -> dict:
    """Gap-decay table: ``k,alpha,beta,d,fitted_exponent,C_fit`` rows."""
    data = _read_csv(path, GAP_COLUMNS, int_columns=("k",))
    if data["n_rows"] == 0:
        raise FormatError(f"{data['path']}: gap-decay table has no data rows")
    return data


def read_decay(path) -> dict:
    """Decay-curve table: ``k,alpha,tau,norm,fitted_rate,abscissa`` rows."""
    data = _read_csv(path, DECAY_COLUMNS, int_columns=("k",))
    if data["n_rows"] == 0:
        raise FormatError(f"{data['path']}: decay table has no data rows")
    return data


def _load_json(path: Path):
    lines = _read_lines(path)
    try:
        return json.loads("\n".join(lines))
    except json.JSONDecodeError as exc:
        # json errors carry "line N column M" positions already
        raise FormatError(f"{path}: not valid JSON: {exc}") from exc


def _require_number(entry: dict, key: str, where: str, path: Path) -> float:
    value = entry[key]
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise FormatError(
            f"{path}: {where}: key '{key}' must be a number, got {value!r}")
    return float(value)


def read_regions(path) -> list[dict]:
    """Regions file: JSON array of disc entries.

    Each entry carries ``k, j, center_re, center_im, radius, delta``;
    a missing key is reported with the (1-based) entry index.
    """
    path = Path(path)
    raw = _load_json(path)
    if not isinstance(raw, list):
        raise FormatError(
            f"{path}: regions file must be a JSON array of disc entries, "
            f"got {type(raw).__name__}")
    regions = []
    for i, entry in enumerate(raw, start=1):
        if not isinstance(entry, dict):
            raise FormatError(f"{path}: entry {i}: must be an object")
        for key in REGION_KEYS:
            if key not in entry:
                raise FormatError(f"{path}: entry {i}: missing key '{key}'")
        where = f"entry {i}"
        regions.append({
            "k": int(_require_number(entry, "k", where, path)),
            "j": int(_require_number(entry, "j", where, path)),
            "center_re": _require_number(entry, "center_re", where, path),
            "center_im": _require_number(entry, "center_im", where, path),
            "radius": _require_number(entry, "radius", where, path),
            "delta": _require_number(entry, "delta", where, path),
        })
        if regions[-1]["radius"] <= 0:
            raise FormatError(
                f"{path}: entry {i}: key 'radius' must be positive, "
                f"got {regions[-1]['radius']!r}")
    return regions


def read_box(path) -> dict:
    """Numerical-range box file: one JSON object.

    Carries ``k, alpha, delta_policy, d, delta, re_max, im_min, im_max``;
    a missing key is reported by name.
    """
    path = Path(path)
    raw = _load_json(path)
    if not isinstance(raw, dict):
        raise FormatError(
            f"{path}: box file must be a JSON object, got "
            f"{type(raw).__name__}")
    for key in BOX_KEYS:
        if key not in raw:
            raise FormatError(f"{path}: missing key '{key}'")
    box = {
        "k": int(_require_number(raw, "k", "box", path)),
        "alpha": _require_number(raw, "alpha", "box", path),
        "delta_policy": str(raw["delta_policy"]),
        "d": _require_number(raw, "d", "box", path),
        "delta": _require_number(raw, "delta", "box", path),
        "re_max": _require_number(raw, "re_max", "box", path),
        "im_min": _require_number(raw, "im_min", "box", path),
        "im_max": _require_number(raw, "im_max", "box", path),
    }
    if box["im_min"] > box["im_max"]:
        raise FormatError(
            f"{path}: key 'im_min' ({box['im_min']!r}) exceeds 'im_max' "
            f"({box['im_max']!r})")
    return box
