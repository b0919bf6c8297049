"""Shared fixtures: the vendored toolkit output files and spec writers.

``tests/data`` holds unmodified files from a toolkit ``selftest`` run
(sweep, gap-decay, decay, and the localization trios for modes 1 and 2
at circulation 1000), so the renderer is exercised against the real
formats, not simplified look-alikes.
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture()
def write_spec(tmp_path):
    """Dump a figure-spec payload to JSON in ``tmp_path``, return its path."""

    def _write(payload, name="figures.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload, indent=1), encoding="utf-8")
        return path

    return _write


@pytest.fixture()
def synthetic_localization(tmp_path):
    """Hand-built localization trio with one deliberate containment failure.

    Two discs and a box; three grid-robust eigenvalues of which one sits
    inside the box but outside both discs, plus one non-robust stray.
    """
    regions = [
        {"k": 1, "j": 1, "center_re": -2.0, "center_im": 0.0,
         "radius": 1.0, "delta": 0.1},
        {"k": 1, "j": 2, "center_re": -5.0, "center_im": 0.0,
         "radius": 1.5, "delta": 0.1},
    ]
    box = {"k": 1, "alpha": 10.0, "delta_policy": "bauer-fike", "d": 0.09,
           "delta": 0.1, "re_max": 0.0, "im_min": -10.0, "im_max": 10.0}
    rows = [
        "k,alpha,re,im,residual,grid_robust",
        "1,10,-2.2,0.3,1e-12,1",    # inside disc j=1
        "1,10,-5.0,1.0,1e-12,1",    # inside disc j=2
        "1,10,-8.0,5.0,1e-12,1",    # robust, in box, in no disc: failure
        "1,10,-1.0,8.0,1e-12,0",    # not grid-robust: never a failure
    ]
    paths = {
        "regions": tmp_path / "regions.json",
        "box": tmp_path / "box.json",
        "spectrum": tmp_path / "spectrum.csv",
    }
    paths["regions"].write_text(json.dumps(regions), encoding="utf-8")
    paths["box"].write_text(json.dumps(box), encoding="utf-8")
    paths["spectrum"].write_text("\n".join(rows) + "\n", encoding="utf-8")
    return paths
