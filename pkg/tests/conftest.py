"""Shared fixtures.

The acceptance suite drives the command-line entry point end to end once per
session (the selftest emits every dataset and gate the package promises) and
the individual tests then assert on the recorded manifest.
"""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

from oseenspec.grid import build_grid


@pytest.fixture(scope="session")
def grid120():
    return build_grid(120, 12.0)


@pytest.fixture(scope="session")
def grid160():
    return build_grid(160, 12.0)


@pytest.fixture(scope="session")
def grid200():
    return build_grid(200, 12.0)


@pytest.fixture(scope="session")
def selftest_run(tmp_path_factory):
    """Run ``oseenspec selftest`` once; return exit code, manifest, outputs."""
    out = tmp_path_factory.mktemp("selftest")
    proc = subprocess.run(
        [sys.executable, "-c",
         "import sys; from oseenspec.cli import main; "
         "sys.exit(main(sys.argv[1:]))",
         "selftest", "--out-dir", str(out), "--seed", "0"],
        capture_output=True, text=True, timeout=900,
    )
    manifest_path = out / "manifest.json"
    assert manifest_path.exists(), (
        f"selftest produced no manifest; stdout:\n{proc.stdout}\n"
        f"stderr:\n{proc.stderr}"
    )
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    gates = {g["name"]: g for g in manifest["gates"]}
    return {
        "exit": proc.returncode,
        "stdout": proc.stdout,
        "stderr": proc.stderr,
        "out": out,
        "manifest": manifest,
        "gates": gates,
    }
