"""Command line: spec-file batches, exit codes, error reporting."""

import json
import shutil
import subprocess
import sys

import pytest

from oseenfig.cli import main


def _batch_payload(data_dir, out_prefix=""):
    d = str(data_dir)
    return [
        {"kind": "scaling", "inputs": {"sweep": f"{d}/sweep.csv"},
         "out": f"{out_prefix}scaling.svg"},
        {"kind": "gap-decay",
         "inputs": {"gap": [f"{d}/gap_decay_k1.csv",
                            f"{d}/gap_decay_k2.csv"]},
         "out": f"{out_prefix}gap_decay.svg"},
        {"kind": "decay-curves",
         "inputs": {"decay": [f"{d}/decay_k1_alpha0.csv",
                              f"{d}/decay_k2_alpha1000.csv"]},
         "out": f"{out_prefix}decay_curves.svg"},
        {"kind": "localization",
         "inputs": {"regions": f"{d}/regions_k1_alpha1000.json",
                    "box": f"{d}/box_k1_alpha1000.json",
                    "spectrum": f"{d}/spectrum_k1_alpha1000.csv"},
         "out": f"{out_prefix}localization.svg"},
    ]


def test_render_batch_of_all_four_kinds(data_dir, tmp_path, capsys):
    spec = tmp_path / "figures.json"
    spec.write_text(json.dumps(_batch_payload(data_dir)), encoding="utf-8")
    assert main(["render", str(spec)]) == 0
    out = capsys.readouterr().out
    assert out.count("[OK]") == 4
    for name in ("scaling", "gap_decay", "decay_curves", "localization"):
        path = tmp_path / f"{name}.svg"
        assert path.exists() and path.stat().st_size > 0
        assert str(path) in out


def test_relative_inputs_resolve_against_spec_dir(data_dir, tmp_path,
                                                  capsys):
    shutil.copy(data_dir / "sweep.csv", tmp_path / "sweep.csv")
    spec = tmp_path / "figures.json"
    spec.write_text(json.dumps({"kind": "scaling",
                                "inputs": {"sweep": "sweep.csv"},
                                "out": "out/scaling.svg"}), encoding="utf-8")
    assert main(["render", str(spec)]) == 0
    assert (tmp_path / "out" / "scaling.svg").exists()


def test_cli_renders_are_deterministic(data_dir, tmp_path):
    blobs = []
    for tag in ("a", "b"):
        spec = tmp_path / f"{tag}.json"
        spec.write_text(json.dumps({"kind": "scaling",
                                    "inputs": {"sweep": str(data_dir / "sweep.csv")},
                                    "out": f"{tag}.svg"}), encoding="utf-8")
        assert main(["render", str(spec)]) == 0
        blobs.append((tmp_path / f"{tag}.svg").read_bytes())
    assert blobs[0] == blobs[1]


def test_spec_error_exits_2_and_names_field(data_dir, tmp_path, capsys):
    spec = tmp_path / "figures.json"
    spec.write_text(json.dumps({"kind": "pie-chart",
                                "inputs": {"sweep": "s.csv"},
                                "out": "o.svg"}), encoding="utf-8")
    assert main(["render", str(spec)]) == 2
    err = capsys.readouterr().err
    assert "spec error" in err and "pie-chart" in err


def test_format_error_exits_1_and_names_column(data_dir, tmp_path, capsys):
    broken = tmp_path / "sweep.csv"
    lines = (data_dir / "sweep.csv").read_text().splitlines()
    lines[0] = lines[0].replace("psi", "psi_bound")
    broken.write_text("\n".join(lines) + "\n", encoding="utf-8")
    spec = tmp_path / "figures.json"
    spec.write_text(json.dumps({"kind": "scaling",
                                "inputs": {"sweep": str(broken)},
                                "out": "o.svg"}), encoding="utf-8")
    assert main(["render", str(spec)]) == 1
    err = capsys.readouterr().err
    assert "input format error" in err and "missing column 'psi'" in err


def test_missing_input_file_exits_1(tmp_path, capsys):
    spec = tmp_path / "figures.json"
    spec.write_text(json.dumps({"kind": "scaling",
                                "inputs": {"sweep": "absent.csv"},
                                "out": "o.svg"}), encoding="utf-8")
    assert main(["render", str(spec)]) == 1
    assert "not found" in capsys.readouterr().err


def test_no_arguments_prints_usage_and_exits_2(capsys):
    assert main([]) == 2
    assert "usage:" in capsys.readouterr().out


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0
    assert "SPECFILE" in capsys.readouterr().out


def test_unknown_command_exits_2(capsys):
    assert main(["plot", "x.json"]) == 2
    assert "unknown command" in capsys.readouterr().err


def test_render_requires_exactly_one_argument(capsys):
    assert main(["render"]) == 2
    assert main(["render", "a.json", "b.json"]) == 2


def test_bad_entry_blocks_whole_batch(data_dir, tmp_path, capsys):
    # validation happens before any rendering: nothing is written
    payload = _batch_payload(data_dir)
    payload[3]["kind"] = "mystery"
    spec = tmp_path / "figures.json"
    spec.write_text(json.dumps(payload), encoding="utf-8")
    assert main(["render", str(spec)]) == 2
    assert not (tmp_path / "scaling.svg").exists()


def test_module_entry_point(data_dir, tmp_path):
    spec = tmp_path / "figures.json"
    spec.write_text(json.dumps({"kind": "scaling",
                                "inputs": {"sweep": str(data_dir / "sweep.csv")},
                                "out": "m.svg"}), encoding="utf-8")
    proc = subprocess.run([sys.executable, "-m", "oseenfig", "render",
                           str(spec)], capture_output=True, text=True,
                          timeout=120)
    assert proc.returncode == 0, proc.stderr
    assert "[OK]" in proc.stdout
    assert (tmp_path / "m.svg").exists()
