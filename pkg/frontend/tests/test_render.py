"""Rendering: the four figure kinds, annotation exactness, determinism."""

import csv

import numpy as np
import pytest

from oseenfig.figspec import FigureSpec
from oseenfig.readers import FormatError
from oseenfig.render import render, render_all


def _spec(kind, inputs, out_path, style=None):
    raw = {"kind": kind, "inputs": {k: [str(p) for p in v]
                                    if isinstance(v, (list, tuple)) else str(v)
                                    for k, v in inputs.items()},
           "out": str(out_path)}
    if style:
        raw["style"] = style
    return FigureSpec.from_dict(raw, base_dir=out_path.parent)


def _real_specs(data_dir, tmp_path, suffix=".svg"):
    return [
        _spec("scaling", {"sweep": data_dir / "sweep.csv"},
              tmp_path / f"scaling{suffix}"),
        _spec("gap-decay", {"gap": [data_dir / "gap_decay_k1.csv",
                                    data_dir / "gap_decay_k2.csv"]},
              tmp_path / f"gap{suffix}"),
        _spec("decay-curves", {"decay": [data_dir / "decay_k1_alpha0.csv",
                                         data_dir / "decay_k2_alpha1000.csv"]},
              tmp_path / f"decay{suffix}"),
        _spec("localization", {"regions": data_dir / "regions_k1_alpha1000.json",
                               "box": data_dir / "box_k1_alpha1000.json",
                               "spectrum": data_dir / "spectrum_k1_alpha1000.csv"},
              tmp_path / f"localization{suffix}"),
    ]


# ----------------------------------------------------------------------
# all four kinds render from real toolkit outputs
# ----------------------------------------------------------------------

def test_all_four_kinds_render_svg(data_dir, tmp_path):
    reports = render_all(_real_specs(data_dir, tmp_path))
    assert [r.kind for r in reports] == ["scaling", "gap-decay",
                                         "decay-curves", "localization"]
    for rep in reports:
        blob = rep.path.read_bytes()
        assert blob.startswith(b"<?xml")
        assert b"<svg" in blob
        assert len(blob) > 4000


def test_all_four_kinds_render_pdf(data_dir, tmp_path):
    reports = render_all(_real_specs(data_dir, tmp_path, suffix=".pdf"))
    for rep in reports:
        assert rep.path.read_bytes().startswith(b"%PDF")


@pytest.mark.parametrize("suffix", [".svg", ".pdf"])
def test_repeated_renders_byte_identical(data_dir, tmp_path, suffix):
    for kind, inputs in [
        ("scaling", {"sweep": data_dir / "sweep.csv"}),
        ("localization", {"regions": data_dir / "regions_k1_alpha1000.json",
                          "box": data_dir / "box_k1_alpha1000.json",
                          "spectrum": data_dir / "spectrum_k1_alpha1000.csv"}),
    ]:
        first = render(_spec(kind, inputs, tmp_path / f"a_{kind}{suffix}"))
        second = render(_spec(kind, inputs, tmp_path / f"b_{kind}{suffix}"))
        assert first.path.read_bytes() == second.path.read_bytes()


# ----------------------------------------------------------------------
# scaling: slopes refit from the CSV, annotations match them exactly
# ----------------------------------------------------------------------

def _csv_columns(path, *cols):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return tuple(np.asarray([float(r[c]) for r in rows]) for c in cols)


def test_scaling_slopes_equal_csv_fit(data_dir, tmp_path):
    rep = render(_spec("scaling", {"sweep": data_dir / "sweep.csv"},
                       tmp_path / "scaling.svg"))
    alpha, sigma, psi = _csv_columns(data_dir / "sweep.csv",
                                     "alpha", "sigma", "psi")
    la = np.log10(alpha)
    mask = la >= 0.5 * (la[0] + la[-1]) - 1e-12
    sigma_fit = float(np.polyfit(la[mask], np.log10(sigma[mask]), 1)[0])
    psi_fit = float(np.polyfit(la[mask], np.log10(psi[mask]), 1)[0])

    # bit-for-bit: the renderer must annotate the fit of the tabulated
    # values, not a stored or recomputed quantity
    assert rep.info["sigma_slope"] == sigma_fit
    assert rep.info["psi_slope"] == psi_fit
    assert rep.info["fit_alphas"] == [1000.0, 1778.0, 3162.0]

    joined = "\n".join(rep.info["annotations"])
    assert f"sigma slope {sigma_fit:.4f}" in joined
    assert f"psi slope {psi_fit:.4f}" in joined

    # the same strings are searchable in the SVG itself
    svg = rep.path.read_text(encoding="utf-8")
    assert f"{sigma_fit:.4f}" in svg
    assert f"{psi_fit:.4f}" in svg


def test_scaling_slope_values_from_this_dataset(data_dir, tmp_path):
    rep = render(_spec("scaling", {"sweep": data_dir / "sweep.csv"},
                       tmp_path / "scaling.svg"))
    # the vendored sweep sits deep in the square-root / cube-root regime
    assert abs(rep.info["sigma_slope"] - 0.5) < 0.05
    assert abs(rep.info["psi_slope"] - 1.0 / 3.0) < 0.05
    assert f"{rep.info['sigma_slope']:.4f}" == "0.5030"
    assert f"{rep.info['psi_slope']:.4f}" == "0.3326"


def test_scaling_annotation_and_reference_toggles(data_dir, tmp_path):
    bare = render(_spec("scaling", {"sweep": data_dir / "sweep.csv"},
                        tmp_path / "bare.svg",
                        style={"annotate": False, "reference": False,
                               "legend": False}))
    svg = bare.path.read_text(encoding="utf-8")
    assert "sigma slope" not in svg
    assert "slope 1/2 reference" not in svg
    # info still carries the fit for callers even when not drawn
    assert "sigma_slope" in bare.info


def test_scaling_needs_two_rows(tmp_path):
    path = tmp_path / "sweep.csv"
    path.write_text("alpha,sigma,psi,argmax_k\n100,1.5,1.2,1\n",
                    encoding="utf-8")
    with pytest.raises(FormatError, match="at least 2 data rows"):
        render(_spec("scaling", {"sweep": path}, tmp_path / "s.svg"))


def test_scaling_needs_two_rows_in_fit_window(tmp_path):
    path = tmp_path / "sweep.csv"
    path.write_text("alpha,sigma,psi,argmax_k\n"
                    "10,1.0,1.0,1\n1000,10.0,5.0,1\n", encoding="utf-8")
    with pytest.raises(FormatError, match="fit window"):
        render(_spec("scaling", {"sweep": path}, tmp_path / "s.svg"))


def test_scaling_rejects_nonpositive_values(tmp_path):
    path = tmp_path / "sweep.csv"
    path.write_text("alpha,sigma,psi,argmax_k\n"
                    "100,1.0,1.0,1\n178,-2.0,1.1,1\n316,3.0,1.2,1\n",
                    encoding="utf-8")
    with pytest.raises(FormatError, match="line 3.*'sigma' must be positive"):
        render(_spec("scaling", {"sweep": path}, tmp_path / "s.svg"))


# ----------------------------------------------------------------------
# gap-decay and decay-curves: overlay constants straight from the file
# ----------------------------------------------------------------------

def test_gap_decay_uses_tabulated_constants(data_dir, tmp_path):
    rep = render(_spec("gap-decay", {"gap": [data_dir / "gap_decay_k1.csv",
                                             data_dir / "gap_decay_k2.csv"]},
                       tmp_path / "gap.svg"))
    assert rep.info["n_curves"] == 2
    exp1, = np.unique(_csv_columns(data_dir / "gap_decay_k1.csv",
                                   "fitted_exponent")[0])
    c1, = np.unique(_csv_columns(data_dir / "gap_decay_k1.csv", "C_fit")[0])
    assert rep.info["fitted_exponents"][0] == exp1
    assert rep.info["C_fits"][0] == c1
    svg = rep.path.read_text(encoding="utf-8")
    assert f"{exp1:.4f}" in svg
    assert "beta^(-1/10) envelope" in svg


def test_decay_curves_use_tabulated_rates(data_dir, tmp_path):
    rep = render(_spec("decay-curves",
                       {"decay": [data_dir / "decay_k1_alpha0.csv",
                                  data_dir / "decay_k2_alpha1000.csv"]},
                       tmp_path / "decay.svg"))
    assert rep.info["n_curves"] == 2
    rate1, = np.unique(_csv_columns(data_dir / "decay_k1_alpha0.csv",
                                    "fitted_rate")[0])
    absc2, = np.unique(_csv_columns(data_dir / "decay_k2_alpha1000.csv",
                                    "abscissa")[0])
    assert rep.info["fitted_rates"][0] == rate1
    assert rep.info["abscissas"][1] == absc2
    svg = rep.path.read_text(encoding="utf-8")
    assert "alpha=1000" in svg


# ----------------------------------------------------------------------
# localization: containment marking
# ----------------------------------------------------------------------

@pytest.mark.parametrize("k,n_robust,n_regions", [(1, 4, 3), (2, 5, 4)])
def test_localization_real_data_zero_failures(data_dir, tmp_path, k,
                                              n_robust, n_regions):
    rep = render(_spec("localization",
                       {"regions": data_dir / f"regions_k{k}_alpha1000.json",
                        "box": data_dir / f"box_k{k}_alpha1000.json",
                        "spectrum": data_dir / f"spectrum_k{k}_alpha1000.csv"},
                       tmp_path / f"loc_k{k}.svg"))
    assert rep.info["n_failures"] == 0
    assert rep.info["n_robust"] == n_robust
    assert rep.info["n_regions"] == n_regions
    assert (f"0 containment failures among {n_robust} grid-robust"
            in "\n".join(rep.info["annotations"]))
    svg = rep.path.read_text(encoding="utf-8")
    assert "0 containment failures" in svg


def test_localization_marks_deliberate_failure(synthetic_localization,
                                               tmp_path):
    rep = render(_spec("localization", synthetic_localization,
                       tmp_path / "loc.svg"))
    assert rep.info["n_failures"] == 1
    assert rep.info["failures"] == [complex(-8.0, 5.0)]
    assert rep.info["n_robust"] == 3
    svg = rep.path.read_text(encoding="utf-8")
    assert "1 containment failures among 3" in svg
    assert "containment failure" in svg


def test_localization_flags_robust_eigenvalue_outside_box(
        synthetic_localization, tmp_path):
    # containment needs the box too: a robust eigenvalue to the right of
    # re_max fails even if some disc were to cover it
    rows = synthetic_localization["spectrum"].read_text().splitlines()
    rows[3] = "1,10,1.0,0.0,1e-12,1"        # re > re_max = 0
    synthetic_localization["spectrum"].write_text("\n".join(rows) + "\n",
                                                  encoding="utf-8")
    rep = render(_spec("localization", synthetic_localization,
                       tmp_path / "loc.svg"))
    assert rep.info["n_failures"] == 1
    assert rep.info["failures"] == [complex(1.0, 0.0)]


def test_localization_zero_rows_renders_regions_only(synthetic_localization,
                                                     tmp_path):
    header = synthetic_localization["spectrum"].read_text().splitlines()[0]
    synthetic_localization["spectrum"].write_text(header + "\n",
                                                  encoding="utf-8")
    rep = render(_spec("localization", synthetic_localization,
                       tmp_path / "loc.svg"))
    assert rep.info["no_data"] is True
    assert rep.info["n_failures"] == 0
    assert rep.info["n_regions"] == 2
    assert "no data" in rep.path.read_text(encoding="utf-8")


def test_localization_nonrobust_rows_are_not_failures(synthetic_localization,
                                                      tmp_path):
    lines = synthetic_localization["spectrum"].read_text().splitlines()
    # demote every row to non-robust, including the stray at (-8, 5)
    rows = [lines[0]] + [ln[:-1] + "0" for ln in lines[1:]]
    synthetic_localization["spectrum"].write_text("\n".join(rows) + "\n",
                                                  encoding="utf-8")
    rep = render(_spec("localization", synthetic_localization,
                       tmp_path / "loc.svg"))
    assert rep.info["no_data"] is False
    assert rep.info["n_robust"] == 0
    assert rep.info["n_failures"] == 0


def test_localization_rejects_empty_regions(synthetic_localization, tmp_path):
    synthetic_localization["regions"].write_text("[]", encoding="utf-8")
    with pytest.raises(FormatError, match="no discs"):
        render(_spec("localization", synthetic_localization,
                     tmp_path / "loc.svg"))


# ----------------------------------------------------------------------
# style plumbing
# ----------------------------------------------------------------------

def test_title_and_limits_accepted(data_dir, tmp_path):
    rep = render(_spec("scaling", {"sweep": data_dir / "sweep.csv"},
                       tmp_path / "styled.svg",
                       style={"title": "growth of the mode bounds",
                              "xlim": [50.0, 5000.0],
                              "figsize": [7.0, 5.0]}))
    assert "growth of the mode bounds" in rep.path.read_text(encoding="utf-8")


def test_output_directory_created(data_dir, tmp_path):
    out = tmp_path / "nested" / "deeper" / "fig.svg"
    rep = render(_spec("scaling", {"sweep": data_dir / "sweep.csv"}, out))
    assert rep.path.exists()
