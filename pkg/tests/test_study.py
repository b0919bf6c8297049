import numpy as np
import pytest
from numpy.testing import assert_allclose

from oseenspec.ops import ModeParams
from oseenspec.study import (
    DEFAULT_ALPHAS,
    SCAN_IDS,
    SWEEP_GRID,
    GridConfig,
    ScanConfig,
    inequality_scan,
    coercivity_table,
    cross_frame_check,
    figure_dataset,
    resolvent_gap_decay,
)

TINY_SCAN = ScanConfig(n_r=12, n_zeta=10, n_theta=5, n_samples=6,
                       k_list=(2, 3), grid=GridConfig(n=64, R_max=8.0))


def test_grid_config_build_and_refine():
    cfg = GridConfig(n=40, R_max=10.0)
    g = cfg.build()
    assert g.n == 40 and g.R_max == 10.0
    fine = cfg.refined()
    assert fine.n == 60 and fine.R_max == 12.0


def test_sweep_grid_extends_past_the_critical_layer():
    # The sweep's largest circulation parks the first-mode critical layer
    # near r ~ 8; the default sweep domain must end well beyond it.
    assert SWEEP_GRID.n == 400
    assert SWEEP_GRID.R_max == 16.0


def test_default_circulations_span_one_and_a_half_decades():
    assert len(DEFAULT_ALPHAS) == 7
    decades = np.log10(DEFAULT_ALPHAS[-1] / DEFAULT_ALPHAS[0])
    assert decades == pytest.approx(1.5, abs=0.01)


@pytest.mark.parametrize("scan", ["f-expansion", "sigma-expansion",
                                  "wedge-coercivity", "kernel-positivity"])
def test_pointwise_inequality_scans_have_no_violations(scan):
    rep = inequality_scan(scan, TINY_SCAN)
    assert rep.violations == 0
    assert rep.n_points > 0
    assert 0.0 < rep.fitted_constant
    assert rep.worst_ratio <= 1.0 + 1e-12
    assert rep.scan_id == scan


def test_origin_limited_scan_constant_is_stable():
    # The worst ratio for this inequality is attained in the origin limit,
    # so even a coarse scan reproduces the full-scan constant.
    rep = inequality_scan("sigma-expansion", TINY_SCAN)
    assert rep.fitted_constant == pytest.approx(0.12499921, rel=1e-4)


def test_unknown_scan_identifier_is_rejected():
    with pytest.raises(ValueError, match="scan"):
        inequality_scan("bogus", TINY_SCAN)
    assert "wedge-coercivity" in SCAN_IDS


def test_cross_frame_abscissas_agree():
    a_r, a_y, diff = cross_frame_check(100.0, 2,
                                       GridConfig(n=160, R_max=12.0))
    assert diff < 1e-8
    with pytest.raises(ValueError, match="k"):
        cross_frame_check(100.0, 1)


def test_gap_decay_envelope_on_short_ladder():
    gd = resolvent_gap_decay((1e3, 3.16e3, 1e4, 3.16e4), 1,
                             GridConfig(n=96, R_max=12.0))
    assert gd.monotone_tail
    assert np.all(np.diff(gd.d_values) < 0)
    assert gd.exponent < -0.08
    assert gd.d_values[0] == pytest.approx(0.05366, rel=1e-2)
    assert np.all(np.asarray(gd.d_values)
                  <= gd.C_fit * np.asarray(gd.betas) ** (-0.1) * (1 + 1e-9))


def test_alpha_grids_need_enough_points():
    with pytest.raises(ValueError, match="4 points"):
        resolvent_gap_decay((1e3, 1e4), 1, GridConfig(n=96, R_max=12.0))


def test_coercivity_rows_respect_the_kernel_bound():
    rep = coercivity_table(alphas=(1e5, 1e6, 1e7, 1e8), k_list=(2,),
                           grid_cfg=GridConfig(n=96, R_max=8.0))
    row = rep.row("k2_K_rm2", 2)
    # Schur-type bound k^2 / (k^2 - 1) at k = 2.
    assert row.max_value <= 4.0 / 3.0 + 1e-2
    assert row.max_value == pytest.approx(4.0 / 3.0, rel=0.05)


def test_figure_dataset_small_case_is_contained():
    ds = figure_dataset(ModeParams(1, 300.0),
                        grid_cfg=GridConfig(n=140, R_max=12.0),
                        n_model=6, m_eigs=8)
    assert ds.k == 1 and ds.alpha == 300.0
    assert len(ds.regions) >= 1
    robust = np.asarray(ds.robust)
    contained = np.asarray(ds.contained)
    assert robust.any()
    assert contained[robust].all()
    assert all(ds.occupied)
    re_max, im_min, im_max = ds.box
    assert im_min < im_max
