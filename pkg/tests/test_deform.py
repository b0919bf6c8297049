import numpy as np
import pytest
import scipy.linalg as sla
from numpy.testing import assert_allclose

from oseenspec.deform import (
    apply_Uz,
    containment_check,
    delta_from_policy,
    perturbation_certificate,
    localization_regions,
    riesz_count,
    spectrum_z_independence,
)
from oseenspec.ops import ModeParams, OperatorMatrix, assemble_Z1_hat
from oseenspec.spectral import eig, weighted_opnorm


def test_radius_policies():
    assert delta_from_policy(0.04, "two-sqrt-d") == pytest.approx(0.4)
    assert delta_from_policy(0.04, "bauer-fike") == pytest.approx(0.042)
    with pytest.raises(ValueError, match="policy"):
        delta_from_policy(0.04, "bogus")
    with pytest.raises(ValueError):
        delta_from_policy(-0.1)


def test_dilation_at_unit_scale_is_identity(grid120):
    v = np.exp(-grid120.nodes**2)
    assert_allclose(apply_Uz(v, 1.0, grid120), v, rtol=1e-12)


def test_localization_regions_track_inverted_levels():
    regions = localization_regions(ModeParams(1, 0.0),
                                   (-8.0, -12.0, -16.0), 0.01)
    assert len(regions) == 3
    assert [rg.index for rg in regions] == [1, 2, 3]
    # At zero circulation the first region centers on the slowest level of
    # the frame-rescaled reference (-3/2), and radii grow with depth.
    assert_allclose(regions[0].center, -1.5, atol=0.05)
    radii = [rg.radius for rg in regions]
    assert radii == sorted(radii)


def test_localization_radius_bound_is_enforced():
    with pytest.raises(ValueError, match="delta"):
        localization_regions(ModeParams(1, 0.0), (-8.0, -12.0, -16.0), 0.07)


def test_containment_check_accepts_nearby_and_rejects_distant():
    eigs = (-8.0, -12.0, -16.0)
    near = np.array([-8.02 + 0.0j, -12.05 + 0.0j])
    far = np.array([3.0 + 0.0j])
    assert containment_check(near, ModeParams(1, 0.0), eigs, 0.01).all()
    assert not containment_check(far, ModeParams(1, 0.0), eigs, 0.01).any()


def test_projection_count_isolates_single_level(grid120):
    Z = assemble_Z1_hat(grid120)
    pc = riesz_count(Z, -8.0, 1.5)
    assert pc.count == 1
    assert abs(pc.trace - 1.0) < 1e-10
    assert pc.projector_defect < 1e-10


def test_projection_count_preconditions(grid120):
    Z = assemble_Z1_hat(grid120)
    with pytest.raises(ValueError, match="contour"):
        riesz_count(Z, -8.0, 4.0)  # -12 sits on the circle
    with pytest.raises(ValueError, match="n_quad"):
        riesz_count(Z, -8.0, 1.5, n_quad=16)
    with pytest.raises(ValueError, match="radius"):
        riesz_count(Z, -8.0, -1.0)


def test_certificate_on_small_perturbation(grid120):
    Z = assemble_Z1_hat(grid120)
    Zinv = OperatorMatrix(entries=sla.inv(Z.entries), grid=grid120,
                          space_tag="L2r", label="model_inverse")
    rng = np.random.default_rng(0)
    E = rng.standard_normal((grid120.n, grid120.n)) * 1e-6
    Ap = OperatorMatrix(entries=Zinv.entries + E, grid=grid120,
                        space_tag="L2r", label="perturbed_inverse")
    d = weighted_opnorm(E, grid120.quad_weights)
    rep = perturbation_certificate(Ap, Zinv, eig(Zinv), delta_from_policy(d),
                              max_balls=2)
    assert rep.applicable
    assert rep.status == "certified"
    assert rep.no_escape
    top = rep.balls[0]
    assert top.separated and top.matches and top.count == 1


def test_deformed_spectra_agree_across_the_sector(grid120):
    drift = spectrum_z_independence(
        "Z1", ModeParams(1, 2.0 * np.pi),
        (1.0, np.exp(1j * np.pi / 16.0)), grid120, n_lead=3)
    assert drift < 1e-4


def test_deformation_family_inputs_are_validated(grid120):
    p = ModeParams(1, 2.0 * np.pi)
    with pytest.raises(ValueError, match="family"):
        spectrum_z_independence("bogus", p, (1.0,), grid120)
    with pytest.raises(ValueError, match="sector"):
        spectrum_z_independence("Z1", p, (1j,), grid120)
    with pytest.raises(ValueError):
        spectrum_z_independence("Z1", p, (), grid120)
