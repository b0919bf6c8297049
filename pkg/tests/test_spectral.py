import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from oseenspec.ops import (
    ModeParams,
    assemble_Hk,
    assemble_Lhat,
    assemble_Z1_hat,
)
from oseenspec.spectral import (
    eig,
    grid_robust_eigenvalues,
    numerical_range_sample,
    resolvent_scan,
    sigma_bound,
    spectral_abscissa_gate,
    weighted_opnorm,
)


def test_eigenvalues_sorted_by_descending_real_part(grid120):
    res = eig(assemble_Z1_hat(grid120))
    assert np.all(np.diff(res.eigenvalues.real) <= 1e-12)
    assert res.abscissa == pytest.approx(res.eigenvalues[0].real)
    assert res.residual < 1e-8


def test_eigenvectors_satisfy_the_pencil(grid120):
    A = assemble_Z1_hat(grid120)
    res, lam, V = eig(A, return_vectors=True)
    for j in range(3):
        lhs = A.entries @ V[:, j]
        assert_allclose(lhs, lam[j] * V[:, j], atol=1e-8)


@given(
    d=st.lists(st.floats(min_value=-50, max_value=50), min_size=2,
               max_size=12),
    w=st.lists(st.floats(min_value=1e-3, max_value=10.0), min_size=2,
               max_size=12),
)
@settings(max_examples=50, deadline=None)
def test_weighted_opnorm_of_diagonal_is_max_modulus(d, w):
    m = min(len(d), len(w))
    dd, ww = np.asarray(d[:m]), np.asarray(w[:m])
    assert_allclose(weighted_opnorm(np.diag(dd), ww), np.max(np.abs(dd)),
                    rtol=1e-10, atol=1e-12)


def test_abscissa_gate_on_model(grid120):
    a0, passed, drift = spectral_abscissa_gate(
        lambda g: assemble_Z1_hat(g), grid120)
    assert passed
    assert_allclose(a0, -8.0, atol=1e-6)
    assert drift < 1e-6


def test_grid_robust_flags_on_model(grid120):
    e0, flags, drifts = grid_robust_eigenvalues(
        lambda g: assemble_Z1_hat(g), grid120, 6)
    assert flags.all()
    assert np.max(drifts) < 1e-6
    assert_allclose(e0[0].real, -8.0, atol=1e-6)


def test_gap_lower_bound_at_zero_circulation(grid160):
    # The slowest mode at zero circulation sits at -1 (second mode); the
    # restricted first mode sits at -3/2.
    s0, per_mode = sigma_bound(ModeParams(1, 0.0), 3, grid160)
    assert_allclose(s0, 1.0, atol=1e-6)
    per = dict((k, a) for k, a in per_mode)
    assert_allclose(per[1], -1.5, atol=1e-6)
    assert_allclose(per[2], -1.0, atol=1e-6)
    assert_allclose(per[3], -1.5, atol=1e-6)


def test_gap_lower_bound_filtered_variant_matches_raw(grid160):
    s_raw, _ = sigma_bound(ModeParams(1, 0.0), 3, grid160)
    s_rob, per_mode = sigma_bound(ModeParams(1, 0.0), 3, grid160, robust=True)
    assert_allclose(s_rob, s_raw, atol=1e-8)
    for _, _, n_rob in per_mode:
        assert n_rob > 0


def test_resolvent_scan_warns_on_non_covering_window(grid120):
    p = ModeParams(1, 100.0)
    A = assemble_Lhat(grid120, p, which="k1")
    with pytest.warns(UserWarning, match="cover"):
        resolvent_scan(A, (-1.0, 0.0), seed=0)


def test_resolvent_scan_value_is_reproducible(grid120):
    p = ModeParams(1, 100.0)
    A = assemble_Lhat(grid120, p, which="k1")
    window = sorted((-1.2 * p.beta_k, 0.2 * p.beta_k))
    s1 = resolvent_scan(A, window, n_coarse=64, seed=0)
    s2 = resolvent_scan(A, window, n_coarse=64, seed=0)
    assert s1.psi == pytest.approx(s2.psi, rel=0, abs=0)
    assert s1.psi == pytest.approx(4.564478, rel=1e-3)


def test_numerical_range_sampling_is_deterministic(grid120):
    A = assemble_Hk(grid120, ModeParams(2, 0.0))
    s1 = numerical_range_sample(A, 120, sampler="random-gaussian", seed=4)
    s2 = numerical_range_sample(A, 120, sampler="random-gaussian", seed=4)
    assert np.array_equal(s1.points, s2.points)


def test_numerical_range_respects_selfadjoint_bound(grid120):
    # At zero circulation the second-mode operator is self-adjoint with
    # abscissa -1: every Rayleigh quotient lies on the real axis below -1.
    A = assemble_Hk(grid120, ModeParams(2, 0.0))
    s = numerical_range_sample(A, 200, sampler="random-gaussian", seed=1)
    assert s.hull_re_max <= -1.0 + 1e-8
    s_eig = numerical_range_sample(A, 200, sampler="eigvec-seeded", seed=1)
    assert s_eig.hull_re_max == pytest.approx(-1.0, abs=1e-6)


def test_numerical_range_validates_inputs(grid120):
    A = assemble_Hk(grid120, ModeParams(2, 0.0))
    with pytest.raises(ValueError, match="n_samples"):
        numerical_range_sample(A, 50, seed=0)
    with pytest.raises(ValueError, match="sampler"):
        numerical_range_sample(A, 200, sampler="bogus", seed=0)
