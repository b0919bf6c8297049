import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from oseenspec import profiles as pf

finite_positive = st.floats(min_value=1e-3, max_value=50.0,
                            allow_nan=False, allow_infinity=False)


def test_building_blocks_at_unit_argument():
    assert_allclose(pf.F0(1.0), np.e - 2.0, rtol=1e-14)
    assert_allclose(pf.F1(1.0), 1.0 - np.exp(-1.0), rtol=1e-14)
    assert_allclose(pf.F2(1.0), np.exp(-0.5), rtol=1e-14)


def test_angular_velocity_anchor():
    # sigma(r) = (1 - exp(-r^2/4)) / (r^2/4); at r = 2 the exponent is 1.
    assert_allclose(pf.sigma(2.0), 1.0 - np.exp(-1.0), rtol=1e-14)


def test_stream_ratio_anchor_near_origin():
    assert_allclose(pf.f(0.1), 800.6662498842925, rtol=1e-12)


def test_gaussian_factor():
    assert_allclose(pf.g(2.0), np.exp(-0.5), rtol=1e-14)
    assert_allclose(pf.G_profile(2.0), np.exp(-1.0) / (4.0 * np.pi),
                    rtol=1e-14)


def test_velocity_profile_is_scaled_sigma():
    r = np.array([0.3, 1.0, 2.5, 7.0])
    assert_allclose(pf.S_profile(r), pf.sigma(r) / (8.0 * np.pi), rtol=1e-14)


def test_decay_branch_returns_zero_far_out():
    # exp(-z/2) underflows long before z = 800; the branch must not overflow.
    assert pf.F3(400.0) == 0.0
    assert pf.F3(800.0) == 0.0


@given(z=finite_positive)
@settings(max_examples=50, deadline=None)
def test_F1_algebraic_identity(z):
    assert_allclose(z * pf.F1(z), 1.0 - np.exp(-z), rtol=1e-13, atol=1e-300)


@given(z=st.floats(min_value=0.05, max_value=0.499))
@settings(max_examples=50, deadline=None)
def test_F1_defect_matches_direct_subtraction(z):
    # Inside |z| < 0.5 the defect is summed by its own series; the naive
    # difference still has ~10 good digits there, enough to cross-check.
    direct = pf.F1(z) - 1.0 + z / 2.0
    assert_allclose(pf.F1_defect(z), direct, rtol=1e-9)


def test_F1_defect_leading_order():
    # F1(z) - 1 + z/2 = z^2/6 + O(z^3)
    z = 1e-6
    assert_allclose(pf.F1_defect(z), z * z / 6.0, rtol=1e-5)


@given(r=st.floats(min_value=0.1, max_value=10.0))
@settings(max_examples=50, deadline=None)
def test_cumulative_moment_derivative_identity(r):
    # sigma'(r) = -m(r) / r^3 ties the two independent implementations.
    assert_allclose(pf.sigma_prime(r), -pf.m_cum(r) / r**3, rtol=1e-11)


@given(r1=st.floats(min_value=0.05, max_value=20.0),
       r2=st.floats(min_value=0.05, max_value=20.0))
@settings(max_examples=50, deadline=None)
def test_sigma_bounded_and_monotone(r1, r2):
    lo, hi = sorted((r1, r2))
    s_lo, s_hi = pf.sigma(lo), pf.sigma(hi)
    assert 0.0 < s_hi <= s_lo < 1.0 or np.isclose(s_lo, s_hi)


def test_sector_boundary_is_inclusive():
    # |arg r| <= pi/4 is allowed; beyond it the profiles must refuse.
    pf.sigma(2.0 * np.exp(0.25j * np.pi))
    with pytest.raises(ValueError, match="sector"):
        pf.sigma(2.0j)


def test_profile_bundle_wiring():
    bundle = pf.default_profiles()
    r = np.array([0.5, 1.5, 4.0])
    assert_allclose(bundle.sigma(r), pf.sigma(r))
    assert_allclose(bundle.S(r), pf.S_profile(r))
    assert_allclose(bundle.g(r), pf.g(r))
    assert_allclose(bundle.G(r), pf.G_profile(r))
    assert_allclose(bundle.f(r), pf.f(r))
