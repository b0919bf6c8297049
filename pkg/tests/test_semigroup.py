import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from oseenspec.ops import ModeParams, assemble_Hk, assemble_system_k0
from oseenspec.semigroup import (
    decay_rate,
    default_window,
    duhamel_block0,
    heat_kernel_apply,
    propagate,
    tensor_grid,
)


def _gaussian_pair():
    x = tensor_grid()
    X, Y = x[:, None], x[None, :]
    G = np.exp(-(X**2 + Y**2) / 4.0) / (4.0 * np.pi)
    dG = -(X / 2.0) * G
    return x, G, dG


def test_tensor_grid_shape():
    x = tensor_grid()
    assert x[0] == -14.0 and x[-1] == 14.0
    assert_allclose(np.diff(x), 0.25)
    assert_allclose(x, -x[::-1])


def test_gaussian_is_invariant():
    _, G, _ = _gaussian_pair()
    out = heat_kernel_apply(G, 1.0)
    assert np.max(np.abs(out - G)) / np.max(G) < 1e-6


def test_gaussian_gradient_decays_at_half_rate():
    _, _, dG = _gaussian_pair()
    out = heat_kernel_apply(dG, 1.0)
    expected = np.exp(-0.5) * dG
    assert np.max(np.abs(out - expected)) / np.max(np.abs(dG)) < 1e-6


def test_heat_flow_composes():
    _, G, _ = _gaussian_pair()
    f0 = G * (1.0 + 0.3 * np.sin(tensor_grid())[:, None])
    two_steps = heat_kernel_apply(heat_kernel_apply(f0, 0.4), 0.6)
    one_step = heat_kernel_apply(f0, 1.0)
    assert np.max(np.abs(two_steps - one_step)) < 1e-12


def test_propagation_routes_agree(grid120):
    A = assemble_Hk(grid120, ModeParams(2, 5.0))
    rng = np.random.default_rng(3)
    w0 = np.linalg.solve(np.eye(grid120.n) - 0.01 * grid120.D2,
                         rng.standard_normal(grid120.n))
    taus = np.array([0.3, 0.8])
    t_eig = propagate(A, w0, taus, method="eig")
    t_expm = propagate(A, w0, taus, method="expm")
    for a, b in zip(t_eig, t_expm):
        assert_allclose(np.asarray(a), np.asarray(b), atol=1e-9)


def test_propagation_validates_inputs(grid120):
    A = assemble_Hk(grid120, ModeParams(2, 0.0))
    with pytest.raises(ValueError, match="taus"):
        propagate(A, np.ones(grid120.n), [-1.0])
    with pytest.raises(ValueError, match="method"):
        propagate(A, np.ones(grid120.n), [1.0], method="bogus")


def test_forced_block_solution_matches_direct_exponential(grid120):
    rng = np.random.default_rng(7)
    smooth = np.eye(grid120.n) - 0.01 * grid120.D2
    f1 = np.linalg.solve(smooth, rng.standard_normal(grid120.n))
    f2 = np.linalg.solve(smooth, rng.standard_normal(grid120.n))
    taus = (0.5, 1.0)
    tr1, tr2 = duhamel_block0(grid120, 10.0, (f1, f2), taus)
    sysop = assemble_system_k0(grid120, 10.0)
    stacked = np.concatenate([f1, f2])
    for i, tau in enumerate(taus):
        direct = sla.expm(tau * sysop.entries) @ stacked
        ours = np.concatenate([np.asarray(tr1[i]), np.asarray(tr2[i])])
        rel = np.linalg.norm(ours - direct) / np.linalg.norm(direct)
        assert rel < 1e-9


@given(rate=st.floats(min_value=-5.0, max_value=-0.1),
       amp=st.floats(min_value=0.1, max_value=10.0))
@settings(max_examples=30, deadline=None)
def test_rate_fit_recovers_exact_exponential(rate, amp):
    taus = np.linspace(1.0, 5.0, 15)
    traj = [amp * np.exp(rate * t) * np.ones(4) for t in taus]
    fit = decay_rate(traj, taus, (1.0, 5.0))
    assert_allclose(fit.rate, rate, rtol=1e-8)
    assert fit.r_squared > 1.0 - 1e-10
    assert not fit.truncated


def test_rate_fit_flags_noise_floor_truncation():
    taus = np.linspace(0.5, 40.0, 30)
    traj = [3.0 * np.exp(-2.0 * t) * np.ones(4) for t in taus]
    fit = decay_rate(traj, taus, (0.5, 40.0))
    assert fit.truncated
    assert_allclose(fit.rate, -2.0, rtol=1e-6)


def test_rate_fit_window_must_be_covered():
    taus = np.linspace(2.0, 6.0, 15)
    traj = [np.exp(-t) * np.ones(4) for t in taus]
    with pytest.raises(ValueError, match="window"):
        decay_rate(traj, taus, (2.0, 10.0))


def test_default_fit_window():
    assert default_window(-1.5) == (4.0, 8.0)
    with pytest.raises(ValueError):
        default_window(0.0)
