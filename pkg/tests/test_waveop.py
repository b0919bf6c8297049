import numpy as np
import pytest

from oseenspec.ops import ModeParams
from oseenspec.waveop import build_wave_operators, verify_spectral_equivalence


def test_right_identity_on_restricted_subspace(grid200):
    wp = build_wave_operators(grid200)
    defect = np.max(np.abs(wp.Tt @ wp.T - wp.V_projector))
    assert defect < 5e-4


def test_projector_is_idempotent(grid200):
    wp = build_wave_operators(grid200)
    P = wp.V_projector
    assert np.max(np.abs(P @ P - P)) < 1e-12


def test_left_identity_defect_is_a_first_node_artifact(grid200):
    # The square-root boundary behavior at the innermost node leaves an O(1)
    # max-norm defect in T T^t that no resolution removes; away from that
    # node the identity holds to quadrature accuracy.
    wp = build_wave_operators(grid200)
    M = wp.T @ wp.Tt - np.eye(grid200.n)
    assert np.max(np.abs(M)) > 0.1
    interior = np.abs(M).copy()
    interior[0, :] = 0.0
    interior[:, 0] = 0.0
    assert np.max(interior) < np.max(np.abs(M))


def test_wave_frame_shares_spectrum_with_projected_operator(grid200):
    worst0 = verify_spectral_equivalence(grid200, ModeParams(1, 0.0),
                                         n_lead=6)
    assert worst0 < 1e-8
    worst = verify_spectral_equivalence(grid200, ModeParams(1, 8.0 * np.pi),
                                        n_lead=6)
    assert worst < 1e-4


def test_cumulative_rule_is_validated(grid200):
    with pytest.raises(ValueError, match="cumulative"):
        build_wave_operators(grid200, cumulative="bogus")
