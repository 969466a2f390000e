import numpy as np
import pytest

from app.calculus import (
    closed_form_H,
    forward_step_split,
    interpolation_increments,
    linear_interpolation,
    tensor_integral_left,
)
from app.drivers import QWienerSpec, SamplePath, TimeGrid, linear_drift_path, replicate_rng, simulate_qwiener
from app.errors import GridMisalignmentError
from app.hilbert import HVector


def test_linear_driver_is_a_fixed_point_of_interpolation():
    grid = TimeGrid.for_levels(1.0, [8], 4)
    G = linear_drift_path(HVector([1.0, -0.5, 2.0]), grid)
    np.testing.assert_allclose(linear_interpolation(G, 8).values, G.values, atol=1e-13)


def test_constant_driver_is_unchanged():
    grid = TimeGrid.for_levels(1.0, [4], 3)
    G = SamplePath.continuous(grid, np.full((grid.steps + 1, 2), 3.5))
    split = forward_step_split(G, 4)
    np.testing.assert_array_equal(split.U.values, G.values)
    assert not np.any(split.Z.values)


def test_interpolation_hits_the_driver_on_nodes():
    grid = TimeGrid.for_levels(1.0, [4, 8], 4)
    G = simulate_qwiener(QWienerSpec([1.0, 0.25]), grid, replicate_rng(0, 0))
    for n in (4, 8):
        stride = grid.stride(n)
        np.testing.assert_array_equal(linear_interpolation(G, n).values[::stride], G.values[::stride])
        assert interpolation_increments(G, n).shape == (n, 2)


def test_forward_step_is_one_cell_ahead_for_linear_driver():
    n = 8
    grid = TimeGrid.for_levels(1.0, [n], 4)
    h = HVector([3.0, 4.0])
    split = forward_step_split(linear_drift_path(h, grid), n)
    gaps = np.linalg.norm(split.Y.values - linear_drift_path(h, grid).values, axis=1)
    assert gaps.max() == pytest.approx(h.norm() / n)
    # sin salto en t = T
    assert not split.Y.jumps[-1]
    np.testing.assert_allclose(split.Y.terminal, h.coeffs)


def test_corrector_left_limits_vanish_at_jumps():
    n = 4
    grid = TimeGrid.for_levels(1.0, [n], 5)
    G = simulate_qwiener(QWienerSpec([1.0, 0.5, 0.25]), grid, replicate_rng(1, 0))
    split = forward_step_split(G, n)
    assert not np.any(split.Z.left[split.Y.jumps])
    np.testing.assert_allclose((split.Y + split.Z).values, split.U.values, atol=1e-15)


def test_closed_form_matches_integral_on_nodes():
    n = 8
    grid = TimeGrid.for_levels(2.0, [n], 2)
    G = simulate_qwiener(QWienerSpec([1.0, 0.5]), grid, replicate_rng(2, 0))
    split = forward_step_split(G, n)
    H = tensor_integral_left(split.Z, split.Z, "linear")
    np.testing.assert_allclose(H.left[:: grid.stride(n)], closed_form_H(G, n), atol=1e-12)


def test_split_requires_resolved_levels():
    G = SamplePath.zeros(TimeGrid(1.0, 12), (2,))
    with pytest.raises(GridMisalignmentError):
        forward_step_split(G, 8)
