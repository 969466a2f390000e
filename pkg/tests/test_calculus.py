import numpy as np
import pytest

from app.calculus import (
    adjoint_path,
    closed_form_H,
    contract_integral,
    forward_step_split,
    operator_integral,
    scalar_covariation,
    tensor_covariation,
    tensor_integral_left,
    tensor_integral_right,
    total_variation,
    trace_path,
)
from app.drivers import QWienerSpec, SamplePath, TimeGrid, replicate_rng, simulate_qwiener, step_path
from app.errors import DimensionMismatchError, SpecError
from app.lab.verify import random_jump_path


@pytest.fixture
def staircase():
    """Trayectoria que salta e₁ en t=1 y e₂ en t=2 sobre [0, 3]."""
    grid = TimeGrid(3.0, 3)
    return step_path(grid, [1, 2], np.eye(2))


def test_constant_integrand_telescopes(rng, grid):
    c = np.array([2.0, -1.0])
    X = SamplePath.continuous(grid, np.broadcast_to(c, (grid.steps + 1, 2)))
    Y = random_jump_path(rng, grid, (2,))
    for rule in ("left", "linear"):
        integral = tensor_integral_left(X, Y, rule)
        np.testing.assert_allclose(integral.terminal, np.outer(c, Y.terminal - Y.left[0]), atol=1e-12)


def test_staircase_covariation(staircase):
    for rule in ("left", "linear"):
        np.testing.assert_array_equal(tensor_covariation(staircase, staircase, rule).terminal, np.eye(2))
        assert scalar_covariation(staircase, staircase, rule).terminal == pytest.approx(2.0)


def test_orthogonal_increments_have_zero_covariation(grid):
    X = step_path(grid, [3, 9], np.array([[1.0, 0.0], [2.0, 0.0]]))
    Y = step_path(grid, [3, 20], np.array([[0.0, 1.0], [0.0, -1.0]]))
    assert scalar_covariation(X, Y).terminal == 0.0


def test_brownian_quadratic_variation_is_time():
    grid = TimeGrid(1.0, 4096)
    W = simulate_qwiener(QWienerSpec([1.0]), grid, replicate_rng(8, 0))
    se = np.sqrt(2.0 / grid.steps)
    assert abs(float(scalar_covariation(W, W).terminal) - 1.0) < 4 * se


def test_total_variation_of_time_and_of_jumps(staircase):
    grid = TimeGrid(1.0, 50)
    assert float(total_variation(SamplePath.continuous(grid, grid.nodes)).terminal) == pytest.approx(1.0)
    assert float(total_variation(staircase).terminal) == pytest.approx(2.0)


def test_corrector_bracket_total_variation_is_dominated():
    grid = TimeGrid.for_levels(1.0, [8], 4)
    G = simulate_qwiener(QWienerSpec([1.0, 0.5, 0.25]), grid, replicate_rng(3, 0))
    Z = forward_step_split(G, 8).Z
    tv = float(total_variation(tensor_covariation(Z, Z)).terminal)
    assert tv <= float(scalar_covariation(Z, Z).terminal) + 1e-12


def test_linear_rule_is_exact_on_interpolated_paths():
    grid = TimeGrid.for_levels(1.0, [16], 3)
    W = simulate_qwiener(QWienerSpec([1.0]), grid, replicate_rng(4, 0))
    U = forward_step_split(W, 16).U
    integral = float(tensor_integral_left(U, U, "linear").terminal[0, 0])
    assert integral == pytest.approx(0.5 * float(U.terminal[0]) ** 2, abs=1e-12)


def test_adjoint_and_trace_relations(rng, grid):
    X, Y = random_jump_path(rng, grid, (3,)), random_jump_path(rng, grid, (3,))
    np.testing.assert_allclose(
        adjoint_path(tensor_integral_left(X, Y)).values, tensor_integral_right(Y, X).values, atol=1e-12
    )
    np.testing.assert_allclose(
        trace_path(tensor_covariation(Y, Y)).values, scalar_covariation(Y, Y).values, atol=1e-12
    )


def test_contract_with_constant_tensor(rng, grid):
    J0 = rng.normal(size=(2, 2))
    J = SamplePath.continuous(grid, np.broadcast_to(J0, (grid.steps + 1, 2, 2)))
    theta = random_jump_path(rng, grid, (2, 2))
    for rule in ("left", "linear"):
        result = contract_integral(J, theta, rule).terminal
        assert float(result) == pytest.approx(float(np.sum(J0 * (theta.terminal - theta.left[0]))))


def test_zero_integrand_contracts_to_zero(rng, grid):
    theta = random_jump_path(rng, grid, (2, 2))
    assert float(contract_integral(SamplePath.zeros(grid, (2, 2)), theta).terminal) == 0.0


def test_operator_integral_against_scalar_path(rng, grid):
    V = random_jump_path(rng, grid, (2, 1))
    Y = random_jump_path(rng, grid)
    result = operator_integral(V, Y).terminal
    seq_v, seq_y = V.interleaved(), Y.interleaved()
    expected = np.einsum("qi,q->i", seq_v[:-1, :, 0], np.diff(seq_y))
    np.testing.assert_allclose(result, expected, atol=1e-12)


def test_unknown_rule_and_shape_errors(rng, grid):
    X = random_jump_path(rng, grid, (2,))
    with pytest.raises(SpecError):
        tensor_integral_left(X, X, "midpoint")
    with pytest.raises(DimensionMismatchError):
        scalar_covariation(X, random_jump_path(rng, grid, (3,)))


def test_partition_integrals_are_bilinear(rng, grid):
    X1, X2, Y1, Y2 = (random_jump_path(rng, grid, (2,)) for _ in range(4))
    a, b = 1.7, -0.4
    for rule in ("left", "linear"):
        combined = tensor_integral_left(a * X1 + b * X2, Y1, rule)
        parts = a * tensor_integral_left(X1, Y1, rule) + b * tensor_integral_left(X2, Y1, rule)
        np.testing.assert_allclose(combined.interleaved(), parts.interleaved(), atol=1e-12)

        combined = tensor_covariation(X1, a * Y1 + b * Y2, rule)
        parts = a * tensor_covariation(X1, Y1, rule) + b * tensor_covariation(X1, Y2, rule)
        np.testing.assert_allclose(combined.interleaved(), parts.interleaved(), atol=1e-12)


def test_corrector_covariation_has_closed_form_on_nodes():
    n = 8
    grid = TimeGrid.for_levels(1.0, [n], 4)
    G = simulate_qwiener(QWienerSpec([1.0, 0.5]), grid, replicate_rng(5, 0))
    split = forward_step_split(G, n)
    stride = grid.stride(n)
    # K_n(m/n −) = −Σ_{k<m} ΔG_k⊗ΔG_k = 2·H_n(m/n −)
    for rule in ("left", "linear"):
        K = tensor_covariation(split.Y, split.Z, rule)
        np.testing.assert_allclose(K.left[::stride], 2.0 * closed_form_H(G, n), atol=1e-12)
