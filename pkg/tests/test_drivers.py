import numpy as np
import pytest

from app.calculus import tensor_covariation
from app.drivers import (
    MarkovDriverSpec,
    MollifiedNoiseSpec,
    QWienerSpec,
    SamplePath,
    TimeGrid,
    build_kernel,
    correlated_wiener,
    kernel_operator,
    linear_drift_path,
    markov_limit_correction,
    markov_limit_covariance,
    markov_limit_tensors,
    markov_split,
    mollified_split,
    replicate_rng,
    simulate_chain,
    simulate_markov_driver,
    simulate_mollified_noise,
    simulate_qwiener,
    space_points,
    spatial_mollifier,
    stationary_distribution,
    step_path,
    white_noise_increments,
)
from app.drivers.mollified import time_bump, time_bump_cdf
from app.errors import GridMismatchError, GridMisalignmentError, SpecError
from app.hilbert import HSTensor, HVector, TruncationSpec

TWO_STATE = [[0.7, 0.3], [0.6, 0.4]]


# ======================
# Mallas y trayectorias
# ======================

def test_grid_levels_share_the_fine_grid():
    grid = TimeGrid.for_levels(1.0, [8, 16, 32, 64], 8)
    assert grid.steps == 512
    assert [grid.stride(n) for n in (8, 16, 32, 64)] == [64, 32, 16, 8]


def test_grid_rejects_unaligned_levels():
    with pytest.raises(GridMisalignmentError):
        TimeGrid(1.0, 10).stride(4)
    with pytest.raises(GridMisalignmentError):
        TimeGrid(0.5, 10).cells(3)
    with pytest.raises(SpecError):
        TimeGrid(0.0, 10)


def test_sample_path_interleaves_left_limits_and_values(grid):
    path = step_path(grid, [0, 10], np.array([1.0, -2.0]))
    seq = path.interleaved()
    assert seq.shape == (2 * (grid.steps + 1),)
    assert seq[0] == 0.0 and seq[1] == 1.0
    assert np.flatnonzero(path.jumps).tolist() == [0, 10]
    assert path.terminal == pytest.approx(-1.0)


def test_sample_path_checks_grid():
    with pytest.raises(GridMismatchError):
        SamplePath.continuous(TimeGrid(1.0, 4), np.zeros(3))
    with pytest.raises(GridMismatchError):
        SamplePath.zeros(TimeGrid(1.0, 4)) + SamplePath.zeros(TimeGrid(1.0, 8))


# ======================
# Flujos aleatorios
# ======================

def test_replicate_streams_are_reproducible_and_distinct():
    a = replicate_rng(3, 17).standard_normal(5)
    b = replicate_rng(3, 17).standard_normal(5)
    c = replicate_rng(3, 17, stream=1).standard_normal(5)
    d = replicate_rng(3, 18).standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)
    assert not np.allclose(a, d)


# ======================
# Q-Wiener
# ======================

def test_zero_eigenvalues_give_zero_path(grid, rng):
    path = simulate_qwiener(QWienerSpec(np.zeros(3)), grid, rng)
    assert not np.any(path.values)


def test_negative_eigenvalue_is_rejected():
    with pytest.raises(SpecError):
        QWienerSpec([1.0, -0.5])


def test_qwiener_terminal_energy_matches_trace():
    spec = QWienerSpec([1.0, 0.5])
    grid = TimeGrid(1.0, 16)
    energy = np.array(
        [np.sum(simulate_qwiener(spec, grid, replicate_rng(11, r)).terminal ** 2) for r in range(10_000)]
    )
    se = energy.std(ddof=1) / np.sqrt(energy.size)
    assert abs(energy.mean() - spec.trace) < 3.5 * se


def test_qwiener_covariation_matches_tq():
    spec = QWienerSpec([1.0, 0.5, 0.25])
    grid = TimeGrid(2.0, 4096)
    W = simulate_qwiener(spec, grid, replicate_rng(5, 0))
    bracket = tensor_covariation(W, W).terminal
    # Var([β,β]_T) = 2T²/N por coordenada
    tol = 5 * np.sqrt(2.0 / grid.steps) * grid.horizon
    np.testing.assert_allclose(bracket, grid.horizon * spec.covariance.entries, atol=tol)


def test_correlated_wiener_rejects_indefinite_covariance(grid, rng):
    with pytest.raises(SpecError):
        correlated_wiener(np.array([[1.0, 2.0], [2.0, 1.0]]), grid, rng)


def test_linear_drift_path_is_t_times_h(grid):
    h = HVector([1.0, -2.0])
    path = linear_drift_path(h, grid)
    np.testing.assert_allclose(path.values, np.outer(grid.nodes, h.coeffs))
    assert not np.any(path.jumps)


# ======================
# Cadena de Markov
# ======================

def test_stationary_distribution_of_two_state_chain():
    np.testing.assert_allclose(stationary_distribution(TWO_STATE), [2.0 / 3.0, 1.0 / 3.0])


def test_non_stochastic_transition_is_rejected():
    with pytest.raises(SpecError):
        MarkovDriverSpec.from_transition([[0.5, 0.4], [0.6, 0.4]])


def test_zero_operator_gives_zero_drivers():
    spec = MarkovDriverSpec.from_transition(TWO_STATE, operator=HSTensor.zeros(2))
    Y, Z = simulate_markov_driver(spec, 16, 1.0, replicate_rng(0, 0))
    assert not np.any(Y.values) and not np.any(Z.values)


def test_iid_chain_has_vanishing_corrector():
    spec = MarkovDriverSpec.from_transition([[0.25, 0.75], [0.25, 0.75]])
    Y, Z = simulate_markov_driver(spec, 32, 1.0, replicate_rng(1, 0))
    np.testing.assert_allclose(Z.values, 0.0, atol=1e-15)
    assert np.any(Y.values)


def test_markov_split_jumps_on_interpolation_nodes():
    spec = MarkovDriverSpec.from_transition(TWO_STATE)
    grid = TimeGrid.for_levels(1.0, [8], 4)
    chain = simulate_chain(spec, grid.cells(8), replicate_rng(2, 0))
    Y, _ = markov_split(spec, 8, grid, chain)
    assert set(np.flatnonzero(Y.jumps)) <= set(range(4, grid.steps + 1, 4))


def test_markov_martingale_increments_are_uncorrelated():
    spec = MarkovDriverSpec.from_transition(TWO_STATE)
    Y, _ = simulate_markov_driver(spec, 4000, 1.0, replicate_rng(3, 0))
    jumps = (Y.values - Y.left)[1:, 0]
    rho = np.corrcoef(jumps[:-1], jumps[1:])[0, 1]
    assert abs(rho) < 4.0 / np.sqrt(jumps.size)


def test_limit_covariance_vanishes_for_constant_function():
    spec = MarkovDriverSpec.from_transition(TWO_STATE, embed=np.ones((2, 1)), operator=HSTensor(np.eye(1)))
    h = HVector([1.0])
    assert markov_limit_covariance(spec, h, h) == pytest.approx(0.0, abs=1e-15)


def test_limit_covariance_of_iid_chain_is_stationary_covariance():
    spec = MarkovDriverSpec.from_transition([[0.2, 0.5, 0.3]] * 3)
    pi = spec.stationary
    basis = TruncationSpec(3)
    for i in range(3):
        for j in range(3):
            expected = float(i == j) - np.sqrt(pi[i] * pi[j])
            got = markov_limit_covariance(spec, basis.basis(i), basis.basis(j))
            assert got == pytest.approx(expected, abs=1e-12)


def test_limit_covariance_matches_brute_force_double_sum():
    spec = MarkovDriverSpec.from_transition(TWO_STATE, embed=np.array([[1.0, 0.0], [0.0, 1.0]]))
    P, pi = np.asarray(TWO_STATE), spec.stationary
    f = np.array([1.0, 0.0])  # indicadora del primer estado
    Pf = P @ f
    brute = sum(pi[x] * P[x, y] * (Pf[x] - f[y]) ** 2 for x in range(2) for y in range(2))
    h = TruncationSpec(2).basis(0)
    assert markov_limit_covariance(spec, h, h) == pytest.approx(brute, rel=1e-12)
    C, _, _ = markov_limit_tensors(spec)
    assert C[0, 0] == pytest.approx(brute, rel=1e-12)


def test_limit_correction_combines_h_and_k():
    spec = MarkovDriverSpec.from_transition(TWO_STATE)
    _, H, K = markov_limit_tensors(spec)
    np.testing.assert_allclose(markov_limit_correction(spec), H.T - K, atol=1e-15)
    # sin corrector (cadena iid) no hay corrección
    iid = MarkovDriverSpec.from_transition([[0.25, 0.75], [0.25, 0.75]])
    np.testing.assert_allclose(markov_limit_correction(iid), 0.0, atol=1e-15)


def test_markov_terminal_covariance_matches_limit():
    spec = MarkovDriverSpec.from_transition(TWO_STATE)
    C, _, _ = markov_limit_tensors(spec)
    terminals = np.array(
        [simulate_markov_driver(spec, 32, 1.0, replicate_rng(9, r))[0].terminal for r in range(4000)]
    )
    centred = terminals - terminals.mean(axis=0)
    products = np.einsum("ri,rj->rij", centred, centred)
    se = products.std(axis=0, ddof=1) / np.sqrt(terminals.shape[0])
    assert np.all(np.abs(products.mean(axis=0) - C) <= 4 * se + 1e-12)


# ======================
# Ruido molificado
# ======================

def _mollified(kernel="gaussian", points=8):
    pts = space_points(points)
    return MollifiedNoiseSpec(points, build_kernel(kernel, pts))


def test_time_bump_is_a_unit_mass_profile():
    v = np.linspace(-1.0, 0.0, 20_001)
    assert np.trapz(time_bump(v), v) == pytest.approx(1.0, abs=1e-6)
    assert float(time_bump_cdf(-1.0)) == pytest.approx(0.0)
    assert float(time_bump_cdf(0.0)) == pytest.approx(1.0)


def test_zero_kernel_gives_zero_drivers():
    spec = _mollified("zero")
    grid = TimeGrid.for_levels(1.0, [4], 4)
    Y, Z, S = simulate_mollified_noise(spec, 4, grid, replicate_rng(0, 0))
    assert S == HSTensor.zeros(spec.size)
    assert not np.any(Y.values) and not np.any(Z.values)


def test_separable_kernel_operator_is_rank_one():
    spec = _mollified("separable")
    pts = spec.points()[:, 0]
    quad = np.sin(np.pi * pts) * np.sqrt(spec.cell_volume)
    np.testing.assert_allclose(kernel_operator(spec).entries, np.outer(quad, quad), atol=1e-14)
    assert np.linalg.matrix_rank(kernel_operator(spec).entries) == 1


def test_spatial_mollifier_is_an_average():
    spec = _mollified(points=16)
    Sn = spatial_mollifier(spec, 4)
    interior = Sn[6:10]
    np.testing.assert_allclose(interior.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(Sn >= 0.0)


def test_mollifier_resolution_is_checked():
    spec = _mollified(points=4)
    with pytest.raises(GridMisalignmentError):
        spatial_mollifier(spec, 8)
    grid = TimeGrid.for_levels(1.0, [4], 2)
    with pytest.raises(GridMisalignmentError):
        mollified_split(spec, 4, grid, np.zeros((grid.steps, spec.size)))


def test_mollified_corrector_moment_bound():
    spec = _mollified(points=8)
    S = kernel_operator(spec)
    grid = TimeGrid.for_levels(1.0, [4, 8], 4)
    bound = np.sum(S.entries ** 2)
    for n in (4, 8):
        moments = [
            np.sum(mollified_split(spec, n, grid, white_noise_increments(spec, grid, replicate_rng(4, r)))[1].terminal ** 2)
            for r in range(500)
        ]
        assert np.mean(moments) <= 1.1 * bound / n


def test_mollified_martingale_variance():
    spec = _mollified(points=8)
    n = 4
    grid = TimeGrid.for_levels(1.0, [n], 4)
    h = TruncationSpec(spec.size).basis(2)
    operator = spatial_mollifier(spec, n) @ kernel_operator(spec).entries
    expected = grid.horizon * np.sum((operator @ h.coeffs) ** 2)
    samples = np.array(
        [simulate_mollified_noise(spec, n, grid, replicate_rng(5, r))[0].terminal @ h.coeffs for r in range(2000)]
    )
    variance = samples.var(ddof=1)
    assert abs(variance - expected) < 4 * expected * np.sqrt(2.0 / (samples.size - 1))
