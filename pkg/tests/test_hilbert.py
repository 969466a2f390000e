import numpy as np
import pytest
from loguru import logger

from app.errors import DimensionMismatchError, NonFiniteError, SpecError
from app.hilbert import (
    HSTensor,
    HVector,
    TruncationSpec,
    adjoint,
    apply,
    bar,
    bar_apply,
    compose,
    hs_inner,
    hs_norm,
    op_norm,
    tensor_product,
    tilde,
    trace,
)


def test_tensor_product_on_basis_vectors():
    A = tensor_product(HVector([1.0, 0.0]), HVector([0.0, 1.0]))
    np.testing.assert_array_equal(A.entries, [[0.0, 1.0], [0.0, 0.0]])


def test_tensor_product_with_zero_is_zero():
    A = tensor_product(HVector([1.0, -2.0, 3.0]), TruncationSpec(3).zeros())
    assert A == HSTensor.zeros(3)


def test_trace_of_tensor_product_is_inner_product():
    u, v = HVector([1.0, 2.0]), HVector([3.0, 4.0])
    assert trace(tensor_product(u, v)) == pytest.approx(11.0)
    assert u.inner(v) == pytest.approx(11.0)


def test_apply_follows_action_formula():
    e1_e2 = tensor_product(TruncationSpec(2).basis(0), TruncationSpec(2).basis(1))
    np.testing.assert_array_equal(apply(e1_e2, HVector([0.0, 2.0])).coeffs, [2.0, 0.0])


def test_apply_identity_and_zero():
    y = HVector([0.3, -1.2, 4.0])
    assert apply(TruncationSpec(3).identity(), y) == y
    assert apply(HSTensor.zeros(3), y) == TruncationSpec(3).zeros()


def test_adjoint_of_tensor_product_swaps_factors():
    u, v = HVector([1.0, 2.0, 0.5]), HVector([-1.0, 0.0, 3.0])
    assert adjoint(tensor_product(u, v)) == tensor_product(v, u)


def test_trace_identity_and_norms():
    assert trace(TruncationSpec(3).identity()) == 3.0
    assert hs_norm(tensor_product(HVector([3.0, 0.0]), HVector([0.0, 4.0]))) == pytest.approx(12.0)
    assert op_norm(HSTensor(np.diag([2.0, 1.0]))) == pytest.approx(2.0)
    assert op_norm(HSTensor.zeros(2)) == 0.0


def test_op_norm_matches_largest_singular_value(rng):
    M = rng.normal(size=(6, 6))
    assert op_norm(HSTensor(M)) == pytest.approx(np.linalg.svd(M, compute_uv=False)[0], rel=1e-6)


def test_hs_inner_is_entrywise_sum(rng):
    A, B = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    assert hs_inner(HSTensor(A), HSTensor(B)) == pytest.approx(float(np.sum(A * B)))
    assert hs_inner(HSTensor(A), HSTensor(A)) == pytest.approx(hs_norm(HSTensor(A)) ** 2)


def test_dimension_mismatch_is_rejected():
    with pytest.raises(DimensionMismatchError):
        tensor_product(HVector([1.0, 2.0]), HVector([1.0, 2.0, 3.0]))
    with pytest.raises(DimensionMismatchError):
        apply(TruncationSpec(2).identity(), HVector([1.0, 2.0, 3.0]))
    with pytest.raises(DimensionMismatchError):
        HSTensor(np.zeros((2, 3)))


def test_non_finite_inputs_are_rejected():
    with pytest.raises(NonFiniteError):
        HVector([1.0, np.nan])
    with pytest.raises(NonFiniteError):
        hs_norm(HSTensor([[np.inf, 0.0], [0.0, 1.0]]))


def test_truncation_must_be_positive_integer():
    with pytest.raises(SpecError):
        TruncationSpec(0)


def test_values_are_immutable():
    v = HVector([1.0, 2.0])
    with pytest.raises(ValueError):
        v.coeffs[0] = 5.0


def test_bar_evaluates_operator_at_h(rng):
    h = HVector(rng.normal(size=3))
    operator = rng.normal(size=(2, 3))
    np.testing.assert_allclose(bar(h, 2) @ operator.reshape(-1), operator @ h.coeffs)
    np.testing.assert_allclose(bar_apply(h, operator), operator @ h.coeffs)


def test_tilde_reproduces_composition(rng):
    K, d = 3, 4
    u, v = rng.normal(size=(K, K, d)), rng.normal(size=(K, d))
    T = tilde(u, v)
    uv = compose(u, v)
    # ũv(e_i⊗e_j) = uv(e_j)(e_i)
    for i in range(d):
        for j in range(d):
            np.testing.assert_allclose(T[:, i, j], uv[j][:, i])
    assert np.linalg.norm(T) == pytest.approx(np.linalg.norm(uv))


def test_tilde_blocks_preserve_hs_norm(rng):
    K, d = 2, 3
    u, v = rng.normal(size=(K, K, d)), rng.normal(size=(K, d))
    blocks = [HSTensor(block) for block in tilde(u, v)]
    assert len(blocks) == K
    total = np.sqrt(sum(hs_norm(block) ** 2 for block in blocks))
    assert total == pytest.approx(np.linalg.norm(compose(u, v)))
    with pytest.raises(DimensionMismatchError):
        tilde(u, rng.normal(size=(K + 1, d)))


def test_tilde_accepts_leading_batch_axes(rng):
    K, d = 2, 3
    u, v = rng.normal(size=(5, K, K, d)), rng.normal(size=(5, K, d))
    batched = tilde(u, v)
    assert batched.shape == (5, K, d, d)
    for b in range(5):
        np.testing.assert_allclose(batched[b], tilde(u[b], v[b]))


def test_bar_apply_matches_tilde_on_simple_tensors(rng):
    K, d = 3, 2
    u, v = rng.normal(size=(K, K, d)), rng.normal(size=(K, d))
    h1, h2 = rng.normal(size=d), rng.normal(size=d)
    uv_h2 = np.einsum("j,jpi->pi", h2, compose(u, v))
    expected = np.einsum("pij,i,j->p", tilde(u, v), h1, h2)
    np.testing.assert_allclose(bar_apply(HVector(h1), uv_h2), expected, atol=1e-12)
    with pytest.raises(DimensionMismatchError):
        bar_apply(HVector(h1), rng.normal(size=(K, d + 1)))


def test_tensor_product_is_bilinear(rng):
    u1, u2, v1, v2 = (rng.normal(size=3) for _ in range(4))
    a, b = 2.5, -0.7
    left = tensor_product(HVector(a * u1 + b * u2), HVector(v1)).entries
    np.testing.assert_allclose(
        left, a * tensor_product(HVector(u1), HVector(v1)).entries + b * tensor_product(HVector(u2), HVector(v1)).entries
    )
    right = tensor_product(HVector(u1), HVector(a * v1 + b * v2)).entries
    np.testing.assert_allclose(
        right, a * tensor_product(HVector(u1), HVector(v1)).entries + b * tensor_product(HVector(u1), HVector(v2)).entries
    )


def test_adjoint_is_an_isometry_and_op_norm_is_dominated(rng):
    for _ in range(25):
        d = int(rng.integers(1, 8))
        A = HSTensor(rng.normal(size=(d, d)))
        assert hs_norm(adjoint(A)) == pytest.approx(hs_norm(A))
        assert op_norm(A) <= hs_norm(A) + 1e-8


def test_op_norm_logs_why_it_falls_back_to_svd():
    messages = []
    sink = logger.add(messages.append, level="DEBUG", format="{message}")
    try:
        # σ₂/σ₁ tan cerca de 1 que 10·d iteraciones no bastan
        value = op_norm(HSTensor(np.diag([1.0, 0.99])))
    finally:
        logger.remove(sink)
    assert value == pytest.approx(1.0)
    assert any("20/20" in m and "SVD" in m for m in messages)
