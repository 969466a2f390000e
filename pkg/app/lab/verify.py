# app/lab/verify.py
"""
Suite de identidades algebraicas exactas (sin Monte Carlo).

Cada identidad se evalúa sobre trayectorias aleatorias con saltos y tramos
continuos, una por semilla, y se reporta el máximo residuo relativo.
"""
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel

from app.calculus import (
    adjoint_path,
    closed_form_H,
    contract_integral,
    forward_step_split,
    operator_covariation,
    operator_integral,
    scalar_covariation,
    tensor_covariation,
    tensor_integral_left,
    tensor_integral_right,
    total_variation,
    trace_path,
)
from app.config import settings
from app.drivers import SamplePath, TimeGrid, replicate_rng
from app.hilbert import HSTensor, HVector, adjoint, apply, bar_apply, compose, tilde

IDENTITY_TOL = 1e-10
VERIFY_MASTER_SEED = 20_240_601


class IdentityResult(BaseModel):
    name: str
    max_residual: float
    passed: bool
    seeds: int


# ======================
# Trayectorias aleatorias
# ======================

def random_jump_path(rng: np.random.Generator, grid: TimeGrid, payload=(), jump_prob: float = 0.3) -> SamplePath:
    """Trayectoria cadlag: incrementos gaussianos continuos más saltos en nodos aleatorios (incluido t=0)."""
    payload = tuple(payload)
    nodes = grid.steps + 1
    start = rng.normal(size=payload)
    jumps = rng.normal(size=(nodes,) + payload) * (rng.random(nodes) < jump_prob).reshape((-1,) + (1,) * len(payload))
    flow = rng.normal(scale=np.sqrt(grid.dt), size=(nodes,) + payload)
    flow[-1] = 0.0
    # secuencia intercalada: salto en el nodo j, luego el tramo continuo hasta j+1
    incr = np.stack([jumps, flow], axis=1).reshape((2 * nodes,) + payload)
    seq = start + np.concatenate([np.zeros((1,) + payload), np.cumsum(incr[:-1], axis=0)])
    return SamplePath(grid, seq[1::2], seq[0::2])


def _random_grid(rng: np.random.Generator) -> TimeGrid:
    return TimeGrid(1.0, int(rng.integers(8, 33)))


def _residual(observed: np.ndarray, expected: np.ndarray) -> float:
    observed, expected = np.asarray(observed, dtype=float), np.asarray(expected, dtype=float)
    scale = max(1.0, float(np.max(np.abs(expected))) if expected.size else 1.0)
    return float(np.max(np.abs(observed - expected))) / scale


def _path_residual(a: SamplePath, b: SamplePath) -> float:
    return _residual(a.interleaved(), b.interleaved())


# ======================
# Identidades
# ======================

def integration_by_parts(rng: np.random.Generator) -> float:
    """X⊗Y − X(0−)⊗Y(0−) = ∫X₋⊗dY + ∫dX⊗Y₋ + [X,Y]^⊗, con ambas reglas."""
    grid = _random_grid(rng)
    d = int(rng.integers(1, 5))
    X, Y = random_jump_path(rng, grid, (d,)), random_jump_path(rng, grid, (d,))
    x0, y0 = X.left[0], Y.left[0]
    product = SamplePath(
        grid,
        np.einsum("ki,kj->kij", X.values, Y.values) - np.outer(x0, y0),
        np.einsum("ki,kj->kij", X.left, Y.left) - np.outer(x0, y0),
    )
    worst = 0.0
    for rule in ("left", "linear"):
        rhs = tensor_integral_left(X, Y, rule) + tensor_integral_right(X, Y, rule) + tensor_covariation(X, Y, rule)
        worst = max(worst, _path_residual(rhs, product))
    return worst


def chain_rule(rng: np.random.Generator) -> float:
    """∫⟨J₋, d(∫X₋⊗dY)⟩_HS = ∫⟨J₋*(X₋), dY⟩ (regla izquierda)."""
    grid = _random_grid(rng)
    d = int(rng.integers(1, 5))
    J = random_jump_path(rng, grid, (d, d))
    X, Y = random_jump_path(rng, grid, (d,)), random_jump_path(rng, grid, (d,))

    lhs = contract_integral(J, tensor_integral_left(X, Y, "left"), "left")

    def pulled(Js: np.ndarray, Xs: np.ndarray) -> np.ndarray:
        return np.stack([apply(adjoint(HSTensor(j)), HVector(x)).coeffs for j, x in zip(Js, Xs)])

    integrand = SamplePath(grid, pulled(J.values, X.values), pulled(J.left, X.left))
    rhs = operator_integral(integrand, Y, "left")
    return _path_residual(lhs, rhs)


def covariation_of_integral(rng: np.random.Generator) -> float:
    """[∫V₋dY, Z]^⊗ = ∫ V₋ d[Y, Z]^⊗, con ambas reglas."""
    grid = _random_grid(rng)
    d, k = int(rng.integers(1, 5)), int(rng.integers(1, 4))
    V = random_jump_path(rng, grid, (k, d))
    Y, Z = random_jump_path(rng, grid, (d,)), random_jump_path(rng, grid, (d,))

    def lift(arr):
        # J[k, l, i, j] = V[k, i]·δ_{lj}
        return np.einsum("...ki,lj->...klij", arr, np.eye(d))

    J = V.map(lift)
    worst = 0.0
    for rule in ("left", "linear"):
        lhs = tensor_covariation(operator_integral(V, Y, rule), Z, rule)
        rhs = contract_integral(J, tensor_covariation(Y, Z, rule), rule)
        worst = max(worst, _path_residual(lhs, rhs))
    return worst


def operator_covariation_tilde(rng: np.random.Generator) -> float:
    """[[u(FW), Y]] = ∫⟨ũv, d[Y, W]^⊗⟩ para u lineal y v = F constante."""
    grid = _random_grid(rng)
    d, k = int(rng.integers(1, 5)), int(rng.integers(1, 4))
    A = rng.normal(size=(k, k, d))
    F = rng.normal(size=(k, d))
    W, Y = random_jump_path(rng, grid, (d,)), random_jump_path(rng, grid, (d,))
    V = W.map(lambda w: np.einsum("...j,kj,kpi->...pi", w, F, A))
    T = tilde(A, F)
    T_path = SamplePath.continuous(grid, np.broadcast_to(T, (grid.steps + 1,) + T.shape))
    worst = 0.0
    for rule in ("left", "linear"):
        lhs = operator_covariation(V, Y, rule)
        rhs = contract_integral(T_path, tensor_covariation(Y, W, rule), rule)
        worst = max(worst, _path_residual(lhs, rhs))
    return worst


def adjoint_identity(rng: np.random.Generator) -> float:
    """(∫X₋⊗dY)* = ∫dY⊗X₋."""
    grid = _random_grid(rng)
    d = int(rng.integers(1, 5))
    X, Y = random_jump_path(rng, grid, (d,)), random_jump_path(rng, grid, (d,))
    return max(
        _path_residual(adjoint_path(tensor_integral_left(X, Y, rule)), tensor_integral_right(Y, X, rule))
        for rule in ("left", "linear")
    )


def trace_identity(rng: np.random.Generator) -> float:
    """trace([Y,Y]^⊗) = [Y,Y]."""
    grid = _random_grid(rng)
    Y = random_jump_path(rng, grid, (int(rng.integers(1, 5)),))
    return max(
        _path_residual(trace_path(tensor_covariation(Y, Y, rule)), scalar_covariation(Y, Y, rule))
        for rule in ("left", "linear")
    )


def bilinearity(rng: np.random.Generator) -> float:
    """∫(aX₁ + bX₂)₋⊗d(cY₁ + eY₂) se reparte en los cuatro términos, con ambas reglas."""
    grid = _random_grid(rng)
    d = int(rng.integers(1, 5))
    X1, X2, Y1, Y2 = (random_jump_path(rng, grid, (d,)) for _ in range(4))
    a, b, c, e = (float(x) for x in rng.normal(size=4))
    worst = 0.0
    for rule in ("left", "linear"):
        lhs = tensor_integral_left(a * X1 + b * X2, c * Y1 + e * Y2, rule)
        rhs = (
            (a * c) * tensor_integral_left(X1, Y1, rule)
            + (a * e) * tensor_integral_left(X1, Y2, rule)
            + (b * c) * tensor_integral_left(X2, Y1, rule)
            + (b * e) * tensor_integral_left(X2, Y2, rule)
        )
        worst = max(worst, _path_residual(lhs, rhs))
    return worst


def variation_bound(rng: np.random.Generator) -> float:
    """T([Y,Y]^⊗) ≤ [Y,Y] en todos los nodos; devuelve el exceso relativo."""
    grid = _random_grid(rng)
    Y = random_jump_path(rng, grid, (int(rng.integers(1, 5)),))
    worst = 0.0
    for rule in ("left", "linear"):
        tv = total_variation(tensor_covariation(Y, Y, rule)).interleaved()
        bracket = scalar_covariation(Y, Y, rule).interleaved()
        excess = float(np.max(np.maximum(tv - bracket, 0.0)))
        worst = max(worst, excess / max(1.0, float(np.max(np.abs(bracket)))))
    return worst


def tilde_bar(rng: np.random.Generator) -> float:
    """ũv(h₁⊗h₂) = h̄₁(uv(h₂))."""
    d, k = int(rng.integers(1, 5)), int(rng.integers(1, 4))
    u, v = rng.normal(size=(k, k, d)), rng.normal(size=(k, d))
    h1, h2 = HVector(rng.normal(size=d)), HVector(rng.normal(size=d))
    lhs = np.einsum("pij,i,j->p", tilde(u, v), h1.coeffs, h2.coeffs)
    uv_h2 = np.einsum("j,jpi->pi", h2.coeffs, compose(u, v))
    return _residual(lhs, bar_apply(h1, uv_h2))


def _random_split(rng: np.random.Generator):
    n = int(rng.choice([2, 4, 8]))
    refine = int(rng.integers(1, 5))
    grid = TimeGrid(1.0, n * refine)
    d = int(rng.integers(1, 5))
    increments = rng.normal(scale=np.sqrt(grid.dt), size=(grid.steps, d))
    values = np.concatenate([rng.normal(size=(1, d)), increments]).cumsum(axis=0)
    G = SamplePath.continuous(grid, values)
    return G, n, forward_step_split(G, n)


def split_sum(rng: np.random.Generator) -> float:
    """U_n = Y_n + Z_n y U_n(k/n) = G(k/n)."""
    G, n, split = _random_split(rng)
    stride = G.grid.stride(n)
    return max(
        _path_residual(split.U, split.Y + split.Z),
        _residual(split.U.values[::stride], G.values[::stride]),
    )


def left_limit_zero(rng: np.random.Generator) -> float:
    """Z_n(k/n −) = 0 en todos los nodos de interpolación."""
    G, n, split = _random_split(rng)
    return float(np.max(np.abs(split.Z.left[:: G.grid.stride(n)])))


def closed_form_h(rng: np.random.Generator) -> float:
    """H_n(m/n −) = −½ Σ_{k<m} ΔG_k⊗ΔG_k (regla lineal exacta)."""
    G, n, split = _random_split(rng)
    H = tensor_integral_left(split.Z, split.Z, "linear")
    return _residual(H.left[:: G.grid.stride(n)], closed_form_H(G, n))


def exact_cell_rule(rng: np.random.Generator) -> float:
    """sym ∫U_n⊗dU_n = ½(U_n⊗U_n − U_n(0)⊗U_n(0)) para la interpolación lineal."""
    G, n, split = _random_split(rng)
    U = split.U
    integral = tensor_integral_left(U, U, "linear").values
    sym = 0.5 * (integral + np.swapaxes(integral, -1, -2))
    square = np.einsum("ki,kj->kij", U.values, U.values) - np.outer(U.values[0], U.values[0])
    return _residual(sym, 0.5 * square)


IDENTITIES: Dict[str, Callable[[np.random.Generator], float]] = {
    "integration_by_parts": integration_by_parts,
    "chain_rule": chain_rule,
    "covariation_of_integral": covariation_of_integral,
    "operator_covariation_tilde": operator_covariation_tilde,
    "adjoint": adjoint_identity,
    "trace": trace_identity,
    "bilinearity": bilinearity,
    "variation_bound": variation_bound,
    "tilde_bar": tilde_bar,
    "split_sum": split_sum,
    "left_limit_zero": left_limit_zero,
    "closed_form_H": closed_form_h,
    "exact_cell_rule": exact_cell_rule,
}


def run_identity_suite(seeds: Optional[int] = None, tol: float = IDENTITY_TOL) -> List[IdentityResult]:
    seeds = settings.verify_seeds if seeds is None else seeds
    logger.info("🔄 Verificando {} identidades exactas con {} semillas...", len(IDENTITIES), seeds)

    results: List[IdentityResult] = []
    for index, (name, identity) in enumerate(IDENTITIES.items()):
        worst = max(identity(replicate_rng(VERIFY_MASTER_SEED, seed, index)) for seed in range(seeds))
        passed = worst <= tol
        results.append(IdentityResult(name=name, max_residual=worst, passed=passed, seeds=seeds))
        if passed:
            logger.info("✅ {}: residuo máximo {:.2e}", name, worst)
        else:
            logger.error("❌ {}: residuo máximo {:.2e} > {:.0e}", name, worst, tol)

    failed = sum(not r.passed for r in results)
    if failed:
        logger.warning("⚠️  {}/{} identidades fallidas", failed, len(results))
    else:
        logger.success("🎉 Todas las identidades verificadas ({}/{})", len(results), len(results))
    return results


def summary(results: List[IdentityResult]) -> Tuple[int, int]:
    return sum(r.passed for r in results), len(results)
