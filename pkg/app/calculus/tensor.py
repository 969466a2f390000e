# app/calculus/tensor.py
"""
Integrales estocásticas tensoriales, covariaciones y variación total como
sumas sobre particiones.

Cada trayectoria se recorre sobre la partición resuelta en saltos
left[0], values[0], left[1], values[1], ...: el subincremento 2j es el salto
en el nodo j y el 2j+1 el tramo continuo de t_j a t_{j+1}.

Reglas:
    "left"   suma de Riemann por la izquierda (Itô), integrando pre-salto.
    "linear" trayectorias lineales entre nodos: trapecio en los tramos
             continuos, punto izquierdo en los saltos; las covariaciones
             conservan solo los saltos.
"""
from typing import Tuple

import numpy as np

from app.drivers.paths import SamplePath, TimeGrid
from app.errors import DimensionMismatchError, SpecError

RULES = ("left", "linear")


def _check_rule(rule: str):
    if rule not in RULES:
        raise SpecError(f"regla de integración desconocida '{rule}' (opciones: {', '.join(RULES)})")


def _as_array_path(path: SamplePath) -> np.ndarray:
    """Secuencia intercalada, con los payloads reales promovidos a vectores de dimensión 1."""
    seq = path.interleaved()
    return seq[:, None] if path.kind == "scalar" else seq


def _common(*paths: SamplePath) -> TimeGrid:
    first = paths[0]
    for other in paths[1:]:
        first.same_grid(other)
    return first.grid


def _increments(seq: np.ndarray) -> np.ndarray:
    return np.diff(seq, axis=0)


def _integrand(seq: np.ndarray, rule: str) -> np.ndarray:
    point = seq[:-1].copy()
    if rule == "linear":
        point[1::2] = 0.5 * (seq[1:-1:2] + seq[2::2])
    return point


def _jump_only(incr: np.ndarray, rule: str) -> np.ndarray:
    if rule == "linear":
        incr = incr.copy()
        incr[1::2] = 0.0
    return incr


def _accumulate(grid: TimeGrid, incr: np.ndarray) -> SamplePath:
    running = np.concatenate([np.zeros((1,) + incr.shape[1:]), np.cumsum(incr, axis=0)])
    return SamplePath(grid, running[1::2], running[0::2])


def _pair(X: SamplePath, Y: SamplePath) -> Tuple[TimeGrid, np.ndarray, np.ndarray]:
    grid = _common(X, Y)
    return grid, _as_array_path(X), _as_array_path(Y)


# =====================================================
# Integrales y covariaciones
# =====================================================

def tensor_integral_left(X: SamplePath, Y: SamplePath, rule: str = "left") -> SamplePath:
    """∫ X₋⊗dY."""
    _check_rule(rule)
    grid, x, y = _pair(X, Y)
    return _accumulate(grid, np.einsum("qi,qj->qij", _integrand(x, rule), _increments(y)))


def tensor_integral_right(Y: SamplePath, X: SamplePath, rule: str = "left") -> SamplePath:
    """∫ dY⊗X₋ (adjunto de tensor_integral_left(X, Y))."""
    _check_rule(rule)
    grid, y, x = _pair(Y, X)
    return _accumulate(grid, np.einsum("qi,qj->qij", _increments(y), _integrand(x, rule)))


def tensor_covariation(X: SamplePath, Y: SamplePath, rule: str = "left") -> SamplePath:
    """[X, Y]^⊗ = Σ ΔX⊗ΔY."""
    _check_rule(rule)
    grid, x, y = _pair(X, Y)
    dx = _jump_only(_increments(x), rule)
    return _accumulate(grid, np.einsum("qi,qj->qij", dx, _increments(y)))


def scalar_covariation(X: SamplePath, Y: SamplePath, rule: str = "left") -> SamplePath:
    """[X, Y] = Σ ⟨ΔX, ΔY⟩."""
    _check_rule(rule)
    grid, x, y = _pair(X, Y)
    dx, dy = _increments(x), _increments(y)
    if dx.shape[1:] != dy.shape[1:]:
        raise DimensionMismatchError(dx.shape[-1], dy.shape[-1])
    dx = _jump_only(dx, rule)
    return _accumulate(grid, np.einsum("qi,qi->q", dx, dy))


def total_variation(phi: SamplePath) -> SamplePath:
    """T_t(φ): suma acumulada de normas de los incrementos de la partición almacenada."""
    seq = phi.interleaved()
    incr = _increments(seq).reshape(seq.shape[0] - 1, -1)
    return _accumulate(phi.grid, np.linalg.norm(incr, axis=1))


def contract_integral(J: SamplePath, theta: SamplePath, rule: str = "left") -> SamplePath:
    """
    Σ ⟨J(t_i), ΔΘ⟩_HS.

    Si el payload de J tiene ejes extra al frente (K, d, d) el resultado es
    una trayectoria en K: un emparejamiento HS por coordenada.
    """
    _check_rule(rule)
    grid = _common(J, theta)
    j, th = J.interleaved(), theta.interleaved()
    if j.shape[-2:] != th.shape[1:]:
        raise DimensionMismatchError(th.shape[-1], j.shape[-1], what="tensor integrando")
    return _accumulate(grid, np.einsum("q...ij,qij->q...", _integrand(j, rule), _increments(th)))


# =====================================================
# Integrandos con valores en operadores
# =====================================================

def operator_integral(V: SamplePath, Y: SamplePath, rule: str = "left") -> SamplePath:
    """∫ V₋ dY, con V actuando por su último eje."""
    _check_rule(rule)
    grid, y = _common(V, Y), _as_array_path(Y)
    v = V.interleaved()
    if v.shape[-1] != y.shape[-1]:
        raise DimensionMismatchError(v.shape[-1], y.shape[-1])
    return _accumulate(grid, np.einsum("q...i,qi->q...", _integrand(v, rule), _increments(y)))


def operator_covariation(V: SamplePath, Y: SamplePath, rule: str = "left") -> SamplePath:
    """[[V, Y]] = Σ ΔV(ΔY), covariación generalizada para V con valores en operadores."""
    _check_rule(rule)
    grid, y = _common(V, Y), _as_array_path(Y)
    v = V.interleaved()
    if v.shape[-1] != y.shape[-1]:
        raise DimensionMismatchError(v.shape[-1], y.shape[-1])
    dv = _jump_only(_increments(v), rule)
    return _accumulate(grid, np.einsum("q...i,qi->q...", dv, _increments(y)))


def adjoint_path(A: SamplePath) -> SamplePath:
    return A.map(lambda arr: np.swapaxes(arr, -1, -2))


def trace_path(A: SamplePath) -> SamplePath:
    return A.map(lambda arr: np.trace(arr, axis1=-2, axis2=-1))
