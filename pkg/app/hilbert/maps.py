# app/hilbert/maps.py
"""
Mapas auxiliares entre espacios de operadores.

- bar:   h̄ : HS(H,K) → K,  l ↦ l(h)
- tilde: ũv ∈ HS(H⊗H, K) a partir de u ∈ L(K, HS(H,K)) y v ∈ HS(H,K),
         con ũv(h1⊗h2) = uv(h2)(h1)

Convenciones de arrays:
    v   (K, d)       v[k, j] = ⟨v e_j, f_k⟩
    u   (K, K, d)    u[k] = u(f_k) ∈ HS(H,K)
    ũv  (K, d, d)    ũv[p, i, j] = ⟨ũv(e_i⊗e_j), f_p⟩
"""
import numpy as np

from app.errors import DimensionMismatchError
from app.hilbert.core import HVector


def bar(h: HVector, out_dim: int) -> np.ndarray:
    """Matriz (K, K·d) de h̄ actuando sobre vec(l) en orden row-major."""
    return np.kron(np.eye(out_dim), h.coeffs[None, :])


def bar_apply(h: HVector, operator: np.ndarray) -> np.ndarray:
    """h̄(l) = l(h) para l ∈ HS(H,K) dado como matriz (K, d)."""
    operator = np.asarray(operator, dtype=float)
    if operator.ndim != 2 or operator.shape[-1] != h.dim:
        raise DimensionMismatchError(h.dim, operator.shape[-1])
    return bar(h, operator.shape[0]) @ operator.reshape(-1)


def tilde(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Admite ejes de lote al frente: u (..., K, K, d), v (..., K, d)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[-3] != v.shape[-2]:
        raise DimensionMismatchError(v.shape[-2], u.shape[-3], what="dimensión de K")
    if u.shape[-1] != v.shape[-1]:
        raise DimensionMismatchError(v.shape[-1], u.shape[-1])
    return np.einsum("...kpi,...kj->...pij", u, v)


def compose(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """uv ∈ HS(H, HS(H,K)) como array (d, K, d): uv[j] = u(v e_j)."""
    return np.einsum("kj,kpi->jpi", np.asarray(v, dtype=float), np.asarray(u, dtype=float))
