# app/engine/fields.py
"""
Campos de coeficientes f y sus derivadas, vectorizados sobre un lote de
réplicas (eje 0).

Formas (B = tamaño de lote, d = dimensión del ruido, K = dimensión del estado):

    estado escalar  x (B,)     f (B, d)      Df (B, d)        D²f (B, d)
    estado vector   x (B, K)   f (B, K, d)   Df (B, K, K, d)  D²f (B, K, K, K, d)

con Df[:, k] = ∂_k f y D²f[:, k, l] = ∂_k∂_l f.
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Union

import numpy as np

from app.errors import DimensionMismatchError, SpecError
from app.hilbert import HVector

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CoefficientField:
    name: str
    noise_dim: int
    f: ArrayFn
    df: ArrayFn
    d2f: Optional[ArrayFn] = None
    state_dim: Optional[int] = None
    bound: Optional[float] = None
    drift: Optional[ArrayFn] = None
    probe: int = 0
    extended: bool = False
    params: Dict[str, object] = field(default_factory=dict)

    @property
    def is_scalar(self) -> bool:
        return self.state_dim is None

    @property
    def state_shape(self):
        return () if self.is_scalar else (self.state_dim,)

    def batch_state(self, x0, batch: int) -> np.ndarray:
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != self.state_shape:
            raise DimensionMismatchError(
                self.state_dim or 1, x0.shape[0] if x0.ndim else 1, what="dimensión del estado"
            )
        return np.broadcast_to(x0, (batch,) + self.state_shape).copy()

    def evaluate(self, x) -> Union[HVector, np.ndarray]:
        """f en un único estado: HVector (estado escalar) o matriz (K, d)."""
        out = self.f(self.batch_state(x, 1))[0]
        return HVector(out) if self.is_scalar else out

    def probe_value(self, states: np.ndarray) -> np.ndarray:
        """Funcional de prueba ⟨X, e_probe⟩ (identidad en el caso escalar)."""
        return states if self.is_scalar else states[..., self.probe]

    def distance(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """|a − b| por nodo; en estados extendidos solo cuenta la coordenada de prueba."""
        if self.is_scalar or self.extended:
            return np.abs(self.probe_value(a) - self.probe_value(b))
        return np.linalg.norm(a - b, axis=-1)


def _as_vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.size == 0 or not np.all(np.isfinite(arr)):
        raise SpecError(f"parámetro '{name}' vacío o no finito")
    return arr


# ======================
# Estado escalar
# ======================

def constant_field(h, drift: float = 0.0) -> CoefficientField:
    h = _as_vector(h, "h")
    return CoefficientField(
        name="constant",
        noise_dim=h.size,
        f=lambda x: np.broadcast_to(h, (x.shape[0], h.size)).copy(),
        df=lambda x: np.zeros((x.shape[0], h.size)),
        d2f=lambda x: np.zeros((x.shape[0], h.size)),
        bound=float(np.linalg.norm(h)),
        drift=(lambda x: np.full_like(x, drift)) if drift else None,
        params={"h": h.tolist(), "drift": drift},
    )


def linear_field(a, drift: float = 0.0) -> CoefficientField:
    """f(x) = x·a, b(x) = β·x (no acotado: protegido por el umbral de explosión)."""
    a = _as_vector(a, "a")
    return CoefficientField(
        name="linear",
        noise_dim=a.size,
        f=lambda x: x[:, None] * a,
        df=lambda x: np.broadcast_to(a, (x.shape[0], a.size)).copy(),
        d2f=lambda x: np.zeros((x.shape[0], a.size)),
        drift=(lambda x: drift * x) if drift else None,
        params={"a": a.tolist(), "drift": drift},
    )


def sine_field(a, drift: float = 0.0) -> CoefficientField:
    """f(x) = sin(x)·a."""
    a = _as_vector(a, "a")
    return CoefficientField(
        name="sine",
        noise_dim=a.size,
        f=lambda x: np.sin(x)[:, None] * a,
        df=lambda x: np.cos(x)[:, None] * a,
        d2f=lambda x: -np.sin(x)[:, None] * a,
        bound=float(np.linalg.norm(a)),
        drift=(lambda x: drift * x) if drift else None,
        params={"a": a.tolist(), "drift": drift},
    )


# ======================
# Estado vectorial
# ======================

def linear_operator_field(base, slopes) -> CoefficientField:
    """F(x) = B + Σ_k x_k A_k, con B (K, d) y A (K, K, d)."""
    B = np.asarray(base, dtype=float)
    A = np.asarray(slopes, dtype=float)
    if B.ndim != 2 or A.shape != (B.shape[0],) + B.shape:
        raise SpecError(f"formas incompatibles: B {B.shape}, A {A.shape}")
    K, d = B.shape
    return CoefficientField(
        name="linear-operator",
        noise_dim=d,
        state_dim=K,
        f=lambda x: B + np.einsum("bk,kpi->bpi", x, A),
        df=lambda x: np.broadcast_to(A, (x.shape[0],) + A.shape).copy(),
        d2f=lambda x: np.zeros((x.shape[0], K, K, K, d)),
        params={"base": B.tolist(), "slopes": A.tolist()},
    )


def extended_state_field(a, A, c: float = 0.0) -> CoefficientField:
    """
    Campo de estado extendido x̃ = (t, x, h) ∈ ℝ×ℝ×H, dirigido por Ũ = (t, U, U):

        dt = dt,   dx = ⟨σ(t, x, h), dU⟩,   dh = dU

    con σ(t, x, h) = c·t·e + sin(x)·a + A·h y e = (1, ..., 1)/√d.
    La coordenada de prueba es x (índice 1).
    """
    a = _as_vector(a, "a")
    A = np.asarray(A, dtype=float)
    d = a.size
    if A.shape != (d, d):
        raise SpecError(f"A debe ser {d}×{d} (forma {A.shape})")
    e = np.ones(d) / np.sqrt(d)
    K, noise = 2 + d, 1 + 2 * d
    block2 = slice(1, 1 + d)

    def sigma(x):
        return c * x[:, :1] * e + np.sin(x[:, 1:2]) * a + x[:, 2:] @ A.T

    def f(x):
        out = np.zeros((x.shape[0], K, noise))
        out[:, 0, 0] = 1.0
        out[:, 1, block2] = sigma(x)
        out[:, 2:, 1 + d :] = np.eye(d)
        return out

    def df(x):
        out = np.zeros((x.shape[0], K, K, noise))
        out[:, 0, 1, block2] = c * e
        out[:, 1, 1, block2] = np.cos(x[:, 1:2]) * a
        out[:, 2:, 1, block2] = A.T
        return out

    def d2f(x):
        out = np.zeros((x.shape[0], K, K, K, noise))
        out[:, 1, 1, 1, block2] = -np.sin(x[:, 1:2]) * a
        return out

    return CoefficientField(
        name="extended-state",
        noise_dim=noise,
        state_dim=K,
        f=f,
        df=df,
        d2f=d2f,
        probe=1,
        extended=True,
        params={"a": a.tolist(), "A": A.tolist(), "c": c},
    )


def lift_driver_values(values: np.ndarray, times: np.ndarray, with_time: bool = True) -> np.ndarray:
    """(N+1, d) → (N+1, 1+2d): (t, u, u); con with_time=False la coordenada temporal es 0."""
    t = times[:, None] if with_time else np.zeros((values.shape[0], 1))
    return np.concatenate([t, values, values], axis=1)


def lift_tensor(M: np.ndarray) -> np.ndarray:
    """Bloques [[0, 0, 0], [0, M, M], [0, M, M]] sobre ℝ×H×H."""
    M = np.asarray(M, dtype=float)
    d = M.shape[-1]
    out = np.zeros(M.shape[:-2] + (1 + 2 * d, 1 + 2 * d))
    for r in (slice(1, 1 + d), slice(1 + d, 1 + 2 * d)):
        for s in (slice(1, 1 + d), slice(1 + d, 1 + 2 * d)):
            out[..., r, s] = M
    return out
