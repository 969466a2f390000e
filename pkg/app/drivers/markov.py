# app/drivers/markov.py
"""
Drivers construidos sobre una cadena de Markov finita estacionaria.

Con ES[x, k] = (S e_k)(x) y PES = P·ES, para la cadena ξ_0 ~ π:

    ΔY_n(k/n) = (PES[ξ_{k−1}] − ES[ξ_k]) / √n
    ΔZ_n(k/n) = (PES[ξ_k] − PES[ξ_{k−1}]) / √n

de modo que Y_n + Z_n = n^{-1/2} Σ (PSh(ξ_k) − Sh(ξ_k)) + término telescópico.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from app.drivers.paths import SamplePath, TimeGrid, step_path
from app.errors import SpecError
from app.hilbert import HSTensor, HVector

STOCHASTIC_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MarkovDriverSpec:
    """
    transition: P (|U|×|U|); stationary: π; embed: E[x, i] = e_i(x);
    operator: S (d×d) en la base {e_i}.
    """

    transition: np.ndarray
    stationary: np.ndarray
    embed: np.ndarray
    operator: HSTensor

    def __post_init__(self):
        P = np.array(self.transition, dtype=float)
        pi = np.array(self.stationary, dtype=float).reshape(-1)
        E = np.array(self.embed, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise SpecError(f"la matriz de transición debe ser cuadrada (forma {P.shape})")
        if np.any(P < 0) or not np.allclose(P.sum(axis=1), 1.0, rtol=0.0, atol=STOCHASTIC_TOL):
            raise SpecError("la matriz de transición no es estocástica por filas")
        if pi.shape[0] != P.shape[0] or np.any(pi < 0) or abs(pi.sum() - 1.0) > STOCHASTIC_TOL:
            raise SpecError("π no es una distribución sobre los estados")
        if np.max(np.abs(pi @ P - pi)) > STOCHASTIC_TOL:
            raise SpecError("π no es estacionaria: π·P ≠ π")
        if E.shape != (P.shape[0], self.operator.dim):
            raise SpecError(f"embedding con forma {E.shape}, se esperaba ({P.shape[0]}, {self.operator.dim})")
        if not np.all(np.isfinite(self.operator.entries)) or not np.all(np.isfinite(E)):
            raise SpecError("S o el embedding tienen entradas no finitas")
        for arr in (P, pi, E):
            arr.setflags(write=False)
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "stationary", pi)
        object.__setattr__(self, "embed", E)

    @classmethod
    def from_transition(
        cls,
        transition,
        operator: Optional[HSTensor] = None,
        embed: Optional[np.ndarray] = None,
    ) -> "MarkovDriverSpec":
        """
        Construye la especificación calculando π. Por defecto e_i = δ_i/√π_i
        (ortonormal en L²(π)) y S = identidad.
        """
        P = np.asarray(transition, dtype=float)
        pi = stationary_distribution(P)
        if embed is None:
            if np.any(pi <= 0):
                raise SpecError("el embedding por defecto requiere π > 0 en todos los estados")
            embed = np.diag(1.0 / np.sqrt(pi))
        embed = np.asarray(embed, dtype=float)
        if operator is None:
            operator = HSTensor(np.eye(embed.shape[1]))
        return cls(P, pi, embed, operator)

    @property
    def states(self) -> int:
        return self.transition.shape[0]

    @property
    def dim(self) -> int:
        return self.operator.dim

    @property
    def function_table(self) -> np.ndarray:
        """ES[x, k] = (S e_k)(x)."""
        return self.embed @ self.operator.entries

    def evaluate(self, h: HVector) -> np.ndarray:
        """Sh evaluada en cada estado."""
        return self.function_table @ h.coeffs


def stationary_distribution(transition) -> np.ndarray:
    P = np.asarray(transition, dtype=float)
    eigvals, left = linalg.eig(P, left=True, right=False)
    idx = int(np.argmin(np.abs(eigvals - 1.0)))
    pi = np.real(left[:, idx])
    total = pi.sum()
    if abs(total) < 1e-14:
        raise SpecError("no se pudo normalizar la distribución estacionaria")
    pi = pi / total
    return np.clip(pi, 0.0, None) / np.clip(pi, 0.0, None).sum()


def simulate_chain(spec: MarkovDriverSpec, steps: int, rng: np.random.Generator) -> np.ndarray:
    """ξ_0, ..., ξ_steps con ξ_0 ~ π."""
    cumulative = np.cumsum(spec.transition, axis=1)
    uniforms = rng.random(steps + 1)
    chain = np.empty(steps + 1, dtype=int)
    chain[0] = min(int(np.searchsorted(np.cumsum(spec.stationary), uniforms[0], side="right")), spec.states - 1)
    for k in range(1, steps + 1):
        nxt = int(np.searchsorted(cumulative[chain[k - 1]], uniforms[k], side="right"))
        chain[k] = min(nxt, spec.states - 1)
    return chain


def markov_split(spec: MarkovDriverSpec, n: int, grid: TimeGrid, chain: np.ndarray) -> Tuple[SamplePath, SamplePath]:
    cells = grid.cells(n)
    stride = grid.stride(n)
    if chain.shape[0] < cells + 1:
        raise SpecError(f"la cadena tiene {chain.shape[0]} estados, se requieren {cells + 1}")
    ES = spec.function_table
    PES = spec.transition @ ES
    prev, curr = chain[:cells], chain[1 : cells + 1]
    scale = 1.0 / np.sqrt(n)
    nodes = np.arange(1, cells + 1) * stride

    Y = step_path(grid, nodes, (PES[prev] - ES[curr]) * scale)
    Z = step_path(grid, nodes, (PES[curr] - PES[prev]) * scale)
    return Y, Z


def simulate_markov_driver(
    spec: MarkovDriverSpec, n: int, T: float, rng: np.random.Generator, refine: int = 1
) -> Tuple[SamplePath, SamplePath]:
    grid = TimeGrid.for_levels(T, [n], refine)
    chain = simulate_chain(spec, grid.cells(n), rng)
    return markov_split(spec, n, grid, chain)


# =====================================================
# Límites exactos (sumas dobles sobre π(x)P(x,y))
# =====================================================

def _pair_weights(spec: MarkovDriverSpec) -> np.ndarray:
    return spec.stationary[:, None] * spec.transition


def markov_limit_covariance(spec: MarkovDriverSpec, h_i: HVector, h_j: HVector) -> float:
    """C_ij = Σ π(x)P(x,y)(PSh_i(x) − Sh_i(y))(PSh_j(x) − Sh_j(y))."""
    Sh_i, Sh_j = spec.evaluate(h_i), spec.evaluate(h_j)
    PSh_i, PSh_j = spec.transition @ Sh_i, spec.transition @ Sh_j
    A_i = PSh_i[:, None] - Sh_i[None, :]
    A_j = PSh_j[:, None] - Sh_j[None, :]
    return float(np.sum(_pair_weights(spec) * A_i * A_j))


def markov_limit_tensors(spec: MarkovDriverSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Límites por unidad de tiempo de [Y_n,Y_n]^⊗, H_n y K_n en la base {e_i}:
    devuelve (C, H̄, K̄), todos d×d.
    """
    ES = spec.function_table
    PES = spec.transition @ ES
    w = _pair_weights(spec)
    dY = PES[:, None, :] - ES[None, :, :]
    dZ = PES[None, :, :] - PES[:, None, :]
    C = np.einsum("xy,xyi,xyj->ij", w, dY, dY)
    K = np.einsum("xy,xyi,xyj->ij", w, dY, dZ)
    H = np.einsum("xy,xi,xyj->ij", w, PES, dZ)
    return C, H, K


def markov_limit_correction(spec: MarkovDriverSpec) -> np.ndarray:
    """Θ̄ = H̄ᵀ − K̄, corrección por unidad de tiempo."""
    _, H, K = markov_limit_tensors(spec)
    return H.T - K
