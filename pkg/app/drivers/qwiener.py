# app/drivers/qwiener.py
"""
Procesos Q-Wiener truncados: W(t) = Σ_j √λ_j β_j(t) e_j.
"""
from dataclasses import dataclass

import numpy as np

from app.drivers.paths import SamplePath, TimeGrid, from_increments
from app.errors import SpecError
from app.hilbert import HSTensor, HVector


@dataclass(frozen=True, eq=False)
class QWienerSpec:
    """Covarianza Q diagonal en la base {e_j}."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        lam = np.array(self.eigenvalues, dtype=float).reshape(-1)
        if lam.size == 0:
            raise SpecError("QWienerSpec sin autovalores")
        if not np.all(np.isfinite(lam)) or np.any(lam < 0):
            raise SpecError(f"autovalores de Q deben ser finitos y ≥ 0: {lam.tolist()}")
        lam.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def covariance(self) -> HSTensor:
        return HSTensor(np.diag(self.eigenvalues))

    @property
    def trace(self) -> float:
        return float(self.eigenvalues.sum())


def qwiener_increments(spec: QWienerSpec, grid: TimeGrid, rng: np.random.Generator) -> np.ndarray:
    """Incrementos (N, d) con varianza λ_j·dt en la coordenada j."""
    scale = np.sqrt(spec.eigenvalues * grid.dt)
    return rng.standard_normal((grid.steps, spec.dim)) * scale


def simulate_qwiener(spec: QWienerSpec, grid: TimeGrid, rng: np.random.Generator) -> SamplePath:
    return from_increments(grid, qwiener_increments(spec, grid, rng))


def correlated_wiener(covariance: np.ndarray, grid: TimeGrid, rng: np.random.Generator) -> SamplePath:
    """Browniano con covarianza arbitraria (simétrica, semidefinida) vía autodescomposición."""
    cov = np.asarray(covariance, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise SpecError(f"covarianza debe ser cuadrada (forma {cov.shape})")
    sym = 0.5 * (cov + cov.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    scale = max(1.0, float(np.abs(eigvals).max(initial=0.0)))
    if eigvals.min(initial=0.0) < -1e-10 * scale:
        raise SpecError(f"covarianza no semidefinida (autovalor mínimo {eigvals.min():.3e})")
    root = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))
    increments = rng.standard_normal((grid.steps, cov.shape[0])) @ root.T * np.sqrt(grid.dt)
    return from_increments(grid, increments)


def linear_drift_path(direction: HVector, grid: TimeGrid) -> SamplePath:
    """Driver determinista G(t) = t·h."""
    return SamplePath.continuous(grid, np.outer(grid.nodes, direction.coeffs))
