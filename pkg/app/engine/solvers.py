# app/engine/solvers.py
"""
Solvers de Euler por lotes.

- solve_pathwise: X_{k+1} = X_k + f(X_k)·ΔY_n + f(X_k)·ΔZ_n  (subpasos en los
  tramos continuos, saltos aplicados de forma atómica)
- solve_limit:    X_{k+1} = X_k + f(X_k)·ΔY + ⟨D̃f(X_k) f(X_k), ΔΘ⟩ + b(X_k)Δt
  (ΔY se aplica entero al inicio de cada tramo; solo Θ y la deriva se
  reparten en subpasos, así el esquema sigue siendo de Itô)
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from app.calculus import SplitPaths, adjoint_path, tensor_covariation, tensor_integral_left
from app.config import settings
from app.drivers.paths import SamplePath, TimeGrid
from app.engine.fields import CoefficientField
from app.errors import BlowUpError, DimensionMismatchError, GridMismatchError
from app.hilbert import HSTensor, tilde


# ======================
# Corrección
# ======================

@dataclass(frozen=True, eq=False)
class CorrectionPath:
    """Proceso de corrección Θ (H* − K, o ½[U,U]^⊗ en forma cerrada), con Θ(0−) = 0."""

    path: SamplePath

    def __post_init__(self):
        if self.path.kind != "tensor":
            raise DimensionMismatchError(2, len(self.path.payload_shape), what="número de ejes de Θ")
        if np.any(self.path.left[0] != 0.0):
            raise GridMismatchError("Θ debe partir de cero")

    @property
    def grid(self) -> TimeGrid:
        return self.path.grid

    @property
    def dim(self) -> int:
        return self.path.payload_shape[0]

    @property
    def terminal(self) -> HSTensor:
        return HSTensor(self.path.terminal)

    @classmethod
    def zero(cls, grid: TimeGrid, dim: int) -> "CorrectionPath":
        return cls(SamplePath.zeros(grid, (dim, dim)))

    @classmethod
    def linear_in_time(cls, grid: TimeGrid, rate) -> "CorrectionPath":
        """Θ(t) = t·rate."""
        rate = np.asarray(rate, dtype=float)
        return cls(SamplePath.continuous(grid, grid.nodes[:, None, None] * rate))

    @classmethod
    def from_split(cls, split: SplitPaths, rule: str = "linear") -> "CorrectionPath":
        return cls.from_components(split.Y, split.Z, rule)

    @classmethod
    def from_components(cls, Y: SamplePath, Z: SamplePath, rule: str = "left") -> "CorrectionPath":
        """Θ_n = H_n* − K_n con H_n = ∫Z₋⊗dZ y K_n = [Y, Z]^⊗."""
        H = tensor_integral_left(Z, Z, rule)
        K = tensor_covariation(Y, Z, rule)
        return cls(adjoint_path(H) - K)


def _correction_batch(field: CoefficientField, x: np.ndarray, F: np.ndarray) -> np.ndarray:
    DF = field.df(x)
    if field.is_scalar:
        return DF[:, :, None] * F[:, None, :]
    return tilde(DF, F)


def correction_field(field: CoefficientField, x) -> Union[HSTensor, Tuple[HSTensor, ...]]:
    """
    Caso escalar: Df(x)⊗f(x). Caso vectorial: un HSTensor por coordenada de
    salida, ũv con u = Df(x) y v = f(x).
    """
    state = field.batch_state(x, 1)
    C = _correction_batch(field, state, field.f(state))[0]
    if field.is_scalar:
        return HSTensor(C)
    return tuple(HSTensor(block) for block in C)


# ======================
# Núcleo de Euler
# ======================

@dataclass(frozen=True, eq=False)
class BatchSolution:
    grid: TimeGrid
    values: np.ndarray
    left: np.ndarray
    aborted: np.ndarray
    abort_step: np.ndarray
    abort_norm: np.ndarray

    def path(self, index: int) -> SamplePath:
        return SamplePath(self.grid, self.values[index], self.left[index])


def _stack(paths: Sequence[SamplePath], grid: TimeGrid) -> np.ndarray:
    for p in paths:
        if p.grid != grid:
            raise GridMismatchError(f"mallas distintas: {p.grid} vs {grid}")
    return np.stack([p.interleaved() for p in paths])


def _euler(
    field: CoefficientField,
    grid: TimeGrid,
    drivers: np.ndarray,
    x0,
    substeps: int = 1,
    theta: Optional[np.ndarray] = None,
    threshold: Optional[float] = None,
    interpolate: bool = True,
) -> BatchSolution:
    threshold = settings.blowup_threshold if threshold is None else threshold
    batch, points, noise = drivers.shape
    if noise != field.noise_dim:
        raise DimensionMismatchError(field.noise_dim, noise, what="dimensión del ruido")
    if theta is not None and theta.shape[-1] != noise:
        raise DimensionMismatchError(noise, theta.shape[-1], what="dimensión de Θ")

    x = field.batch_state(x0, batch)
    state_axes = (1,) * len(field.state_shape)
    values = np.empty((batch, grid.steps + 1) + field.state_shape)
    left = np.empty_like(values)
    active = np.ones(batch, dtype=bool)
    abort_step = np.full(batch, -1)
    abort_norm = np.zeros(batch)

    def step(x, dU, dTheta, dt):
        F = field.f(x)
        if dU is None:
            incr = np.zeros_like(x)
        elif field.is_scalar:
            incr = np.einsum("bi,bi->b", F, dU)
        else:
            incr = np.einsum("bki,bi->bk", F, dU)
        if dTheta is not None:
            C = _correction_batch(field, x, F)
            incr = incr + (np.einsum("bij,bij->b", C, dTheta) if field.is_scalar else np.einsum("bpij,bij->bp", C, dTheta))
        if dt and field.drift is not None:
            incr = incr + field.drift(x) * dt
        return x + incr

    def guard(x, q):
        norms = np.abs(x) if field.is_scalar else np.linalg.norm(x, axis=1)
        bad = active & (~np.isfinite(norms) | (norms > threshold))
        if np.any(bad):
            for b in np.flatnonzero(bad):
                logger.debug("⚠️ Réplica {} abortada en el subincremento {}: ‖X‖ = {}", b, q, norms[b])
            abort_step[bad] = q
            abort_norm[bad] = norms[bad]
            active[bad] = False
        return np.where(active.reshape((-1,) + state_axes), x, 0.0)

    sub_dt = grid.dt / substeps
    for j in range(grid.steps + 1):
        left[:, j] = x
        q = 2 * j
        dU = drivers[:, q + 1] - drivers[:, q]
        dTheta = None if theta is None else theta[:, q + 1] - theta[:, q]
        if np.any(dU) or (dTheta is not None and np.any(dTheta)):
            x = guard(step(x, dU, dTheta, 0.0), q)
        values[:, j] = x
        if j == grid.steps:
            break
        dU = drivers[:, q + 2] - drivers[:, q + 1]
        dTheta = None if theta is None else (theta[:, q + 2] - theta[:, q + 1]) / substeps
        if interpolate:
            dU = dU / substeps
        for s in range(substeps):
            # sin interpolar, el incremento del driver entra entero en el primer subpaso
            x = guard(step(x, dU if interpolate or s == 0 else None, dTheta, sub_dt), q + 1)

    return BatchSolution(grid, values, left, ~active, abort_step, abort_norm)


def _raise_on_abort(solution: BatchSolution):
    if solution.aborted[0]:
        raise BlowUpError(int(solution.abort_step[0]), float(solution.abort_norm[0]))


# ======================
# API
# ======================

def solve_pathwise_batch(
    field: CoefficientField,
    Ys: Sequence[SamplePath],
    Zs: Sequence[SamplePath],
    x0,
    substeps: int = 1,
    threshold: Optional[float] = None,
) -> BatchSolution:
    _check_substeps(substeps)
    grid = Ys[0].grid
    drivers = _stack(Ys, grid) + _stack(Zs, grid)
    return _euler(field, grid, drivers, x0, substeps=substeps, threshold=threshold)


def solve_limit_batch(
    field: CoefficientField,
    Ys: Sequence[SamplePath],
    thetas: Union[CorrectionPath, Sequence[CorrectionPath]],
    x0,
    substeps: int = 1,
    threshold: Optional[float] = None,
) -> BatchSolution:
    """
    Θ puede ser una única CorrectionPath compartida por todo el lote.

    Los subpasos solo refinan Θ y la deriva: partir ΔY en trozos lineales
    desplazaría la solución hacia la de Stratonovich.
    """
    _check_substeps(substeps)
    grid = Ys[0].grid
    drivers = _stack(Ys, grid)
    if isinstance(thetas, CorrectionPath):
        shared = _stack([thetas.path], grid)
        theta = np.broadcast_to(shared, (drivers.shape[0],) + shared.shape[1:])
    else:
        theta = _stack([t.path for t in thetas], grid)
    return _euler(field, grid, drivers, x0, substeps=substeps, theta=theta, threshold=threshold, interpolate=False)


def solve_pathwise(
    field: CoefficientField, Y: SamplePath, Z: SamplePath, x0, substeps: int = 1, threshold: Optional[float] = None
) -> SamplePath:
    solution = solve_pathwise_batch(field, [Y], [Z], x0, substeps=substeps, threshold=threshold)
    _raise_on_abort(solution)
    return solution.path(0)


def solve_limit(
    field: CoefficientField,
    Y: SamplePath,
    theta: CorrectionPath,
    x0,
    substeps: int = 1,
    threshold: Optional[float] = None,
) -> SamplePath:
    solution = solve_limit_batch(field, [Y], [theta], x0, substeps=substeps, threshold=threshold)
    _raise_on_abort(solution)
    return solution.path(0)


def _check_substeps(substeps: int):
    if int(substeps) != substeps or substeps < 1:
        raise ValueError(f"substeps debe ser un entero ≥ 1 (recibido {substeps})")
