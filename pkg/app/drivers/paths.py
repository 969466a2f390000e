# app/drivers/paths.py
"""
Mallas temporales y trayectorias cadlag.

Una SamplePath guarda, para cada nodo t_k, el valor post-salto (`values`)
y el límite por la izquierda (`left`). Entre nodos consecutivos la
trayectoria se entiende continua: el tramo va de values[k] a left[k+1].
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from app.errors import GridMismatchError, GridMisalignmentError, SpecError

_ALIGN_TOL = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    horizon: float
    steps: int

    def __post_init__(self):
        if not self.horizon > 0:
            raise SpecError(f"horizonte T debe ser positivo (recibido {self.horizon})")
        if int(self.steps) != self.steps or self.steps < 1:
            raise SpecError(f"número de pasos N debe ser un entero ≥ 1 (recibido {self.steps})")
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.steps + 1)

    def cells(self, n: int) -> int:
        """Número de celdas n·T de la malla de interpolación de nivel n."""
        cells = n * self.horizon
        if n < 1 or abs(cells - round(cells)) > _ALIGN_TOL * max(1.0, cells):
            raise GridMisalignmentError(f"n·T = {cells} no es entero (n={n}, T={self.horizon})")
        return int(round(cells))

    def stride(self, n: int) -> int:
        """Pasos finos por celda 1/n; exige que la malla fina contenga los nodos k/n."""
        cells = self.cells(n)
        if self.steps % cells != 0:
            raise GridMisalignmentError(
                f"la malla fina (N={self.steps}) no contiene los nodos k/n para n={n}"
            )
        return self.steps // cells

    @classmethod
    def for_levels(cls, horizon: float, levels, refine: int) -> "TimeGrid":
        """Malla común a todos los niveles: N = max(n)·T·r."""
        finest = max(levels)
        probe = cls(horizon, 1)
        cells = probe.cells(finest)
        grid = cls(horizon, cells * refine)
        for n in levels:
            grid.stride(n)
        return grid


@dataclass(frozen=True, eq=False)
class SamplePath:
    """
    Trayectoria cadlag sobre una malla.

    values[k]: valor en t_k+ (post-salto); left[k]: límite por la izquierda
    en t_k. El payload es real (shape ()), HVector (d,) o HSTensor (d, d).
    """

    grid: TimeGrid
    values: np.ndarray
    left: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        left = np.array(self.left, dtype=float)
        if values.shape[0] != self.grid.steps + 1:
            raise GridMismatchError(
                f"la trayectoria tiene {values.shape[0]} nodos, la malla {self.grid.steps + 1}"
            )
        if left.shape != values.shape:
            raise GridMismatchError("valores y límites izquierdos con formas distintas")
        values.setflags(write=False)
        left.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "left", left)

    @classmethod
    def continuous(cls, grid: TimeGrid, values) -> "SamplePath":
        values = np.asarray(values, dtype=float)
        return cls(grid, values, values)

    @classmethod
    def zeros(cls, grid: TimeGrid, payload_shape=()) -> "SamplePath":
        return cls.continuous(grid, np.zeros((grid.steps + 1,) + tuple(payload_shape)))

    @property
    def payload_shape(self):
        return self.values.shape[1:]

    @property
    def kind(self) -> str:
        return {0: "scalar", 1: "vector", 2: "tensor"}.get(len(self.payload_shape), "array")

    @property
    def jumps(self) -> np.ndarray:
        """Flags de salto por nodo (valor post-salto distinto del límite izquierdo)."""
        diff = self.values - self.left
        return np.any(diff.reshape(diff.shape[0], -1) != 0.0, axis=1)

    @property
    def terminal(self) -> np.ndarray:
        return self.values[-1]

    def interleaved(self) -> np.ndarray:
        """Secuencia left[0], values[0], left[1], values[1], ... (2(N+1) puntos)."""
        stacked = np.stack([self.left, self.values], axis=1)
        return stacked.reshape((-1,) + self.payload_shape)

    def same_grid(self, other: "SamplePath"):
        if self.grid != other.grid:
            raise GridMismatchError(f"mallas distintas: {self.grid} vs {other.grid}")

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "SamplePath":
        return SamplePath(self.grid, fn(self.values), fn(self.left))

    def __add__(self, other: "SamplePath") -> "SamplePath":
        self.same_grid(other)
        return SamplePath(self.grid, self.values + other.values, self.left + other.left)

    def __sub__(self, other: "SamplePath") -> "SamplePath":
        self.same_grid(other)
        return SamplePath(self.grid, self.values - other.values, self.left - other.left)

    def __mul__(self, scalar: float) -> "SamplePath":
        return SamplePath(self.grid, self.values * float(scalar), self.left * float(scalar))

    __rmul__ = __mul__


def from_increments(grid: TimeGrid, increments: np.ndarray, start: Optional[np.ndarray] = None) -> SamplePath:
    """Trayectoria continua con W(0) = start y los incrementos dados por paso."""
    increments = np.asarray(increments, dtype=float)
    if increments.shape[0] != grid.steps:
        raise GridMismatchError(f"{increments.shape[0]} incrementos para {grid.steps} pasos")
    origin = np.zeros(increments.shape[1:]) if start is None else np.asarray(start, dtype=float)
    values = np.concatenate([origin[None, ...], origin[None, ...] + np.cumsum(increments, axis=0)])
    return SamplePath.continuous(grid, values)


def step_path(grid: TimeGrid, jump_nodes: np.ndarray, jumps: np.ndarray, start: Optional[np.ndarray] = None) -> SamplePath:
    """
    Trayectoria constante a trozos con saltos `jumps[i]` en los nodos
    `jump_nodes[i]` (índices de la malla fina, sin repetidos).
    """
    jumps = np.asarray(jumps, dtype=float)
    payload = jumps.shape[1:]
    origin = np.zeros(payload) if start is None else np.asarray(start, dtype=float)
    per_node = np.zeros((grid.steps + 1,) + payload)
    per_node[np.asarray(jump_nodes, dtype=int)] = jumps
    values = origin + np.cumsum(per_node, axis=0)
    left = values - per_node
    return SamplePath(grid, values, left)
