# app/calculus/approximation.py
"""
Aproximaciones de Wong–Zakai de un driver G en la malla fina:

    U_n(t) = G(k/n) + n(t − k/n)(G((k+1)/n) − G(k/n))
    Y_n(t) = G(([nt]+1)/n)   (saltos en k/n, k = 0..nT−1)
    Z_n    = U_n − Y_n
"""
from dataclasses import dataclass

import numpy as np

from app.drivers.paths import SamplePath


@dataclass(frozen=True, eq=False)
class SplitPaths:
    level: int
    U: SamplePath
    Y: SamplePath
    Z: SamplePath

    @property
    def grid(self):
        return self.U.grid


def _node_values(G: SamplePath, n: int):
    stride = G.grid.stride(n)
    return G.values[::stride], stride


def interpolation_increments(G: SamplePath, n: int) -> np.ndarray:
    """ΔG_k = G((k+1)/n) − G(k/n), forma (nT, ...)."""
    nodes, _ = _node_values(G, n)
    return np.diff(nodes, axis=0)


def linear_interpolation(G: SamplePath, n: int) -> SamplePath:
    nodes, stride = _node_values(G, n)
    steps = G.grid.steps
    fine = np.arange(steps + 1)
    cell = np.minimum(fine // stride, nodes.shape[0] - 2)
    frac = (fine - cell * stride) / stride
    frac = frac.reshape((-1,) + (1,) * (nodes.ndim - 1))
    values = nodes[cell] + frac * (nodes[cell + 1] - nodes[cell])
    # nodos exactos, sin redondeo de la interpolación
    values[::stride] = nodes
    return SamplePath.continuous(G.grid, values)


def forward_step_split(G: SamplePath, n: int) -> SplitPaths:
    nodes, stride = _node_values(G, n)
    U = linear_interpolation(G, n)
    steps = G.grid.steps

    cell = np.minimum(np.arange(steps + 1) // stride, nodes.shape[0] - 2)
    values = nodes[cell + 1]
    left = np.concatenate([nodes[:1], values[:-1]])
    Y = SamplePath(G.grid, values, left)
    return SplitPaths(level=n, U=U, Y=Y, Z=U - Y)


def closed_form_H(G: SamplePath, n: int) -> np.ndarray:
    """−½ Σ_{k<m} ΔG_k⊗ΔG_k para m = 0..nT (valores en los nodos m/n)."""
    incr = interpolation_increments(G, n)
    incr = incr[:, None] if incr.ndim == 1 else incr
    outer = np.einsum("ki,kj->kij", incr, incr)
    return -0.5 * np.concatenate([np.zeros((1,) + outer.shape[1:]), np.cumsum(outer, axis=0)])
