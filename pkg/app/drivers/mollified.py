# app/drivers/mollified.py
"""
Ruido blanco espacio-temporal molificado sobre una caja acotada de ℝ^D.

La caja [lo, hi]^D se divide en m^D celdas; la base discreta es
e_i = 1_{celda i}/√vol, ortonormal. En esa base:

    S[i, j]   = γ(x_i, u_j)·vol                       (operador de núcleo)
    S_n[i, j] = ρ_n(x_i − x_j)·vol / masa_discreta    (molificación espacial)
    Y_n(t)    = (S_n S)ᵀ W(t)
    Z_n(t)    = −(S_n S)ᵀ ∫_{t−1/n}^{t} Φ_η(n(s−t)) dW(s)

donde W son los coeficientes del ruido blanco (brownianos independientes) y
Φ_η la función de distribución del bump temporal η sobre (−1, 0).
"""
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Optional, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.signal import lfilter
from scipy.special import gamma as gamma_fn

from app.drivers.paths import SamplePath, TimeGrid, from_increments
from app.errors import GridMisalignmentError, SpecError
from app.hilbert import HSTensor

KERNELS = ("gaussian", "separable", "zero")


# =====================================================
# Bumps polinómicos (clase C², soporte compacto, masa 1)
# =====================================================

def spatial_bump_mass(space_dim: int) -> float:
    """∫_{|x|<1} (1−|x|²)³ dx = π^{D/2}·Γ(4)/Γ(D/2+4)."""
    return float(np.pi ** (space_dim / 2) * gamma_fn(4) / gamma_fn(space_dim / 2 + 4))


def spatial_bump(x: np.ndarray, space_dim: int) -> np.ndarray:
    """ρ(x) = c·(1−|x|²)³ en la bola unidad; x con forma (..., D)."""
    r2 = np.sum(np.asarray(x, dtype=float) ** 2, axis=-1)
    profile = np.where(r2 < 1.0, (1.0 - r2) ** 3, 0.0)
    return profile / spatial_bump_mass(space_dim)


@lru_cache(maxsize=1)
def _time_bump_polys() -> Tuple[Polynomial, Polynomial, float]:
    inner = Polynomial([1.0, 2.0])  # 2v + 1
    density = (1.0 - inner ** 2) ** 3
    cumulative = density.integ(lbnd=-1.0)
    return density, cumulative, float(cumulative(0.0))


def time_bump(v: np.ndarray) -> np.ndarray:
    """η(v) = c·(1−(2v+1)²)³ sobre (−1, 0)."""
    density, _, mass = _time_bump_polys()
    v = np.asarray(v, dtype=float)
    return np.where((v > -1.0) & (v < 0.0), density(v) / mass, 0.0)


def time_bump_cdf(u: np.ndarray) -> np.ndarray:
    """Φ_η(u) = ∫_{−1}^{u} η."""
    _, cumulative, mass = _time_bump_polys()
    u = np.clip(np.asarray(u, dtype=float), -1.0, 0.0)
    return cumulative(u) / mass


def time_window(n: int, dt: float) -> np.ndarray:
    """Pesos w_j = −Φ_η(−n(j+½)dt) mientras (j+½)dt < 1/n."""
    count = int(np.ceil(1.0 / (n * dt) - 0.5))
    lags = (np.arange(max(count, 1)) + 0.5) * dt
    lags = lags[lags < 1.0 / n]
    return -time_bump_cdf(-n * lags)


# =====================================================
# Especificación
# =====================================================

@dataclass(frozen=True, eq=False)
class MollifiedNoiseSpec:
    points_per_axis: int
    kernel: np.ndarray
    space_dim: int = 1
    box: Tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.points_per_axis < 1 or self.space_dim < 1:
            raise SpecError("la malla espacial necesita al menos un punto y una dimensión")
        lo, hi = self.box
        if not hi > lo:
            raise SpecError(f"caja espacial vacía: {self.box}")
        kernel = np.array(self.kernel, dtype=float)
        m = self.size
        if kernel.shape != (m, m):
            raise SpecError(f"el núcleo γ debe ser {m}×{m} (forma {kernel.shape})")
        if not np.all(np.isfinite(kernel)):
            raise SpecError("núcleo γ con entradas no finitas")
        kernel.setflags(write=False)
        object.__setattr__(self, "kernel", kernel)

    @property
    def size(self) -> int:
        return self.points_per_axis ** self.space_dim

    @property
    def cell_width(self) -> float:
        lo, hi = self.box
        return (hi - lo) / self.points_per_axis

    @property
    def cell_volume(self) -> float:
        return self.cell_width ** self.space_dim

    def points(self) -> np.ndarray:
        return space_points(self.points_per_axis, self.space_dim, self.box)


def space_points(points_per_axis: int, space_dim: int = 1, box: Tuple[float, float] = (0.0, 1.0)) -> np.ndarray:
    """Centros de celda, forma (M, D), en orden lexicográfico."""
    lo, hi = box
    width = (hi - lo) / points_per_axis
    axis = lo + (np.arange(points_per_axis) + 0.5) * width
    grids = np.meshgrid(*([axis] * space_dim), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=-1)


def gaussian_kernel(points: np.ndarray, width: float) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.exp(-np.sum(diff ** 2, axis=-1) / (2.0 * width ** 2))


def separable_kernel(
    points: np.ndarray,
    phi: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    psi: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> np.ndarray:
    """γ(x, u) = φ(x)ψ(u); por defecto φ = ψ = sin(π·x₁)."""
    default = lambda p: np.sin(np.pi * p[:, 0])  # noqa: E731
    phi = phi or default
    psi = psi or default
    return np.outer(phi(points), psi(points))


def build_kernel(name: str, points: np.ndarray, width: float = 0.2) -> np.ndarray:
    if name == "gaussian":
        return gaussian_kernel(points, width)
    if name == "separable":
        return separable_kernel(points)
    if name == "zero":
        return np.zeros((points.shape[0], points.shape[0]))
    raise SpecError(f"núcleo desconocido '{name}' (opciones: {', '.join(KERNELS)})")


# =====================================================
# Operadores
# =====================================================

def kernel_operator(spec: MollifiedNoiseSpec) -> HSTensor:
    return HSTensor(spec.kernel * spec.cell_volume)


def spatial_mollifier(spec: MollifiedNoiseSpec, n: int) -> np.ndarray:
    """Matriz S_n, normalizada con la masa del retículo infinito."""
    h = spec.cell_width
    if h > 1.0 / n + 1e-12:
        raise GridMisalignmentError(
            f"la malla espacial (h={h:.4g}) no resuelve el ancho 1/n={1.0 / n:.4g}"
        )
    reach = int(np.floor(1.0 / (n * h)))
    offsets = np.array(list(product(range(-reach, reach + 1), repeat=spec.space_dim)), dtype=float) * h
    mass = float(np.sum(n ** spec.space_dim * spatial_bump(n * offsets, spec.space_dim))) * spec.cell_volume

    pts = spec.points()
    diff = pts[:, None, :] - pts[None, :, :]
    weights = n ** spec.space_dim * spatial_bump(n * diff, spec.space_dim) * spec.cell_volume
    return weights / mass


def white_noise_increments(spec: MollifiedNoiseSpec, grid: TimeGrid, rng: np.random.Generator) -> np.ndarray:
    """Incrementos (N, M) de los coeficientes del ruido en la base de celdas."""
    return rng.standard_normal((grid.steps, spec.size)) * np.sqrt(grid.dt)


def mollified_split(
    spec: MollifiedNoiseSpec, n: int, grid: TimeGrid, increments: np.ndarray
) -> Tuple[SamplePath, SamplePath, HSTensor]:
    if grid.dt > 1.0 / (4 * n) + 1e-15:
        raise GridMisalignmentError(
            f"la malla temporal (dt={grid.dt:.4g}) no resuelve el molificador (se requiere dt ≤ 1/(4n)={1.0 / (4 * n):.4g})"
        )
    S = kernel_operator(spec)
    operator = spatial_mollifier(spec, n) @ S.entries

    Y = from_increments(grid, increments @ operator)

    weights = time_window(n, grid.dt)
    filtered = lfilter(weights, [1.0], increments, axis=0)
    window = np.concatenate([np.zeros((1, spec.size)), filtered], axis=0)
    Z = SamplePath.continuous(grid, window @ operator)
    return Y, Z, S


def simulate_mollified_noise(
    spec: MollifiedNoiseSpec, n: int, grid: TimeGrid, rng: np.random.Generator
) -> Tuple[SamplePath, SamplePath, HSTensor]:
    return mollified_split(spec, n, grid, white_noise_increments(spec, grid, rng))


def limit_driver(spec: MollifiedNoiseSpec, grid: TimeGrid, increments: np.ndarray) -> SamplePath:
    """Driver límite Y = SᵀW sobre el mismo ruido."""
    return from_increments(grid, increments @ kernel_operator(spec).entries)
