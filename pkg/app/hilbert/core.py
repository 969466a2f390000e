# app/hilbert/core.py
"""
Álgebra lineal en truncación finita para vectores de Hilbert y tensores
Hilbert–Schmidt.

Un elemento h ∈ H se representa por sus coeficientes en una base ortonormal
fija {e_j}, j < d. Un elemento de H⊗̂_HS H ≅ HS(H,H) se representa por la
matriz d×d de entradas ⟨A, e_i⊗e_j⟩_HS. Todos los tipos son inmutables.
"""
from dataclasses import dataclass
from typing import List

import numpy as np
from loguru import logger

from app.errors import DimensionMismatchError, NonFiniteError, SpecError

OP_NORM_TOL = 1e-8


@dataclass(frozen=True)
class TruncationSpec:
    """Dimensión d de la base truncada {e_j}."""

    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise SpecError(f"la dimensión de truncación debe ser un entero ≥ 1 (recibido {self.dim})")

    def zeros(self) -> "HVector":
        return HVector(np.zeros(self.dim))

    def basis(self, j: int) -> "HVector":
        coeffs = np.zeros(self.dim)
        coeffs[j] = 1.0
        return HVector(coeffs)

    def identity(self) -> "HSTensor":
        return HSTensor(np.eye(self.dim))


def _frozen(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise DimensionMismatchError(ndim, arr.ndim, what="número de ejes")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class HVector:
    """Coeficientes de un elemento de H en la base {e_j}."""

    coeffs: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.coeffs, 1)
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("HVector con coeficientes no finitos")
        object.__setattr__(self, "coeffs", arr)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    @property
    def spec(self) -> TruncationSpec:
        return TruncationSpec(self.dim)

    def inner(self, other: "HVector") -> float:
        _check_dims(self.dim, other.dim)
        return float(self.coeffs @ other.coeffs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __add__(self, other: "HVector") -> "HVector":
        _check_dims(self.dim, other.dim)
        return HVector(self.coeffs + other.coeffs)

    def __sub__(self, other: "HVector") -> "HVector":
        _check_dims(self.dim, other.dim)
        return HVector(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "HVector":
        return HVector(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "HVector":
        return HVector(-self.coeffs)

    def __eq__(self, other) -> bool:
        return isinstance(other, HVector) and np.array_equal(self.coeffs, other.coeffs)

    def tolist(self) -> List[float]:
        return self.coeffs.tolist()


@dataclass(frozen=True, eq=False)
class HSTensor:
    """Elemento de H⊗̂_HS H: entries[i, j] = ⟨A, e_i⊗e_j⟩_HS."""

    entries: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.entries, 2)
        if arr.shape[0] != arr.shape[1]:
            raise DimensionMismatchError(arr.shape[0], arr.shape[1], what="tensor no cuadrado")
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def zeros(cls, dim: int) -> "HSTensor":
        return cls(np.zeros((dim, dim)))

    def __add__(self, other: "HSTensor") -> "HSTensor":
        _check_dims(self.dim, other.dim)
        return HSTensor(self.entries + other.entries)

    def __sub__(self, other: "HSTensor") -> "HSTensor":
        _check_dims(self.dim, other.dim)
        return HSTensor(self.entries - other.entries)

    def __mul__(self, scalar: float) -> "HSTensor":
        return HSTensor(self.entries * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "HSTensor":
        return HSTensor(-self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, HSTensor) and np.array_equal(self.entries, other.entries)

    def flatten(self) -> List[float]:
        """Entradas en orden row-major (formato de los reportes JSON)."""
        return self.entries.reshape(-1).tolist()


def _check_dims(expected: int, got: int):
    if expected != got:
        raise DimensionMismatchError(expected, got)


def _check_finite(A: HSTensor):
    if not np.all(np.isfinite(A.entries)):
        raise NonFiniteError("tensor HS con entradas no finitas")


# =====================================================
# Operaciones
# =====================================================

def tensor_product(u: HVector, v: HVector) -> HSTensor:
    """u⊗v con entradas (i, j) = u_i · v_j."""
    _check_dims(u.dim, v.dim)
    return HSTensor(np.outer(u.coeffs, v.coeffs))


def apply(A: HSTensor, y: HVector) -> HVector:
    """Acción de A como operador: (u⊗v)(y) = ⟨v, y⟩ u."""
    _check_dims(A.dim, y.dim)
    return HVector(A.entries @ y.coeffs)


def adjoint(A: HSTensor) -> HSTensor:
    return HSTensor(A.entries.T)


def trace(A: HSTensor) -> float:
    _check_finite(A)
    return float(np.trace(A.entries))


def hs_inner(A: HSTensor, B: HSTensor) -> float:
    _check_dims(A.dim, B.dim)
    _check_finite(A)
    _check_finite(B)
    return float(np.sum(A.entries * B.entries))


def hs_norm(A: HSTensor) -> float:
    _check_finite(A)
    return float(np.linalg.norm(A.entries, "fro"))


def op_norm(A: HSTensor, tol: float = OP_NORM_TOL) -> float:
    """
    Norma de operador por iteración de potencias sobre AᵀA.

    Vector inicial determinista (todo unos normalizado) y como máximo 10·d
    iteraciones; si no converge se usa la SVD.
    """
    _check_finite(A)
    M = A.entries
    d = M.shape[0]
    if not np.any(M):
        return 0.0

    gram = M.T @ M
    v = np.ones(d) / np.sqrt(d)
    estimate, residual = 0.0, float("inf")
    max_iter = 10 * d
    iterations = 0
    for iterations in range(1, max_iter + 1):
        w = gram @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            break
        v = w / norm_w
        new_estimate = float(np.sqrt(v @ gram @ v))
        if estimate > 0:
            residual = abs(new_estimate - estimate) / new_estimate
            if residual <= tol:
                return new_estimate
        estimate = new_estimate

    logger.debug(
        "🔄 Iteración de potencias sin converger tras {}/{} iteraciones (d={}, residuo relativo {:.2e} > {:.0e}), usando SVD",
        iterations,
        max_iter,
        d,
        residual,
        tol,
    )
    return float(np.linalg.norm(M, 2))
