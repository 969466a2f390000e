# app/lab/scenarios.py
"""
Configuración de escenarios.

Los ficheros de escenario son texto plano KEY=VALUE (mismo formato que un
.env), leídos con python-dotenv. Listas separadas por comas y matrices con
filas separadas por ';':

    scenario=hilbert-interpolation
    dim=4
    eigenvalues=1,0.5,0.25,0.125
    transition=0.7,0.3;0.6,0.4
"""
from copy import deepcopy
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from app.config import settings
from app.errors import ConfigError

ScenarioName = Literal["scalar-wz", "hilbert-interpolation", "mollified-noise", "markov-driver"]
FieldName = Literal["linear", "sine", "constant", "linear-operator", "extended-state"]

INTERPOLATION_SCENARIOS = ("scalar-wz", "hilbert-interpolation")
MIN_STATISTICAL_REPLICATES = 100


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: ScenarioName
    description: str = ""

    # ======================
    # Mallas y Monte Carlo
    # ======================
    dim: int = Field(default_factory=lambda: settings.default_dim, ge=1)
    horizon: float = Field(1.0, gt=0)
    n_grid: List[int] = Field(default_factory=lambda: settings.default_n_grid_list, min_length=1)
    refine: int = Field(default_factory=lambda: settings.default_refine, ge=1)
    substeps: int = Field(default_factory=lambda: settings.default_substeps, ge=1)
    replicates: int = Field(default_factory=lambda: settings.default_replicates, ge=1)
    seed: int = Field(0, ge=0)

    # ======================
    # Campo de coeficientes
    # ======================
    field: FieldName = "linear"
    field_scale: float = 1.0
    drift: float = 0.0
    time_coupling: float = 0.0
    x0: float = 1.0

    # ======================
    # Drivers
    # ======================
    eigenvalues: Optional[List[float]] = None
    deterministic: bool = False
    direction: Optional[List[float]] = None
    kernel: Literal["gaussian", "separable", "zero"] = "gaussian"
    kernel_width: float = Field(0.2, gt=0)
    space_points: int = Field(16, ge=1)
    space_dim: int = Field(1, ge=1)
    transition: Optional[List[List[float]]] = None
    operator_diag: Optional[List[float]] = None

    # ======================
    # Referencia, aceptación y salida
    # ======================
    reference: Literal["limit", "split"] = "limit"
    reduction_target: float = Field(1.0 / 3.0, gt=0, le=1)
    strict: bool = True
    output_dir: Optional[str] = None

    @field_validator("n_grid", "eigenvalues", "direction", "operator_diag", mode="before")
    @classmethod
    def _split_list(cls, value: Any):
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        return value

    @field_validator("transition", mode="before")
    @classmethod
    def _split_matrix(cls, value: Any):
        if isinstance(value, str):
            return [[item.strip() for item in row.split(",") if item.strip()] for row in value.split(";") if row.strip()]
        return value

    @field_validator("n_grid")
    @classmethod
    def _increasing(cls, value: List[int]):
        if any(n < 1 for n in value):
            raise ValueError("los niveles n deben ser positivos")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("la malla de niveles n debe ser estrictamente creciente")
        return value

    @field_validator("eigenvalues")
    @classmethod
    def _non_negative(cls, value: Optional[List[float]]):
        if value is not None and any(v < 0 for v in value):
            raise ValueError("los autovalores de Q deben ser ≥ 0")
        return value

    # ======================
    # Comprobaciones cruzadas
    # ======================
    def cross_check(self) -> List[Tuple[str, str]]:
        errors: List[Tuple[str, str]] = []
        if self.strict and self.replicates < MIN_STATISTICAL_REPLICATES:
            errors.append(("replicates", f"se requieren ≥ {MIN_STATISTICAL_REPLICATES} réplicas con strict=true"))
        for n in self.n_grid:
            cells = n * self.horizon
            if abs(cells - round(cells)) > 1e-9:
                errors.append(("n_grid", f"n·T debe ser entero (n={n}, T={self.horizon})"))
        if self.eigenvalues is not None and len(self.eigenvalues) != self.dim:
            errors.append(("eigenvalues", f"se esperaban {self.dim} autovalores, hay {len(self.eigenvalues)}"))
        if self.direction is not None and len(self.direction) != self.dim:
            errors.append(("direction", f"se esperaban {self.dim} coordenadas, hay {len(self.direction)}"))
        if self.deterministic and self.scenario not in INTERPOLATION_SCENARIOS:
            errors.append(("deterministic", "solo aplica a escenarios de interpolación"))
        if self.field == "extended-state" and self.scenario != "hilbert-interpolation":
            errors.append(("field", "el campo extended-state solo se define sobre hilbert-interpolation"))

        if self.scenario == "mollified-noise":
            m = self.space_points ** self.space_dim
            if self.dim != m:
                errors.append(("dim", f"en mollified-noise dim = space_points^space_dim = {m}"))
            if max(self.n_grid) > self.space_points:
                errors.append(("space_points", f"la malla espacial no resuelve 1/n para n={max(self.n_grid)}"))
            if self.refine < 4:
                errors.append(("refine", "el molificador temporal requiere refine ≥ 4 (dt ≤ 1/(4n))"))

        if self.scenario == "markov-driver":
            if not self.transition:
                errors.append(("transition", "se requiere la matriz de transición"))
            else:
                size = len(self.transition)
                if any(len(row) != size for row in self.transition):
                    errors.append(("transition", "la matriz de transición debe ser cuadrada"))
                elif any(v < 0 for row in self.transition for v in row) or any(
                    abs(sum(row) - 1.0) > 1e-10 for row in self.transition
                ):
                    errors.append(("transition", "las filas deben ser distribuciones de probabilidad"))
                elif self.dim != size:
                    errors.append(("dim", f"en markov-driver dim = número de estados = {size}"))
            if self.operator_diag is not None and len(self.operator_diag) != self.dim:
                errors.append(("operator_diag", f"se esperaban {self.dim} entradas"))
        return errors

    @property
    def eigenvalue_list(self) -> List[float]:
        if self.eigenvalues is not None:
            return list(self.eigenvalues)
        return [2.0 ** -j for j in range(self.dim)]

    @property
    def output_path(self) -> Path:
        base = Path(self.output_dir) if self.output_dir else settings.output_path / self.scenario
        return base.resolve()


# =====================================================
# Escenarios integrados
# =====================================================

BUILTIN_SCENARIOS: Dict[str, Dict[str, Any]] = {
    "scalar-wz": {
        "scenario": "scalar-wz",
        "description": "Wong–Zakai escalar: dX = X∘dW, corrección ½σσ′",
        "dim": 1,
        "eigenvalues": [1.0],
        "field": "linear",
        "x0": 1.0,
    },
    "hilbert-interpolation": {
        "scenario": "hilbert-interpolation",
        "description": "Interpolación lineal de un Q-Wiener: H_n → −Q/2, K_n → −Q",
        "dim": 4,
        "eigenvalues": [1.0, 0.5, 0.25, 0.125],
        "field": "sine",
        "x0": 0.5,
    },
    "mollified-noise": {
        "scenario": "mollified-noise",
        "description": "Ruido blanco espacio-temporal molificado en [0,1]",
        "dim": 16,
        "space_points": 16,
        "n_grid": [4, 8, 16],
        "kernel": "gaussian",
        "field": "sine",
        "field_scale": 0.5,
        "x0": 0.5,
    },
    "markov-driver": {
        "scenario": "markov-driver",
        "description": "Driver de cadena de Markov de 2 estados (TCL para martingalas)",
        "dim": 2,
        "transition": [[0.7, 0.3], [0.6, 0.4]],
        "n_grid": [16, 32, 64, 128],
        "refine": 1,
        "field": "sine",
        "x0": 0.5,
    },
}


def builtin_defaults(name: str) -> Dict[str, Any]:
    if name not in BUILTIN_SCENARIOS:
        raise ConfigError([("scenario", f"escenario desconocido '{name}' (opciones: {', '.join(BUILTIN_SCENARIOS)})")])
    return deepcopy(BUILTIN_SCENARIOS[name])


def build_config(values: Dict[str, Any]) -> ScenarioConfig:
    """Valida un diccionario (claves sin distinguir mayúsculas) sobre los valores del escenario integrado."""
    values = {str(k).strip().lower(): v for k, v in values.items() if v is not None and v != ""}
    name = values.get("scenario")
    if not name:
        raise ConfigError([("scenario", "campo requerido")])
    merged = builtin_defaults(str(name))
    if "dim" in values:
        # la truncación cambia: los autovalores por defecto pasan a ser 2^{-j}
        for key in ("eigenvalues", "direction"):
            if key not in values:
                merged.pop(key, None)
    merged.update(values)
    try:
        config = ScenarioConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(
            [(".".join(str(p) for p in err["loc"]) or "config", err["msg"]) for err in e.errors()]
        ) from e
    errors = config.cross_check()
    if errors:
        raise ConfigError(errors)
    return config


def load_config(path: Path, overrides: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError([("config", f"no existe el fichero {path}")])
    values: Dict[str, Any] = dict(dotenv_values(path))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return build_config(values)
