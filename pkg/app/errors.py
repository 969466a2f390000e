# app/errors.py
from typing import List, Optional, Tuple


class WZError(Exception):
    """Error base de la librería de simulación."""


class DimensionMismatchError(WZError):
    """Vectores o tensores con truncaciones distintas."""

    def __init__(self, expected: int, got: int, what: str = "dimensión"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what} incompatible: se esperaba {expected}, se recibió {got}")


class NonFiniteError(WZError):
    """Entradas no finitas (NaN/inf) en un tensor."""


class GridMismatchError(WZError):
    """Trayectorias definidas sobre mallas temporales distintas."""


class GridMisalignmentError(WZError):
    """La malla fina no contiene los nodos requeridos o no resuelve el molificador."""


class SpecError(WZError):
    """Especificación de driver inválida (autovalores negativos, P no estocástica...)."""


class DegenerateDataError(WZError):
    """Datos insuficientes o no positivos para un ajuste estadístico."""


class BlowUpError(WZError):
    """El estado del solver dejó de ser finito o superó el umbral de explosión."""

    def __init__(self, step: int, norm: float):
        self.step = step
        self.norm = norm
        super().__init__(f"explosión en el paso {step}: ‖X‖ = {norm:.3e}")


class ConfigError(WZError):
    """Configuración de escenario inválida, con mensajes por campo."""

    def __init__(self, errors: List[Tuple[str, str]]):
        self.errors = errors
        lines = [f"{field}: {message}" for field, message in errors]
        super().__init__("configuración inválida:\n  " + "\n  ".join(lines))


class ScenarioFailure(WZError):
    """Un criterio de aceptación del escenario no se cumplió."""

    def __init__(self, message: str, report: Optional[object] = None):
        self.report = report
        super().__init__(message)
