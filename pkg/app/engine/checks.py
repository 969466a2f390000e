# app/engine/checks.py
from dataclasses import dataclass
from typing import Optional

import numpy as np
from loguru import logger

from app.engine.fields import CoefficientField

DERIVATIVE_TOL = 1e-4


@dataclass(frozen=True)
class DerivativeReport:
    first_deviation: float
    second_deviation: Optional[float]
    bound_violation: float
    richardson: bool
    passed: bool


def _relative(numeric: np.ndarray, analytic: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(analytic), initial=0.0)), 1.0)
    return float(np.max(np.abs(numeric - analytic), initial=0.0)) / scale


def _directions(field: CoefficientField, probes: np.ndarray):
    if field.is_scalar:
        return [np.ones_like(probes)]
    basis = np.eye(field.state_dim)
    return [np.broadcast_to(basis[k], probes.shape) for k in range(field.state_dim)]


def _first(field: CoefficientField, x: np.ndarray, h: float) -> np.ndarray:
    dirs = _directions(field, x)
    diffs = [(field.f(x + h * e) - field.f(x - h * e)) / (2 * h) for e in dirs]
    return diffs[0] if field.is_scalar else np.stack(diffs, axis=1)


def _second(field: CoefficientField, x: np.ndarray, h: float) -> np.ndarray:
    if field.is_scalar:
        return (field.f(x + h) - 2 * field.f(x) + field.f(x - h)) / h ** 2
    dirs = _directions(field, x)
    K = field.state_dim
    out = np.empty((x.shape[0], K, K) + field.f(x).shape[1:])
    for k in range(K):
        for l in range(K):
            ek, el = h * dirs[k], h * dirs[l]
            out[:, k, l] = (
                field.f(x + ek + el) - field.f(x + ek - el) - field.f(x - ek + el) + field.f(x - ek - el)
            ) / (4 * h ** 2)
    return out


def _with_richardson(estimate, field, x, h, analytic, tol):
    coarse = estimate(field, x, h)
    deviation = _relative(coarse, analytic)
    if deviation <= tol:
        return deviation, False
    fine = estimate(field, x, h / 2)
    extrapolated = (4 * fine - coarse) / 3
    return _relative(extrapolated, analytic), True


def check_derivatives(field: CoefficientField, probes, h: float = 1e-4, tol: float = DERIVATIVE_TOL) -> DerivativeReport:
    """
    Compara Df con diferencias centrales de f y D²f con segundas diferencias,
    con paso h·escala y extrapolación de Richardson si la primera
    estimación no alcanza la tolerancia.
    """
    if not h > 0:
        raise ValueError("h debe ser positivo")
    x = np.asarray(probes, dtype=float)
    if not field.is_scalar:
        x = x.reshape(-1, field.state_dim)
    else:
        x = x.reshape(-1)
    step = h * max(1.0, float(np.max(np.abs(x), initial=0.0)))

    first, rich_first = _with_richardson(_first, field, x, step, field.df(x), tol)
    second, rich_second = None, False
    if field.d2f is not None:
        second, rich_second = _with_richardson(_second, field, x, step, field.d2f(x), tol)

    bound_violation = 0.0
    if field.bound is not None:
        F = field.f(x).reshape(x.shape[0], -1)
        bound_violation = max(0.0, float(np.max(np.linalg.norm(F, axis=1))) - field.bound)

    passed = first <= tol and (second is None or second <= tol) and bound_violation <= 1e-12 * max(1.0, field.bound or 0.0)
    report = DerivativeReport(first, second, bound_violation, rich_first or rich_second, passed)
    if passed:
        logger.debug("✅ Derivadas de '{}' verificadas: {}", field.name, report)
    else:
        logger.warning("⚠️ Derivadas de '{}' no coinciden con diferencias finitas: {}", field.name, report)
    return report
