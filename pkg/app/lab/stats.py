# app/lab/stats.py
"""
Estadística de Monte Carlo: medias ordenadas, errores estándar, cuantiles,
ajuste log-log de la tasa y distancia de Kolmogorov–Smirnov.

Las medias se calculan sobre arrays apilados en orden de réplica, así que
no dependen del número de workers.
"""
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel
from scipy import stats as sps

from app.calculus import SplitPaths, scalar_covariation, total_variation
from app.drivers.paths import SamplePath
from app.errors import DegenerateDataError

UT_QUANTILES = (0.5, 0.9, 0.99)


class RateEstimate(BaseModel):
    slope: float
    stderr: float
    intercept: float
    levels: List[int]


class Quantiles(BaseModel):
    q50: float
    q90: float
    q99: float


class UTRow(BaseModel):
    n: int
    tv_h: Quantiles
    bracket_y: Quantiles
    tv_u: Quantiles


def mean_and_se(samples: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Media y error estándar sobre el eje 0 (réplicas)."""
    samples = np.asarray(samples, dtype=float)
    count = samples.shape[0]
    if count == 0:
        nan = np.full(samples.shape[1:], np.nan)
        return nan, nan
    mean = np.mean(samples, axis=0)
    if count < 2:
        return mean, np.zeros_like(mean)
    return mean, np.std(samples, axis=0, ddof=1) / np.sqrt(count)


def quantiles(samples: np.ndarray) -> Quantiles:
    q = np.quantile(np.asarray(samples, dtype=float), UT_QUANTILES)
    return Quantiles(q50=float(q[0]), q90=float(q[1]), q99=float(q[2]))


def estimate_rate(levels: Sequence[int], errors: Sequence[float]) -> RateEstimate:
    """Pendiente por mínimos cuadrados de log(error) frente a log(1/n)."""
    levels = [int(n) for n in levels]
    errs = np.asarray(errors, dtype=float)
    if len(levels) < 3 or errs.shape[0] != len(levels):
        raise DegenerateDataError(f"se requieren ≥ 3 niveles con error (hay {len(levels)})")
    if not np.all(np.isfinite(errs)) or np.any(errs <= 0):
        raise DegenerateDataError(f"errores no positivos o no finitos: {errs.tolist()}")
    fit = sps.linregress(np.log(1.0 / np.asarray(levels, dtype=float)), np.log(errs))
    return RateEstimate(
        slope=float(fit.slope),
        stderr=float(fit.stderr),
        intercept=float(fit.intercept),
        levels=levels,
    )


def cumulative_rates(levels: Sequence[int], errors: Sequence[float]) -> List[Optional[float]]:
    """Pendiente usando los primeros k niveles (vacía para k < 3 o datos degenerados)."""
    out: List[Optional[float]] = []
    for k in range(1, len(levels) + 1):
        if k < 3:
            out.append(None)
            continue
        try:
            out.append(estimate_rate(levels[:k], errors[:k]).slope)
        except DegenerateDataError:
            out.append(None)
    return out


def ks_distance(sample: np.ndarray, reference: np.ndarray) -> Tuple[float, float]:
    result = sps.ks_2samp(np.asarray(sample, dtype=float), np.asarray(reference, dtype=float))
    return float(result.statistic), float(result.pvalue)


# ======================
# Diagnósticos UT
# ======================

def ut_sample(split: SplitPaths, H: SamplePath, rule: str = "linear") -> Tuple[float, float, float]:
    """(T_T(H_n), [Y_n, Y_n]_T, T_T(U_n)) de una réplica."""
    return (
        float(total_variation(H).terminal),
        float(scalar_covariation(split.Y, split.Y, rule).terminal),
        float(total_variation(split.U).terminal),
    )


def ut_diagnostics(samples: Dict[int, np.ndarray]) -> List[UTRow]:
    """
    samples[n] con forma (R, 3): columnas T_T(H_n), [Y_n,Y_n]_T, T_T(U_n).
    Devuelve cuantiles 50/90/99 % por nivel.
    """
    rows = []
    for n in sorted(samples):
        data = np.asarray(samples[n], dtype=float)
        rows.append(
            UTRow(
                n=n,
                tv_h=quantiles(data[:, 0]),
                bracket_y=quantiles(data[:, 1]),
                tv_u=quantiles(data[:, 2]),
            )
        )
    return rows
