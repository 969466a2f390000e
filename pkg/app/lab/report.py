# app/lab/report.py
"""
Reporte de convergencia y artefactos:

    <out>/errors.csv    n, mean_sup_error, stderr, rate_cum, aborted
    <out>/report.json   reporte completo
    <out>/tensors.json  medias tensoriales (row-major) con sus errores estándar
"""
import json
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, Field

from app.lab.stats import RateEstimate, UTRow

CSV_COLUMNS = ["n", "mean_sup_error", "stderr", "rate_cum", "aborted"]
FLOAT_FORMAT = "%.12e"


class TensorEstimate(BaseModel):
    shape: List[int]
    mean: List[float]
    stderr: List[float]

    @classmethod
    def from_arrays(cls, mean: np.ndarray, stderr: np.ndarray) -> "TensorEstimate":
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        stderr = np.atleast_1d(np.asarray(stderr, dtype=float))
        return cls(shape=list(mean.shape), mean=mean.reshape(-1).tolist(), stderr=stderr.reshape(-1).tolist())

    def array(self) -> np.ndarray:
        return np.asarray(self.mean).reshape(self.shape)

    def errors(self) -> np.ndarray:
        return np.asarray(self.stderr).reshape(self.shape)


class LevelSummary(BaseModel):
    n: int
    mean_sup_error: Optional[float]
    stderr: Optional[float]
    aborted: int
    completed: int
    rate_cum: Optional[float] = None
    ks_statistic: Optional[float] = None
    ks_pvalue: Optional[float] = None
    tensors: Dict[str, TensorEstimate] = Field(default_factory=dict)
    extras: Dict[str, float] = Field(default_factory=dict)


class CheckResult(BaseModel):
    name: str
    passed: bool
    blocking: bool = True
    observed: Any = None
    target: Any = None
    detail: str = ""


class ConvergenceReport(BaseModel):
    scenario: str
    config: Dict[str, Any]
    levels: List[LevelSummary]
    rate: Optional[RateEstimate] = None
    ut_table: List[UTRow] = Field(default_factory=list)
    limits: Dict[str, List[float]] = Field(default_factory=dict)
    checks: List[CheckResult] = Field(default_factory=list)
    flags: List[str] = Field(default_factory=list)

    @property
    def failed_checks(self) -> List[CheckResult]:
        return [c for c in self.checks if c.blocking and not c.passed]

    @property
    def passed(self) -> bool:
        return not self.failed_checks

    def level(self, n: int) -> LevelSummary:
        return next(level for level in self.levels if level.n == n)


def round_floats(value: Any) -> Any:
    if isinstance(value, float):
        return float(f"{value:.12e}") if np.isfinite(value) else None
    if isinstance(value, dict):
        return {k: round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_floats(v) for v in value]
    return value


def errors_frame(report: ConvergenceReport) -> pd.DataFrame:
    rows = [
        {
            "n": level.n,
            "mean_sup_error": level.mean_sup_error,
            "stderr": level.stderr,
            "rate_cum": level.rate_cum,
            "aborted": level.aborted,
        }
        for level in report.levels
    ]
    frame = pd.DataFrame(rows, columns=CSV_COLUMNS)
    return frame.astype({"n": int, "aborted": int, "mean_sup_error": float, "stderr": float, "rate_cum": float})


def tensors_payload(report: ConvergenceReport) -> Dict[str, Any]:
    return {
        "scenario": report.scenario,
        "layout": "row-major",
        "levels": [
            {"n": level.n, **{name: est.model_dump() for name, est in level.tensors.items()}}
            for level in report.levels
        ],
        "limits": report.limits,
    }


def write_report(report: ConvergenceReport, out_dir: Path) -> Dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "errors": out_dir / "errors.csv",
        "report": out_dir / "report.json",
        "tensors": out_dir / "tensors.json",
    }

    errors_frame(report).to_csv(paths["errors"], index=False, float_format=FLOAT_FORMAT)
    paths["report"].write_text(
        json.dumps(round_floats(report.model_dump(mode="json")), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    paths["tensors"].write_text(
        json.dumps(round_floats(tensors_payload(report)), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    for name, path in paths.items():
        logger.info("📄 {} escrito en {}", name, path)
    return paths
