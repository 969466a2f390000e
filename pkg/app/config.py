# app/config.py
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field
from typing import List
from pathlib import Path


class Settings(BaseSettings):
    # ======================
    # API Configuration
    # ======================
    environment: str = Field("development")
    api_version: str = Field("v1")
    debug: bool = Field(True)
    log_level: str = Field("INFO")

    # ======================
    # Monte Carlo / paralelismo
    # ======================
    workers: int = Field(1, description="Workers de joblib (-1 = todos los núcleos)")
    batch_size: int = Field(250, ge=1, description="Réplicas por tarea de joblib")
    default_replicates: int = Field(10_000, ge=1)
    default_n_grid: str = Field("8,16,32,64")
    default_dim: int = Field(4, ge=1)
    default_refine: int = Field(8, ge=1)
    default_substeps: int = Field(4, ge=1)

    # ======================
    # Umbrales del solver y de aceptación
    # ======================
    blowup_threshold: float = Field(1e8, gt=0)
    abort_tolerance: float = Field(0.01, ge=0, le=1)
    verify_seeds: int = Field(100, ge=1)

    # ======================
    # Rutas
    # ======================
    output_dir: str = Field("./data/runs")
    scenarios_dir: str = Field("./scenarios", description="Ficheros KEY=VALUE de escenarios de usuario")

    # ======================
    # Server
    # ======================
    rate_limit_run: str = Field("2/minute")
    rate_limit_enabled: bool = Field(True)
    host: str = Field("0.0.0.0")
    port: int = Field(8000)

    # =====================================================
    # 🔹 PATH RESOLUTION
    # =====================================================
    @property
    def output_path(self) -> Path:
        """Ruta ABSOLUTA de salida desde la raíz del proyecto"""
        path = Path(self.output_dir)
        if path.is_absolute():
            return path.resolve()
        project_root = Path(__file__).parent.parent
        return (project_root / path).resolve()

    @property
    def scenarios_path(self) -> Path:
        path = Path(self.scenarios_dir)
        if path.is_absolute():
            return path.resolve()
        return (Path(__file__).parent.parent / path).resolve()

    # ======================
    # Helpers
    # ======================
    @property
    def default_n_grid_list(self) -> List[int]:
        return [int(k.strip()) for k in self.default_n_grid.split(",") if k.strip()]

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="WZ_",
        case_sensitive=False,
        extra="ignore",
    )


settings = Settings()
