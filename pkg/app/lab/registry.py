# app/lab/registry.py
from pathlib import Path
from typing import Any, Dict, List, Optional

from loguru import logger

from app.config import settings
from app.errors import ConfigError
from app.lab.scenarios import BUILTIN_SCENARIOS, ScenarioConfig, build_config, load_config


class ScenarioRegistry:
    """
    Catálogo de escenarios disponibles: los integrados más los ficheros
    KEY=VALUE del directorio de escenarios de usuario.
    Cada escenario se valida de forma independiente; uno inválido se
    registra como error y no impide cargar el resto.
    """

    def __init__(self):
        self.scenarios: Dict[str, ScenarioConfig] = {}
        self.sources: Dict[str, str] = {}
        self.failed: Dict[str, str] = {}

    @property
    def scenarios_loaded(self) -> int:
        return len(self.scenarios)

    def load_builtin(self):
        """Valida los escenarios integrados con sus valores por defecto."""
        for name, values in BUILTIN_SCENARIOS.items():
            try:
                self.scenarios[name] = build_config(dict(values))
                self.sources[name] = "builtin"
                logger.debug("✅ Escenario integrado '{}' registrado", name)
            except ConfigError as e:
                self.failed[name] = str(e)
                logger.error("❌ Escenario integrado '{}' inválido: {}", name, e)

    def load_directory(self, directory: Path):
        """Registra cada fichero *.env del directorio bajo el nombre del fichero."""
        if not directory.is_dir():
            logger.debug("Directorio de escenarios {} no encontrado", directory)
            return
        for path in sorted(directory.glob("*.env")):
            name = path.stem
            try:
                self.scenarios[name] = load_config(path)
                self.sources[name] = str(path)
                logger.info("📄 Escenario '{}' cargado desde {}", name, path)
            except ConfigError as e:
                self.failed[name] = str(e)
                logger.error("❌ Escenario '{}' inválido ({}): {}", name, path.name, e)
            except Exception as e:
                self.failed[name] = f"{type(e).__name__}: {e}"
                logger.error("❌ Error leyendo {}: {}: {}", path, type(e).__name__, e)

    def load_all(self, directory: Optional[Path] = None):
        logger.info("🚀 Cargando catálogo de escenarios...")
        self.scenarios.clear()
        self.sources.clear()
        self.failed.clear()

        self.load_builtin()
        self.load_directory(directory or settings.scenarios_path)

        if self.failed:
            logger.warning(
                "⚠️  Se cargaron {}/{} escenarios", self.scenarios_loaded, self.scenarios_loaded + len(self.failed)
            )
        else:
            logger.success("🎉 {} escenarios disponibles", self.scenarios_loaded)

    def get(self, name: str) -> ScenarioConfig:
        if not self.scenarios:
            self.load_all()
        if name not in self.scenarios:
            raise ConfigError([("scenario", f"escenario desconocido '{name}' (opciones: {', '.join(self.names())})")])
        return self.scenarios[name]

    def resolve(self, name: str, overrides: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
        """Configuración del escenario con overrides (seed, dim, replicates...) revalidada."""
        self.get(name)
        overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        source = self.sources[name]
        if source == "builtin":
            return build_config({"scenario": name, **overrides})
        return load_config(Path(source), overrides)

    def names(self) -> List[str]:
        return list(self.scenarios)

    def describe(self) -> List[Dict[str, object]]:
        """Resumen serializable (mismo contenido que `wz list` y GET /scenarios/)."""
        return [
            {
                "name": name,
                "source": self.sources[name],
                "description": config.description,
                "config": config.model_dump(mode="json"),
            }
            for name, config in self.scenarios.items()
        ]


# Instancia singleton
scenario_registry = ScenarioRegistry()
