# app/factory.py
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from loguru import logger
from slowapi import _rate_limit_exceeded_handler
from slowapi.errors import RateLimitExceeded

from app.auth.rate_limit import limiter
from app.config import settings
from app.lab.registry import scenario_registry
from app.routers import scenarios


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Ciclo de vida de la aplicación: el catálogo de escenarios se carga al
    arrancar, igual que lo hace `wz list`.
    """
    # === STARTUP ===
    logger.info("🚀 Iniciando Wong–Zakai Lab v{}", settings.api_version)

    try:
        scenario_registry.load_all()
    except Exception as e:
        logger.error(f"❌ Error crítico al cargar escenarios: {e}")
        logger.warning("⚠️  La API funcionará sin catálogo de escenarios")
        import traceback
        logger.debug(traceback.format_exc())

    logger.info("✅ Wong–Zakai Lab iniciado correctamente")

    yield

    # === SHUTDOWN ===
    logger.info("👋 Deteniendo Wong–Zakai Lab")


def create_app() -> FastAPI:
    """
    Factory principal para crear la aplicación FastAPI.

    Returns:
        FastAPI: Instancia completamente configurada de la aplicación
    """
    app = FastAPI(
        title="Wong–Zakai Lab",
        description="Simulación de aproximaciones de Wong–Zakai y estudios de convergencia Monte Carlo",
        version=settings.api_version,
        lifespan=lifespan,
    )

    _configure_middlewares(app)
    _configure_rate_limiting(app)
    _configure_routes(app)

    logger.info("✅ Aplicación FastAPI creada exitosamente")
    return app


# =====================================================
# Configuration blocks
# =====================================================

def _configure_middlewares(app: FastAPI):
    """Configura middlewares de la aplicación."""
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"] if settings.debug else [],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )
    logger.info("✅ Middleware CORS configurado")


def _configure_rate_limiting(app: FastAPI):
    """Configura rate limiting con SlowAPI."""
    app.state.limiter = limiter
    app.add_exception_handler(RateLimitExceeded, _rate_limit_exceeded_handler)
    logger.info("✅ Rate limiting configurado")


def _configure_routes(app: FastAPI):
    """Registra los routers y los endpoints básicos."""
    routers = [
        ("scenarios", scenarios.router),
    ]

    routers_loaded = 0
    for name, router in routers:
        try:
            app.include_router(router)
            routers_loaded += 1
            logger.info(f"✅ Router '{name}' cargado")
        except Exception as e:
            logger.error(f"❌ Error cargando router '{name}': {e}")

    logger.info(f"✅ {routers_loaded}/{len(routers)} routers cargados exitosamente")

    @app.get("/", include_in_schema=False)
    async def root():
        """Endpoint raíz con información básica."""
        return {
            "message": "Wong–Zakai Lab",
            "version": settings.api_version,
            "docs": "/docs",
            "health": "/health",
            "status": "running",
        }

    @app.get("/health", include_in_schema=False)
    async def health():
        """Health check con el estado del catálogo de escenarios."""
        return {
            "status": "healthy",
            "version": settings.api_version,
            "scenarios_loaded": scenario_registry.scenarios_loaded,
            "scenarios_failed": sorted(scenario_registry.failed),
        }
