# app/cli.py
"""
Línea de comandos `wz`.

    wz run --config <fichero> [--seed N] [--out DIR] [--dim D]
    wz run --scenario <nombre> [...]
    wz list
    wz verify [--seeds N]

Códigos de salida: 0 éxito, 1 configuración inválida (incluidos los errores
de uso de la línea de comandos), 2 criterio de aceptación fallido, 3 error
interno.
"""
import json
import sys
import traceback
from pathlib import Path
from typing import Optional

import click
import typer
from loguru import logger
from typer.core import TyperGroup

from app.config import settings
from app.errors import ConfigError, ScenarioFailure
from app.lab.registry import scenario_registry
from app.lab.runner import run_scenario
from app.lab.scenarios import load_config
from app.lab.verify import run_identity_suite, summary

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SCENARIO = 2
EXIT_INTERNAL = 3


class WZGroup(TyperGroup):
    """Los errores de uso de click salen con el código de configuración (1) en lugar de 2."""

    def main(self, *args, standalone_mode: bool = True, **kwargs):
        if not standalone_mode:
            return super().main(*args, standalone_mode=False, **kwargs)
        try:
            code = super().main(*args, standalone_mode=False, **kwargs)
        except click.UsageError as e:
            e.show()
            sys.exit(EXIT_CONFIG)
        except click.ClickException as e:
            e.show()
            sys.exit(e.exit_code)
        except click.Abort:
            click.echo("Abortado", err=True)
            sys.exit(EXIT_CONFIG)
        sys.exit(code if isinstance(code, int) else EXIT_OK)


cli = typer.Typer(name="wz", help="Laboratorio de convergencia de Wong–Zakai", add_completion=False, cls=WZGroup)


def _configure_logging(verbose: bool):
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else settings.log_level)


def _fail(code: int, message: str):
    logger.error("❌ {}", message)
    raise typer.Exit(code)


# ======================
# Comandos
# ======================

@cli.command()
def run(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Fichero KEY=VALUE del escenario"),
    scenario: Optional[str] = typer.Option(None, "--scenario", "-s", help="Escenario registrado (ver `wz list`)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Semilla maestra"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Directorio de salida"),
    dim: Optional[int] = typer.Option(None, "--dim", help="Dimensión de truncación d"),
    replicates: Optional[int] = typer.Option(None, "--replicates", "-r", help="Número de réplicas"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Workers de joblib (-1 = todos)"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Logs en nivel DEBUG"),
):
    """Ejecuta un escenario y escribe report.json, errors.csv y tensors.json."""
    _configure_logging(verbose)
    if (config is None) == (scenario is None):
        _fail(EXIT_CONFIG, "indica exactamente uno de --config o --scenario")

    overrides = {
        "seed": seed,
        "output_dir": str(out) if out is not None else None,
        "dim": dim,
        "replicates": replicates,
    }
    try:
        if config is not None:
            scenario_config = load_config(config, overrides)
        else:
            scenario_registry.load_all()
            scenario_config = scenario_registry.resolve(scenario, overrides)
        report = run_scenario(scenario_config, workers=workers)
    except ConfigError as e:
        _fail(EXIT_CONFIG, str(e))
    except ScenarioFailure as e:
        _fail(EXIT_SCENARIO, f"escenario fallido: {e}")
    except Exception as e:
        logger.debug(traceback.format_exc())
        _fail(EXIT_INTERNAL, f"error interno: {type(e).__name__}: {e}")

    typer.echo(f"📄 Resultados en {scenario_config.output_path}")
    if report.rate is not None:
        typer.echo(f"📊 Pendiente log-log: {report.rate.slope:.3f} ± {report.rate.stderr:.3f}")
    if report.flags:
        typer.echo(f"⚠️  Flags: {', '.join(report.flags)}")


@cli.command("list")
def list_scenarios(
    as_json: bool = typer.Option(False, "--json", help="Salida JSON con la configuración completa"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Lista los escenarios integrados y los del directorio de escenarios."""
    _configure_logging(verbose)
    scenario_registry.load_all()
    entries = scenario_registry.describe()
    if as_json:
        typer.echo(json.dumps(entries, indent=2, ensure_ascii=False))
        return
    for entry in entries:
        cfg = entry["config"]
        typer.echo(
            f"{entry['name']:<24} d={cfg['dim']:<3} n={cfg['n_grid']} campo={cfg['field']:<16} {entry['description']}"
        )


@cli.command()
def verify(
    seeds: Optional[int] = typer.Option(None, "--seeds", help="Semillas aleatorias por identidad"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Ejecuta la suite de identidades exactas (sin Monte Carlo)."""
    _configure_logging(verbose)
    try:
        results = run_identity_suite(seeds)
    except Exception as e:
        logger.debug(traceback.format_exc())
        _fail(EXIT_INTERNAL, f"error interno: {type(e).__name__}: {e}")

    for result in results:
        mark = "✅" if result.passed else "❌"
        typer.echo(f"{mark} {result.name:<28} {result.max_residual:.3e}")
    passed, total = summary(results)
    if passed < total:
        _fail(EXIT_SCENARIO, f"{total - passed}/{total} identidades fallidas")


def main():
    cli()


if __name__ == "__main__":
    main()
