# app/lab/__init__.py
from app.lab.registry import ScenarioRegistry, scenario_registry
from app.lab.report import CheckResult, ConvergenceReport, LevelSummary, TensorEstimate, write_report
from app.lab.runner import run_scenario
from app.lab.scenarios import BUILTIN_SCENARIOS, ScenarioConfig, build_config, load_config
from app.lab.stats import estimate_rate, ks_distance, ut_diagnostics
from app.lab.verify import IdentityResult, run_identity_suite

__all__ = [
    "BUILTIN_SCENARIOS",
    "CheckResult",
    "ConvergenceReport",
    "IdentityResult",
    "LevelSummary",
    "ScenarioConfig",
    "ScenarioRegistry",
    "TensorEstimate",
    "build_config",
    "estimate_rate",
    "ks_distance",
    "load_config",
    "run_identity_suite",
    "run_scenario",
    "scenario_registry",
    "ut_diagnostics",
    "write_report",
]
