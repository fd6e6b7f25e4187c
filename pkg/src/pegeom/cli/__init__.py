"""Scenario files, builtin scenarios and the report-writing runner."""
from .builtins import BUILTIN_NAMES, BUILTIN_TEXT, builtin
from .config import CHECKS, STAGES, ScenarioConfig, load_scenario, parse_scenario
from .runner import DEFAULT_TOL, emit_report, render, run_scenario

__all__ = ["BUILTIN_NAMES", "BUILTIN_TEXT", "CHECKS", "DEFAULT_TOL", "STAGES", "ScenarioConfig", "builtin",
           "emit_report", "load_scenario", "parse_scenario", "render", "run_scenario"]
