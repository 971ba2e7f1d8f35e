from .experiments import REGISTRY, run_experiment, summarize
from .presets import parse_body
from .report import ExperimentReport, emit, fit_slope

__all__ = ["REGISTRY", "run_experiment", "summarize", "parse_body", "ExperimentReport", "emit", "fit_slope"]
