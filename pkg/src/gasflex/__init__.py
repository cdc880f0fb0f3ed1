"""Integrated power and gas day-ahead scheduling with fixed or optimized gas flow directions."""

__version__ = "0.1.0"

from .network import IntegratedSystem, load_system, load_system_file, validate_system
from .formulation import FormulationConfig, build_model
from .solver import ScheduleSolution, SolveOptions, extract_schedule, solve

__all__ = [
    "FormulationConfig",
    "IntegratedSystem",
    "ScheduleSolution",
    "SolveOptions",
    "build_model",
    "extract_schedule",
    "load_system",
    "load_system_file",
    "solve",
    "validate_system",
]
