"""Configuration, experiment drivers and CLI."""

from .config import ConfigError, ExperimentConfig, build_config, load_file
from .experiments import compute, run_experiment

__all__ = ["ConfigError", "ExperimentConfig", "build_config", "compute", "load_file", "run_experiment"]
