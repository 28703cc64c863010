from .config import ConfigError, ExperimentConfig, load_config, parse_text, validate
from .experiments import REGISTRY, list_experiments
from .runner import RunReport, run

__all__ = ["ConfigError", "ExperimentConfig", "REGISTRY", "RunReport", "list_experiments", "load_config",
           "parse_text", "run", "validate"]
