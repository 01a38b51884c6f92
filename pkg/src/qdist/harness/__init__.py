from .experiment import (
    ConfigError,
    ExperimentConfig,
    ScalingFit,
    config_from_dict,
    fit_power_law,
    fit_scaling,
    load_config,
    run_experiment,
)
from .render import COLUMNS, read_csv, render, render_svg, write_csv

__all__ = [
    "COLUMNS",
    "ConfigError",
    "ExperimentConfig",
    "ScalingFit",
    "config_from_dict",
    "fit_power_law",
    "fit_scaling",
    "load_config",
    "read_csv",
    "render",
    "render_svg",
    "run_experiment",
    "write_csv",
]
