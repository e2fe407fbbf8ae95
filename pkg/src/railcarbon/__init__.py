"""Household vehicle CO2 difference-in-differences toolkit for transit evaluations.

Pipeline: load survey CSVs (:mod:`railcarbon.dataio`), screen households
into a balanced two-wave panel (:mod:`railcarbon.panel`), compute vehicle
emissions (:mod:`railcarbon.emissions`), fit the DID model ladder and group
contrasts (:mod:`railcarbon.evaluate`), and account for transit life-cycle
emissions (:mod:`railcarbon.lifecycle`). :mod:`railcarbon.simulate` builds
synthetic surveys with known effects.
"""

__version__ = "0.1.0"

from .config import Radius, RunConfig, load_config, parse_radii, parse_radius
from .dataio import load_factor_tables, load_stations, load_survey, load_survey_with_report
from .emissions import household_daily_co2, vehicle_emission
from .evaluate import (
    MODEL_LADDER,
    did_design_matrix,
    did_fit,
    group_contrast_table,
    model_ladder,
    sensitivity_sweep,
    within_group_change,
)
from .lifecycle import LifecycleComponents, ModeFactors, load_lifecycle, net_effect_summary, scale_factor
from .panel import BalancedPanel, ExclusionReason, Group, build_balanced_panel, daily_average_vmt, haversine_miles
from .simulate import SimConfig, generate_panel, recovery_experiment
from .stats import ols_fit, paired_t, t_tail_two_sided, two_sample_t
from .validation import validate_dataset

__all__ = [
    "BalancedPanel", "ExclusionReason", "Group", "LifecycleComponents", "MODEL_LADDER", "ModeFactors", "Radius",
    "RunConfig", "SimConfig", "build_balanced_panel", "daily_average_vmt", "did_design_matrix", "did_fit",
    "generate_panel", "group_contrast_table", "haversine_miles", "household_daily_co2", "load_config",
    "load_factor_tables", "load_lifecycle", "load_stations", "load_survey", "load_survey_with_report",
    "model_ladder", "net_effect_summary", "ols_fit", "paired_t", "parse_radii", "parse_radius",
    "recovery_experiment", "scale_factor", "sensitivity_sweep", "t_tail_two_sided", "two_sample_t",
    "validate_dataset", "vehicle_emission", "within_group_change",
]
