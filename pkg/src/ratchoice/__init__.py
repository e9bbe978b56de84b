"""Utility ranking, learned risk models and optimizer-driven feedback control."""

from .utility import (
    Alternative,
    Preference,
    check_completeness,
    check_transitivity,
    classify_preference,
    inverse_cost_utility,
    opportunity_cost,
    rank_alternatives,
    select_best,
)
from .expectations import (
    ExpectationModel,
    LabeledDataset,
    TrainConfig,
    adaptive_forecast,
    forward,
    grad_check,
    init_model,
    train,
)
from .optimizers import (
    AnnealingSchedule,
    Bounds,
    GAConfig,
    OptimResult,
    PSOConfig,
    genetic_algorithm,
    golden_section,
    particle_swarm,
    simulated_annealing,
)
from .conflict_data import Dyad, NormParams, SynthConfig, lag_panel, load_csv, normalize, synth_generate
from .control import (
    ControlStrategy,
    avoidance_report,
    control_multiple,
    control_single,
    risk,
)

__version__ = "0.1.0"
