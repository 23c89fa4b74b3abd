"""Shrinkage-based model selection for signal estimation under Levy noise."""

from .basis import (
    PeriodicSignal,
    basis_matrix,
    fourier_coeffs,
    l2_norm_sq,
    reference_signal,
    signal_from_name,
    trig_basis,
)
from .noise import (
    ImpulseSource,
    LevyNoiseSpec,
    SamplePath,
    conditional_gram,
    simulate_path,
    stochastic_integral,
)
from .shrinkage import (
    DegenerateHeadError,
    FourierEstimate,
    ShrinkageConfig,
    WeightVector,
    estimate_fourier,
    eval_series,
    improved_estimator,
    shrink_coeffs,
    shrink_threshold,
    weighted_lse,
)
from .selection import (
    GridParams,
    PinskerGrid,
    SelectionOutcome,
    batch_costs,
    cost,
    estimate_sigma,
    grid_conditions_check,
    penalty,
    pinsker_grid,
    select,
    sigma_from_coeffs,
)
from .risk import (
    ExperimentConfig,
    ImprovementReport,
    RiskReport,
    check_improvement,
    check_integral_identities,
    empirical_risk,
    pinsker_constant,
    run_experiment,
)
from .regressor import ShrinkageSeriesRegressor

__version__ = "0.1.0"
