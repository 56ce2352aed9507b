"""First-exit-time simulation for SDEs driven by Brownian plus heavy-tailed noise.

The package simulates one-dimensional gradient SDEs perturbed by a small
mixed Gaussian / symmetric heavy-tailed forcing, and measures first-exit
times from neighbourhoods of a stable equilibrium. In the heavy-tailed
regime exits are triggered by single large jumps and the rescaled exit time
is asymptotically exponential; in the pure Gaussian regime escapes are
exponentially slow in the noise intensity. Both predictions are available
in closed form next to the simulation machinery, so experiments can report
measured-versus-predicted ratios directly.

Modules
-------
noise
    Stable and Gaussian increment sampling, reproducible stream seeding.
split
    Large/small decomposition of the heavy-tailed noise at a threshold.
potential
    Confining potentials, exit domains, deterministic flow utilities.
engine
    Path integrators (Euler and jump-adapted) and ensemble drivers.
lab
    Closed-form exit laws, statistics, experiment configs, sweeps.
cli
    Config-file driven command line front end.
"""

__version__ = "1.0.0"

from .engine import (
    ExitRecord,
    PathParams,
    PathSample,
    TubeEstimate,
    gamma_default,
    run_ensemble,
    simulate_exit_euler,
    simulate_exit_jump_adapted,
    simulate_linearization,
    tube_deviation_prob,
)
from .lab import (
    ExperimentConfig,
    ExperimentResult,
    StatsSummary,
    SweepResult,
    SweepRow,
    TheoryPrediction,
    kramers_mean_exit,
    kramers_prediction,
    ks_exponential,
    run_experiment,
    stable_exit_law,
    summarize,
    survival_sandwich,
    sweep,
    theta,
)
from .noise import (
    RngStream,
    StableNoiseSpec,
    characteristic_exponent,
    draw_standard_stable,
    sample_gaussian_increment,
    sample_stable_increment,
    stable_scale_constant,
)
from .potential import (
    ExitDomain,
    PotentialSpec,
    ValidationReport,
    flow,
    harmonic_quartic,
    quadratic,
    relaxation_time,
    validate_potential,
)
from .split import (
    ArrivalSchedule,
    FeasibilityResult,
    LargeJump,
    SplitCheckReport,
    SplitSpec,
    big_jump_exit_prob,
    intensity_beta,
    large_jump_magnitude,
    mid_jump_intensity,
    rho_gamma_feasible,
    sample_arrival_times,
    sample_large_jump,
    small_jump_cutoff_default,
    small_jump_increment,
    small_jump_variance,
    split_characteristic_check,
    substitution_variance,
)

__all__ = [
    "__version__",
    "ArrivalSchedule",
    "ExitDomain",
    "ExitRecord",
    "ExperimentConfig",
    "ExperimentResult",
    "FeasibilityResult",
    "LargeJump",
    "PathParams",
    "PathSample",
    "PotentialSpec",
    "RngStream",
    "SplitCheckReport",
    "SplitSpec",
    "StableNoiseSpec",
    "StatsSummary",
    "SweepResult",
    "SweepRow",
    "TheoryPrediction",
    "TubeEstimate",
    "ValidationReport",
    "big_jump_exit_prob",
    "characteristic_exponent",
    "draw_standard_stable",
    "flow",
    "gamma_default",
    "harmonic_quartic",
    "intensity_beta",
    "kramers_mean_exit",
    "kramers_prediction",
    "ks_exponential",
    "large_jump_magnitude",
    "mid_jump_intensity",
    "quadratic",
    "relaxation_time",
    "rho_gamma_feasible",
    "run_ensemble",
    "run_experiment",
    "sample_arrival_times",
    "sample_gaussian_increment",
    "sample_large_jump",
    "sample_stable_increment",
    "simulate_exit_euler",
    "simulate_exit_jump_adapted",
    "simulate_linearization",
    "small_jump_cutoff_default",
    "small_jump_increment",
    "small_jump_variance",
    "split_characteristic_check",
    "stable_exit_law",
    "stable_scale_constant",
    "substitution_variance",
    "summarize",
    "survival_sandwich",
    "sweep",
    "theta",
    "tube_deviation_prob",
    "validate_potential",
]
