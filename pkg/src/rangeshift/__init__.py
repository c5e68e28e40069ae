"""Reaction-diffusion simulator for single-species range shifts under a
moving climate envelope, in habitats constricted by a narrow corridor."""

from .diagnostics import (
    Outcome,
    Trajectory,
    classify_outcome,
    estimate_front_speed,
    front_position,
    region_population,
    sample_density,
    total_population,
)
from .geometry import (
    DomainGeometry,
    DomainKind,
    DomainSpec,
    Grid,
    build_domain,
    rasterize,
    region_mask,
)
from .model import (
    EnvelopeMode,
    EnvelopeSpec,
    GrowthModel,
    GrowthVariant,
    analytic_spreading_speed,
    in_envelope,
    per_capita_growth,
    reaction_rate,
)
from .solver import (
    BoundaryKind,
    DiffusionOperator,
    ObserverConfig,
    SolverConfig,
    SteadyStateReport,
    apply_laplacian,
    diffusion_step,
    initial_guess,
    persistence_condition,
    reaction_step,
    relax_to_steady_state,
    run,
    step,
)
from .experiments import (
    CorridorExitReport,
    Scenario,
    SteadyStateCache,
    SweepResult,
    SweepSpec,
    apply_parameter,
    corridor_exit_report,
    critical_h,
    r_minus_sensitivity,
    rho_curve,
    run_scenario,
    sweep,
)
from .config import RunConfig, parse_config

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
