"""Time integration of the reaction-diffusion model on a masked grid.

Each time step is a Lie splitting: explicit reaction substep, then an
implicit direction-split (Peaceman-Rachford) diffusion substep. With
zero-flux boundaries the diffusion substep conserves total population
to machine precision because it is a direct solve in conservative flux
form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .diagnostics import Trajectory, total_population, region_population
from .errors import InvalidSpecError, PointOutsideDomainError
from .geometry import Grid, region_mask
from .model import EnvelopeSpec, GrowthModel, GrowthVariant, in_envelope

# Population below which a relaxation is declared to have collapsed.
RELAX_ZERO_FLOOR = 1e-6


class BoundaryKind(str, Enum):
    NEUMANN = "neumann"
    ROBIN = "robin"


@dataclass(frozen=True)
class SolverConfig:
    D: float                      # km^2/year
    dt: float = 0.01              # year
    boundary: BoundaryKind = BoundaryKind.NEUMANN
    epsilon: float = 0.0          # 1/km, Robin leak rate
    end_time: float = 30.0        # year

    def validate(self) -> None:
        if self.D <= 0:
            raise InvalidSpecError("D", "must be positive")
        if self.dt <= 0:
            raise InvalidSpecError("dt", "must be positive")
        if self.end_time <= 0:
            raise InvalidSpecError("end_time", "must be positive")
        if self.epsilon < 0:
            raise InvalidSpecError("epsilon", "must be >= 0")
        if self.boundary is BoundaryKind.NEUMANN and self.epsilon != 0.0:
            raise InvalidSpecError(
                "epsilon", "must be 0 with Neumann boundaries"
            )


class DiffusionOperator:
    """One implicit diffusion step bound to a grid and step size."""

    def __init__(self, grid: Grid, D: float, dt: float,
                 boundary: BoundaryKind = BoundaryKind.NEUMANN,
                 epsilon: float = 0.0):
        self.grid = grid
        self.a = D * dt / (2.0 * grid.dx * grid.dx)
        self.g = 0.0
        if boundary is BoundaryKind.ROBIN:
            self.g = self.a * epsilon * grid.dx
        self._buf1 = np.zeros((grid.ny, grid.nx))
        self._buf2 = np.zeros((grid.ny, grid.nx))
        n = max(grid.nx, grid.ny)
        self._cbuf = np.empty(n)
        self._dbuf = np.empty(n)

    def step(self, field: np.ndarray) -> np.ndarray:
        """Advance the diffusion part by one full dt; returns a new array."""
        g = self.grid
        out = np.zeros_like(field)
        _kernels.explicit_cols(field, g.col_runs, self.a, self.g, self._buf1)
        _kernels.implicit_rows(self._buf1, g.row_runs, self.a, self.g,
                               self._buf2, self._cbuf, self._dbuf)
        _kernels.explicit_rows(self._buf2, g.row_runs, self.a, self.g,
                               self._buf1)
        _kernels.implicit_cols(self._buf1, g.col_runs, self.a, self.g,
                               out, self._cbuf, self._dbuf)
        return out


def diffusion_step(grid: Grid, field: np.ndarray, D: float, dt: float,
                   boundary: BoundaryKind = BoundaryKind.NEUMANN,
                   epsilon: float = 0.0) -> np.ndarray:
    """Single implicit diffusion substep (see :class:`DiffusionOperator`)."""
    return DiffusionOperator(grid, D, dt, boundary, epsilon).step(field)


def apply_laplacian(grid: Grid, field: np.ndarray) -> np.ndarray:
    """Discrete five-point Laplacian with zero-flux faces (1/km^2 units)."""
    out = np.zeros_like(field)
    _kernels.masked_laplacian(field, grid.row_runs, grid.col_runs,
                              1.0 / (grid.dx * grid.dx), out)
    return out


def reaction_step(grid: Grid, field: np.ndarray, model: GrowthModel,
                  envelope: EnvelopeSpec, t: float, dt: float
                  ) -> tuple[np.ndarray, float]:
    """Explicit per-cell growth update; returns (field, clamped mass).

    Envelope membership is evaluated at cell centers at time t. Results
    are clamped at zero and the removed (negative) mass is reported in
    individuals.
    """
    inside_row = in_envelope(envelope, t, grid.yc)
    out = np.empty_like(field)
    clamped = _kernels.reaction(
        field, grid.mask, inside_row,
        model.variant is GrowthVariant.LOGISTIC,
        model.r_plus, model.r_minus, model.K, model.rho, dt, out,
    )
    return out, clamped * grid.cell_area


def step(grid: Grid, model: GrowthModel, envelope: EnvelopeSpec,
         config: SolverConfig, field: np.ndarray, t: float,
         operator: DiffusionOperator | None = None
         ) -> tuple[np.ndarray, float]:
    """One Lie-split step from time t: reaction, then diffusion."""
    if operator is None:
        operator = DiffusionOperator(grid, config.D, config.dt,
                                     config.boundary, config.epsilon)
    field, clamped = reaction_step(grid, field, model, envelope, t, config.dt)
    field = operator.step(field)
    return field, clamped


@dataclass
class ObserverConfig:
    """Sampling cadence and probes recorded along a run."""

    cadence: float = 0.25                       # years between samples
    region_bounds: tuple | None = None          # (y_low, y_high) for P1
    sample_point: tuple | None = None           # (x1, x2) for point density
    snapshot_times: tuple = ()
    snapshot_callback: object = None            # callable(t, grid, field)


@dataclass
class SteadyStateReport:
    field: np.ndarray
    converged: bool
    status: str                 # converged | converged_to_zero | not_converged
    relaxation_time: float      # simulated years spent
    residual: float             # relative change per year at termination


def run(grid: Grid, model: GrowthModel, envelope: EnvelopeSpec,
        config: SolverConfig, initial_field: np.ndarray,
        observers: ObserverConfig | None = None,
        extinction_early_stop: bool = False) -> Trajectory:
    """Advance from t=0 to end_time, sampling diagnostics on the way.

    ``extinction_early_stop`` stops an Allee run once extinction is
    certain: when density is at or below the Allee threshold everywhere,
    the total population is non-increasing, so once it is also below one
    individual the outcome at the horizon is decided.
    """
    config.validate()
    model.validate()
    envelope.validate()
    if observers is None:
        observers = ObserverConfig()
    operator = DiffusionOperator(grid, config.D, config.dt,
                                 config.boundary, config.epsilon)
    n_steps = int(round(config.end_time / config.dt))
    sample_every = max(1, int(round(observers.cadence / config.dt)))

    region = None
    if observers.region_bounds is not None:
        region = region_mask(grid, *observers.region_bounds)
    point_cell = None
    if observers.sample_point is not None:
        x1, x2 = observers.sample_point
        j, i = grid.cell_containing(x1, x2)
        if not grid.mask[j, i]:
            raise PointOutsideDomainError(
                f"sample point {observers.sample_point} is not in the domain"
            )
        point_cell = (j, i)
    snapshot_steps = {
        int(round(ts / config.dt)): ts for ts in observers.snapshot_times
    }

    times, pops, p1s, ucs, clamps, peaks = [], [], [], [], [], []
    early_stop_time = None
    field = initial_field.copy()
    field[~grid.mask] = 0.0
    clamped_total = 0.0
    allee = model.variant is GrowthVariant.ALLEE

    def record(t):
        times.append(t)
        pops.append(total_population(grid, field))
        if region is not None:
            p1s.append(region_population(grid, field, region))
        if point_cell is not None:
            ucs.append(float(field[point_cell]))
        clamps.append(clamped_total)
        peaks.append(float(field.max()))

    record(0.0)
    if 0 in snapshot_steps and observers.snapshot_callback is not None:
        observers.snapshot_callback(0.0, grid, field)

    for k in range(1, n_steps + 1):
        t_prev = (k - 1) * config.dt
        field, clamped = step(grid, model, envelope, config, field, t_prev,
                              operator)
        clamped_total += clamped
        t = k * config.dt
        at_sample = (k % sample_every == 0) or (k == n_steps)
        if at_sample:
            record(t)
            if extinction_early_stop and allee and k < n_steps:
                if pops[-1] < 1.0 and float(field.max()) <= model.allee_threshold:
                    early_stop_time = t
                    break
        if k in snapshot_steps and observers.snapshot_callback is not None:
            observers.snapshot_callback(snapshot_steps[k], grid, field)

    return Trajectory(
        times=np.asarray(times),
        population=np.asarray(pops),
        region_population=np.asarray(p1s) if region is not None else None,
        point_density=np.asarray(ucs) if point_cell is not None else None,
        clamped_mass=np.asarray(clamps),
        peak_density=np.asarray(peaks),
        end_time=config.end_time,
        early_stop_time=early_stop_time,
    )


def initial_guess(grid: Grid, model: GrowthModel,
                  envelope: EnvelopeSpec) -> np.ndarray:
    """Relaxation seed: K inside the frozen envelope for logistic, 2K
    everywhere for Allee."""
    if model.variant is GrowthVariant.LOGISTIC:
        lo, hi = envelope.bounds(0.0)
        u = np.zeros((grid.ny, grid.nx))
        band = (grid.yc >= lo) & (grid.yc <= hi)
        u[band[:, None] & grid.mask] = model.K
        return u
    return grid.new_field(2.0 * model.K)


def relax_to_steady_state(grid: Grid, model: GrowthModel,
                          envelope: EnvelopeSpec, config: SolverConfig,
                          initial: np.ndarray | None = None,
                          tolerance: float = 1e-6,
                          max_time: float = 500.0) -> SteadyStateReport:
    """Relax the frozen-envelope equation to its stationary solution.

    Integrates with the envelope pinned at its t=0 position until the
    relative change of total population per simulated year drops below
    ``tolerance``. A collapse to (numerically) zero population is
    reported as status ``converged_to_zero``.
    """
    config.validate()
    model.validate()
    frozen = envelope.frozen()
    if initial is None:
        initial = initial_guess(grid, model, frozen)
    operator = DiffusionOperator(grid, config.D, config.dt,
                                 config.boundary, config.epsilon)
    steps_per_year = max(1, int(round(1.0 / config.dt)))
    field = initial.copy()
    field[~grid.mask] = 0.0
    p_prev = total_population(grid, field)
    t = 0.0
    residual = math.inf
    while t < max_time - 1e-9:
        for k in range(steps_per_year):
            field, _ = step(grid, model, frozen, config, field, t, operator)
        t += steps_per_year * config.dt
        p = total_population(grid, field)
        if p < RELAX_ZERO_FLOOR:
            return SteadyStateReport(field, False, "converged_to_zero", t,
                                     residual)
        residual = abs(p - p_prev) / p
        p_prev = p
        if residual < tolerance:
            return SteadyStateReport(field, True, "converged", t, residual)
    return SteadyStateReport(field, False, "not_converged", t, residual)


def persistence_condition(D: float, L: float, r_plus: float) -> bool:
    """Sufficient condition D pi^2 / (4 L^2) < r+ for a positive logistic
    steady state to exist."""
    if D <= 0 or L <= 0 or r_plus <= 0:
        raise InvalidSpecError("D/L/r_plus", "must all be positive")
    return D * math.pi ** 2 / (4.0 * L * L) < r_plus
