"""Observables over fields and trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AbsentFrontError,
    IncompleteTrajectoryError,
    InsufficientSamplesError,
    InvalidSpecError,
    PointOutsideDomainError,
)
from .geometry import Grid

# A run ends extinct when fewer individuals than this remain at the horizon.
EXTINCTION_THRESHOLD = 1.0


@dataclass
class Trajectory:
    """Sampled diagnostics of one simulation run.

    ``early_stop_time`` is set when the run was cut short because
    extinction had become certain (Allee density below the threshold
    everywhere and total population already under the extinction
    threshold); in that case the recorded final population is a valid
    upper bound for P at the horizon.
    """

    times: np.ndarray
    population: np.ndarray
    region_population: np.ndarray | None = None
    point_density: np.ndarray | None = None
    clamped_mass: np.ndarray | None = None
    peak_density: np.ndarray | None = None
    end_time: float = 30.0
    early_stop_time: float | None = None
    flags: list = field(default_factory=list)

    @property
    def final_population(self) -> float:
        return float(self.population[-1])

    def population_at(self, t: float) -> float:
        idx = int(np.argmin(np.abs(self.times - t)))
        return float(self.population[idx])

    def to_csv(self, path) -> None:
        cols = ["t", "P"]
        arrays = [self.times, self.population]
        cols.append("P1")
        arrays.append(
            self.region_population
            if self.region_population is not None
            else np.full_like(self.times, np.nan)
        )
        cols.append("u_at_xc")
        arrays.append(
            self.point_density
            if self.point_density is not None
            else np.full_like(self.times, np.nan)
        )
        cols.append("clamped_mass")
        arrays.append(
            self.clamped_mass
            if self.clamped_mass is not None
            else np.zeros_like(self.times)
        )
        with open(path, "w") as f:
            f.write(",".join(cols) + "\n")
            for k in range(len(self.times)):
                f.write(",".join(repr(float(a[k])) for a in arrays) + "\n")


@dataclass(frozen=True)
class Outcome:
    extinct: bool
    final_population: float

    @property
    def label(self) -> str:
        return "extinct" if self.extinct else "persistent"


def total_population(grid: Grid, field: np.ndarray) -> float:
    """Integral of density over the domain: sum over active cells * dx^2."""
    return float(field[grid.mask].sum()) * grid.cell_area


def region_population(grid: Grid, field: np.ndarray, region: np.ndarray) -> float:
    """Integral restricted to a cell subset (boolean mask)."""
    return float(field[region].sum()) * grid.cell_area


def sample_density(grid: Grid, field: np.ndarray, point) -> float:
    """Density of the cell containing the point."""
    x1, x2 = point
    if not (0 <= x1 <= grid.spec.width and 0 <= x2 <= grid.spec.north_extent):
        raise PointOutsideDomainError(f"point {point} outside the bounding box")
    j, i = grid.cell_containing(x1, x2)
    if not grid.mask[j, i]:
        raise PointOutsideDomainError(f"point {point} falls on an inactive cell")
    return float(field[j, i])


def front_position(grid: Grid, field: np.ndarray, threshold: float):
    """Largest cell-center latitude with density >= threshold, or None."""
    if threshold <= 0:
        raise InvalidSpecError("threshold", "must be positive")
    hit = grid.mask & (field >= threshold)
    rows = np.nonzero(hit.any(axis=1))[0]
    if len(rows) == 0:
        return None
    return float(grid.yc[rows[-1]])


def estimate_front_speed(times, positions, burn_in_fraction: float = 0.2) -> float:
    """Least-squares slope of front position vs time after a burn-in window.

    ``positions`` may contain None entries (absent front); those are
    dropped. Requires at least 10 valid samples past the burn-in.
    """
    times = np.asarray(times, dtype=float)
    if len(times) == 0:
        raise InsufficientSamplesError("empty trajectory")
    t_start = times[0] + burn_in_fraction * (times[-1] - times[0])
    tt, pp = [], []
    for t, p in zip(times, positions):
        if t >= t_start and p is not None:
            tt.append(t)
            pp.append(p)
    if len(tt) == 0:
        raise AbsentFrontError("no front detected after the burn-in window")
    if len(tt) < 10:
        raise InsufficientSamplesError(
            f"only {len(tt)} front samples after burn-in; need >= 10"
        )
    slope = np.polyfit(np.asarray(tt), np.asarray(pp), 1)[0]
    return float(slope)


def classify_outcome(trajectory: Trajectory, horizon: float = 30.0) -> Outcome:
    """Extinct iff the population at the horizon is below one individual."""
    if trajectory.early_stop_time is not None:
        # population is non-increasing past the early stop, so the last
        # recorded value bounds P at the horizon
        return Outcome(extinct=True, final_population=trajectory.final_population)
    if trajectory.times[-1] < horizon - 1e-9:
        raise IncompleteTrajectoryError(
            f"trajectory ends at t={trajectory.times[-1]}, before t={horizon}"
        )
    p30 = trajectory.population_at(horizon)
    return Outcome(extinct=p30 < EXTINCTION_THRESHOLD, final_population=p30)
