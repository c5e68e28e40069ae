"""Scenario orchestration: single runs, parameter sweeps, critical
opening-height searches, and corridor-exit comparisons."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .diagnostics import Outcome, Trajectory, classify_outcome
from .errors import InvalidSpecError
from .geometry import DomainKind, DomainSpec, Grid, build_domain, rasterize
from .model import EnvelopeSpec, GrowthModel
from .solver import (
    ObserverConfig,
    SolverConfig,
    SteadyStateReport,
    relax_to_steady_state,
    run,
)


@dataclass(frozen=True)
class Scenario:
    """Fully resolved inputs of one simulation run."""

    domain: DomainSpec
    model: GrowthModel
    envelope: EnvelopeSpec
    solver: SolverConfig
    dx: float = 0.25
    cadence: float = 0.25
    relax_tolerance: float = 1e-6
    relax_max_time: float = 500.0

    def corridor_exit_region(self) -> tuple | None:
        """The 4 km band just past the corridor, when there is one."""
        if self.domain.kind is DomainKind.TYPE1:
            return None
        y0 = self.domain.south_length + self.domain.corridor_length
        return (y0, y0 + 4.0)

    def corridor_exit_center(self) -> tuple | None:
        region = self.corridor_exit_region()
        if region is None:
            return None
        return (self.domain.width / 2.0, 0.5 * (region[0] + region[1]))

    def default_observers(self) -> ObserverConfig:
        return ObserverConfig(
            cadence=self.cadence,
            region_bounds=self.corridor_exit_region(),
            sample_point=self.corridor_exit_center(),
        )


def apply_parameter(scenario: Scenario, name: str, value: float) -> Scenario:
    """Return a scenario with one named parameter replaced.

    Setting ``h`` coerces the domain to type 3 so sweeps over the taper
    height work from a type 2 base.
    """
    if name == "v":
        return replace(scenario, envelope=replace(scenario.envelope, speed=value))
    if name == "L":
        return replace(scenario,
                       envelope=replace(scenario.envelope, thickness=value))
    if name == "D":
        return replace(scenario, solver=replace(scenario.solver, D=value))
    if name == "dt":
        return replace(scenario, solver=replace(scenario.solver, dt=value))
    if name == "end_time":
        return replace(scenario, solver=replace(scenario.solver, end_time=value))
    if name == "h":
        return replace(scenario, domain=replace(
            scenario.domain, kind=DomainKind.TYPE3, taper_height=value))
    if name == "dx":
        return replace(scenario, dx=value)
    if name in ("r_plus", "r_minus", "K", "rho"):
        return replace(scenario, model=replace(scenario.model, **{name: value}))
    raise InvalidSpecError(name, "unknown sweep parameter")


def _steady_key(s: Scenario) -> tuple:
    d, m = s.domain, s.model
    return (
        d.kind.value, d.width, d.south_length, d.corridor_width,
        d.corridor_length, d.taper_height, d.north_extent, s.dx,
        m.variant.value, m.r_plus, m.r_minus, m.K, m.rho,
        s.envelope.thickness, s.envelope.mode.value,
        s.solver.D, s.solver.dt, s.solver.boundary.value, s.solver.epsilon,
        s.relax_tolerance, s.relax_max_time,
    )


class SteadyStateCache:
    """Write-once cache of grids and relaxed initial conditions.

    The shift speed v is deliberately absent from the key: the initial
    condition is the stationary state of the frozen envelope.
    """

    def __init__(self):
        self._grids: dict = {}
        self._steady: dict = {}

    def grid(self, scenario: Scenario) -> Grid:
        d = scenario.domain
        key = (d.kind.value, d.width, d.south_length, d.corridor_width,
               d.corridor_length, d.taper_height, d.north_extent, scenario.dx)
        if key not in self._grids:
            self._grids[key] = rasterize(build_domain(d), scenario.dx)
        return self._grids[key]

    def steady_state(self, scenario: Scenario) -> SteadyStateReport:
        key = _steady_key(scenario)
        if key not in self._steady:
            grid = self.grid(scenario)
            self._steady[key] = relax_to_steady_state(
                grid, scenario.model, scenario.envelope, scenario.solver,
                tolerance=scenario.relax_tolerance,
                max_time=scenario.relax_max_time,
            )
        return self._steady[key]


@dataclass
class ScenarioResult:
    scenario: Scenario
    grid: Grid
    steady: SteadyStateReport
    trajectory: Trajectory
    outcome: Outcome
    flags: list = field(default_factory=list)


def run_scenario(scenario: Scenario, cache: SteadyStateCache | None = None,
                 observers: ObserverConfig | None = None,
                 early_stop: bool = False) -> ScenarioResult:
    """Full pipeline: build domain, rasterize, relax, run, classify."""
    if cache is None:
        cache = SteadyStateCache()
    grid = cache.grid(scenario)
    steady = cache.steady_state(scenario)
    flags = []
    if steady.status == "converged_to_zero":
        # no positive stationary state: the run is extinct from the start
        flags.append("steady_state_zero")
        times = np.array([0.0, scenario.solver.end_time])
        trajectory = Trajectory(times=times, population=np.zeros(2),
                                clamped_mass=np.zeros(2),
                                end_time=scenario.solver.end_time,
                                flags=["steady_state_zero"])
        return ScenarioResult(scenario, grid, steady, trajectory,
                              Outcome(True, 0.0), flags)
    if steady.status == "not_converged":
        flags.append("steady_state_not_converged")
    if observers is None:
        observers = scenario.default_observers()
    trajectory = run(grid, scenario.model, scenario.envelope, scenario.solver,
                     steady.field, observers, extinction_early_stop=early_stop)
    outcome = classify_outcome(trajectory, horizon=scenario.solver.end_time)
    return ScenarioResult(scenario, grid, steady, trajectory, outcome, flags)


@dataclass(frozen=True)
class SweepSpec:
    axis1_name: str
    axis1_values: tuple
    axis2_name: str
    axis2_values: tuple
    base: Scenario

    def validate(self) -> None:
        for name, values in ((self.axis1_name, self.axis1_values),
                             (self.axis2_name, self.axis2_values)):
            if len(values) == 0:
                raise InvalidSpecError(name, "value list must be nonempty")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise InvalidSpecError(name, "values must be strictly increasing")
        if self.axis1_name == self.axis2_name:
            raise InvalidSpecError("axis2_name", "axes must differ")


@dataclass
class SweepResult:
    spec: SweepSpec
    p_final: np.ndarray          # |axis1| x |axis2|
    extinct: np.ndarray          # boolean, same shape
    provenance: list             # row-major list of per-cell dicts

    def to_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write(f"{self.spec.axis1_name},{self.spec.axis2_name},"
                    "P30,outcome,flags\n")
            for a, v1 in enumerate(self.spec.axis1_values):
                for b, v2 in enumerate(self.spec.axis2_values):
                    cell = self.provenance[a * len(self.spec.axis2_values) + b]
                    outcome = "extinct" if self.extinct[a, b] else "persistent"
                    if cell.get("failed"):
                        outcome = "failed"
                    f.write(f"{float(v1)!r},{float(v2)!r},"
                            f"{float(self.p_final[a, b])!r},{outcome},"
                            f"{';'.join(cell.get('flags', []))}\n")


def _cell_scenario(spec: SweepSpec, a: int, b: int) -> Scenario:
    s = apply_parameter(spec.base, spec.axis1_name, spec.axis1_values[a])
    return apply_parameter(s, spec.axis2_name, spec.axis2_values[b])


def _run_cell(args):
    """Worker entry point: runs one cell from a precomputed steady state."""
    scenario, steady, early_stop = args
    cache = SteadyStateCache()
    cache._steady[_steady_key(scenario)] = steady
    try:
        result = run_scenario(scenario, cache=cache, early_stop=early_stop)
        return result.outcome, result.flags
    except Exception as exc:
        return Outcome(True, float("nan")), [f"failed:{type(exc).__name__}"]


def sweep(spec: SweepSpec, cache: SteadyStateCache | None = None,
          workers: int = 1, early_stop: bool = False,
          execution_order=None) -> SweepResult:
    """Run one scenario per grid cell.

    Cells are independent; results are assembled by cell index, so the
    outcome does not depend on ``execution_order`` (a permutation of
    flattened cell indices, useful for scheduling or for checking the
    order-independence property) or on ``workers``.
    """
    spec.validate()
    if cache is None:
        cache = SteadyStateCache()
    n1, n2 = len(spec.axis1_values), len(spec.axis2_values)
    p_final = np.zeros((n1, n2))
    extinct = np.zeros((n1, n2), dtype=bool)
    provenance = []
    cells = [(a, b) for a in range(n1) for b in range(n2)]
    scenarios = [_cell_scenario(spec, a, b) for a, b in cells]
    if execution_order is None:
        execution_order = range(len(cells))
    elif sorted(execution_order) != list(range(len(cells))):
        raise InvalidSpecError("execution_order",
                               "must be a permutation of cell indices")

    results: list = [None] * len(cells)
    if workers > 1:
        # steady states are computed up front so workers only time-step
        order = list(execution_order)
        jobs = [(scenarios[idx], cache.steady_state(scenarios[idx]),
                 early_stop) for idx in order]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for idx, out in zip(order, pool.map(_run_cell, jobs)):
                results[idx] = out
    else:
        for idx in execution_order:
            try:
                r = run_scenario(scenarios[idx], cache=cache,
                                 early_stop=early_stop)
                results[idx] = (r.outcome, r.flags)
            except Exception as exc:  # record, keep sweeping
                results[idx] = (Outcome(True, float("nan")),
                                [f"failed:{type(exc).__name__}"])

    for idx, (a, b) in enumerate(cells):
        outcome, flags = results[idx]
        p_final[a, b] = outcome.final_population
        extinct[a, b] = outcome.extinct
        provenance.append({
            spec.axis1_name: spec.axis1_values[a],
            spec.axis2_name: spec.axis2_values[b],
            "flags": flags,
            "failed": any(fl.startswith("failed:") for fl in flags),
        })
    return SweepResult(spec, p_final, extinct, provenance)


def critical_h(scenario: Scenario, h_max: float = 30.0,
               resolution: float = 0.5,
               cache: SteadyStateCache | None = None,
               full_scan: bool = False):
    """Smallest taper height (within ``resolution``) giving persistence.

    Relies on the monotonicity of the outcome in h; ``full_scan``
    replaces the bisection by a linear scan for non-monotone regimes.
    Returns None when even h_max ends extinct.
    """
    if h_max <= 0:
        raise InvalidSpecError("h_max", "must be positive")
    if resolution <= 0:
        raise InvalidSpecError("resolution", "must be positive")
    if cache is None:
        cache = SteadyStateCache()

    def extinct_at(h: float) -> bool:
        s = apply_parameter(scenario, "h", h)
        return run_scenario(s, cache=cache, early_stop=True).outcome.extinct

    if full_scan:
        for h in np.arange(0.0, h_max + resolution / 2, resolution):
            if not extinct_at(float(h)):
                return float(h)
        return None

    if not extinct_at(0.0):
        return 0.0
    if extinct_at(h_max):
        return None
    lo, hi = 0.0, h_max
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if extinct_at(mid):
            lo = mid
        else:
            hi = mid
    return hi


def rho_curve(scenario: Scenario, rho_values, h_max: float = 30.0,
              resolution: float = 0.5,
              cache: SteadyStateCache | None = None) -> list:
    """(rho, h* or None) per Allee threshold fraction."""
    if cache is None:
        cache = SteadyStateCache()
    out = []
    for rho in rho_values:
        s = apply_parameter(scenario, "rho", float(rho))
        out.append((float(rho), critical_h(s, h_max, resolution, cache)))
    return out


def r_minus_sensitivity(scenario: Scenario, r_minus_values,
                        h_max: float = 30.0, resolution: float = 0.5,
                        cache: SteadyStateCache | None = None) -> list:
    """(r-, h* or None) per hostility level outside the envelope."""
    for rm in r_minus_values:
        if rm <= scenario.model.r_plus:
            raise InvalidSpecError("r_minus", f"{rm} must exceed r_plus")
    if cache is None:
        cache = SteadyStateCache()
    out = []
    for rm in r_minus_values:
        s = apply_parameter(scenario, "r_minus", float(rm))
        out.append((float(rm), critical_h(s, h_max, resolution, cache)))
    return out


@dataclass
class CorridorExitReport:
    """Side-by-side corridor-exit diagnostics for two domains."""

    times: np.ndarray
    p1_narrow: np.ndarray        # abrupt exit (type 2)
    p1_tapered: np.ndarray       # gradual exit (type 3)
    density_narrow: np.ndarray   # u at the exit-center point
    density_tapered: np.ndarray
    threshold: float             # Allee threshold density rho*K
    crossing_narrow: float | None
    crossing_tapered: float | None

    def to_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write("t,P1_type2,P1_type3,uc_type2,uc_type3\n")
            for k in range(len(self.times)):
                f.write(
                    f"{float(self.times[k])!r},{float(self.p1_narrow[k])!r},"
                    f"{float(self.p1_tapered[k])!r},"
                    f"{float(self.density_narrow[k])!r},"
                    f"{float(self.density_tapered[k])!r}\n"
                )


def _first_crossing(times, values, threshold):
    idx = np.nonzero(np.asarray(values) >= threshold)[0]
    if len(idx) == 0:
        return None
    return float(times[idx[0]])


def corridor_exit_report(narrow: Scenario, tapered: Scenario,
                         cache: SteadyStateCache | None = None
                         ) -> CorridorExitReport:
    """Compare P1 and exit-center density between an abrupt and a
    tapered corridor exit sharing all other parameters."""
    if (narrow.model != tapered.model
            or narrow.solver != tapered.solver
            or narrow.envelope != tapered.envelope):
        raise InvalidSpecError(
            "scenario", "both scenarios must share model/solver/envelope")
    if cache is None:
        cache = SteadyStateCache()
    res_n = run_scenario(narrow, cache=cache)
    res_t = run_scenario(tapered, cache=cache)
    n = min(len(res_n.trajectory.times), len(res_t.trajectory.times))
    times = res_n.trajectory.times[:n]
    threshold = narrow.model.allee_threshold
    uc_n = res_n.trajectory.point_density[:n]
    uc_t = res_t.trajectory.point_density[:n]
    return CorridorExitReport(
        times=times,
        p1_narrow=res_n.trajectory.region_population[:n],
        p1_tapered=res_t.trajectory.region_population[:n],
        density_narrow=uc_n,
        density_tapered=uc_t,
        threshold=threshold,
        crossing_narrow=_first_crossing(times, uc_n, threshold),
        crossing_tapered=_first_crossing(times, uc_t, threshold),
    )
