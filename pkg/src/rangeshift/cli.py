"""Batch command-line front end.

Subcommands::

    rangeshift run        --config cfg --out dir   single scenario
    rangeshift sweep      --config cfg --out dir   two-axis parameter sweep
    rangeshift hstar      --config cfg --out dir   critical opening height
    rangeshift speedcheck --config cfg --out dir   front speed vs analytic
    rangeshift validate   --config cfg --out dir   solver invariant self-test

Every subcommand writes ``manifest.txt`` with the fully resolved
configuration; feeding the manifest back as the config reproduces the
outputs byte for byte. Output files are written to a temporary name and
renamed on completion so no partial file survives a failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import diagnostics, solver
from .config import RunConfig, parse_config
from .errors import ConfigError, SimulationError
from .experiments import (
    SteadyStateCache,
    SweepSpec,
    critical_h,
    r_minus_sensitivity,
    rho_curve,
    run_scenario,
    sweep,
)
from .geometry import DomainKind, DomainSpec, build_domain, rasterize
from .model import EnvelopeSpec, GrowthModel, GrowthVariant, analytic_spreading_speed
from .solver import DiffusionOperator, apply_laplacian

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_SIMULATION = 3
EXIT_CHECK_FAILED = 4

SPEED_TOLERANCE = 0.10


def _write_atomic(path: str, writer) -> None:
    tmp = path + ".tmp"
    writer(tmp)
    os.replace(tmp, path)


def _write_text(path: str, text: str) -> None:
    def w(p):
        with open(p, "w") as f:
            f.write(text)
    _write_atomic(path, w)


def _write_manifest(out_dir: str, config: RunConfig) -> None:
    _write_text(os.path.join(out_dir, "manifest.txt"), config.manifest_text())


def _snapshot_writer(out_dir: str):
    snap_dir = os.path.join(out_dir, "snapshots")
    os.makedirs(snap_dir, exist_ok=True)

    def write(t, grid, field):
        path = os.path.join(snap_dir, f"u_{t:g}.csv")

        def w(p):
            jj, ii = np.nonzero(grid.mask)
            with open(p, "w") as f:
                f.write("x1,x2,u\n")
                for j, i in zip(jj, ii):
                    f.write(f"{grid.xc[i]!r},{grid.yc[j]!r},"
                            f"{float(field[j, i])!r}\n")
        _write_atomic(path, w)

    return write


def _cmd_run(config: RunConfig, out_dir: str, workers: int) -> int:
    scenario = config.scenario()
    observers = scenario.default_observers()
    observers.snapshot_times = config["snapshot_times"]
    if config["snapshot_times"]:
        observers.snapshot_callback = _snapshot_writer(out_dir)
    result = run_scenario(scenario, observers=observers)
    _write_atomic(os.path.join(out_dir, "trajectory.csv"),
                  result.trajectory.to_csv)
    _write_manifest(out_dir, config)
    print(f"run: P(0)={result.trajectory.population[0]:.6g} "
          f"P(end)={result.trajectory.final_population:.6g} "
          f"outcome={result.outcome.label}"
          + (f" flags={','.join(result.flags)}" if result.flags else ""))
    return EXIT_OK


def _cmd_sweep(config: RunConfig, out_dir: str, workers: int) -> int:
    spec = SweepSpec(
        axis1_name=config["axis1"], axis1_values=config["axis1_values"],
        axis2_name=config["axis2"], axis2_values=config["axis2_values"],
        base=config.scenario(),
    )
    result = sweep(spec, workers=workers)
    _write_atomic(os.path.join(out_dir, "sweep.csv"), result.to_csv)
    _write_manifest(out_dir, config)
    n_ext = int(result.extinct.sum())
    print(f"sweep: {result.extinct.size} cells, {n_ext} extinct")
    return EXIT_OK


def _cmd_hstar(config: RunConfig, out_dir: str, workers: int) -> int:
    scenario = config.scenario()
    mode = config["hstar_mode"]
    h_max = config["h_max"]
    resolution = config["h_resolution"]
    cache = SteadyStateCache()
    if mode == "h":
        rows = [("D", scenario.solver.D,
                 critical_h(scenario, h_max, resolution, cache))]
    elif mode == "rho":
        rows = [("rho", rho, h)
                for rho, h in rho_curve(scenario, config["rho_values"],
                                        h_max, resolution, cache)]
    else:
        rows = [("r_minus", rm, h)
                for rm, h in r_minus_sensitivity(
                    scenario, config["r_minus_values"], h_max, resolution,
                    cache)]

    def w(p):
        with open(p, "w") as f:
            f.write("param,value,h_star\n")
            for name, value, h in rows:
                hs = "none" if h is None else repr(float(h))
                f.write(f"{name},{float(value)!r},{hs}\n")
    _write_atomic(os.path.join(out_dir, "hstar.csv"), w)
    _write_manifest(out_dir, config)
    for name, value, h in rows:
        print(f"hstar: {name}={value:g} h*={'none' if h is None else h}")
    return EXIT_OK


def measure_front_speed(model: GrowthModel, D: float, width: float = 20.0,
                        extent: float = 400.0, dx: float = 0.25,
                        dt: float = 0.01, end_time: float = 30.0,
                        seed_extent: float = 20.0) -> float:
    """Front speed of a homogeneous-suitability run with a step seed."""
    grid = rasterize(build_domain(DomainSpec(kind=DomainKind.TYPE1,
                                             width=width,
                                             north_extent=extent)), dx)
    envelope = EnvelopeSpec(thickness=extent, speed=0.0)
    cfg = solver.SolverConfig(D=D, dt=dt, end_time=end_time)
    u = grid.new_field()
    u[(grid.yc <= seed_extent)[:, None] & grid.mask] = model.K

    op = DiffusionOperator(grid, D, dt)
    threshold = model.K / 2.0
    sample_every = max(1, int(round(0.25 / dt)))
    n_steps = int(round(end_time / dt))
    times, fronts = [0.0], [diagnostics.front_position(grid, u, threshold)]
    for k in range(1, n_steps + 1):
        u, _ = solver.step(grid, model, envelope, cfg, u, (k - 1) * dt, op)
        if k % sample_every == 0 or k == n_steps:
            times.append(k * dt)
            fronts.append(diagnostics.front_position(grid, u, threshold))
    return diagnostics.estimate_front_speed(times, fronts)


def _cmd_speedcheck(config: RunConfig, out_dir: str, workers: int) -> int:
    scenario = config.scenario()
    model = scenario.model
    D = scenario.solver.D
    analytic = analytic_spreading_speed(model, D)
    measured = measure_front_speed(
        model, D, width=scenario.domain.width,
        extent=scenario.domain.north_extent, dx=scenario.dx,
        dt=scenario.solver.dt, end_time=scenario.solver.end_time)
    rel_err = abs(measured - analytic) / analytic
    status = "pass" if rel_err <= SPEED_TOLERANCE else "fail"

    def w(p):
        with open(p, "w") as f:
            f.write("model,D,measured,analytic,rel_err,status\n")
            f.write(f"{model.variant.value},{float(D)!r},{measured!r},"
                    f"{analytic!r},{rel_err!r},{status}\n")
    _write_atomic(os.path.join(out_dir, "speedcheck.csv"), w)
    _write_manifest(out_dir, config)
    print(f"speedcheck: measured={measured:.4f} analytic={analytic:.4f} "
          f"rel_err={rel_err:.3%} -> {status}")
    return EXIT_OK if status == "pass" else EXIT_CHECK_FAILED


def _cmd_validate(config: RunConfig, out_dir: str, workers: int) -> int:
    """Fast solver self-test on a scaled-down configuration."""
    checks = []
    spec = DomainSpec(kind=DomainKind.TYPE2, width=20.0, south_length=40.0,
                      north_extent=100.0)
    grid = rasterize(build_domain(spec), 0.5)
    model = GrowthModel(variant=GrowthVariant.ALLEE)
    envelope = EnvelopeSpec(thickness=30.0, speed=2.5)

    # constant field is a fixed point of the diffusion step
    u = grid.new_field(3.7)
    u2 = solver.diffusion_step(grid, u, D=10.0, dt=0.05)
    checks.append(("uniform_field_fixed_point",
                   float(np.abs(u2 - u)[grid.mask].max()) < 1e-12))

    # discrete Laplacian of x1^2 is 2 away from boundaries
    q = grid.new_field()
    q[grid.mask] = (grid.xc[None, :] ** 2 * np.ones((grid.ny, 1)))[grid.mask]
    lap = apply_laplacian(grid, q)
    interior = grid.mask.copy()
    interior[:, [0, -1]] = False
    interior[[0, -1], :] = False
    interior &= np.roll(grid.mask, 1, 1) & np.roll(grid.mask, -1, 1)
    checks.append(("laplacian_stencil",
                   float(np.abs(lap[interior] - 2.0).max()) < 1e-9))

    # diffusion-only mass conservation over 30 years
    rng_free = grid.new_field()
    profile = (1.0 + np.sin(grid.yc[:, None] / 7.0)) * np.ones((1, grid.nx))
    rng_free[grid.mask] = profile[grid.mask]
    p0 = diagnostics.total_population(grid, rng_free)
    op = DiffusionOperator(grid, 10.0, 0.05)
    uu = rng_free
    for _ in range(600):
        uu = op.step(uu)
    p1 = diagnostics.total_population(grid, uu)
    checks.append(("mass_conservation", abs(p1 - p0) / p0 < 1e-8))

    # positivity and boundedness on a short reactive run
    cfg = solver.SolverConfig(D=10.0, dt=0.01, end_time=5.0)
    init = grid.new_field(2.0 * model.K)
    traj = solver.run(grid, model, envelope, cfg, init)
    checks.append(("positivity_and_bound",
                   traj.population.min() >= 0.0
                   and float(traj.clamped_mass[-1])
                   < 1e-6 * float(traj.population[0])))

    # determinism: identical configs give byte-identical trajectories
    traj2 = solver.run(grid, model, envelope, cfg, init)
    checks.append(("determinism",
                   np.array_equal(traj.population, traj2.population)))

    # refinement: halving dx and dt moves P(end) by < 2%
    cfg_short = solver.SolverConfig(D=10.0, dt=0.02, end_time=2.0)
    grid_f = rasterize(build_domain(spec), 0.25)
    cfg_fine = solver.SolverConfig(D=10.0, dt=0.01, end_time=2.0)
    t_c = solver.run(grid, model, envelope, cfg_short, grid.new_field(model.K))
    t_f = solver.run(grid_f, model, envelope, cfg_fine,
                     grid_f.new_field(model.K))
    rel = abs(t_c.final_population - t_f.final_population) / t_f.final_population
    checks.append(("refinement_stability", rel < 0.02))

    _write_manifest(out_dir, config)
    ok = True
    for name, passed in checks:
        print(f"validate: {name}: {'pass' if passed else 'FAIL'}")
        ok &= passed
    return EXIT_OK if ok else EXIT_CHECK_FAILED


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "hstar": _cmd_hstar,
    "speedcheck": _cmd_speedcheck,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rangeshift",
        description="Reaction-diffusion simulator for range shifts under "
                    "a moving climate envelope.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None,
                       help="key=value config file (defaults used if omitted)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="override the workers config key")
    args = parser.parse_args(argv)

    try:
        text = ""
        if args.config is not None:
            with open(args.config) as f:
                text = f.read()
        config = parse_config(text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    workers = args.workers if args.workers is not None else config["workers"]
    os.makedirs(args.out, exist_ok=True)
    for warning in config.warnings:
        print(f"warning: {warning}", file=sys.stderr)

    try:
        return _COMMANDS[args.command](config, args.out, workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except Exception as exc:  # pragma: no cover
        print(f"unexpected error: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
