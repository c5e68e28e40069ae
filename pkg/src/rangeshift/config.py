"""Flat key=value run configuration and the reproducibility manifest.

A config file is plain text: one ``key=value`` per line, ``#`` comments,
blank lines ignored. Every key has a documented default; after parsing,
all keys are resolved so a written manifest can be fed back in as a
config and reproduce the run exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError
from .experiments import Scenario
from .geometry import DomainKind, DomainSpec
from .model import EnvelopeMode, EnvelopeSpec, GrowthModel, GrowthVariant
from .solver import BoundaryKind, SolverConfig

DEFAULTS = {
    # domain
    "domain": "type1",
    "width": "20",
    "south_length": "40",
    "corridor_width": "2",
    "corridor_length": "4",
    "h": "0",
    "north_extent": "400",
    # growth model
    "model": "logistic",
    "r_plus": "1",
    "r_minus": "2",
    "K": "10",
    "rho": "0.25",
    # climate envelope
    "L": "30",
    "v": "2.5",
    "envelope": "shifting",
    # solver
    "D": "10",
    "dx": "0.25",
    "dt": "0.01",
    "end_time": "30",
    "boundary": "neumann",
    "epsilon": "0",
    "relax_tolerance": "1e-06",
    "relax_max_time": "500",
    # observers / outputs
    "cadence": "0.25",
    "snapshot_times": "",
    "workers": "1",
    # sweep subcommand
    "axis1": "v",
    "axis1_values": "1,2.5,6",
    "axis2": "D",
    "axis2_values": "2,10,50",
    # hstar subcommand
    "hstar_mode": "h",
    "h_max": "30",
    "h_resolution": "0.5",
    "rho_values": "0.1,0.16,0.2,0.25",
    "r_minus_values": "1.2,1.5,2",
}

_ENUM_KEYS = {
    "domain": ("type1", "type2", "type3"),
    "model": ("logistic", "allee"),
    "envelope": ("shifting", "expanding"),
    "boundary": ("neumann", "robin"),
    "hstar_mode": ("h", "rho", "rminus"),
}
_FLOAT_KEYS = (
    "width", "south_length", "corridor_width", "corridor_length", "h",
    "north_extent", "r_plus", "r_minus", "K", "rho", "L", "v", "D", "dx",
    "dt", "end_time", "epsilon", "relax_tolerance", "relax_max_time",
    "cadence", "h_max", "h_resolution",
)
_INT_KEYS = ("workers",)
_SWEEP_PARAMS = ("v", "L", "D", "dt", "end_time", "h", "dx",
                 "r_plus", "r_minus", "K", "rho")
_LIST_KEYS = ("snapshot_times", "axis1_values", "axis2_values",
              "rho_values", "r_minus_values")


def _format_value(key: str, value) -> str:
    if key in _FLOAT_KEYS:
        return repr(float(value))
    if key in _LIST_KEYS:
        return ",".join(repr(float(v)) for v in value)
    if key in _INT_KEYS:
        return str(int(value))
    return str(value)


@dataclass
class RunConfig:
    """Typed view of a fully resolved configuration."""

    values: dict = field(default_factory=dict)
    provided: set = field(default_factory=set)
    warnings: list = field(default_factory=list)

    def __getitem__(self, key):
        return self.values[key]

    def scenario(self) -> Scenario:
        v = self.values
        domain = DomainSpec(
            kind=DomainKind(v["domain"]),
            width=v["width"],
            south_length=v["south_length"],
            corridor_width=v["corridor_width"],
            corridor_length=v["corridor_length"],
            taper_height=v["h"],
            north_extent=v["north_extent"],
        )
        model = GrowthModel(
            variant=GrowthVariant(v["model"]),
            r_plus=v["r_plus"], r_minus=v["r_minus"], K=v["K"], rho=v["rho"],
        )
        envelope = EnvelopeSpec(
            thickness=v["L"], speed=v["v"], mode=EnvelopeMode(v["envelope"]),
        )
        solver = SolverConfig(
            D=v["D"], dt=v["dt"], boundary=BoundaryKind(v["boundary"]),
            epsilon=v["epsilon"], end_time=v["end_time"],
        )
        return Scenario(
            domain=domain, model=model, envelope=envelope, solver=solver,
            dx=v["dx"], cadence=v["cadence"],
            relax_tolerance=v["relax_tolerance"],
            relax_max_time=v["relax_max_time"],
        )

    def resolved(self) -> dict:
        """Canonical string form of every key, in DEFAULTS order."""
        return {k: _format_value(k, self.values[k]) for k in DEFAULTS}

    def manifest_text(self) -> str:
        lines = [f"# warning: {w}" for w in self.warnings]
        lines += [f"{k}={v}" for k, v in self.resolved().items()]
        return "\n".join(lines) + "\n"


def _convert(key: str, raw: str, line_no):
    if key in _ENUM_KEYS:
        value = raw.strip().lower()
        if value not in _ENUM_KEYS[key]:
            raise ConfigError(
                f"invalid value {raw!r} for {key}; expected one of "
                f"{', '.join(_ENUM_KEYS[key])}", line=line_no, key=key)
        return value
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _LIST_KEYS:
            raw = raw.strip()
            if not raw:
                return ()
            return tuple(float(x) for x in raw.split(","))
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in ("axis1", "axis2"):
            value = raw.strip()
            if value not in _SWEEP_PARAMS:
                raise ConfigError(
                    f"invalid sweep axis {raw!r}; expected one of "
                    f"{', '.join(_SWEEP_PARAMS)}", line=line_no, key=key)
            return value
    except ValueError:
        raise ConfigError(f"invalid value {raw!r} for {key}",
                          line=line_no, key=key) from None
    raise AssertionError(f"unhandled key {key}")


def parse_config(text: str) -> RunConfig:
    """Parse flat key=value text into a fully resolved RunConfig.

    Unknown keys are rejected; missing keys get their documented
    defaults. Raises :class:`ConfigError` with the offending line number.
    """
    values = {}
    provided = set()
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected key=value, got {stripped!r}",
                              line=line_no)
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"unknown key {key!r}", line=line_no, key=key)
        if key in provided:
            raise ConfigError(f"duplicate key {key!r}", line=line_no, key=key)
        values[key] = _convert(key, raw, line_no)
        provided.add(key)

    for key, default in DEFAULTS.items():
        if key not in values:
            values[key] = _convert(key, default, None)

    config = RunConfig(values=values, provided=provided)
    _validate(config)
    return config


def _validate(config: RunConfig) -> None:
    v = config.values
    if v["domain"] == "type3" and "h" not in config.provided:
        raise ConfigError("h is required when domain=type3", key="h")
    if v["domain"] in ("type1", "type2") and v["h"] != 0:
        raise ConfigError(f"h must be 0 for domain={v['domain']}", key="h")
    if v["model"] == "allee" and v["rho"] >= 0.5:
        config.warnings.append(
            f"rho={v['rho']} >= 0.5: the population cannot spread and "
            "extinction is expected")
    if v["boundary"] == "neumann" and v["epsilon"] != 0:
        raise ConfigError("epsilon must be 0 with boundary=neumann",
                          key="epsilon")
    if v["workers"] < 1:
        raise ConfigError("workers must be >= 1", key="workers")
    # surface bundle invariants (growth rates, geometry) early
    try:
        scenario = config.scenario()
        scenario.domain.validate()
        scenario.model.validate()
        scenario.envelope.validate()
        scenario.solver.validate()
    except Exception as exc:
        raise ConfigError(str(exc)) from exc
