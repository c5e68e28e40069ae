"""Growth laws, the moving climate envelope, and analytic front speeds.

Two per-capita growth variants are supported. The logistic form is
r+ (1 - u/K); the strong-Allee form is

    (4 r+ / (1 - rho)^2) (1 - u/K) (u/K - rho),

whose zeros sit at the Allee threshold rho*K and at K, and whose maximum
over (0, K) equals r+. Outside the climate envelope both variants drop
by a flat r-.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidSpecError, NonPositiveSpeedError


class GrowthVariant(str, Enum):
    LOGISTIC = "logistic"
    ALLEE = "allee"


class EnvelopeMode(str, Enum):
    SHIFTING = "shifting"
    EXPANDING = "expanding"


@dataclass(frozen=True)
class GrowthModel:
    variant: GrowthVariant = GrowthVariant.LOGISTIC
    r_plus: float = 1.0       # 1/year, intrinsic rate inside the envelope
    r_minus: float = 2.0      # 1/year, flat drop outside the envelope
    K: float = 10.0           # individuals/km^2
    rho: float = 0.25         # Allee threshold fraction, Allee variant only

    def validate(self) -> None:
        if self.r_plus <= 0:
            raise InvalidSpecError("r_plus", "must be positive")
        if self.r_minus <= self.r_plus:
            raise InvalidSpecError("r_minus", "must exceed r_plus")
        if self.K <= 0:
            raise InvalidSpecError("K", "must be positive")
        if self.variant is GrowthVariant.ALLEE and not 0 <= self.rho < 1:
            raise InvalidSpecError("rho", "must lie in [0, 1)")

    @property
    def allee_threshold(self) -> float:
        """Density rho*K below which the Allee per-capita rate is negative."""
        return self.rho * self.K

    @property
    def allee_rate(self) -> float:
        """Rate constant 4 r+ / (1 - rho)^2 of the cubic growth term."""
        return 4.0 * self.r_plus / (1.0 - self.rho) ** 2


@dataclass(frozen=True)
class EnvelopeSpec:
    thickness: float = 30.0   # km
    speed: float = 2.5        # km/year, poleward shift speed
    mode: EnvelopeMode = EnvelopeMode.SHIFTING

    def validate(self) -> None:
        if self.thickness <= 0:
            raise InvalidSpecError("thickness", "must be positive")
        if self.speed < 0:
            raise InvalidSpecError("speed", "must be >= 0")

    def bounds(self, t: float) -> tuple[float, float]:
        """Closed latitude interval [lo, hi] of suitable habitat at time t."""
        hi = self.thickness + self.speed * t
        if self.mode is EnvelopeMode.EXPANDING:
            return 0.0, hi
        return self.speed * t, hi

    def frozen(self) -> "EnvelopeSpec":
        """The same envelope with its motion stopped (for relaxation)."""
        return EnvelopeSpec(self.thickness, 0.0, self.mode)


def in_envelope(env: EnvelopeSpec, t: float, x2):
    """Closed-interval envelope membership; scalar or array x2."""
    lo, hi = env.bounds(t)
    x2 = np.asarray(x2, dtype=float)
    result = (x2 >= lo) & (x2 <= hi)
    if result.ndim == 0:
        return bool(result)
    return result


def per_capita_growth(model: GrowthModel, inside, u):
    """Per-capita growth rate (1/year); inside/u may be arrays."""
    u = np.asarray(u, dtype=float)
    if model.variant is GrowthVariant.LOGISTIC:
        g = model.r_plus * (1.0 - u / model.K)
    else:
        w = u / model.K
        g = model.allee_rate * (1.0 - w) * (w - model.rho)
    g = g - model.r_minus * (1.0 - np.asarray(inside, dtype=float))
    if g.ndim == 0:
        return float(g)
    return g


def reaction_rate(model: GrowthModel, inside, u):
    """Density change rate u * g (individuals/km^2/year)."""
    u = np.asarray(u, dtype=float)
    f = u * per_capita_growth(model, inside, u)
    if f.ndim == 0:
        return float(f)
    return f


def analytic_spreading_speed(model: GrowthModel, D: float) -> float:
    """Homogeneous-medium front speed for the given growth variant.

    Logistic: 2 sqrt(r+ D). Allee: 2 sqrt(r+ D) sqrt(2) (1/2 - rho)/(1 - rho),
    positive only for rho < 1/2.
    """
    if D <= 0:
        raise InvalidSpecError("D", "must be positive")
    base = 2.0 * math.sqrt(model.r_plus * D)
    if model.variant is GrowthVariant.LOGISTIC:
        return base
    if model.rho >= 0.5:
        raise NonPositiveSpeedError(
            f"rho={model.rho} >= 1/2 gives a nonpositive front speed"
        )
    return base * math.sqrt(2.0) * (0.5 - model.rho) / (1.0 - model.rho)
