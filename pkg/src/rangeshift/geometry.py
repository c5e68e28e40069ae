"""Habitat domain shapes and their rasterization onto a uniform cell-centered grid.

Three domain types are supported: a straight rectangle (type 1), two
rectangles joined by a narrow corridor (type 2), and the same with a
trapezoidal widening of height ``taper_height`` after the corridor
(type 3, which degenerates to type 2 at taper_height = 0).

Coordinates are in km: x1 in [0, width] across the domain, x2 in
[0, north_extent] with x2 = 0 the southern boundary. The corridor and
taper are centered on the line x1 = width / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidSpecError, ResolutionError

# Minimum number of cells across the corridor for a usable raster.
MIN_CELLS_ACROSS_CORRIDOR = 4


class DomainKind(str, Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"
    TYPE3 = "type3"


@dataclass(frozen=True)
class DomainSpec:
    """Parameterized shape of the habitat domain."""

    kind: DomainKind = DomainKind.TYPE1
    width: float = 20.0
    south_length: float = 40.0
    corridor_width: float = 2.0
    corridor_length: float = 4.0
    taper_height: float = 0.0
    north_extent: float = 400.0

    def validate(self) -> None:
        if self.width <= 0:
            raise InvalidSpecError("width", "must be positive")
        if self.north_extent <= 0:
            raise InvalidSpecError("north_extent", "must be positive")
        if not 0 < self.corridor_width <= self.width:
            raise InvalidSpecError(
                "corridor_width", "must satisfy 0 < corridor_width <= width"
            )
        if self.corridor_length <= 0:
            raise InvalidSpecError("corridor_length", "must be positive")
        if self.taper_height < 0:
            raise InvalidSpecError("taper_height", "must be >= 0")
        if self.kind is DomainKind.TYPE2 and self.taper_height != 0:
            raise InvalidSpecError(
                "taper_height", "must be 0 for type 2 (use type 3 for a taper)"
            )
        if self.kind in (DomainKind.TYPE2, DomainKind.TYPE3):
            if self.south_length <= 0:
                raise InvalidSpecError("south_length", "must be positive")
            top = self.south_length + self.corridor_length + self.taper_height
            if top >= self.north_extent:
                raise InvalidSpecError(
                    "north_extent",
                    "south_length + corridor_length + taper_height must be "
                    "below north_extent",
                )


class DomainGeometry:
    """Point-membership view of a validated :class:`DomainSpec`."""

    def __init__(self, spec: DomainSpec):
        self.spec = spec

    @property
    def bounding_box(self) -> tuple[float, float, float, float]:
        return (0.0, self.spec.width, 0.0, self.spec.north_extent)

    def half_width_at(self, x2):
        """Half-width of the domain about the centerline at latitude x2.

        Accepts scalars or arrays. Values outside [0, north_extent] get 0.
        """
        s = self.spec
        x2 = np.asarray(x2, dtype=float)
        full = s.width / 2.0
        if s.kind is DomainKind.TYPE1:
            hw = np.full_like(x2, full)
        else:
            y0 = s.south_length
            y1 = y0 + s.corridor_length
            y2 = y1 + s.taper_height
            narrow = s.corridor_width / 2.0
            hw = np.full_like(x2, full)
            in_corridor = (x2 > y0) & (x2 <= y1)
            hw = np.where(in_corridor, narrow, hw)
            if s.taper_height > 0:
                in_taper = (x2 > y1) & (x2 <= y2)
                frac = np.clip((x2 - y1) / s.taper_height, 0.0, 1.0)
                hw = np.where(in_taper, narrow + (full - narrow) * frac, hw)
        hw = np.where((x2 < 0) | (x2 > s.north_extent), 0.0, hw)
        if hw.ndim == 0:
            return float(hw)
        return hw

    def contains(self, x1, x2):
        """Closed-set membership test; scalars or same-shape arrays."""
        s = self.spec
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        inside_y = (x2 >= 0.0) & (x2 <= s.north_extent)
        result = inside_y & (np.abs(x1 - s.width / 2.0) <= self.half_width_at(x2))
        if result.ndim == 0:
            return bool(result)
        return result

    def perimeter(self) -> float:
        """Exact boundary length, used by rasterization-error bounds."""
        s = self.spec
        if s.kind is DomainKind.TYPE1:
            return 2.0 * (s.width + s.north_extent)
        notch = (s.width - s.corridor_width) / 2.0
        side = (
            s.south_length
            + notch  # ledge at the corridor entrance
            + s.corridor_length
            + math.hypot(s.taper_height, notch)  # exit ledge or taper side
            + (s.north_extent - s.south_length - s.corridor_length - s.taper_height)
        )
        return 2.0 * side + 2.0 * s.width


def build_domain(spec: DomainSpec) -> DomainGeometry:
    spec.validate()
    return DomainGeometry(spec)


@dataclass
class Grid:
    """Uniform cell-centered raster of a domain.

    ``mask[j, i]`` is True for active cells; ``xc[i]``, ``yc[j]`` are cell
    centers. ``row_runs`` / ``col_runs`` list maximal contiguous active
    spans as (row_or_col_index, start, stop_exclusive) used by the
    direction-split diffusion solver.
    """

    spec: DomainSpec
    dx: float
    nx: int
    ny: int
    mask: np.ndarray
    xc: np.ndarray
    yc: np.ndarray
    row_runs: np.ndarray = field(repr=False, default=None)
    col_runs: np.ndarray = field(repr=False, default=None)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dx

    @property
    def n_active(self) -> int:
        return int(self.mask.sum())

    @property
    def active_area(self) -> float:
        return self.n_active * self.cell_area

    def new_field(self, fill: float = 0.0) -> np.ndarray:
        u = np.zeros((self.ny, self.nx))
        if fill != 0.0:
            u[self.mask] = fill
        return u

    def cell_containing(self, x1: float, x2: float) -> tuple[int, int]:
        """(j, i) index of the cell containing a point (floor rule)."""
        i = min(int(x1 / self.dx), self.nx - 1)
        j = min(int(x2 / self.dx), self.ny - 1)
        return j, i

    def to_csv(self, path) -> None:
        """Debug dump of the active mask: one row per cell."""
        with open(path, "w") as f:
            f.write("i,j,x1,x2,active\n")
            for j in range(self.ny):
                for i in range(self.nx):
                    f.write(
                        f"{i},{j},{self.xc[i]!r},{self.yc[j]!r},"
                        f"{int(self.mask[j, i])}\n"
                    )


def _runs_along_rows(mask: np.ndarray) -> np.ndarray:
    """Maximal contiguous True spans per row as (row, start, stop)."""
    ny, nx = mask.shape
    padded = np.zeros((ny, nx + 2), dtype=np.int8)
    padded[:, 1:-1] = mask
    diff = np.diff(padded, axis=1)
    starts = np.argwhere(diff == 1)
    stops = np.argwhere(diff == -1)
    # argwhere is row-major, so starts/stops pair up in order
    out = np.empty((len(starts), 3), dtype=np.int64)
    out[:, 0] = starts[:, 0]
    out[:, 1] = starts[:, 1]
    out[:, 2] = stops[:, 1]
    return out


def rasterize(geometry: DomainGeometry, dx: float) -> Grid:
    """Raster the domain with cell-center membership.

    A cell is active iff its center lies inside the domain. Raises
    :class:`ResolutionError` when fewer than 4 cells span the corridor.
    """
    if dx <= 0:
        raise InvalidSpecError("dx", "must be positive")
    spec = geometry.spec
    if spec.corridor_width / dx < MIN_CELLS_ACROSS_CORRIDOR:
        raise ResolutionError(
            f"dx={dx} gives {spec.corridor_width / dx:.2f} cells across the "
            f"corridor; need >= {MIN_CELLS_ACROSS_CORRIDOR}"
        )
    nx = int(round(spec.width / dx))
    ny = int(round(spec.north_extent / dx))
    xc = (np.arange(nx) + 0.5) * dx
    yc = (np.arange(ny) + 0.5) * dx
    mask = geometry.contains(xc[None, :], yc[:, None])
    row_runs = _runs_along_rows(mask)
    col_runs = _runs_along_rows(mask.T)
    return Grid(
        spec=spec, dx=dx, nx=nx, ny=ny, mask=mask, xc=xc, yc=yc,
        row_runs=row_runs, col_runs=col_runs,
    )


def region_mask(grid: Grid, y_low: float, y_high: float) -> np.ndarray:
    """Active cells whose centers have x2 strictly inside (y_low, y_high)."""
    if not y_low < y_high:
        raise InvalidSpecError("y_low", "must satisfy y_low < y_high")
    band = (grid.yc > y_low) & (grid.yc < y_high)
    return grid.mask & band[:, None]
