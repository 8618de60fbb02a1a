"""Uniform cell-centered grids, scalar fields, and scenario definitions.

The domain is an interval (0, L) or an axis-aligned rectangle (0, Lx) x (0, Ly),
discretized into equal cells with values stored at cell centers.  In 2D the flat
storage order is row-major by y then x: flat index k = iy * nx + ix.  Spatial
averages reduce to plain arithmetic means of cell values (midpoint quadrature),
which keeps every conservation identity in the package exact at the discrete
level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from .errors import InvalidConfigError

__all__ = [
    "Grid",
    "ScalarField",
    "DiffusionSpec",
    "Constant",
    "Cosine",
    "GaussBump",
    "Table",
    "CoefficientSpec",
    "Numerics",
    "ScenarioSpec",
    "Scenario",
    "build_grid",
    "sample_field",
    "mean",
    "integrate",
    "linf_norm",
    "min_value",
    "make_field",
]


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on an interval or rectangle.

    ``cells`` and ``lengths`` are per-axis tuples; 1D grids use 1-tuples.
    Cell centers sit at (i + 1/2) * spacing along each axis.
    """

    lengths: tuple[float, ...]
    cells: tuple[int, ...]

    def __post_init__(self):
        if len(self.lengths) not in (1, 2) or len(self.cells) != len(self.lengths):
            raise InvalidConfigError(
                f"grid must be 1D or 2D with matching lengths/cells, "
                f"got lengths={self.lengths}, cells={self.cells}"
            )
        for L in self.lengths:
            if not (L > 0 and math.isfinite(L)):
                raise InvalidConfigError(f"grid lengths must be positive, got {self.lengths}")
        for n in self.cells:
            if n < 2:
                raise InvalidConfigError(f"need at least 2 cells per axis, got {self.cells}")

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.cells))

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.cells))

    @property
    def shape(self) -> tuple[int, ...]:
        """Shape for reshaping flat values: (n,) in 1D, (ny, nx) in 2D."""
        if self.dim == 1:
            return (self.cells[0],)
        return (self.cells[1], self.cells[0])

    @property
    def volume(self) -> float:
        """Measure of the whole domain."""
        return float(np.prod(self.lengths))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_centers(self, axis: int) -> np.ndarray:
        h = self.spacing[axis]
        return (np.arange(self.cells[axis]) + 0.5) * h

    def centers(self) -> tuple[np.ndarray, ...]:
        """Flat per-axis center coordinates, aligned with field storage order."""
        if self.dim == 1:
            return (self.axis_centers(0),)
        xx, yy = np.meshgrid(self.axis_centers(0), self.axis_centers(1))
        return (xx.ravel(), yy.ravel())


def build_grid(lengths: Union[float, Sequence[float]], cells: Union[int, Sequence[int]]) -> Grid:
    """Build a uniform grid from scalar or per-axis lengths and cell counts."""
    if np.isscalar(lengths):
        lengths = (float(lengths),)
    else:
        lengths = tuple(float(v) for v in lengths)
    if np.isscalar(cells):
        cells = (int(cells),)
    else:
        cells = tuple(int(v) for v in cells)
    if len(cells) == 1 and len(lengths) == 2:
        cells = (cells[0], cells[0])
    return Grid(lengths=lengths, cells=cells)


@dataclass(frozen=True)
class ScalarField:
    """Cell values of a scalar quantity on a grid.  Immutable after construction."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape == self.grid.shape:
            values = values.ravel()
        if values.shape != (self.grid.n_cells,):
            raise InvalidConfigError(
                f"field has {values.size} values for a grid of {self.grid.n_cells} cells"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidConfigError("field values must all be finite")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def as_grid_array(self) -> np.ndarray:
        """Values reshaped to the grid shape ((n,) or (ny, nx))."""
        return self.values.reshape(self.grid.shape)

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, values)


def make_field(grid: Grid, values) -> ScalarField:
    """Field from an array, or a constant broadcast to every cell."""
    if np.isscalar(values):
        values = np.full(grid.n_cells, float(values))
    return ScalarField(grid, values)


def mean(f: ScalarField) -> float:
    """Spatial average: arithmetic mean of cell values (exact midpoint quadrature)."""
    return float(f.values.mean())


def integrate(f: ScalarField) -> float:
    """Integral over the domain: mean times domain measure."""
    return mean(f) * f.grid.volume


def linf_norm(f: ScalarField) -> float:
    return float(np.abs(f.values).max())


def min_value(f: ScalarField) -> float:
    return float(f.values.min())


# ---------------------------------------------------------------------------
# Coefficient specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Constant:
    """Spatially constant coefficient."""

    value: float

    kind = "constant"

    def __call__(self, coords: tuple[np.ndarray, ...]) -> np.ndarray:
        return np.full_like(coords[0], self.value)

    def to_dict(self) -> dict:
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class Cosine:
    """base + amp * prod_axes cos(2*pi*freq_axis * coordinate).

    With an integer frequency on a unit axis the cell-centered samples cancel
    exactly, so the field's spatial average is ``base``.
    """

    base: float
    amp: float
    freq: tuple[float, ...]

    kind = "cosine"

    def __init__(self, base: float, amp: float, freq):
        object.__setattr__(self, "base", float(base))
        object.__setattr__(self, "amp", float(amp))
        freq = (float(freq),) if np.isscalar(freq) else tuple(float(v) for v in freq)
        object.__setattr__(self, "freq", freq)

    def __call__(self, coords):
        freq = self.freq if len(self.freq) == len(coords) else self.freq * len(coords)
        out = np.full_like(coords[0], self.amp)
        for c, f in zip(coords, freq):
            out *= np.cos(2.0 * np.pi * f * c)
        return self.base + out

    def to_dict(self) -> dict:
        freq = self.freq[0] if len(self.freq) == 1 else list(self.freq)
        return {"kind": "cosine", "base": self.base, "amp": self.amp, "freq": freq}


@dataclass(frozen=True)
class GaussBump:
    """base + amp * exp(-|x - center|^2 / (2 width^2)), radially in 2D."""

    base: float
    amp: float
    center: tuple[float, ...]
    width: float

    kind = "gauss_bump"

    def __init__(self, base: float, amp: float, center, width: float):
        object.__setattr__(self, "base", float(base))
        object.__setattr__(self, "amp", float(amp))
        center = (float(center),) if np.isscalar(center) else tuple(float(v) for v in center)
        object.__setattr__(self, "center", center)
        if width <= 0:
            raise InvalidConfigError("gauss_bump width must be positive")
        object.__setattr__(self, "width", float(width))

    def __call__(self, coords):
        center = self.center if len(self.center) == len(coords) else self.center * len(coords)
        r2 = np.zeros_like(coords[0])
        for c, c0 in zip(coords, center):
            r2 += (c - c0) ** 2
        return self.base + self.amp * np.exp(-r2 / (2.0 * self.width**2))

    def to_dict(self) -> dict:
        center = self.center[0] if len(self.center) == 1 else list(self.center)
        return {
            "kind": "gauss_bump",
            "base": self.base,
            "amp": self.amp,
            "center": center,
            "width": self.width,
        }


@dataclass(frozen=True)
class Table:
    """Tabulated coefficient, sampled piecewise-constant per table cell.

    ``coords`` holds per-axis sample coordinates (strictly increasing); 2D
    tables are tensor products stored row-major by y then x.  Resampling onto
    the grid the table was written from reproduces it exactly.
    """

    coords: tuple[tuple[float, ...], ...]
    values: tuple[float, ...]

    kind = "table"

    def __init__(self, coords, values):
        coords = tuple(tuple(float(c) for c in axis) for axis in coords)
        values = tuple(float(v) for v in values)
        n_expected = int(np.prod([len(axis) for axis in coords]))
        if len(values) != n_expected:
            raise InvalidConfigError(
                f"table has {len(values)} values but coordinates imply {n_expected}"
            )
        for axis in coords:
            if len(axis) == 0 or np.any(np.diff(axis) <= 0):
                raise InvalidConfigError("table coordinates must be strictly increasing")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "values", values)

    def __call__(self, coords):
        if len(coords) != len(self.coords):
            raise InvalidConfigError(
                f"table is {len(self.coords)}D but the grid is {len(coords)}D"
            )
        # nearest-cell lookup: split at midpoints between consecutive samples
        idx = []
        for axis_coords, pts in zip(self.coords, coords):
            axis_arr = np.asarray(axis_coords)
            edges = 0.5 * (axis_arr[1:] + axis_arr[:-1])
            idx.append(np.searchsorted(edges, pts))
        table = np.asarray(self.values)
        if len(self.coords) == 1:
            return table[idx[0]]
        nx = len(self.coords[0])
        return table[idx[1] * nx + idx[0]]

    def to_dict(self) -> dict:
        return {
            "kind": "table",
            "coords": [list(axis) for axis in self.coords],
            "values": list(self.values),
        }


CoefficientSpec = Union[Constant, Cosine, GaussBump, Table]

_SPEC_KINDS = {"constant": Constant, "cosine": Cosine, "gauss_bump": GaussBump, "table": Table}


def spec_from_dict(d: dict) -> CoefficientSpec:
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in _SPEC_KINDS:
        raise InvalidConfigError(f"unknown coefficient kind {kind!r}")
    try:
        return _SPEC_KINDS[kind](**d)
    except TypeError as exc:
        raise InvalidConfigError(f"bad parameters for coefficient kind {kind!r}: {exc}") from exc


def sample_field(
    spec: CoefficientSpec,
    grid: Grid,
    require: str | None = None,
    name: str = "field",
) -> ScalarField:
    """Sample a coefficient spec at the grid's cell centers.

    ``require`` enforces the sign constraint of the field's role:
    "positive" for rates and susceptible data, "nonnegative" for infectious
    data.  Violations raise :class:`InvalidConfigError` naming the field.
    """
    values = np.asarray(spec(grid.centers()), dtype=float)
    f = ScalarField(grid, values)
    if require == "positive" and min_value(f) <= 0.0:
        raise InvalidConfigError(
            f"{name} must be strictly positive everywhere, min sampled value is {min_value(f)}"
        )
    if require == "nonnegative" and min_value(f) < 0.0:
        raise InvalidConfigError(
            f"{name} must be non-negative everywhere, min sampled value is {min_value(f)}"
        )
    return f


# ---------------------------------------------------------------------------
# Diffusion tensors and scenarios
# ---------------------------------------------------------------------------

ELLIPTICITY_FLOOR = 1e-12


@dataclass(frozen=True)
class DiffusionSpec:
    """Axis-aligned diagonal diffusivity: one positive field per axis."""

    per_axis: tuple[ScalarField, ...]
    floor: float = ELLIPTICITY_FLOOR

    def __post_init__(self):
        if len(self.per_axis) not in (1, 2):
            raise InvalidConfigError("diffusivity needs one field per axis (1 or 2 axes)")
        grid = self.per_axis[0].grid
        if len(self.per_axis) != grid.dim:
            raise InvalidConfigError(
                f"{len(self.per_axis)} diffusivity axes for a {grid.dim}D grid"
            )
        for axis_field in self.per_axis:
            if axis_field.grid != grid:
                raise InvalidConfigError("diffusivity fields must share one grid")
            if min_value(axis_field) < self.floor:
                raise InvalidConfigError(
                    f"diffusivity {min_value(axis_field)} below ellipticity floor {self.floor}"
                )

    @property
    def grid(self) -> Grid:
        return self.per_axis[0].grid

    @classmethod
    def isotropic(cls, grid: Grid, value_or_spec, floor: float = ELLIPTICITY_FLOOR) -> "DiffusionSpec":
        """Same diffusivity field along every axis, from a constant or a spec."""
        if np.isscalar(value_or_spec):
            f = make_field(grid, float(value_or_spec))
        else:
            f = sample_field(value_or_spec, grid, name="diffusivity")
        return cls(per_axis=(f,) * grid.dim, floor=floor)

    @classmethod
    def from_specs(
        cls, grid: Grid, specs: Sequence[CoefficientSpec], floor: float = ELLIPTICITY_FLOOR
    ) -> "DiffusionSpec":
        if len(specs) == 1:
            return cls.isotropic(grid, specs[0], floor)
        fields = tuple(sample_field(s, grid, name="diffusivity") for s in specs)
        return cls(per_axis=fields, floor=floor)


@dataclass(frozen=True)
class Numerics:
    """Solver configuration with package defaults."""

    dt: float | None = None  # None: 1e-3 / max(alpha * S0)
    t_max: float = 1e4
    tol_i: float = 1e-10
    tol_s: float = 1e-12
    eigen_tol: float = 1e-10
    eigen_max_iter: int = 10_000
    ellipticity_floor: float = ELLIPTICITY_FLOOR

    def __post_init__(self):
        if self.dt is not None and self.dt <= 0:
            raise InvalidConfigError("dt must be positive")
        for name in ("t_max", "tol_i", "tol_s", "eigen_tol"):
            if getattr(self, name) <= 0:
                raise InvalidConfigError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return {
            "dt": self.dt,
            "t_max": self.t_max,
            "tol_i": self.tol_i,
            "tol_s": self.tol_s,
            "eigen_tol": self.eigen_tol,
            "eigen_max_iter": self.eigen_max_iter,
            "ellipticity_floor": self.ellipticity_floor,
        }


@dataclass(frozen=True)
class ScenarioSpec:
    """Declarative description of a model instance, prior to sampling.

    This is the canonical, hashable form: scenario files parse into it and
    scenario hashes are computed from it.
    """

    lengths: tuple[float, ...]
    cells: tuple[int, ...]
    alpha: CoefficientSpec
    mu: CoefficientSpec
    s0: CoefficientSpec
    i0: CoefficientSpec
    d_s: tuple[CoefficientSpec, ...]
    d_i: tuple[CoefficientSpec, ...]
    numerics: Numerics = field(default_factory=Numerics)

    def to_dict(self) -> dict:
        return {
            "domain": {"lengths": list(self.lengths), "cells": list(self.cells)},
            "coefficients": {
                "alpha": self.alpha.to_dict(),
                "mu": self.mu.to_dict(),
                "d_S": [s.to_dict() for s in self.d_s],
                "d_I": [s.to_dict() for s in self.d_i],
            },
            "initial": {"S0": self.s0.to_dict(), "I0": self.i0.to_dict()},
            "numerics": self.numerics.to_dict(),
        }

    def with_cells(self, cells) -> "ScenarioSpec":
        cells = (int(cells),) * len(self.cells) if np.isscalar(cells) else tuple(cells)
        return replace(self, cells=cells)

    def realize(self) -> "Scenario":
        """Sample every coefficient onto the grid and validate positivity."""
        grid = build_grid(self.lengths, self.cells)
        floor = self.numerics.ellipticity_floor
        return Scenario(
            grid=grid,
            alpha=sample_field(self.alpha, grid, require="positive", name="alpha"),
            mu=sample_field(self.mu, grid, require="positive", name="mu"),
            s0=sample_field(self.s0, grid, require="positive", name="S0"),
            i0=sample_field(self.i0, grid, require="nonnegative", name="I0"),
            diff_s=DiffusionSpec.from_specs(grid, self.d_s, floor),
            diff_i=DiffusionSpec.from_specs(grid, self.d_i, floor),
            numerics=self.numerics,
            spec=self,
        )


@dataclass(frozen=True)
class Scenario:
    """A model instance realized on a grid: rates, diffusivities, initial data."""

    grid: Grid
    alpha: ScalarField
    mu: ScalarField
    s0: ScalarField
    i0: ScalarField
    diff_s: DiffusionSpec
    diff_i: DiffusionSpec
    numerics: Numerics = field(default_factory=Numerics)
    spec: ScenarioSpec | None = None

    def __post_init__(self):
        for name, f in (("alpha", self.alpha), ("mu", self.mu), ("s0", self.s0), ("i0", self.i0)):
            if f.grid != self.grid:
                raise InvalidConfigError(f"{name} lives on a different grid than the scenario")
        for name, f in (("alpha", self.alpha), ("mu", self.mu), ("s0", self.s0)):
            if min_value(f) <= 0:
                raise InvalidConfigError(f"{name} must be strictly positive on the grid")
        if min_value(self.i0) < 0:
            raise InvalidConfigError("i0 must be non-negative on the grid")
        if self.diff_s.grid != self.grid or self.diff_i.grid != self.grid:
            raise InvalidConfigError("diffusivities live on a different grid than the scenario")

    def default_dt(self) -> float:
        """Time step from the reaction scale: 1e-3 / max(alpha * S0)."""
        if self.numerics.dt is not None:
            return self.numerics.dt
        return 1e-3 / float(np.max(self.alpha.values * self.s0.values))
