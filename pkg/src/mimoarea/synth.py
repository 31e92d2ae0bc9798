"""Spatially consistent channel map synthesis.

Two generators are provided: a free-space line-of-sight model (inverse
distance amplitude with spherical phase) and a filtered scattering model
built from a lattice of independently drawn channel vectors smoothed by
a truncated Gaussian kernel. Mixed scenes are composed cell-by-cell from
one map of each kind.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.signal import convolve2d

from .errors import InvalidParams, ShapeMismatch, ZeroDistance

SPEED_OF_LIGHT = 299792458.0  # m/s, exact


@dataclass(frozen=True)
class GridSpec:
    """Regular 2D grid of candidate user positions.

    Cell (i, j) sits at (x0 + i*delta, y0 + j*delta). Flattened row order
    is row-major over (i, j): row = i * ny + j.
    """

    nx: int
    ny: int
    delta: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise InvalidParams(f"grid needs nx, ny >= 1, got {self.nx}x{self.ny}")
        if not self.delta > 0:
            raise InvalidParams(f"grid pitch must be positive, got {self.delta}")

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def area_m2(self) -> float:
        return self.n_cells * self.delta ** 2

    def cell_to_row(self, i: int, j: int) -> int:
        return i * self.ny + j

    def row_to_cell(self, row: int) -> tuple[int, int]:
        return divmod(row, self.ny)

    def cell_position(self, i, j) -> np.ndarray:
        x0, y0 = self.origin
        return np.stack([x0 + np.asarray(i) * self.delta,
                         y0 + np.asarray(j) * self.delta], axis=-1)

    def positions(self) -> np.ndarray:
        """All cell positions in meters, shape (nx*ny, 2), row-major."""
        ii, jj = np.meshgrid(np.arange(self.nx), np.arange(self.ny), indexing="ij")
        return self.cell_position(ii.ravel(), jj.ravel())

    def nearest_cell(self, x: float, y: float) -> tuple[int, int]:
        """Grid cell whose center is closest to (x, y) in meters."""
        x0, y0 = self.origin
        i = int(round((x - x0) / self.delta))
        j = int(round((y - y0) / self.delta))
        return min(max(i, 0), self.nx - 1), min(max(j, 0), self.ny - 1)


@dataclass(frozen=True)
class CarrierSpec:
    """Carrier frequency; wavelength follows as c0/fc."""

    fc: float

    def __post_init__(self):
        if not self.fc > 0:
            raise InvalidParams(f"carrier frequency must be positive, got {self.fc}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.fc

    @classmethod
    def from_wavelength(cls, lam: float) -> "CarrierSpec":
        if not lam > 0:
            raise InvalidParams(f"wavelength must be positive, got {lam}")
        return cls(fc=SPEED_OF_LIGHT / lam)


@dataclass(frozen=True)
class ArrayGeometry:
    """Transmit array as explicit antenna coordinates in meters."""

    positions: np.ndarray  # (M, 2)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
            raise InvalidParams(f"antenna positions must be (M, 2), got {pos.shape}")
        if len(np.unique(pos, axis=0)) != pos.shape[0]:
            raise InvalidParams("antenna positions must be pairwise distinct")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def m(self) -> int:
        return self.positions.shape[0]

    @classmethod
    def uniform_linear(cls, m: int, spacing: float,
                       center: tuple[float, float] = (0.0, 0.0),
                       axis: str = "x") -> "ArrayGeometry":
        """Uniform linear array of m elements centered at `center`."""
        offs = (np.arange(m) - (m - 1) / 2.0) * spacing
        cx, cy = center
        if axis == "x":
            pos = np.stack([cx + offs, np.full(m, cy)], axis=1)
        elif axis == "y":
            pos = np.stack([np.full(m, cx), cy + offs], axis=1)
        else:
            raise InvalidParams(f"axis must be 'x' or 'y', got {axis!r}")
        return cls(pos)


def default_edge_array(grid: GridSpec, carrier: CarrierSpec, m: int) -> ArrayGeometry:
    """Half-wavelength linear array centered below the grid's lower edge.

    The array sits one grid pitch below the first cell row so no antenna
    coincides with a grid position.
    """
    x0, y0 = grid.origin
    cx = x0 + (grid.nx - 1) * grid.delta / 2.0
    return ArrayGeometry.uniform_linear(m, carrier.wavelength / 2.0,
                                        center=(cx, y0 - grid.delta))


@dataclass(frozen=True)
class ChannelMap:
    """Complex channel coefficients on a grid: one row per cell, one column
    per antenna. Immutable once constructed."""

    grid: GridSpec
    carrier: CarrierSpec
    coeffs: np.ndarray  # (nx*ny, M) complex128
    source: str = "measured"
    seed: Optional[int] = None
    params: Optional[dict] = None

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim != 2 or c.shape[0] != self.grid.n_cells or c.shape[1] < 1:
            raise InvalidParams(
                f"coeffs must be ({self.grid.n_cells}, M>=1), got {c.shape}")
        if not np.all(np.isfinite(c.view(np.float64))):
            raise InvalidParams("channel coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def m(self) -> int:
        return self.coeffs.shape[1]

    @property
    def n_positions(self) -> int:
        return self.coeffs.shape[0]

    def row(self, i: int, j: int) -> np.ndarray:
        """Channel vector of cell (i, j)."""
        if not (0 <= i < self.grid.nx and 0 <= j < self.grid.ny):
            raise InvalidParams(f"cell ({i}, {j}) outside {self.grid.nx}x{self.grid.ny} grid")
        return self.coeffs[self.grid.cell_to_row(i, j)]

    def with_antennas(self, m: int) -> "ChannelMap":
        """Restrict to the first m antenna columns (sweep nesting rule)."""
        if not (1 <= m <= self.m):
            raise InvalidParams(f"cannot select {m} antennas from {self.m}")
        if m == self.m:
            return self
        return ChannelMap(self.grid, self.carrier, self.coeffs[:, :m],
                          source=self.source, seed=self.seed, params=self.params)


@dataclass(frozen=True)
class NlosParams:
    """Parameters of the filtered scattering model.

    sx, sy   lattice size of independently drawn channel vectors
    ups      upsampling factor between lattice pitch and grid pitch (even, >= 2)
    alpha    average path-loss scale applied to every draw
    sigma2   complex-Gaussian variance per antenna
    seed     PRNG seed; one substream per lattice point, ordered row-major
    """

    sx: int
    sy: int
    ups: int
    alpha: float = 1.0
    sigma2: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.sx < 1 or self.sy < 1:
            raise InvalidParams(f"lattice needs sx, sy >= 1, got {self.sx}x{self.sy}")
        if self.ups < 2 or self.ups % 2 != 0:
            raise InvalidParams(f"upsampling factor must be an even integer >= 2, got {self.ups}")
        if not self.alpha > 0:
            raise InvalidParams(f"alpha must be positive, got {self.alpha}")
        if not self.sigma2 > 0:
            raise InvalidParams(f"sigma2 must be positive, got {self.sigma2}")

    def as_dict(self) -> dict:
        return {"sx": self.sx, "sy": self.sy, "ups": self.ups,
                "alpha": self.alpha, "sigma2": self.sigma2, "seed": self.seed}


def synth_los(grid: GridSpec, carrier: CarrierSpec, array: ArrayGeometry) -> ChannelMap:
    """Free-space channel map: (lam / 4 pi d) * exp(j 2 pi d / lam) per
    position/antenna pair, d the Euclidean distance between them."""
    lam = carrier.wavelength
    pos = grid.positions()                       # (N, 2)
    ant = array.positions                        # (M, 2)
    diff = pos[:, None, :] - ant[None, :, :]
    d = np.sqrt((diff ** 2).sum(axis=2))         # (N, M)
    if np.any(d == 0.0):
        n_bad = int((d == 0.0).sum())
        raise ZeroDistance(f"{n_bad} grid position(s) coincide with an antenna")
    coeffs = (lam / (4.0 * np.pi * d)) * np.exp(2j * np.pi * d / lam)
    return ChannelMap(grid, carrier, coeffs, source="synthetic-los")


def scattering_kernel(ups: int) -> np.ndarray:
    """Truncated Gaussian smoothing kernel on the upsampled grid.

    Entry at offset (dx, dy) is exp(-(dx^2 + dy^2) / ups^2) for
    |dx|, |dy| <= ups/2, making a (ups+1) x (ups+1) tap array.
    """
    half = ups // 2
    off = np.arange(-half, half + 1, dtype=float)
    return np.exp(-(off[:, None] ** 2 + off[None, :] ** 2) / float(ups * ups))


def stationary_cells(params: NlosParams) -> tuple[np.ndarray, np.ndarray]:
    """Grid cell indices carrying the lattice draws, per axis.

    Lattice point s maps to cell s*ups + ups/2, centered in its block.
    """
    half = params.ups // 2
    cx = np.arange(params.sx) * params.ups + half
    cy = np.arange(params.sy) * params.ups + half
    return cx, cy


def stationary_vectors(params: NlosParams, m: int) -> np.ndarray:
    """Draw the (sx*sy, m) lattice of i.i.d. complex-Gaussian channel vectors.

    Lattice point p (row-major over (sx, sy)) uses the PCG64 substream
    seeded with (seed, p); antenna q consumes that substream's draws
    2q and 2q+1 (real then imaginary part), so enlarging m extends each
    vector without changing earlier entries.
    """
    if m < 1:
        raise InvalidParams(f"antenna count must be >= 1, got {m}")
    scale = params.alpha * np.sqrt(params.sigma2 / 2.0)
    out = np.empty((params.sx * params.sy, m), dtype=np.complex128)
    for p in range(params.sx * params.sy):
        z = np.random.default_rng([params.seed, p]).standard_normal((m, 2))
        out[p] = scale * (z[:, 0] + 1j * z[:, 1])
    return out


def synth_nlos(params: NlosParams, m: int, carrier: CarrierSpec) -> ChannelMap:
    """Filtered scattering map on a (sx*ups) x (sy*ups) grid.

    The lattice draws are placed every `ups` cells (zero elsewhere) and
    every antenna layer is convolved with the truncated Gaussian kernel,
    zero padding at the map borders. Grid pitch is half a wavelength
    divided by the upsampling factor, so lattice points sit half a
    wavelength apart. Deterministic for a fixed seed.
    """
    nx, ny = params.sx * params.ups, params.sy * params.ups
    vectors = stationary_vectors(params, m)
    cx, cy = stationary_cells(params)
    kernel = scattering_kernel(params.ups)

    padded = np.zeros((nx, ny, m), dtype=np.complex128)
    padded[np.ix_(cx, cy)] = vectors.reshape(params.sx, params.sy, m)
    out = np.empty_like(padded)
    for q in range(m):
        out[:, :, q] = convolve2d(padded[:, :, q], kernel, mode="same", boundary="fill")

    delta = (carrier.wavelength / 2.0) / params.ups
    grid = GridSpec(nx=nx, ny=ny, delta=delta)
    return ChannelMap(grid, carrier, out.reshape(nx * ny, m),
                      source="synthetic-nlos", seed=params.seed,
                      params=params.as_dict())


MaskLike = Union[np.ndarray, Callable[[int, int], bool]]


def corner_mask(grid: GridSpec, min_i: int, min_j: int) -> np.ndarray:
    """Boolean (nx, ny) mask, True where i > min_i and j > min_j."""
    ii, jj = np.meshgrid(np.arange(grid.nx), np.arange(grid.ny), indexing="ij")
    return (ii > min_i) & (jj > min_j)


def compose_mixed(los: ChannelMap, nlos: ChannelMap, nlos_mask: MaskLike) -> ChannelMap:
    """Cell-wise selection: rows from `nlos` where the mask is True, rows
    from `los` elsewhere. Both maps must share grid and antenna count."""
    if los.grid != nlos.grid:
        raise ShapeMismatch(f"grids differ: {los.grid} vs {nlos.grid}")
    if los.m != nlos.m:
        raise ShapeMismatch(f"antenna counts differ: {los.m} vs {nlos.m}")
    grid = los.grid
    if callable(nlos_mask):
        mask = np.array([[bool(nlos_mask(i, j)) for j in range(grid.ny)]
                         for i in range(grid.nx)])
    else:
        mask = np.asarray(nlos_mask, dtype=bool)
        if mask.shape != (grid.nx, grid.ny):
            raise ShapeMismatch(
                f"mask shape {mask.shape} does not match grid {(grid.nx, grid.ny)}")
    coeffs = np.where(mask.reshape(-1, 1), nlos.coeffs, los.coeffs)
    return ChannelMap(grid, los.carrier, coeffs, source="synthetic-mixed")
