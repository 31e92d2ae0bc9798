"""Rank-coherent spatial region detection.

Regions are grown from seed cells by an outward square spiral: every
visited cell's channel vector is kept only if it does not push the
effective rank of the accumulated channel matrix past a limit. Grown
regions are classified by their circular-to-line ratio: compact blobs
(scattering behavior) score high, elongated beams score low.
"""

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .errors import (InsufficientUnclaimedCells, InvalidParams,
                     NumericalFailure, OutOfBounds, SeedClaimed)
from .synth import ChannelMap

LABEL_NLOS = "NLoS"
LABEL_LOS = "LoS"


@dataclass(frozen=True)
class RankPolicy:
    """Effective-rank test: singular values whose squared magnitude exceeds
    `power_fraction` of the total squared sum are counted; a region may not
    exceed `rank_limit` of them."""

    power_fraction: float = 0.01
    rank_limit: int = 1

    def __post_init__(self):
        if not 0.0 < self.power_fraction < 1.0:
            raise InvalidParams(
                f"power_fraction must be in (0, 1), got {self.power_fraction}")
        if self.rank_limit < 1:
            raise InvalidParams(f"rank_limit must be >= 1, got {self.rank_limit}")


@dataclass(frozen=True)
class Region:
    """A set of grid cells accepted by one spiral growth."""

    cells: frozenset
    seed_cell: tuple[int, int]
    area_m2: float
    perimeter_m: float
    eta: float

    @property
    def n_cells(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class RegionSet:
    """Disjoint regions with their shape-based labels."""

    regions: tuple
    labels: tuple
    eta_threshold: float

    def __post_init__(self):
        if len(self.regions) != len(self.labels):
            raise InvalidParams("one label per region required")


def _count_significant(power: np.ndarray, power_fraction: float) -> int:
    power = np.clip(power, 0.0, None)
    total = power.sum()
    return int(np.count_nonzero(power > power_fraction * total))


def effective_rank(htmp: np.ndarray, policy: RankPolicy = RankPolicy()) -> int:
    """Count singular values of `htmp` whose squared value carries more than
    `policy.power_fraction` of the total squared-singular-value power."""
    htmp = np.asarray(htmp, dtype=np.complex128)
    if htmp.ndim != 2 or htmp.shape[0] < 1 or htmp.shape[1] < 1:
        raise InvalidParams(f"need a nonempty 2D matrix, got shape {htmp.shape}")
    if not np.all(np.isfinite(htmp.view(np.float64))):
        raise InvalidParams("matrix entries must be finite")
    try:
        s = np.linalg.svd(htmp, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"singular value computation failed: {exc}") from exc
    return _count_significant(s ** 2, policy.power_fraction)


def circularity(cells, delta: float) -> float:
    """Circular-to-line ratio 4*pi*Area/Perimeter^2 of a cell set, clamped
    to [0, 1].

    Area counts cells times delta^2; the perimeter counts unit edges between
    a member cell and a non-member 4-neighbor, times delta. The ratio is
    invariant to delta and translation.
    """
    cells = set(map(tuple, cells))
    if not cells:
        raise InvalidParams("circularity needs a nonempty cell set")
    edges = 0
    for (i, j) in cells:
        for (di, dj) in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            if (i + di, j + dj) not in cells:
                edges += 1
    area = len(cells) * delta * delta
    perimeter = edges * delta
    eta = 4.0 * np.pi * area / perimeter ** 2
    return float(min(max(eta, 0.0), 1.0))


def spiral_ring(seed: tuple[int, int], radius: int) -> Iterator[tuple[int, int]]:
    """Cells at Chebyshev distance `radius` from `seed`, starting due east
    and walking counter-clockwise (north first). Yields 8*radius cells."""
    i0, j0 = seed
    r = radius
    for t in range(0, r + 1):               # east edge, going north
        yield (i0 + r, j0 + t)
    for t in range(1, 2 * r + 1):           # north edge, going west
        yield (i0 + r - t, j0 + r)
    for t in range(1, 2 * r + 1):           # west edge, going south
        yield (i0 - r, j0 + r - t)
    for t in range(1, 2 * r + 1):           # south edge, going east
        yield (i0 - r + t, j0 - r)
    for t in range(1, r):                   # east edge again, up to start
        yield (i0 + r, j0 - r + t)


class _GramRankTracker:
    """Incremental effective rank of a growing row matrix.

    Maintains the M x M Gram matrix of the accepted rows; its eigenvalues
    are the squared singular values, so the significance count matches
    `effective_rank` on the same rows without refactoring them.
    """

    def __init__(self, m: int, power_fraction: float):
        self._gram = np.zeros((m, m), dtype=np.complex128)
        self._pf = power_fraction

    def rank_with(self, row: np.ndarray) -> int:
        candidate = self._gram + np.outer(row.conj(), row)
        try:
            lam = np.linalg.eigvalsh(candidate)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"eigenvalue computation failed: {exc}") from exc
        return _count_significant(lam, self._pf)

    def accept(self, row: np.ndarray) -> None:
        self._gram += np.outer(row.conj(), row)


def spiral_grow(chan_map: ChannelMap, seed_cell: tuple[int, int],
                policy: RankPolicy = RankPolicy(),
                claimed: Optional[np.ndarray] = None) -> Region:
    """Grow a region around `seed_cell` by outward spiral rings.

    Each unclaimed in-bounds cell on the current ring is tentatively added;
    it joins the region only if the accumulated channel matrix keeps an
    effective rank of at most `policy.rank_limit` (rejected cells stay
    rejected). Growth stops after the first full ring that adds no cell.
    `claimed` marks cells owned by other regions and is not modified.
    """
    grid = chan_map.grid
    si, sj = seed_cell
    if not (0 <= si < grid.nx and 0 <= sj < grid.ny):
        raise OutOfBounds(f"seed {seed_cell} outside {grid.nx}x{grid.ny} grid")
    if claimed is not None:
        claimed = np.asarray(claimed, dtype=bool)
        if claimed.shape != (grid.nx, grid.ny):
            raise InvalidParams(f"claimed mask shape {claimed.shape} does not "
                                f"match grid {(grid.nx, grid.ny)}")
        if claimed[si, sj]:
            raise SeedClaimed(f"seed {seed_cell} is already claimed")

    tracker = _GramRankTracker(chan_map.m, policy.power_fraction)
    members = []

    def try_cell(i: int, j: int) -> bool:
        row = chan_map.coeffs[grid.cell_to_row(i, j)]
        if tracker.rank_with(row) > policy.rank_limit:
            return False
        tracker.accept(row)
        members.append((i, j))
        return True

    try_cell(si, sj)  # a single row never exceeds rank 1, so the seed joins
    radius = 0
    while True:
        radius += 1
        added = 0
        for (i, j) in spiral_ring((si, sj), radius):
            if not (0 <= i < grid.nx and 0 <= j < grid.ny):
                continue
            if claimed is not None and claimed[i, j]:
                continue
            if try_cell(i, j):
                added += 1
        if added == 0:
            break

    cells = frozenset(members)
    eta = circularity(cells, grid.delta)
    perim_edges = 0
    for (i, j) in cells:
        for (di, dj) in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            if (i + di, j + dj) not in cells:
                perim_edges += 1
    return Region(cells=cells, seed_cell=(si, sj),
                  area_m2=len(cells) * grid.delta ** 2,
                  perimeter_m=perim_edges * grid.delta,
                  eta=eta)


def detect_regions(chan_map: ChannelMap, num_seeds: int,
                   policy: RankPolicy = RankPolicy(),
                   eta_threshold: float = 0.5,
                   seed: int = 0) -> RegionSet:
    """Grow `num_seeds` regions from randomly drawn unclaimed cells.

    Seeds are drawn one at a time, uniformly over the cells not yet claimed
    by earlier regions (claim-first: a cell belongs to the first region that
    accepted it). Each region is labeled NLoS when its circular-to-line
    ratio reaches `eta_threshold`, LoS otherwise. Deterministic per seed.
    """
    if num_seeds < 1:
        raise InvalidParams(f"num_seeds must be >= 1, got {num_seeds}")
    grid = chan_map.grid
    rng = np.random.default_rng(seed)
    claimed = np.zeros((grid.nx, grid.ny), dtype=bool)
    regions = []
    for _ in range(num_seeds):
        unclaimed = np.flatnonzero(~claimed.ravel())
        if unclaimed.size == 0:
            raise InsufficientUnclaimedCells(
                f"all {grid.n_cells} cells claimed after {len(regions)} regions")
        flat = int(rng.choice(unclaimed))
        seed_cell = (flat // grid.ny, flat % grid.ny)
        region = spiral_grow(chan_map, seed_cell, policy, claimed)
        for (i, j) in region.cells:
            claimed[i, j] = True
        regions.append(region)
    labels = tuple(LABEL_NLOS if reg.eta >= eta_threshold else LABEL_LOS
                   for reg in regions)
    return RegionSet(regions=tuple(regions), labels=labels,
                     eta_threshold=eta_threshold)


def region_table(region_set: RegionSet):
    """Flatten a RegionSet to (cell_i, cell_j, region_id, label) rows."""
    from .mapio import ResultTable
    rows = []
    for rid, (region, label) in enumerate(zip(region_set.regions,
                                              region_set.labels)):
        for (i, j) in sorted(region.cells):
            rows.append((i, j, rid, label))
    return ResultTable(columns=["cell_i", "cell_j", "region_id", "label"],
                       rows=rows)


def region_summary(region_set: RegionSet) -> dict:
    """Per-region shape metrics plus eta statistics grouped by label."""
    per_region = []
    for rid, (region, label) in enumerate(zip(region_set.regions,
                                              region_set.labels)):
        per_region.append({
            "region_id": rid,
            "seed_i": region.seed_cell[0],
            "seed_j": region.seed_cell[1],
            "n_cells": region.n_cells,
            "area_m2": region.area_m2,
            "perimeter_m": region.perimeter_m,
            "eta": region.eta,
            "label": label,
        })
    stats = {}
    for label in (LABEL_LOS, LABEL_NLOS):
        etas = [r["eta"] for r in per_region if r["label"] == label]
        stats[label] = {
            "count": len(etas),
            "eta_median": float(np.median(etas)) if etas else None,
            "eta_mean": float(np.mean(etas)) if etas else None,
        }
    return {
        "num_regions": len(per_region),
        "eta_threshold": region_set.eta_threshold,
        "per_region": per_region,
        "eta_stats": stats,
    }
