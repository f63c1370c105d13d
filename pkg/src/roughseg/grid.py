"""Grid construction and the pass-wise rough clustering phase.

The image is partitioned into grid_n x grid_n cells (floor-based spans, so
cell sizes differ by at most one row/column). Clustering then runs in
passes over whole cells:

  1. pick the unclustered pixel with the highest hue as the seed pixel
  2. score every unclustered cell: population count = pixels within
     theta_band of the seed, population-object ratio = count / density
  3. the unclustered cell with the highest ratio becomes the seed cell and
     opens a fresh cluster
  4. one sweep claims every unclustered cell whose ratio reaches the
     effective gamma for this pass
  5. repeat until no unclustered cell remains

Ties (equal hue, equal ratio) always resolve to the lowest raster /
row-major index, which makes the whole phase deterministic. Cells claimed
in a pass may contain pixels that individually fail the similarity test;
those are dealt with by boundary refinement, not here.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from roughseg import _kernels as K
from roughseg.colorspace import ClusteringParams, HsiImage, HsiPixel
from roughseg.exceptions import DataError, ParameterError
from roughseg.raster import ImageRaster

logger = logging.getLogger(__name__)


@dataclass
class GridCell:
    """One cell of the spatial partition and its per-pass scoring state."""

    row: int
    col: int
    pixel_indices: np.ndarray
    density: int
    population_count: int = 0
    population_object_ratio: float = 0.0
    cluster_id: int | None = None


class Grid:
    """Row-major list of cells plus flat index arrays for the kernels."""

    def __init__(
        self,
        width: int,
        height: int,
        grid_n: int,
        hsi: HsiImage,
        cells: list[GridCell],
        cell_pixels: np.ndarray,
        cell_starts: np.ndarray,
    ):
        self.width = width
        self.height = height
        self.grid_n = grid_n
        self.hsi = hsi
        self.cells = cells
        self.cell_pixels = cell_pixels
        self.cell_starts = cell_starts
        cell_of = np.empty(width * height, dtype=np.int32)
        for idx, cell in enumerate(cells):
            cell_of[cell.pixel_indices] = idx
        self.cell_of_pixel = cell_of

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def cell_index(self, row: int, col: int) -> int:
        return row * self.grid_n + col

    def cell(self, row: int, col: int) -> GridCell:
        return self.cells[self.cell_index(row, col)]

    def unclustered_indices(self) -> list[int]:
        return [k for k, cell in enumerate(self.cells) if cell.cluster_id is None]

    def has_unclustered(self) -> bool:
        return any(cell.cluster_id is None for cell in self.cells)

    def next_cluster_id(self) -> int:
        assigned = [cell.cluster_id for cell in self.cells if cell.cluster_id is not None]
        return max(assigned) + 1 if assigned else 0


@dataclass
class ClusterInfo:
    cluster_id: int
    seed_pixel: HsiPixel
    seed_pixel_index: int
    seed_cell: tuple[int, int]
    member_cells: list[tuple[int, int]]
    member_pixel_count: int


@dataclass
class PassRecord:
    """What one clustering pass did: its seed, threshold and claimed cells."""

    number: int
    seed_pixel_index: int
    seed_pixel: HsiPixel
    threshold: float
    cells_claimed: list[tuple[int, int]]


@dataclass
class ClusterMap:
    """Total per-pixel cluster assignment plus per-cluster bookkeeping."""

    width: int
    height: int
    assignment: np.ndarray
    clusters: list[ClusterInfo]
    pass_log: list[PassRecord] = field(default_factory=list)

    def pixels_of(self, cluster_id: int) -> np.ndarray:
        """Ascending indices of the pixels currently assigned to a cluster."""
        return np.nonzero(self.assignment == cluster_id)[0].astype(np.int32)


@dataclass
class PerfStats:
    """Structural size counters and per-phase wall times of one run."""

    n_cells: int
    k_seeds: int = 0
    q_border_cells: int = 0
    r_border_pixels: int = 0
    wall_times: dict[str, float] = field(default_factory=dict)


def build_grid(image: ImageRaster, grid_n: int, hsi: HsiImage | None = None) -> Grid:
    """Partition the raster into grid_n x grid_n cells with densities set.

    Cell (r, c) covers rows [floor(r H / n), floor((r+1) H / n)) and the
    matching column span; every pixel lands in exactly one cell.
    """
    if not 1 <= grid_n <= min(image.width, image.height):
        raise ParameterError(
            f"grid_n out of range: {grid_n} (image is {image.width}x{image.height})"
        )
    if hsi is None:
        hsi = HsiImage.from_raster(image)
    w, h, n = image.width, image.height, grid_n
    row_bounds = [(r * h) // n for r in range(n + 1)]
    col_bounds = [(c * w) // n for c in range(n + 1)]
    cells: list[GridCell] = []
    chunks: list[np.ndarray] = []
    starts = np.zeros(n * n + 1, dtype=np.int32)
    for r in range(n):
        ys = np.arange(row_bounds[r], row_bounds[r + 1], dtype=np.int32)
        for c in range(n):
            xs = np.arange(col_bounds[c], col_bounds[c + 1], dtype=np.int32)
            block = (ys[:, None] * w + xs[None, :]).ravel()
            chunks.append(block)
            starts[r * n + c + 1] = starts[r * n + c] + block.size
    flat = np.concatenate(chunks).astype(np.int32)
    for r in range(n):
        for c in range(n):
            k = r * n + c
            view = flat[starts[k] : starts[k + 1]]
            cells.append(GridCell(r, c, view, int(view.size)))
    return Grid(w, h, n, hsi, cells, flat, starts)


def select_seed_pixel(hsi: HsiImage, assignment: "ClusterMap | np.ndarray") -> int:
    """Unclustered pixel of maximum hue; ties go to the lowest raster index."""
    arr = assignment.assignment if isinstance(assignment, ClusterMap) else assignment
    idx = K.max_hue_index(hsi.h, arr)
    if idx < 0:
        raise DataError("all pixels already clustered")
    return int(idx)


def score_cells(grid: Grid, seed: HsiPixel, theta_band: float) -> Grid:
    """Recompute population counts and ratios of unclustered cells for a seed."""
    active = np.asarray(grid.unclustered_indices(), dtype=np.int32)
    if active.size == 0:
        return grid
    counts = K.population_counts(
        grid.hsi.h,
        grid.hsi.s,
        grid.hsi.i,
        grid.cell_pixels,
        grid.cell_starts,
        active,
        seed.h,
        seed.s,
        seed.i,
        theta_band,
    )
    for k, cell_idx in enumerate(active.tolist()):
        cell = grid.cells[cell_idx]
        cell.population_count = int(counts[k])
        cell.population_object_ratio = cell.population_count / cell.density
    return grid


def select_seed_cell(grid: Grid) -> tuple[int, int]:
    """Unclustered cell of maximum ratio (row-major ties); opens a cluster."""
    best: GridCell | None = None
    for cell in grid.cells:
        if cell.cluster_id is not None:
            continue
        if best is None or cell.population_object_ratio > best.population_object_ratio:
            best = cell
    if best is None:
        raise DataError("no unclustered cells")
    best.cluster_id = grid.next_cluster_id()
    return best.row, best.col


def rough_cluster_with_grid(
    image: ImageRaster, params: ClusteringParams
) -> tuple[ClusterMap, PerfStats, Grid]:
    """Run the full pass loop; also hands back the grid for later phases."""
    if params.grid_n > min(image.width, image.height):
        raise ParameterError(
            f"grid_n out of range: {params.grid_n} (image is {image.width}x{image.height})"
        )
    times: dict[str, float] = {}
    t0 = time.perf_counter()
    hsi = HsiImage.from_raster(image)
    times["hsi"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    grid = build_grid(image, params.grid_n, hsi=hsi)
    times["grid"] = time.perf_counter() - t0

    assignment = np.full(image.n_pixels, -1, dtype=np.int32)
    cmap = ClusterMap(image.width, image.height, assignment, [])
    t0 = time.perf_counter()
    while grid.has_unclustered():
        seed_idx = select_seed_pixel(hsi, assignment)
        seed = hsi.pixel(seed_idx)
        score_cells(grid, seed, params.theta_band)
        seed_rc = select_seed_cell(grid)
        seed_cell = grid.cell(*seed_rc)
        cluster_id = seed_cell.cluster_id
        if params.gamma is not None:
            gamma_eff = params.gamma
        else:
            gamma_eff = params.theta_fraction * seed_cell.population_object_ratio
            gamma_eff = min(max(gamma_eff, 0.0), 1.0)
        claimed = [seed_rc]
        for cell in grid.cells:
            if cell.cluster_id is None and cell.population_object_ratio >= gamma_eff:
                cell.cluster_id = cluster_id
                claimed.append((cell.row, cell.col))
        pixel_count = 0
        for r, c in claimed:
            idxs = grid.cell(r, c).pixel_indices
            assignment[idxs] = cluster_id
            pixel_count += idxs.size
        cmap.clusters.append(
            ClusterInfo(cluster_id, seed, seed_idx, seed_rc, claimed, pixel_count)
        )
        cmap.pass_log.append(PassRecord(cluster_id + 1, seed_idx, seed, gamma_eff, claimed))
    times["rough_passes"] = time.perf_counter() - t0
    stats = PerfStats(n_cells=grid.n_cells, k_seeds=len(cmap.clusters), wall_times=times)
    logger.debug(
        "rough clustering: %d clusters over %d cells in %.3fs",
        stats.k_seeds,
        stats.n_cells,
        times["rough_passes"],
    )
    return cmap, stats, grid


def rough_cluster(image: ImageRaster, params: ClusteringParams) -> tuple[ClusterMap, PerfStats]:
    """Pass loop until every cell is clustered; see the module docstring."""
    cmap, stats, _ = rough_cluster_with_grid(image, params)
    return cmap, stats
