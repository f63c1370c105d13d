"""Pixel-level boundary refinement of a rough cluster map.

A border cell is a cell with at least one 4-neighbor cell in a different
cluster; every pixel inside a border cell is a border pixel. Each border
pixel is re-judged individually:

  - shortcut: if the pixel is strictly nearer (seed distance) to the
    cluster of an already-reassigned 4-neighbor pixel than to every other
    candidate cluster, it adopts that neighbor's cluster without further
    work
  - otherwise the pixel is tentatively moved into each candidate cluster
    (the clusters of its cell's 4-neighbor cells, of its already-reassigned
    4-neighbor pixels, plus the one it is in) and keeps the move that
    maximizes the homogeneity score; score ties break on seed distance,
    then on the lowest cluster id

The sweep repeats until no pixel moves (bounded by ``max_sweeps``):
pixels judged early in the first sweep see few settled neighbors, and a
second sweep lets the corrected surroundings pull them over. On simple
boundaries the first sweep is already a fixed point.

The homogeneity score is the classic total-over-pooled-within sum of
squares over HSI feature vectors: total_ss / within_ss, where hue enters
each squared deviation circularly (normalized by 360) and cluster hue
means are circular (resultant of unit vectors). Perfectly homogeneous
partitions (within_ss = 0) score as infinity.

Reassignments apply immediately, so the visit order (clusters by id,
pixels by ascending raster index) is part of the contract; the module is
sequential by design. Clusters emptied by refinement are dropped and the
remaining ids recompacted.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from roughseg import _kernels as K
from roughseg.colorspace import HsiImage
from roughseg.exceptions import DataError
from roughseg.grid import ClusterInfo, ClusterMap, Grid
from roughseg.raster import ImageRaster

logger = logging.getLogger(__name__)


@dataclass
class BorderSet:
    """Cells on cluster boundaries and the pixels they contain."""

    border_cells: list[tuple[int, int]]
    border_pixels: np.ndarray


@dataclass(frozen=True)
class BetaScore:
    """Homogeneity score: total SS over pooled within-cluster SS.

    ``value`` is ``math.inf`` when within_ss is zero (perfectly
    homogeneous clusters); infinity compares greater than any finite
    score, which is exactly the intended ordering.
    """

    value: float
    total_ss: float
    within_ss: float


def _cell_cluster_ids(cmap: ClusterMap, grid: Grid) -> list[int]:
    ids: list[int] = []
    for cell in grid.cells:
        if cell.cluster_id is not None:
            ids.append(cell.cluster_id)
        else:
            ids.append(int(cmap.assignment[cell.pixel_indices[0]]))
    return ids


def find_border_cells(cmap: ClusterMap, grid: Grid) -> BorderSet:
    """Cells with a 4-neighbor cell in another cluster, plus their pixels."""
    n = grid.grid_n
    ids = _cell_cluster_ids(cmap, grid)
    cells: list[tuple[int, int]] = []
    chunks: list[np.ndarray] = []
    for r in range(n):
        for c in range(n):
            own = ids[r * n + c]
            for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if 0 <= nr < n and 0 <= nc < n and ids[nr * n + nc] != own:
                    cells.append((r, c))
                    chunks.append(grid.cell(r, c).pixel_indices)
                    break
    pixels = (
        np.sort(np.concatenate(chunks)).astype(np.int32)
        if chunks
        else np.empty(0, dtype=np.int32)
    )
    return BorderSet(cells, pixels)


def _within_sum(per_cluster_ss: dict[int, float]) -> float:
    total = 0.0
    for cid in sorted(per_cluster_ss):
        total += per_cluster_ss[cid]
    return total


def beta_measure(hsi: HsiImage, assignment: "ClusterMap | np.ndarray") -> BetaScore:
    """Homogeneity of a total cluster assignment over the HSI planes."""
    arr = assignment.assignment if isinstance(assignment, ClusterMap) else assignment
    arr = np.asarray(arr)
    if arr.shape != (hsi.n_pixels,):
        raise DataError("assignment length does not match image")
    if np.any(arr < 0):
        raise DataError("assignment must be total (no unassigned pixels)")
    every = np.arange(hsi.n_pixels, dtype=np.int32)
    total_ss = K.cluster_sq_dev(hsi.h, hsi.s, hsi.i, every)
    per_cluster: dict[int, float] = {}
    for cid in np.unique(arr).tolist():
        members = np.nonzero(arr == cid)[0].astype(np.int32)
        per_cluster[cid] = K.cluster_sq_dev(hsi.h, hsi.s, hsi.i, members)
    within = _within_sum(per_cluster)
    value = math.inf if within == 0.0 else total_ss / within
    return BetaScore(value, total_ss, within)


def _pixel_neighbors(idx: int, width: int, n_pixels: int) -> list[int]:
    out = []
    if idx >= width:
        out.append(idx - width)
    if idx % width > 0:
        out.append(idx - 1)
    if idx % width < width - 1:
        out.append(idx + 1)
    if idx + width < n_pixels:
        out.append(idx + width)
    return out


class _RefineState:
    """Per-cluster member lists and cached squared deviations.

    The cache makes candidate scoring cheap while staying bit-identical to
    a from-scratch recomputation: each cluster's deviation is always the
    value the kernel returns for its full ascending member list, and the
    pooled within sum is re-added over clusters in id order every time.
    """

    def __init__(self, hsi: HsiImage, assignment: np.ndarray, cluster_ids: list[int]):
        self.hsi = hsi
        self.members: dict[int, np.ndarray] = {}
        self.ss: dict[int, float] = {}
        for cid in cluster_ids:
            members = np.nonzero(assignment == cid)[0].astype(np.int32)
            self.members[cid] = members
            self.ss[cid] = K.cluster_sq_dev(hsi.h, hsi.s, hsi.i, members)
        every = np.arange(hsi.n_pixels, dtype=np.int32)
        self.total_ss = K.cluster_sq_dev(hsi.h, hsi.s, hsi.i, every)

    def within(self) -> float:
        return _within_sum(self.ss)

    def hypothetical_move(self, pixel: int, src: int, dst: int):
        """Member arrays and deviations with one pixel moved src -> dst."""
        src_members = self.members[src]
        pos = int(np.searchsorted(src_members, pixel))
        new_src = np.delete(src_members, pos)
        dst_members = self.members[dst]
        ins = int(np.searchsorted(dst_members, pixel))
        new_dst = np.insert(dst_members, ins, pixel)
        ss_src = K.cluster_sq_dev(self.hsi.h, self.hsi.s, self.hsi.i, new_src)
        ss_dst = K.cluster_sq_dev(self.hsi.h, self.hsi.s, self.hsi.i, new_dst)
        return new_src, new_dst, ss_src, ss_dst

    def within_with(self, src: int, ss_src: float, dst: int, ss_dst: float) -> float:
        total = 0.0
        for cid in sorted(self.ss):
            if cid == src:
                total += ss_src
            elif cid == dst:
                total += ss_dst
            else:
                total += self.ss[cid]
        return total

    def apply_move(self, pixel: int, src: int, dst: int) -> None:
        new_src, new_dst, ss_src, ss_dst = self.hypothetical_move(pixel, src, dst)
        self.members[src] = new_src
        self.members[dst] = new_dst
        self.ss[src] = ss_src
        self.ss[dst] = ss_dst


def refine_boundaries(
    image: "ImageRaster | HsiImage", cmap: ClusterMap, grid: Grid, max_sweeps: int = 8
) -> ClusterMap:
    """Re-judge every border pixel; returns a new, still-total ClusterMap."""
    hsi = image if isinstance(image, HsiImage) else grid.hsi
    border = find_border_cells(cmap, grid)
    assignment = cmap.assignment.copy()
    if not border.border_cells:
        return ClusterMap(
            cmap.width, cmap.height, assignment, list(cmap.clusters), list(cmap.pass_log)
        )

    cluster_ids = [info.cluster_id for info in cmap.clusters]
    seeds = {info.cluster_id: info.seed_pixel for info in cmap.clusters}
    cell_ids = _cell_cluster_ids(cmap, grid)
    n = grid.grid_n
    state = _RefineState(hsi, assignment, cluster_ids)
    processed = np.zeros(hsi.n_pixels, dtype=bool)

    def seed_dist(pixel: int, cid: int) -> float:
        sp = seeds[cid]
        return K.hsi_distance(
            float(hsi.h[pixel]), float(hsi.s[pixel]), float(hsi.i[pixel]), sp.h, sp.s, sp.i
        )

    # visit order: clusters by id, each cluster's border pixels ascending
    visit: list[int] = []
    for info in cmap.clusters:
        own_cells = [
            rc for rc in border.border_cells if cell_ids[rc[0] * n + rc[1]] == info.cluster_id
        ]
        if own_cells:
            visit.extend(
                np.sort(
                    np.concatenate([grid.cell(r, c).pixel_indices for (r, c) in own_cells])
                ).tolist()
            )

    for sweep in range(max_sweeps):
        changes = 0
        for pixel in visit:
            cur = int(assignment[pixel])
            r, c = divmod(int(grid.cell_of_pixel[pixel]), n)
            candidates = {cur}
            for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if 0 <= nr < n and 0 <= nc < n:
                    candidates.add(cell_ids[nr * n + nc])
            neigh_ids = sorted(
                {
                    int(assignment[nb])
                    for nb in _pixel_neighbors(pixel, grid.width, hsi.n_pixels)
                    if processed[nb]
                }
            )
            candidates = sorted(candidates | set(neigh_ids))
            dists = {cid: seed_dist(pixel, cid) for cid in candidates}

            # shortcut: strictly nearest reassigned-neighbor cluster wins
            moved = False
            if neigh_ids:
                nstar = None
                nstar_d = 0.0
                for cid in neigh_ids:
                    d = dists[cid]
                    if nstar is None or d < nstar_d:
                        nstar = cid
                        nstar_d = d
                if all(nstar_d < d for cid, d in dists.items() if cid != nstar):
                    if nstar != cur:
                        state.apply_move(pixel, cur, nstar)
                        assignment[pixel] = nstar
                        changes += 1
                    processed[pixel] = True
                    moved = True
            if moved:
                continue

            # full evaluation: maximize homogeneity over candidate moves
            within_cur = state.within()
            cur_value = math.inf if within_cur == 0.0 else state.total_ss / within_cur
            best_cid = cur
            best_value = cur_value
            best_dist = dists[cur]
            for cid in candidates:
                if cid == cur:
                    continue
                _, _, ss_src, ss_dst = state.hypothetical_move(pixel, cur, cid)
                within = state.within_with(cur, ss_src, cid, ss_dst)
                value = math.inf if within == 0.0 else state.total_ss / within
                d = dists[cid]
                if (
                    value > best_value
                    or (value == best_value and d < best_dist)
                    or (value == best_value and d == best_dist and cid < best_cid)
                ):
                    best_cid = cid
                    best_value = value
                    best_dist = d
            if best_cid != cur:
                state.apply_move(pixel, cur, best_cid)
                assignment[pixel] = best_cid
                changes += 1
            processed[pixel] = True
        if changes == 0:
            break
        # later sweeps treat every border pixel as already reassigned
        processed[np.asarray(visit, dtype=np.int64)] = True
    else:
        logger.warning("boundary refinement did not settle within %d sweeps", max_sweeps)

    return _compact(cmap, assignment)


def _compact(cmap: ClusterMap, assignment: np.ndarray) -> ClusterMap:
    """Drop emptied clusters and renumber the survivors densely."""
    counts = np.bincount(assignment, minlength=len(cmap.clusters))
    keep = [info for info in cmap.clusters if counts[info.cluster_id] > 0]
    dropped = [info.cluster_id for info in cmap.clusters if counts[info.cluster_id] == 0]
    if dropped:
        logger.info("boundary refinement emptied clusters %s; ids recompacted", dropped)
    remap = np.full(len(cmap.clusters), -1, dtype=np.int32)
    infos: list[ClusterInfo] = []
    for new_id, info in enumerate(keep):
        remap[info.cluster_id] = new_id
        infos.append(
            ClusterInfo(
                new_id,
                info.seed_pixel,
                info.seed_pixel_index,
                info.seed_cell,
                list(info.member_cells),
                int(counts[info.cluster_id]),
            )
        )
    return ClusterMap(
        cmap.width, cmap.height, remap[assignment], infos, list(cmap.pass_log)
    )
