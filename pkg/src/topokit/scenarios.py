"""Synthetic likelihood grids for the end-to-end optimization demos.

Both builders produce 32x32 grids whose sublevel topology is known exactly
by construction:

* :func:`noise_removal_grid` -- three deep basins (one dot each, persistence
  well above the default signal threshold) plus ten shallow dent/wall pairs
  (one low-persistence dot each).  The background decreases strictly toward
  the nearest basin along Manhattan shortest paths, so it contributes no
  local minima of its own and the diagram holds exactly 13 dots.
* :func:`three_basin_teacher` -- three deep basins and nothing else; the
  0.5-sublevel mask has exactly three connected components and the diagram
  holds exactly 3 dots, all signal at the default threshold.
"""

from __future__ import annotations

import numpy as np

from .trainer import likelihood_to_logits

GRID_SIZE = 32

_BASIN_CENTERS = ((8, 8), (8, 23), (23, 8))

# Offsets of the 8-pixel rim around a basin center, ordered so that every
# rim pixel has an earlier (hence lower-valued) rim pixel or the center
# among its 4-neighbors -- the rim therefore adds no local minima.
_RIM_OFFSETS = (
    (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1),
)

# Dent sites per basin: three pixels out from the center along an axis,
# with the separating wall pixel two out along the same axis.
_DENT_OFFSETS = ((0, -3), (0, 3), (-3, 0), (3, 0))

DENT_COUNT = 10


def _nearest_center_distance(size: int) -> np.ndarray:
    """Manhattan distance from every pixel to its nearest basin center."""
    rows = np.arange(size)[:, None]
    cols = np.arange(size)[None, :]
    best = None
    for center_row, center_col in _BASIN_CENTERS:
        dist = np.abs(rows - center_row) + np.abs(cols - center_col)
        best = dist if best is None else np.minimum(best, dist)
    return best


def noise_removal_grid() -> np.ndarray:
    """32x32 grid with 3 deep basin dots and 10 shallow dent dots.

    Dot inventory (sublevel, 4-connectivity):

    * one essential dot born at the deepest basin center (0.03),
    * two finite dots born at the other basin centers (0.035, 0.04) that die
      on the background watershed near 0.914 -- persistence > 0.7,
    * ten finite dots born at dent pixels (0.40 + 0.01*i) that die at their
      wall pixels (0.52 + 0.009*i) -- persistence 0.12 - 0.001*i, < 0.7.

    Every other pixel has a strictly lower 4-neighbor on the way to its
    nearest basin, so no further dots exist.
    """
    dist = _nearest_center_distance(GRID_SIZE)
    grid = 0.90 + 0.002 * dist.astype(np.float64)
    for basin, (row, col) in enumerate(_BASIN_CENTERS):
        for k, (dr, dc) in enumerate(_RIM_OFFSETS):
            grid[row + dr, col + dc] = 0.07 + 0.004 * basin + 0.002 * k
        grid[row, col] = 0.03 + 0.005 * basin
    dent = 0
    for row, col in _BASIN_CENTERS:
        for dr, dc in _DENT_OFFSETS:
            if dent == DENT_COUNT:
                break
            grid[row + dr, col + dc] = 0.40 + 0.01 * dent
            grid[row + (dr * 2) // 3, col + (dc * 2) // 3] = 0.52 + 0.009 * dent
            dent += 1
    return grid


def three_basin_teacher() -> np.ndarray:
    """32x32 grid whose 0.5-sublevel mask has exactly 3 components.

    Ring values rise strictly with Manhattan distance from the nearest
    basin center (0.07, 0.12, 0.30, then background 0.93 + 0.002 per extra
    step), so the diagram holds exactly three dots: the essential dot at
    0.05 and two finite dots (0.054, 0.058) dying on the 0.936 watershed.
    The 0.5 contour falls between distance 3 (0.30) and distance 4 (0.93),
    leaving a wide likelihood margin on both sides.
    """
    dist = _nearest_center_distance(GRID_SIZE)
    grid = 0.93 + 0.002 * np.maximum(dist - 4, 0).astype(np.float64)
    ring_values = {1: 0.07, 2: 0.12, 3: 0.30}
    for ring_dist, value in ring_values.items():
        grid[dist == ring_dist] = value
    for basin, (row, col) in enumerate(_BASIN_CENTERS):
        grid[row, col] = 0.05 + 0.004 * basin
    return grid


def perturbed_student_logits(
    teacher: np.ndarray, sigma: float = 0.5, seed: int = 7
) -> np.ndarray:
    """Student initialization: teacher logits plus Gaussian noise."""
    rng = np.random.default_rng(seed)
    return likelihood_to_logits(teacher) + sigma * rng.standard_normal(teacher.shape)
