#!/usr/bin/env python3
"""
Loss Surfaces - Flatness Grids Around Adversarial Examples

The loss is evaluated on a square grid x_adv + a*u + b*v, where u and v
are random Gaussian directions made orthonormal by Gram-Schmidt, and
a, b run over `steps` evenly spaced values in [-extent, extent]. steps is
odd so the middle cell sits exactly on x_adv.

Scalar flatness scores use only the cells inside the disk a^2 + b^2 <=
extent^2, i.e. an L2 neighborhood of radius extent:

- sharpness_score: max over the disk of J(cell) - J(center); lower is flatter
- mean_gap_score: mean over the disk of J(cell) - J(center)

Both are differences, so adding a constant to the loss leaves them unchanged.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple
import logging

import numpy as np

from core.attacks.respa import LossOracle
from core.tensor import Vec, SeededRng, unit_vector
from core.utils.errors import EvaluationError
from core.utils.threading_utils import TaskManager

logger = logging.getLogger(__name__)

DEFAULT_STEPS = 41
DEFAULT_EXTENT = 0.1
DEFAULT_MAX_RETRIES = 8
# Relative size below which the orthogonalized second draw counts as parallel
PARALLEL_TOLERANCE = 1e-8


@dataclass(eq=False)
class SurfaceGrid:
    """
    Losses on a (steps x steps) grid spanned by two orthonormal directions

    losses[i, j] = J(x_adv + coords[i] * u + coords[j] * v)
    """
    u: Vec
    v: Vec
    extent: float
    steps: int
    losses: np.ndarray

    @property
    def center_index(self) -> int:
        return self.steps // 2

    @property
    def center_loss(self) -> float:
        return float(self.losses[self.center_index, self.center_index])

    @property
    def coords(self) -> np.ndarray:
        return grid_coordinates(self.extent, self.steps)

    def disk_mask(self) -> np.ndarray:
        """Cells with a^2 + b^2 <= extent^2"""
        c = self.coords
        return (c[:, None] ** 2 + c[None, :] ** 2) <= self.extent ** 2

    def to_csv(self) -> str:
        """Matrix file: first row holds the b coordinates, first column the a coordinates"""
        c = self.coords
        lines = ["a\\b," + ','.join(repr(float(b)) for b in c)]
        for i, a in enumerate(c):
            lines.append(repr(float(a)) + ',' + ','.join(repr(float(v)) for v in self.losses[i]))
        return '\n'.join(lines) + '\n'


def grid_coordinates(extent: float, steps: int) -> np.ndarray:
    """steps values from -extent to extent; the middle one is exactly 0.0"""
    half = steps // 2
    return np.array([extent * (k - half) / half for k in range(steps)], dtype=np.float64)


def orthonormal_directions(rng: SeededRng, d: int,
                           max_retries: int = DEFAULT_MAX_RETRIES) -> Tuple[Vec, Vec]:
    """
    Two random orthonormal directions in R^d

    A second draw (nearly) parallel to the first is discarded and redrawn.

    Raises:
        EvaluationError: DEGENERATE_DIRECTIONS when d < 2 or every attempt
            within max_retries is degenerate
    """
    if d < 2:
        raise EvaluationError(f"Need at least 2 dimensions for a surface, got {d}",
                              "DEGENERATE_DIRECTIONS", details={'d': d})
    for attempt in range(max_retries + 1):
        a = rng.normal(1.0, d)
        b = rng.normal(1.0, d)
        a_norm = float(np.linalg.norm(a))
        if a_norm < PARALLEL_TOLERANCE:
            logger.warning(f"Degenerate surface direction (zero draw), redrawing ({attempt + 1})")
            continue
        u = unit_vector(a)
        w = b - float(np.dot(b, u)) * u
        w_norm = float(np.linalg.norm(w))
        if w_norm < PARALLEL_TOLERANCE * max(float(np.linalg.norm(b)), 1.0):
            logger.warning(f"Degenerate surface directions (parallel draws), redrawing ({attempt + 1})")
            continue
        v = unit_vector(w)
        # second pass keeps u.v at round-off level
        return u, unit_vector(v - float(np.dot(v, u)) * u)
    raise EvaluationError(f"No usable surface directions after {max_retries} retries",
                          "DEGENERATE_DIRECTIONS", details={'max_retries': max_retries})


def loss_surface(model: LossOracle, x_adv: Vec, y: Vec, extent: float = DEFAULT_EXTENT,
                 steps: int = DEFAULT_STEPS, rng: Optional[SeededRng] = None,
                 max_retries: int = DEFAULT_MAX_RETRIES,
                 directions: Optional[Tuple[Vec, Vec]] = None,
                 max_workers: int = 1) -> SurfaceGrid:
    """
    Evaluate the loss on a grid around x_adv

    Args:
        model: Loss oracle
        x_adv: Grid center
        y: One-hot label
        extent: Largest coordinate along each direction (>= 0)
        steps: Grid points per axis, odd and >= 3
        rng: Generator for the directions (seed 0 when omitted)
        max_retries: Redraws allowed for degenerate directions
        directions: Use these (u, v) instead of drawing
        max_workers: Grid rows evaluated in parallel

    Returns:
        SurfaceGrid whose center cell is J(x_adv) exactly
    """
    if steps < 3 or steps % 2 == 0:
        raise EvaluationError(f"steps must be odd and >= 3, got {steps}", "BAD_GRID",
                              details={'steps': steps})
    if extent < 0:
        raise EvaluationError(f"extent must be >= 0, got {extent}", "BAD_GRID",
                              details={'extent': extent})
    x_adv = np.asarray(x_adv, dtype=np.float64)
    if directions is None:
        u, v = orthonormal_directions(rng or SeededRng(0), x_adv.shape[0], max_retries)
    else:
        u, v = (np.asarray(w, dtype=np.float64) for w in directions)
        if u.shape != x_adv.shape or v.shape != x_adv.shape:
            raise EvaluationError("Surface directions do not match the input dimension",
                                  "DIMENSION_MISMATCH")

    coords = grid_coordinates(extent, steps)
    center = steps // 2

    def evaluate_row(i: int) -> List[float]:
        row = []
        for j in range(steps):
            if i == center and j == center:
                row.append(float(model.cross_entropy_loss(x_adv, y)))
            else:
                row.append(float(model.cross_entropy_loss(x_adv + coords[i] * u + coords[j] * v, y)))
        return row

    rows = TaskManager(max_workers=max_workers).map_ordered(evaluate_row, range(steps),
                                                            task_name="loss surface")
    grid = SurfaceGrid(u=u, v=v, extent=extent, steps=steps, losses=np.array(rows, dtype=np.float64))
    logger.debug(f"Loss surface {steps}x{steps}, extent {extent}: center {grid.center_loss:.6f}, "
                 f"sharpness {sharpness_score(grid):.6f}")
    return grid


def _disk_gaps(grid: SurfaceGrid) -> np.ndarray:
    return grid.losses[grid.disk_mask()] - grid.center_loss


def sharpness_score(grid: SurfaceGrid) -> float:
    """Largest loss rise over the disk around the center (0 for a flat grid)"""
    return float(np.max(_disk_gaps(grid)))


def mean_gap_score(grid: SurfaceGrid) -> float:
    """Mean loss change over the disk around the center"""
    return float(np.mean(_disk_gaps(grid)))
