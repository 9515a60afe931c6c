"""Shared validation for evolution-parameter grids."""
from __future__ import annotations

import numpy as np


def evolution_grid(values, name: str = "grid") -> np.ndarray:
    """Return ``values`` as a float array after checking the evolution contract:
    one-dimensional, finite, strictly ascending, first entry exactly 0."""
    grid = np.asarray(values, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise ValueError(f"{name} must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(grid)):
        raise ValueError(f"{name} must contain only finite values")
    if grid[0] != 0.0:
        raise ValueError(f"{name} must start at 0, got {grid[0]}")
    if grid.size > 1 and not np.all(np.diff(grid) > 0.0):
        raise ValueError(f"{name} must be strictly ascending")
    return grid
