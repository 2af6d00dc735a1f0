"""Sample-point containers for difference operators and identity sums."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation


def _as_sorted_points(points) -> np.ndarray:
    pts = np.asarray(getattr(points, "points", points), dtype=float).ravel()
    if pts.size < 1:
        raise ContractViolation("a grid needs at least one point")
    if not np.all(np.isfinite(pts)):
        raise ContractViolation("grid points must be finite")
    if np.any(np.diff(pts) <= 0.0):
        raise ContractViolation("grid points must be strictly increasing")
    pts.setflags(write=False)
    return pts


@dataclass(frozen=True)
class Grid1D:
    """Strictly increasing sample points."""

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", _as_sorted_points(self.points))

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, idx):
        return self.points[idx]

    def window(self, start: int, length: int) -> np.ndarray:
        """Consecutive slice of ``length`` points starting at ``start``."""
        if start < 0 or start + length > len(self):
            raise ContractViolation(f"window [{start}, {start + length}) leaves the grid")
        return self.points[start : start + length]


@dataclass(frozen=True)
class Grid2D:
    """Tensor-product rectangle of two 1-d grids."""

    ygrid: Grid1D
    zgrid: Grid1D

    def __post_init__(self):
        if not isinstance(self.ygrid, Grid1D):
            object.__setattr__(self, "ygrid", Grid1D(self.ygrid))
        if not isinstance(self.zgrid, Grid1D):
            object.__setattr__(self, "zgrid", Grid1D(self.zgrid))

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.ygrid), len(self.zgrid))


def as_grid1d(points) -> Grid1D:
    return points if isinstance(points, Grid1D) else Grid1D(points)


def as_grid2d(grid) -> Grid2D:
    if isinstance(grid, Grid2D):
        return grid
    ygrid, zgrid = grid
    return Grid2D(as_grid1d(ygrid), as_grid1d(zgrid))
