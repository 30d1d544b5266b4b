"""Periodic finite-difference calculus on regular rasters.

All fields are plain float arrays indexed as (row, col, ...).  Axis 0 is the
x1 direction, axis 1 is x2, and any trailing axes (color channel, vector
component) broadcast through the difference operators unchanged.  Every
operator wraps around the grid edges, so index M is identified with index 0.

Shape conventions used across the package:

* scalar field   -- (M, N)
* color image    -- (M, N, 3)
* vector field   -- (M, N, 2)          last axis = (x1, x2) component
* gradient field -- (M, N, 3, 2)       per-channel spatial gradient
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Periodic raster geometry: M rows, N columns, uniform spacing h."""

    rows: int
    cols: int
    spacing: float = 1.0

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.rows}x{self.cols}")
        if self.spacing <= 0:
            raise ValueError(f"grid spacing must be positive, got {self.spacing}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def cell_area(self) -> float:
        return self.spacing * self.spacing

    @classmethod
    def of(cls, field: np.ndarray, spacing: float = 1.0) -> "Grid":
        return cls(field.shape[0], field.shape[1], spacing)


def d1_fwd(v: np.ndarray, h: float = 1.0) -> np.ndarray:
    """(v(i+1,j) - v(i,j)) / h with periodic wrap."""
    return (np.roll(v, -1, axis=0) - v) / h


def d1_bwd(v: np.ndarray, h: float = 1.0) -> np.ndarray:
    """(v(i,j) - v(i-1,j)) / h with periodic wrap."""
    return (v - np.roll(v, 1, axis=0)) / h


def d2_fwd(v: np.ndarray, h: float = 1.0) -> np.ndarray:
    """(v(i,j+1) - v(i,j)) / h with periodic wrap."""
    return (np.roll(v, -1, axis=1) - v) / h


def d2_bwd(v: np.ndarray, h: float = 1.0) -> np.ndarray:
    """(v(i,j) - v(i,j-1)) / h with periodic wrap."""
    return (v - np.roll(v, 1, axis=1)) / h


def grad_fwd(v: np.ndarray, h: float = 1.0) -> np.ndarray:
    """Forward gradient; stacks (d1_fwd, d2_fwd) along a new last axis."""
    return np.stack((d1_fwd(v, h), d2_fwd(v, h)), axis=-1)


def grad_bwd(v: np.ndarray, h: float = 1.0) -> np.ndarray:
    """Backward gradient; stacks (d1_bwd, d2_bwd) along a new last axis."""
    return np.stack((d1_bwd(v, h), d2_bwd(v, h)), axis=-1)


def div_bwd(w: np.ndarray, h: float = 1.0) -> np.ndarray:
    """Backward divergence, the negative adjoint of grad_fwd."""
    if w.shape[-1] != 2:
        raise ValueError(f"vector field must have a trailing axis of size 2, got {w.shape}")
    return d1_bwd(w[..., 0], h) + d2_bwd(w[..., 1], h)


def div_fwd(w: np.ndarray, h: float = 1.0) -> np.ndarray:
    """Forward divergence, the negative adjoint of grad_bwd."""
    if w.shape[-1] != 2:
        raise ValueError(f"vector field must have a trailing axis of size 2, got {w.shape}")
    return d1_fwd(w[..., 0], h) + d2_fwd(w[..., 1], h)


def inner(a: np.ndarray, b: np.ndarray, h: float = 1.0) -> float:
    """Discrete L2 inner product: h^2 * sum(a * b).  Shapes must match."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch in inner product: {a.shape} vs {b.shape}")
    return float(h * h * np.sum(a * b))


def laplacian(v: np.ndarray, h: float = 1.0) -> np.ndarray:
    """Five-point periodic Laplacian, realized as div_bwd(grad_fwd(v))."""
    return div_bwd(grad_fwd(v, h), h)
