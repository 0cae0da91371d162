"""Weighted mean filter: per-pixel spatial denoising of a hyperspectral cube.

Each pixel is replaced by a similarity-weighted mean of its spatial window,
with neighbor weights exp(-gamma0 * ||x_center - x_neighbor||^2) and the
center itself weighted exactly 1. Border windows are clipped, so the
normalization always uses the neighbors actually present.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import HyperCube, PixelCoord, check_coord, check_window_size, window_bounds
from .errors import ConfigError, ShapeError
from .parallel import map_blocks

DEFAULT_GAMMA0 = 0.2


@dataclass(frozen=True)
class FilterConfig:
    """Window size w (odd) and kernel constant gamma0 > 0."""

    w: int
    gamma0: float = DEFAULT_GAMMA0

    def __post_init__(self):
        check_window_size(self.w)
        if not (self.gamma0 > 0):
            raise ConfigError(f"gamma0 must be > 0, got {self.gamma0}")

    @property
    def t(self) -> int:
        """Window half-width (w - 1) / 2."""
        return (self.w - 1) // 2


def wmf_weight(center, neighbor, gamma0: float) -> float:
    """Kernel weight exp(-gamma0 * ||center - neighbor||^2), in (0, 1]."""
    center = np.asarray(center, dtype=np.float64)
    neighbor = np.asarray(neighbor, dtype=np.float64)
    if center.shape != neighbor.shape or center.ndim != 1:
        raise ShapeError(
            f"spectra must be 1-D with equal length, got {center.shape} and {neighbor.shape}"
        )
    if not (gamma0 > 0):
        raise ConfigError(f"gamma0 must be > 0, got {gamma0}")
    diff = center - neighbor
    return float(np.exp(-gamma0 * np.dot(diff, diff)))


def _filter_at(data: np.ndarray, p: int, q: int, t: int, gamma0: float) -> np.ndarray:
    # Weighted mean written as center + correction so that constant windows
    # (and w = 1) reproduce the input bit-for-bit.
    p0, p1, q0, q1 = window_bounds(data.shape[0], data.shape[1], p, q, t)
    block = data[p0:p1, q0:q1].reshape(-1, data.shape[2])
    center = data[p, q]
    delta = block - center
    weights = np.exp(-gamma0 * np.einsum("ij,ij->i", delta, delta))
    return center + (weights @ delta) / weights.sum()


def filter_pixel(cube: HyperCube, center: PixelCoord, cfg: FilterConfig) -> np.ndarray:
    """Filtered spectrum of one pixel over its clipped window."""
    check_coord(center, cube.height, cube.width)
    return _filter_at(cube.data, center.p, center.q, cfg.t, cfg.gamma0)


def filter_cube(cube: HyperCube, cfg: FilterConfig, workers=None) -> HyperCube:
    """Apply the weighted mean filter to every pixel.

    Data-parallel over pixels; output is bitwise independent of the worker
    count because each pixel runs the same kernel as :func:`filter_pixel`.
    """
    height, width = cube.height, cube.width
    data = cube.data
    out = np.empty_like(data)
    t, gamma0 = cfg.t, cfg.gamma0

    def run(start, stop):
        for i in range(start, stop):
            p, q = divmod(i, width)
            out[p, q] = _filter_at(data, p, q, t, gamma0)

    map_blocks(run, height * width, workers)
    return HyperCube(out)
