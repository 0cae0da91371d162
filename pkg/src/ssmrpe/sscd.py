"""Distance kernels: spatial coordinate distance and the spatial-spectral
combined distance (SSCD).

SSCD measures how far pixel j sits from pixel i's spatial neighborhood: it
is the heat-kernel-weighted mean of the distances between the *filtered*
spectrum of j and the *raw* spectra inside i's window. It is asymmetric by
construction: sscd(i, j) != sscd(j, i) in general, and callers must never
symmetrize it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import HyperCube, PixelCoord, coord_of, window_block
from .errors import ConfigError, ShapeError
from .wmf import FilterConfig, filter_cube


def scd(a: PixelCoord, b: PixelCoord) -> float:
    """Euclidean distance between two raster coordinates, in pixels."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _query_window_distances(query, window):
    query = np.asarray(query, dtype=np.float64)
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2 or window.shape[0] == 0:
        raise ConfigError("window must be a nonempty list of spectra")
    if query.ndim != 1 or query.shape[0] != window.shape[1]:
        raise ShapeError(
            f"query dimension {query.shape} does not match window {window.shape}"
        )
    delta = window - query
    return np.sqrt(np.einsum("ij,ij->i", delta, delta))


def heat_kernel_sigma(query, window) -> float:
    """Mean distance from ``query`` to the window members (the sigma of the
    heat kernel). Border-clipped windows divide by the actual member count."""
    return float(_query_window_distances(query, window).mean())


def window_distance(query, window) -> float:
    """Heat-kernel-weighted mean distance from ``query`` to a pixel window.

    Weights are exp(-dist^2 / sigma^2) with sigma the mean distance. When
    the query coincides with every member, sigma = 0 and the distance is
    defined as 0 (the continuous limit: all distances vanish).
    """
    dists = _query_window_distances(query, window)
    sigma = dists.mean()
    if sigma == 0.0:
        return 0.0
    weights = np.exp(-((dists / sigma) ** 2))
    return float((weights @ dists) / weights.sum())


@dataclass(frozen=True)
class SscdContext:
    """Raw cube plus its filtered counterpart, tied to one filter config."""

    raw: HyperCube
    filtered: HyperCube
    cfg: FilterConfig

    def __post_init__(self):
        if self.raw.data.shape != self.filtered.data.shape:
            raise ShapeError(
                f"raw {self.raw.data.shape} and filtered {self.filtered.data.shape} "
                "cubes must have identical dimensions"
            )

    @classmethod
    def from_cube(cls, cube: HyperCube, cfg: FilterConfig, workers=None) -> "SscdContext":
        return cls(cube, filter_cube(cube, cfg, workers), cfg)

    @property
    def pixel_count(self) -> int:
        return self.raw.pixel_count


def sscd(ctx: SscdContext, i: int, j: int) -> float:
    """SSCD between pixels with flat indices i and j: the distance from the
    filtered pixel j to the raw window around i. Requires i != j."""
    if i == j:
        raise ConfigError(f"sscd is never requested for a pixel against itself (i={i})")
    n = ctx.pixel_count
    if not (0 <= i < n and 0 <= j < n):
        raise ConfigError(f"flat indices must lie in [0, {n}), got i={i}, j={j}")
    window = window_block(ctx.raw, coord_of(i, ctx.raw.width), ctx.cfg.w)
    query = ctx.filtered.flat[j]
    return window_distance(query, window)


def sscd_row(ctx: SscdContext, i: int, queries: np.ndarray) -> np.ndarray:
    """SSCD from pixel i to every row of ``queries`` (filtered spectra).

    Vectorized companion of :func:`sscd` used by neighbor search; reductions
    mirror the scalar path so values agree to rounding noise.
    """
    window = window_block(ctx.raw, coord_of(i, ctx.raw.width), ctx.cfg.w)
    delta = window[:, None, :] - queries[None, :, :]
    dists = np.sqrt(np.einsum("sjd,sjd->sj", delta, delta))  # (m, nq)
    sigma = dists.mean(axis=0)
    out = np.zeros(queries.shape[0])
    live = sigma > 0.0
    if np.any(live):
        d = dists[:, live]
        weights = np.exp(-((d / sigma[live]) ** 2))
        out[live] = (weights * d).sum(axis=0) / weights.sum(axis=0)
    return out
