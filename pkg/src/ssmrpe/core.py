"""Core raster containers and the raster/flat index mapping.

A hyperspectral cube is stored band-interleaved-by-pixel: ``data[p, q]`` is
the contiguous D-band spectrum of the pixel in row ``p``, column ``q``. The
flat index of that pixel is ``p * width + q`` (row-major), which is the
ordering used by every graph, split, and file format in this package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BoundsError, ConfigError, ShapeError, ValidationError


class PixelCoord(NamedTuple):
    """Raster position: row ``p``, column ``q``."""

    p: int
    q: int


def _readonly(arr: np.ndarray) -> np.ndarray:
    view = arr.view()
    view.setflags(write=False)
    return view


@dataclass(frozen=True)
class HyperCube:
    """An H x W raster of D-band spectra, immutable after construction."""

    data: np.ndarray  # (H, W, D) float64, read-only

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise ShapeError(f"cube data must be (H, W, D), got ndim={arr.ndim}")
        if min(arr.shape) < 1:
            raise ShapeError(f"cube dimensions must be positive, got {arr.shape}")
        arr = np.ascontiguousarray(arr)
        if not np.isfinite(arr).all():
            raise ValidationError("cube data contains non-finite values")
        object.__setattr__(self, "data", _readonly(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def bands(self) -> int:
        return self.data.shape[2]

    @property
    def pixel_count(self) -> int:
        return self.data.shape[0] * self.data.shape[1]

    @property
    def flat(self) -> np.ndarray:
        """(H*W, D) view with row i holding the spectrum of flat index i."""
        return self.data.reshape(self.pixel_count, self.bands)

    def pixel(self, coord: PixelCoord) -> np.ndarray:
        check_coord(coord, self.height, self.width)
        return self.data[coord.p, coord.q]


@dataclass(frozen=True)
class LabelRaster:
    """Per-pixel class ids in {0..c}; 0 marks unlabeled pixels."""

    labels: np.ndarray  # (H, W) integer, read-only
    class_count: int

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 2:
            raise ShapeError(f"labels must be (H, W), got ndim={arr.ndim}")
        if min(arr.shape) < 1:
            raise ShapeError(f"label dimensions must be positive, got {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ShapeError(f"labels must be integer, got dtype={arr.dtype}")
        if self.class_count < 1:
            raise ConfigError(f"class count must be >= 1, got {self.class_count}")
        if arr.min() < 0 or arr.max() > self.class_count:
            raise ValidationError(
                f"labels must lie in [0, {self.class_count}], "
                f"found range [{arr.min()}, {arr.max()}]"
            )
        object.__setattr__(self, "labels", _readonly(np.ascontiguousarray(arr)))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def flat(self) -> np.ndarray:
        return self.labels.reshape(-1)


@dataclass(frozen=True)
class FeatureMatrix:
    """n feature vectors of dimension d, one sample per row."""

    values: np.ndarray  # (n, d) float64, read-only

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if arr.ndim != 2:
            raise ShapeError(f"feature values must be (n, d), got ndim={arr.ndim}")
        if not np.isfinite(arr).all():
            raise ValidationError("feature values contain non-finite entries")
        object.__setattr__(self, "values", _readonly(arr))

    @property
    def count(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def check_coord(coord, height: int, width: int) -> None:
    p, q = coord
    if not (0 <= p < height and 0 <= q < width):
        raise BoundsError(f"coordinate ({p}, {q}) outside {height}x{width} raster")


def flat_index(coord, width: int) -> int:
    """Row-major flat index of ``coord`` in a raster of the given width."""
    p, q = coord
    if p < 0 or q < 0 or q >= width:
        raise BoundsError(f"coordinate ({p}, {q}) invalid for width {width}")
    return p * width + q


def coord_of(index: int, width: int) -> PixelCoord:
    """Inverse of :func:`flat_index`."""
    if index < 0:
        raise BoundsError(f"flat index must be >= 0, got {index}")
    if width < 1:
        raise ConfigError(f"width must be >= 1, got {width}")
    return PixelCoord(index // width, index % width)


def check_window_size(w: int) -> int:
    """Validate an odd window size and return the half-width t = (w-1)/2."""
    if not isinstance(w, (int, np.integer)) or w < 1 or w % 2 == 0:
        raise ConfigError(f"window size must be an odd integer >= 1, got {w!r}")
    return (int(w) - 1) // 2


def window_bounds(height, width, p, q, t):
    """Clipped window extents [p0, p1) x [q0, q1) for half-width t.

    Windows are clipped at raster borders: no padding or mirroring, the
    window simply contains fewer pixels there.
    """
    return (max(p - t, 0), min(p + t + 1, height),
            max(q - t, 0), min(q + t + 1, width))


def window_block(cube: HyperCube, center: PixelCoord, w: int) -> np.ndarray:
    """(m, D) array of the clipped window's spectra in row-major order."""
    t = check_window_size(w)
    check_coord(center, cube.height, cube.width)
    p0, p1, q0, q1 = window_bounds(cube.height, cube.width, center.p, center.q, t)
    return cube.data[p0:p1, q0:q1].reshape(-1, cube.bands)


def window_of(cube: HyperCube, center: PixelCoord, w: int):
    """All in-bounds window pixels around ``center`` as (coord, spectrum) pairs.

    The window spans |p - center.p| <= t and |q - center.q| <= t with
    t = (w-1)/2, clipped to the raster. The center is included and the
    order is row-major, so repeated calls enumerate identically.
    """
    t = check_window_size(w)
    check_coord(center, cube.height, cube.width)
    p0, p1, q0, q1 = window_bounds(cube.height, cube.width, center.p, center.q, t)
    return [
        (PixelCoord(p, q), cube.data[p, q])
        for p in range(p0, p1)
        for q in range(q0, q1)
    ]
