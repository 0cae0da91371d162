"""File formats and artifact emission.

Cubes and label rasters use minimal little-endian binary layouts:

* cube (.hsx):   magic "HSX1" | u32 version=1 | u32 H | u32 W | u32 D,
                 then H*W*D float32 values, pixel-interleaved, row-major.
* labels (.hsl): magic "HSL1" | u32 H | u32 W | u32 c,
                 then H*W uint16 class ids, row-major, 0 = unlabeled.

Metric tables are RFC-4180 CSV with LF line endings, values printed with
two decimals. Class maps are paletted PNGs (index 0 black for unlabeled),
decodable back to the label raster. All writes go through a temp file and
an atomic rename.
"""

from __future__ import annotations

import csv
import io as _io
import os
import struct
import tempfile

import numpy as np
from PIL import Image

from .core import HyperCube, LabelRaster
from .errors import ConfigError, FormatError
from .evaluate import MetricsReport, SweepResult

CUBE_MAGIC = b"HSX1"
CUBE_VERSION = 1
LABEL_MAGIC = b"HSL1"
_MAX_PAYLOAD = 1 << 40  # refuse absurd headers before allocating

# Index 0 (unlabeled) is black; the 16 class colors cover the largest
# benchmark scene and stay mutually distinct for lossless decoding.
DEFAULT_PALETTE = (
    (0, 0, 0),
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200),
    (245, 130, 48), (145, 30, 180), (70, 240, 240), (240, 50, 230),
    (210, 245, 60), (250, 190, 190), (0, 128, 128), (170, 110, 40),
    (255, 250, 200), (128, 0, 0), (128, 128, 128), (255, 215, 180),
)


def _atomic_write(path, payload: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ssmrpe-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_cube(cube: HyperCube, path) -> None:
    header = CUBE_MAGIC + struct.pack(
        "<IIII", CUBE_VERSION, cube.height, cube.width, cube.bands
    )
    _atomic_write(path, header + cube.data.astype("<f4").tobytes())


def load_cube(path) -> HyperCube:
    with open(path, "rb") as handle:
        blob = handle.read()
    if len(blob) < 20:
        raise FormatError(f"cube file truncated: {len(blob)} bytes < 20-byte header",
                          offset=len(blob))
    if blob[:4] != CUBE_MAGIC:
        raise FormatError(f"bad cube magic {blob[:4]!r}, expected {CUBE_MAGIC!r}",
                          offset=0)
    version, height, width, bands = struct.unpack("<IIII", blob[4:20])
    if version != CUBE_VERSION:
        raise FormatError(f"unsupported cube version {version}", offset=4)
    if min(height, width, bands) < 1:
        raise FormatError(f"cube dimensions must be positive, got "
                          f"{height}x{width}x{bands}", offset=8)
    expected = 4 * height * width * bands
    if expected > _MAX_PAYLOAD:
        raise FormatError(f"cube dimensions overflow: payload would be "
                          f"{expected} bytes", offset=8)
    if len(blob) - 20 != expected:
        raise FormatError(f"cube payload is {len(blob) - 20} bytes, "
                          f"expected {expected}", offset=20)
    data = np.frombuffer(blob, dtype="<f4", offset=20)
    return HyperCube(data.reshape(height, width, bands).astype(np.float64))


def save_labels(raster: LabelRaster, path) -> None:
    header = LABEL_MAGIC + struct.pack(
        "<III", raster.height, raster.width, raster.class_count
    )
    _atomic_write(path, header + raster.labels.astype("<u2").tobytes())


def load_labels(path) -> LabelRaster:
    with open(path, "rb") as handle:
        blob = handle.read()
    if len(blob) < 16:
        raise FormatError(f"label file truncated: {len(blob)} bytes < 16-byte header",
                          offset=len(blob))
    if blob[:4] != LABEL_MAGIC:
        raise FormatError(f"bad label magic {blob[:4]!r}, expected {LABEL_MAGIC!r}",
                          offset=0)
    height, width, classes = struct.unpack("<III", blob[4:16])
    if min(height, width) < 1 or classes < 1:
        raise FormatError(f"label header invalid: {height}x{width}, c={classes}",
                          offset=4)
    expected = 2 * height * width
    if expected > _MAX_PAYLOAD:
        raise FormatError(f"label dimensions overflow: payload would be "
                          f"{expected} bytes", offset=4)
    if len(blob) - 16 != expected:
        raise FormatError(f"label payload is {len(blob) - 16} bytes, "
                          f"expected {expected}", offset=16)
    labels = np.frombuffer(blob, dtype="<u2", offset=16).reshape(height, width)
    return LabelRaster(labels, classes)  # raises ValidationError on labels > c


def _fmt(value) -> str:
    return "" if not np.isfinite(value) else f"{value:.2f}"


def export_metrics(report: MetricsReport, path) -> None:
    """Metric table CSV: one row per class, then OA / AA / Kappa rows.

    Percentages with two decimals; kappa is scaled to percent to match the
    usual table style. Classes never seen in a test split render empty.
    """
    buffer = _io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["Class", "Train", "Test", "Mean", "Std"])
    for cls in range(report.class_count):
        writer.writerow([cls + 1,
                         int(report.train_counts[cls]), int(report.test_counts[cls]),
                         _fmt(report.per_class_mean[cls]),
                         _fmt(report.per_class_std[cls])])
    writer.writerow(["OA", "", "", _fmt(report.oa_mean), _fmt(report.oa_std)])
    writer.writerow(["AA", "", "", _fmt(report.aa_mean), _fmt(report.aa_std)])
    writer.writerow(["Kappa", "", "",
                     _fmt(100.0 * report.kappa_mean), _fmt(100.0 * report.kappa_std)])
    _atomic_write(path, buffer.getvalue().encode("utf-8"))


def export_sweep(result: SweepResult, path) -> None:
    """Long-format OA grid CSV: one row per (w, k) cell."""
    buffer = _io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["w", "k", "oa_mean", "oa_std"])
    for a, w in enumerate(result.w_values):
        for b, k in enumerate(result.k_values):
            writer.writerow([w, k, _fmt(result.oa_mean[a, b]),
                             _fmt(result.oa_std[a, b])])
    _atomic_write(path, buffer.getvalue().encode("utf-8"))


def export_matrix(matrix, path) -> None:
    """Plain numeric CSV of a 2-D array at full float precision."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    buffer = _io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for row in matrix:
        writer.writerow([f"{v:.17g}" for v in row])
    _atomic_write(path, buffer.getvalue().encode("utf-8"))


def render_class_map(raster: LabelRaster, path, palette=DEFAULT_PALETTE) -> None:
    """Write the label raster as a paletted PNG, one color per class.

    The palette must provide at least c + 1 colors (index 0 = unlabeled);
    distinct palette entries make the image decodable back to labels.
    """
    if len(palette) < raster.class_count + 1:
        raise ConfigError(
            f"palette has {len(palette)} colors, needs at least "
            f"{raster.class_count + 1}"
        )
    if raster.class_count > 255:
        raise ConfigError("paletted class maps support at most 255 classes")
    image = Image.fromarray(raster.labels.astype(np.uint8), mode="P")
    flat = [channel for color in palette for channel in color]
    flat += [0] * (768 - len(flat))
    image.putpalette(flat)
    buffer = _io.BytesIO()
    image.save(buffer, format="PNG")
    _atomic_write(path, buffer.getvalue())


def read_class_map(path, class_count: int) -> LabelRaster:
    """Decode a rendered class map back into a label raster."""
    with Image.open(path) as image:
        if image.mode != "P":
            raise FormatError(f"class map must be a paletted image, got {image.mode}")
        indices = np.asarray(image, dtype=np.uint16)
    return LabelRaster(indices, class_count)
