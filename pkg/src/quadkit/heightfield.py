"""Elevation grids, local patches, and their transforms.

A :class:`Heightfield` stores terrain elevation as a row-major grid of
16-bit integer codes with a metric scale: code 0 is ground level and code
65535 maps to ``z_scale`` meters.  World coordinates follow the convention
``x = origin_x + col * resolution`` and ``y = origin_y + row * resolution``,
so columns run along +x and rows along +y.  Bilinear interpolation is
defined on the hull of cell centers.

A :class:`ElevationPatch` is a robot-local 91x91 float slice of a
heightfield (1.8 x 1.8 m at 0.02 m/cell), rotated by the base yaw and
clipped to [-2, 2] m.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

MAX_CODE = 65535

PATCH_SIZE = 91
PATCH_RESOLUTION = 0.02
PATCH_CLIP = 2.0

DEFAULT_CONTRAST_RANGE = (0.5, 2.0)


class OutOfExtentError(ValueError):
    """A queried point or path leaves the terrain extent."""


def code_to_meters(code, z_scale: float):
    """Metric height of an elevation code (65535 -> ``z_scale`` meters)."""
    return np.asarray(code, dtype=np.float64) * (z_scale / MAX_CODE)


def meters_to_code(height, z_scale: float):
    """Elevation code for a metric height, rounded and clamped to [0, 65535]."""
    codes = np.rint(np.asarray(height, dtype=np.float64) * (MAX_CODE / z_scale))
    return np.clip(codes, 0, MAX_CODE).astype(np.uint16)


@dataclass(frozen=True)
class Heightfield:
    """Terrain elevation grid with 16-bit codes and metric scaling.

    Parameters
    ----------
    cells : ndarray
        2D uint16 array of elevation codes, ``cells[row, col]``.
    resolution : float
        Cell pitch in meters (both axes).
    z_scale : float
        Metric height corresponding to code 65535.
    origin : tuple of float
        World (x, y) of the center of cell (0, 0).
    """

    cells: np.ndarray
    resolution: float = 0.02
    z_scale: float = 2.0
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        cells = np.asarray(self.cells)
        if cells.ndim != 2:
            raise ValueError(f"cells must be 2D, got shape {cells.shape}")
        if cells.dtype != np.uint16:
            if cells.min() < 0 or cells.max() > MAX_CODE:
                raise ValueError("cell codes must lie in [0, 65535]")
            cells = cells.astype(np.uint16)
        object.__setattr__(self, "cells", cells)
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.z_scale <= 0:
            raise ValueError("z_scale must be positive")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def rows(self) -> int:
        return self.cells.shape[0]

    @property
    def cols(self) -> int:
        return self.cells.shape[1]

    @property
    def extent(self) -> tuple[float, float]:
        """Metric extent (x_size, y_size) in meters."""
        return (self.cols * self.resolution, self.rows * self.resolution)

    @classmethod
    def zeros(cls, rows: int = 1001, cols: int = 1001, resolution: float = 0.02,
              z_scale: float = 2.0, origin: tuple[float, float] | None = None) -> "Heightfield":
        """Flat terrain at code 0.  Default origin centers the grid on (0, 0)."""
        if origin is None:
            origin = (-(cols - 1) * resolution / 2.0, -(rows - 1) * resolution / 2.0)
        return cls(np.zeros((rows, cols), dtype=np.uint16), resolution, z_scale, origin)

    def heights(self) -> np.ndarray:
        """Grid heights in meters (float64)."""
        return code_to_meters(self.cells, self.z_scale)

    def bounds(self) -> tuple[float, float, float, float]:
        """Interpolation domain (x_min, x_max, y_min, y_max): the cell-center hull."""
        ox, oy = self.origin
        return (ox, ox + (self.cols - 1) * self.resolution,
                oy, oy + (self.rows - 1) * self.resolution)

    def contains(self, x: float, y: float) -> bool:
        x_min, x_max, y_min, y_max = self.bounds()
        return x_min <= x <= x_max and y_min <= y <= y_max


def _bilinear(hf: Heightfield, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinear height sampling in meters; coordinates must be pre-clamped."""
    gx = (xs - hf.origin[0]) / hf.resolution
    gy = (ys - hf.origin[1]) / hf.resolution
    # snap float noise onto cell centers so they reproduce cell values exactly
    for g in (gx, gy):
        nearest = np.rint(g)
        snap = np.abs(g - nearest) < 1e-9
        g[snap] = nearest[snap]
    c0 = np.clip(np.floor(gx).astype(np.intp), 0, hf.cols - 2) if hf.cols > 1 else np.zeros_like(gx, dtype=np.intp)
    r0 = np.clip(np.floor(gy).astype(np.intp), 0, hf.rows - 2) if hf.rows > 1 else np.zeros_like(gy, dtype=np.intp)
    tx = gx - c0
    ty = gy - r0
    h = hf.heights()
    h00 = h[r0, c0]
    h01 = h[r0, c0 + 1] if hf.cols > 1 else h00
    h10 = h[r0 + 1, c0] if hf.rows > 1 else h00
    h11 = h[r0 + 1, c0 + 1] if hf.rows > 1 and hf.cols > 1 else h00
    return (h00 * (1 - tx) * (1 - ty) + h01 * tx * (1 - ty)
            + h10 * (1 - tx) * ty + h11 * tx * ty)


def height_at(hf: Heightfield, x: float, y: float) -> float:
    """Bilinearly interpolated terrain height (m) at world (x, y).

    Raises :class:`OutOfExtentError` when the query leaves the hull of
    cell centers.
    """
    if not hf.contains(x, y):
        raise OutOfExtentError(f"query ({x:.3f}, {y:.3f}) outside terrain extent {hf.bounds()}")
    return float(_bilinear(hf, np.asarray([x], dtype=np.float64), np.asarray([y], dtype=np.float64))[0])


def heights_along(hf: Heightfield, points: np.ndarray) -> np.ndarray:
    """Heights at an (n, 2) array of world points; raises if any is outside."""
    pts = np.asarray(points, dtype=np.float64)
    x_min, x_max, y_min, y_max = hf.bounds()
    if (pts[:, 0] < x_min).any() or (pts[:, 0] > x_max).any() \
            or (pts[:, 1] < y_min).any() or (pts[:, 1] > y_max).any():
        raise OutOfExtentError("sample path leaves terrain extent")
    return _bilinear(hf, pts[:, 0], pts[:, 1])


def max_height_on_segment(hf: Heightfield, p0, p1) -> float:
    """Maximum interpolated height along the segment from ``p0`` to ``p1``.

    Samples are spaced at most ``resolution / 2`` apart, endpoints included.
    """
    p0 = np.asarray(p0, dtype=np.float64)
    p1 = np.asarray(p1, dtype=np.float64)
    for p in (p0, p1):
        if not hf.contains(p[0], p[1]):
            raise OutOfExtentError(f"segment endpoint ({p[0]:.3f}, {p[1]:.3f}) outside extent")
    length = float(np.hypot(*(p1 - p0)))
    n = max(1, int(np.ceil(length / (hf.resolution / 2.0))))
    ts = np.linspace(0.0, 1.0, n + 1)
    pts = p0[None, :] + ts[:, None] * (p1 - p0)[None, :]
    return float(heights_along(hf, pts).max())


@dataclass(frozen=True)
class ElevationPatch:
    """Robot-local 91x91 elevation slice in meters, clipped to [-2, 2]."""

    values: np.ndarray
    center_pose: tuple[float, float, float] = (0.0, 0.0, 0.0)  # world x, y, yaw
    resolution: float = PATCH_RESOLUTION

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (PATCH_SIZE, PATCH_SIZE):
            raise ValueError(f"patch must be {PATCH_SIZE}x{PATCH_SIZE}, got {values.shape}")
        if values.min() < -PATCH_CLIP - 1e-12 or values.max() > PATCH_CLIP + 1e-12:
            raise ValueError("patch values must lie in [-2, 2] m")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "center_pose", tuple(float(v) for v in self.center_pose))

    @property
    def span(self) -> float:
        """Side length of the patch footprint in meters."""
        return (PATCH_SIZE - 1) * self.resolution

    def local_coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Patch-frame (x, y) meshgrids of cell centers; (0, 0) at the center cell."""
        half = PATCH_SIZE // 2
        axis = (np.arange(PATCH_SIZE) - half) * self.resolution
        return np.meshgrid(axis, axis)

    def value_at_cell(self, row: int, col: int) -> float:
        return float(self.values[row, col])


def slice_patch(hf: Heightfield, center, yaw: float) -> ElevationPatch:
    """Slice a gravity-aligned 91x91 patch centered at ``center``, rotated by ``yaw``.

    Patch columns run along the rotated +x (frontal) axis and rows along the
    rotated +y (lateral) axis.  Samples falling outside the terrain clamp to
    the nearest edge; values clip to [-2, 2] m.
    """
    cx, cy = float(center[0]), float(center[1])
    half = PATCH_SIZE // 2
    axis = (np.arange(PATCH_SIZE) - half) * PATCH_RESOLUTION
    lx, ly = np.meshgrid(axis, axis)
    c, s = np.cos(yaw), np.sin(yaw)
    wx = cx + c * lx - s * ly
    wy = cy + s * lx + c * ly
    x_min, x_max, y_min, y_max = hf.bounds()
    wx = np.clip(wx, x_min, x_max)
    wy = np.clip(wy, y_min, y_max)
    values = _bilinear(hf, wx.ravel(), wy.ravel()).reshape(PATCH_SIZE, PATCH_SIZE)
    values = np.clip(values, -PATCH_CLIP, PATCH_CLIP)
    return ElevationPatch(values, (cx, cy, float(yaw)))


@dataclass(frozen=True)
class AugmentationSpec:
    """Patch augmentation: rotate, mirror, rescale contrast, add noise.

    ``rotation`` counts 90-degree counterclockwise turns; ``contrast_gain``
    rescales values about the patch mean; ``noise_sigma`` is the standard
    deviation (m) of additive Gaussian noise.
    """

    rotation: int = 0
    mirror_x: bool = False
    mirror_y: bool = False
    contrast_gain: float = 1.0
    noise_sigma: float = 0.0

    def validate(self, contrast_range: tuple[float, float] = DEFAULT_CONTRAST_RANGE) -> None:
        if self.rotation not in (0, 1, 2, 3):
            raise ValueError("rotation must be a quarter-turn index in {0, 1, 2, 3}")
        lo, hi = contrast_range
        if not (lo <= self.contrast_gain <= hi):
            raise ValueError(f"contrast_gain {self.contrast_gain} outside [{lo}, {hi}]")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")


def augment_patch(patch: ElevationPatch, spec: AugmentationSpec, seed: int,
                  contrast_range: tuple[float, float] = DEFAULT_CONTRAST_RANGE) -> ElevationPatch:
    """Apply rotate -> mirror -> contrast -> noise -> clip, seeded.

    Rotation is restricted to quarter turns so the transform is exactly
    invertible on the grid; contrast rescales about the patch mean.
    """
    spec.validate(contrast_range)
    values = patch.values
    if spec.rotation:
        values = np.rot90(values, k=spec.rotation)
    if spec.mirror_x:
        values = values[:, ::-1]
    if spec.mirror_y:
        values = values[::-1, :]
    if spec.contrast_gain != 1.0:
        mean = values.mean()
        values = mean + spec.contrast_gain * (values - mean)
    if spec.noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        values = values + rng.normal(0.0, spec.noise_sigma, values.shape)
    values = np.clip(values, -PATCH_CLIP, PATCH_CLIP)
    return ElevationPatch(np.ascontiguousarray(values), patch.center_pose, patch.resolution)


# ---------------------------------------------------------------------------
# 16-bit grayscale PNG encoding with a JSON metadata sidecar.

def to_png_bytes(hf: Heightfield) -> bytes:
    """Encode the cell grid as a single-channel 16-bit PNG."""
    img = Image.fromarray(hf.cells)  # uint16 -> mode I;16
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def metadata_dict(hf: Heightfield) -> dict:
    """Sidecar metadata with fixed field names."""
    return {"resolution": hf.resolution, "z_scale": hf.z_scale, "origin": list(hf.origin)}


def from_png_bytes(data: bytes, resolution: float, z_scale: float,
                   origin: tuple[float, float],
                   expected_shape: tuple[int, int] | None = None) -> Heightfield:
    """Decode a single-channel 16-bit PNG back into a heightfield.

    Raises ``ValueError`` on wrong bit depth, wrong channel count, or (when
    ``expected_shape`` is given) a dimension mismatch.
    """
    img = Image.open(io.BytesIO(data))
    if img.mode != "I;16":
        raise ValueError(f"expected single-channel 16-bit PNG, got mode {img.mode!r}")
    cells = np.asarray(img, dtype=np.uint16)
    if expected_shape is not None and cells.shape != tuple(expected_shape):
        raise ValueError(f"dimension mismatch: got {cells.shape}, expected {tuple(expected_shape)}")
    return Heightfield(cells, resolution, z_scale, origin)


def write_heightfield(hf: Heightfield, png_path) -> None:
    """Write ``<path>.png`` plus the ``<path>.json`` metadata sidecar."""
    png_path = Path(png_path)
    png_path.write_bytes(to_png_bytes(hf))
    sidecar = png_path.with_suffix(".json")
    sidecar.write_text(json.dumps(metadata_dict(hf), sort_keys=True) + "\n")


def read_heightfield(png_path) -> Heightfield:
    """Read a heightfield written by :func:`write_heightfield`."""
    png_path = Path(png_path)
    meta = json.loads(png_path.with_suffix(".json").read_text())
    return from_png_bytes(png_path.read_bytes(), meta["resolution"], meta["z_scale"],
                          tuple(meta["origin"]))
