"""Procedural terrain synthesis from parameterized objects.

Terrains compose 1 to 5 objects (stairs, wave, bricks, unstructured patch,
planks) onto a flat 16-bit elevation grid.  Objects are rasterized in list
order with last-writer-wins per cell; there is no collision handling between
overlapping objects.  All randomness flows from an explicit seed, so a
(specs, seed) pair always produces a byte-identical grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .heightfield import Heightfield, meters_to_code

WORLD_ROWS = 1001
WORLD_COLS = 1001
WORLD_RESOLUTION = 0.02
WORLD_Z_SCALE = 2.0

EVAL_CELLS = 251          # 5 x 5 m evaluation tile at 0.02 m/cell
EVAL_LENGTH_RANGE = (2.0, 3.6)

MAX_OBJECTS = 5


@dataclass(frozen=True)
class Stairs:
    """Ascending steps along the local +x axis; plateau k sits at k * total / n."""

    n_steps: int
    total_height: float
    run_depth: float

    def validate(self) -> None:
        if not 3 <= self.n_steps <= 8:
            raise ValueError(f"stairs need 3..8 steps, got {self.n_steps}")
        if self.total_height <= 0 or self.run_depth <= 0:
            raise ValueError("stairs total_height and run_depth must be positive")


@dataclass(frozen=True)
class Wave:
    """Raised cosine along the local x axis, peaking at ``amplitude`` in the middle.

    ``period`` is the spatial angular frequency in rad/m (the printed range
    pi/2..pi corresponds to wavelengths of 2..4 m); its unit convention is
    not pinned down anywhere authoritative, so the raw parameter is exposed.
    """

    amplitude: float
    period: float

    def validate(self) -> None:
        if self.amplitude <= 0 or self.period <= 0:
            raise ValueError("wave amplitude and period must be positive")


@dataclass(frozen=True)
class Bricks:
    """Square tiles of side ``cell_size`` with heights drawn from {-h, 0, +h}."""

    cell_size: float = 0.10
    height: float = 0.05

    def validate(self) -> None:
        if self.cell_size <= 0 or self.height <= 0:
            raise ValueError("bricks cell_size and height must be positive")


@dataclass(frozen=True)
class Unstructured:
    """Uniform noise in [0, amplitude] smoothed by a Gaussian filter (sigma in cells)."""

    amplitude: float
    smoothing_sigma: float = 2.0

    def validate(self) -> None:
        if self.amplitude <= 0 or self.smoothing_sigma <= 0:
            raise ValueError("unstructured amplitude and smoothing_sigma must be positive")


@dataclass(frozen=True)
class Planks:
    """Raised boards running along local x, repeated across y with flat gaps."""

    width: float = 0.25
    height: float = 0.10
    gap: float = 0.05

    def validate(self) -> None:
        if self.width <= 0 or self.height <= 0 or self.gap <= 0:
            raise ValueError("planks width, height and gap must be positive")


ObjectShape = Stairs | Wave | Bricks | Unstructured | Planks

_KIND_BY_TYPE = {Stairs: "stairs", Wave: "wave", Bricks: "bricks",
                 Unstructured: "unstructured", Planks: "planks"}
_TYPE_BY_KIND = {v: k for k, v in _KIND_BY_TYPE.items()}


@dataclass(frozen=True)
class TerrainObjectSpec:
    """One placed object: its shape parameters, square footprint, and pose."""

    shape: ObjectShape
    footprint: float
    offset: tuple[float, float] = (0.0, 0.0)
    yaw: float = 0.0

    @property
    def kind(self) -> str:
        return _KIND_BY_TYPE[type(self.shape)]

    def validate(self) -> None:
        if self.footprint <= 0:
            raise ValueError("footprint must be positive")
        self.shape.validate()

    def local_extent(self) -> tuple[float, float]:
        """Occupied size (len_x, len_y) in the object's local frame."""
        if isinstance(self.shape, Stairs):
            return (self.shape.n_steps * self.shape.run_depth, self.footprint)
        return (self.footprint, self.footprint)


def _profile_heights(spec: TerrainObjectSpec, lx: np.ndarray, ly: np.ndarray,
                     resolution: float, rng: np.random.Generator) -> np.ndarray:
    """Heights (m) at local coordinates inside the object footprint."""
    ext_x, ext_y = spec.local_extent()
    shape = spec.shape
    if isinstance(shape, Stairs):
        step = np.clip(np.floor((lx + ext_x / 2) / shape.run_depth).astype(int),
                       0, shape.n_steps - 1)
        return (step + 1) * (shape.total_height / shape.n_steps)
    if isinstance(shape, Wave):
        return shape.amplitude * 0.5 * (1.0 + np.cos(shape.period * lx))
    if isinstance(shape, Bricks):
        n_bx = max(1, int(math.ceil(ext_x / shape.cell_size)))
        n_by = max(1, int(math.ceil(ext_y / shape.cell_size)))
        lattice = rng.choice(np.array([-shape.height, 0.0, shape.height]), size=(n_by, n_bx))
        bx = np.clip(np.floor((lx + ext_x / 2) / shape.cell_size).astype(int), 0, n_bx - 1)
        by = np.clip(np.floor((ly + ext_y / 2) / shape.cell_size).astype(int), 0, n_by - 1)
        return lattice[by, bx]
    if isinstance(shape, Unstructured):
        n_x = int(round(ext_x / resolution)) + 1
        n_y = int(round(ext_y / resolution)) + 1
        noise = rng.uniform(0.0, shape.amplitude, size=(n_y, n_x))
        smoothed = gaussian_filter(noise, sigma=shape.smoothing_sigma, mode="reflect")
        ix = np.clip(np.rint((lx + ext_x / 2) / resolution).astype(int), 0, n_x - 1)
        iy = np.clip(np.rint((ly + ext_y / 2) / resolution).astype(int), 0, n_y - 1)
        return smoothed[iy, ix]
    if isinstance(shape, Planks):
        pitch = shape.width + shape.gap
        local = np.mod(ly + ext_y / 2, pitch)
        return np.where(local < shape.width, shape.height, 0.0)
    raise TypeError(f"unknown object shape {type(shape).__name__}")


def _rasterize(spec: TerrainObjectSpec, cells: np.ndarray, resolution: float,
               z_scale: float, origin: tuple[float, float],
               rng: np.random.Generator) -> None:
    """Draw one object into ``cells`` (last-writer-wins inside its footprint)."""
    ext_x, ext_y = spec.local_extent()
    cx, cy = spec.offset
    c, s = math.cos(spec.yaw), math.sin(spec.yaw)
    corners_local = np.array([[-ext_x / 2, -ext_y / 2], [ext_x / 2, -ext_y / 2],
                              [ext_x / 2, ext_y / 2], [-ext_x / 2, ext_y / 2]])
    rot = np.array([[c, -s], [s, c]])
    corners = corners_local @ rot.T + np.array([cx, cy])

    rows, cols = cells.shape
    x_min, x_max = origin[0], origin[0] + (cols - 1) * resolution
    y_min, y_max = origin[1], origin[1] + (rows - 1) * resolution
    if (corners[:, 0] < x_min - 1e-9).any() or (corners[:, 0] > x_max + 1e-9).any() \
            or (corners[:, 1] < y_min - 1e-9).any() or (corners[:, 1] > y_max + 1e-9).any():
        raise ValueError(f"{spec.kind} object extends beyond the terrain grid")

    c_lo = max(0, int(math.floor((corners[:, 0].min() - origin[0]) / resolution)))
    c_hi = min(cols - 1, int(math.ceil((corners[:, 0].max() - origin[0]) / resolution)))
    r_lo = max(0, int(math.floor((corners[:, 1].min() - origin[1]) / resolution)))
    r_hi = min(rows - 1, int(math.ceil((corners[:, 1].max() - origin[1]) / resolution)))

    xs = origin[0] + np.arange(c_lo, c_hi + 1) * resolution
    ys = origin[1] + np.arange(r_lo, r_hi + 1) * resolution
    wx, wy = np.meshgrid(xs, ys)
    # inverse pose transform into the object frame
    dx, dy = wx - cx, wy - cy
    lx = c * dx + s * dy
    ly = -s * dx + c * dy
    # half-open upper edge keeps rasterized width == round(extent / resolution) cells
    eps = 1e-9
    inside = ((lx >= -ext_x / 2 - eps) & (lx < ext_x / 2 - eps)
              & (ly >= -ext_y / 2 - eps) & (ly < ext_y / 2 - eps))
    if not inside.any():
        return
    heights = _profile_heights(spec, lx[inside], ly[inside], resolution, rng)
    block = cells[r_lo:r_hi + 1, c_lo:c_hi + 1]
    block[inside] = meters_to_code(heights, z_scale)


def generate_terrain(specs: list[TerrainObjectSpec], seed: int) -> Heightfield:
    """Compose a 1001x1001 (20 x 20 m) terrain from 1..5 objects.

    Deterministic in (specs, seed); overlapping objects overwrite earlier
    ones cell by cell.
    """
    if not 1 <= len(specs) <= MAX_OBJECTS:
        raise ValueError(f"terrain needs 1..{MAX_OBJECTS} objects, got {len(specs)}")
    for spec in specs:
        spec.validate()
    hf = Heightfield.zeros(WORLD_ROWS, WORLD_COLS, WORLD_RESOLUTION, WORLD_Z_SCALE)
    cells = hf.cells.copy()
    streams = np.random.SeedSequence(seed).spawn(len(specs))
    for spec, stream in zip(specs, streams):
        _rasterize(spec, cells, hf.resolution, hf.z_scale, hf.origin,
                   np.random.default_rng(stream))
    return Heightfield(cells, hf.resolution, hf.z_scale, hf.origin)


def compose_eval_terrain(obj: TerrainObjectSpec, length: float, seed: int) -> Heightfield:
    """Build a 5 x 5 m evaluation tile with one centered object of the given length.

    The object's square footprint is set to ``length`` (stairs distribute it
    over their treads); everything outside stays flat at code 0.
    """
    lo, hi = EVAL_LENGTH_RANGE
    if not lo <= length <= hi:
        raise ValueError(f"evaluation object length must lie in [{lo}, {hi}] m")
    shape = obj.shape
    if isinstance(shape, Stairs):
        shape = Stairs(shape.n_steps, shape.total_height, length / shape.n_steps)
    centered = TerrainObjectSpec(shape, footprint=length, offset=(0.0, 0.0), yaw=obj.yaw)
    centered.validate()
    hf = Heightfield.zeros(EVAL_CELLS, EVAL_CELLS, WORLD_RESOLUTION, WORLD_Z_SCALE)
    cells = hf.cells.copy()
    _rasterize(centered, cells, hf.resolution, hf.z_scale, hf.origin,
               np.random.default_rng(np.random.SeedSequence(seed)))
    return Heightfield(cells, hf.resolution, hf.z_scale, hf.origin)


def sample_eval_object(kind: str, seed: int) -> tuple[TerrainObjectSpec, float]:
    """Draw a random evaluation object and length for the given kind.

    Parameter ranges: stairs use 3..8 steps with a clipped normal(0.3, 0.1)
    total height bounded to [0.25, 0.8] m; wave amplitude is uniform in
    [0.05, 0.1] m with period in [pi/2, pi] rad/m; brick heights are uniform
    in [0.02, 0.05] m on a 0.10 m lattice; unstructured amplitude is uniform
    in [0.0125, 0.025] m.  Plank defaults (0.25 m boards, 0.05 m gaps,
    heights uniform in [0.05, 0.15] m) are project conventions.
    """
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x7E44)))
    length = float(rng.uniform(*EVAL_LENGTH_RANGE))
    if kind == "stairs":
        n = int(rng.integers(3, 9))
        total = float(np.clip(rng.normal(0.3, 0.1), 0.25, 0.8))
        shape: ObjectShape = Stairs(n, total, length / n)
    elif kind == "wave":
        shape = Wave(float(rng.uniform(0.05, 0.1)), float(rng.uniform(np.pi / 2, np.pi)))
    elif kind == "bricks":
        shape = Bricks(0.10, float(rng.uniform(0.02, 0.05)))
    elif kind == "unstructured":
        shape = Unstructured(float(rng.uniform(0.0125, 0.025)))
    elif kind == "planks":
        shape = Planks(0.25, float(rng.uniform(0.05, 0.15)), 0.05)
    else:
        raise ValueError(f"unknown object kind {kind!r}")
    return TerrainObjectSpec(shape, footprint=length), length


# ---------------------------------------------------------------------------
# JSON serialization of object specs.

def spec_to_dict(spec: TerrainObjectSpec) -> dict:
    d = {"kind": spec.kind, "footprint": spec.footprint,
         "offset": list(spec.offset), "yaw": spec.yaw}
    d.update({k: v for k, v in vars(spec.shape).items()})
    return d


def spec_from_dict(d: dict) -> TerrainObjectSpec:
    kind = d.get("kind")
    if kind not in _TYPE_BY_KIND:
        raise ValueError(f"unknown object kind {kind!r}")
    cls = _TYPE_BY_KIND[kind]
    shape_fields = {f for f in cls.__dataclass_fields__}
    shape = cls(**{k: d[k] for k in shape_fields if k in d})
    return TerrainObjectSpec(shape, footprint=d["footprint"],
                             offset=tuple(d.get("offset", (0.0, 0.0))),
                             yaw=d.get("yaw", 0.0))


def specs_to_json(specs: list[TerrainObjectSpec]) -> str:
    return json.dumps([spec_to_dict(s) for s in specs], indent=2)


def specs_from_json(text: str) -> list[TerrainObjectSpec]:
    return [spec_from_dict(d) for d in json.loads(text)]
