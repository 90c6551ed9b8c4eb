"""Success-rate surfaces over two experiment parameters.

Trials are (x, y, success) triples; the surface is a Nadaraya-Watson
estimate with a Gaussian product kernel: at each grid node the success
indicators of all trials are averaged with weights K((g - x_i) / h).
Cells whose total kernel weight falls below a floor carry no data and are
masked out.  Bandwidths default to a per-axis Silverman rule.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

WEIGHT_FLOOR = 1e-6


@dataclass(frozen=True)
class TrialRecord:
    """One experiment outcome at a parameter point."""

    x: float
    y: float
    success: bool
    metadata: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("trial parameters must be finite")


@dataclass(frozen=True)
class GridSpec:
    """Rectangular evaluation grid for the success surface."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int = 50
    ny: int = 50

    def __post_init__(self):
        if self.x_min >= self.x_max or self.y_min >= self.y_max:
            raise ValueError("grid bounds must satisfy min < max")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 nodes per axis")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.linspace(self.x_min, self.x_max, self.nx),
                np.linspace(self.y_min, self.y_max, self.ny))

    @classmethod
    def covering(cls, trials: list[TrialRecord], nx: int = 50, ny: int = 50,
                 pad: float = 0.05) -> "GridSpec":
        xs = np.array([t.x for t in trials])
        ys = np.array([t.y for t in trials])
        dx = max(np.ptp(xs), 1e-6) * pad
        dy = max(np.ptp(ys), 1e-6) * pad
        return cls(float(xs.min() - dx), float(xs.max() + dx),
                   float(ys.min() - dy), float(ys.max() + dy), nx, ny)


@dataclass(frozen=True)
class SuccessGrid:
    """Estimated success probability over a grid; NaN marks no-data cells."""

    x_axis: np.ndarray
    y_axis: np.ndarray
    values: np.ndarray      # shape (ny, nx), in [0, 1] where supported
    supported: np.ndarray   # boolean, False where kernel weight under the floor
    bandwidth: tuple[float, float]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(self.y_axis), len(self.x_axis)):
            raise ValueError("grid values must be shaped (ny, nx)")
        finite = values[np.asarray(self.supported, dtype=bool)]
        if finite.size and (finite.min() < -1e-12 or finite.max() > 1.0 + 1e-12):
            raise ValueError("success probabilities must lie in [0, 1]")
        object.__setattr__(self, "values", values)


def silverman_bandwidth(samples: np.ndarray) -> float:
    """Per-axis Silverman rule for a bivariate product kernel: sigma * n^(-1/6)."""
    n = len(samples)
    sigma = float(np.std(samples))
    if sigma <= 0 or n < 2:
        return 1.0  # degenerate axis: any positive bandwidth gives the co-located ratio
    return sigma * n ** (-1.0 / 6.0)


def kde_success_grid(trials: list[TrialRecord], grid: GridSpec,
                     bandwidth: tuple[float, float] | None = None,
                     weight_floor: float = WEIGHT_FLOOR) -> SuccessGrid:
    """Nadaraya-Watson success probability over the grid.

    value(g) = sum_i K_h(g - x_i) s_i / sum_i K_h(g - x_i) with a Gaussian
    product kernel.  Cells with total weight under ``weight_floor`` are
    flagged unsupported and carry NaN.
    """
    if len(trials) < 2:
        raise ValueError("KDE needs at least 2 trials")
    xs = np.array([t.x for t in trials])
    ys = np.array([t.y for t in trials])
    ss = np.array([1.0 if t.success else 0.0 for t in trials])
    if bandwidth is None:
        bandwidth = (silverman_bandwidth(xs), silverman_bandwidth(ys))
    hx, hy = float(bandwidth[0]), float(bandwidth[1])
    if hx <= 0 or hy <= 0:
        raise ValueError("bandwidths must be positive")
    gx, gy = grid.axes()
    # separable kernel: (ny, n) and (nx, n) factor matrices
    kx = np.exp(-0.5 * ((gx[:, None] - xs[None, :]) / hx) ** 2)
    ky = np.exp(-0.5 * ((gy[:, None] - ys[None, :]) / hy) ** 2)
    weight_total = np.einsum("yn,xn->yx", ky, kx)
    weight_success = np.einsum("yn,xn->yx", ky * ss[None, :], kx)
    supported = weight_total >= weight_floor
    values = np.full(weight_total.shape, np.nan)
    values[supported] = np.clip(weight_success[supported] / weight_total[supported], 0.0, 1.0)
    return SuccessGrid(gx, gy, values, supported, (hx, hy))


# ---------------------------------------------------------------------------
# CSV ingestion and grid export.

def trials_from_csv(text: str) -> list[TrialRecord]:
    """Read trials from CSV with header columns x, y, success[, metadata]."""
    reader = csv.DictReader(io.StringIO(text))
    required = {"x", "y", "success"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise ValueError("trial CSV needs columns x, y, success")
    trials = []
    for row in reader:
        success = row["success"].strip().lower() in ("1", "true", "yes")
        trials.append(TrialRecord(float(row["x"]), float(row["y"]), success,
                                  row.get("metadata", "") or ""))
    return trials


def grid_to_csv(grid: SuccessGrid) -> str:
    """Serialize the surface as long-form CSV: x, y, probability, supported."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "y", "probability", "supported"])
    for yi, y in enumerate(grid.y_axis):
        for xi, x in enumerate(grid.x_axis):
            v = grid.values[yi, xi]
            writer.writerow([repr(float(x)), repr(float(y)),
                             "" if math.isnan(v) else repr(float(v)),
                             int(bool(grid.supported[yi, xi]))])
    return buf.getvalue()


def grid_to_pgm(grid: SuccessGrid) -> bytes:
    """Binary PGM preview: probability scaled to 0..255, no-data cells black."""
    values = np.where(np.isnan(grid.values), 0.0, grid.values)
    img = np.rint(values * 255.0).astype(np.uint8)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    return header + img.tobytes()
