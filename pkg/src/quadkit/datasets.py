"""Dataset schemas, imbalanced-regression resampling, and randomization samplers.

Tabular data lives in a :class:`RecordSet`: named float columns where the
last column is the regression label.  Two canonical schemas are provided:
21-feature actuator records (joint tracking errors, desired velocities and
feed-forward torques, and PD gains over a short 400 Hz history) labeled
with the measured joint torque, and 47-feature stability records labeled
with the analytic margin.

``smogn_resample`` rebalances a record set for regression: rows in the
rare target partition are kept and topped up with synthetic rows, either
interpolated toward a near rare neighbor (SMOTER) or perturbed with
bounded Gaussian feature noise, while the majority partition is uniformly
undersampled.  Domain-randomization samplers draw physical perturbations
(gravity, torque and size scales, actuator damping, base pushes) from the
training distributions, all seeded.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .stability import MARGIN_LABEL_NAME, STABILITY_FEATURE_NAMES

UNBOUNDED_TOKEN = "unbounded"  # CSV sentinel for flagged-unbounded margins

_HISTORY = ("t", "t4", "t8")
_HISTORY_LAGGED = ("t1", "t5", "t9")

ACTUATOR_FEATURE_NAMES: tuple[str, ...] = tuple(
    [f"joint_pos_err_{h}" for h in _HISTORY]
    + [f"joint_vel_err_{h}" for h in _HISTORY_LAGGED]
    + [f"ff_torque_err_{h}" for h in _HISTORY_LAGGED]
    + [f"des_joint_vel_{h}" for h in _HISTORY]
    + [f"des_ff_torque_{h}" for h in _HISTORY]
    + [f"kp_{h}" for h in _HISTORY]
    + [f"kd_{h}" for h in _HISTORY]
)
ACTUATOR_LABEL_NAME = "measured_torque"
ACTUATOR_COLUMNS: tuple[str, ...] = ACTUATOR_FEATURE_NAMES + (ACTUATOR_LABEL_NAME,)

STABILITY_COLUMNS: tuple[str, ...] = tuple(STABILITY_FEATURE_NAMES) + (MARGIN_LABEL_NAME,)


@dataclass(frozen=True)
class RecordSet:
    """Named float table; by convention the last column is the label.

    A NaN in the label column marks a flagged-unbounded margin and is
    serialized as the ``unbounded`` token.
    """

    columns: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("record values must be a 2D array")
        if values.shape[1] != len(self.columns):
            raise ValueError(f"width mismatch: {values.shape[1]} values vs {len(self.columns)} columns")
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def features(self) -> np.ndarray:
        return self.values[:, :-1]

    @property
    def labels(self) -> np.ndarray:
        return self.values[:, -1]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]


def validate_actuator_records(rs: RecordSet) -> None:
    """Check the 21+1 actuator layout and positive PD gains."""
    if rs.columns != ACTUATOR_COLUMNS:
        raise ValueError("record set does not follow the actuator schema")
    for name in rs.columns:
        if name.startswith(("kp_", "kd_")) and (rs.column(name) <= 0).any():
            raise ValueError(f"column {name} must be strictly positive")


def stability_record_set(records) -> RecordSet:
    """Assemble (feature_row, margin_label) pairs into the 48-column schema.

    Accepts the tuples produced by ``stability.margin_record``; an NaN label
    (flagged-unbounded stance) is preserved and serializes as the sentinel.
    """
    rows = []
    for features, label in records:
        features = np.asarray(features, dtype=np.float64).reshape(-1)
        if features.shape[0] != len(STABILITY_COLUMNS) - 1:
            raise ValueError(f"stability rows carry {len(STABILITY_COLUMNS) - 1} "
                             f"features, got {features.shape[0]}")
        rows.append(np.concatenate([features, [float(label)]]))
    values = np.asarray(rows) if rows else np.zeros((0, len(STABILITY_COLUMNS)))
    return RecordSet(STABILITY_COLUMNS, values)


# ---------------------------------------------------------------------------
# Relevance functions and SMOGN resampling.

@dataclass(frozen=True)
class RelevanceSpec:
    """How to score rarity of the resampling target.

    ``boxplot-extremes`` ramps linearly from 0 at the target median to 1 at
    the boxplot adjacent values (suited to continuous targets);
    ``histogram-rarity`` scores 1 minus the max-normalized frequency of the
    exact target value (suited to categorical targets such as PD-gain
    regimes).  ``target_column`` indexes the scored column; the default -1
    (the label) fits actuator records where the gain regime drives the
    imbalance via ``kp_t``.
    """

    method: str = "histogram-rarity"
    threshold: float = 0.5
    target_column: int = -1
    k_neighbors: int = 5
    noise_scale: float = 0.05

    def __post_init__(self):
        if self.method not in ("boxplot-extremes", "histogram-rarity"):
            raise ValueError(f"unknown relevance method {self.method!r}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be at least 1")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be non-negative")


def relevance(rows: RecordSet, spec: RelevanceSpec) -> np.ndarray:
    """Per-row rarity score in [0, 1] for the spec's target column."""
    if len(rows) < 5:
        raise ValueError("relevance needs at least 5 rows")
    target = rows.values[:, spec.target_column]
    if np.ptp(target) < 1e-15:
        raise ValueError("target column is constant; relevance is undefined")
    if spec.method == "histogram-rarity":
        values, inverse, counts = np.unique(target, return_inverse=True, return_counts=True)
        return 1.0 - counts[inverse] / counts.max()
    median = float(np.median(target))
    q1, q3 = np.percentile(target, [25, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    lo_adj = float(target[target >= lo_fence].min())
    hi_adj = float(target[target <= hi_fence].max())
    out = np.zeros_like(target)
    above = target >= median
    if hi_adj > median:
        out[above] = np.clip((target[above] - median) / (hi_adj - median), 0.0, 1.0)
    else:
        out[above] = np.where(target[above] > median, 1.0, 0.0)
    below = ~above
    if lo_adj < median:
        out[below] = np.clip((median - target[below]) / (median - lo_adj), 0.0, 1.0)
    else:
        out[below] = 1.0
    return out


@dataclass(frozen=True)
class SyntheticProvenance:
    """Bookkeeping for one output row of ``smogn_resample``."""

    kind: str              # "original" | "smoter" | "noise"
    seed_index: int        # source row in the input set
    neighbor_index: int    # SMOTER partner (-1 otherwise)
    blend: float           # SMOTER interpolation coefficient


def smogn_resample(rows: RecordSet, spec: RelevanceSpec, seed: int,
                   ratio: float = 1.0, return_provenance: bool = False):
    """Rebalance a regression set: undersample common rows, synthesize rare ones.

    Rows with relevance >= threshold form the rare partition.  The output
    has ``ratio`` times the input size split evenly between partitions.
    Rare originals are all kept; the shortfall is synthesized from a random
    rare seed row, by SMOTER interpolation toward one of its k nearest rare
    neighbors (feature-space Euclidean distance) when that neighbor is near
    (closer than half the median rare pair distance), otherwise by Gaussian
    feature noise with per-feature scale ``noise_scale * std`` (std over the
    full input set) clipped at four standard deviations.  The label
    interpolates with the features on the SMOTER branch and is copied on
    the noise branch.  Undersampling keeps row order.
    """
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    if not np.isfinite(rows.values).all():
        raise ValueError("resampling requires finite numeric values")
    rng = np.random.default_rng(seed)
    scores = relevance(rows, spec)
    rare_idx = np.flatnonzero(scores >= spec.threshold)
    common_idx = np.flatnonzero(scores < spec.threshold)
    n_out = max(1, int(round(ratio * len(rows))))

    if rare_idx.size == 0:
        chosen = _undersample(common_idx, min(n_out, common_idx.size), rng)
        prov = [SyntheticProvenance("original", int(i), -1, 0.0) for i in chosen]
        result = RecordSet(rows.columns, rows.values[chosen])
        return (result, prov) if return_provenance else result
    if rare_idx.size < spec.k_neighbors + 1:
        raise ValueError(f"rare partition needs at least k_neighbors + 1 = "
                         f"{spec.k_neighbors + 1} rows, got {rare_idx.size}")

    n_rare_out = n_out // 2
    n_common_out = n_out - n_rare_out
    chosen_common = _undersample(common_idx, min(n_common_out, common_idx.size), rng)

    rare = rows.values[rare_idx]
    out_rows = [rows.values[i] for i in chosen_common]
    prov = [SyntheticProvenance("original", int(i), -1, 0.0) for i in chosen_common]
    if n_rare_out <= rare_idx.size:
        keep = _undersample(np.arange(rare_idx.size), n_rare_out, rng)
        out_rows.extend(rare[i] for i in keep)
        prov.extend(SyntheticProvenance("original", int(rare_idx[i]), -1, 0.0) for i in keep)
    else:
        out_rows.extend(rare)
        prov.extend(SyntheticProvenance("original", int(i), -1, 0.0) for i in rare_idx)
        rare_features = rare[:, :-1]
        dists = np.linalg.norm(rare_features[:, None, :] - rare_features[None, :, :], axis=2)
        order = np.argsort(dists, axis=1, kind="stable")
        pair_values = dists[np.triu_indices(rare_idx.size, k=1)]
        near_cutoff = 0.5 * float(np.median(pair_values))
        feature_std = rows.values.std(axis=0)
        noise_sigma = spec.noise_scale * feature_std
        noise_sigma[-1] = 0.0  # noise branch copies the label
        for _ in range(n_rare_out - rare_idx.size):
            a = int(rng.integers(rare_idx.size))
            neighbors = order[a, 1:spec.k_neighbors + 1]
            b = int(neighbors[rng.integers(len(neighbors))])
            if dists[a, b] <= near_cutoff:
                lam = float(rng.uniform())
                out_rows.append(rare[a] + lam * (rare[b] - rare[a]))
                prov.append(SyntheticProvenance("smoter", int(rare_idx[a]), int(rare_idx[b]), lam))
            else:
                noise = np.clip(rng.normal(0.0, 1.0, rare.shape[1]), -4.0, 4.0) * noise_sigma
                out_rows.append(rare[a] + noise)
                prov.append(SyntheticProvenance("noise", int(rare_idx[a]), -1, 0.0))
    result = RecordSet(rows.columns, np.asarray(out_rows))
    return (result, prov) if return_provenance else result


def _undersample(indices: np.ndarray, n_keep: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform subsample that preserves relative row order."""
    if n_keep >= indices.size:
        return indices
    keep = rng.choice(indices.size, size=n_keep, replace=False)
    return indices[np.sort(keep)]


# ---------------------------------------------------------------------------
# Domain randomization.

POLICY_KINDS = ("footstep", "tracking", "recovery")


@dataclass(frozen=True)
class RandomizationConfig:
    """Training-time perturbation ranges (defaults follow the training setup)."""

    gravity_scale: tuple[float, float] = (0.96, 1.04)
    torque_scale_recovery: tuple[float, float] = (0.9, 1.1)
    torque_scale_tracking: tuple[float, float] = (0.85, 1.15)
    mass_scale: tuple[float, float] = (0.93, 1.07)
    size_scale: tuple[float, float] = (0.97, 1.05)
    damping_gain: tuple[float, float] = (0.8, 1.0)
    force_sigma_recovery: float = 45.0
    force_sigma_tracking: float = 10.0
    force_clip_tracking: float = 30.0
    perturbation_duration: tuple[float, float] = (1.0, 4.0)
    base_gravity: float = 9.81

    def __post_init__(self):
        for name in ("gravity_scale", "torque_scale_recovery", "torque_scale_tracking",
                     "mass_scale", "size_scale", "damping_gain", "perturbation_duration"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} range must satisfy lo <= hi")
        if self.force_sigma_recovery <= 0 or self.force_sigma_tracking <= 0:
            raise ValueError("force sigmas must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "RandomizationConfig":
        kwargs = {}
        for key, value in d.items():
            kwargs[key] = tuple(value) if isinstance(value, (list, tuple)) else value
        return cls(**kwargs)


@dataclass(frozen=True)
class PerturbationAssignment:
    """One concrete draw of every randomized physical parameter."""

    gravity: float
    torque_scale: float
    mass_scale: float
    size_scale: float
    damping_gain: float
    force_xy: tuple[float, float]
    duration: float
    smooth_elevation: bool


def sample_randomization(cfg: RandomizationConfig, policy_kind: str,
                         seed: int) -> PerturbationAssignment:
    """Draw one perturbation assignment for a policy's training episode.

    Recovery training scales torques in the recovery range and pushes the
    base with unclipped N(0, 45 N) forces; tracking and footstep training
    use N(0, 10 N) clipped to +-30 N.  Torque scaling is not part of the
    footstep setup, so that draw is pinned to 1.  Base push forces act
    along the frontal and lateral axes.
    """
    if policy_kind not in POLICY_KINDS:
        raise ValueError(f"unknown policy kind {policy_kind!r}")
    rng = np.random.default_rng(seed)
    gravity = cfg.base_gravity * rng.uniform(*cfg.gravity_scale)
    if policy_kind == "recovery":
        torque_scale = rng.uniform(*cfg.torque_scale_recovery)
    elif policy_kind == "tracking":
        torque_scale = rng.uniform(*cfg.torque_scale_tracking)
    else:
        torque_scale = 1.0
    mass_scale = rng.uniform(*cfg.mass_scale)
    size_scale = rng.uniform(*cfg.size_scale)
    damping_gain = rng.uniform(*cfg.damping_gain)
    if policy_kind == "recovery":
        force = rng.normal(0.0, cfg.force_sigma_recovery, 2)
    else:
        clip = cfg.force_clip_tracking
        force = np.clip(rng.normal(0.0, cfg.force_sigma_tracking, 2), -clip, clip)
    duration = rng.uniform(*cfg.perturbation_duration)
    smooth = bool(rng.integers(2))
    return PerturbationAssignment(float(gravity), float(torque_scale), float(mass_scale),
                                  float(size_scale), float(damping_gain),
                                  (float(force[0]), float(force[1])), float(duration), smooth)


def damping_filter(joint_positions, previous_filtered, damping_gain: float) -> np.ndarray:
    """Complementary filter emulating actuator damping: K*J + (1-K)*J'_prev."""
    if not 0.8 <= damping_gain <= 1.0:
        raise ValueError("damping gain must lie in [0.8, 1.0]")
    j = np.asarray(joint_positions, dtype=np.float64)
    prev = np.asarray(previous_filtered, dtype=np.float64)
    return damping_gain * j + (1.0 - damping_gain) * prev


# ---------------------------------------------------------------------------
# CSV round trip with full float precision.

def records_to_csv(rs: RecordSet) -> str:
    """Serialize with repr-precision floats; NaN labels become the sentinel."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(rs.columns)
    last = len(rs.columns) - 1
    for row in rs.values:
        out = [repr(float(v)) for v in row]
        if math.isnan(row[last]):
            out[last] = UNBOUNDED_TOKEN
        writer.writerow(out)
    return buf.getvalue()


def records_from_csv(text: str, expected_columns: tuple[str, ...] | None = None) -> RecordSet:
    """Parse a record CSV; raises on malformed rows or a width mismatch."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty CSV: missing header row") from None
    columns = tuple(header)
    if expected_columns is not None and columns != tuple(expected_columns):
        raise ValueError("CSV header does not match the expected schema")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(columns):
            raise ValueError(f"line {lineno}: expected {len(columns)} fields, got {len(row)}")
        values = []
        for token in row:
            if token == UNBOUNDED_TOKEN:
                values.append(math.nan)
            else:
                values.append(float(token))
        rows.append(values)
    values = np.asarray(rows, dtype=np.float64) if rows else np.zeros((0, len(columns)))
    return RecordSet(columns, values)
