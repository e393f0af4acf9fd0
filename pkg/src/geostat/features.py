"""Feature-matrix assembly: windowed summaries of geometric distributions.

A feature row is built by deriving the geometric signal stack of a series
once, splitting the time axis into consecutive equal windows, and
summarizing every derived distribution inside every window. Columns follow a
fixed (distribution, window, statistic) order, distribution-major, so that
ablation masks and single-window slices are plain index computations.
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .geometry import build_stack
from .series import UniformSeries
from .stats import (
    MULTIVARIATE_QUANTILES,
    SphericalSample,
    SummaryConfig,
    frechet_mean_variance,
    summarize,
)

__all__ = [
    "GeoStatConfig",
    "FeatureMatrix",
    "AblationMask",
    "UNIVARIATE_DISTRIBUTIONS",
    "FRECHET_STATISTICS",
    "window_bounds",
    "extract_univariate",
    "extract_multivariate",
    "univariate_matrix",
    "z_normalize",
    "apply_mask",
    "single_window",
    "write_feature_csv",
    "read_feature_csv",
]

UNIVARIATE_DISTRIBUTIONS = (
    "position", "velocity", "acceleration", "curvature", "signed_curvature",
)

# Spherical position is summarized by intrinsic mean coordinates plus the
# intrinsic variance rather than by a scalar summary vector.
FRECHET_STATISTICS = ("frechet_lat", "frechet_lon", "frechet_var")

STATISTIC_GROUPS = ("low_quantiles", "mid_quantiles", "high_quantiles")


@dataclass(frozen=True)
class GeoStatConfig:
    """Extraction settings: resampling floor, smoothing, windows, statistics."""

    min_samples: int = 500
    smoothing_iterations: int = 1
    num_windows: int = 1
    summary: SummaryConfig = field(default_factory=SummaryConfig)

    def __post_init__(self):
        if self.min_samples < 3:
            raise ValueError("min_samples must be at least 3")
        if self.smoothing_iterations < 0:
            raise ValueError("smoothing_iterations must be non-negative")
        if self.num_windows < 1:
            raise ValueError("num_windows must be at least 1")


@dataclass(frozen=True)
class FeatureMatrix:
    """Rectangular feature block: one row per series, labeled columns.

    ``column_labels`` holds (distribution, window, statistic) triples aligned
    with the columns of ``rows``; ``labels`` holds one class label per row.
    """

    rows: np.ndarray
    column_labels: tuple
    labels: tuple

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2:
            raise ValueError("rows must be a 2-d array")
        cols = tuple((str(d), int(w), str(s)) for d, w, s in self.column_labels)
        if rows.shape[1] != len(cols):
            raise ValueError("column label count does not match row width")
        if len(set(cols)) != len(cols):
            raise ValueError("column labels must be unique")
        labels = tuple(str(v) for v in self.labels)
        if rows.shape[0] != len(labels):
            raise ValueError("label count does not match row count")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "column_labels", cols)
        object.__setattr__(self, "labels", labels)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_columns(self) -> int:
        return self.rows.shape[1]

    @property
    def distributions(self) -> tuple:
        seen = []
        for d, _, _ in self.column_labels:
            if d not in seen:
                seen.append(d)
        return tuple(seen)

    @property
    def statistics(self) -> tuple:
        seen = []
        for _, _, s in self.column_labels:
            if s not in seen:
                seen.append(s)
        return tuple(seen)

    @property
    def windows(self) -> tuple:
        return tuple(sorted({w for _, w, _ in self.column_labels}))


@dataclass(frozen=True)
class AblationMask:
    """Named columns to drop: whole distributions and/or statistics.

    Statistic names may be the literal names present in the matrix or one of
    the quantile groups ``low_quantiles`` (lowest four), ``high_quantiles``
    (highest four), and ``mid_quantiles`` (middle three).
    """

    removed_distributions: frozenset = frozenset()
    removed_statistics: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "removed_distributions",
                           frozenset(str(x) for x in self.removed_distributions))
        object.__setattr__(self, "removed_statistics",
                           frozenset(str(x) for x in self.removed_statistics))


def window_bounds(n_samples: int, num_windows: int) -> list:
    """Split ``range(n_samples)`` into consecutive windows of near-equal size.

    The first ``n_samples % num_windows`` windows receive one extra sample,
    so sizes differ by at most one and the windows partition the index range.
    """
    if num_windows < 1:
        raise ValueError("need at least one window")
    if num_windows > n_samples:
        raise ValueError("more windows than samples")
    base = n_samples // num_windows
    extra = n_samples % num_windows
    bounds = []
    start = 0
    for w in range(num_windows):
        size = base + (1 if w < extra else 0)
        bounds.append((start, start + size))
        start += size
    return bounds


def _check_window_sizes(n_samples: int, num_windows: int) -> list:
    bounds = window_bounds(n_samples, num_windows)
    if min(b - a for a, b in bounds) < 3:
        raise ValueError(
            f"{n_samples} samples leave fewer than 3 per window "
            f"with {num_windows} windows")
    return bounds


def extract_univariate(us: UniformSeries, cfg: GeoStatConfig):
    """Feature row of a univariate series.

    Derives the signal stack globally, then summarizes the five distributions
    (position, velocity, acceleration, curvature, signed curvature) inside
    each window. Returns ``(values, column_labels)``.
    """
    if us.dim != 1:
        raise ValueError("extract_univariate requires a 1-dimensional series")
    bounds = _check_window_sizes(us.n_samples, cfg.num_windows)
    stack = build_stack(us, cfg.smoothing_iterations)
    dists = {
        "position": stack.base.values[:, 0],
        "velocity": stack.first_deriv.values[:, 0],
        "acceleration": stack.second_deriv.values[:, 0],
        "curvature": stack.curvature,
        "signed_curvature": stack.signed_curvature,
    }
    values = []
    labels = []
    stat_names = cfg.summary.statistic_names
    for name in UNIVARIATE_DISTRIBUTIONS:
        samples = dists[name]
        for w, (a, b) in enumerate(bounds):
            vec = summarize(samples[a:b], cfg.summary)
            values.extend(vec.tolist())
            labels.extend((name, w, s) for s in stat_names)
    return np.array(values), labels


def extract_multivariate(us: UniformSeries, cfg: GeoStatConfig,
                         extra_distributions=None, degrees: bool = True):
    """Feature row of a multivariate series with spherical positions.

    The first two value dimensions are read as (latitude, longitude), in
    degrees by default. Per window, position contributes the intrinsic mean
    coordinates and intrinsic variance; speed and its derivative contribute
    scalar summary vectors; each entry of ``extra_distributions`` (a mapping
    of name to a scalar sample array aligned with the series) contributes a
    scalar summary vector as well.
    """
    if us.dim < 2:
        raise ValueError("extract_multivariate requires dimension >= 2")
    extras = dict(extra_distributions or {})
    for name, arr in extras.items():
        if len(np.asarray(arr)) != us.n_samples:
            raise ValueError(f"extra distribution {name!r} is not aligned")
    bounds = _check_window_sizes(us.n_samples, cfg.num_windows)
    stack = build_stack(us, cfg.smoothing_iterations)

    lat = stack.base.values[:, 0]
    lon = stack.base.values[:, 1]
    if degrees:
        lat = np.radians(lat)
        lon = np.radians(lon)

    values = []
    labels = []
    for w, (a, b) in enumerate(bounds):
        (m_lat, m_lon), var = frechet_mean_variance(
            SphericalSample(lat[a:b], lon[a:b]))
        if degrees:
            m_lat, m_lon = np.degrees(m_lat), np.degrees(m_lon)
        values.extend([m_lat, m_lon, var])
        labels.extend(("position", w, s) for s in FRECHET_STATISTICS)

    scalar_dists = [("speed", stack.speed), ("speed_derivative", stack.speed_deriv)]
    scalar_dists.extend(sorted(extras.items()))
    stat_names = cfg.summary.statistic_names
    for name, samples in scalar_dists:
        samples = np.asarray(samples, dtype=float)
        for w, (a, b) in enumerate(bounds):
            vec = summarize(samples[a:b], cfg.summary)
            values.extend(vec.tolist())
            labels.extend((name, w, s) for s in stat_names)
    return np.array(values), labels


def multivariate_summary_config() -> SummaryConfig:
    return SummaryConfig(quantiles=MULTIVARIATE_QUANTILES)


def univariate_matrix(series, class_labels, cfg: GeoStatConfig) -> FeatureMatrix:
    """Stack univariate feature rows for a collection of uniform series."""
    series = list(series)
    class_labels = list(class_labels)
    if len(series) != len(class_labels):
        raise ValueError("series and labels counts differ")
    if not series:
        raise ValueError("empty collection")
    rows = []
    labels = None
    for us in series:
        vec, row_labels = extract_univariate(us, cfg)
        if labels is None:
            labels = row_labels
        rows.append(vec)
    return FeatureMatrix(np.vstack(rows), tuple(labels), tuple(class_labels))


def z_normalize(train: FeatureMatrix, others=()):
    """Standardize columns using training-set statistics only.

    Returns ``(train_out, others_out, means, stds)``. Columns with zero
    variance in the training data map to zero everywhere (in the training
    matrix and in every held-out matrix alike).

    Raises
    ------
    ValueError
        If a held-out matrix has a different column schema.
    """
    others = list(others)
    for fm in others:
        if fm.column_labels != train.column_labels:
            raise ValueError("column schema mismatch between matrices")
    means = train.rows.mean(axis=0)
    stds = train.rows.std(axis=0)
    safe = np.where(stds > 0, stds, 1.0)

    def transform(fm: FeatureMatrix) -> FeatureMatrix:
        normed = (fm.rows - means) / safe
        normed[:, stds == 0] = 0.0
        return FeatureMatrix(normed, fm.column_labels, fm.labels)

    return transform(train), [transform(fm) for fm in others], means, stds


def _expand_statistic_groups(names, present_stats):
    """Resolve quantile group names against the statistics actually present."""
    q_stats = [s for s in present_stats if s.startswith("q")]
    expanded = set()
    for name in names:
        if name == "low_quantiles":
            expanded.update(q_stats[:4])
        elif name == "high_quantiles":
            expanded.update(q_stats[-4:])
        elif name == "mid_quantiles":
            mid = len(q_stats) // 2
            expanded.update(q_stats[mid - 1:mid + 2])
        elif name in present_stats:
            expanded.add(name)
        else:
            raise ValueError(f"unknown statistic name {name!r}")
    return expanded


def apply_mask(fm: FeatureMatrix, mask: AblationMask) -> FeatureMatrix:
    """Drop every column whose distribution or statistic the mask names.

    Row class labels are preserved. Raises if a mask name is not in the
    matrix vocabulary or if no columns would remain.
    """
    present_dists = set(fm.distributions)
    for name in mask.removed_distributions:
        if name not in present_dists:
            raise ValueError(f"unknown distribution name {name!r}")
    removed_stats = _expand_statistic_groups(mask.removed_statistics,
                                             fm.statistics)
    keep = [i for i, (d, _, s) in enumerate(fm.column_labels)
            if d not in mask.removed_distributions and s not in removed_stats]
    if not keep:
        raise ValueError("mask removes every column")
    cols = tuple(fm.column_labels[i] for i in keep)
    return FeatureMatrix(fm.rows[:, keep], cols, fm.labels)


def single_window(fm: FeatureMatrix, window: int) -> FeatureMatrix:
    """Restrict a windowed matrix to the columns of one window index."""
    keep = [i for i, (_, w, _) in enumerate(fm.column_labels) if w == window]
    if not keep:
        raise ValueError(f"no columns for window {window}")
    cols = tuple((d, 0, s) for d, _, s in
                 (fm.column_labels[i] for i in keep))
    return FeatureMatrix(fm.rows[:, keep], cols, fm.labels)


def _format_float(x: float) -> str:
    return repr(float(x))


def write_feature_csv(fm: FeatureMatrix, path) -> None:
    """Serialize to CSV: one ``distribution.window.statistic`` header per
    column plus a trailing ``label`` column. Written atomically."""
    path = os.fspath(path)
    header = [f"{d}.{w}.{s}" for d, w, s in fm.column_labels] + ["label"]
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row, label in zip(fm.rows, fm.labels):
                writer.writerow([_format_float(v) for v in row] + [label])
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def read_feature_csv(path) -> FeatureMatrix:
    """Inverse of :func:`write_feature_csv`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[-1] != "label":
            raise ValueError(f"{path}: expected trailing 'label' column")
        cols = []
        for name in header[:-1]:
            # Statistic names may themselves contain dots (q0.5), so split
            # off the distribution and window from the left.
            dist, window, stat = name.split(".", 2)
            cols.append((dist, int(window), stat))
        rows = []
        labels = []
        for line in reader:
            rows.append([float(v) for v in line[:-1]])
            labels.append(line[-1])
    return FeatureMatrix(np.array(rows, dtype=float), tuple(cols), tuple(labels))
