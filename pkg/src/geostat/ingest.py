"""Dataset loaders and vessel-trajectory preprocessing.

Two input families are supported. Archive-style classification datasets are
delimiter-separated text with the class label first on each row and the
series values after it; train and test splits live in ``*_TRAIN.*`` and
``*_TEST.*`` files. Vessel trajectories are CSVs of timestamped position
fixes with speed and distance-to-shore/port channels; they are segmented
into active sub-tracks, inactivity periods, and long sampling gaps before
feature extraction.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .features import FeatureMatrix, FRECHET_STATISTICS, GeoStatConfig
from .geometry import build_stack
from .series import TimeSeries, UniformSeries, laplacian_smooth, resample_uniform
from .stats import SphericalSample, frechet_mean_variance, summarize

__all__ = [
    "UCRDataset",
    "VesselTrack",
    "SegmentSet",
    "ActiveSegment",
    "load_ucr",
    "parse_ucr_file",
    "load_vessels",
    "segment_vessel",
    "filter_labels",
    "vessel_features",
    "vessel_feature_matrix",
    "binary_fishing_labels",
    "VESSEL_DISTRIBUTIONS",
]

_MISSING_MARKERS = {"", "nan", "?"}

ACTIVE_SPEED_KNOTS = 0.4
GAP_THRESHOLD_SECONDS = 5400.0
MIN_SEGMENT_POINTS = 4
VESSEL_SMOOTHING_ITERATIONS = 10
VESSEL_WINDOW_SECONDS = 600.0

DEFAULT_DROP_LABELS = frozenset({"unknown", "other_fishing", "gear_buoy", "gear/buoy"})

DEFAULT_VESSEL_COLUMNS = {
    "timestamp": "timestamp",
    "lat": "lat",
    "lon": "lon",
    "speed": "speed",
    "shore": "distance_from_shore",
    "port": "distance_from_port",
    "label": "label",
    "vessel_id": "mmsi",
}

VESSEL_DISTRIBUTIONS = (
    "position", "speed", "speed_derivative", "curvature", "curvature_raw",
    "shore_distance", "port_distance",
    "active_duration", "inactive_duration", "gap_duration",
)


# ---------------------------------------------------------------------------
# archive-style datasets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UCRDataset:
    name: str
    train_labels: tuple
    train_series: tuple
    test_labels: tuple
    test_series: tuple

    @property
    def classes(self) -> tuple:
        return tuple(sorted(set(self.train_labels)))

    @property
    def equal_length(self) -> bool:
        lengths = {len(s) for s in self.train_series + self.test_series}
        return len(lengths) == 1

    @property
    def lengths(self) -> tuple:
        ls = [len(s) for s in self.train_series + self.test_series]
        return (min(ls), max(ls))


def _fill_missing(values, path, line_no):
    """Linearly interpolate interior gaps; hold the nearest value at the ends."""
    arr = np.array(values, dtype=float)
    ok = np.isfinite(arr)
    if not ok.any():
        raise ValueError(f"{path}:{line_no}: row has no usable values")
    if ok.all():
        return arr
    idx = np.arange(arr.size)
    arr[~ok] = np.interp(idx[~ok], idx[ok], arr[ok])
    return arr


def _detect_delimiter(sample_line: str) -> str:
    return "\t" if "\t" in sample_line else ","


def parse_ucr_file(path):
    """Parse one archive split file into ``(labels, series)``.

    The first field of each row is the class label; the remaining fields are
    values. Empty fields, ``NaN`` markers, and ``?`` count as missing and
    are linearly interpolated from their neighbors. Malformed fields raise
    with the offending line number.
    """
    path = os.fspath(path)
    labels = []
    series = []
    with open(path) as fh:
        first = fh.readline()
        if not first.strip():
            raise ValueError(f"{path}:1: empty file")
        delim = _detect_delimiter(first)
        fh.seek(0)
        for line_no, line in enumerate(fh, start=1):
            line = line.strip("\n").strip("\r")
            if not line.strip():
                continue
            fields = line.split(delim)
            if len(fields) < 2:
                raise ValueError(f"{path}:{line_no}: row has no values")
            label = fields[0].strip()
            if not label:
                raise ValueError(f"{path}:{line_no}: missing class label")
            raw = []
            for col, field in enumerate(fields[1:], start=2):
                token = field.strip()
                if token.lower() in _MISSING_MARKERS:
                    raw.append(np.nan)
                    continue
                try:
                    raw.append(float(token))
                except ValueError:
                    raise ValueError(
                        f"{path}:{line_no}: bad value {token!r} in column {col}"
                    ) from None
            labels.append(label)
            series.append(_fill_missing(raw, path, line_no))
    return labels, series


def _find_split_file(directory: Path, suffix: str) -> Path:
    matches = sorted(p for p in directory.iterdir()
                     if p.is_file() and suffix in p.stem.upper())
    if not matches:
        raise FileNotFoundError(f"no *{suffix}* file under {directory}")
    return matches[0]


def load_ucr(path) -> UCRDataset:
    """Load a dataset directory containing ``*_TRAIN.*`` and ``*_TEST.*``."""
    directory = Path(path)
    if not directory.is_dir():
        raise FileNotFoundError(f"{directory} is not a directory")
    train_path = _find_split_file(directory, "_TRAIN")
    test_path = _find_split_file(directory, "_TEST")
    train_labels, train_series = parse_ucr_file(train_path)
    test_labels, test_series = parse_ucr_file(test_path)
    if not train_labels:
        raise ValueError(f"{train_path}: no rows")
    return UCRDataset(
        name=directory.name,
        train_labels=tuple(train_labels),
        train_series=tuple(train_series),
        test_labels=tuple(test_labels),
        test_series=tuple(test_series),
    )


def series_to_time_series(values: np.ndarray) -> TimeSeries:
    """Index-timestamped view of a plain value sequence."""
    values = np.asarray(values, dtype=float).reshape(-1)
    return TimeSeries(np.arange(values.size, dtype=float), values)


# ---------------------------------------------------------------------------
# vessel trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VesselTrack:
    """One vessel's position fixes in time order.

    ``label`` may be empty for unlabeled tracks. Speeds are in knots,
    distances in the units of the source data.
    """

    vessel_id: str
    label: str
    timestamps: np.ndarray
    lats: np.ndarray
    lons: np.ndarray
    speeds: np.ndarray
    shore_distances: np.ndarray
    port_distances: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=float)
        if t.size == 0:
            raise ValueError("track has no samples")
        if np.any(np.diff(t) < 0):
            raise ValueError("timestamps must be nondecreasing")
        for name in ("lats", "lons", "speeds", "shore_distances", "port_distances"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.size != t.size:
                raise ValueError(f"{name} length does not match timestamps")
            object.__setattr__(self, name, arr)
        if np.any(self.speeds < 0):
            raise ValueError("speeds must be non-negative")
        object.__setattr__(self, "timestamps", t)

    @property
    def n_samples(self) -> int:
        return self.timestamps.size

    @property
    def span(self) -> float:
        return float(self.timestamps[-1] - self.timestamps[0])


@dataclass(frozen=True)
class ActiveSegment:
    """A contiguous in-motion sub-track (raw, non-uniform samples)."""

    timestamps: np.ndarray
    lats: np.ndarray
    lons: np.ndarray
    shore_distances: np.ndarray
    port_distances: np.ndarray

    @property
    def n_samples(self) -> int:
        return self.timestamps.size

    @property
    def span(self) -> float:
        return float(self.timestamps[-1] - self.timestamps[0])


@dataclass(frozen=True)
class SegmentSet:
    """Outcome of splitting one track into activity states and gaps."""

    active: tuple
    inactive_durations: tuple
    gap_durations: tuple
    dropped_spans: tuple
    total_span: float


def load_vessels(path, columns=None) -> list:
    """Load vessel tracks from a CSV file or a directory of CSV files.

    Column names follow ``DEFAULT_VESSEL_COLUMNS`` and can be remapped via
    ``columns``. Rows are grouped into tracks by the vessel-id column. When
    a file has no label column, the file stem is used as the label for all
    its tracks (the one-file-per-class layout).
    """
    cols = dict(DEFAULT_VESSEL_COLUMNS)
    cols.update(columns or {})
    p = Path(path)
    files = sorted(p.glob("*.csv")) if p.is_dir() else [p]
    if not files:
        raise FileNotFoundError(f"no CSV files under {p}")
    tracks = []
    for f in files:
        tracks.extend(_load_vessel_file(f, cols))
    return tracks


def _load_vessel_file(path: Path, cols) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: missing header row")
        header = set(reader.fieldnames)
        required = ("timestamp", "lat", "lon", "speed", "shore", "port")
        for key in required:
            if cols[key] not in header:
                raise ValueError(f"{path}: missing column {cols[key]!r}")
        has_label = cols["label"] in header
        has_id = cols["vessel_id"] in header
        default_label = path.stem
        rows = {}
        for rec in reader:
            vid = rec[cols["vessel_id"]] if has_id else default_label
            label = rec[cols["label"]].strip() if has_label else default_label
            try:
                sample = (
                    float(rec[cols["timestamp"]]),
                    float(rec[cols["lat"]]),
                    float(rec[cols["lon"]]),
                    float(rec[cols["speed"]]),
                    float(rec[cols["shore"]]),
                    float(rec[cols["port"]]),
                )
            except (TypeError, ValueError):
                continue  # skip rows with unusable numeric fields
            if not all(math.isfinite(v) for v in sample):
                continue
            rows.setdefault((str(vid), label), []).append(sample)
    tracks = []
    for (vid, label), samples in sorted(rows.items()):
        samples.sort(key=lambda s: s[0])
        arr = np.array(samples, dtype=float)
        tracks.append(VesselTrack(
            vessel_id=vid, label=label,
            timestamps=arr[:, 0], lats=arr[:, 1], lons=arr[:, 2],
            speeds=arr[:, 3], shore_distances=arr[:, 4],
            port_distances=arr[:, 5]))
    return tracks


def segment_vessel(track: VesselTrack,
                   active_threshold: float = ACTIVE_SPEED_KNOTS,
                   gap_threshold: float = GAP_THRESHOLD_SECONDS,
                   min_points: int = MIN_SEGMENT_POINTS) -> SegmentSet:
    """Split a track into active segments, inactivity periods, and gaps.

    The track is first cut at every inter-sample spacing of at least
    ``gap_threshold`` seconds, recording each such spacing as a gap
    duration. Inside a contiguous run, each inter-sample interval is active
    or inactive according to the speed reported at its left endpoint;
    maximal stretches of same-state intervals become segments, consecutive
    segments sharing their boundary sample. Inactive segments contribute
    only their duration (last minus first timestamp); active segments with
    fewer than ``min_points`` timestamps are dropped, with their spans
    recorded separately so that spans, durations, gaps, and dropped spans
    add up to the track span exactly.
    """
    if track.n_samples < 2:
        return SegmentSet((), (), (), (), 0.0)
    dts = np.diff(track.timestamps)
    gaps = []
    runs = []
    start = 0
    for i, dt in enumerate(dts):
        if dt >= gap_threshold:
            gaps.append(float(dt))
            runs.append((start, i))
            start = i + 1
    runs.append((start, track.n_samples - 1))

    active = []
    inactive = []
    dropped = []
    for lo, hi in runs:
        if hi <= lo:
            continue  # single-sample run spans no time
        states = track.speeds[lo:hi] >= active_threshold  # one per interval
        edges = [lo]
        for i in range(1, hi - lo):
            if states[i] != states[i - 1]:
                edges.append(lo + i)
        edges.append(hi)
        for k in range(len(edges) - 1):
            seg_lo, seg_hi = edges[k], edges[k + 1]  # shared boundary samples
            span = float(track.timestamps[seg_hi] - track.timestamps[seg_lo])
            if not states[seg_lo - lo]:
                inactive.append(span)
                continue
            # The timestamp floor counts the samples actually in motion; the
            # trailing shared boundary sample may already be below threshold.
            moving = int(np.sum(
                track.speeds[seg_lo:seg_hi + 1] >= active_threshold))
            if moving < min_points:
                dropped.append(span)
            else:
                sl = slice(seg_lo, seg_hi + 1)
                active.append(ActiveSegment(
                    timestamps=track.timestamps[sl],
                    lats=track.lats[sl],
                    lons=track.lons[sl],
                    shore_distances=track.shore_distances[sl],
                    port_distances=track.port_distances[sl]))
    return SegmentSet(tuple(active), tuple(inactive), tuple(gaps),
                      tuple(dropped), track.span)


def filter_labels(tracks,
                  drop_labels=DEFAULT_DROP_LABELS,
                  active_threshold: float = ACTIVE_SPEED_KNOTS,
                  gap_threshold: float = GAP_THRESHOLD_SECONDS) -> list:
    """Keep tracks with a usable class label and some downtime signal.

    Drops unlabeled tracks, tracks whose label is in ``drop_labels``, and
    tracks that show neither an inactivity period nor a long sampling gap.
    """
    kept = []
    for track in tracks:
        label = track.label.strip().lower()
        if not label or label in drop_labels:
            continue
        if track.n_samples < 2:
            continue
        seg = segment_vessel(track, active_threshold, gap_threshold)
        if not seg.inactive_durations and not seg.gap_durations:
            continue
        kept.append(track)
    return kept


def _segment_window_means(segment: ActiveSegment):
    """Ten-minute window averages of the derived quantities of one segment."""
    # Deduplicate repeated timestamps so interpolation is well defined.
    t, keep = np.unique(segment.timestamps, return_index=True)
    if t.size < 2 or t[-1] - t[0] <= 0:
        return None
    channels = np.column_stack([
        segment.lats[keep], segment.lons[keep],
        segment.shore_distances[keep], segment.port_distances[keep]])
    ts = TimeSeries(t, channels)
    duration = ts.duration
    # Sample finely enough to resolve the averaging windows without ever
    # dropping below the native resolution.
    m = max(ts.n_samples, int(np.ceil(duration / VESSEL_WINDOW_SECONDS)) + 1, 4)
    us_all = resample_uniform(ts, min_samples=m)
    pos = UniformSeries(us_all.start_time, us_all.step, us_all.values[:, :2])
    shore = us_all.values[:, 2]
    port = us_all.values[:, 3]

    smooth = build_stack(pos, VESSEL_SMOOTHING_ITERATIONS)
    presmoothed = laplacian_smooth(pos, VESSEL_SMOOTHING_ITERATIONS)
    raw_derivs = build_stack(presmoothed, 0)

    rel = us_all.step * np.arange(us_all.n_samples)
    window_idx = np.minimum((rel / VESSEL_WINDOW_SECONDS).astype(int),
                            max(int(duration // VESSEL_WINDOW_SECONDS), 0))

    def window_means(arr):
        arr = np.asarray(arr, dtype=float)
        return np.array([arr[window_idx == w].mean()
                         for w in range(window_idx.max() + 1)])

    return {
        "lat": window_means(smooth.base.values[:, 0]),
        "lon": window_means(smooth.base.values[:, 1]),
        "speed": window_means(smooth.speed),
        "speed_derivative": window_means(smooth.speed_deriv),
        "curvature": window_means(smooth.curvature),
        "curvature_raw": window_means(raw_derivs.curvature),
        "shore_distance": window_means(shore),
        "port_distance": window_means(port),
    }


def vessel_features(seg: SegmentSet, cfg: GeoStatConfig):
    """Feature row of one segmented vessel track.

    Pools the window-averaged derived quantities of all active segments into
    per-quantity distributions, summarizes each, and appends summaries of
    the activity/inactivity/gap duration distributions. Distributions that
    are empty for this track (no active segments, no gaps, ...) produce
    all-zero summaries so every track yields the same feature schema.

    Returns ``(values, column_labels)``.
    """
    pools = {name: [] for name in
             ("lat", "lon", "speed", "speed_derivative", "curvature",
              "curvature_raw", "shore_distance", "port_distance")}
    for segment in seg.active:
        means = _segment_window_means(segment)
        if means is None:
            continue
        for name, arr in means.items():
            pools[name].append(arr)
    pooled = {name: (np.concatenate(vals) if vals else np.array([]))
              for name, vals in pools.items()}
    durations = {
        "active_duration": np.array([s.span for s in seg.active]),
        "inactive_duration": np.array(seg.inactive_durations),
        "gap_duration": np.array(seg.gap_durations),
    }

    stat_names = cfg.summary.statistic_names
    values = []
    labels = []

    if pooled["lat"].size:
        (m_lat, m_lon), var = frechet_mean_variance(SphericalSample(
            np.radians(pooled["lat"]), np.radians(pooled["lon"])))
        frech = [np.degrees(m_lat), np.degrees(m_lon), var]
    else:
        frech = [0.0, 0.0, 0.0]
    values.extend(frech)
    labels.extend(("position", 0, s) for s in FRECHET_STATISTICS)

    def add_scalar(name, samples):
        if samples.size:
            vec = summarize(samples, cfg.summary).tolist()
        else:
            vec = [0.0] * len(stat_names)
        values.extend(vec)
        labels.extend((name, 0, s) for s in stat_names)

    for name in ("speed", "speed_derivative", "curvature", "curvature_raw",
                 "shore_distance", "port_distance"):
        add_scalar(name, pooled[name])
    for name in ("active_duration", "inactive_duration", "gap_duration"):
        add_scalar(name, durations[name])
    return np.array(values), labels


def vessel_feature_matrix(tracks, cfg: GeoStatConfig,
                          active_threshold: float = ACTIVE_SPEED_KNOTS,
                          gap_threshold: float = GAP_THRESHOLD_SECONDS,
                          min_points: int = MIN_SEGMENT_POINTS) -> FeatureMatrix:
    """Segment and featurize a collection of labeled tracks."""
    tracks = list(tracks)
    if not tracks:
        raise ValueError("no tracks to featurize")
    rows = []
    col_labels = None
    for track in tracks:
        seg = segment_vessel(track, active_threshold, gap_threshold, min_points)
        vec, labels = vessel_features(seg, cfg)
        if col_labels is None:
            col_labels = labels
        rows.append(vec)
    return FeatureMatrix(np.vstack(rows), tuple(col_labels),
                         tuple(t.label for t in tracks))


def binary_fishing_labels(labels, class_map) -> tuple:
    """Collapse vessel classes to a two-class task via an explicit map."""
    out = []
    for label in labels:
        key = str(label)
        if key not in class_map:
            raise ValueError(f"class map has no entry for {key!r}")
        out.append(str(class_map[key]))
    return tuple(out)
