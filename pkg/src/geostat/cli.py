"""Command-line front end: extraction, evaluation, ablation, and reports.

Subcommands
-----------
extract    write feature CSVs for every (windows, smoothings) grid cell
evaluate   cross-validated model selection on train, scoring on test
nested     nested cross-validation workflow (vessel or feature input)
ablate     re-evaluate under ablation masks, report percent changes
windows    evaluate each window's column slice independently
dtw        nearest-neighbor baseline under the warping distance

Every run is driven by a JSON config file and/or flags of the same names;
flags win. All randomness derives from ``--seed``, and result files are
written atomically, so reruns with the same seed are byte-identical even
with ``--jobs`` greater than one.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from . import classify, dtw, features, ingest, series
from .features import AblationMask, FeatureMatrix, GeoStatConfig
from .stats import MULTIVARIATE_QUANTILES, SummaryConfig

__all__ = ["main", "RunConfig"]

MODEL_CHOICES = ("knn", "svm")


@dataclass(frozen=True)
class RunConfig:
    """One experiment manifest. JSON-file fields and flags share names."""

    dataset: str = ""
    format: str = "ucr"  # ucr | vessel | features
    out: str = "results"
    seed: int = 0
    jobs: int = 1
    repetitions: int = 1
    smoothings: tuple = (0, 1, 2)
    windows: tuple = (1, 2, 4, 6)
    models: tuple = MODEL_CHOICES
    min_samples: int = 500
    folds: int = 10
    masks: tuple = ()
    class_map: str = ""
    binary: bool = False
    band: float = -1.0  # warping band fraction; negative = unconstrained

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        if not self.windows or not self.smoothings:
            raise ValueError("the (windows, smoothings) grid must be nonempty")
        for m in self.models:
            if m not in MODEL_CHOICES:
                raise ValueError(f"unknown model {m!r}")
        object.__setattr__(self, "smoothings", tuple(int(s) for s in self.smoothings))
        object.__setattr__(self, "windows", tuple(int(w) for w in self.windows))
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "masks", tuple(self.masks))

    @property
    def grid_cells(self) -> list:
        return [(w, s) for w in self.windows for s in self.smoothings]


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path, header, rows) -> None:
    """Write rows atomically so failures never leave partial result files."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _run_tasks(worker, tasks, jobs: int) -> list:
    """Run tasks (picklable argument tuples) and return results in task order."""
    if jobs <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, tasks))


# ---------------------------------------------------------------------------
# dataset loading and extraction
# ---------------------------------------------------------------------------

def _load_uniform_splits(cfg: RunConfig):
    """Load an archive dataset and return uniform train/test series."""
    ds = ingest.load_ucr(cfg.dataset)
    all_series = [ingest.series_to_time_series(v)
                  for v in ds.train_series + ds.test_series]
    if ds.equal_length:
        uniform = [series.resample_uniform(ts, cfg.min_samples)
                   for ts in all_series]
    else:
        uniform = series.equalize_lengths(all_series, cfg.min_samples)
    n_train = len(ds.train_series)
    return (ds, uniform[:n_train], list(ds.train_labels),
            uniform[n_train:], list(ds.test_labels))


def _cell_config(cfg: RunConfig, windows: int, smoothings: int) -> GeoStatConfig:
    return GeoStatConfig(min_samples=cfg.min_samples,
                         smoothing_iterations=smoothings,
                         num_windows=windows)


def _extract_cell(args):
    (train_series, train_labels, test_series, test_labels,
     cell_cfg) = args
    train_fm = features.univariate_matrix(train_series, train_labels, cell_cfg)
    test_fm = features.univariate_matrix(test_series, test_labels, cell_cfg)
    return train_fm, test_fm


def _extract_grid(cfg: RunConfig):
    """Feature matrices for every grid cell, keyed by (windows, smoothings)."""
    _, train_s, train_y, test_s, test_y = _load_uniform_splits(cfg)
    tasks = [(train_s, train_y, test_s, test_y, _cell_config(cfg, w, s))
             for (w, s) in cfg.grid_cells]
    results = _run_tasks(_extract_cell, tasks, cfg.jobs)
    return dict(zip(cfg.grid_cells, results))


def _load_feature_pair(cfg: RunConfig):
    """Read pre-extracted train/test matrices (``features`` input format)."""
    base = cfg.dataset
    train_path = os.path.join(base, "features_train.csv")
    test_path = os.path.join(base, "features_test.csv")
    if not os.path.exists(train_path) or not os.path.exists(test_path):
        raise FileNotFoundError(
            f"expected features_train.csv and features_test.csv under {base}")
    return features.read_feature_csv(train_path), features.read_feature_csv(test_path)


# ---------------------------------------------------------------------------
# extract
# ---------------------------------------------------------------------------

def cmd_extract(cfg: RunConfig) -> int:
    grid = _extract_grid(cfg)
    os.makedirs(cfg.out, exist_ok=True)
    for (w, s), (train_fm, test_fm) in grid.items():
        features.write_feature_csv(
            train_fm, os.path.join(cfg.out, f"features_train_{w}W_{s}S.csv"))
        features.write_feature_csv(
            test_fm, os.path.join(cfg.out, f"features_test_{w}W_{s}S.csv"))
    print(f"wrote {2 * len(grid)} feature files to {cfg.out}")
    return 0


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def _evaluate_task(args):
    """One (cell, model, run): select on train folds, refit, score test."""
    (train_rows, train_labels, test_rows, test_labels,
     model, folds, seed_entropy) = args
    train_fm = FeatureMatrix(train_rows[0], train_rows[1], train_labels)
    test_fm = FeatureMatrix(test_rows[0], test_rows[1], test_labels)
    train_n, (test_n,), _, _ = features.z_normalize(train_fm, [test_fm])
    seed = np.random.SeedSequence(list(seed_entropy))
    grid = classify.default_grid(model)
    params, _ = classify.grid_search_cv(train_n.rows, train_n.labels, grid,
                                        k=folds, seed=seed)
    fitted = classify.fit_model(train_n.rows, train_n.labels, params)
    pred = classify.predict_model(fitted, test_n.rows)
    return classify.accuracy(test_n.labels, pred), params.tag()


def _evaluate_matrices(cfg: RunConfig, grid):
    """Accuracy of every (cell, model, run) over the given feature matrices."""
    tasks = []
    keys = []
    for ci, (w, s) in enumerate(cfg.grid_cells):
        train_fm, test_fm = grid[(w, s)]
        for mi, model in enumerate(cfg.models):
            for run in range(cfg.repetitions):
                entropy = [int(cfg.seed), ci, mi, run]
                tasks.append((
                    (train_fm.rows, train_fm.column_labels), train_fm.labels,
                    (test_fm.rows, test_fm.column_labels), test_fm.labels,
                    model, cfg.folds, entropy))
                keys.append((model, w, s, run))
    results = _run_tasks(_evaluate_task, tasks, cfg.jobs)
    return keys, results


def cmd_evaluate(cfg: RunConfig) -> int:
    if cfg.format == "features":
        # Pre-extracted input carries one feature representation: collapse
        # the grid to a single cell.
        cfg = replace(cfg, windows=cfg.windows[:1], smoothings=cfg.smoothings[:1])
        grid = {cfg.grid_cells[0]: _load_feature_pair(cfg)}
    else:
        grid = _extract_grid(cfg)
    keys, results = _evaluate_matrices(cfg, grid)

    rows = [[model, w, s, run, "", _fmt(acc)]
            for (model, w, s, run), (acc, _) in zip(keys, results)]
    _write_csv(os.path.join(cfg.out, "results.csv"),
               ["model", "windows", "smoothings", "run", "fold", "accuracy"],
               rows)

    summary = []
    for (w, s) in cfg.grid_cells:
        for model in cfg.models:
            accs = [acc for (m, ww, ss, _), (acc, _) in zip(keys, results)
                    if m == model and ww == w and ss == s]
            tag = f"{model.upper()}_{w}W_{s}S"
            summary.append([tag, _fmt(min(accs)), _fmt(max(accs)),
                            _fmt(float(np.mean(accs))), _fmt(float(np.std(accs)))])
    _write_csv(os.path.join(cfg.out, "summary.csv"),
               ["model", "min", "max", "mean", "std"], summary)
    print(f"wrote results for {len(rows)} runs to {cfg.out}")
    return 0


# ---------------------------------------------------------------------------
# nested
# ---------------------------------------------------------------------------

def _nested_feature_matrix(cfg: RunConfig) -> FeatureMatrix:
    if cfg.format == "vessel":
        tracks = ingest.filter_labels(ingest.load_vessels(cfg.dataset))
        if not tracks:
            raise ValueError("no usable labeled tracks after filtering")
        geo_cfg = GeoStatConfig(
            min_samples=cfg.min_samples,
            smoothing_iterations=ingest.VESSEL_SMOOTHING_ITERATIONS,
            num_windows=1,
            summary=SummaryConfig(quantiles=MULTIVARIATE_QUANTILES))
        return ingest.vessel_feature_matrix(tracks, geo_cfg)
    if cfg.format == "features":
        path = cfg.dataset
        if os.path.isdir(path):
            path = os.path.join(path, "features.csv")
        return features.read_feature_csv(path)
    raise ValueError(f"nested does not support format {cfg.format!r}")


def _nested_task(args):
    (rows, col_labels, labels, model, folds, seed_entropy) = args
    fm = FeatureMatrix(rows, col_labels, labels)
    normed, _, _, _ = features.z_normalize(fm)
    seed = np.random.SeedSequence(list(seed_entropy))
    grid = classify.default_grid(model)
    report = classify.nested_cv(normed.rows, normed.labels, grid,
                                outer_k=folds, inner_k=folds, seed=seed)
    return (report.fold_accuracies,
            tuple(p.tag() for p in report.chosen_params),
            report.classes, report.confusion)


def _run_nested(cfg: RunConfig, fm: FeatureMatrix, suffix: str = "") -> None:
    tasks = []
    keys = []
    for mi, model in enumerate(cfg.models):
        for it in range(cfg.repetitions):
            entropy = [int(cfg.seed), mi, it]
            tasks.append((fm.rows, fm.column_labels, fm.labels, model,
                          cfg.folds, entropy))
            keys.append((model, it))
    results = _run_tasks(_nested_task, tasks, cfg.jobs)

    fold_rows = []
    summary_rows = []
    for model in cfg.models:
        iteration_means = []
        for (m, it), (fold_acc, tags, _, _) in zip(keys, results):
            if m != model:
                continue
            iteration_means.append(float(np.mean(fold_acc)))
            for f, (acc, tag) in enumerate(zip(fold_acc, tags)):
                fold_rows.append([model, it, f, _fmt(acc), tag])
        summary_rows.append([
            model.upper(), _fmt(min(iteration_means)), _fmt(max(iteration_means)),
            _fmt(float(np.mean(iteration_means))),
            _fmt(float(np.std(iteration_means)))])
        # Confusion matrix of the first iteration, pooled over outer folds.
        first = next(r for k, r in zip(keys, results) if k == (model, 0))
        classes, confusion = first[2], first[3]
        conf_rows = [[c] + [int(v) for v in row]
                     for c, row in zip(classes, confusion)]
        _write_csv(os.path.join(cfg.out, f"confusion_{model}{suffix}.csv"),
                   ["class"] + list(classes), conf_rows)

    _write_csv(os.path.join(cfg.out, f"nested_folds{suffix}.csv"),
               ["model", "iteration", "fold", "accuracy", "params"], fold_rows)
    _write_csv(os.path.join(cfg.out, f"nested_summary{suffix}.csv"),
               ["model", "min", "max", "mean", "std"], summary_rows)


def cmd_nested(cfg: RunConfig) -> int:
    if cfg.binary and not cfg.class_map:
        raise ValueError("the binary task needs --class-map")
    fm = _nested_feature_matrix(cfg)
    _run_nested(cfg, fm)
    if cfg.class_map:
        with open(cfg.class_map) as fh:
            class_map = json.load(fh)
        binary_labels = ingest.binary_fishing_labels(fm.labels, class_map)
        binary_fm = FeatureMatrix(fm.rows, fm.column_labels, binary_labels)
        _run_nested(cfg, binary_fm, suffix="_binary")
    print(f"wrote nested cross-validation reports to {cfg.out}")
    return 0


# ---------------------------------------------------------------------------
# ablate
# ---------------------------------------------------------------------------

def parse_mask(spec: str) -> AblationMask:
    """Parse ``dist:NAME`` / ``stat:NAME`` tokens (bare names mean ``dist:``)."""
    dists = set()
    stats = set()
    for token in spec.split(","):
        token = token.strip()
        if not token:
            continue
        if token.startswith("stat:"):
            stats.add(token[5:])
        elif token.startswith("dist:"):
            dists.add(token[5:])
        else:
            dists.add(token)
    return AblationMask(frozenset(dists), frozenset(stats))


def cmd_ablate(cfg: RunConfig) -> int:
    if not cfg.masks:
        raise ValueError("ablate requires at least one --mask")
    if cfg.format == "features":
        pair = _load_feature_pair(cfg)
        grid = {cell: pair for cell in cfg.grid_cells}
    else:
        grid = _extract_grid(cfg)

    def mean_by_cell_model(feature_grid):
        keys, results = _evaluate_matrices(cfg, feature_grid)
        out = {}
        for (model, w, s, _), (acc, _) in zip(keys, results):
            out.setdefault((model, w, s), []).append(acc)
        return {k: float(np.mean(v)) for k, v in out.items()}

    baseline = mean_by_cell_model(grid)
    rows = []
    for mask_spec in cfg.masks:
        mask = parse_mask(mask_spec)
        masked_grid = {
            cell: (features.apply_mask(tr, mask), features.apply_mask(te, mask))
            for cell, (tr, te) in grid.items()}
        masked = mean_by_cell_model(masked_grid)
        for (w, s) in cfg.grid_cells:
            for model in cfg.models:
                base = baseline[(model, w, s)]
                after = masked[(model, w, s)]
                change = 100.0 * (after - base) / base if base > 0 else 0.0
                rows.append([model, w, s, mask_spec, _fmt(base), _fmt(after),
                             _fmt(change)])
    _write_csv(os.path.join(cfg.out, "ablation.csv"),
               ["model", "windows", "smoothings", "mask", "baseline_mean",
                "masked_mean", "percent_change"], rows)
    print(f"wrote ablation table ({len(rows)} rows) to {cfg.out}")
    return 0


# ---------------------------------------------------------------------------
# windows
# ---------------------------------------------------------------------------

def cmd_windows(cfg: RunConfig) -> int:
    if cfg.format == "features":
        pair = _load_feature_pair(cfg)
        grid = {cell: pair for cell in cfg.grid_cells}
    else:
        grid = _extract_grid(cfg)
    rows = []
    for (w, s) in cfg.grid_cells:
        train_fm, test_fm = grid[(w, s)]
        for window in range(w):
            sliced = {(w, s): (features.single_window(train_fm, window),
                               features.single_window(test_fm, window))}
            sub_cfg = replace(cfg, windows=(w,), smoothings=(s,))
            keys, results = _evaluate_matrices(sub_cfg, sliced)
            for model in cfg.models:
                accs = [acc for (m, _, _, _), (acc, _) in zip(keys, results)
                        if m == model]
                rows.append([model, w, s, window,
                             _fmt(float(np.mean(accs))),
                             _fmt(float(np.std(accs)))])
    _write_csv(os.path.join(cfg.out, "window_accuracy.csv"),
               ["model", "windows", "smoothings", "window", "mean", "std"],
               rows)
    print(f"wrote per-window accuracies to {cfg.out}")
    return 0


# ---------------------------------------------------------------------------
# dtw
# ---------------------------------------------------------------------------

def cmd_dtw(cfg: RunConfig) -> int:
    ds = ingest.load_ucr(cfg.dataset)
    band = None if cfg.band < 0 else cfg.band
    dtw_cfg = dtw.DTWConfig(band_fraction=band)
    pred = dtw.nn_dtw_classify(ds.train_series, ds.train_labels,
                               ds.test_series, dtw_cfg)
    acc = classify.accuracy(ds.test_labels, pred)
    _write_csv(os.path.join(cfg.out, "dtw_results.csv"),
               ["dataset", "band", "accuracy"],
               [[ds.name, "" if band is None else _fmt(band), _fmt(acc)]])
    print(f"1NN warping baseline accuracy on {ds.name}: {acc:.4f}")
    return 0


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _int_list(text: str) -> tuple:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _str_list(text: str) -> tuple:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--dataset", help="dataset path")
    p.add_argument("--format", choices=("ucr", "vessel", "features"))
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--smoothings", type=_int_list,
                   help="comma-separated smoothing iteration counts")
    p.add_argument("--windows", type=_int_list,
                   help="comma-separated window counts")
    p.add_argument("--models", type=_str_list,
                   help="comma-separated subset of: knn,svm")
    p.add_argument("--min-samples", dest="min_samples", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--mask", dest="masks", action="append",
                   help="ablation mask, e.g. 'position,stat:low_quantiles'")
    p.add_argument("--class-map", dest="class_map",
                   help="JSON file mapping class labels to binary-task labels")
    p.add_argument("--binary", action="store_const", const=True, default=None,
                   help="also run the binary task (requires --class-map)")
    p.add_argument("--band", type=float,
                   help="warping band fraction; omit for unconstrained")


def build_config(args: argparse.Namespace) -> RunConfig:
    file_values = {}
    if args.config:
        with open(args.config) as fh:
            file_values = json.load(fh)
    values = {}
    for f in fields(RunConfig):
        if f.name in file_values:
            values[f.name] = file_values[f.name]
        cli_value = getattr(args, f.name, None)
        if cli_value is not None:
            values[f.name] = cli_value
    if not values.get("dataset"):
        raise ValueError("a dataset path is required (--dataset or config file)")
    return RunConfig(**values)


COMMANDS = {
    "extract": cmd_extract,
    "evaluate": cmd_evaluate,
    "nested": cmd_nested,
    "ablate": cmd_ablate,
    "windows": cmd_windows,
    "dtw": cmd_dtw,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="geostat",
        description="Geometric-statistics time series classification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_common_flags(sub.add_parser(name))
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
