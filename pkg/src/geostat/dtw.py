"""Dynamic-time-warping distance and a 1-nearest-neighbor baseline.

The distance is the classic dynamic program over monotone alignment paths
with steps (i-1, j), (i, j-1), (i-1, j-1), squared pointwise differences as
the local cost, and a square root applied to the accumulated total. An
optional diagonal band constrains how far the alignment may stray; widening
the band can only decrease the distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["DTWConfig", "dtw_distance", "nn_dtw_classify"]


@dataclass(frozen=True)
class DTWConfig:
    """Warping constraint: band half-width as a fraction of series length.

    ``band_fraction=None`` leaves the alignment unconstrained; ``0.0``
    restricts it to the diagonal, which on equal-length inputs reduces the
    distance to plain Euclidean distance.
    """

    band_fraction: float = None

    def __post_init__(self):
        if self.band_fraction is not None:
            if not (0.0 <= self.band_fraction <= 1.0):
                raise ValueError("band_fraction must lie in [0, 1]")


def _band_width(cfg: DTWConfig, n: int, m: int):
    if cfg.band_fraction is None:
        return None
    w = int(np.ceil(cfg.band_fraction * max(n, m)))
    if w < abs(n - m):
        raise ValueError(
            f"band half-width {w} cannot connect series of lengths {n} and {m}")
    return w


def dtw_distance(a, b, cfg: DTWConfig = DTWConfig(), early_abandon=None) -> float:
    """Alignment distance between two scalar series.

    Parameters
    ----------
    a, b : array_like
        Nonempty 1-d value sequences (lengths may differ).
    cfg : DTWConfig
        Band constraint. An infeasible band for the given lengths raises.
    early_abandon : float, optional
        Abandon and return ``inf`` once every reachable cell of a row
        exceeds this squared-cost threshold. Only used as a pruning bound;
        any result below the threshold is unaffected.
    """
    x = np.asarray(a, dtype=float).reshape(-1)
    z = np.asarray(b, dtype=float).reshape(-1)
    if x.size == 0 or z.size == 0:
        raise ValueError("series must be nonempty")
    n, m = x.size, z.size
    w = _band_width(cfg, n, m)

    prev = np.full(m, np.inf)
    for i in range(n):
        if w is None:
            j_lo, j_hi = 0, m - 1
        else:
            j_lo = max(0, i - w)
            j_hi = min(m - 1, i + w)
        cur = np.full(m, np.inf)
        cost_row = (x[i] - z[j_lo:j_hi + 1]) ** 2
        for j in range(j_lo, j_hi + 1):
            c = cost_row[j - j_lo]
            if i == 0 and j == 0:
                best = 0.0
            else:
                best = prev[j]  # (i-1, j)
                if j > 0:
                    if prev[j - 1] < best:
                        best = prev[j - 1]  # (i-1, j-1)
                    if cur[j - 1] < best:
                        best = cur[j - 1]  # (i, j-1)
            cur[j] = c + best
        if early_abandon is not None and np.min(cur[j_lo:j_hi + 1]) > early_abandon:
            return float("inf")
        prev = cur
    return float(np.sqrt(prev[m - 1]))


def nn_dtw_classify(train_series, train_labels, test_series,
                    cfg: DTWConfig = DTWConfig()):
    """Label each test series by its nearest training series.

    Distance ties are broken by training index (the earliest wins), so the
    procedure is fully deterministic. Uses best-so-far early abandoning,
    which cannot change the result. Returns an array of predicted labels.
    """
    train_series = [np.asarray(s, dtype=float).reshape(-1) for s in train_series]
    train_labels = [str(v) for v in train_labels]
    if not train_series:
        raise ValueError("training set is empty")
    if len(train_series) != len(train_labels):
        raise ValueError("training series and labels counts differ")
    out = []
    for q in test_series:
        best = np.inf
        best_label = train_labels[0]
        for s, label in zip(train_series, train_labels):
            # Strict threshold keeps exact ties computable for the index rule.
            d = dtw_distance(q, s, cfg,
                             early_abandon=None if np.isinf(best) else best**2)
            if d < best:
                best = d
                best_label = label
        out.append(best_label)
    return np.array(out, dtype=object)
