"""Summary statistics of empirical distributions, and spherical Fréchet statistics.

The scalar summaries are deliberately plain: range, population moments, and
order-statistic quantiles with linear interpolation at fractional positions
``h = q * (N - 1)``. Kurtosis is reported as excess (normal data scores 0),
and zero-variance samples yield skew and kurtosis of 0 so that constant
windows still produce finite feature vectors.

Spherical positions cannot be summarized by coordinate-wise quantiles, so
they are summarized by the point minimizing the sum of squared great-circle
distances (the intrinsic mean) together with that minimal sum (the intrinsic
variance).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SummaryConfig",
    "SphericalSample",
    "UNIVARIATE_QUANTILES",
    "MULTIVARIATE_QUANTILES",
    "summarize",
    "quantiles",
    "frechet_mean_variance",
]

UNIVARIATE_QUANTILES = (
    0.001, 0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 0.999,
)
MULTIVARIATE_QUANTILES = (
    0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 0.999,
)

MOMENT_NAMES = ("range", "mean", "std", "skew", "kurtosis")


def _quantile_name(q: float) -> str:
    return f"q{q:g}"


@dataclass(frozen=True)
class SummaryConfig:
    """Which statistics a summary vector contains, in fixed order.

    The moment-style statistics (range, mean, std, skew, kurtosis) come
    first, each controlled by its own flag, followed by the configured
    quantiles in increasing order of probability.
    """

    quantiles: tuple = UNIVARIATE_QUANTILES
    include_range: bool = True
    include_mean: bool = True
    include_std: bool = True
    include_skew: bool = True
    include_kurtosis: bool = True

    def __post_init__(self):
        qs = tuple(float(q) for q in self.quantiles)
        if any(not (0.0 < q < 1.0) for q in qs):
            raise ValueError("quantile probabilities must lie in (0, 1)")
        if any(b <= a for a, b in zip(qs, qs[1:])):
            raise ValueError("quantile probabilities must be strictly increasing")
        object.__setattr__(self, "quantiles", qs)

    @property
    def statistic_names(self) -> tuple:
        names = []
        flags = (self.include_range, self.include_mean, self.include_std,
                 self.include_skew, self.include_kurtosis)
        names.extend(n for n, on in zip(MOMENT_NAMES, flags) if on)
        names.extend(_quantile_name(q) for q in self.quantiles)
        return tuple(names)

    @property
    def size(self) -> int:
        return len(self.statistic_names)


def quantiles(samples, qs) -> np.ndarray:
    """Order-statistic quantiles with linear interpolation.

    Probability ``q`` maps to the fractional index ``h = q * (N - 1)`` of the
    sorted samples; the result interpolates linearly between the flanking
    order statistics.
    """
    x = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    if x.size == 0:
        raise ValueError("cannot take quantiles of an empty sample")
    q_arr = np.asarray(qs, dtype=float)
    h = q_arr * (x.size - 1)
    lo = np.floor(h).astype(int)
    hi = np.minimum(lo + 1, x.size - 1)
    frac = h - lo
    return x[lo] + (x[hi] - x[lo]) * frac


def summarize(samples, cfg: SummaryConfig) -> np.ndarray:
    """Summary vector of one empirical distribution.

    Returns the enabled statistics in the order given by
    ``cfg.statistic_names``. Moments are population moments (no bias
    correction).

    Raises
    ------
    ValueError
        If ``samples`` is empty or contains non-finite values.
    """
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size == 0:
        raise ValueError("cannot summarize an empty distribution")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")

    mean = float(np.mean(x))
    centered = x - mean
    var = float(np.mean(centered**2))
    std = float(np.sqrt(var))
    if var > 0.0:
        skew = float(np.mean(centered**3)) / var**1.5
        kurt = float(np.mean(centered**4)) / var**2 - 3.0
    else:
        skew = 0.0
        kurt = 0.0

    out = []
    if cfg.include_range:
        out.append(float(np.max(x) - np.min(x)))
    if cfg.include_mean:
        out.append(mean)
    if cfg.include_std:
        out.append(std)
    if cfg.include_skew:
        out.append(skew)
    if cfg.include_kurtosis:
        out.append(kurt)
    if cfg.quantiles:
        out.extend(quantiles(x, cfg.quantiles).tolist())
    return np.array(out, dtype=float)


@dataclass(frozen=True)
class SphericalSample:
    """Points on the unit sphere given as (latitude, longitude) in radians."""

    latitudes: np.ndarray
    longitudes: np.ndarray

    def __post_init__(self):
        lat = np.asarray(self.latitudes, dtype=float).reshape(-1)
        lon = np.asarray(self.longitudes, dtype=float).reshape(-1)
        if lat.size != lon.size:
            raise ValueError("latitude and longitude lengths differ")
        if lat.size == 0:
            raise ValueError("spherical sample is empty")
        if np.any(np.abs(lat) > np.pi / 2 + 1e-12):
            raise ValueError("latitudes must lie in [-pi/2, pi/2]")
        object.__setattr__(self, "latitudes", lat)
        object.__setattr__(self, "longitudes", lon)

    @property
    def n_points(self) -> int:
        return self.latitudes.size

    def unit_vectors(self) -> np.ndarray:
        cl = np.cos(self.latitudes)
        return np.column_stack([
            cl * np.cos(self.longitudes),
            cl * np.sin(self.longitudes),
            np.sin(self.latitudes),
        ])


def _geodesic_to(mu: np.ndarray, points: np.ndarray) -> np.ndarray:
    dots = np.clip(points @ mu, -1.0, 1.0)
    return np.arccos(dots)


def frechet_mean_variance(sample: SphericalSample,
                          tol: float = 1e-12,
                          max_iterations: int = 200):
    """Intrinsic mean and variance of points on the unit sphere.

    Minimizes ``sum_i d(p_i, p)^2`` over sphere points ``p``, where ``d`` is
    great-circle distance, by iterating exponential/logarithm map updates
    from the normalized Euclidean mean. Returns ``((lat, lon), variance)``
    with the mean in radians and the variance equal to the minimized sum.

    The minimizer is unique when the points sit inside an open hemisphere,
    which is the regime this routine expects.

    Raises
    ------
    ValueError
        If the points' Euclidean mean is (numerically) zero, so no starting
        hemisphere can be identified.
    RuntimeError
        If the update has not converged after ``max_iterations`` steps.
    """
    pts = sample.unit_vectors()
    centroid = pts.mean(axis=0)
    norm = np.linalg.norm(centroid)
    if norm < 1e-12:
        raise ValueError("points have no well-defined mean direction")
    mu = centroid / norm

    for _ in range(max_iterations):
        theta = _geodesic_to(mu, pts)
        # Log map: tangent vectors of length theta toward each point.
        perp = pts - np.outer(np.cos(theta), mu)
        perp_norm = np.linalg.norm(perp, axis=1)
        scale = np.where(perp_norm > 1e-15, theta / np.maximum(perp_norm, 1e-300), 0.0)
        tangent_mean = (perp * scale.reshape(-1, 1)).mean(axis=0)
        t_norm = np.linalg.norm(tangent_mean)
        if t_norm < tol:
            break
        mu = np.cos(t_norm) * mu + np.sin(t_norm) * (tangent_mean / t_norm)
        mu = mu / np.linalg.norm(mu)
    else:
        raise RuntimeError("intrinsic mean iteration did not converge")

    variance = float(np.sum(_geodesic_to(mu, pts) ** 2))
    lat = float(np.arcsin(np.clip(mu[2], -1.0, 1.0)))
    lon = float(np.arctan2(mu[1], mu[0]))
    return (lat, lon), variance
