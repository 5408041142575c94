"""Sampling of source/target distributions with deterministic seeding.

Provides the empirical-measure container (`PointCloud`), Gaussian
parameters, samplers for the uniform cube, Gaussians and compactly
supported elliptically contoured laws, plus random covariance generation
with a controlled eigenvalue spread.

All samplers are pure functions of their arguments and a 64-bit seed fed
to a counter-based (Philox) generator, so identical calls produce
bit-identical output and parallel workers can use disjoint derived
streams.
"""

from dataclasses import dataclass

import numpy as np

from .gaussian import sqrtm_psd

__all__ = [
    "PointCloud",
    "GaussianParams",
    "derive_rng",
    "sample_uniform_cube",
    "sample_gaussian",
    "calibrate_elliptical_radius",
    "sample_elliptical",
    "random_covariance",
    "GAMMA_PRESETS",
]

MAX_SEED = 2**64 - 1

# Trace-normalization scales from the covariance-spread recipe:
# (dimension, regime) -> gamma.
GAMMA_PRESETS = {
    (2, "concentrated"): 0.2,
    (2, "spread"): 5.0,
    (15, "concentrated"): 5.0,
    (15, "spread"): 20.0,
}


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)):
        raise ValueError(f"seed must be an integer, got {type(seed).__name__}")
    if not 0 <= int(seed) <= MAX_SEED:
        raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
    return int(seed)


def derive_rng(seed: int, *stream: int) -> np.random.Generator:
    """Deterministic generator for `seed`, optionally on a derived stream.

    Distinct `stream` tuples yield statistically independent streams from
    the same root seed, so parallel trials can draw without coordination.
    """
    seq = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class PointCloud:
    """n sample points in R^d carrying uniform weights 1/n.

    Represents the empirical measure (1/n) * sum_i delta_{x_i}. The point
    array is copied and frozen at construction.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True, order="C")
        if pts.ndim != 2:
            raise ValueError(f"points must be a 2-d array, got shape {pts.shape}")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points contain non-finite coordinates")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def as_points(cloud) -> np.ndarray:
    """Accept a PointCloud or a bare (n, d) array and return the array."""
    if isinstance(cloud, PointCloud):
        return cloud.points
    pts = np.asarray(cloud, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
        raise ValueError(f"expected an (n, d) point array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain non-finite coordinates")
    return pts


def _check_symmetric(cov: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    cov = np.asarray(cov, dtype=np.float64)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError(f"covariance must be square, got shape {cov.shape}")
    asym = np.abs(cov - cov.T).max() if cov.size else 0.0
    if asym > tol:
        raise ValueError(f"covariance asymmetry {asym:.3e} exceeds tolerance {tol:.0e}")
    return cov


@dataclass(frozen=True)
class GaussianParams:
    """Mean vector and symmetric positive-definite covariance."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64, copy=True).reshape(-1)
        cov = np.array(_check_symmetric(self.cov), copy=True)
        if mean.shape[0] != cov.shape[0]:
            raise ValueError(
                f"mean has dimension {mean.shape[0]} but covariance is {cov.shape[0]}x{cov.shape[0]}")
        eigmin = np.linalg.eigvalsh(cov).min()
        if eigmin <= 0:
            raise ValueError(f"covariance is not positive definite (min eigenvalue {eigmin:.3e})")
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def sample_uniform_cube(n: int, d: int, seed: int) -> PointCloud:
    """n i.i.d. points with each coordinate uniform on [-1, 1]."""
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    rng = derive_rng(seed)
    return PointCloud(rng.uniform(-1.0, 1.0, size=(n, d)))


def sample_gaussian(params: GaussianParams, n: int, seed: int) -> PointCloud:
    """n i.i.d. draws from N(mean, cov) via mean + L z with L L^T = cov."""
    if n < 1:
        raise ValueError(f"need n >= 1, got n={n}")
    try:
        chol = np.linalg.cholesky(params.cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"covariance factorization failed: {exc}") from exc
    rng = derive_rng(seed)
    z = rng.standard_normal((n, params.dim))
    return PointCloud(params.mean + z @ chol.T)


def calibrate_elliptical_radius(d: int, beta: float = 2.0,
                                mc_points: int = 10_000_000, seed: int = 0) -> float:
    """Radius scale `a` making the elliptical radial law satisfy E[R^2] = d.

    With R = a * |arctan(Z / beta)|^(1/d) and Z standard normal, solves
    the Monte-Carlo moment equation for a:
    ``a = sqrt(d / mean(|arctan(Z / beta)|^(2/d)))``.
    """
    if d < 1:
        raise ValueError(f"need d >= 1, got {d}")
    if beta <= 0:
        raise ValueError(f"need beta > 0, got {beta}")
    if mc_points < 1:
        raise ValueError(f"need mc_points >= 1, got {mc_points}")
    rng = derive_rng(seed)
    z = rng.standard_normal(mc_points)
    second_moment = np.mean(np.abs(np.arctan(z / beta)) ** (2.0 / d))
    return float(np.sqrt(d / second_moment))


def sample_elliptical(cov: np.ndarray, n: int, radius_scale: float,
                      seed: int, beta: float = 2.0) -> PointCloud:
    """Compactly supported elliptically contoured samples.

    Each point is X = R * cov^(1/2) * U with U uniform on the unit sphere
    and R = radius_scale * |arctan(Z / beta)|^(1/d) for Z standard normal.
    With `radius_scale` from :func:`calibrate_elliptical_radius`, the
    sample covariance converges to `cov`.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got n={n}")
    if radius_scale <= 0 or beta <= 0:
        raise ValueError("radius_scale and beta must be positive")
    root = sqrtm_psd(cov)
    d = root.shape[0]
    rng = derive_rng(seed)
    u = rng.standard_normal((n, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    z = rng.standard_normal(n)
    r = radius_scale * np.abs(np.arctan(z / beta)) ** (1.0 / d)
    return PointCloud(r[:, None] * (u @ root.T))


def random_covariance(d: int, gamma: float, alpha_ratio: float = 1.0 / 3.0,
                      seed: int = 0) -> np.ndarray:
    """Random SPD matrix with trace `gamma` and controlled eigenvalue spread.

    Draws M as d x k standard normal with k = round(d / alpha_ratio),
    forms M M^T / k (eigenvalues concentrate near
    [(1 - sqrt(alpha_ratio))^2, (1 + sqrt(alpha_ratio))^2]) and rescales
    to the requested trace.
    """
    if d < 1:
        raise ValueError(f"need d >= 1, got {d}")
    if gamma <= 0:
        raise ValueError(f"need gamma > 0, got {gamma}")
    if not 0.0 < alpha_ratio < 1.0:
        raise ValueError(f"need alpha_ratio in (0, 1), got {alpha_ratio}")
    k = int(round(d / alpha_ratio))
    if k < d:
        raise ValueError(f"round(d / alpha_ratio) = {k} must be >= d = {d}")
    rng = derive_rng(seed)
    m = rng.standard_normal((d, k))
    base = m @ m.T / k
    base = 0.5 * (base + base.T)
    return gamma * base / np.trace(base)
