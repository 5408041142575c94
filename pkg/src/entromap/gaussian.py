"""Closed-form Gaussian-to-Gaussian transport machinery.

For a source N(0, A) and target N(b, B), both the entropic map and its
debiased variant are linear maps x -> C x + b with explicit coefficient
matrices. This module computes those coefficients, the exact L^2(N(0,A))
mean-squared errors against the Brenier map as trace formulas (no
sampling), their large-regularization limits, the 1-D family on which
debiasing is arbitrarily worse, the gradient bound for the self
potential, and a sixth-order remainder check for the shifted matrix
square root expansion.

All matrix functions go through symmetric eigendecomposition; epsilon = 0
is admitted everywhere the formulas are continuous, which recovers the
unregularized (Brenier) coefficients.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CoeffMatrix",
    "GaussianPair",
    "sqrtm_psd",
    "brenier_coeff",
    "entropic_coeff",
    "self_coeff",
    "debiased_coeff",
    "exact_mse_biased",
    "exact_mse_debiased",
    "limit_mses",
    "counterexample_mses",
    "fisher_info_gaussian",
    "grad_alpha_bound_check",
    "sqrt_expansion_check",
]


def _check_square_symmetric(mat: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"matrix must be square, got shape {mat.shape}")
    asym = np.abs(mat - mat.T).max() if mat.size else 0.0
    if asym > tol:
        raise ValueError(f"matrix asymmetry {asym:.3e} exceeds tolerance {tol:.0e}")
    return mat


def sqrtm_psd(mat: np.ndarray, asym_tol: float = 1e-10) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition.

    Slightly negative eigenvalues (down to -1e-10, from roundoff on
    near-singular input) are clamped to zero; anything more negative is
    rejected.
    """
    mat = _check_square_symmetric(mat, tol=asym_tol)
    vals, vecs = np.linalg.eigh(mat)
    if vals.size and vals.min() < -1e-10:
        raise ValueError(f"matrix is not PSD (min eigenvalue {vals.min():.3e})")
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T
    return 0.5 * (root + root.T)


def _spd_power(mat: np.ndarray, power: float) -> np.ndarray:
    """mat**power for symmetric positive-definite mat."""
    mat = _check_square_symmetric(mat)
    vals, vecs = np.linalg.eigh(mat)
    if vals.min() <= 0:
        raise ValueError(f"matrix is singular or indefinite (min eigenvalue {vals.min():.3e})")
    out = (vecs * vals**power) @ vecs.T
    return 0.5 * (out + out.T)


@dataclass(frozen=True)
class CoeffMatrix:
    """Linear-map coefficient C with the tag naming which map it is."""

    matrix: np.ndarray
    tag: str
    epsilon: float

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=np.float64, copy=True)
        if not np.all(np.isfinite(mat)):
            raise ValueError("coefficient matrix has non-finite entries")
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    def apply(self, x: np.ndarray, shift=None) -> np.ndarray:
        y = np.asarray(x, dtype=np.float64) @ self.matrix.T
        return y if shift is None else y + np.asarray(shift, dtype=np.float64)


def _validate_eps(epsilon: float) -> float:
    epsilon = float(epsilon)
    if epsilon < 0 or not np.isfinite(epsilon):
        raise ValueError(f"need epsilon >= 0, got {epsilon}")
    return epsilon


def brenier_coeff(A: np.ndarray, B: np.ndarray) -> CoeffMatrix:
    """Coefficient of the Monge map N(0,A) -> N(b,B):
    A^(-1/2) (A^(1/2) B A^(1/2))^(1/2) A^(-1/2)."""
    return entropic_coeff(A, B, 0.0)


def entropic_coeff(A: np.ndarray, B: np.ndarray, epsilon: float) -> CoeffMatrix:
    """Coefficient of the entropic map between N(0,A) and N(b,B):

    A^(-1/2) [A^(1/2) B A^(1/2) + (eps^2/4) I]^(1/2) A^(-1/2) - (eps/2) A^(-1).

    At epsilon = 0 this is the Brenier coefficient.
    """
    epsilon = _validate_eps(epsilon)
    A = _check_square_symmetric(A)
    B = _check_square_symmetric(B)
    d = A.shape[0]
    root_a = _spd_power(A, 0.5)
    inv_root_a = _spd_power(A, -0.5)
    mid = sqrtm_psd(root_a @ B @ root_a + (epsilon**2 / 4.0) * np.eye(d))
    coeff = inv_root_a @ mid @ inv_root_a - (epsilon / 2.0) * _spd_power(A, -1.0)
    tag = "brenier" if epsilon == 0.0 else "entropic"
    return CoeffMatrix(0.5 * (coeff + coeff.T), tag, epsilon)


def self_coeff(A: np.ndarray, epsilon: float) -> CoeffMatrix:
    """Coefficient of the entropic self map of N(0,A):

    A^(-1/2) (A^2 + (eps^2/4) I)^(1/2) A^(-1/2) - (eps/2) A^(-1).
    """
    epsilon = _validate_eps(epsilon)
    A = _check_square_symmetric(A)
    d = A.shape[0]
    inv_root_a = _spd_power(A, -0.5)
    mid = sqrtm_psd(A @ A + (epsilon**2 / 4.0) * np.eye(d))
    coeff = inv_root_a @ mid @ inv_root_a - (epsilon / 2.0) * _spd_power(A, -1.0)
    return CoeffMatrix(0.5 * (coeff + coeff.T), "self", epsilon)


def debiased_coeff(A: np.ndarray, B: np.ndarray, epsilon: float) -> CoeffMatrix:
    """Coefficient of the debiased (Sinkhorn) map:
    entropic coefficient + I - self coefficient."""
    ent = entropic_coeff(A, B, epsilon).matrix
    own = self_coeff(A, epsilon).matrix
    return CoeffMatrix(ent + np.eye(ent.shape[0]) - own, "debiased", _validate_eps(epsilon))


def exact_mse_biased(A: np.ndarray, B: np.ndarray, epsilon: float) -> float:
    """Exact L^2(N(0,A)) squared error of the entropic map against the
    Monge map: Tr((C_eps - C_0)^2 A)."""
    diff = entropic_coeff(A, B, epsilon).matrix - brenier_coeff(A, B).matrix
    return float(np.trace(diff @ diff @ np.asarray(A, dtype=np.float64)))


def exact_mse_debiased(A: np.ndarray, B: np.ndarray, epsilon: float) -> float:
    """Exact L^2(N(0,A)) squared error of the debiased map:
    Tr((C~_eps - C_0)^2 A)."""
    diff = debiased_coeff(A, B, epsilon).matrix - brenier_coeff(A, B).matrix
    return float(np.trace(diff @ diff @ np.asarray(A, dtype=np.float64)))


def limit_mses(A: np.ndarray, B: np.ndarray, b=None) -> tuple[float, float]:
    """Large-regularization MSE limits of the two estimators.

    Returns (Tr(B), Tr(A) + Tr(B) - 2 Tr((A^(1/2) B A^(1/2))^(1/2))): the
    variance of the target and the squared Bures-Wasserstein distance
    between the centered Gaussians. The mean shift `b` does not enter
    either limit; it is accepted for signature symmetry and validated.
    """
    A = _check_square_symmetric(A)
    B = _check_square_symmetric(B)
    if b is not None:
        b = np.asarray(b, dtype=np.float64).reshape(-1)
        if b.shape[0] != A.shape[0]:
            raise ValueError(f"mean shift has dimension {b.shape[0]}, expected {A.shape[0]}")
    root_a = _spd_power(A, 0.5)
    cross = np.trace(sqrtm_psd(root_a @ B @ root_a))
    return float(np.trace(B)), float(np.trace(A) + np.trace(B) - 2.0 * cross)


def counterexample_mses(epsilon: float, m: float) -> tuple[float, float]:
    """Exact MSEs for the 1-D pair N(0,1) -> N(0, eps^(2m)).

    On this family the debiased map is arbitrarily worse than the
    entropic one as m grows, for any fixed epsilon in (0, 1). Both
    values agree with the trace formulas at (A, B) = (1, eps^(2m)).
    """
    epsilon = float(epsilon)
    m = float(m)
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"need 0 < epsilon < 1, got {epsilon}")
    if m <= 0:
        raise ValueError(f"need m > 0, got {m}")
    sigma = epsilon**m
    shifted_root = np.sqrt(sigma**2 + epsilon**2 / 4.0)
    biased = (shifted_root - epsilon / 2.0 - sigma) ** 2
    debiased = (shifted_root + 1.0 - sigma - np.sqrt(1.0 + epsilon**2 / 4.0)) ** 2
    return float(biased), float(debiased)


def fisher_info_gaussian(A: np.ndarray) -> float:
    """Fisher information of N(0, A): Tr(A^{-1})."""
    return float(np.trace(_spd_power(A, -1.0)))


def grad_alpha_bound_check(A: np.ndarray, epsilon: float) -> tuple[float, float]:
    """Exact L^2(N(0,A)) norm of the self-potential gradient vs its bound.

    Returns (Tr((I - C^AA_eps)^2 A), (eps^2/4) Tr(A^{-1})); the first
    never exceeds the second.
    """
    epsilon = _validate_eps(epsilon)
    A = _check_square_symmetric(A)
    diff = np.eye(A.shape[0]) - self_coeff(A, epsilon).matrix
    lhs = float(np.trace(diff @ diff @ A))
    rhs = (epsilon**2 / 4.0) * fisher_info_gaussian(A)
    return lhs, rhs


def sqrt_expansion_check(C: np.ndarray, epsilon: float,
                         bound_const: float = 1.0) -> tuple[float, float]:
    """Remainder of the three-term expansion of (C + (eps^2/4) I)^(1/2).

    The expansion C^(1/2) + (eps^2/8) C^(-1/2) - (eps^4/128) C^(-3/2)
    leaves a remainder of operator norm O(lambda_min(C)^(-5/2) eps^6).
    Returns (remainder operator norm, bound_const * lambda_min^(-5/2) * eps^6).
    Requires eps^2/4 < lambda_min(C) so the underlying series converges.
    """
    epsilon = _validate_eps(epsilon)
    C = _check_square_symmetric(C)
    lam_min = float(np.linalg.eigvalsh(C).min())
    if lam_min <= 0:
        raise ValueError(f"matrix must be positive definite, got min eigenvalue {lam_min:.3e}")
    eta = epsilon**2 / 4.0
    if eta >= lam_min:
        raise ValueError(
            f"eps^2/4 = {eta:.3e} is outside the series convergence region "
            f"(lambda_min = {lam_min:.3e})")
    exact = sqrtm_psd(C + eta * np.eye(C.shape[0]))
    series = (_spd_power(C, 0.5)
              + (epsilon**2 / 8.0) * _spd_power(C, -0.5)
              - (epsilon**4 / 128.0) * _spd_power(C, -1.5))
    remainder = float(np.linalg.norm(exact - series, ord=2))
    bound = bound_const * lam_min**-2.5 * epsilon**6
    return remainder, bound


@dataclass(frozen=True)
class GaussianPair:
    """Source N(0, A) and target N(b, B) with A, B symmetric positive
    definite; the source is centered by convention.

    A non-centered source N(mu, A) reduces to this case by translation:
    apply the map to x - mu and add mu back, which
    :meth:`evaluate_map` performs when `source_mean` is given.
    """

    source_cov: np.ndarray
    target_cov: np.ndarray
    target_mean: np.ndarray

    def __post_init__(self):
        A = np.array(_check_square_symmetric(self.source_cov), copy=True)
        B = np.array(_check_square_symmetric(self.target_cov), copy=True)
        if A.shape != B.shape:
            raise ValueError(f"covariance shapes differ: {A.shape} vs {B.shape}")
        for name, mat in (("source", A), ("target", B)):
            if np.linalg.eigvalsh(mat).min() <= 0:
                raise ValueError(f"{name} covariance is not positive definite")
        b = np.array(self.target_mean, dtype=np.float64, copy=True).reshape(-1)
        if b.shape[0] != A.shape[0]:
            raise ValueError(f"target mean has dimension {b.shape[0]}, expected {A.shape[0]}")
        for arr in (A, B, b):
            arr.flags.writeable = False
        object.__setattr__(self, "source_cov", A)
        object.__setattr__(self, "target_cov", B)
        object.__setattr__(self, "target_mean", b)

    @property
    def dim(self) -> int:
        return self.source_cov.shape[0]

    def coeff(self, kind: str, epsilon: float = 0.0) -> CoeffMatrix:
        if kind == "brenier":
            return brenier_coeff(self.source_cov, self.target_cov)
        if kind == "entropic":
            return entropic_coeff(self.source_cov, self.target_cov, epsilon)
        if kind == "debiased":
            return debiased_coeff(self.source_cov, self.target_cov, epsilon)
        raise ValueError(f"unknown map kind {kind!r}")

    def evaluate_map(self, kind: str, epsilon: float, queries: np.ndarray,
                     source_mean=None) -> np.ndarray:
        """Apply the chosen closed-form map at the query points."""
        coeff = self.coeff(kind, epsilon)
        x = np.asarray(queries, dtype=np.float64)
        if source_mean is None:
            return coeff.apply(x, shift=self.target_mean)
        mu = np.asarray(source_mean, dtype=np.float64).reshape(-1)
        return coeff.apply(x - mu, shift=self.target_mean) + mu
