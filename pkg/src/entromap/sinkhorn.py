"""Log-domain Sinkhorn solvers for discrete entropic optimal transport.

Solves the entropic dual between two uniform-weighted point clouds under
the half-squared-Euclidean cost, the symmetric problem of a cloud against
itself (one self potential), and derives the entropic cost and the
Sinkhorn divergence. Updates are alternating soft minima evaluated with
max-subtracted log-sum-exp, so small regularization values stay
overflow-free; the dense scaled-kernel form is deliberately not
implemented.

The implied plan for potentials (f, g) is
``pi_ij = (1/(n*m)) * exp((f_i + g_j - C_ij) / eps)``; convergence is
measured as the total l1 deviation of its row/column sums from the
uniform marginals.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from ._kernels import softmin
from .measures import as_points

__all__ = [
    "SolverConfig",
    "DualPotentials",
    "SelfPotential",
    "cost_matrix",
    "solve_sinkhorn",
    "solve_symmetric",
    "entropic_cost",
    "sinkhorn_divergence",
    "marginal_residual",
    "implied_plan",
]


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings: regularization, stopping tolerance, iteration cap.

    `tol` bounds the l1 marginal residual of the implied plan for the
    two-cloud solver and the max-abs fixed-point deviation for the
    symmetric solver.
    """

    epsilon: float
    tol: float = 1e-9
    max_iter: int = 100_000

    def __post_init__(self):
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"need epsilon > 0, got {self.epsilon}")
        if not (np.isfinite(self.tol) and self.tol > 0):
            raise ValueError(f"need tol > 0, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"need max_iter >= 1, got {self.max_iter}")


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DualPotentials:
    """Solution (f, g) of the discrete entropic dual, plus diagnostics.

    The gauge is fixed so that sum(f) = sum(g); `marginal_residual` is
    the achieved l1 marginal deviation (max over rows/columns) and
    `residual_history` records it at each full iteration from the second
    onward.
    """

    f: np.ndarray
    g: np.ndarray
    epsilon: float
    marginal_residual: float
    iterations: int
    converged: bool
    residual_history: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f", _freeze(self.f))
        object.__setattr__(self, "g", _freeze(self.g))
        object.__setattr__(self, "residual_history", _freeze(self.residual_history))
        if not (np.all(np.isfinite(self.f)) and np.all(np.isfinite(self.g))):
            raise ValueError("potentials contain non-finite entries")


@dataclass(frozen=True)
class SelfPotential:
    """Solution alpha of the symmetric dual of a cloud against itself.

    `residual` is the max-abs deviation from the fixed point
    ``alpha_i = -eps * log((1/n) sum_j exp((alpha_j - C_ij) / eps))``.
    """

    alpha: np.ndarray
    epsilon: float
    residual: float
    iterations: int
    converged: bool
    residual_history: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", _freeze(self.alpha))
        object.__setattr__(self, "residual_history", _freeze(self.residual_history))
        if not np.all(np.isfinite(self.alpha)):
            raise ValueError("self potential contains non-finite entries")


def cost_matrix(X, Y) -> np.ndarray:
    """Half squared Euclidean cost matrix C_ij = 0.5 * ||x_i - y_j||^2.

    Computed from coordinate differences directly (not the expanded
    norms-minus-dot form), so it is exactly symmetric with zero diagonal
    when the clouds coincide. Row-chunked to bound peak memory.
    """
    x = as_points(X)
    y = as_points(Y)
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    n, m = x.shape[0], y.shape[0]
    out = np.empty((n, m))
    chunk = max(1, 2**22 // max(1, m * x.shape[1]))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        diff = x[start:stop, None, :] - y[None, :, :]
        out[start:stop] = 0.5 * np.einsum("ijk,ijk->ij", diff, diff)
    return out


def _row_residual(f: np.ndarray, f_next: np.ndarray, eps: float) -> float:
    # l1 deviation of the implied plan's row sums from 1/n: after a
    # column update the row sum i equals (1/n) exp((f_i - f'_i)/eps)
    # with f' the next row update.
    with np.errstate(over="ignore"):
        dev = np.abs(np.expm1((f - f_next) / eps))
    return float(dev.sum() / f.shape[0])


def solve_sinkhorn(X, Y, config: SolverConfig) -> DualPotentials:
    """Alternating log-domain updates for the entropic dual of (X, Y).

    Iterates f_i <- -eps log((1/m) sum_j exp((g_j - C_ij)/eps)) and the
    column counterpart until the l1 marginal residual of the implied
    plan drops to `config.tol` or `config.max_iter` full iterations have
    run. Non-convergence returns the last iterate with a warning and
    ``converged=False``.
    """
    x = as_points(X)
    y = as_points(Y)
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    eps, tol = config.epsilon, config.tol
    n, m = x.shape[0], y.shape[0]
    f = np.zeros(n)
    g = np.zeros(m)
    history = []
    converged = False
    residual = np.inf
    iterations = config.max_iter
    for it in range(1, config.max_iter + 1):
        f_next = softmin(x, y, g, eps)
        if it > 1:
            residual = _row_residual(f, f_next, eps)
            history.append(residual)
            if residual <= tol:
                converged = True
                iterations = it - 1
                break
        f = f_next
        g = softmin(y, x, f, eps)
    if not converged:
        f_next = softmin(x, y, g, eps)
        residual = _row_residual(f, f_next, eps)
        history.append(residual)
        converged = residual <= tol
        if not converged:
            warnings.warn(
                f"Sinkhorn did not reach tol={tol:.1e} in {config.max_iter} iterations "
                f"(residual {residual:.3e})", RuntimeWarning, stacklevel=2)
    # gauge: shift so that sum(f) = sum(g); the implied plan is invariant
    kappa = (f.sum() - g.sum()) / (n + m)
    return DualPotentials(f - kappa, g + kappa, eps, residual, iterations,
                          converged, np.asarray(history))


def solve_symmetric(X, config: SolverConfig) -> SelfPotential:
    """Damped fixed-point iteration for the self potential of a cloud.

    Updates alpha <- 0.5 * (alpha + softmin(alpha)) until the max-abs
    fixed-point deviation |softmin(alpha) - alpha| drops to `config.tol`.
    The averaging makes the iteration a fast contraction in practice.
    """
    x = as_points(X)
    eps, tol = config.epsilon, config.tol
    alpha = np.zeros(x.shape[0])
    history = []
    converged = False
    residual = np.inf
    iterations = config.max_iter
    for it in range(1, config.max_iter + 1):
        target = softmin(x, x, alpha, eps)
        residual = float(np.abs(target - alpha).max())
        history.append(residual)
        if residual <= tol:
            converged = True
            iterations = it - 1
            break
        alpha = 0.5 * (alpha + target)
    if not converged:
        warnings.warn(
            f"symmetric solver did not reach tol={tol:.1e} in {config.max_iter} "
            f"iterations (residual {residual:.3e})", RuntimeWarning, stacklevel=2)
    return SelfPotential(alpha, eps, residual, iterations, converged,
                         np.asarray(history))


def entropic_cost(potentials: DualPotentials) -> float:
    """Entropic transport cost from converged potentials: mean(f) + mean(g)."""
    return float(potentials.f.mean() + potentials.g.mean())


def sinkhorn_divergence(X, Y, config: SolverConfig) -> float:
    """Entropic cost of (X, Y) centered by the two self terms.

    Each self term is twice the mean self potential; the result is zero
    exactly when the clouds coincide and nonnegative in general.
    """
    cross = entropic_cost(solve_sinkhorn(X, Y, config))
    self_x = solve_symmetric(X, config).alpha.mean()
    self_y = solve_symmetric(Y, config).alpha.mean()
    return float(cross - self_x - self_y)


def implied_plan(potentials: DualPotentials, C: np.ndarray) -> np.ndarray:
    """Dense transport plan (1/(n*m)) exp((f_i + g_j - C_ij)/eps)."""
    f, g, eps = potentials.f, potentials.g, potentials.epsilon
    n, m = f.shape[0], g.shape[0]
    if C.shape != (n, m):
        raise ValueError(f"cost matrix shape {C.shape} does not match potentials ({n}, {m})")
    return np.exp((f[:, None] + g[None, :] - C) / eps) / (n * m)


def marginal_residual(potentials: DualPotentials, C: np.ndarray) -> float:
    """l1 deviation of the implied plan's marginals from uniform.

    Returns the max of the row-sum deviation from 1/n and the column-sum
    deviation from 1/m, each summed over entries.
    """
    plan = implied_plan(potentials, C)
    n, m = plan.shape
    row_dev = np.abs(plan.sum(axis=1) - 1.0 / n).sum()
    col_dev = np.abs(plan.sum(axis=0) - 1.0 / m).sum()
    return float(max(row_dev, col_dev))
