"""Sparse attention weights for hyperedge construction.

Given a center sample x and the matrix P whose columns are the center's
nearest neighbors, the attention weights solve the lasso problem

    min_z  ||x - P z||^2 + 2 eps ||z||_1

with the alternating direction method of multipliers. The splitting
introduces a twin variable q for z; each iteration solves a damped
normal-equation system for z (one Cholesky factorization per problem,
cached), soft-thresholds the dual-shifted copy of z into q, and takes a
dual ascent step on the multiplier m. q is the canonical solution
because the threshold step gives it exact zeros.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import InputError, NumericalError, ParameterError


@dataclass
class AdmmParams:
    """Knobs for the attention solver.

    epsilon is the l1 weight, rho the augmented-Lagrangian penalty and
    theta the dual step size (defaults to rho). Iteration stops once the
    split residual max|z - q| drops to tol, or after max_iter rounds.
    """

    epsilon: float
    rho: float = 1.0
    theta: float | None = None
    max_iter: int = 200
    tol: float = 1e-6

    def __post_init__(self):
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise ParameterError("epsilon must be a positive real")
        if not (np.isfinite(self.rho) and self.rho > 0):
            raise ParameterError("rho must be a positive real")
        if self.theta is None:
            self.theta = self.rho
        elif not (np.isfinite(self.theta) and self.theta > 0):
            raise ParameterError("theta must be a positive real")
        if self.max_iter < 1:
            raise ParameterError("max_iter must be at least 1")
        if not (np.isfinite(self.tol) and self.tol > 0):
            raise ParameterError("tol must be a positive real")


@dataclass
class AttentionSolution:
    """Result of one attention solve; q carries the exact zeros."""

    z: np.ndarray
    q: np.ndarray
    m: np.ndarray
    iterations: int
    converged: bool
    objective: float
    objective_trace: np.ndarray


def soft_threshold(v, t):
    """Entrywise shrinkage max(v - t, 0) + min(v + t, 0).

    This is the proximal map of t*||.||_1, i.e. the unique minimizer of
    t*||u||_1 + 0.5*||u - v||^2.
    """
    if t < 0:
        raise ParameterError("threshold must be nonnegative")
    v = np.asarray(v, dtype=float)
    return np.maximum(v - t, 0.0) + np.minimum(v + t, 0.0)


def attention_objective(x, P, q, epsilon):
    """Value of ||x - P q||^2 + 2 eps ||q||_1."""
    r = x - P @ q
    return float(r @ r + 2.0 * epsilon * np.sum(np.abs(q)))


def solve_attention(x, P, params: AdmmParams) -> AttentionSolution:
    """Solve min_z ||x - P z||^2 + 2 eps ||z||_1 for the given center.

    z, q and m start at zero. The z step reuses a cached Cholesky
    factorization of P^T P + rho I; the q step is a soft threshold at
    eps/rho; the m step adds theta*(z - q). Convergence requires both
    residuals small: max|z - q| <= tol and max|q - q_prev| <= tol. The
    split residual alone can hit exact zero while the iterates are still
    far from optimal (the threshold step is affine wherever no entry
    sits inside the dead zone), so the dual residual must vanish too.
    Identical inputs produce bit-identical outputs.
    """
    x = np.asarray(x, dtype=float).ravel()
    P = np.asarray(P, dtype=float)
    if P.ndim != 2:
        raise ParameterError("P must be 2-d (features x neighbors)")
    dim, n_cols = P.shape
    if n_cols < 1:
        raise ParameterError("P needs at least one column")
    if x.shape[0] != dim:
        raise ParameterError(f"x has {x.shape[0]} features, P has {dim}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(P))):
        raise InputError("non-finite entries in attention problem")

    rho = params.rho
    theta = params.theta
    eps = params.epsilon
    factor = cho_factor(P.T @ P + rho * np.eye(n_cols))
    ptx = P.T @ x

    z = np.zeros(n_cols)
    q = np.zeros(n_cols)
    m = np.zeros(n_cols)
    trace = []
    converged = False
    iterations = 0
    for iterations in range(1, params.max_iter + 1):
        z = cho_solve(factor, ptx + rho * q - m)
        q_prev = q
        q = soft_threshold(z + m / rho, eps / rho)
        m = m + theta * (z - q)
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(m))):
            raise NumericalError(
                f"attention solver diverged at iteration {iterations}"
            )
        trace.append(attention_objective(x, P, q, eps))
        split_gap = float(np.max(np.abs(z - q)))
        dual_gap = float(np.max(np.abs(q - q_prev)))
        if split_gap <= params.tol and dual_gap <= params.tol:
            converged = True
            break

    return AttentionSolution(
        z=z,
        q=q,
        m=m,
        iterations=iterations,
        converged=converged,
        objective=trace[-1],
        objective_trace=np.asarray(trace),
    )


def solver_config(params: AdmmParams) -> dict:
    """Plain-dict echo of the solver settings, for report serialization."""
    return dataclasses.asdict(params)
