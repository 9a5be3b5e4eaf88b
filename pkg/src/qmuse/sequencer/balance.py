"""Sinkhorn-Knopp balancing of smoothed count matrices.

Sparse count patterns make plain Sinkhorn sweeps converge sublinearly, so a
run that has not converged after ``NEWTON_AFTER`` sweeps solves the scaling
equations directly with a Newton-type root finder, warm-started from the
current scalings. The doubly stochastic scaling of a positive matrix is
unique, so both routes reach the same matrix.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import root

log = logging.getLogger(__name__)

FALLBACK_TOL = 1e-6
NEWTON_AFTER = 100


class BalanceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class BalanceResult:
    matrix: np.ndarray
    iterations: int
    achieved_tol: float
    converged: bool
    newton_steps: int = 0


def _sum_error(m: np.ndarray) -> float:
    return float(max(np.max(np.abs(m.sum(axis=1) - 1.0)), np.max(np.abs(m.sum(axis=0) - 1.0))))


def _solve_scaling(a: np.ndarray, x: np.ndarray, y: np.ndarray):
    """Row/column scalings of ``a`` with unit margins, in log space.

    Column 0's scaling is pinned (the problem is invariant under x*t, y/t)
    and its margin equation dropped, as it follows from the others.
    """
    n = a.shape[0]
    shift = np.log(y[0])
    z0 = np.concatenate([np.log(x) + shift, np.log(y[1:]) - shift])

    def equations(z):
        m = a * np.exp(z[:n, None] + np.concatenate([[0.0], z[n:]])[None, :])
        rows, cols = m.sum(axis=1), m.sum(axis=0)[1:]
        jac = np.zeros((2 * n - 1, 2 * n - 1))
        jac[:n, :n] = np.diag(rows)
        jac[:n, n:] = m[:, 1:]
        jac[n:, :n] = m[:, 1:].T
        jac[n:, n:] = np.diag(cols)
        return np.concatenate([rows - 1.0, cols - 1.0]), jac

    sol = root(equations, z0, jac=True, method="hybr", options={"xtol": 1e-15})
    z = sol.x
    if not np.all(np.isfinite(z)):
        return None, None, sol.nfev
    return np.exp(z[:n]), np.concatenate([[1.0], np.exp(z[n:])]), sol.nfev


def sinkhorn(counts, epsilon: float = 1e-3, tol: float = 1e-10,
             max_iter: int = 10_000) -> BalanceResult:
    a = np.asarray(counts, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"counts must be a square matrix, got shape {a.shape}")
    if np.any(a < 0) or not np.all(np.isfinite(a)):
        raise ValueError("counts must be finite and non-negative")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    a = a + epsilon
    x = np.ones(a.shape[0])
    y = np.ones(a.shape[0])
    err = np.inf
    it = 0
    newton = 0
    for it in range(1, max_iter + 1):
        x = 1.0 / (a @ y)
        y = 1.0 / (a.T @ x)
        # columns are exact after the column step; rows carry the residual
        err = float(np.max(np.abs(x * (a @ y) - 1.0)))
        if err <= tol:
            break
        if it == NEWTON_AFTER:
            xs, ys, newton = _solve_scaling(a, x, y)
            if xs is not None:
                if _sum_error(xs[:, None] * a * ys[None, :]) < err:
                    x, y = xs, ys
                    err = _sum_error(x[:, None] * a * y[None, :])
                    if err <= tol:
                        break
    m = x[:, None] * a * y[None, :]
    err = _sum_error(m)
    if err > tol:
        if err > FALLBACK_TOL:
            raise BalanceError(f"Sinkhorn did not converge: tolerance {err:.3e} after {it} iterations")
        log.warning("Sinkhorn stopped at tolerance %.3e after %d iterations", err, it)
    return BalanceResult(m, it, err, err <= tol, newton)


def to_bistochastic(counts, epsilon: float = 1e-3, tol: float = 1e-10,
                    max_iter: int = 10_000) -> np.ndarray:
    return sinkhorn(counts, epsilon, tol, max_iter).matrix


def is_doubly_stochastic(b, tol: float = 1e-6) -> bool:
    b = np.asarray(b, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1] or np.any(b < -tol):
        return False
    return bool(np.all(np.abs(b.sum(axis=0) - 1.0) <= tol)
                and np.all(np.abs(b.sum(axis=1) - 1.0) <= tol))
