"""
Fit six Givens angles so that the entrywise square of the resulting 4x4
orthogonal matrix approximates a bistochastic matrix.

    O(theta) = G01(t1) G02(t2) G03(t3) G12(t4) G13(t5) G23(t6)
    F(theta) = || O*O - B ||_F          (* = entrywise product)

Not every bistochastic matrix is unistochastic, so the best residual is
returned alongside the angles rather than hidden.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from ..qcsim import GivensRotation, make_rng
from .balance import is_doubly_stochastic

PLANES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
TWO_PI = 2 * np.pi
DEFAULT_RESTARTS = 64
DEFAULT_FIT_SEED = 20210101
GRAD_TOL = 1e-8


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class FitResult:
    angles: np.ndarray
    residual: float
    grad_norm: float
    restarts: int


def _givens(plane, theta) -> np.ndarray:
    return GivensRotation(plane, float(theta)).matrix()


def _givens_deriv(plane, theta) -> np.ndarray:
    i, j = plane
    d = np.zeros((4, 4))
    c, s = np.cos(theta), np.sin(theta)
    d[i, i] = -s
    d[j, j] = -s
    d[i, j] = -c
    d[j, i] = c
    return d


def build_transition_gate(angles) -> np.ndarray:
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (6,):
        raise ValueError(f"expected 6 angles, got shape {angles.shape}")
    gate = np.eye(4)
    for plane, theta in zip(PLANES, angles):
        gate = gate @ _givens(plane, theta)
    return gate


def _residual_and_jacobian(theta: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Entrywise residual O*O - B (flattened, 16) and its 16x6 Jacobian."""
    gs = [_givens(p, t) for p, t in zip(PLANES, theta)]
    prefix = [np.eye(4)]
    for g in gs:
        prefix.append(prefix[-1] @ g)
    suffix = [np.eye(4)]
    for g in reversed(gs):
        suffix.append(g @ suffix[-1])
    suffix = suffix[::-1]  # suffix[k] = G_k ... G_5
    o = prefix[-1]
    jac = np.empty((16, 6))
    for k, (p, t) in enumerate(zip(PLANES, theta)):
        do = prefix[k] @ _givens_deriv(p, t) @ suffix[k + 1]
        jac[:, k] = (2.0 * o * do).ravel()
    return (o * o - b).ravel(), jac


def objective_gradient(theta, b) -> np.ndarray:
    """Gradient of the squared residual ||O*O - B||_F^2."""
    r, jac = _residual_and_jacobian(np.asarray(theta, dtype=float), np.asarray(b, dtype=float))
    return 2.0 * jac.T @ r


def residual(angles, b) -> float:
    o = build_transition_gate(angles)
    return float(np.linalg.norm(o * o - np.asarray(b, dtype=float)))


def _local_descent(x0: np.ndarray, b: np.ndarray) -> np.ndarray:
    res = least_squares(
        lambda x: _residual_and_jacobian(x, b)[0], x0,
        jac=lambda x: _residual_and_jacobian(x, b)[1],
        method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=4000,
    )
    return res.x


def fit_rotation_angles(b, restarts: int = DEFAULT_RESTARTS,
                        seed: int = DEFAULT_FIT_SEED) -> FitResult:
    """Multi-start local fit. Start 0 is theta = 0; starts 1..restarts come
    from a PCG64 stream seeded with ``seed``, so a larger ``restarts`` always
    explores a superset of the starts of a smaller one.

    Angles are wrapped to [0, 2*pi). Ties on residual go to the
    lexicographically smallest angle vector.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (4, 4) or not is_doubly_stochastic(b, 1e-6):
        raise FitError("target must be a 4x4 doubly stochastic matrix (within 1e-6)")
    if restarts < 0:
        raise ValueError("restarts must be non-negative")
    rng = make_rng(seed)
    starts = [np.zeros(6)] + [rng.uniform(0.0, TWO_PI, 6) for _ in range(restarts)]
    best_key = None
    best = None
    for x0 in starts:
        x = np.mod(_local_descent(x0, b), TWO_PI)
        r = residual(x, b)
        key = (r, tuple(x))
        if best_key is None or key < best_key:
            best_key, best = key, x
    grad_norm = float(np.linalg.norm(objective_gradient(best, b)))
    return FitResult(best, best_key[0], grad_norm, restarts)
