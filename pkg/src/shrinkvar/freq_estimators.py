"""Closed-form frequentist fits: ridge and diagonal-target covariance shrinkage (NS)."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .var_core import LaggedDesign

log = logging.getLogger(__name__)

RIDGE_LAMBDA = 0.1
COND_LIMIT = 1e12


class RankDeficiencyError(np.linalg.LinAlgError):
    pass


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class FreqFit:
    B_hat: np.ndarray
    method: str
    lam: float | None = None
    shrink_intensity: float | None = None


def spd_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` for symmetric PSD ``A``.

    Cholesky when the condition number is below ``COND_LIMIT``, otherwise a
    pseudo-inverse solve.
    """
    if np.linalg.cond(A) < COND_LIMIT:
        try:
            return linalg.cho_solve(linalg.cho_factor(A, lower=True), b)
        except linalg.LinAlgError:
            pass
    log.debug("ill-conditioned normal equations, falling back to pinv")
    return np.linalg.pinv(A, hermitian=True) @ b


def ridge_objective(B, design: LaggedDesign, lam: float) -> float:
    R = design.Y - design.X @ np.asarray(B).T
    return float(np.sum(R * R) + lam * np.sum(np.asarray(B) ** 2))


def ridge_fit(design: LaggedDesign, lam: float = RIDGE_LAMBDA, scaling: str = "none") -> FreqFit:
    """Multi-output ridge regression of ``Y`` on ``X``.

    ``scaling="none"`` minimises ``||Y - X B'||_F^2 + lam ||B||_F^2`` on the
    raw data.  ``scaling="glmnet"`` uses the per-observation convention of
    glmnet with ``alpha=0``: columns of ``X`` are centred and scaled to unit
    (1/n) variance, ``Y`` is centred, the objective is
    ``RSS / (2n) + lam/2 ||B_std||^2``, and coefficients are mapped back to
    the original scale.  The implied intercept is dropped.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if scaling not in ("none", "glmnet"):
        raise ValueError(f"unknown scaling {scaling!r}")
    if design.n_obs == 0:
        raise InsufficientDataError("empty design")
    X, Y = design.X, design.Y
    n, k = X.shape
    if lam == 0 and np.linalg.matrix_rank(X - X.mean(axis=0) if scaling == "glmnet" else X) < k:
        raise RankDeficiencyError(f"X'X is singular (rank < {k}) and lambda = 0")
    if scaling == "none":
        Bt = spd_solve(X.T @ X + lam * np.eye(k), X.T @ Y)
    else:
        sd = X.std(axis=0)
        sd[sd == 0] = 1.0
        Xs = (X - X.mean(axis=0)) / sd
        Yc = Y - Y.mean(axis=0)
        Bt = spd_solve(Xs.T @ Xs + n * lam * np.eye(k), Xs.T @ Yc) / sd[:, None]
    return FreqFit(B_hat=Bt.T.copy(), method="Ridge", lam=float(lam))


def diagonal_target_intensity(Z: np.ndarray) -> float:
    """Optimal shrinkage weight toward ``diag(S)`` for the sample covariance of ``Z``.

    Unbiased estimate of ``sum_{i!=j} Var(s_ij) / sum_{i!=j} s_ij^2`` with
    ``Var(s_ij)`` estimated from the per-row cross products, clipped to [0, 1].
    """
    n = Z.shape[0]
    Zc = Z - Z.mean(axis=0)
    W = Zc[:, :, None] * Zc[:, None, :]
    W_bar = W.mean(axis=0)
    S = W_bar * n / (n - 1)
    var_s = n / (n - 1) ** 3 * np.sum((W - W_bar) ** 2, axis=0)
    off = ~np.eye(Z.shape[1], dtype=bool)
    denom = np.sum(S[off] ** 2)
    if denom <= 0:
        return 1.0
    return float(np.clip(np.sum(var_s[off]) / denom, 0.0, 1.0))


def ns_fit(design: LaggedDesign, intensity: float | None = None, center: bool = True) -> FreqFit:
    """Covariance-shrinkage VAR fit.

    Shrinks the regressor covariance ``S_xx`` toward its diagonal and solves
    ``B' = ((1 - delta) S_xx + delta diag(S_xx))^{-1} S_xy``.  ``intensity``
    overrides the data-driven ``delta``.
    """
    n = design.n_obs
    if n < 3:
        raise InsufficientDataError(f"NS needs at least 3 rows, got {n}")
    X, Y = design.X, design.Y
    if center:
        X = X - X.mean(axis=0)
        Y = Y - Y.mean(axis=0)
    S_xx = X.T @ X / (n - 1)
    S_xy = X.T @ Y / (n - 1)
    if intensity is None:
        delta = diagonal_target_intensity(design.X) if X.shape[1] > 1 else 0.0
    else:
        delta = float(intensity)
        if not 0.0 <= delta <= 1.0:
            raise ValueError("intensity must lie in [0, 1]")
    S_shrunk = (1.0 - delta) * S_xx
    S_shrunk[np.diag_indices_from(S_shrunk)] = np.diag(S_xx)
    Bt = spd_solve(S_shrunk, S_xy)
    return FreqFit(B_hat=Bt.T.copy(), method="NS", shrink_intensity=delta)
