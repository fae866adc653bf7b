"""Core VAR(p) algebra shared by every estimator.

Layout conventions used throughout the package:

* A series is a ``(T, d)`` array, one row per time point.
* The stacked coefficient matrix ``B = [A_1 ... A_p]`` is ``(d, d*p)``;
  lag block ``A_i`` occupies columns ``(i-1)*d : i*d``.
* The flat coefficient vector enumerates rows fastest, then columns
  (i.e. column-major ``vec(B)``).  Every interval, metric and draw array
  in the package uses this single order.
* There is no intercept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DimensionError(ValueError):
    """Array shapes are inconsistent with the VAR layout."""


class SeriesLengthError(ValueError):
    """Not enough observations for the requested lag order."""


@dataclass(frozen=True)
class VarSpec:
    d: int
    p: int

    def __post_init__(self):
        if int(self.d) < 1 or int(self.p) < 1:
            raise ValueError(f"VarSpec needs d >= 1 and p >= 1, got d={self.d}, p={self.p}")

    @property
    def n_coef(self) -> int:
        return self.d * self.d * self.p


@dataclass(frozen=True)
class LaggedDesign:
    """Regression pair for a VAR(p): ``Y ~ X @ B.T``.

    Row ``t`` of ``X`` is ``(y_{t-1}', y_{t-2}', ..., y_{t-p}')`` and the
    matching row of ``Y`` is ``y_t'``.
    """

    X: np.ndarray
    Y: np.ndarray
    spec: VarSpec

    def __post_init__(self):
        d, p = self.spec.d, self.spec.p
        if self.X.ndim != 2 or self.Y.ndim != 2:
            raise DimensionError("X and Y must be 2-D")
        if self.X.shape[0] != self.Y.shape[0]:
            raise DimensionError(f"row mismatch: X has {self.X.shape[0]}, Y has {self.Y.shape[0]}")
        if self.X.shape[1] != d * p or self.Y.shape[1] != d:
            raise DimensionError(
                f"expected X width {d * p} and Y width {d}, got {self.X.shape[1]} and {self.Y.shape[1]}"
            )

    @property
    def n_obs(self) -> int:
        return self.X.shape[0]

    def take(self, rows) -> "LaggedDesign":
        rows = np.asarray(rows, dtype=np.intp)
        return LaggedDesign(self.X[rows], self.Y[rows], self.spec)

    @classmethod
    def empty(cls, d: int, p: int) -> "LaggedDesign":
        return cls(np.zeros((0, d * p)), np.zeros((0, d)), VarSpec(d, p))


def as_series(series) -> np.ndarray:
    y = np.asarray(series, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if y.ndim != 2:
        raise DimensionError("series must be a (T, d) array")
    return y


def build_design(series, p: int) -> LaggedDesign:
    """Arrange a ``(T, d)`` series into the lagged regression pair.

    Raises
    ------
    SeriesLengthError
        If ``T < p + 1``.
    ValueError
        If the series holds non-finite values.
    """
    y = as_series(series)
    T, d = y.shape
    spec = VarSpec(d, p)
    if T < p + 1:
        raise SeriesLengthError(f"series has {T} rows, need at least p+1 = {p + 1}")
    if not np.all(np.isfinite(y)):
        raise ValueError("series contains non-finite values")
    X = np.concatenate([y[p - lag : T - lag] for lag in range(1, p + 1)], axis=1)
    return LaggedDesign(X, y[p:].copy(), spec)


def check_coef(B) -> np.ndarray:
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] < 1 or B.shape[1] % B.shape[0] != 0 or B.shape[1] == 0:
        raise DimensionError(f"coefficient matrix must be (d, d*p), got shape {B.shape}")
    return B


def lag_order(B) -> int:
    B = check_coef(B)
    return B.shape[1] // B.shape[0]


def coef_to_flat(B) -> np.ndarray:
    """Flatten ``B`` in the canonical order (rows fastest, then columns)."""
    return check_coef(B).ravel(order="F")


def flat_to_coef(beta, d: int) -> np.ndarray:
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.size % (d * d) != 0 or beta.size == 0:
        raise DimensionError(f"flat vector of length {beta.size} is not d*d*p for d={d}")
    return beta.reshape((d, beta.size // d), order="F")


def lag_blocks(B) -> list[np.ndarray]:
    B = check_coef(B)
    d = B.shape[0]
    return [B[:, i * d : (i + 1) * d] for i in range(B.shape[1] // d)]


def pad_lags(B, p: int) -> np.ndarray:
    """Append zero lag blocks so that ``B`` has lag order ``p``."""
    B = check_coef(B)
    d = B.shape[0]
    if lag_order(B) > p:
        raise DimensionError(f"cannot pad lag order {lag_order(B)} down to {p}")
    out = np.zeros((d, d * p))
    out[:, : B.shape[1]] = B
    return out


def companion_matrix(B) -> np.ndarray:
    """VAR(1) embedding of a VAR(p): ``[A_1 .. A_p]`` on top, identities below."""
    B = check_coef(B)
    d, dp = B.shape
    C = np.zeros((dp, dp))
    C[:d, :] = B
    if dp > d:
        C[d:, :-d] = np.eye(dp - d)
    return C


def spectral_radius(M) -> float:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"spectral radius needs a square matrix, got shape {M.shape}")
    if M.size == 0:
        return 0.0
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix contains non-finite values")
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def is_stable(B) -> bool:
    return spectral_radius(companion_matrix(B)) < 1.0


def predict_one_step(B, history) -> np.ndarray:
    """Return ``sum_i A_i @ y_{t-i}``.

    ``history`` holds exactly ``p`` rows, newest first.
    """
    B = check_coef(B)
    h = as_series(history)
    d = B.shape[0]
    p = lag_order(B)
    if h.shape[0] != p:
        raise SeriesLengthError(f"history has {h.shape[0]} rows, expected p = {p}")
    if h.shape[1] != d:
        raise DimensionError(f"history width {h.shape[1]} does not match d = {d}")
    return B @ h.reshape(-1)


def residuals(B, design: LaggedDesign) -> np.ndarray:
    return design.Y - design.X @ check_coef(B).T
