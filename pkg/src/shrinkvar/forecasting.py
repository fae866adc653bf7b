"""One-step-ahead forecasting with fixed coefficients, and first differencing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .var_core import DimensionError, SeriesLengthError, as_series, check_coef, lag_order


@dataclass(frozen=True)
class ForecastSet:
    predictions: np.ndarray
    actuals: np.ndarray
    method: str = ""

    def __post_init__(self):
        if self.predictions.shape != self.actuals.shape:
            raise DimensionError("predictions and actuals must have the same shape")
        if self.predictions.ndim != 2 or self.predictions.shape[0] < 1:
            raise DimensionError("forecast set needs at least one (H, d) row")

    @property
    def horizon(self) -> int:
        return self.predictions.shape[0]

    @property
    def errors(self) -> np.ndarray:
        return self.actuals - self.predictions


def sequential_forecast(B_hat, history, test, method: str = "") -> ForecastSet:
    """Forecast each test row from the ``p`` realised observations before it.

    Predictions never feed back into later steps and ``B_hat`` is not refit.
    """
    B = check_coef(B_hat)
    p = lag_order(B)
    hist = as_series(history)
    test = as_series(test)
    if hist.shape[0] < p:
        raise SeriesLengthError(f"history has {hist.shape[0]} rows, need at least p = {p}")
    if hist.shape[1] != B.shape[0] or test.shape[1] != B.shape[0]:
        raise DimensionError("series width does not match the coefficient matrix")
    full = np.vstack([hist[-p:], test])
    H = test.shape[0]
    # row h of lagged holds (y_{t-1}, ..., y_{t-p}) for test row h
    lagged = np.concatenate([full[p - lag : p - lag + H] for lag in range(1, p + 1)], axis=1)
    return ForecastSet(predictions=lagged @ B.T, actuals=test.copy(), method=method)


def difference(series) -> np.ndarray:
    y = as_series(series)
    if y.shape[0] < 2:
        raise SeriesLengthError("differencing needs at least 2 rows")
    return np.diff(y, axis=0)


def invert_difference(last_level, predicted_diffs, realized_levels=None) -> np.ndarray:
    """Turn predicted differences into level forecasts.

    Without ``realized_levels`` the anchors are recursive: the first level is
    ``last_level + diff_1`` and each later one adds to the previous forecast.
    With ``realized_levels`` (the ``H`` actual levels of the forecast window),
    step ``h`` is anchored at the realised level of step ``h - 1``.
    """
    diffs = as_series(predicted_diffs)
    last = np.asarray(last_level, dtype=float).reshape(1, -1)
    if last.shape[1] != diffs.shape[1]:
        raise DimensionError("last_level width does not match the differences")
    if realized_levels is None:
        return last + np.cumsum(diffs, axis=0)
    realized = as_series(realized_levels)
    if realized.shape != diffs.shape:
        raise DimensionError("realized_levels must match predicted_diffs in shape")
    anchors = np.vstack([last, realized[:-1]])
    return anchors + diffs
