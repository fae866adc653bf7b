"""Lag-order experiment on the quarterly Canadian macro panel (e, prod, rw, U)."""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..forecasting import difference, invert_difference, sequential_forecast
from ..metrics import lag_sweep_stats, mape, method_rank, rmse
from ..var_core import build_design
from .config import RunConfig
from .study import fit_method, method_seed

log = logging.getLogger(__name__)

COLUMNS = ("e", "prod", "rw", "U")
N_ROWS = 84
HOLDOUT = 4
LAGS = tuple(range(1, 13))
CASE_LAG = 11
DATA_ENV = "SHRINKVAR_CANADA_CSV"
BUNDLED = Path(__file__).resolve().parent.parent / "data" / "canada.csv"


class DatasetError(RuntimeError):
    pass


@dataclass(frozen=True)
class CanadaDataset:
    values: np.ndarray
    index: tuple[str, ...]

    @property
    def columns(self) -> tuple[str, ...]:
        return COLUMNS


def quarter_labels(start_year: int = 1980, n: int = N_ROWS) -> tuple[str, ...]:
    return tuple(f"{start_year + i // 4}Q{i % 4 + 1}" for i in range(n))


def dataset_path(path=None) -> Path:
    if path is not None:
        return Path(path)
    if os.environ.get(DATA_ENV):
        return Path(os.environ[DATA_ENV])
    return BUNDLED


def load_canada(path=None) -> CanadaDataset:
    """Load and validate the 84 x 4 panel.

    The CSV needs a header containing ``e, prod, rw, U`` (any extra columns,
    such as a date, are ignored).  Lookup order: ``path``, the
    ``SHRINKVAR_CANADA_CSV`` environment variable, the bundled asset.
    """
    p = dataset_path(path)
    if not p.is_file():
        raise DatasetError(
            f"Canada dataset not found at {p}; provide a CSV with columns {','.join(COLUMNS)} "
            f"(84 quarterly rows, 1980Q1-2000Q4) via --data or ${DATA_ENV}"
        )
    with p.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise DatasetError(f"{p}: missing columns {missing}")
        try:
            rows = [[float(r[c]) for c in COLUMNS] for r in reader]
        except (TypeError, ValueError) as exc:
            raise DatasetError(f"{p}: non-numeric value ({exc})") from exc
    values = np.array(rows, dtype=float)
    if values.shape != (N_ROWS, len(COLUMNS)):
        raise DatasetError(f"{p}: expected {N_ROWS} x {len(COLUMNS)} values, got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise DatasetError(f"{p}: non-finite values")
    u = values[:, COLUMNS.index("U")]
    if u.min() <= 0 or u.max() >= 20:
        raise DatasetError(f"{p}: U should be a percentage in (0, 20), got range [{u.min()}, {u.max()}]")
    return CanadaDataset(values=values, index=quarter_labels())


def forecast_levels(levels: np.ndarray, p: int, method: str, run: RunConfig, seed: int, perfect: bool = False):
    """Fit on the first T-1-4 differences; return (level forecasts, actual levels, B_hat)."""
    diffs = difference(levels)
    n_train = diffs.shape[0] - HOLDOUT
    train, test = diffs[:n_train], diffs[n_train:]
    actual = levels[-HOLDOUT:]
    if perfect:
        return actual.copy(), actual, None
    fit = fit_method(method, build_design(train, p), run, seed, intervals=False)
    pred_diffs = sequential_forecast(fit.B_hat, train, test).predictions
    pred = invert_difference(levels[-HOLDOUT - 1], pred_diffs, realized_levels=actual)
    return pred, actual, fit.B_hat


def lag_errors(pred: np.ndarray, actual: np.ndarray) -> dict:
    """RMSE and MAPE per series over the hold-out quarters, and their means over series."""
    per_rmse = [rmse(actual[:, j], pred[:, j]) for j in range(actual.shape[1])]
    per_mape = [mape(actual[:, j], pred[:, j]) for j in range(actual.shape[1])]
    row = {"rmse": float(np.mean(per_rmse)), "mape": float(np.mean(per_mape))}
    for name, r, m in zip(COLUMNS, per_rmse, per_mape):
        row[f"rmse_{name}"] = r
        row[f"mape_{name}"] = m
    return row


def run_canada(data: CanadaDataset, run: RunConfig, lags=LAGS, perfect_forecasts: bool = False) -> dict:
    """Return ``errors`` (method x lag rows), ``forecasts`` (long rows), ``coefficients`` (long rows)."""
    errors, forecasts, coefs = [], [], []
    methods = sorted(run.methods, key=method_rank)
    for method in methods:
        for p in lags:
            seed = method_seed(run.base_seed + 1000 * p, method)
            pred, actual, B_hat = forecast_levels(data.values, p, method, run, seed, perfect=perfect_forecasts)
            errors.append({"method": method, "p": p, **lag_errors(pred, actual)})
            for h in range(HOLDOUT):
                for j, name in enumerate(COLUMNS):
                    forecasts.append(
                        {
                            "method": method,
                            "p": p,
                            "quarter": data.index[N_ROWS - HOLDOUT + h],
                            "series": name,
                            "actual": float(actual[h, j]),
                            "forecast": float(pred[h, j]),
                        }
                    )
            if B_hat is not None:
                for k, v in enumerate(B_hat.ravel(order="F")):
                    coefs.append({"method": method, "p": p, "coef": k, "value": float(v)})
    return {"errors": errors, "forecasts": forecasts, "coefficients": coefs}


def canada_summary(errors: list[dict], lags=LAGS) -> list[dict]:
    out = []
    methods = sorted({r["method"] for r in errors}, key=method_rank)
    for m in methods:
        rows = sorted((r for r in errors if r["method"] == m), key=lambda r: int(r["p"]))
        if [int(r["p"]) for r in rows] != list(lags):
            log.warning("method %s does not cover every lag; skipping summary", m)
            continue
        stats = lag_sweep_stats([float(r["rmse"]) for r in rows], [float(r["mape"]) for r in rows], n_lags=len(lags))
        out.append({"method": m, **stats})
    return out


def case_table(errors: list[dict], p: int = CASE_LAG) -> list[dict]:
    rows = [r for r in errors if int(r["p"]) == p]
    return [{"method": r["method"], "rmse": float(r["rmse"]), "mape": float(r["mape"])} for r in sorted(rows, key=lambda r: method_rank(r["method"]))]
