"""Evaluation statistics for parameter recovery and forecasting."""

from __future__ import annotations

import logging
import math
import warnings
from collections import defaultdict
from dataclasses import asdict, dataclass, fields

import numpy as np

from .forecasting import ForecastSet
from .results import METHODS

log = logging.getLogger(__name__)

MAPE_GUARD = 1e-9


class UndefinedMetricError(ValueError):
    """The metric has no defined value, e.g. an empty coefficient subset."""


@dataclass
class EvalRecord:
    scenario: str
    replication: int
    method: str
    param_rmse_all: float | None = None
    param_rmse_zero: float | None = None
    param_rmse_nonzero: float | None = None
    coverage_all: float | None = None
    coverage_zero: float | None = None
    coverage_nonzero: float | None = None
    mean_len_all: float | None = None
    mean_len_zero: float | None = None
    mean_len_nonzero: float | None = None
    forecast_rmse: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


EVAL_COLUMNS = [f.name for f in fields(EvalRecord)]
METRIC_COLUMNS = EVAL_COLUMNS[3:]


def _mask(n: int, mask) -> np.ndarray:
    if mask is None:
        return np.ones(n, dtype=bool)
    m = np.asarray(mask)
    if m.dtype == bool:
        if m.shape != (n,):
            raise ValueError("boolean mask has the wrong length")
        return m
    out = np.zeros(n, dtype=bool)
    out[m.astype(np.intp)] = True
    return out


def zero_mask(beta_true) -> np.ndarray:
    """Exact planted zeros (no threshold)."""
    return np.asarray(beta_true, dtype=float) == 0.0


def param_rmse(beta_hat, beta_true, mask=None) -> float:
    beta_hat = np.asarray(beta_hat, dtype=float).ravel()
    beta_true = np.asarray(beta_true, dtype=float).ravel()
    if beta_hat.shape != beta_true.shape:
        raise ValueError("beta_hat and beta_true differ in length")
    m = _mask(beta_true.size, mask)
    if not m.any():
        raise UndefinedMetricError("empty coefficient subset")
    return float(np.sqrt(np.mean((beta_hat[m] - beta_true[m]) ** 2)))


def coverage(lower, upper, beta_true, mask=None) -> float:
    lower, upper, beta_true = (np.asarray(a, dtype=float).ravel() for a in (lower, upper, beta_true))
    if not lower.shape == upper.shape == beta_true.shape:
        raise ValueError("interval bounds and truth must be congruent")
    m = _mask(beta_true.size, mask)
    if not m.any():
        raise UndefinedMetricError("empty coefficient subset")
    inside = (lower[m] <= beta_true[m]) & (beta_true[m] <= upper[m])
    return float(np.mean(inside))


def mean_interval_length(lower, upper, mask=None) -> float:
    lower, upper = np.asarray(lower, dtype=float).ravel(), np.asarray(upper, dtype=float).ravel()
    m = _mask(lower.size, mask)
    if not m.any():
        raise UndefinedMetricError("empty coefficient subset")
    return float(np.mean(upper[m] - lower[m]))


def forecast_rmse(fs: ForecastSet) -> float:
    e = fs.errors
    return float(np.sqrt(np.sum(e * e) / e.size))


def rmse(actual, predicted) -> float:
    e = np.asarray(actual, dtype=float) - np.asarray(predicted, dtype=float)
    return float(np.sqrt(np.mean(e * e)))


def mape(actual, predicted) -> float:
    """Mean absolute percentage error in percent.

    Actuals with ``|y| < 1e-9`` are dropped with a warning.
    """
    a = np.asarray(actual, dtype=float).ravel()
    f = np.asarray(predicted, dtype=float).ravel()
    keep = np.abs(a) >= MAPE_GUARD
    if not keep.all():
        warnings.warn(f"MAPE: excluding {int((~keep).sum())} near-zero actuals", RuntimeWarning, stacklevel=2)
    if not keep.any():
        raise UndefinedMetricError("MAPE undefined: all actuals are zero")
    return float(100.0 * np.mean(np.abs((a[keep] - f[keep]) / a[keep])))


def _or_none(fn, *args):
    try:
        return fn(*args)
    except UndefinedMetricError:
        return None


def evaluate(scenario: str, replication: int, method: str, beta_hat, lower, upper, beta_true, fs: ForecastSet) -> EvalRecord:
    z = zero_mask(beta_true)
    rec = EvalRecord(scenario=scenario, replication=int(replication), method=method)
    for tag, m in (("all", None), ("zero", z), ("nonzero", ~z)):
        setattr(rec, f"param_rmse_{tag}", _or_none(param_rmse, beta_hat, beta_true, m))
        if lower is not None:
            setattr(rec, f"coverage_{tag}", _or_none(coverage, lower, upper, beta_true, m))
            setattr(rec, f"mean_len_{tag}", _or_none(mean_interval_length, lower, upper, m))
    rec.forecast_rmse = forecast_rmse(fs)
    return rec


def lag_sweep_stats(rmse_by_lag, mape_by_lag, n_lags: int = 12) -> dict:
    """Mean and sample SD (divisor n - 1) of per-lag RMSE and MAPE."""
    r = np.asarray(rmse_by_lag, dtype=float)
    m = np.asarray(mape_by_lag, dtype=float)
    if r.shape != (n_lags,) or m.shape != (n_lags,):
        raise ValueError(f"expected exactly {n_lags} per-lag values")
    return {
        "mean_rmse": float(r.mean()),
        "sd_rmse": float(r.std(ddof=1)),
        "mean_mape": float(m.mean()),
        "sd_mape": float(m.std(ddof=1)),
    }


def method_rank(method: str) -> int:
    return METHODS.index(method) if method in METHODS else len(METHODS)


def tally_best(records, metrics=("forecast_rmse", "param_rmse_all")) -> list[dict]:
    """Share of replications in which each method has the lowest value.

    Exact ties go to the method listed first in ``METHODS`` and are counted
    in ``n_ties``.  Rows: scenario, metric, method, n_best, n_reps, percent,
    n_ties.
    """
    groups = defaultdict(dict)
    for r in records:
        rec = r if isinstance(r, dict) else r.as_dict()
        groups[(rec["scenario"], int(rec["replication"]))][rec["method"]] = rec
    by_scenario = defaultdict(list)
    for (scen, rep), per_method in sorted(groups.items()):
        by_scenario[scen].append(per_method)
    rows = []
    for scen, reps in by_scenario.items():
        methods = sorted({m for pm in reps for m in pm}, key=lambda m: (method_rank(m), m))
        for pm in reps:
            if set(pm) != set(methods):
                raise ValueError(f"scenario {scen}: replication is missing methods {set(methods) - set(pm)}")
        for metric in metrics:
            wins = dict.fromkeys(methods, 0)
            ties = 0
            n_valid = 0
            for pm in reps:
                vals = {m: pm[m].get(metric) for m in methods}
                vals = {m: v for m, v in vals.items() if v is not None and not math.isnan(float(v))}
                if not vals:
                    continue
                n_valid += 1
                best = min(float(v) for v in vals.values())
                tied = [m for m in methods if m in vals and float(vals[m]) == best]
                if len(tied) > 1:
                    ties += 1
                    log.warning("scenario %s metric %s: tie between %s", scen, metric, tied)
                wins[tied[0]] += 1
            for m in methods:
                rows.append(
                    {
                        "scenario": scen,
                        "metric": metric,
                        "method": m,
                        "n_best": wins[m],
                        "n_reps": n_valid,
                        "percent": 100.0 * wins[m] / n_valid if n_valid else None,
                        "n_ties": ties,
                    }
                )
    return rows


def summarize_records(records, columns=None) -> list[dict]:
    """Mean and SD (ddof=1) per (scenario, method) for each metric column.

    Missing values are skipped; coverage is the mean of per-replication
    coverages.
    """
    columns = columns or METRIC_COLUMNS
    groups = defaultdict(list)
    for r in records:
        rec = r if isinstance(r, dict) else r.as_dict()
        groups[(rec["scenario"], rec["method"])].append(rec)
    out = []
    for (scen, method), recs in sorted(groups.items(), key=lambda kv: (kv[0][0], method_rank(kv[0][1]), kv[0][1])):
        row = {"scenario": scen, "method": method, "n_reps": len(recs)}
        for c in columns:
            vals = np.array([float(x[c]) for x in recs if x.get(c) is not None and not math.isnan(float(x[c]))])
            row[f"{c}_mean"] = float(vals.mean()) if vals.size else None
            row[f"{c}_sd"] = float(vals.std(ddof=1)) if vals.size > 1 else None
        out.append(row)
    return out
