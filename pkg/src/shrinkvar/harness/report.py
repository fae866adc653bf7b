"""CSV persistence and the plain-text report.

Every summary file is recomputed from the per-replication ``records.csv``
(and ``canada_errors.csv``), so ``report --in DIR`` reproduces them exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path

from ..metrics import EVAL_COLUMNS, METRIC_COLUMNS, summarize_records, tally_best
from .canada import COLUMNS as CANADA_COLUMNS
from .canada import canada_summary, case_table

RECORDS = "records.csv"
CANADA_ERRORS = "canada_errors.csv"
CANADA_FORECASTS = "canada_forecasts.csv"
CANADA_COEFS = "canada_coefficients.csv"

CANADA_ERROR_COLUMNS = ["method", "p", "rmse", "mape"] + [
    f"{m}_{c}" for c in CANADA_COLUMNS for m in ("rmse", "mape")
]
SUMMARY_COLUMNS = ["scenario", "method", "n_reps"] + [f"{c}_{s}" for c in METRIC_COLUMNS for s in ("mean", "sd")]
TALLY_COLUMNS = ["scenario", "metric", "method", "n_best", "n_reps", "percent", "n_ties"]
LONG_COLUMNS = ["method", "scenario", "replication", "metric", "value"]
CANADA_SUMMARY_COLUMNS = ["method", "mean_rmse", "sd_rmse", "mean_mape", "sd_mape"]
CASE_COLUMNS = ["method", "rmse", "mape"]


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r.get(c)) for c in columns])
    return path


def _parse(v: str):
    if v == "":
        return None
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return [{k: _parse(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def write_records(out_dir, records) -> Path:
    rows = [r if isinstance(r, dict) else r.as_dict() for r in records]
    return write_csv(Path(out_dir) / RECORDS, EVAL_COLUMNS, rows)


def long_rows(records) -> list[dict]:
    out = []
    for metric in METRIC_COLUMNS:
        for r in records:
            if r.get(metric) is not None:
                out.append(
                    {
                        "method": r["method"],
                        "scenario": r["scenario"],
                        "replication": r["replication"],
                        "metric": metric,
                        "value": float(r[metric]),
                    }
                )
    return out


def _num(v, digits=4) -> str:
    return "-" if v is None else f"{v:.{digits}g}" if abs(v) < 1e-3 and v != 0 else f"{v:.{digits}f}"


def _table(title: str, header: list[str], rows: list[list[str]]) -> list[str]:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    lines = [title, "  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
    return lines + [""]


def _scenario_sections(summary: list[dict], tally: list[dict]) -> list[str]:
    lines = []
    scenarios = sorted({r["scenario"] for r in summary})
    for scen in scenarios:
        rows = [r for r in summary if r["scenario"] == scen]
        lines += _table(
            f"[{scen}] Overall performance (all coefficients)",
            ["method", "reps", "FRMSE mean", "FRMSE sd", "PRMSE mean", "PRMSE sd", "Cov", "Len"],
            [
                [
                    r["method"],
                    str(r["n_reps"]),
                    _num(r["forecast_rmse_mean"]),
                    _num(r["forecast_rmse_sd"]),
                    _num(r["param_rmse_all_mean"]),
                    _num(r["param_rmse_all_sd"]),
                    _num(r["coverage_all_mean"], 3),
                    _num(r["mean_len_all_mean"], 3),
                ]
                for r in rows
            ],
        )
        for tag, label in (("zero", "zero coefficients"), ("nonzero", "nonzero coefficients")):
            lines += _table(
                f"[{scen}] Performance on {label}",
                ["method", "PRMSE mean", "PRMSE sd", "Cov", "Len"],
                [
                    [
                        r["method"],
                        _num(r[f"param_rmse_{tag}_mean"]),
                        _num(r[f"param_rmse_{tag}_sd"]),
                        _num(r[f"coverage_{tag}_mean"], 3),
                        _num(r[f"mean_len_{tag}_mean"], 3),
                    ]
                    for r in rows
                ],
            )
        t = [r for r in tally if r["scenario"] == scen]
        lines += _table(
            f"[{scen}] Share of replications with the lowest error",
            ["metric", "method", "% of reps", "ties"],
            [[r["metric"], r["method"], _num(r["percent"], 1), str(r["n_ties"])] for r in t],
        )
    return lines


def emit_report(out_dir) -> dict:
    """Regenerate summary CSVs, plot data and ``report.txt`` from the raw result files."""
    out = Path(out_dir)
    if out.exists() and not out.is_dir():
        raise OSError(f"output path {out} is not a directory")
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    lines = ["Shrinkage VAR study report", ""]
    have_data = False

    rec_path = out / RECORDS
    records = read_csv(rec_path) if rec_path.exists() else []
    if rec_path.exists() or not (out / CANADA_ERRORS).exists():
        summary = summarize_records(records)
        tally = tally_best(records) if records else []
        written["summary"] = write_csv(out / "summary.csv", SUMMARY_COLUMNS, summary)
        written["times_best"] = write_csv(out / "times_best.csv", TALLY_COLUMNS, tally)
        written["plot_long"] = write_csv(out / "plot_long.csv", LONG_COLUMNS, long_rows(records))
        if records:
            have_data = True
            lines += _scenario_sections(summary, tally)

    err_path = out / CANADA_ERRORS
    if err_path.exists():
        errors = read_csv(err_path)
        summ = canada_summary(errors)
        case = case_table(errors)
        written["canada_summary"] = write_csv(out / "canada_summary.csv", CANADA_SUMMARY_COLUMNS, summ)
        written["canada_case"] = write_csv(out / "canada_p11.csv", CASE_COLUMNS, case)
        written["canada_plot_long"] = write_csv(
            out / "canada_plot_long.csv",
            ["method", "p", "metric", "value"],
            [{"method": r["method"], "p": r["p"], "metric": m, "value": float(r[m])} for m in ("rmse", "mape") for r in errors],
        )
        if errors:
            have_data = True
            lines += _table(
                "[canada] Forecast error summaries over p = 1..12",
                ["method", "mean RMSE", "SD RMSE", "mean MAPE", "SD MAPE"],
                [[r["method"], _num(r["mean_rmse"], 3), _num(r["sd_rmse"], 3), _num(r["mean_mape"], 3), _num(r["sd_mape"], 3)] for r in summ],
            )
            lines += _table(
                "[canada] VAR(11) hold-out accuracy",
                ["method", "RMSE", "MAPE (%)"],
                [[r["method"], _num(r["rmse"], 3), _num(r["mape"], 3)] for r in case],
            )
    if not have_data:
        lines.append("no data")
    report = out / "report.txt"
    report.write_text("\n".join(lines).rstrip() + "\n")
    written["report"] = report
    return written
