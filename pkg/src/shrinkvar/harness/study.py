"""Monte Carlo study loop: simulate, fit every method, score."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..bayes_sampler import PriorKind, SamplerError, fit_bayes
from ..bootstrap import BootstrapError, bootstrap_se, normal_interval
from ..forecasting import sequential_forecast
from ..freq_estimators import ns_fit, ridge_fit
from ..metrics import EvalRecord, evaluate, method_rank
from ..results import BAYES_METHODS, METHODS, FitResult
from ..simulation import ScenarioConfig, scenario, simulate_replication
from ..var_core import LaggedDesign, build_design
from .config import RunConfig

log = logging.getLogger(__name__)

MAX_FAILURE_SHARE = 0.10


class RunFailure(RuntimeError):
    pass


def method_seed(base: int, method: str) -> int:
    """Per-method seed so results do not depend on fit order."""
    ss = np.random.SeedSequence(int(base), spawn_key=(METHODS.index(method),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _freq_point(method: str, run: RunConfig):
    if method == "Ridge":
        return lambda des: ridge_fit(des, run.ridge_lambda, scaling=run.ridge_scaling).B_hat
    return lambda des: ns_fit(des).B_hat


def fit_method(method: str, design: LaggedDesign, run: RunConfig, seed: int, intervals: bool = True) -> FitResult:
    """Fit one method; intervals come from the block bootstrap or posterior quantiles."""
    if method in BAYES_METHODS:
        return fit_bayes(design, PriorKind(method), run.mcmc(seed))
    point = _freq_point(method, run)
    B_hat = point(design)
    res = FitResult(method=method, B_hat=B_hat)
    if intervals:
        se = bootstrap_se(
            lambda des: point(des).ravel(order="F"),
            design,
            n_boot=run.n_boot,
            block_len=run.block_len,
            rng=np.random.default_rng(seed),
        )
        iv = normal_interval(res.beta_hat, se)
        res.lower, res.upper = iv.lower, iv.upper
    return res


def scenario_config(run: RunConfig) -> ScenarioConfig:
    base = scenario(run.target)
    n_rep = run.n_rep if run.n_rep is not None else base.n_rep
    cfg = base.with_overrides(d=run.d, n_rep=n_rep, base_seed=run.base_seed)
    if run.d is not None and run.d != base.d:
        cfg = cfg.with_overrides(name=f"{base.name}_d{run.d}")
    return cfg


def run_replication(cfg: ScenarioConfig, run: RunConfig, rep_index: int) -> list[EvalRecord]:
    rep = simulate_replication(cfg, rep_index)
    design = build_design(rep.train, cfg.p_fit)
    records = []
    for method in run.methods:
        fit = fit_method(method, design, run, method_seed(rep.seed, method))
        fs = sequential_forecast(fit.B_hat, rep.train, rep.test, method=method)
        records.append(
            evaluate(cfg.name, rep_index, method, fit.beta_hat, fit.lower, fit.upper, rep.beta_true, fs)
        )
    return records


def _safe_replication(args):
    cfg, run, i = args
    try:
        return i, run_replication(cfg, run, i), None
    except (SamplerError, BootstrapError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        return i, [], f"{type(exc).__name__}: {exc}"


def sort_records(records) -> list[EvalRecord]:
    return sorted(records, key=lambda r: (r.scenario, r.replication, method_rank(r.method), r.method))


def run_scenario(run: RunConfig) -> tuple[ScenarioConfig, list[EvalRecord]]:
    """Run all replications of one scenario.

    Failed replications are logged with their index and skipped; more than
    10% failures abort the run.
    """
    cfg = scenario_config(run)
    jobs = [(cfg, run, i) for i in range(cfg.n_rep)]
    if run.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=run.workers) as pool:
            outcomes = list(pool.map(_safe_replication, jobs))
    else:
        outcomes = [_safe_replication(j) for j in jobs]
    records, failed = [], []
    for i, recs, err in outcomes:
        if err is not None:
            log.error("replication %d of %s failed: %s", i, cfg.name, err)
            failed.append(i)
        records.extend(recs)
    if len(failed) > MAX_FAILURE_SHARE * cfg.n_rep:
        raise RunFailure(f"{len(failed)} of {cfg.n_rep} replications failed: {failed}")
    return cfg, sort_records(records)
