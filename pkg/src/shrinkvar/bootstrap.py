"""Non-overlapping block bootstrap of design rows and normal-approximation intervals."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .var_core import DimensionError, LaggedDesign

log = logging.getLogger(__name__)

Z_975 = 1.959964
BLOCK_LEN = 4
N_BOOT = 30


class BootstrapError(RuntimeError):
    pass


@dataclass(frozen=True)
class IntervalSet:
    lower: np.ndarray
    upper: np.ndarray
    se: np.ndarray
    level: float = 0.95


def block_starts(n_rows: int, block_len: int) -> np.ndarray:
    return np.arange(0, n_rows, block_len)


def block_indices(n_rows: int, block_len: int, rng: np.random.Generator) -> np.ndarray:
    """Row indices of one resample.

    Rows are cut into consecutive blocks of ``block_len`` (the last block may
    be short).  Blocks are drawn uniformly with replacement and concatenated
    until at least ``n_rows`` rows are collected, then cut to ``n_rows``.
    """
    if n_rows < 1:
        raise ValueError("cannot resample an empty design")
    if block_len < 1:
        raise ValueError("block_len must be >= 1")
    starts = block_starts(n_rows, block_len)
    pieces = []
    total = 0
    while total < n_rows:
        s = starts[rng.integers(len(starts))]
        block = np.arange(s, min(s + block_len, n_rows))
        pieces.append(block)
        total += len(block)
    return np.concatenate(pieces)[:n_rows]


def block_resample(design: LaggedDesign, block_len: int = BLOCK_LEN, rng=None) -> LaggedDesign:
    rng = np.random.default_rng(rng)
    if design.n_obs == 0:
        raise ValueError("cannot resample an empty design")
    return design.take(block_indices(design.n_obs, block_len, rng))


def bootstrap_se(
    fitter: Callable[[LaggedDesign], np.ndarray],
    design: LaggedDesign,
    n_boot: int = N_BOOT,
    block_len: int = BLOCK_LEN,
    rng=None,
) -> np.ndarray:
    """Per-coefficient bootstrap standard errors (sample SD, divisor ``n_boot - 1``).

    ``fitter`` maps a design to a flat coefficient vector.  Refit ``b`` draws
    its resample from child ``b`` of the caller's seed sequence; a failing
    refit is retried once with a fresh resample.
    """
    if n_boot < 2:
        raise ValueError("n_boot must be >= 2")
    rng = np.random.default_rng(rng)
    children = rng.bit_generator.seed_seq.spawn(n_boot)
    estimates = []
    for b, child in enumerate(children):
        child_rng = np.random.default_rng(child)
        for attempt in range(2):
            try:
                est = np.asarray(fitter(block_resample(design, block_len, child_rng)), dtype=float)
                if not np.all(np.isfinite(est)):
                    raise FloatingPointError("non-finite refit")
                break
            except (np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
                if attempt == 1:
                    raise BootstrapError(f"bootstrap refit {b} failed twice: {exc}") from exc
                log.warning("bootstrap refit %d failed (%s); retrying with a fresh resample", b, exc)
        estimates.append(est.ravel())
    return np.std(np.vstack(estimates), axis=0, ddof=1)


def normal_interval(point, se, level: float = 0.95) -> IntervalSet:
    point = np.asarray(point, dtype=float).ravel()
    se = np.asarray(se, dtype=float).ravel()
    if point.shape != se.shape:
        raise DimensionError(f"point has {point.size} entries but se has {se.size}")
    if np.any(se < 0):
        raise ValueError("standard errors must be nonnegative")
    if level == 0.95:
        z = Z_975
    else:
        from scipy.stats import norm

        z = float(norm.ppf(0.5 + level / 2))
    return IntervalSet(lower=point - z * se, upper=point + z * se, se=se, level=level)
