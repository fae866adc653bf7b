"""Rank-normalised split-R-hat and bulk effective sample size.

Both functions take draws shaped ``(chain, draw)`` or
``(chain, draw, parameter)`` and return one value per parameter.
"""

from __future__ import annotations

import numpy as np
from scipy import stats


def _as_3d(draws) -> np.ndarray:
    x = np.asarray(draws, dtype=float)
    if x.ndim == 1:
        x = x[None, :, None]
    elif x.ndim == 2:
        x = x[:, :, None]
    if x.ndim != 3:
        raise ValueError("draws must be (chain, draw[, parameter])")
    return x


def _split_chains(x: np.ndarray) -> np.ndarray:
    n = x.shape[1]
    half = n // 2
    if half < 1:
        return x
    # odd lengths drop the middle draw
    return np.concatenate([x[:, :half], x[:, n - half :]], axis=0)


def _rank_normalize(x: np.ndarray) -> np.ndarray:
    m, n, k = x.shape
    flat = x.reshape(m * n, k)
    ranks = stats.rankdata(flat, method="average", axis=0)
    z = stats.norm.ppf((ranks - 0.375) / (m * n + 0.25))
    return z.reshape(m, n, k)


def _constant(x: np.ndarray) -> np.ndarray:
    flat = x.reshape(-1, x.shape[2])
    return np.all(flat == flat[:1], axis=0)


def _rhat_raw(x: np.ndarray) -> np.ndarray:
    m, n, _ = x.shape
    chain_mean = x.mean(axis=1)
    chain_var = x.var(axis=1, ddof=1)
    between = n * chain_mean.var(axis=0, ddof=1)
    within = chain_var.mean(axis=0)
    var_plus = (n - 1) / n * within + between / n
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.sqrt(var_plus / within)


def split_rhat(draws) -> np.ndarray:
    """Split-R-hat on rank-normalised draws, max of bulk and folded versions.

    Parameters with constant draws get 1.0 by convention.
    """
    x = _as_3d(draws)
    if x.shape[1] < 4:
        raise ValueError("need at least 4 draws per chain for split-R-hat")
    xs = _split_chains(x)
    const = _constant(xs)
    bulk = _rhat_raw(_rank_normalize(xs))
    folded = np.abs(xs - np.median(xs.reshape(-1, xs.shape[2]), axis=0))
    tail = _rhat_raw(_rank_normalize(folded))
    out = np.fmax(bulk, tail)
    out[const] = 1.0
    return out


def _autocov(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance along axis 1 via FFT."""
    n = x.shape[1]
    xc = x - x.mean(axis=1, keepdims=True)
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, n=size, axis=1)
    acov = np.fft.irfft(f * np.conj(f), n=size, axis=1)[:, :n]
    return acov / n


def _ess_raw(x: np.ndarray) -> np.ndarray:
    m, n, k = x.shape
    acov = _autocov(x)
    chain_var = acov[:, 0, :] * n / (n - 1)
    within = chain_var.mean(axis=0)
    var_plus = within * (n - 1) / n
    if m > 1:
        var_plus = var_plus + x.mean(axis=1).var(axis=0, ddof=1)
    out = np.empty(k)
    for j in range(k):
        if var_plus[j] <= 0:
            out[j] = m * n
            continue
        rho = 1.0 - (within[j] - acov[:, :, j].mean(axis=0)) / var_plus[j]
        rho[0] = 1.0
        # Geyer initial positive and monotone sequence
        tau = -1.0
        prev = np.inf
        t = 0
        while t + 1 < n:
            pair = rho[t] + rho[t + 1]
            if pair < 0:
                break
            pair = min(pair, prev)
            tau += 2.0 * pair
            prev = pair
            t += 2
        tau = max(tau, 1.0 / np.log10(m * n)) if m * n > 1 else max(tau, 1e-12)
        out[j] = m * n / tau
    return out


def bulk_ess(draws) -> np.ndarray:
    """Bulk ESS of rank-normalised split chains.

    Constant parameters report the total draw count.
    """
    x = _as_3d(draws)
    if x.shape[1] < 4:
        raise ValueError("need at least 4 draws per chain for ESS")
    xs = _split_chains(x)
    const = _constant(xs)
    out = _ess_raw(_rank_normalize(xs))
    out[const] = x.shape[0] * x.shape[1]
    return out
