"""Sparse stationary VAR data-generating process and the three scenario presets."""

from __future__ import annotations

import csv
import zlib
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .var_core import build_design, pad_lags, spectral_radius

STABILITY_MARGIN = 1.1
COEF_BOUND = 0.4


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    d: int
    p_star: int
    p_fit: int
    sparsity: float
    sigma_eps2: float
    T_train: int = 180
    H: int = 20
    burn_in: int = 50
    n_rep: int = 50
    base_seed: int = 2024

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not (self.p_fit >= self.p_star >= 1):
            raise ValueError(f"need p_fit >= p_star >= 1, got p_fit={self.p_fit}, p_star={self.p_star}")
        if not 0.0 <= self.sparsity <= 1.0:
            raise ValueError(f"sparsity must lie in [0, 1], got {self.sparsity}")
        if self.sigma_eps2 <= 0:
            raise ValueError("sigma_eps2 must be positive")
        if self.T_train <= self.p_fit or self.H < 1 or self.burn_in < 0 or self.n_rep < 1:
            raise ValueError("invalid sample sizes")

    def with_overrides(self, **kw) -> "ScenarioConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


SCENARIOS = {
    "1": ScenarioConfig("scenario1", d=3, p_star=1, p_fit=4, sparsity=0.70, sigma_eps2=0.05),
    "2": ScenarioConfig("scenario2", d=20, p_star=1, p_fit=1, sparsity=0.70, sigma_eps2=0.10),
    "3": ScenarioConfig("scenario3", d=20, p_star=1, p_fit=4, sparsity=0.70, sigma_eps2=0.10),
}


def scenario(key) -> ScenarioConfig:
    key = str(key).removeprefix("scenario")
    try:
        return SCENARIOS[key]
    except KeyError:
        raise ValueError(f"unknown scenario {key!r}; choose from {sorted(SCENARIOS)}") from None


@dataclass(frozen=True)
class Replication:
    train: np.ndarray
    test: np.ndarray
    B_true_padded: np.ndarray
    A1: np.ndarray
    seed: int
    rep_index: int

    @property
    def beta_true(self) -> np.ndarray:
        return self.B_true_padded.ravel(order="F")

    def train_design(self, p: int | None = None):
        return build_design(self.train, p or self.B_true_padded.shape[1] // self.B_true_padded.shape[0])


def replication_seed(config: ScenarioConfig, rep_index: int) -> int:
    """64-bit seed for one replication.

    Derived with ``SeedSequence(base_seed, spawn_key=(crc32(name), rep_index))``
    so that scenarios sharing a base seed still get independent streams.
    """
    ss = np.random.SeedSequence(
        config.base_seed, spawn_key=(zlib.crc32(config.name.encode()), int(rep_index))
    )
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


def draw_coefficients(rng: np.random.Generator, d: int, sparsity: float) -> np.ndarray:
    if not 0.0 <= sparsity <= 1.0:
        raise ValueError(f"sparsity must lie in [0, 1], got {sparsity}")
    values = rng.uniform(-COEF_BOUND, COEF_BOUND, size=(d, d))
    zero = rng.random((d, d)) < sparsity
    values[zero] = 0.0
    return values


def rescale_stationary(A1) -> np.ndarray:
    """Divide by ``1.1 * rho_max`` so the spectral radius becomes 1/1.1.

    A matrix with radius below 1e-12 (all-zero or nilpotent) is returned as is.
    """
    A1 = np.asarray(A1, dtype=float)
    rho = spectral_radius(A1)
    if rho < 1e-12:
        return A1.copy()
    return A1 / (STABILITY_MARGIN * rho)


def simulate_replication(config: ScenarioConfig, rep_index: int) -> Replication:
    seed = replication_seed(config, rep_index)
    rng = np.random.default_rng(seed)
    d = config.d
    A1 = rescale_stationary(draw_coefficients(rng, d, config.sparsity))

    n_total = config.burn_in + config.T_train + config.H
    eps = rng.normal(scale=np.sqrt(config.sigma_eps2), size=(n_total, d))
    y = np.zeros((n_total, d))
    prev = np.zeros(d)
    for t in range(n_total):
        prev = A1 @ prev + eps[t]
        y[t] = prev
    kept = y[config.burn_in :]
    return Replication(
        train=kept[: config.T_train].copy(),
        test=kept[config.T_train :].copy(),
        B_true_padded=pad_lags(A1, config.p_fit),
        A1=A1,
        seed=seed,
        rep_index=int(rep_index),
    )


def export_replication(rep: Replication, directory, prefix: str = "rep") -> list[Path]:
    """Write train/test rows and the padded true coefficients as CSV files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    d = rep.train.shape[1]
    header = [f"y{i + 1}" for i in range(d)]
    stem = f"{prefix}{rep.rep_index:03d}"
    paths = []
    for suffix, rows in (("train", rep.train), ("test", rep.test), ("coef", rep.B_true_padded)):
        path = directory / f"{stem}_{suffix}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header if suffix != "coef" else [f"b{j + 1}" for j in range(rows.shape[1])])
            w.writerows([[repr(float(v)) for v in row] for row in rows])
        paths.append(path)
    return paths
