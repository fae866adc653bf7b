"""Gibbs samplers for Bayesian VAR(p) with normal, horseshoe and lasso priors.

All three models share the Gaussian likelihood with a full error covariance
``Sigma`` (inverse-Wishart(d + 2, I) prior) and differ only in the prior
variance assigned to each coefficient:

* Normal: ``beta_j ~ N(0, scale^2)``.
* Horseshoe: ``beta_j ~ N(0, lambda_j^2 tau^2)`` with half-Cauchy(0, 1)
  ``lambda_j`` and ``tau``, each written as an inverse-gamma mixture with an
  auxiliary variable so every conditional is closed form.
* Lasso: ``beta_j | eta ~ Laplace(0, eta)`` as a normal / exponential
  mixture; the mixing variances have inverse-Gaussian conditionals.  ``eta``
  is either fixed or half-Cauchy(0, 1), again via an inverse-gamma mixture.

One Gibbs sweep updates ``beta | scales, Sigma``, then ``Sigma | beta``,
then the scale hierarchy.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg, stats

from .diagnostics import bulk_ess, split_rhat
from .results import FitResult
from .var_core import LaggedDesign, flat_to_coef

log = logging.getLogger(__name__)

_VAR_FLOOR = 1e-12
_VAR_CEIL = 1e12
_LOG_2PI = math.log(2.0 * math.pi)


class SamplerError(RuntimeError):
    pass


@dataclass(frozen=True)
class PriorKind:
    """Coefficient prior.

    ``variant`` is one of ``"Normal"``, ``"Horseshoe"``, ``"Lasso"``.
    ``scale`` is the Normal prior SD; ``eta`` fixes the Laplace scale (``None``
    puts a half-Cauchy(0, 1) prior on it).
    """

    variant: str
    scale: float = 1.0
    eta: float | None = None

    def __post_init__(self):
        if self.variant not in ("Normal", "Horseshoe", "Lasso"):
            raise ValueError(f"unknown prior variant {self.variant!r}")
        if self.scale <= 0 or (self.eta is not None and self.eta <= 0):
            raise ValueError("prior scales must be positive")


NORMAL = PriorKind("Normal")
HORSESHOE = PriorKind("Horseshoe")
LASSO = PriorKind("Lasso")


@dataclass(frozen=True)
class MCMCSettings:
    n_chains: int = 4
    n_iter: int = 2000
    n_warmup: int = 500
    thin: int = 1
    seed: int = 123
    fixed_sigma2: float | None = None
    keep_local_scales: bool = False

    def __post_init__(self):
        if self.n_chains < 1 or self.thin < 1:
            raise ValueError("n_chains and thin must be >= 1")
        if not 0 <= self.n_warmup < self.n_iter:
            raise ValueError("need 0 <= n_warmup < n_iter")

    @property
    def n_keep(self) -> int:
        return len(range(self.n_warmup, self.n_iter, self.thin))


@dataclass
class ChainState:
    """Current values of one chain.

    ``local`` holds ``lambda_j^2`` (Horseshoe) or the mixing variances
    ``s_j`` (Lasso); ``glob`` holds ``tau^2`` or ``eta^2``.  ``local_aux`` and
    ``glob_aux`` are the inverse-gamma auxiliaries of the half-Cauchy
    mixtures.
    """

    beta: np.ndarray
    Sigma: np.ndarray
    local: np.ndarray | None = None
    glob: float | None = None
    local_aux: np.ndarray | None = None
    glob_aux: float | None = None

    @classmethod
    def initial(cls, n_coef: int, d: int, prior: PriorKind) -> "ChainState":
        state = cls(beta=np.zeros(n_coef), Sigma=np.eye(d))
        if prior.variant == "Horseshoe":
            state.local = np.ones(n_coef)
            state.local_aux = np.ones(n_coef)
            state.glob = 1.0
            state.glob_aux = 1.0
        elif prior.variant == "Lasso":
            state.local = np.ones(n_coef)
            state.glob = 1.0 if prior.eta is None else prior.eta**2
            state.glob_aux = 1.0 if prior.eta is None else None
        return state

    def prior_variance(self, prior: PriorKind) -> np.ndarray:
        if prior.variant == "Normal":
            v = np.full(self.beta.shape, prior.scale**2)
        elif prior.variant == "Horseshoe":
            v = self.local * self.glob
        else:
            v = self.local.copy()
        return np.clip(v, _VAR_FLOOR, _VAR_CEIL)


@dataclass
class PosteriorDraws:
    """Retained draws, shaped ``(chain, iteration, parameter)``.

    Parameters are ordered: coefficients in flat order, then the lower
    triangle of ``Sigma`` row by row, then the global scale (``tau`` or
    ``eta``) when the prior has one, then local scales if requested.
    """

    draws: np.ndarray
    names: list[str]
    d: int
    p: int
    n_iter: int
    n_warmup: int
    thin: int = 1
    info: dict = field(default_factory=dict)

    @property
    def n_chains(self) -> int:
        return self.draws.shape[0]

    @property
    def n_coef(self) -> int:
        return self.d * self.d * self.p

    def column(self, name: str) -> np.ndarray:
        return self.draws[:, :, self.names.index(name)]

    @property
    def beta(self) -> np.ndarray:
        return self.draws[:, :, : self.n_coef]

    def sigma_draws(self) -> np.ndarray:
        """Full ``Sigma`` matrices, shaped ``(chain, iteration, d, d)``."""
        rows, cols = np.tril_indices(self.d)
        flat = self.draws[:, :, self.n_coef : self.n_coef + rows.size]
        out = np.zeros(flat.shape[:2] + (self.d, self.d))
        out[..., rows, cols] = flat
        out[..., cols, rows] = flat
        return out

    def to_csv(self, directory, prefix: str = "chain") -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for c in range(self.n_chains):
            path = directory / f"{prefix}{c + 1}.csv"
            with path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(self.names)
                w.writerows([[repr(float(v)) for v in row] for row in self.draws[c]])
            paths.append(path)
        return paths


@dataclass(frozen=True)
class PosteriorSummary:
    mean: np.ndarray
    q025: np.ndarray
    q975: np.ndarray
    rhat: np.ndarray
    ess: np.ndarray
    names: list[str]


def parameter_names(d: int, p: int, prior: PriorKind, keep_local: bool = False) -> list[str]:
    n_coef = d * d * p
    names = [f"beta[{j}]" for j in range(n_coef)]
    names += [f"Sigma[{i},{j}]" for i, j in zip(*np.tril_indices(d))]
    if prior.variant == "Horseshoe":
        names.append("tau")
    elif prior.variant == "Lasso" and prior.eta is None:
        names.append("eta")
    if keep_local and prior.variant == "Horseshoe":
        names += [f"lambda[{j}]" for j in range(n_coef)]
    return names


# ---------------------------------------------------------------- densities


def _log_half_cauchy(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(math.log(2.0 / math.pi) - np.log1p(x * x)))


def _log_normal(x, var) -> float:
    x = np.asarray(x, dtype=float)
    var = np.broadcast_to(np.asarray(var, dtype=float), x.shape)
    return float(-0.5 * np.sum(_LOG_2PI + np.log(var) + x * x / var))


def inv_wishart_logpdf(Sigma: np.ndarray, df: float, scale: np.ndarray) -> float:
    return float(stats.invwishart.logpdf(Sigma, df=df, scale=scale)) if Sigma.shape[0] > 1 else float(
        stats.invgamma.logpdf(Sigma[0, 0], a=df / 2.0, scale=scale[0, 0] / 2.0)
    )


def sigma_prior(d: int) -> tuple[float, np.ndarray]:
    return d + 2.0, np.eye(d)


def log_likelihood(beta, Sigma, design: LaggedDesign) -> float:
    n = design.n_obs
    if n == 0:
        return 0.0
    d = design.spec.d
    try:
        L = linalg.cholesky(Sigma, lower=True)
    except linalg.LinAlgError as exc:
        raise ValueError("Sigma is not positive definite") from exc
    R = design.Y - design.X @ flat_to_coef(beta, d).T
    Z = linalg.solve_triangular(L, R.T, lower=True)
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    return float(-0.5 * (n * d * _LOG_2PI + n * logdet + np.sum(Z * Z)))


def log_prior(state: ChainState, prior: PriorKind) -> float:
    beta = state.beta
    if prior.variant == "Normal":
        lp = _log_normal(beta, prior.scale**2)
    elif prior.variant == "Horseshoe":
        lp = _log_normal(beta, state.local * state.glob)
        lp += _log_half_cauchy(np.sqrt(state.local)) + _log_half_cauchy(math.sqrt(state.glob))
    else:
        eta = prior.eta if prior.eta is not None else math.sqrt(state.glob)
        lp = float(np.sum(-math.log(2.0 * eta) - np.abs(beta) / eta))
        if prior.eta is None:
            lp += _log_half_cauchy(eta)
    return lp


def log_posterior(state: ChainState, design: LaggedDesign, prior: PriorKind) -> float:
    """Unnormalised log joint density of coefficients, scales and ``Sigma``.

    Scale densities are on ``lambda_j``, ``tau`` and ``eta`` (not their
    squares).  Lasso mixing variances are integrated out.
    """
    Sigma = np.asarray(state.Sigma, dtype=float)
    if not np.allclose(Sigma, Sigma.T) or np.any(np.linalg.eigvalsh(Sigma) <= 0):
        raise ValueError("Sigma must be symmetric positive definite")
    df, scale = sigma_prior(Sigma.shape[0])
    return log_likelihood(state.beta, Sigma, design) + log_prior(state, prior) + inv_wishart_logpdf(Sigma, df, scale)


# ---------------------------------------------------------------- kernel


def _inv_gamma(rng, shape, rate):
    return rate / rng.gamma(shape, size=np.shape(rate)) if np.ndim(rate) else rate / rng.gamma(shape)


class _GibbsKernel:
    def __init__(self, design: LaggedDesign, prior: PriorKind, settings: MCMCSettings):
        self.prior = prior
        self.settings = settings
        self.d = design.spec.d
        self.n = design.n_obs
        self.X, self.Y = design.X, design.Y
        self.XtX = design.X.T @ design.X
        self.YtX = design.Y.T @ design.X
        self.n_coef = design.spec.n_coef
        self.df0, self.S0 = sigma_prior(self.d)
        if settings.fixed_sigma2 is not None:
            self.fixed_Sigma = settings.fixed_sigma2 * np.eye(self.d)
        else:
            self.fixed_Sigma = None

    def update_beta(self, rng, state: ChainState):
        prior_prec = 1.0 / state.prior_variance(self.prior)
        if self.n == 0:
            state.beta = rng.standard_normal(self.n_coef) / np.sqrt(prior_prec)
            return
        Sinv = linalg.cho_solve(linalg.cho_factor(state.Sigma, lower=True), np.eye(self.d))
        P = np.kron(self.XtX, Sinv)
        P[np.diag_indices_from(P)] += prior_prec
        b = (Sinv @ self.YtX).ravel(order="F")
        L = linalg.cholesky(P, lower=True, check_finite=False)
        mean = linalg.cho_solve((L, True), b, check_finite=False)
        z = rng.standard_normal(self.n_coef)
        state.beta = mean + linalg.solve_triangular(L.T, z, lower=False, check_finite=False)

    def update_sigma(self, rng, state: ChainState):
        if self.fixed_Sigma is not None:
            state.Sigma = self.fixed_Sigma
            return
        if self.n == 0:
            E2 = np.zeros((self.d, self.d))
        else:
            R = self.Y - self.X @ flat_to_coef(state.beta, self.d).T
            E2 = R.T @ R
        scale = self.S0 + E2
        df = self.df0 + self.n
        if self.d == 1:
            S = np.array([[_inv_gamma(rng, df / 2.0, scale[0, 0] / 2.0)]])
        else:
            S = np.atleast_2d(stats.invwishart.rvs(df=df, scale=scale, random_state=rng))
        state.Sigma = 0.5 * (S + S.T)

    def update_scales(self, rng, state: ChainState):
        b2 = state.beta**2
        if self.prior.variant == "Horseshoe":
            state.local = _inv_gamma(rng, 1.0, 1.0 / state.local_aux + b2 / (2.0 * state.glob))
            state.local_aux = _inv_gamma(rng, 1.0, 1.0 + 1.0 / state.local)
            state.glob = _inv_gamma(
                rng, (self.n_coef + 1) / 2.0, 1.0 / state.glob_aux + np.sum(b2 / state.local) / 2.0
            )
            state.glob_aux = _inv_gamma(rng, 1.0, 1.0 + 1.0 / state.glob)
        elif self.prior.variant == "Lasso":
            eta2 = state.glob
            absb = np.maximum(np.abs(state.beta), 1e-300)
            inv_s = rng.wald(1.0 / (math.sqrt(eta2) * absb), 1.0 / eta2)
            state.local = 1.0 / np.maximum(inv_s, 1e-300)
            if self.prior.eta is None:
                state.glob = _inv_gamma(rng, self.n_coef + 0.5, np.sum(state.local) / 2.0 + 1.0 / state.glob_aux)
                state.glob_aux = _inv_gamma(rng, 1.0, 1.0 + 1.0 / state.glob)

    def sweep(self, rng, state: ChainState):
        self.update_beta(rng, state)
        self.update_sigma(rng, state)
        self.update_scales(rng, state)

    def record(self, state: ChainState, out: np.ndarray):
        k = self.n_coef
        out[:k] = state.beta
        tri = state.Sigma[np.tril_indices(self.d)]
        out[k : k + tri.size] = tri
        pos = k + tri.size
        if self.prior.variant == "Horseshoe":
            out[pos] = math.sqrt(state.glob)
            pos += 1
            if self.settings.keep_local_scales:
                out[pos : pos + k] = np.sqrt(state.local)
        elif self.prior.variant == "Lasso" and self.prior.eta is None:
            out[pos] = math.sqrt(state.glob)


def _run_chain(kernel: _GibbsKernel, seed_seq, n_params: int) -> np.ndarray:
    s = kernel.settings
    rng = np.random.default_rng(seed_seq)
    state = ChainState.initial(kernel.n_coef, kernel.d, kernel.prior)
    if kernel.fixed_Sigma is not None:
        state.Sigma = kernel.fixed_Sigma
    out = np.empty((s.n_keep, n_params))
    row = 0
    for it in range(s.n_iter):
        kernel.sweep(rng, state)
        if not np.all(np.isfinite(state.beta)):
            raise FloatingPointError(f"non-finite coefficients at iteration {it}")
        if it >= s.n_warmup and (it - s.n_warmup) % s.thin == 0:
            kernel.record(state, out[row])
            row += 1
    return out


def sample_posterior(
    design: LaggedDesign, prior: PriorKind, settings: MCMCSettings = MCMCSettings()
) -> PosteriorDraws:
    """Run ``settings.n_chains`` independent Gibbs chains.

    Chain ``c`` is seeded with child ``c`` of ``SeedSequence(settings.seed)``.
    Warmup iterations are discarded; every ``thin``-th later draw is kept.
    """
    kernel = _GibbsKernel(design, prior, settings)
    names = parameter_names(design.spec.d, design.spec.p, prior, settings.keep_local_scales)
    children = np.random.SeedSequence(settings.seed).spawn(settings.n_chains)
    chains, failures = [], []
    for c, child in enumerate(children):
        try:
            chains.append(_run_chain(kernel, child, len(names)))
        except (FloatingPointError, linalg.LinAlgError, ValueError) as exc:
            log.warning("chain %d failed: %s", c, exc)
            failures.append(f"chain {c}: {exc}")
    if not chains:
        raise SamplerError("all chains failed: " + "; ".join(failures))
    return PosteriorDraws(
        draws=np.stack(chains),
        names=names,
        d=design.spec.d,
        p=design.spec.p,
        n_iter=settings.n_iter,
        n_warmup=settings.n_warmup,
        thin=settings.thin,
        info={"prior": prior.variant, "failed_chains": failures},
    )


def summarize(draws: PosteriorDraws) -> PosteriorSummary:
    """Pooled mean and 2.5/97.5% quantiles plus split-R-hat and bulk ESS.

    Quantiles use linear interpolation between order statistics.
    """
    x = draws.draws
    if x.shape[0] * x.shape[1] < 2:
        raise ValueError("need at least 2 retained draws")
    flat = x.reshape(-1, x.shape[2])
    q = np.quantile(flat, [0.025, 0.975], axis=0, method="linear")
    if x.shape[1] >= 4:
        rhat, ess = split_rhat(x), bulk_ess(x)
    else:
        rhat = ess = np.full(x.shape[2], np.nan)
    return PosteriorSummary(mean=flat.mean(axis=0), q025=q[0], q975=q[1], rhat=rhat, ess=ess, names=list(draws.names))


def fit_bayes(design: LaggedDesign, prior: PriorKind, settings: MCMCSettings = MCMCSettings()) -> FitResult:
    draws = sample_posterior(design, prior, settings)
    summ = summarize(draws)
    k = draws.n_coef
    d = design.spec.d
    return FitResult(
        method=prior.variant,
        B_hat=flat_to_coef(summ.mean[:k], d),
        lower=summ.q025[:k].copy(),
        upper=summ.q975[:k].copy(),
        info={
            "max_rhat": float(np.nanmax(summ.rhat[:k])),
            "min_ess": float(np.nanmin(summ.ess[:k])),
            "failed_chains": len(draws.info["failed_chains"]),
        },
    )
