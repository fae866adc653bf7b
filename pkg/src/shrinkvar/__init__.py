"""Shrinkage estimators for high-dimensional VAR(p) models and a reproducible simulation study."""

from .bayes_sampler import HORSESHOE, LASSO, NORMAL, MCMCSettings, PriorKind, fit_bayes, sample_posterior, summarize
from .bootstrap import block_resample, bootstrap_se, normal_interval
from .forecasting import difference, invert_difference, sequential_forecast
from .freq_estimators import ns_fit, ridge_fit
from .results import METHODS, FitResult
from .simulation import SCENARIOS, ScenarioConfig, scenario, simulate_replication
from .var_core import LaggedDesign, VarSpec, build_design, companion_matrix, predict_one_step, spectral_radius

__version__ = "0.1.0"
