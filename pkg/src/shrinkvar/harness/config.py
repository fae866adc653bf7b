from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from ..bayes_sampler import MCMCSettings
from ..results import METHODS

WORKERS_ENV = "SHRINKVAR_WORKERS"

PROFILES = {
    "desk": {"n_rep": 10, "chains": 2, "iters": 1000, "warmup": 250},
    "paper": {"n_rep": 50, "chains": 4, "iters": 2000, "warmup": 500},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Settings for one batch run.

    Defaults are the full study settings; ``profile="desk"`` swaps in the
    reduced replication count and MCMC length.
    """

    target: str = "1"
    n_rep: int | None = None
    d: int | None = None
    chains: int = 4
    iters: int = 2000
    warmup: int = 500
    thin: int = 1
    n_boot: int = 30
    block_len: int = 4
    ridge_lambda: float = 0.1
    ridge_scaling: str = "glmnet"
    methods: tuple[str, ...] = METHODS
    base_seed: int = 123
    out: str = "results"
    workers: int = 1

    def __post_init__(self):
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {list(METHODS)}")
        if not self.methods:
            raise ConfigError("at least one method is required")
        if self.n_boot < 2 or self.block_len < 1 or self.workers < 1:
            raise ConfigError("n_boot >= 2, block_len >= 1 and workers >= 1 are required")
        if not 0 <= self.warmup < self.iters:
            raise ConfigError("need 0 <= warmup < iters")

    def mcmc(self, seed: int) -> MCMCSettings:
        return MCMCSettings(n_chains=self.chains, n_iter=self.iters, n_warmup=self.warmup, thin=self.thin, seed=seed)

    def to_json(self) -> str:
        d = asdict(self)
        d["methods"] = list(self.methods)
        return json.dumps(d, indent=2, sort_keys=True)


def _coerce(name: str, value):
    ftype = {f.name: f.type for f in fields(RunConfig)}[name]
    if name == "methods":
        if isinstance(value, str):
            value = [v.strip() for v in value.split(",") if v.strip()]
        return tuple(value)
    if "int" in str(ftype) and value is not None:
        return int(value)
    if "float" in str(ftype) and value is not None:
        return float(value)
    return str(value) if value is not None else None


def load_config_file(path) -> dict:
    """Read a flat JSON object of RunConfig keys."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict) or any(isinstance(v, dict) for v in data.values()):
        raise ConfigError("config file must be a flat JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known - {"profile"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def build_config(profile: str | None = None, file_values: dict | None = None, **flags) -> RunConfig:
    """Merge profile < config file < command-line flags (``None`` flags are ignored)."""
    values: dict = {}
    file_values = dict(file_values or {})
    profile = flags.pop("profile", None) or profile or file_values.pop("profile", None)
    file_values.pop("profile", None)
    if profile is not None:
        if profile not in PROFILES:
            raise ConfigError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
        values.update(PROFILES[profile])
    values.update(file_values)
    values.update({k: v for k, v in flags.items() if v is not None})
    if "workers" not in values and os.environ.get(WORKERS_ENV):
        values["workers"] = os.environ[WORKERS_ENV]
    try:
        return RunConfig(**{k: _coerce(k, v) for k, v in values.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    return replace(cfg, **kw)
