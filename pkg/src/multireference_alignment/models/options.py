#!/usr/bin/env python3
"""
Option models for the generators, solvers and experiment harness
"""

from typing import Any, Dict, List, Literal, Optional, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..utils.config_manager import ConfigManager
from ..utils.errors import ConfigError

ModelT = TypeVar("ModelT", bound=BaseModel)

DistributionKind = Literal["uniform", "dirac", "wrapped_gaussian", "random_simplex", "periodic", "explicit"]
ExperimentKind = Literal[
    "slope_random",
    "slope_uniform",
    "em_compare",
    "method_compare",
    "spiked",
    "counterexample",
    "bounds_table",
]


def build_options(model: Type[ModelT], config: Optional[ConfigManager] = None,
                  section: Optional[str] = None, **overrides: Any) -> ModelT:
    """Build an option model from a config section plus keyword overrides, raising ConfigError"""
    values: Dict[str, Any] = {}
    if config is not None and section:
        values.update(config.section(section))
    values.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return model.model_validate(values)
    except ValidationError as e:
        raise ConfigError(f"Invalid {model.__name__}: {e}") from e


class GeneratorConfig(BaseModel):
    """Parameters of one synthetic data set"""

    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={
            "example": {"L": 20, "N": 1000, "sigma": 0.5, "seed": 7, "distribution_kind": "wrapped_gaussian", "spread": 3.0}
        },
    )

    L: int = Field(default=20, ge=2, description="Signal length")
    N: int = Field(default=1000, ge=1, description="Number of observations")
    sigma: float = Field(default=1.0, ge=0, description="Noise standard deviation")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Generator seed")
    distribution_kind: DistributionKind = "random_simplex"
    spread: float = Field(default=3.0, gt=0, description="Wrapped-Gaussian width s")
    period: Optional[int] = Field(default=None, ge=1, description="Period for the periodic kind")
    base: Optional[List[float]] = Field(default=None, description="Base block for the periodic kind")
    probs: Optional[List[float]] = Field(default=None, description="Probabilities for the explicit kind")
    signal: Literal["random_normal", "haar_like"] = "random_normal"
    signal_norm: Optional[float] = Field(default=None, gt=0, description="Rescale the signal to this norm")

    @model_validator(mode="after")
    def check_kind_parameters(self) -> "GeneratorConfig":
        if self.distribution_kind == "periodic":
            if self.period is None:
                raise ValueError("periodic distribution needs a period")
            if self.L % self.period:
                raise ValueError(f"period {self.period} does not divide L={self.L}")
            if self.base is not None and len(self.base) != self.period:
                raise ValueError("base block length must equal the period")
        if self.distribution_kind == "explicit":
            if self.probs is None or len(self.probs) != self.L:
                raise ValueError("explicit distribution needs L probabilities")
        if self.signal == "haar_like" and self.L != 20:
            raise ValueError("the haar_like preset has length 20")
        return self


class SpectralOptions(BaseModel):
    model_config = ConfigDict(extra="ignore")

    reshuffle: bool = Field(default=True, description="Reshuffle observations with a random distribution first")
    eig_selector: Literal["largest_eigenvalue", "most_isolated_eigenvalue"] = "largest_eigenvalue"
    ps_floor: float = Field(default=1e-8, gt=0, description="Relative floor on the power spectrum")
    project_rho: bool = Field(default=True, description="Project the distribution estimate onto the simplex")
    gap_tol: float = Field(default=1e-9, gt=0, description="Relative eigengap below which eigenvalues count as repeated")
    dc_tol: float = Field(default=1e-10, gt=0, description="Relative tolerance on Sum(m1)")


class EmOptions(BaseModel):
    model_config = ConfigDict(extra="ignore")

    max_iters: int = Field(default=500, ge=1)
    tol: float = Field(default=1e-8, gt=0, description="Stop when the parameter change falls below this")
    init: Literal["random_normal", "spectral_warm_start", "provided"] = "random_normal"
    variant: Literal["modified", "uniform"] = "modified"
    x0: Optional[List[float]] = None
    rho0: Optional[List[float]] = None
    weight_sigma: Optional[float] = Field(default=None, gt=0, description="Noise level used for the weights instead of the data sigma")

    @model_validator(mode="after")
    def check_provided_start(self) -> "EmOptions":
        if self.init == "provided" and self.x0 is None:
            raise ValueError("init='provided' needs x0")
        return self


class LsOptions(BaseModel):
    model_config = ConfigDict(extra="ignore", populate_by_name=True)

    lambda_: Union[Literal["auto"], float] = Field(default="auto", alias="lambda")
    max_iters: int = Field(default=2000, ge=1)
    restarts: int = Field(default=5, ge=1)
    tol: float = Field(default=1e-10, gt=0, description="Stop when a step lowers the objective by less than this fraction")
    ftol: float = Field(default=1e-24, gt=0, description="Stop once the objective is below this fraction of its value at x = 0")
    accelerate: bool = Field(default=True, description="Momentum steps with restart on any increase")
    initial_step: float = Field(default=1.0, gt=0)
    shrink: float = Field(default=0.5, gt=0, lt=1)
    grow: float = Field(default=2.0, ge=1)
    max_backtracks: int = Field(default=60, ge=1)
    n_jobs: int = Field(default=1, ge=1, description="Restarts run concurrently on this many threads")

    @model_validator(mode="after")
    def check_lambda(self) -> "LsOptions":
        if self.lambda_ != "auto" and not self.lambda_ > 0:
            raise ValueError("lambda must be positive")
        return self

    def resolve_lambda(self, L: int, sigma: float) -> float:
        """Explicit lambda, or the variance-balancing default 1/(L(1+3 sigma^2))"""
        if self.lambda_ == "auto":
            return 1.0 / (L * (1.0 + 3.0 * sigma ** 2))
        return float(self.lambda_)


# Desk-scale defaults per experiment kind; "paper_scale" entries replace them under --paper-scale
EXPERIMENT_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "em_compare": {
        "L": 25, "N": 2000, "sigmas": [1.0], "spreads": [3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0],
        "trials": 20, "methods": ["em", "uniform_em"],
    },
    "method_compare": {
        "L": 15, "N": 100_000, "sigma_min": 0.01, "sigma_max": 10.0, "points": 20,
        "trials": 10, "methods": ["spectral", "ls", "em"], "paper_scale": {"trials": 40},
    },
    "slope_random": {
        "L": 15, "N": 100_000, "sigma_min": 0.5, "sigma_max": 8.0, "points": 9,
        "trials": 60, "methods": ["em"], "paper_scale": {"trials": 300},
    },
    "slope_uniform": {
        "L": 15, "N": 100_000, "sigma_min": 0.5, "sigma_max": 8.0, "points": 9,
        "trials": 60, "methods": ["em"], "paper_scale": {"trials": 300},
    },
    "spiked": {
        "L": 400, "x_norm": 10.0, "sigma_min": 0.1, "sigma_max": 10.0, "points": 20,
        "reference_sigma": 5.5313, "extra_samples": 100, "trials": 20, "paper_scale": {"trials": 200},
    },
    "counterexample": {
        "L": 15, "periods": [5], "trials": 20,
    },
    "bounds_table": {
        "L": 15, "period": 5, "N": 1000, "sigmas": [1.0, 3.0, 10.0], "trials": 20, "methods": ["em"],
    },
}


class ExperimentConfig(BaseModel):
    """Experiment kind plus overrides of the per-kind defaults"""

    model_config = ConfigDict(extra="forbid")

    kind: ExperimentKind
    seed: int = Field(default=0, ge=0)
    threads: int = Field(default=1, ge=1)
    paper_scale: bool = False
    output: Optional[str] = None
    overrides: Dict[str, Any] = Field(default_factory=dict)

    def resolved(self) -> Dict[str, Any]:
        """Kind defaults, scaled up under paper_scale, then overridden; validated"""
        params = {key: value for key, value in EXPERIMENT_DEFAULTS[self.kind].items() if key != "paper_scale"}
        if self.paper_scale:
            params.update(EXPERIMENT_DEFAULTS[self.kind].get("paper_scale", {}))
        params.update(self.overrides)
        if int(params.get("trials", 1)) < 1:
            raise ConfigError("trials must be >= 1")
        for key in ("sigmas", "spreads", "periods", "methods"):
            if key in params and not params[key]:
                raise ConfigError(f"grid '{key}' must be nonempty")
        if "points" in params and int(params["points"]) < 1:
            raise ConfigError("grid 'points' must be >= 1")
        return params
