#!/usr/bin/env python3
"""
Recovery service: dispatches observations to the chosen solver
"""

from typing import Any, Dict, Optional

import numpy as np

from ..core import em, least_squares, spectral
from ..core.cyclic import align_estimate, relative_error
from ..core.moments import sample_moments
from ..models.options import EmOptions, LsOptions, SpectralOptions, build_options
from ..models.results import ObservationSet, RecoveryResult
from ..utils.config_manager import ConfigManager, get_config
from ..utils.errors import ConfigError, SolverError
from ..utils.logger import log

METHODS = ("spectral", "em", "uniform_em", "ls")


class RecoveryService:
    """Service class for running the recovery algorithms"""

    @staticmethod
    def recover(obs: ObservationSet, method: str, rng: np.random.Generator,
                config: Optional[ConfigManager] = None, threads: Optional[int] = None,
                **overrides: Any) -> RecoveryResult:
        """
        Run one solver with options taken from the config section plus overrides

        ``threads`` drives the one-pass moment estimate and the LS restarts;
        an explicit ``n_jobs`` override still wins for LS.
        """
        config = config or get_config()
        threads = max(1, threads or int(config.get("run_settings.threads", 1)))
        log(f"🧭 Recovering with {method} (L={obs.L}, N={obs.N}, sigma={obs.sigma})", "progress")

        try:
            if method == "spectral":
                opts = build_options(SpectralOptions, config, "spectral_settings", **overrides)
                return spectral.recover(obs, opts, rng, threads)
            if method in ("em", "uniform_em"):
                variant = "modified" if method == "em" else "uniform"
                opts = build_options(EmOptions, config, "em_settings", variant=variant, **overrides)
                return em.run_em(obs, opts, rng)
            if method == "ls":
                opts = build_options(LsOptions, config, "ls_settings", **{"n_jobs": threads, **overrides})
                moments = sample_moments(obs, int(config.get("moment_settings.block_rows", 4096)), threads)
                return least_squares.run_ls(moments, opts, rng, sigma=obs.sigma)
        except SolverError as e:
            log(f"❌ {method} failed: {e}", "error")
            raise
        raise ConfigError(f"Unknown method {method!r}; choose one of {', '.join(METHODS)}")

    @staticmethod
    def evaluate(result: RecoveryResult, x: np.ndarray, rho: np.ndarray) -> Dict[str, float]:
        """Relative error of x_hat and max error of the jointly aligned rho_hat"""
        _, rho_aligned = align_estimate(result.x_hat, result.rho_hat, x)
        return {
            "relative_error": relative_error(result.x_hat, x),
            "rho_max_error": float(np.max(np.abs(rho_aligned - rho))),
        }
