#!/usr/bin/env python3
"""
Experiment service: Monte Carlo sweeps producing ExperimentReport rows

Trial t at parameter point p uses child t of SeedSequence(seed, spawn_key=(p,)),
so a report depends only on (config, seed) and never on the thread count.
"""

import math
import time
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from ..core.bounds import aperiodic_rate_bound, first_distinguishing_order, orbit_bound, periodic_rate_bound
from ..core.cyclic import orbit_distance2, relative_error
from ..core.model import (
    periodic_distribution,
    random_signal,
    random_simplex,
    sample_observations,
    uniform_distribution,
    wrapped_gaussian_distribution,
)
from ..core.moments import periodic_counterexample, population_moments
from ..core.spiked import critical_sigma, flat_spectrum_signal, predicted_cosine2, sample_threshold, simulate_spiked_trial
from ..models.options import ExperimentConfig
from ..models.results import ExperimentReport
from ..utils.config_manager import ConfigManager, get_config
from ..utils.errors import MraError
from ..utils.helpers import geometric_grid, git_revision, linear_grid, make_rng, run_ordered, spawn_generators
from ..utils.logger import log
from .recovery_service import RecoveryService

# Spawn key reserved for quantities fixed across a whole run (signal, periodic rho)
FIXED_KEY = 2**31 - 1


def summarize(values: Sequence[float]) -> Dict[str, Any]:
    """Median, quartiles and mean over finite values; NaN entries count as failures"""
    array = np.asarray(values, dtype=float)
    finite = array[np.isfinite(array)]
    if finite.size == 0:
        return {"median": float("nan"), "q1": float("nan"), "q3": float("nan"), "mean": float("nan"),
                "trials": int(array.size), "failures": int(array.size)}
    q1, median, q3 = np.percentile(finite, [25, 50, 75])
    return {"median": float(median), "q1": float(q1), "q3": float(q3), "mean": float(finite.mean()),
            "trials": int(array.size), "failures": int(array.size - finite.size)}


def fit_slope(sigmas: Sequence[float], errors: Sequence[float]) -> Dict[str, float]:
    """OLS fit of log(error) against log(sigma)"""
    sigmas = np.asarray(sigmas, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = np.isfinite(errors) & (errors > 0)
    if keep.sum() < 2:
        return {"slope": float("nan"), "intercept": float("nan")}
    fit = stats.linregress(np.log(sigmas[keep]), np.log(errors[keep]))
    return {"slope": float(fit.slope), "intercept": float(fit.intercept)}


class ExperimentService:
    """Service class for running the experiment kinds"""

    def __init__(self, experiment: ExperimentConfig, config: Optional[ConfigManager] = None):
        self.experiment = experiment
        self.config = config or get_config()
        self.params = experiment.resolved()
        self.seed = experiment.seed
        self.threads = experiment.threads

    def _log(self, message: str, log_type: str = "experiment_trials"):
        log(message, log_type, self.config)

    def _trial_generators(self, point: int, trials: int) -> List[np.random.Generator]:
        return spawn_generators(np.random.SeedSequence(self.seed, spawn_key=(point,)), trials)

    def _fixed_rng(self) -> np.random.Generator:
        return make_rng(np.random.SeedSequence(self.seed, spawn_key=(FIXED_KEY,)))

    def _run_trials(self, point: int, trial: Callable[[np.random.Generator], Any]) -> List[Any]:
        trials = int(self.params["trials"])
        return run_ordered(trial, self._trial_generators(point, trials), self.threads)

    def _method_errors(self, x: np.ndarray, rho: np.ndarray, sigma: float, N: int,
                       methods: Sequence[str], rng: np.random.Generator) -> Dict[str, float]:
        """Relative error per method on one fresh data set; NaN marks a failed solve"""
        obs = sample_observations(x, rho, sigma, N, rng)
        errors = {}
        for method in methods:
            try:
                result = RecoveryService.recover(obs, method, rng, self.config, threads=1)
                errors[method] = relative_error(result.x_hat, x)
            except MraError as e:
                self._log(f"⚠️  {method} failed at sigma={sigma:.4g}: {e.detail}", "warning")
                errors[method] = float("nan")
        return errors

    def run(self) -> ExperimentReport:
        kind = self.experiment.kind
        self._log(f"🧪 Running experiment '{kind}' (seed={self.seed}, threads={self.threads})", "progress")
        started = time.perf_counter()
        rows = getattr(self, f"_run_{kind}")()
        wall_time = time.perf_counter() - started
        metadata = {
            "kind": kind,
            "seed": self.seed,
            "threads": self.threads,
            "paper_scale": self.experiment.paper_scale,
            "git_revision": git_revision(),
            "wall_time_seconds": wall_time,
            "parameters": self.params,
        }
        self._log(f"✅ Experiment '{kind}' finished in {wall_time:.1f}s with {len(rows)} rows", "summary")
        return ExperimentReport(kind=kind, rows=rows, metadata=metadata)

    def _sigma_grid(self) -> List[float]:
        if "sigmas" in self.params:
            return [float(s) for s in self.params["sigmas"]]
        low, high, points = self.params["sigma_min"], self.params["sigma_max"], int(self.params["points"])
        return geometric_grid(low, high, points)

    def _run_em_compare(self) -> List[Dict[str, Any]]:
        L, N = int(self.params["L"]), int(self.params["N"])
        methods = list(self.params["methods"])
        x = random_signal(L, self._fixed_rng())
        rows = []
        point = 0
        for sigma in self._sigma_grid():
            for spread in self.params["spreads"]:
                rho = wrapped_gaussian_distribution(L, float(spread))
                outcomes = self._run_trials(point, lambda g: self._method_errors(x, rho, sigma, N, methods, g))
                medians = []
                for method in methods:
                    summary = summarize([o[method] for o in outcomes])
                    rows.append({"L": L, "N": N, "sigma": sigma, "spread": float(spread), "method": method, **summary})
                    medians.append(f"{method} {summary['median']:.4g}")
                self._log(f"   spread={spread}: median errors " + ", ".join(medians))
                point += 1
        return rows

    def _run_method_compare(self) -> List[Dict[str, Any]]:
        L, N = int(self.params["L"]), int(self.params["N"])
        methods = list(self.params["methods"])
        rows = []
        for point, sigma in enumerate(self._sigma_grid()):
            def trial(g: np.random.Generator) -> Dict[str, float]:
                x = random_signal(L, g)
                rho = random_simplex(L, g)
                return self._method_errors(x, rho, sigma, N, methods, g)

            outcomes = self._run_trials(point, trial)
            for method in methods:
                rows.append({"L": L, "N": N, "sigma": sigma, "method": method,
                             **summarize([o[method] for o in outcomes])})
            self._log(f"   sigma={sigma:.4g} done")
        return rows

    def _run_slope(self, uniform: bool) -> List[Dict[str, Any]]:
        L, N = int(self.params["L"]), int(self.params["N"])
        methods = list(self.params["methods"])
        sigmas = self._sigma_grid()
        rows = []
        for point, sigma in enumerate(sigmas):
            def trial(g: np.random.Generator) -> Dict[str, float]:
                x = random_signal(L, g)
                rho = uniform_distribution(L) if uniform else random_simplex(L, g)
                return self._method_errors(x, rho, sigma, N, methods, g)

            outcomes = self._run_trials(point, trial)
            for method in methods:
                rows.append({"L": L, "N": N, "sigma": sigma, "method": method,
                             **summarize([o[method] for o in outcomes])})
            self._log(f"   sigma={sigma:.4g} done")

        half = max(2, len(sigmas) // 2)
        for method in methods:
            method_rows = [row for row in rows if row["method"] == method]
            medians = [row["median"] for row in method_rows]
            large = fit_slope(sigmas[-half:], medians[-half:])
            small = fit_slope(sigmas[:half], medians[:half])
            for row in method_rows:
                row.update({"slope_large_sigma": large["slope"], "intercept_large_sigma": large["intercept"],
                            "slope_small_sigma": small["slope"]})
            self._log(f"📈 {method}: large-sigma slope {large['slope']:.3f}, small-sigma slope {small['slope']:.3f}",
                      "summary")
        return rows

    def _run_slope_random(self) -> List[Dict[str, Any]]:
        return self._run_slope(uniform=False)

    def _run_slope_uniform(self) -> List[Dict[str, Any]]:
        return self._run_slope(uniform=True)

    def _run_spiked(self) -> List[Dict[str, Any]]:
        L = int(self.params["L"])
        x_norm = float(self.params["x_norm"])
        weights = np.zeros(L)
        weights[1:6] = np.arange(1, 6) ** 2
        rho = weights / weights.sum()
        x = flat_spectrum_signal(L, self._fixed_rng(), x_norm)
        reference_sigma = float(self.params["reference_sigma"])
        threshold = sample_threshold(L, reference_sigma, x_norm, float(rho.max()))
        N = int(self.params.get("N") or int(self.params["extra_samples"]) + math.ceil(threshold))
        sigma_star = critical_sigma(x_norm ** 2 * rho.max(), L / N)
        reference_cosine = predicted_cosine2(x_norm ** 2 * rho.max(), reference_sigma, L / N).cosine
        if reference_cosine > 0:
            self._log(f"⚠️  Reference sigma {reference_sigma:g} lies below the computed transition {sigma_star:.4f}; "
                      f"predicted cosine there is {reference_cosine:.3f}", "warning")
        sigmas = linear_grid(self.params["sigma_min"], self.params["sigma_max"], int(self.params["points"]))

        rows = []
        for point, sigma in enumerate(sigmas):
            trials = self._run_trials(point, lambda g: simulate_spiked_trial(x, rho, sigma, N, g))
            cosine = summarize([t.empirical_cosine for t in trials])
            mse = summarize([t.empirical_mse for t in trials])
            rows.append({
                "L": L, "N": N, "sigma": sigma, "method": "spiked",
                "median": cosine["median"], "q1": cosine["q1"], "q3": cosine["q3"], "mean": cosine["mean"],
                "trials": cosine["trials"], "failures": cosine["failures"],
                "predicted_cosine": trials[0].predicted_cosine,
                "mse_median": mse["median"], "predicted_mse": trials[0].predicted_mse,
                "critical_sigma": sigma_star, "reference_sigma": reference_sigma,
                "reference_predicted_cosine": reference_cosine,
            })
            self._log(f"   sigma={sigma:.3f}: cosine {cosine['median']:.3f} (predicted {trials[0].predicted_cosine:.3f})")
        return rows

    def _run_counterexample(self) -> List[Dict[str, Any]]:
        L = int(self.params["L"])
        rows = []
        for point, ell in enumerate(self.params["periods"]):
            ell = int(ell)

            def trial(g: np.random.Generator) -> Dict[str, float]:
                x1 = random_signal(L, g)
                rho = periodic_distribution(L, ell, rng=g)
                x2 = periodic_counterexample(x1, ell)
                first, second = population_moments(x1, rho), population_moments(x2, rho)
                d, _ = first_distinguishing_order(x1, rho, x2, rho)
                return {
                    "delta_m1": float(np.linalg.norm(first.m1 - second.m1)),
                    "delta_m2": float(np.linalg.norm(first.m2 - second.m2)),
                    "orbit_gap": math.sqrt(orbit_distance2(x2, x1, normalized=True)),
                    "order": float(d) if d is not None else float("nan"),
                }

            outcomes = self._run_trials(point, trial)
            gaps = summarize([o["orbit_gap"] for o in outcomes])
            rows.append({
                "L": L, "period": ell, "method": "counterexample", **gaps,
                "max_delta_m1": max(o["delta_m1"] for o in outcomes),
                "max_delta_m2": max(o["delta_m2"] for o in outcomes),
                "min_orbit_gap": min(o["orbit_gap"] for o in outcomes),
                "distinguishing_order": summarize([o["order"] for o in outcomes])["median"],
            })
        return rows

    def _run_bounds_table(self) -> List[Dict[str, Any]]:
        L, N, ell = int(self.params["L"]), int(self.params["N"]), int(self.params["period"])
        methods = list(self.params["methods"])
        fixed = self._fixed_rng()
        x = random_signal(L, fixed)
        rho = periodic_distribution(L, ell, rng=fixed)
        x_alt = periodic_counterexample(x, ell)
        energy = float(np.dot(x, x))

        rows = []
        for point, sigma in enumerate(self._sigma_grid()):
            report = orbit_bound(x, rho, x_alt, rho, N, sigma)
            snr = energy / sigma ** 2
            outcomes = self._run_trials(point, lambda g: self._method_errors(x, rho, sigma, N, methods, g))
            for method in methods:
                mse = summarize([o[method] ** 2 for o in outcomes])
                rows.append({
                    "L": L, "N": N, "sigma": sigma, "period": ell, "method": method, **mse,
                    **report.as_row(),
                    "aperiodic_rate_bound": aperiodic_rate_bound(N, snr),
                    "periodic_rate_bound": periodic_rate_bound(N, snr, L, ell),
                })
            self._log(f"   sigma={sigma:.3g}: bound {report.bound:.3g}, median MSE {rows[-1]['median']:.3g}")
        return rows
