#!/usr/bin/env python3
"""
Command-line interface: generate | recover | experiment | bounds | bench

Exit codes: 0 success, 1 usage or configuration error, 2 solver failure, 3 I/O failure.
"""

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

from .core.bounds import aperiodic_rate_bound, orbit_bound, periodic_rate_bound
from .core.model import generate, periodic_distribution, random_signal
from .core.moments import periodic_counterexample
from .models.options import EXPERIMENT_DEFAULTS, ExperimentConfig, GeneratorConfig, build_options
from .models.results import ExperimentReport
from .services.data_service import DataService
from .services.experiment_service import ExperimentService
from .services.plot_service import PlotService
from .services.recovery_service import METHODS, RecoveryService
from .utils.config_manager import ConfigManager, set_config
from .utils.errors import ConfigError, DataFormatError, MraError
from .utils.helpers import make_rng
from .utils.logger import log

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 3


class MraArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_override(text: str) -> Dict[str, Any]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return {key.strip(): value}


def build_parser() -> argparse.ArgumentParser:
    parser = MraArgumentParser(prog="multireference_alignment",
                               description="Signal recovery from randomly shifted noisy copies")
    parser.add_argument("--seed", type=int, default=None, help="Generator seed (default: run_settings.seed)")
    parser.add_argument("--threads", type=int, default=None, help="Worker threads for trials and restarts")
    parser.add_argument("--out", default=None, help="Output path")
    parser.add_argument("--config", default=None, help="JSON or 'section.key = value' config file")
    parser.add_argument("--paper-scale", action="store_true", help="Use the full repeat counts in experiments")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=MraArgumentParser)

    gen = sub.add_parser("generate", help="Write synthetic observations and the matching truth file")
    gen.add_argument("--L", type=int, default=20)
    gen.add_argument("--N", type=int, default=1000)
    gen.add_argument("--sigma", type=float, default=1.0)
    gen.add_argument("--distribution", default="random_simplex",
                     choices=["uniform", "dirac", "wrapped_gaussian", "random_simplex", "periodic", "explicit"])
    gen.add_argument("--spread", type=float, default=3.0)
    gen.add_argument("--period", type=int, default=None)
    gen.add_argument("--probs", type=float, nargs="+", default=None)
    gen.add_argument("--signal", default="random_normal", choices=["random_normal", "haar_like"])
    gen.add_argument("--signal-norm", type=float, default=None)

    rec = sub.add_parser("recover", help="Estimate (x, rho) from an observation file")
    rec.add_argument("input", help="Observation file (.mra or .csv)")
    rec.add_argument("--method", required=True, choices=METHODS)
    rec.add_argument("--truth", default=None, help="Truth JSON written by 'generate'")

    exp = sub.add_parser("experiment", help="Run an experiment and write a CSV report")
    exp.add_argument("kind", choices=sorted(EXPERIMENT_DEFAULTS))
    exp.add_argument("--set", dest="overrides", type=_parse_override, action="append", default=[],
                     metavar="KEY=VALUE", help="Override an experiment parameter (JSON value)")
    exp.add_argument("--no-plot", action="store_true", help="Skip the SVG figure")

    bnd = sub.add_parser("bounds", help="Orbit lower bound for the periodic counterexample pair")
    bnd.add_argument("--L", type=int, default=15)
    bnd.add_argument("--period", type=int, default=5)
    bnd.add_argument("--N", type=int, default=1000)
    bnd.add_argument("--sigma", type=float, nargs="+", default=[1.0, 3.0, 10.0])

    bench = sub.add_parser("bench", help="Time each solver on one synthetic data set")
    bench.add_argument("--L", type=int, default=15)
    bench.add_argument("--N", type=int, default=10000)
    bench.add_argument("--sigma", type=float, default=0.5)
    return parser


def cmd_generate(args, config: ConfigManager) -> int:
    generator = build_options(
        GeneratorConfig, L=args.L, N=args.N, sigma=args.sigma, seed=args.seed,
        distribution_kind=args.distribution, spread=args.spread, period=args.period,
        probs=args.probs, signal=args.signal, signal_norm=args.signal_norm,
    )
    out = args.out or str(Path(config.get("run_settings.output_dir", "results")) / "observations.mra")
    x, rho, obs = generate(generator)
    DataService.write_observations(out, obs)
    DataService.write_truth(DataService.truth_path(out), x, rho, {"sigma": generator.sigma, "seed": generator.seed})
    print(f"✅ Wrote {out}: L={obs.L}, N={obs.N}, sigma={obs.sigma}, distribution={generator.distribution_kind}")
    return EXIT_OK


def cmd_recover(args, config: ConfigManager) -> int:
    obs = DataService.read_observations(args.input)
    result = RecoveryService.recover(obs, args.method, make_rng(args.seed), config, threads=args.threads)
    out = args.out or str(Path(args.input).with_suffix("")) + f".{args.method}.csv"
    DataService.write_recovery(out, result)
    print(f"✅ {args.method} estimate written to {out} ({result.diagnostics.get('iterations')} iterations)")
    if args.truth:
        x, rho = DataService.read_truth(args.truth)
        scores = RecoveryService.evaluate(result, x, rho)
        print(f"📊 relative error {scores['relative_error']:.6g}, rho max error {scores['rho_max_error']:.6g}")
    return EXIT_OK


def cmd_experiment(args, config: ConfigManager) -> int:
    overrides: Dict[str, Any] = {}
    for item in args.overrides:
        overrides.update(item)
    experiment = build_options(
        ExperimentConfig, kind=args.kind, seed=args.seed, threads=args.threads,
        paper_scale=args.paper_scale, output=args.out, overrides=overrides,
    )
    if config.should_show_log("summary"):
        config.print_config_summary()
    report = ExperimentService(experiment, config).run()
    out = experiment.output or str(Path(config.get("run_settings.output_dir", "results")) / f"{args.kind}.csv")
    DataService.write_report(out, report)
    print(f"✅ Report with {len(report.rows)} rows written to {out}")
    if not args.no_plot:
        PlotService.render_report(out)
    return EXIT_OK


def cmd_bounds(args, config: ConfigManager) -> int:
    if args.period < 1 or args.L % args.period or 2 * args.period >= args.L:
        raise ConfigError(f"--period {args.period} must divide --L {args.L} and be smaller than L/2")
    rng = make_rng(args.seed)
    x = random_signal(args.L, rng)
    rho = periodic_distribution(args.L, args.period, rng=rng)
    x_alt = periodic_counterexample(x, args.period)
    rows: List[Dict[str, Any]] = []
    for sigma in args.sigma:
        report = orbit_bound(x, rho, x_alt, rho, args.N, sigma)
        snr = float(x @ x) / sigma ** 2
        row = {"sigma": sigma, "N": args.N, "snr": snr, **report.as_row(),
               "aperiodic_rate": aperiodic_rate_bound(args.N, snr),
               "periodic_rate": periodic_rate_bound(args.N, snr, args.L, args.period)}
        rows.append(row)
        print(f"σ={sigma:<8g} d={report.d} K={report.k_d:.4g} bound={report.bound:.4g} "
              f"(composed {report.bound_composed:.4g}, leading order) "
              f"rates: aperiodic {row['aperiodic_rate']:.4g}, periodic {row['periodic_rate']:.4g}")
    if args.out:
        DataService.write_report(args.out, ExperimentReport(kind="bounds", rows=rows, metadata={"seed": args.seed}))
    return EXIT_OK


def cmd_bench(args, config: ConfigManager) -> int:
    generator = build_options(GeneratorConfig, L=args.L, N=args.N, sigma=args.sigma, seed=args.seed)
    x, _, obs = generate(generator)
    for method in METHODS:
        started = time.perf_counter()
        try:
            result = RecoveryService.recover(obs, method, make_rng(args.seed), config, threads=args.threads)
            status = f"iterations={result.diagnostics.get('iterations')}"
        except MraError as e:
            status = f"failed: {e.detail}"
        print(f"⏱️  {method:<11} {time.perf_counter() - started:8.3f}s  {status}")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "recover": cmd_recover,
    "experiment": cmd_experiment,
    "bounds": cmd_bounds,
    "bench": cmd_bench,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, install the configuration and run one subcommand"""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        if args.config and not Path(args.config).exists():
            raise ConfigError(f"Config file {args.config} not found")
        config = ConfigManager(args.config)
        if args.seed is None:
            args.seed = int(config.get("run_settings.seed", 0))
        if args.threads is None:
            args.threads = int(config.get("run_settings.threads", 1))
        if args.paper_scale:
            config.set("run_settings.paper_scale", True)
        args.paper_scale = bool(config.get("run_settings.paper_scale", False))
        set_config(config)
        return COMMANDS[args.command](args, config)
    except ConfigError as e:
        print(f"❌ Configuration error: {e}", file=sys.stderr)
        return e.exit_code
    except DataFormatError as e:
        print(f"❌ I/O error: {e}", file=sys.stderr)
        return e.exit_code
    except MraError as e:
        log(f"❌ {type(e).__name__}: {e}", "error")
        return e.exit_code
    except OSError as e:
        print(f"❌ I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
