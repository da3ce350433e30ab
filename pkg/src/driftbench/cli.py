"""Command line interface.

Subcommands: ``simulate``, ``estimate``, ``posterior`` and ``study``.  Exit
status is 0 on success, 1 on usage or configuration errors and 2 on
numerical failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="driftbench", description="Drift estimation and posterior sampling for periodic diffusions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="simulate a path and write the observations as CSV")
    sim.add_argument("--config", required=True, help="model JSON")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--delta", type=float, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--substeps", type=int, default=50)
    sim.add_argument("--x0", type=float, default=None, help="fixed initial value instead of a stationary draw")
    sim.add_argument("--L0", type=float, default=10.0)
    sim.add_argument("--allow-out-of-regime", action="store_true")
    sim.add_argument("--out", required=True, help="observations CSV")
    sim.add_argument("--fine-out", default=None, help="binary fine path (with a JSON sidecar)")
    sim.add_argument("--plot", default=None, help="SVG density overlay")

    est = sub.add_parser("estimate", help="fit the minimum-contrast estimator")
    est.add_argument("--data", required=True, help="observations CSV")
    est.add_argument("--config", default=None, help="model JSON supplying K0 (and s)")
    est.add_argument("--K0", type=float, default=None)
    est.add_argument("--s", type=float, default=None)
    est.add_argument("--level", type=int, default=None)
    est.add_argument("--L1", type=float, default=0.5)
    est.add_argument("--L2", type=float, default=1.0)
    est.add_argument("--family", default="daubechies", choices=["daubechies", "fourier"])
    est.add_argument("--order", type=int, default=8)
    est.add_argument("--max-level", type=int, default=10)
    est.add_argument("--out", required=True, help="fit JSON")

    post = sub.add_parser("posterior", help="sample the posterior by MCMC")
    post.add_argument("--data", required=True, help="observations CSV")
    post.add_argument("--prior", required=True, help="prior JSON")
    post.add_argument("--model", default=None, help="model JSON supplying sigma")
    post.add_argument("--iters", type=int, default=5000)
    post.add_argument("--burnin", type=int, default=2000)
    post.add_argument("--seed", type=int, default=0)
    post.add_argument("--out", required=True, help="chain JSON-lines")
    post.add_argument("--summary", default=None, help="summary JSON")
    post.add_argument("--plot", default=None, help="SVG trace plot")

    st = sub.add_parser("study", help="run a Monte-Carlo study")
    st.add_argument("name", choices=["rate", "contraction", "klcheck", "holder", "smallball"])
    st.add_argument("--config", required=True, help="study JSON")
    st.add_argument("--out", default=None, help="output directory (overrides the config)")
    st.add_argument("--workers", type=int, default=None)
    st.add_argument("--seed", type=int, default=None)
    st.add_argument("--plots", action="store_true", help="write SVG figures next to the report")
    st.add_argument("--allow-out-of-regime", action="store_true")
    return parser


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise UsageError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from exc


def cmd_simulate(args) -> int:
    from .model import ModelParams
    from .paths import PathConfig, simulate_path, subsample

    model = ModelParams.from_dict(_load_json(args.config))
    cfg = PathConfig(args.n, args.delta, args.substeps, args.seed, args.L0, args.x0)
    if not args.allow_out_of_regime:
        cfg.check_regime()
    path = simulate_path(model, cfg)
    obs = subsample(path, cfg)
    obs.to_csv(args.out)
    if args.fine_out:
        path.save(args.fine_out)
    if args.plot:
        from .experiments.plots import density_overlay

        density_overlay(path.values, model.invariant_density(), args.plot)
    return EXIT_OK


def cmd_estimate(args) -> int:
    from .estimator import EstimatorConfig, RateSchedule, fit_minimum_contrast
    from .paths import Observations
    from .wavelets import WaveletBasis

    K0, s = args.K0, args.s
    if args.config:
        from .model import ModelParams

        model = ModelParams.from_dict(_load_json(args.config))
        K0 = model.K0 if K0 is None else K0
        s = model.s if s is None else s
    if K0 is None:
        raise UsageError("K0 is required (--K0 or --config)")
    basis = WaveletBasis(args.family, args.order, args.max_level)
    if args.level is not None:
        cfg = EstimatorConfig(basis, K0, level=args.level)
    elif s is not None:
        cfg = EstimatorConfig(basis, K0, schedule=RateSchedule(s, args.L1, args.L2))
    else:
        raise UsageError("give --level or a smoothness --s")
    obs = Observations.from_csv(args.data)
    fit = fit_minimum_contrast(obs, cfg)
    out = fit.to_dict()
    out["basis"] = basis.describe()
    Path(args.out).write_text(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_posterior(args) -> int:
    from .bayes import MCMCConfig, PriorSpec, run_mcmc
    from .model import ModelParams, SigmaSpec
    from .paths import Observations

    sigma = SigmaSpec.constant(1.0)
    if args.model:
        sigma = ModelParams.from_dict(_load_json(args.model)).sigma
    prior = PriorSpec.from_dict(_load_json(args.prior), sigma=sigma)
    obs = Observations.from_csv(args.data)
    chain = run_mcmc(prior, obs, MCMCConfig(iters=args.iters, burnin=args.burnin, seed=args.seed))
    chain.to_jsonl(args.out)
    if args.summary:
        summary = chain.summary()
        summary["posterior_mean"] = chain.mean().to_dict()
        Path(args.summary).write_text(json.dumps(summary, indent=2))
    if args.plot:
        from .experiments.plots import trace_plot

        trace_plot(chain.logpost, chain.levels, args.plot)
    return EXIT_OK


def cmd_study(args) -> int:
    from .experiments import ExperimentConfig, run_study
    from .experiments.plots import PLOTTERS

    data = _load_json(args.config)
    data["study"] = args.name if "study" not in data else data["study"]
    if data["study"] != args.name:
        raise UsageError(f"config describes study {data['study']!r}, not {args.name!r}")
    if args.out:
        data["output"] = args.out
    if args.workers is not None:
        data["workers"] = args.workers
    if args.seed is not None:
        data["seed"] = args.seed
    if args.allow_out_of_regime:
        data["allow_out_of_regime"] = True
    config = ExperimentConfig.from_dict(data, base=Path(args.config).parent)
    report = run_study(config)
    path = report.save(config.output)
    if args.plots and args.name in PLOTTERS:
        PLOTTERS[args.name](report.to_dict(), Path(config.output) / f"{args.name}.svg")
    for v in report.verdicts:
        print(f"{'PASS' if v.passed else 'FAIL'} {v.criterion}: {v.detail}")
    print(f"report written to {path}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "posterior": cmd_posterior, "study": cmd_study}


def main(argv: list[str] | None = None) -> int:
    from .bayes import MCMCError

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, KeyError) as exc:
        print(f"driftbench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MCMCError, np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        print(f"driftbench: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
