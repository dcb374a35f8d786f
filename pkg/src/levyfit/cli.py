"""Command line entry points.

Exit codes: 0 success, 1 usage/config/data error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .config import load_config
from .errors import ConfigError, IngestError, LevyfitError
from .experiment import build_grid, run_experiment
from .preprocess import PreprocessSpec, preprocess_financial
from .samples import ingest_samples, write_samples_csv
from .simulate import SimulationSpec, sample_bigamma, sample_compound_poisson
from .torus import band_centers, make_basis, tiling_centers


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levyfit",
        description="Nonparametric jump-measure calibration from terminal samples")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the configured fit / sweep")
    run.add_argument("config", nargs="?", default=None,
                     help="key=value config file (defaults used if omitted)")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="override a config key")
    run.add_argument("--out", default=None, help="output directory")
    run.add_argument("--verbose", action="store_true")

    sim = sub.add_parser("simulate", help="generate a terminal-sample CSV")
    sim.add_argument("config", nargs="?", default=None)
    sim.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE")
    sim.add_argument("--out", required=True, help="output CSV path")

    pre = sub.add_parser("preprocess",
                         help="map raw return data onto the torus")
    pre.add_argument("input", help="raw values CSV (one per line)")
    pre.add_argument("--out", required=True, help="output CSV path")
    pre.add_argument("--band-lo", type=float, default=-0.03)
    pre.add_argument("--band-hi", type=float, default=0.03)
    pre.add_argument("--fraction", type=float, default=0.25,
                     help="share of empirical variance given to the diffusion")
    pre.add_argument("--outside", choices=("wrap", "discard"), default="wrap")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config, args.overrides)
    result = run_experiment(config, out_dir=args.out, quiet=not args.verbose)
    print(f"selected n_theta = {result.sweep.selected_n_theta}; "
          f"report at {result.paths['report']}")
    return 0


def _cmd_simulate(args) -> int:
    config = load_config(args.config, args.overrides)
    if not config.sim_kind:
        raise ConfigError("simulate needs sim_kind in the config")
    grid = build_grid(config)
    if config.sim_kind == "compound_poisson":
        spec = SimulationSpec(kind="compound_poisson", rates=config.sim_rates,
                              drift=config.drift, sigma2=config.sigma2,
                              t_final=config.t_final,
                              n_samples=config.sample_count, seed=config.seed)
        centers = (band_centers(len(config.sim_rates), config.centers_lo,
                                config.centers_hi)
                   if config.centers_mode == "band"
                   else tiling_centers(len(config.sim_rates), grid))
        sample_set = sample_compound_poisson(spec, make_basis(centers, grid),
                                             grid)
        meta = {"kind": spec.kind, "rates": ",".join(map(str, spec.rates))}
    else:
        spec = SimulationSpec(kind="bigamma", gamma_shape=config.sim_gamma_shape,
                              gamma_rate=config.sim_gamma_rate,
                              drift=config.drift, sigma2=config.sigma2,
                              t_final=config.t_final,
                              n_samples=config.sample_count, seed=config.seed)
        sample_set = sample_bigamma(spec, grid)
        meta = {"kind": spec.kind, "gamma_shape": spec.gamma_shape,
                "gamma_rate": spec.gamma_rate}
    meta.update({"seed": spec.seed, "t_final": spec.t_final,
                 "drift": spec.drift, "sigma2": spec.sigma2})
    write_samples_csv(args.out, sample_set.values, metadata=meta)
    print(f"wrote {len(sample_set)} samples to {args.out}")
    return 0


def _cmd_preprocess(args) -> int:
    raw = ingest_samples(args.input)
    spec = PreprocessSpec(band_lo=args.band_lo, band_hi=args.band_hi,
                          diffusion_fraction=args.fraction,
                          outside=args.outside)
    result = preprocess_financial(raw, spec)
    write_samples_csv(args.out, result.values, metadata={
        "source": args.input,
        "torus_drift": result.drift,
        "torus_sigma2": result.diffusion,
        "raw_mean": result.raw_mean,
        "raw_variance": result.raw_variance,
        "n_wrapped": result.n_wrapped,
        "n_discarded": result.n_discarded,
    })
    print(json.dumps({
        "n_values": int(len(result.values)),
        "torus_drift": result.drift,
        "torus_sigma2": result.diffusion,
        "n_wrapped": result.n_wrapped,
        "n_discarded": result.n_discarded,
    }, sort_keys=True))
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        return _cmd_preprocess(args)
    except (ConfigError, IngestError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (LevyfitError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
