"""Command-line front end.

    purfit ingest DATA.csv --ingest-config adult --out counts.json
    purfit debias counts.json --mode pur --reference empirical --out-dir run/
    purfit sample run/projection.json --n 46043 --replicates 10 --out-dir synth/
    purfit predict run/projection.json test_counts.json --out pred.json
    purfit metrics pred.json --reference-profile male,white --positive above_50k
    purfit experiment adult --data adult.csv --replicates 100 --out-dir results/

Exit codes: 0 success, 2 configuration error, 3 ingestion error,
4 solver non-convergence or infeasible constraints, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .errors import (
    ArgumentError,
    EmptyDataError,
    IllPosedReferenceError,
    InfeasibleConstraintsError,
    IngestionError,
    NonConvergenceError,
    SchemaError,
)
from .ipf import DEFAULT_MAX_CYCLES, DEFAULT_TOLERANCE, SolverOptions
from .reference import DEFAULT_LAMBDA, DEFAULT_SUPPORT_MODE, SUPPORT_MODES, RegularizationConfig

EXIT_OK, EXIT_CONFIG, EXIT_INGEST, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4, 5

log = logging.getLogger("purfit")


class ConfigError(Exception):
    pass


def _profile(text):
    return tuple(p.strip() for p in text.split(",")) if text else None


def _ingest_config(name_or_path):
    from .ingest import IngestConfig, shipped_config

    path = Path(name_or_path)
    if not path.exists() and not path.suffix:
        path = shipped_config(str(name_or_path))
    return IngestConfig.load(path)


def _regularization(args):
    return RegularizationConfig(args.lam, args.support_mode)


def _options(args, trace=False):
    return SolverOptions(args.tolerance, args.max_cycles, record_trace=trace)


def _emit(obj):
    json.dump(obj, sys.stdout, indent=1)
    sys.stdout.write("\n")


def cmd_ingest(args):
    from .ingest import ingest
    from .persistence import dump_json, save_table

    config = _ingest_config(args.ingest_config)
    counts, report = ingest(args.csv, config)
    save_table(counts, args.out)
    if args.report:
        dump_json(report.to_dict(), args.report)
    _emit(report.to_dict())


def cmd_debias(args):
    from .experiments import debias
    from .metrics import parity_residual
    from .persistence import RunManifest, constraints_to_dict, dump_json, load_table, save_table
    from .tables import CountTable

    counts = load_table(args.counts)
    if not isinstance(counts, CountTable):
        raise ConfigError(f"{args.counts} is not a count table")
    out = Path(args.out_dir)
    manifest = RunManifest(
        command="debias",
        config_hash=_file_digest(args.counts),
        solver={"tolerance": args.tolerance, "max_cycles": args.max_cycles},
        lam=args.lam,
        support_mode=args.support_mode,
        constraint_mode=args.mode.upper(),
        reference=args.reference,
    )
    manifest.save(out / "manifest.json")
    try:
        result = debias(counts, args.mode, args.reference, _regularization(args), _options(args, True))
    except NonConvergenceError as exc:
        dump_json(exc.diagnostics.to_dict(), out / "diagnostics.json")
        raise
    save_table(result.projection, out / "projection.json")
    save_table(result.reference, out / "reference.json")
    dump_json(constraints_to_dict(result.constraints), out / "constraints.json")
    dump_json(result.diagnostics.to_dict(), out / "diagnostics.json")
    _emit(
        {
            "parity_residual": parity_residual(result.projection),
            "kl_to_reference": result.diagnostics.kl_to_reference,
            "cycles_used": result.diagnostics.cycles_used,
            "final_residual": result.diagnostics.final_residual,
            "manifest": manifest.digest(),
        }
    )


def cmd_sample(args):
    from .persistence import RunManifest, load_table, save_table
    from .synthesis import SampleSpec, sample_counts
    from .tables import CountTable, normalize

    table = load_table(args.table)
    if isinstance(table, CountTable):
        table = normalize(table)
    spec = SampleSpec(args.n, args.seed, args.replicates)
    out = Path(args.out_dir)
    width = max(3, len(str(spec.replicates - 1)))
    for r, counts in enumerate(sample_counts(table, spec)):
        save_table(counts, out / f"sample_{r:0{width}d}.json")
    RunManifest(
        command="sample", config_hash=_file_digest(args.table), seed=args.seed,
        replicates=args.replicates, extra={"n": args.n},
    ).save(out / "manifest.json")


def cmd_predict(args):
    from .persistence import load_table, save_table
    from .synthesis import natural_prediction, unseen_profiles
    from .tables import CountTable, normalize

    train = load_table(args.train)
    test = load_table(args.test)
    train = normalize(train) if isinstance(train, CountTable) else train
    test = normalize(test) if isinstance(test, CountTable) else test
    pred = natural_prediction(train, test, args.fallback)
    save_table(pred, args.out)
    unseen = unseen_profiles(train, test)
    _emit({"fallback": args.fallback, "unseen_test_profiles": int(unseen.sum())})


def cmd_metrics(args):
    from .metrics import disparity_report, entropy, kl_divergence, parity_residual, utility_error
    from .persistence import load_table
    from .tables import CountTable, normalize

    def joint(path):
        t = load_table(path)
        return normalize(t) if isinstance(t, CountTable) else t

    p = joint(args.table)
    out = {"entropy": entropy(p), "parity_residual": parity_residual(p)}
    if args.reference_profile:
        report = disparity_report(p, args.reference_profile, args.positive)
        out["disparity"] = [
            {"metric": m, "y": y, "s_profile": list(s), "value": v}
            for m, y, s, v in report.rows()
        ]
    if args.test:
        out["utility_error"] = utility_error(joint(args.test), p)
    if args.reference_table:
        out["kl_to_reference"] = kl_divergence(p, joint(args.reference_table))
    _emit(out)


def cmd_experiment(args):
    from .experiments import run_experiment

    config = _ingest_config(args.ingest_config or args.pipeline)
    df = run_experiment(
        args.pipeline,
        args.data,
        config,
        args.out_dir,
        replicates=args.replicates,
        seed=args.seed,
        workers=args.workers,
        regularization=_regularization(args),
        options=_options(args),
        years=args.years,
        test_fraction=args.test_fraction,
    )
    _emit({"rows": len(df), "out_dir": str(args.out_dir), "manifest": df["manifest"].iloc[0] if len(df) else None})


def _file_digest(path):
    import hashlib

    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _add_solver_flags(p):
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA,
                   help="pseudo-count strength (default %(default)g)")
    p.add_argument("--support-mode", choices=SUPPORT_MODES, default=DEFAULT_SUPPORT_MODE)
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    p.add_argument("--max-cycles", type=int, default=DEFAULT_MAX_CYCLES)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="purfit", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"purfit {__version__}")
    parser.add_argument("--config", help="JSON run config supplying option defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="tally a CSV into a count table")
    p.add_argument("csv")
    p.add_argument("--ingest-config", required=True,
                   help="ingest config path, or a shipped name (adult, paygap)")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("debias", help="project a count table onto P/PU/PUR")
    p.add_argument("counts")
    p.add_argument("--mode", type=str.upper, choices=("P", "PU", "PUR"), default="PUR")
    p.add_argument("--reference", choices=("empirical", "uniform"), default="empirical")
    _add_solver_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_debias)

    p = sub.add_parser("sample", help="draw synthetic count tables from a distribution")
    p.add_argument("table")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("predict", help="natural-classifier prediction on test predictors")
    p.add_argument("train")
    p.add_argument("test")
    p.add_argument("--fallback", choices=("response_marginal", "uniform"), default="response_marginal")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("metrics", help="fairness and utility diagnostics of a table")
    p.add_argument("table")
    p.add_argument("--reference-profile", type=_profile)
    p.add_argument("--positive")
    p.add_argument("--test")
    p.add_argument("--reference-table")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("experiment", help="run the adult or pay-gap replicate study")
    p.add_argument("pipeline", choices=("adult", "paygap"))
    p.add_argument("--data", required=True)
    p.add_argument("--ingest-config")
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--test-fraction", type=float, default=0.5)
    p.add_argument("--years", nargs="+")
    _add_solver_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_experiment)
    return parser


def _config_defaults(parser, argv):
    """Apply --config and PURFIT_SEED as defaults; explicit flags still win."""
    pre, _ = parser.parse_known_args(argv)
    defaults = {}
    if pre.config:
        try:
            with open(pre.config) as fh:
                defaults = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{pre.config}: {exc}") from exc
        defaults = {k.replace("-", "_"): v for k, v in defaults.items()}
        if "lambda" in defaults:
            defaults["lam"] = defaults.pop("lambda")
    if "PURFIT_SEED" in os.environ:
        defaults["seed"] = int(os.environ["PURFIT_SEED"])
    if defaults:
        for action in parser._subparsers._group_actions:
            for sp in action.choices.values():
                known = {a.dest for a in sp._actions}
                sp.set_defaults(**{k: v for k, v in defaults.items() if k in known})


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    try:
        _config_defaults(parser, argv)
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        args.func(args)
    except (NonConvergenceError, InfeasibleConstraintsError, IllPosedReferenceError) as exc:
        print(f"purfit: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (IngestionError, EmptyDataError) as exc:
        print(f"purfit: ingestion error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except (ConfigError, ArgumentError, SchemaError, ValueError, KeyError) as exc:
        print(f"purfit: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"purfit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
