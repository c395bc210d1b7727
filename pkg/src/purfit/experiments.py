"""De-biasing runs and the two replicate experiments (adult, pay gap).

Every method is an information projection of the regularized training
distribution (or of the uniform table on the same support) onto constraints
computed from that regularized distribution:

    raw          the regularized training distribution itself
    P, PU, PUR   projections under parity (+ utility) (+ realism)
    PUR_uniform  projection of the uniform table under all three

Each projection is used as a natural classifier on the test predictors and
scored with attributable disparity, disparity ratio, parity residual and
utility error.  The adult pipeline additionally samples a synthetic dataset of
the original size from each projection and records its disparity ratios.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .constraints import ConstraintSet, build_constraints
from .ipf import ProjectionDiagnostics, SolverOptions, project
from .metrics import disparity_ratio, disparity_report, parity_residual, utility_error
from .persistence import RunManifest
from .reference import (
    RegularizationConfig,
    pseudo_count_regularize,
    support_mask,
    uniform_reference,
)
from .synthesis import (
    draw_counts,
    natural_prediction,
    replicate_rng,
    train_test_split,
    unseen_profiles,
)
from .tables import CountTable, JointTable, normalize

logger = logging.getLogger(__name__)

METHODS = ("raw", "P", "PU", "PUR", "PUR_uniform")
RESULT_HEADER = ("dataset", "method", "replicate", "metric", "y", "s_profile", "value", "manifest")


@dataclass
class DebiasResult:
    projection: JointTable
    reference: JointTable
    constraints: ConstraintSet
    diagnostics: ProjectionDiagnostics


def debias(
    counts: CountTable,
    mode: str = "PUR",
    reference: str = "empirical",
    regularization: RegularizationConfig | None = None,
    options: SolverOptions | None = None,
) -> DebiasResult:
    """Project the (regularized) empirical or uniform reference onto ``mode``."""
    regularization = regularization or RegularizationConfig()
    f = normalize(counts)
    f_reg = pseudo_count_regularize(f, counts.total, regularization)
    cset = build_constraints(f_reg, mode)
    if reference == "empirical":
        q0 = f_reg
    elif reference == "uniform":
        q0 = uniform_reference(f.schema, support_mask(f, regularization.support_mode))
    else:
        raise ValueError(f"reference must be 'empirical' or 'uniform', got {reference!r}")
    q, diag = project(q0, cset, options)
    return DebiasResult(q, q0, cset, diag)


def fit_methods(
    train: CountTable,
    methods=METHODS,
    regularization: RegularizationConfig | None = None,
    options: SolverOptions | None = None,
) -> dict[str, JointTable]:
    """The distribution each method learns from ``train``."""
    regularization = regularization or RegularizationConfig()
    f = normalize(train)
    f_reg = pseudo_count_regularize(f, train.total, regularization)
    out = {}
    for m in methods:
        if m == "raw":
            out[m] = f_reg
        elif m == "PUR_uniform":
            u = uniform_reference(f.schema, support_mask(f, regularization.support_mode))
            out[m] = project(u, build_constraints(f_reg, "PUR"), options)[0]
        else:
            out[m] = project(f_reg, build_constraints(f_reg, m), options)[0]
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


def _profile(s) -> str:
    return "|".join(s)


def prediction_rows(p_pred: JointTable, f_test: JointTable, q: JointTable, s0, y_pos=None):
    """``(metric, y, s_profile, value)`` rows scoring one natural prediction."""
    rows = []
    report = disparity_report(p_pred, s0, y_pos)
    for metric, y, s, v in report.rows():
        rows.append((metric, y, _profile(s), v))
    rows.append(("parity_residual", "", "", parity_residual(p_pred)))
    rows.append(("utility_error", "", "", utility_error(f_test, p_pred)))
    unseen = unseen_profiles(q, f_test)
    f_pred = f_test.tensor.sum(axis=0)
    rows.append(("unseen_test_mass", "", "", float(f_pred[unseen].sum())))
    return rows


@dataclass
class ExperimentSettings:
    dataset: str
    replicates: int
    seed: int
    reference_profile: tuple
    positive_outcome: str | None = None
    methods: tuple = METHODS
    regularization: RegularizationConfig = field(default_factory=RegularizationConfig)
    options: SolverOptions = field(default_factory=SolverOptions)
    test_fraction: float = 0.5
    synthetic: bool = False


def _adult_replicate(counts: CountTable, st: ExperimentSettings, r: int):
    rng = replicate_rng(st.seed, r)
    train, test = train_test_split(counts, st.test_fraction, rng)
    f_test = normalize(test)
    fitted = fit_methods(train, st.methods, st.regularization, st.options)
    rows = []
    for m in st.methods:
        q = fitted[m]
        p_pred = natural_prediction(q, f_test)
        for row in prediction_rows(p_pred, f_test, q, st.reference_profile, st.positive_outcome):
            rows.append((st.dataset, m, r, *row))
        if st.synthetic and st.positive_outcome is not None:
            synth = normalize(draw_counts(q, counts.total, rng))
            ratios = disparity_ratio(synth, st.positive_outcome, st.reference_profile)
            s_profiles = q.schema.profiles(q.schema.protected_names)
            for s, v in zip(s_profiles, ratios):
                v = None if v is np.ma.masked else float(v)
                rows.append((st.dataset, m, r, "synthetic_disparity_ratio",
                             st.positive_outcome, _profile(s), v))
    return rows


def _resample_replicate(f_year: JointTable, n: int, st: ExperimentSettings, r: int):
    rng = replicate_rng(st.seed, r)
    train = draw_counts(f_year, n, rng)
    test = draw_counts(f_year, n, rng)
    f_test = normalize(test)
    fitted = fit_methods(train, st.methods, st.regularization, st.options)
    rows = []
    for m in st.methods:
        q = fitted[m]
        p_pred = natural_prediction(q, f_test)
        for row in prediction_rows(p_pred, f_test, q, st.reference_profile, st.positive_outcome):
            rows.append((st.dataset, m, r, *row))
    return rows


def _task(args):
    kind, payload, st, r = args
    if kind == "split":
        return r, _adult_replicate(payload, st, r)
    f_year, n = payload
    return r, _resample_replicate(f_year, n, st, r)


def _run_replicates(kind, payload, st: ExperimentSettings, workers: int):
    tasks = [(kind, payload, st, r) for r in range(st.replicates)]
    if workers > 1 and st.replicates > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_task, tasks))
    else:
        results = dict(map(_task, tasks))
    # merge by replicate index so output order does not depend on scheduling
    return [row for r in sorted(results) for row in results[r]]


def adult_experiment(counts: CountTable, settings: ExperimentSettings, workers: int = 1):
    """Split/project/predict replicates on one dataset (adult protocol)."""
    return _run_replicates("split", counts, settings, workers)


def resample_experiment(counts: CountTable, settings: ExperimentSettings, workers: int = 1):
    """Train and test both drawn from the empirical distribution (pay-gap protocol)."""
    return _run_replicates("resample", (normalize(counts), counts.total), settings, workers)


def rows_to_frame(rows, manifest_hash: str) -> pd.DataFrame:
    df = pd.DataFrame(
        [(*row[:6], _fmt(row[6]), manifest_hash) for row in rows], columns=RESULT_HEADER
    )
    return df


def write_results(rows, manifest: RunManifest, out_dir) -> tuple[Path, Path]:
    """Write results.csv and manifest.json into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = manifest.digest()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_HEADER)
    for row in rows:
        w.writerow((*row[:6], _fmt(row[6]), digest))
    results = out_dir / "results.csv"
    results.write_text(buf.getvalue())
    manifest_path = out_dir / "manifest.json"
    manifest.save(manifest_path)
    return results, manifest_path


def read_results(path) -> pd.DataFrame:
    """Load a results.csv with numeric values (undefined entries become NaN)."""
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    df["replicate"] = df["replicate"].astype(int)
    df["value"] = pd.to_numeric(df["value"].replace("", np.nan))
    return df


def run_experiment(
    pipeline: str,
    data_path,
    config,
    out_dir,
    replicates: int = 100,
    seed: int = 0,
    workers: int = 1,
    regularization: RegularizationConfig | None = None,
    options: SolverOptions | None = None,
    years=None,
    test_fraction: float = 0.5,
) -> pd.DataFrame:
    """Ingest, run every replicate, write results.csv + manifest.json.

    ``pipeline`` is ``"adult"`` (train/test split of one dataset, plus
    synthetic-data disparity) or ``"paygap"`` (per year, train and test both
    resampled from that year's empirical distribution).
    """
    from .ingest import IngestConfig, ingest

    if not isinstance(config, IngestConfig):
        config = IngestConfig.load(config)
    regularization = regularization or RegularizationConfig()
    options = options or SolverOptions()
    analysis = config.analysis
    s0 = tuple(analysis.get("reference_profile", ()))
    y_pos = analysis.get("positive_outcome")

    def settings(name, synthetic):
        return ExperimentSettings(
            dataset=name, replicates=replicates, seed=seed, reference_profile=s0,
            positive_outcome=y_pos, regularization=regularization, options=options,
            test_fraction=test_fraction, synthetic=synthetic,
        )

    rows = []
    extra = {"pipeline": pipeline, "data": Path(data_path).name}
    if pipeline == "adult":
        counts, report = ingest(data_path, config)
        extra["records"] = {"adult": counts.total}
        rows = adult_experiment(counts, settings("adult", True), workers)
    elif pipeline == "paygap":
        column, years = _year_selection(config, years)
        extra["records"] = {}
        for year in years:
            counts, _ = ingest(data_path, config.with_filters(**{column: [year]}))
            extra["records"][year] = counts.total
            logger.info("pay gap %s: N = %d", year, counts.total)
            rows += resample_experiment(counts, settings(year, False), workers)
    else:
        raise ValueError(f"unknown pipeline {pipeline!r}")

    manifest = RunManifest(
        command="experiment",
        config_hash=config.digest(),
        seed=seed,
        replicates=replicates,
        solver={"tolerance": options.tolerance, "max_cycles": options.max_cycles},
        lam=regularization.lam,
        support_mode=regularization.support_mode,
        constraint_mode=",".join(METHODS),
        reference="empirical,uniform",
        extra=extra,
    )
    write_results(rows, manifest, out_dir)
    return rows_to_frame(rows, manifest.digest())


def _year_selection(config, years):
    analysis = config.analysis
    column = analysis.get("year_column", "year")
    if years is None:
        years = analysis.get("years")
    if not years:
        raise ValueError("pay-gap pipeline needs a list of years")
    return column, [str(y) for y in years]
