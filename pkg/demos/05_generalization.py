"""How fair are the predictions on held-out data?

Fifty random 50/50 splits of the adult table.  Each method learns a table on
the training half and predicts labels for the test half's (s, x) profiles.
"""

import tempfile
from pathlib import Path

from purfit.experiments import read_results, run_experiment
from purfit.ingest import shipped_config

DATA = Path(__file__).resolve().parents[1] / "data" / "adult" / "adult.csv"

with tempfile.TemporaryDirectory() as out:
    run_experiment("adult", DATA, shipped_config("adult"), out, replicates=50, seed=0, workers=2)
    df = read_results(Path(out) / "results.csv")

summary = (
    df[df.metric.isin(["parity_residual", "utility_error"])]
    .groupby(["metric", "method"]).value.agg(["mean", "std"])
)
print(summary.to_string(float_format=lambda v: f"{v:.5f}"))
