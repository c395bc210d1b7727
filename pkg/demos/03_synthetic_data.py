"""Fair synthetic datasets: sample the PUR projection at the original size.

Each replicate is a multinomial draw of N records.  Sampling noise moves the
disparity ratios around 1, but not down to the 0.8 threshold.
"""

from pathlib import Path

import numpy as np

from purfit import SampleSpec, disparity_ratio, normalize, sample_counts
from purfit.experiments import debias
from purfit.ingest import IngestConfig, ingest, shipped_config

DATA = Path(__file__).resolve().parents[1] / "data" / "adult" / "adult.csv"

counts, _ = ingest(DATA, IngestConfig.load(shipped_config("adult")))
q = debias(counts, "PUR").projection
spec = SampleSpec(n=counts.total, seed=2024, replicates=200)

ratios = np.array([
    np.ma.filled(disparity_ratio(normalize(c), "above_50k", ("male", "white")), np.nan)
    for c in sample_counts(q, spec)
])
for j, s in enumerate(counts.schema.profiles(counts.schema.protected_names)):
    r = ratios[:, j]
    print(f"{'/'.join(s):18s} mean {r.mean():.3f}  5%-95% [{np.quantile(r, .05):.3f}, "
          f"{np.quantile(r, .95):.3f}]  min {r.min():.3f}")
