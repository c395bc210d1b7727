"""De-bias the adult census table and compare disparity ratios.

The reference group is (male, white) and the positive outcome is an income
above 50k.  Ratios under 0.8 are the usual adverse-impact flag.
"""

from pathlib import Path

import numpy as np

from purfit import disparity_ratio, entropy, normalize, parity_residual
from purfit.experiments import debias
from purfit.ingest import IngestConfig, ingest, shipped_config

DATA = Path(__file__).resolve().parents[1] / "data" / "adult" / "adult.csv"

config = IngestConfig.load(shipped_config("adult"))
counts, report = ingest(DATA, config)
print(f"records read {report.records_read}, kept {counts.total}, rejected {report.rejected}")

f = normalize(counts)
groups = counts.schema.profiles(counts.schema.protected_names)
s0, y_pos = ("male", "white"), "above_50k"


def show(name, p):
    ratios = np.ma.filled(disparity_ratio(p, y_pos, s0), np.nan)
    cells = "  ".join(f"{'/'.join(s)}={r:.3f}" for s, r in zip(groups, ratios))
    print(f"{name:12s} parity_residual={parity_residual(p):.2e}  {cells}")


show("data", f)
for mode in ("P", "PU", "PUR"):
    res = debias(counts, mode)
    show(mode, res.projection)
    print(f"{'':12s} cycles={res.diagnostics.cycles_used} "
          f"KL to reference={res.diagnostics.kl_to_reference:.4f} "
          f"entropy={entropy(res.projection):.4f}")
