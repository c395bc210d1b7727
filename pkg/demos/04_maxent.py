"""Projecting the uniform table instead of the data.

With a uniform reference the projection is the maximum-entropy table that
meets the same constraints: nothing about the data is kept beyond the three
marginals.
"""

from pathlib import Path

from purfit import entropy, kl_divergence, normalize
from purfit.experiments import debias
from purfit.ingest import IngestConfig, ingest, shipped_config

DATA = Path(__file__).resolve().parents[1] / "data" / "adult" / "adult.csv"

counts, _ = ingest(DATA, IngestConfig.load(shipped_config("adult")))
emp = debias(counts, "PUR", reference="empirical")
uni = debias(counts, "PUR", reference="uniform")
f = normalize(counts)

print(f"entropy of data            {entropy(f):.4f}")
print(f"entropy of PUR(empirical)  {entropy(emp.projection):.4f}")
print(f"entropy of PUR(uniform)    {entropy(uni.projection):.4f}")
print(f"KL(data || PUR(empirical)) {kl_divergence(f, emp.projection):.4f}")
print(f"KL(data || PUR(uniform))   {kl_divergence(f, uni.projection):.4f}")
