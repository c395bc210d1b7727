"""Synthetic count tables, train/test splits and the natural classifier.

Random streams
--------------
All randomness comes from numpy's PCG64 bit generator.  The stream for
replicate ``r`` of a run seeded with ``seed`` is

    Generator(PCG64(SeedSequence(seed, spawn_key=(r,))))

so replicates are independent, reproducible, and can be generated in any
order or in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .tables import CountTable, JointTable, marginal_array

PRNG_ALGORITHM = "numpy.random.PCG64/SeedSequence(seed, spawn_key=(replicate,))"


def replicate_rng(seed: int, replicate: int = 0) -> np.random.Generator:
    """The documented substream for one replicate."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(replicate),))
    return np.random.Generator(np.random.PCG64(ss))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return replicate_rng(seed, 0)


@dataclass(frozen=True)
class SampleSpec:
    n: int
    seed: int = 0
    replicates: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ArgumentError(f"sample size must be >= 1, got {self.n}")
        if self.replicates < 1:
            raise ArgumentError(f"replicates must be >= 1, got {self.replicates}")


def draw_counts(q: JointTable, n: int, rng: np.random.Generator) -> CountTable:
    """One multinomial table: n categorical draws by inverse CDF over the flat index."""
    cdf = np.cumsum(q.values)
    cdf /= cdf[-1]
    u = rng.random(n)
    cells = np.searchsorted(cdf, u, side="right")
    return CountTable(q.schema, np.bincount(cells, minlength=q.schema.size))


def sample_counts(q: JointTable, spec: SampleSpec) -> list[CountTable]:
    """``spec.replicates`` independent multinomial samples of size ``spec.n``."""
    return [
        draw_counts(q, spec.n, replicate_rng(spec.seed, r))
        for r in range(spec.replicates)
    ]


def train_test_split(counts: CountTable, test_fraction: float, seed=0) -> tuple[CountTable, CountTable]:
    """Assign each record to the test side with probability ``test_fraction``.

    Done on counts: each cell's test count is Binomial(count, fraction), which
    given the test total is the multivariate hypergeometric split a record
    shuffle would produce.  ``seed`` is an int (stream for replicate 0) or a
    Generator.
    """
    if not 0 < test_fraction < 1:
        raise ArgumentError(f"test_fraction must lie in (0, 1), got {test_fraction!r}")
    if counts.total < 2:
        raise ArgumentError("need at least 2 records to split")
    rng = _rng(seed)
    test = rng.binomial(counts.counts, test_fraction)
    train = counts.counts - test
    return CountTable(counts.schema, train), CountTable(counts.schema, test)


FALLBACKS = ("response_marginal", "uniform")


def unseen_profiles(q_train: JointTable, f_test: JointTable) -> np.ndarray:
    """Boolean over predictor profiles (s, x): present in test, absent in train."""
    schema = q_train.schema
    preds = schema.names[1:]
    train = marginal_array(schema, q_train.tensor, preds)
    test = marginal_array(schema, f_test.tensor, preds)
    return (test > 0) & (train <= 0)


def natural_prediction(
    q_train: JointTable, f_test: JointTable, fallback: str = "response_marginal"
) -> JointTable:
    """p_pred(y, s, x) = q_train(y | s, x) * f_test(s, x).

    Predictor profiles seen in test but carrying no mass in ``q_train`` get
    ``q_train``'s response marginal (default) or a uniform label
    distribution; use :func:`unseen_profiles` to count them.
    """
    if q_train.schema != f_test.schema:
        raise ArgumentError("train and test tables use different schemas")
    if fallback not in FALLBACKS:
        raise ArgumentError(f"fallback must be one of {FALLBACKS}, got {fallback!r}")
    schema = q_train.schema
    q = q_train.tensor
    preds = schema.names[1:]
    q_pred = marginal_array(schema, q, preds)
    f_pred = marginal_array(schema, f_test.tensor, preds)
    seen = q_pred > 0
    cond = q / np.where(seen, q_pred, 1.0)[None]
    if fallback == "response_marginal":
        fb = marginal_array(schema, q, (schema.response_name,))
    else:
        fb = np.full(len(schema.response), 1.0 / len(schema.response))
    fb = fb.reshape((-1,) + (1,) * len(preds))
    cond = np.where(seen[None], cond, fb)
    return JointTable.from_tensor(schema, cond * f_pred[None])
