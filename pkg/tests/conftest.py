import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from purfit import CountTable, JointTable, Schema

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

ROOT = Path(__file__).resolve().parents[1]
ADULT_CSV = ROOT / "data" / "adult" / "adult.csv"


def make_schema(ny=2, ns=2, nx=2):
    """One feature per role, categories named by position."""
    return Schema.from_dict(
        {
            "response": {"name": "y", "categories": [str(i) for i in range(ny)]},
            "protected": [{"name": "s", "categories": "ab"[:ns] if ns <= 2 else [f"s{i}" for i in range(ns)]}],
            "unprotected": [{"name": "x", "categories": "uvw"[:nx] if nx <= 3 else [f"x{i}" for i in range(nx)]}],
        }
    )


@pytest.fixture
def t1_schema():
    return make_schema()


@pytest.fixture
def t1(t1_schema):
    # g(y, s) times 0.5 for each x; axes (y, s, x)
    g = np.array([[0.1, 0.4], [0.4, 0.1]])
    return JointTable.from_tensor(t1_schema, np.repeat(g[:, :, None] * 0.5, 2, axis=2))


@pytest.fixture(scope="session")
def adult_counts():
    from purfit.ingest import IngestConfig, ingest, shipped_config

    if not ADULT_CSV.exists():
        pytest.skip("adult CSV not present")
    counts, _ = ingest(ADULT_CSV, IngestConfig.load(shipped_config("adult")))
    return counts


def random_counts(rng, schema, n=None, alpha=1.0):
    n = int(rng.integers(50, 3000)) if n is None else n
    return CountTable(schema, rng.multinomial(n, rng.dirichlet(np.full(schema.size, alpha))))


def write_paygap_csv(path, years=(1981, 1990), n=3000, seed=0):
    """Synthetic file in the layout the shipped pay-gap config expects.

    Wages depend on gender and race so the raw data is visibly unfair.
    """
    import pandas as pd

    rng = np.random.default_rng(seed)
    frames = []
    for year in years:
        sex = rng.choice(["male", "female"], n)
        race = rng.choice(["white", "black", "hispanic"], n, p=[0.7, 0.15, 0.15])
        age = rng.integers(18, 65, n)
        edu = rng.choice(["less_than_hs", "hs", "some_college", "bachelor", "advanced"], n)
        sector = rng.choice(list("ABCDEFG"), n)
        base = 12 + 4 * np.searchsorted(["advanced", "bachelor"], edu) + 0.1 * (age - 18)
        wage = base * np.where(sex == "male", 1.4, 0.9) * np.where(race == "white", 1.2, 0.8)
        wage = wage * rng.lognormal(0, 0.3, n)
        frames.append(pd.DataFrame({
            "year": year, "realhrwage": wage.round(2), "sex": sex, "race": race,
            "age": age, "education": edu, "sector": sector,
        }))
    pd.concat(frames).to_csv(path, index=False)
    return path


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
