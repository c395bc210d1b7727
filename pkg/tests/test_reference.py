import numpy as np
import pytest
from hypothesis import given, strategies as st

from purfit import (
    CountTable,
    JointTable,
    RegularizationConfig,
    normalize,
    pseudo_count_regularize,
    support_mask,
    uniform_reference,
    uniform_table,
)
from purfit.errors import ArgumentError
from conftest import make_schema

FULL = RegularizationConfig(lam=1.0, support_mode="full_cartesian")


def test_pseudo_counts_direct_evaluation():
    # 4 cells: Y={0,1} x S={a,b}, no unprotected features
    schema = make_schema(2, 2, 2)
    schema = type(schema)(schema.response, schema.protected)
    f = JointTable(schema, [1, 0, 0, 0])
    q = pseudo_count_regularize(f, 10, FULL)
    expected = np.array([1.1, 0.1, 0.1, 0.1]) / 1.4
    np.testing.assert_allclose(q.values, expected, rtol=1e-15)
    np.testing.assert_allclose(q.values, [0.785714, 0.071429, 0.071429, 0.071429], atol=5e-7)


def test_zero_lambda_is_identity(t1):
    assert pseudo_count_regularize(t1, 10, RegularizationConfig(0.0)) is t1


@given(st.floats(1e-6, 100.0), st.integers(1, 10**6))
def test_uniform_is_fixed_point(lam, n):
    u = uniform_table(make_schema(2, 2, 3))
    q = pseudo_count_regularize(u, n, RegularizationConfig(lam, "full_cartesian"))
    np.testing.assert_allclose(q.values, u.values, rtol=1e-14)


@given(st.integers(0, 2**32 - 1), st.sampled_from(["full_cartesian",
       "observed_predictors_all_labels", "observed_only"]))
def test_regularized_is_strictly_positive_on_support(seed, mode):
    rng = np.random.default_rng(seed)
    schema = make_schema(3, 2, 3)
    counts = rng.multinomial(30, rng.dirichlet(np.full(schema.size, 0.3)))
    f = normalize(CountTable(schema, counts))
    try:
        mask = support_mask(f, mode)
    except ArgumentError:
        return
    q = pseudo_count_regularize(f, 30, RegularizationConfig(0.5, mode))
    assert np.all(q.values[mask] > 0)
    assert np.all(q.values[~mask] == 0)
    assert abs(q.values.sum() - 1) <= 1e-12


def test_lambda_interpolates_towards_uniform_on_support(t1):
    """Distance to the data grows and distance to uniform shrinks with lambda."""
    u = uniform_table(t1.schema)
    lams = [0.0, 1e-3, 1e-1, 1.0, 10.0, 1e3]
    qs = [pseudo_count_regularize(t1, 10, RegularizationConfig(l, "full_cartesian")) for l in lams]
    to_f = [np.abs(q.values - t1.values).max() for q in qs]
    to_u = [np.abs(q.values - u.values).max() for q in qs]
    assert to_f == sorted(to_f)
    assert to_u == sorted(to_u, reverse=True)
    # and each cell moves monotonically
    cells = np.array([q.values for q in qs])
    d = np.diff(cells, axis=0)
    assert np.all((d >= 0).all(axis=0) | (d <= 0).all(axis=0))


def test_support_modes(t1_schema):
    counts = np.zeros(8, int)
    counts[t1_schema.index_of(("0", "a", "u"))] = 3
    counts[t1_schema.index_of(("1", "b", "v"))] = 2
    counts[t1_schema.index_of(("1", "a", "v"))] = 1
    f = normalize(CountTable(t1_schema, counts))
    assert support_mask(f, "full_cartesian").sum() == 8
    assert support_mask(f, "observed_only").sum() == 3
    # 3 observed (s, x) profiles times 2 labels
    m = support_mask(f, "observed_predictors_all_labels")
    assert m.sum() == 6
    np.testing.assert_allclose(uniform_reference(t1_schema, m).values[m], 1 / 6)
    with pytest.raises(ArgumentError):
        support_mask(f, "everything")


def test_support_mask_rejects_unreachable_group(t1_schema):
    counts = np.zeros(8, int)
    counts[t1_schema.index_of(("0", "a", "u"))] = 3
    counts[t1_schema.index_of(("1", "a", "v"))] = 3
    f = normalize(CountTable(t1_schema, counts))
    with pytest.raises(ArgumentError, match="protected profile"):
        support_mask(f, "observed_predictors_all_labels")


def test_uniform_reference(t1_schema):
    np.testing.assert_array_equal(uniform_reference(t1_schema).values, 0.125)
    mask = np.array([1, 1, 1, 1, 1, 0, 0, 0], bool)
    u = uniform_reference(t1_schema, mask)
    np.testing.assert_allclose(u.values, np.where(mask, 0.2, 0.0))
    with pytest.raises(ArgumentError):
        uniform_reference(t1_schema, np.zeros(8, bool))


def test_config_validation():
    with pytest.raises(ArgumentError):
        RegularizationConfig(-1.0)
    with pytest.raises(ArgumentError):
        RegularizationConfig(1.0, "nope")
