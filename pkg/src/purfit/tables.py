"""Schemas, profile enumeration and the dense probability/count tables.

Every table stores its M cells in one flat float64 (or int64) array laid out
row-major over the features in declaration order: response first, then the
protected features, then the unprotected ones.  ``table.tensor`` exposes the
same memory with one axis per feature, which is what marginalization and the
IPF sweeps operate on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, EmptyDataError, SchemaError

NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class Feature:
    """A categorical feature with an ordered, finite domain."""

    name: str
    categories: tuple[str, ...]

    def __post_init__(self):
        cats = tuple(str(c) for c in self.categories)
        object.__setattr__(self, "categories", cats)
        if len(cats) < 2:
            raise SchemaError(f"feature {self.name!r} needs at least 2 categories")
        if len(set(cats)) != len(cats):
            raise SchemaError(f"feature {self.name!r} has duplicate categories")

    def __len__(self):
        return len(self.categories)

    def code(self, category) -> int:
        try:
            return self.categories.index(str(category))
        except ValueError:
            raise SchemaError(
                f"unknown category {category!r} for feature {self.name!r}"
            ) from None


@dataclass(frozen=True)
class Schema:
    """Response, protected and unprotected features of a categorical dataset."""

    response: Feature
    protected: tuple[Feature, ...]
    unprotected: tuple[Feature, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "protected", tuple(self.protected))
        object.__setattr__(self, "unprotected", tuple(self.unprotected))
        if not self.protected:
            raise SchemaError("at least one protected feature is required")
        names = self.names
        if len(set(names)) != len(names):
            raise SchemaError(f"feature names must be unique, got {names}")

    @classmethod
    def from_dict(cls, doc: dict) -> "Schema":
        def feat(d):
            return Feature(d["name"], tuple(d["categories"]))

        return cls(
            feat(doc["response"]),
            tuple(feat(d) for d in doc["protected"]),
            tuple(feat(d) for d in doc.get("unprotected", ())),
        )

    def to_dict(self) -> dict:
        def feat(f):
            return {"name": f.name, "categories": list(f.categories)}

        return {
            "response": feat(self.response),
            "protected": [feat(f) for f in self.protected],
            "unprotected": [feat(f) for f in self.unprotected],
        }

    @property
    def features(self) -> tuple[Feature, ...]:
        return (self.response, *self.protected, *self.unprotected)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    @property
    def response_name(self) -> str:
        return self.response.name

    @property
    def protected_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.protected)

    @property
    def unprotected_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.unprotected)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.features)

    @property
    def size(self) -> int:
        """Total cell count M = |Y| |S| |X|."""
        return int(np.prod(self.shape))

    def feature(self, name: str) -> Feature:
        for f in self.features:
            if f.name == name:
                return f
        raise SchemaError(f"unknown feature {name!r}")

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaError(f"unknown feature {name!r}") from None

    def axes(self, names: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.axis(n) for n in names)

    def shape_of(self, names: Iterable[str]) -> tuple[int, ...]:
        return tuple(len(self.feature(n)) for n in names)

    def index_of(self, profile: Sequence) -> int:
        """Flat index of a full profile given as category names in schema order."""
        if len(profile) != len(self.features):
            raise SchemaError(
                f"profile has {len(profile)} entries, schema has {len(self.features)}"
            )
        codes = tuple(f.code(c) for f, c in zip(self.features, profile))
        return int(np.ravel_multi_index(codes, self.shape))

    def profile_of(self, index: int) -> tuple[str, ...]:
        if not 0 <= index < self.size:
            raise SchemaError(f"flat index {index} outside [0, {self.size})")
        codes = np.unravel_index(int(index), self.shape)
        return tuple(f.categories[c] for f, c in zip(self.features, codes))

    def profiles(self, names: Sequence[str] | None = None) -> list[tuple[str, ...]]:
        """All profiles over ``names`` (default: every feature) in row-major order."""
        feats = self.features if names is None else [self.feature(n) for n in names]
        shape = tuple(len(f) for f in feats)
        out = []
        for codes in np.ndindex(*shape):
            out.append(tuple(f.categories[c] for f, c in zip(feats, codes)))
        return out

    def protected_index(self, s_profile: Sequence) -> int:
        """Flat index of a protected profile within the S sub-product."""
        if isinstance(s_profile, str):
            s_profile = (s_profile,)
        if len(s_profile) != len(self.protected):
            raise SchemaError(
                f"protected profile needs {len(self.protected)} entries, got {s_profile!r}"
            )
        codes = tuple(f.code(c) for f, c in zip(self.protected, s_profile))
        return int(np.ravel_multi_index(codes, self.shape_of(self.protected_names)))


def _check_subset(schema: Schema, subset: Sequence[str], allow_empty=False):
    subset = tuple(subset)
    if not subset and not allow_empty:
        raise ArgumentError("feature subset must not be empty")
    if len(set(subset)) != len(subset):
        raise ArgumentError(f"feature subset has duplicates: {subset}")
    for name in subset:
        if name not in schema.names:
            raise ArgumentError(f"unknown feature {name!r}")
    return subset


def _frozen(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class JointTable:
    """A normalized probability distribution over all M profiles."""

    schema: Schema
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64).reshape(-1)
        if vals.size != self.schema.size:
            raise ArgumentError(
                f"expected {self.schema.size} values, got {vals.size}"
            )
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ArgumentError("probabilities must be finite and non-negative")
        total = vals.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ArgumentError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "values", _frozen(vals))

    @property
    def tensor(self) -> np.ndarray:
        return self.values.reshape(self.schema.shape)

    @classmethod
    def from_tensor(cls, schema: Schema, tensor) -> "JointTable":
        return cls(schema, np.asarray(tensor).reshape(-1))

    def __getitem__(self, profile) -> float:
        return float(self.values[self.schema.index_of(profile)])

    def __repr__(self):
        return f"JointTable(shape={self.schema.shape}, names={self.schema.names})"


@dataclass(frozen=True, eq=False)
class CountTable:
    """Non-negative integer counts over all M profiles."""

    schema: Schema
    counts: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.counts).reshape(-1)
        cnt = raw.astype(np.int64)
        if cnt.size != self.schema.size:
            raise ArgumentError(f"expected {self.schema.size} counts, got {cnt.size}")
        if not np.array_equal(cnt, raw) or np.any(cnt < 0):
            raise ArgumentError("counts must be non-negative integers")
        object.__setattr__(self, "counts", _frozen(cnt))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def tensor(self) -> np.ndarray:
        return self.counts.reshape(self.schema.shape)

    def __repr__(self):
        return f"CountTable(N={self.total}, shape={self.schema.shape})"


@dataclass(frozen=True, eq=False)
class MarginalTable:
    """Values over the Cartesian product of an ordered feature subset.

    ``values`` has one axis per entry of ``features``, in that order.
    """

    features: tuple[str, ...]
    values: np.ndarray
    schema: Schema | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(
            self, "values", _frozen(np.array(self.values, dtype=np.float64))
        )
        if self.values.ndim != len(self.features):
            raise ArgumentError("marginal values need one axis per feature")

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def __getitem__(self, profile) -> float:
        if isinstance(profile, str):
            profile = (profile,)
        if self.schema is None:
            return float(self.values[tuple(profile)])
        codes = tuple(self.schema.feature(n).code(c) for n, c in zip(self.features, profile))
        return float(self.values[codes])


@dataclass(frozen=True, eq=False)
class ConditionalTable:
    """p(target | given) with an explicit definedness mask.

    ``values`` has axes ``target + given``.  ``defined`` has axes ``given``
    and is False where the conditioning profile carries no mass; the
    corresponding slices of ``values`` hold 0 and must not be read as
    probabilities.
    """

    target: tuple[str, ...]
    given: tuple[str, ...]
    values: np.ndarray
    defined: np.ndarray

    def masked(self) -> np.ma.MaskedArray:
        """``values`` as a masked array, undefined slices masked out."""
        ntarget = len(self.target)
        mask = np.broadcast_to(~self.defined, self.values.shape[ntarget:])
        mask = np.broadcast_to(mask, self.values.shape)
        return np.ma.MaskedArray(self.values, mask=mask.copy())


def _source(table):
    """Return (schema-like feature names, dense tensor) for joint or marginal input."""
    if isinstance(table, (JointTable, CountTable)):
        return table.schema.names, table.tensor, table.schema
    if isinstance(table, MarginalTable):
        return table.features, table.values, table.schema
    raise ArgumentError(f"cannot marginalize a {type(table).__name__}")


def marginal_array(schema: Schema, tensor: np.ndarray, subset: Sequence[str]) -> np.ndarray:
    """Sum ``tensor`` (axes in schema order) down to ``subset``, axes in subset order."""
    keep = schema.axes(subset)
    drop = tuple(i for i in range(tensor.ndim) if i not in keep)
    out = tensor.sum(axis=drop)
    # remaining axes are in ascending schema order; permute to subset order
    remaining = sorted(keep)
    return np.transpose(out, [remaining.index(a) for a in keep])


def marginalize(table, subset: Sequence[str]) -> MarginalTable:
    """Sum a joint (or marginal) table down to the features in ``subset``."""
    names, tensor, schema = _source(table)
    subset = tuple(subset)
    if not subset:
        raise ArgumentError("feature subset must not be empty")
    if len(set(subset)) != len(subset):
        raise ArgumentError(f"feature subset has duplicates: {subset}")
    for n in subset:
        if n not in names:
            raise ArgumentError(f"unknown feature {n!r}")
    keep = [names.index(n) for n in subset]
    drop = tuple(i for i in range(len(names)) if i not in keep)
    out = np.asarray(tensor, dtype=np.float64).sum(axis=drop)
    remaining = sorted(keep)
    out = np.transpose(out, [remaining.index(a) for a in keep])
    return MarginalTable(subset, out, schema)


def conditional(table: JointTable, target: Sequence[str], given: Sequence[str]) -> ConditionalTable:
    """p(target | given); zero-mass conditioning profiles are flagged undefined."""
    schema = table.schema
    target = _check_subset(schema, target)
    given = _check_subset(schema, given, allow_empty=True)
    overlap = set(target) & set(given)
    if overlap:
        raise ArgumentError(f"target and given overlap on {sorted(overlap)}")
    joint = marginal_array(schema, table.tensor, target + given)
    if given:
        norm = marginal_array(schema, table.tensor, given)
    else:
        norm = np.asarray(table.values.sum())
    defined = norm > 0
    safe = np.where(defined, norm, 1.0)
    values = np.where(defined, joint / safe, 0.0)
    return ConditionalTable(target, given, _frozen(values), _frozen(np.asarray(defined)))


def normalize(counts: CountTable) -> JointTable:
    """Relative frequencies of a count table."""
    n = counts.total
    if n < 1:
        raise EmptyDataError("cannot normalize a count table with N = 0")
    return JointTable(counts.schema, counts.counts / n)


def uniform_table(schema: Schema) -> JointTable:
    return JointTable(schema, np.full(schema.size, 1.0 / schema.size))
