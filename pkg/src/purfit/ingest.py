"""CSV ingestion: bind columns to schema features, bin values, tally counts.

An ingest config is a JSON document::

    {
      "missing_values": ["?", ""],
      "on_missing": "reject",          # or "error"
      "on_unmapped": "error",          # or "reject"
      "filters": {"year": ["1981"]},   # optional row selection
      "response":    {"name": ..., "column": ..., "rule": {...}},
      "protected":   [{"name": ..., "column": ..., "rule": {...}}, ...],
      "unprotected": [...],
      "analysis": {"reference_profile": [...], "positive_outcome": ...}
    }

Rules:

* ``{"type": "categorical", "categories": [...]}`` passes values through;
* ``{"type": "map", "map": {"category": ["raw", ...], ...}}`` merges raw
  values into categories (category order = key order);
* ``{"type": "bins", "edges": [lo, ..., hi], "labels": [...]}`` assigns
  numeric values to half-open intervals ``[edge_i, edge_i+1)``; a ``null``
  first or last edge is unbounded.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import IngestionError
from .tables import CountTable, Feature, Schema

POLICIES = ("reject", "error")


@dataclass(frozen=True)
class FeatureBinding:
    name: str
    column: str
    rule: dict

    @property
    def categories(self) -> tuple[str, ...]:
        kind = self.rule.get("type")
        if kind == "categorical":
            return tuple(str(c) for c in self.rule["categories"])
        if kind == "map":
            return tuple(self.rule["map"])
        if kind == "bins":
            return tuple(self.rule["labels"])
        raise IngestionError(f"feature {self.name!r}: unknown rule type {kind!r}")

    def validate(self):
        kind = self.rule.get("type")
        if kind == "map":
            seen = {}
            for cat, raws in self.rule["map"].items():
                for raw in raws:
                    if raw in seen:
                        raise IngestionError(
                            f"feature {self.name!r}: raw value {raw!r} mapped to "
                            f"both {seen[raw]!r} and {cat!r}"
                        )
                    seen[raw] = cat
        elif kind == "bins":
            edges = self.rule["edges"]
            if len(self.rule["labels"]) != len(edges) - 1:
                raise IngestionError(f"feature {self.name!r}: need len(edges) - 1 labels")
            inner = [e for e in edges if e is not None]
            if any(e is None for e in edges[1:-1]) or np.any(np.diff(inner) <= 0):
                raise IngestionError(f"feature {self.name!r}: bin edges must increase")
        self.categories  # raises on unknown rule types

    def codes(self, raw: pd.Series) -> np.ndarray:
        """Category code per value, -1 where the value cannot be mapped."""
        kind = self.rule["type"]
        if kind == "categorical":
            lookup = {c: i for i, c in enumerate(self.categories)}
        elif kind == "map":
            lookup = {
                str(r): i for i, raws in enumerate(self.rule["map"].values()) for r in raws
            }
        else:
            values = pd.to_numeric(raw, errors="coerce").to_numpy(dtype=float)
            edges = np.array(
                [-np.inf if e is None and i == 0 else np.inf if e is None else e
                 for i, e in enumerate(self.rule["edges"])],
                dtype=float,
            )
            idx = np.searchsorted(edges, values, side="right") - 1
            bad = np.isnan(values) | (idx < 0) | (idx >= len(edges) - 1)
            return np.where(bad, -1, idx)
        return raw.map(lookup).fillna(-1).to_numpy(dtype=np.int64)


@dataclass(frozen=True)
class IngestConfig:
    response: FeatureBinding
    protected: tuple[FeatureBinding, ...]
    unprotected: tuple[FeatureBinding, ...] = ()
    missing_values: tuple[str, ...] = ("", "?", "NA")
    on_missing: str = "reject"
    on_unmapped: str = "error"
    filters: dict = field(default_factory=dict)
    analysis: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, d: dict) -> "IngestConfig":
        def binding(b):
            return FeatureBinding(b["name"], b.get("column", b["name"]), b["rule"])

        try:
            cfg = cls(
                response=binding(d["response"]),
                protected=tuple(binding(b) for b in d["protected"]),
                unprotected=tuple(binding(b) for b in d.get("unprotected", ())),
                missing_values=tuple(d.get("missing_values", ("", "?", "NA"))),
                on_missing=d.get("on_missing", "reject"),
                on_unmapped=d.get("on_unmapped", "error"),
                filters={k: [str(v) for v in vs] for k, vs in d.get("filters", {}).items()},
                analysis=dict(d.get("analysis", {})),
                source=d,
            )
        except (KeyError, TypeError) as exc:
            raise IngestionError(f"malformed ingest config: missing {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "IngestConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def with_filters(self, **filters) -> "IngestConfig":
        d = dict(self.source)
        d["filters"] = {**d.get("filters", {}), **filters}
        return IngestConfig.from_dict(d)

    @property
    def bindings(self) -> tuple[FeatureBinding, ...]:
        return (self.response, *self.protected, *self.unprotected)

    def validate(self):
        for pol in (self.on_missing, self.on_unmapped):
            if pol not in POLICIES:
                raise IngestionError(f"policy must be one of {POLICIES}, got {pol!r}")
        columns = [b.column for b in self.bindings]
        if len(set(columns)) != len(columns):
            raise IngestionError("every feature must bind a distinct CSV column")
        for b in self.bindings:
            b.validate()

    def schema(self) -> Schema:
        def feat(b):
            return Feature(b.name, b.categories)

        return Schema(
            feat(self.response),
            tuple(feat(b) for b in self.protected),
            tuple(feat(b) for b in self.unprotected),
        )

    def digest(self) -> str:
        blob = json.dumps(self.source, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class IngestReport:
    records_read: int
    accepted: int
    rejected_missing: int
    rejected_unmapped: int
    filtered_out: int = 0
    category_counts: dict = field(default_factory=dict)

    @property
    def rejected(self) -> int:
        return self.rejected_missing + self.rejected_unmapped

    def to_dict(self) -> dict:
        return {
            "records_read": self.records_read,
            "filtered_out": self.filtered_out,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "rejected_missing": self.rejected_missing,
            "rejected_unmapped": self.rejected_unmapped,
            "category_counts": self.category_counts,
        }


def read_csv(path) -> pd.DataFrame:
    try:
        return pd.read_csv(
            path, dtype=str, keep_default_na=False, skipinitialspace=True
        )
    except FileNotFoundError:
        raise
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise IngestionError(f"{path}: cannot parse CSV: {exc}") from exc


def ingest(csv_path, config: IngestConfig) -> tuple[CountTable, IngestReport]:
    """Tally the records of ``csv_path`` into a CountTable over ``config.schema()``."""
    df = read_csv(csv_path)
    return ingest_frame(df, config, source=str(csv_path))


def ingest_frame(df: pd.DataFrame, config: IngestConfig, source="<frame>"):
    schema = config.schema()
    total_read = len(df)
    for col, allowed in config.filters.items():
        if col not in df.columns:
            raise IngestionError(f"{source}: filter column {col!r} not in header")
        df = df[df[col].str.strip().isin(allowed)]
    filtered_out = total_read - len(df)
    missing_cols = [b.column for b in config.bindings if b.column not in df.columns]
    if missing_cols:
        raise IngestionError(f"{source}: columns {missing_cols} not in header")

    # header is line 1, so data row i sits on line i + 2
    lines = df.index.to_numpy() + 2
    codes, missing, unmapped = [], np.zeros(len(df), bool), np.zeros(len(df), bool)
    for b in config.bindings:
        raw = df[b.column].str.strip()
        miss = raw.isin(config.missing_values).to_numpy()
        c = b.codes(raw)
        bad = (c < 0) & ~miss
        if config.on_missing == "error" and miss.any():
            i = int(np.argmax(miss))
            raise IngestionError(
                f"{source}, line {lines[i]}: missing value in column {b.column!r}"
            )
        if config.on_unmapped == "error" and bad.any():
            i = int(np.argmax(bad))
            raise IngestionError(
                f"{source}, line {lines[i]}: value {raw.iloc[i]!r} in column "
                f"{b.column!r} maps to no category of {b.name!r}"
            )
        missing |= miss
        unmapped |= bad
        codes.append(c)

    unmapped &= ~missing
    keep = ~(missing | unmapped)
    if not keep.any():
        raise IngestionError(f"{source}: no record maps onto the schema")
    flat = np.ravel_multi_index(tuple(c[keep] for c in codes), schema.shape)
    counts = CountTable(schema, np.bincount(flat, minlength=schema.size))
    cat_counts = {
        b.name: {
            cat: int(n)
            for cat, n in zip(b.categories, np.bincount(c[keep], minlength=len(b.categories)))
        }
        for b, c in zip(config.bindings, codes)
    }
    report = IngestReport(
        records_read=total_read,
        accepted=int(keep.sum()),
        rejected_missing=int(missing.sum()),
        rejected_unmapped=int(unmapped.sum()),
        filtered_out=filtered_out,
        category_counts=cat_counts,
    )
    return counts, report


def shipped_config(name: str) -> Path:
    """Path of a config bundled with the package (``adult`` or ``paygap``)."""
    path = Path(__file__).parent / "configs" / f"{name}.json"
    if not path.exists():
        raise FileNotFoundError(path)
    return path
