"""JSON documents for tables, constraint targets and run manifests.

A table document looks like::

    {"kind": "joint" | "counts", "schema": {...}, "layout": "row-major",
     "values": [...]}

Floats are written with Python's shortest round-trip repr, so loading a
saved table reproduces the exact float64 values.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .constraints import ConstraintSet
from .errors import ArgumentError
from .tables import CountTable, JointTable, Schema

LAYOUT = "row-major"


def table_to_dict(table) -> dict:
    if isinstance(table, JointTable):
        kind, values = "joint", [float(v) for v in table.values]
    elif isinstance(table, CountTable):
        kind, values = "counts", [int(v) for v in table.counts]
    else:
        raise ArgumentError(f"cannot serialize {type(table).__name__}")
    return {
        "kind": kind,
        "schema": table.schema.to_dict(),
        "layout": LAYOUT,
        "values": values,
    }


def table_from_dict(doc: dict):
    if doc.get("layout", LAYOUT) != LAYOUT:
        raise ArgumentError(f"unsupported layout {doc.get('layout')!r}")
    schema = Schema.from_dict(doc["schema"])
    if doc["kind"] == "joint":
        return JointTable(schema, doc["values"])
    if doc["kind"] == "counts":
        return CountTable(schema, doc["values"])
    raise ArgumentError(f"unknown table kind {doc['kind']!r}")


def dump_json(obj, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=False)
        fh.write("\n")


def save_table(table, path) -> None:
    dump_json(table_to_dict(table), path)


def load_table(path):
    with open(path) as fh:
        return table_from_dict(json.load(fh))


def constraints_to_dict(cset: ConstraintSet) -> dict:
    return {
        "mode": cset.mode,
        "schema": cset.schema.to_dict(),
        "constraints": [
            {
                "kind": c.kind,
                "features": list(c.features),
                "shape": list(c.target.shape),
                "target": [float(v) for v in c.target.reshape(-1)],
            }
            for c in cset.constraints
        ],
        "forced_zero": [int(i) for i in cset.forced_zero.nonzero()[0]],
    }


@dataclass
class RunManifest:
    """Everything that determines the bytes of a run's outputs."""

    command: str
    config_hash: str = ""
    seed: int | None = None
    replicates: int | None = None
    solver: dict = field(default_factory=dict)
    lam: float | None = None
    support_mode: str | None = None
    constraint_mode: str | None = None
    reference: str | None = None
    extra: dict = field(default_factory=dict)
    software_version: str = ""
    prng: str = ""

    def __post_init__(self):
        from . import __version__
        from .synthesis import PRNG_ALGORITHM

        self.software_version = self.software_version or __version__
        self.prng = self.prng or PRNG_ALGORITHM

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hash"] = self.digest()
        return d

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def save(self, path) -> None:
        dump_json(self.to_dict(), path)
