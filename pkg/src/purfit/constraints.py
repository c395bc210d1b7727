"""Parity, Utility and Realism marginal constraints.

A constraint is a feature subset plus a target table over that subset; the
binary coefficient matrix of the linear system is implicit in the subset
(each target cell sums the joint cells that agree with it).  Cells covered
by a zero target are pinned to zero and their rows dropped, which is the
reduced form of the system.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import ArgumentError, InfeasibleConstraintsError
from .tables import JointTable, MarginalTable, Schema, marginal_array

MODES = {
    "P": ("parity",),
    "PU": ("parity", "utility"),
    "PUR": ("parity", "utility", "realism"),
}
KINDS = ("parity", "utility", "realism")


@dataclass(frozen=True, eq=False)
class MarginalConstraint:
    kind: str
    features: tuple[str, ...]
    target: np.ndarray
    # False on target cells that are zero; those rows are not fitted
    active: np.ndarray

    def as_marginal(self, schema: Schema | None = None) -> MarginalTable:
        return MarginalTable(self.features, self.target, schema)


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    schema: Schema
    constraints: tuple[MarginalConstraint, ...]
    mode: str
    forced_zero: np.ndarray

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self):
        return len(self.constraints)

    def get(self, kind: str) -> MarginalConstraint:
        for c in self.constraints:
            if c.kind == kind:
                return c
        raise KeyError(kind)

    def reordered(self, kinds: Sequence[str]) -> "ConstraintSet":
        """Same constraints fitted in a different fixed order."""
        kinds = tuple(kinds)
        if sorted(kinds) != sorted(c.kind for c in self.constraints):
            raise ArgumentError(f"order {kinds} does not match constraints of {self.mode}")
        return replace(self, constraints=tuple(self.get(k) for k in kinds))

    @property
    def active_rows(self) -> int:
        return int(sum(c.active.sum() for c in self.constraints))


def _subsets(schema: Schema):
    y = (schema.response_name,)
    s = schema.protected_names
    x = schema.unprotected_names
    return {"parity": y + s, "utility": y + x, "realism": s + x}


def build_constraints(f: JointTable, mode: str = "PUR") -> ConstraintSet:
    """Parity (and Utility, Realism) targets computed from ``f``.

    The parity target is the outer product f(y) f(s); utility and realism
    targets are the (Y, X) and (S, X) marginals of ``f``.  The returned set is
    already reduced.
    """
    mode = mode.upper()
    if mode not in MODES:
        raise ArgumentError(f"mode must be one of {sorted(MODES)}, got {mode!r}")
    schema = f.schema
    subsets = _subsets(schema)
    tensor = f.tensor
    out = []
    for kind in MODES[mode]:
        feats = subsets[kind]
        if kind == "parity":
            fy = marginal_array(schema, tensor, (schema.response_name,))
            fs = marginal_array(schema, tensor, schema.protected_names)
            target = np.multiply.outer(fy, fs)
        else:
            target = marginal_array(schema, tensor, feats)
        target.setflags(write=False)
        out.append(MarginalConstraint(kind, feats, target, target > 0))
    cset = ConstraintSet(schema, tuple(out), mode, np.zeros(schema.size, dtype=bool))
    return reduce(cset)


def _covered(schema: Schema, c: MarginalConstraint, cells: np.ndarray) -> np.ndarray:
    """Broadcast a per-target-cell boolean to the joint cells it sums over."""
    axes = schema.axes(c.features)
    order = np.argsort(axes)
    arr = np.transpose(cells, order)
    shape = [1] * len(schema.shape)
    for a in sorted(axes):
        shape[a] = schema.shape[a]
    return np.broadcast_to(arr.reshape(shape), schema.shape).reshape(-1)


def reduce(cset: ConstraintSet, mask: np.ndarray | None = None) -> ConstraintSet:
    """Pin cells covered by zero targets (or excluded by ``mask``) to zero.

    Rows with zero target become inactive.  Raises InfeasibleConstraintsError
    when a positive target has all its cells pinned to zero.
    """
    schema = cset.schema
    forced = cset.forced_zero.copy()
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (schema.size,):
            raise ArgumentError(f"mask must have {schema.size} entries")
        forced |= ~mask
    constraints = []
    for c in cset.constraints:
        zero_rows = c.target == 0
        forced |= _covered(schema, c, zero_rows)
        constraints.append(replace(c, active=~zero_rows))
    # Every row keeps at least one free cell iff the system stays feasible
    # under non-negativity; marginal sums of the free-cell indicator tell us.
    free = (~forced).reshape(schema.shape).astype(np.int64)
    for c in constraints:
        reachable = marginal_array(schema, free, c.features)
        dead = c.active & (reachable == 0)
        if dead.any():
            idx = np.argwhere(dead)[0]
            cats = tuple(
                schema.feature(n).categories[i] for n, i in zip(c.features, idx)
            )
            raise InfeasibleConstraintsError(
                f"{c.kind} target at {dict(zip(c.features, cats))} is positive "
                f"but every joint cell it covers is pinned to zero"
            )
    forced.setflags(write=False)
    return replace(cset, constraints=tuple(constraints), forced_zero=forced)


def marginal_residuals(p: JointTable, cset: ConstraintSet) -> dict[str, float]:
    """Max absolute deviation on the active cells of each constraint."""
    out = {}
    for c in cset.constraints:
        m = marginal_array(p.schema, p.tensor, c.features)
        dev = np.abs(m - c.target)[c.active]
        out[c.kind] = float(dev.max()) if dev.size else 0.0
    return out


def residual(p: JointTable, cset: ConstraintSet) -> float:
    """Max-norm violation of the active constraint rows by ``p``."""
    res = marginal_residuals(p, cset)
    return max(res.values()) if res else 0.0


def coefficient_matrix(cset: ConstraintSet, active_only: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Materialize the binary matrix C and target vector f_m.

    Rows are enumerated constraint by constraint, target cells row-major
    within each.  Only meant for diagnostics and small-instance checks.
    """
    schema = cset.schema
    rows, rhs = [], []
    for c in cset.constraints:
        axes = schema.axes(c.features)
        coords = np.indices(schema.shape).reshape(len(schema.shape), -1)
        cell_of = np.ravel_multi_index(tuple(coords[a] for a in axes), c.target.shape)
        for k, t in enumerate(c.target.reshape(-1)):
            if active_only and not c.active.reshape(-1)[k]:
                continue
            rows.append((cell_of == k).astype(float))
            rhs.append(t)
    return np.array(rows), np.array(rhs)
