"""Information projection by Iterative Proportional Fitting.

Starting from the reference table, each constraint in turn rescales the
iterate so that its marginal matches the target exactly:

    p(cell) <- p(cell) * target(m) / p_marginal(m)

for every joint cell summed by marginal cell m.  Cycling the constraints in a
fixed order converges to the distribution in the constraint set with the
smallest KL divergence from the reference.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .constraints import ConstraintSet, MarginalConstraint, reduce, residual
from .errors import (
    ArgumentError,
    IllPosedReferenceError,
    InfeasibleConstraintsError,
    NonConvergenceError,
    SupportError,
)
from .metrics import kl_divergence
from .tables import JointTable, marginal_array

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_CYCLES = 10_000


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = DEFAULT_TOLERANCE
    max_cycles: int = DEFAULT_MAX_CYCLES
    record_trace: bool = False

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ArgumentError(f"tolerance must be > 0, got {self.tolerance!r}")
        if self.max_cycles < 1:
            raise ArgumentError(f"max_cycles must be >= 1, got {self.max_cycles!r}")


@dataclass(frozen=True)
class ProjectionDiagnostics:
    converged: bool
    cycles_used: int
    final_residual: float
    kl_to_reference: float
    trace: tuple[float, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "cycles_used": self.cycles_used,
            "final_residual": self.final_residual,
            "kl_to_reference": self.kl_to_reference,
            "trace": list(self.trace),
        }


def prepare(reference: JointTable, cset: ConstraintSet) -> ConstraintSet:
    """Reduce ``cset`` against the support of ``reference``.

    Cells where the reference vanishes can never gain mass under
    multiplicative updates, so they are treated as structural zeros.  If that
    leaves a positive target unreachable the reference is ill-posed.
    """
    if reference.schema != cset.schema:
        raise ArgumentError("reference and constraint set use different schemas")
    try:
        return reduce(cset, mask=reference.values > 0)
    except InfeasibleConstraintsError as exc:
        raise IllPosedReferenceError(
            f"reference has zeros on cells the constraints require: {exc}"
        ) from exc


def _fit(p: np.ndarray, schema, c: MarginalConstraint) -> None:
    """Rescale tensor ``p`` in place so its ``c.features`` marginal hits the target."""
    axes = schema.axes(c.features)
    current = marginal_array(schema, p, c.features)
    if np.any(c.active & (current <= 0)):
        raise IllPosedReferenceError(
            f"{c.kind} marginal vanished on a cell with positive target"
        )
    ratio = np.where(c.active, c.target / np.where(c.active, current, 1.0), 0.0)
    order = np.argsort(axes)
    shape = [1] * p.ndim
    for a in sorted(axes):
        shape[a] = p.shape[a]
    p *= np.transpose(ratio, order).reshape(shape)


def ipf_steps(reference: JointTable, cset: ConstraintSet) -> Iterator[tuple[MarginalConstraint, np.ndarray]]:
    """Yield ``(constraint, iterate)`` after every single constraint fit.

    The iterate is the solver's working tensor, updated in place; copy it if
    it has to outlive the next step.  The generator never stops on its own.
    """
    reduced = prepare(reference, cset)
    schema = reduced.schema
    p = np.where(reduced.forced_zero, 0.0, reference.values).reshape(schema.shape)
    while True:
        for c in reduced.constraints:
            _fit(p, schema, c)
            yield c, p


def project(
    reference: JointTable,
    cset: ConstraintSet,
    options: SolverOptions | None = None,
) -> tuple[JointTable, ProjectionDiagnostics]:
    """I-projection of ``reference`` onto the set described by ``cset``.

    Convergence is declared when, after a full cycle, the largest deviation
    of any active marginal cell from its target is at most
    ``options.tolerance``.  Raises NonConvergenceError (with diagnostics and
    the last iterate) when ``max_cycles`` is exhausted first.
    """
    options = options or SolverOptions()
    schema = reference.schema
    reduced = prepare(reference, cset)
    steps = ipf_steps(reference, reduced)
    n_fits = len(reduced.constraints)
    trace = []
    res = np.inf
    cycles = 0
    p = None
    while cycles < options.max_cycles:
        for _ in range(n_fits):
            _, p = next(steps)
        cycles += 1
        res = _cycle_residual(p, schema, reduced)
        if options.record_trace:
            trace.append(res)
        if res <= options.tolerance:
            break
    if p is None:
        # no constraints at all: the reference is its own projection
        p = reference.tensor.copy()
        res = 0.0
    # targets sum to one only up to rounding
    q = JointTable(schema, p.reshape(-1) / p.sum())
    diag = ProjectionDiagnostics(
        converged=bool(res <= options.tolerance),
        cycles_used=cycles,
        final_residual=float(res),
        kl_to_reference=kl_divergence(q, reference),
        trace=tuple(trace),
    )
    logger.debug(
        "IPF %s: %d cycles, residual %.3g", reduced.mode, cycles, diag.final_residual
    )
    if not diag.converged:
        raise NonConvergenceError(
            f"IPF did not reach tolerance {options.tolerance:g} in "
            f"{options.max_cycles} cycles (residual {res:.3g}); the constraints "
            f"may be infeasible",
            diagnostics=diag,
            iterate=q,
        )
    return q, diag


def _cycle_residual(p, schema, cset: ConstraintSet) -> float:
    res = 0.0
    for c in cset.constraints:
        m = marginal_array(schema, p, c.features)
        dev = np.abs(m - c.target)[c.active]
        if dev.size:
            res = max(res, float(dev.max()))
    return res


def pythagorean_check(p: JointTable, q: JointTable, q0: JointTable) -> float:
    """Signed defect D(p||q0) - D(p||q) - D(q||q0).

    For ``p`` in the constraint set and ``q`` the projection of ``q0`` the
    defect vanishes.
    """
    terms = (kl_divergence(p, q0), kl_divergence(p, q), kl_divergence(q, q0))
    if not all(np.isfinite(terms)):
        raise SupportError(f"infinite KL term in Pythagorean check: {terms}")
    return terms[0] - terms[1] - terms[2]


__all__ = [
    "SolverOptions",
    "ProjectionDiagnostics",
    "project",
    "ipf_steps",
    "prepare",
    "pythagorean_check",
    "residual",
]
