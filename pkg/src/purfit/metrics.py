"""Divergences and fairness diagnostics.  All logarithms are natural."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import entr, rel_entr

from .errors import ArgumentError
from .tables import JointTable, MarginalTable, Schema, conditional, marginal_array


def _as_array(t) -> np.ndarray:
    if isinstance(t, JointTable):
        return t.values
    if isinstance(t, MarginalTable):
        return t.values.reshape(-1)
    return np.asarray(t, dtype=np.float64).reshape(-1)


def kl_divergence(p, q) -> float:
    """D(p || q) = sum p log(p / q), with 0 log 0 = 0.

    Returns ``inf`` when ``q`` vanishes somewhere ``p`` does not.
    """
    p, q = _as_array(p), _as_array(q)
    if p.shape != q.shape:
        raise ArgumentError(f"shape mismatch {p.shape} vs {q.shape}")
    return float(rel_entr(p, q).sum())


def entropy(p) -> float:
    """Shannon entropy in nats."""
    return float(entr(_as_array(p)).sum())


def _y_given_s(p: JointTable) -> np.ma.MaskedArray:
    """p(y | s) with axes (y, flattened s); zero-mass s masked."""
    schema = p.schema
    cond = conditional(p, (schema.response_name,), schema.protected_names)
    ny = len(schema.response)
    return cond.masked().reshape(ny, -1)


def _s_index(schema: Schema, s0) -> int:
    if isinstance(s0, (int, np.integer)):
        return int(s0)
    return schema.protected_index(s0)


@dataclass(frozen=True)
class DisparityReport:
    """Attributable disparity p(y|s) - p(y|s0) and, for a designated
    positive outcome, the ratio p(y+|s) / p(y+|s0).

    ``differences`` is a masked array indexed (y, s) with s the flat protected
    profile index; ``ratios`` is indexed by s.  Masked entries belong to
    protected profiles without mass.
    """

    schema: Schema
    reference_profile: tuple[str, ...]
    differences: np.ma.MaskedArray
    positive: str | None = None
    ratios: np.ma.MaskedArray | None = None

    def rows(self):
        """Yield ``(metric, y, s_profile, value)`` with ``None`` for undefined."""
        s_profiles = self.schema.profiles(self.schema.protected_names)
        for iy, y in enumerate(self.schema.response.categories):
            for js, s in enumerate(s_profiles):
                v = self.differences[iy, js]
                yield "attributable_disparity", y, s, None if v is np.ma.masked else float(v)
        if self.ratios is not None:
            for js, s in enumerate(s_profiles):
                v = self.ratios[js]
                yield "disparity_ratio", self.positive, s, None if v is np.ma.masked else float(v)


def attributable_disparity(p: JointTable, s0) -> DisparityReport:
    """p(y|s) - p(y|s0) for every label y and protected profile s."""
    schema = p.schema
    js0 = _s_index(schema, s0)
    cond = _y_given_s(p)
    if np.ma.getmaskarray(cond)[0, js0]:
        raise ArgumentError(f"reference profile {s0!r} has zero mass")
    diff = cond - cond[:, js0 : js0 + 1]
    diff[:, js0] = 0.0
    return DisparityReport(schema, schema.profiles(schema.protected_names)[js0], diff)


def disparity_ratio(p: JointTable, y_pos, s0) -> np.ma.MaskedArray:
    """p(y_pos | s) / p(y_pos | s0) per flat protected profile s."""
    schema = p.schema
    iy = schema.response.code(y_pos)
    js0 = _s_index(schema, s0)
    cond = _y_given_s(p)
    denom = cond[iy, js0]
    if denom is np.ma.masked or denom <= 0:
        raise ArgumentError(f"p({y_pos!r} | {s0!r}) is zero; ratio undefined")
    ratios = cond[iy] / denom
    ratios[js0] = 1.0
    return ratios


def disparity_report(p: JointTable, s0, y_pos=None) -> DisparityReport:
    report = attributable_disparity(p, s0)
    if y_pos is None:
        return report
    return DisparityReport(
        report.schema,
        report.reference_profile,
        report.differences,
        str(y_pos),
        disparity_ratio(p, y_pos, s0),
    )


def parity_residual(p: JointTable) -> float:
    """max over (y, s) of |p(y|s) - p(y)|, skipping protected profiles without mass."""
    schema = p.schema
    cond = _y_given_s(p)
    py = marginal_array(schema, p.tensor, (schema.response_name,))
    dev = np.abs(cond - py[:, None])
    if dev.count() == 0:
        return 0.0
    return float(dev.max())


def utility_error(f_test: JointTable, p_pred: JointTable) -> float:
    """KL divergence of the predicted (Y, X) marginal from the test one."""
    if f_test.schema != p_pred.schema:
        raise ArgumentError("tables use different schemas")
    schema = f_test.schema
    feats = (schema.response_name, *schema.unprotected_names)
    return kl_divergence(
        marginal_array(schema, f_test.tensor, feats),
        marginal_array(schema, p_pred.tensor, feats),
    )
