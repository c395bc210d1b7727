"""Reference distributions for the projection: pseudo-count regularized
empirical frequencies, or the uniform (maximum-entropy) table."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .tables import JointTable, Schema, marginal_array

SUPPORT_MODES = ("full_cartesian", "observed_predictors_all_labels", "observed_only")

DEFAULT_LAMBDA = 1e-4
DEFAULT_SUPPORT_MODE = "observed_predictors_all_labels"


@dataclass(frozen=True)
class RegularizationConfig:
    """Pseudo-count strength ``lam`` and which cells receive pseudo-counts.

    ``support_mode`` is one of

    * ``"full_cartesian"``: every cell of Y x S x X,
    * ``"observed_predictors_all_labels"``: every label y paired with each
      predictor profile (s, x) observed in the data,
    * ``"observed_only"``: only cells observed in the data.
    """

    lam: float = DEFAULT_LAMBDA
    support_mode: str = DEFAULT_SUPPORT_MODE

    def __post_init__(self):
        if not self.lam >= 0:
            raise ArgumentError(f"lambda must be >= 0, got {self.lam!r}")
        if self.support_mode not in SUPPORT_MODES:
            raise ArgumentError(
                f"support_mode must be one of {SUPPORT_MODES}, got {self.support_mode!r}"
            )


def support_mask(f: JointTable, mode: str = DEFAULT_SUPPORT_MODE) -> np.ndarray:
    """Boolean admissibility indicator per flat index, derived from ``f``.

    Raises ArgumentError when some label or some protected profile would be
    left without an admissible cell.
    """
    schema = f.schema
    if mode == "full_cartesian":
        mask = np.ones(schema.size, dtype=bool)
    elif mode == "observed_only":
        mask = f.values > 0
    elif mode == "observed_predictors_all_labels":
        predictors = marginal_array(schema, f.tensor, schema.names[1:]) > 0
        mask = np.broadcast_to(predictors, schema.shape).reshape(-1).copy()
    else:
        raise ArgumentError(f"unknown support mode {mode!r}")
    _check_mask(schema, mask)
    return mask


def _check_mask(schema: Schema, mask: np.ndarray):
    if mask.shape != (schema.size,):
        raise ArgumentError(f"mask must have {schema.size} entries")
    if not mask.any():
        raise ArgumentError("support mask has no admissible cell")
    m = mask.reshape(schema.shape).astype(float)
    per_label = marginal_array(schema, m, (schema.response_name,))
    per_group = marginal_array(schema, m, schema.protected_names)
    if np.any(per_label == 0):
        raise ArgumentError("some response label has no admissible cell")
    if np.any(per_group == 0):
        raise ArgumentError("some protected profile has no admissible cell")


def pseudo_count_regularize(
    f: JointTable, n: int, config: RegularizationConfig | None = None
) -> JointTable:
    """Add ``lam / n`` to every admissible cell and renormalize.

    With K admissible cells each cell becomes ``(f + lam/n) / (1 + K lam/n)``;
    for the full Cartesian support K = |Y||S||X|.  Cells outside the support
    stay exactly zero.
    """
    config = config or RegularizationConfig()
    if n < 1:
        raise ArgumentError(f"sample size must be >= 1, got {n}")
    if config.lam == 0:
        return f
    mask = support_mask(f, config.support_mode)
    k = int(mask.sum())
    eps = config.lam / n
    vals = np.where(mask, (f.values + eps) / (1.0 + k * eps), 0.0)
    return JointTable(f.schema, vals)


def uniform_reference(schema: Schema, mask: np.ndarray | None = None) -> JointTable:
    """Equal probability on every admissible cell."""
    if mask is None:
        mask = np.ones(schema.size, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (schema.size,) or not mask.any():
        raise ArgumentError("uniform reference needs a non-empty mask over all cells")
    return JointTable(schema, mask / mask.sum())
