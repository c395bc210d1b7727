"""purfit: fair categorical distributions by information projection.

Removes the statistical dependence between a response and protected
attributes from a categorical dataset while keeping the response/unprotected
and protected/unprotected marginals of the data.  The fair distribution is
the KL-closest table to a reference (regularized empirical or uniform) that
meets the constraints, computed by Iterative Proportional Fitting.
"""

from .constraints import ConstraintSet, MarginalConstraint, build_constraints, reduce, residual
from .errors import (
    ArgumentError,
    EmptyDataError,
    IllPosedReferenceError,
    InfeasibleConstraintsError,
    IngestionError,
    NonConvergenceError,
    PurfitError,
    SchemaError,
    SupportError,
)
from .ipf import ProjectionDiagnostics, SolverOptions, ipf_steps, project, pythagorean_check
from .metrics import (
    DisparityReport,
    attributable_disparity,
    disparity_ratio,
    disparity_report,
    entropy,
    kl_divergence,
    parity_residual,
    utility_error,
)
from .reference import (
    RegularizationConfig,
    pseudo_count_regularize,
    support_mask,
    uniform_reference,
)
from .synthesis import (
    SampleSpec,
    natural_prediction,
    replicate_rng,
    sample_counts,
    train_test_split,
    unseen_profiles,
)
from .tables import (
    ConditionalTable,
    CountTable,
    Feature,
    JointTable,
    MarginalTable,
    Schema,
    conditional,
    marginalize,
    normalize,
    uniform_table,
)

__version__ = "0.1.0"
