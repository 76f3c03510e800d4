"""Symmetric nonnegative matrix trifactorization ``A = B C B^T``."""

__version__ = "0.1.0"

from .certificate import Certificate, boundary_certificate, check_movable, find_move_direction
from .completion import (
    CompletionResult,
    GlueInput,
    completion_lower_bound,
    fit_completion,
    rank1_glue,
    rank1_glue_rank1,
    schur_completion,
)
from .constructions import (
    NmfPair,
    bipartite_factor,
    direct_sum,
    edm_factor,
    edm_factor_any,
    edm_matrix,
    power_factor,
    principal_subfactor,
    rank2_factor,
    separable_columns,
    separable_factor,
    sum_factor,
    symmetrization_factor,
)
from .errors import InvariantError, NotSeparableError, RankError, ReducibleError, ShapeError, SNTError
from .matcore import (
    Inertia,
    SpectralData,
    SymMatrix,
    Trifactor,
    VerifyReport,
    apply_scaling,
    eigh,
    identity_factor,
    inertia,
    is_irreducible,
    numerical_rank,
    perron,
    spectral_split,
    support_pattern,
    verify_trifactorization,
)
from .perturbation import (
    PerronSimilarity,
    PerturbResult,
    extract_similarity,
    min_alpha,
    min_beta,
    optimize_S,
    perturb_factorization,
)
from .search import BoundReport, FitOptions, boolean_rank, bounds_report, fit_trifactorization, snt_upper_bound
