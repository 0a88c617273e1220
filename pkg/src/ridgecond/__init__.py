"""Ridge-type covariance estimation and the spectral condition number plot."""

__version__ = "0.1.0"

from .condpath import (
    INFINITE_LOSS,
    ConditionPath,
    Norm,
    PenaltyGrid,
    acceleration,
    condition_path,
    contaminated_eigenvalues,
    digits_lost,
    equicorr_condition,
    equicorr_eigenvalues,
    equicorrelation,
    find_knee,
    one_norm_condition,
    spectral_condition,
)
from .errors import *  # noqa: F401,F403
from .estimators import (
    EstimatorKind,
    TargetKind,
    TargetSpec,
    is_rotation_equivariant,
    precision_of,
    ridge_alt,
    ridge_alt_eigmap,
    ridge_arch1,
    ridge_arch2,
    ridge_estimate,
    target_matrix,
)
from .ingest import Dataset, cov_ml, cov_unbiased, read_csv, read_matrix, read_table, to_correlation
from .selection import CVConfig, CVResult, brent_minimize, cv_score, neg_loglik, select_penalty
from .spectra import SpectralDecomp, decompose, matrix_sqrt, reconstruct
