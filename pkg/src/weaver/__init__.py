"""Progressive sampling, the weaver's distribution W(n, p) and its limit."""

from .core import (
    ChoiceVector,
    TriangleRow,
    WeaverDistribution,
    cdf_eval,
    fold_factor,
    jump_histogram,
    mean,
    mean_decomposition,
    mode_indices,
    pmf_point,
    pmf_vector,
    reflect,
    support_point,
    triangle_row,
    variance,
    variance_per_bit,
    variance_ratio,
)
from .errors import DomainError, ResourceError, ValidationError, WeaverError
from .hem import DyadicRational, density_diagnostic, hem_cdf, hem_moments, interval_mass

__version__ = "0.1.0"
