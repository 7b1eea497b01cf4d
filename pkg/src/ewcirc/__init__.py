"""Extended wrapped Cauchy distributions on the circle and the sphere."""

from .core import (
    EwcParams,
    WcParams,
    angular_difference,
    cdf,
    ewc_density,
    ewc_density_complex,
    interval_probability,
    log_density,
    normalize_angle,
    normalizing_constant,
    wc_density,
)
from .fitting import Dataset, FitResult, fit_ewc, fit_wc, load_csv, loglik
from .mobius import MobiusMap
from .moments import circular_summary, first_moment, skewness, trig_moment
from .sampling import McmcConfig, SampleBatch, sample, sample_wc
from .shape import is_symmetric, modality, stationary_coeffs
from .sphere import SphereParams, sphere_density

__version__ = "0.1.0"
