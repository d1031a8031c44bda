"""Lower and upper bounds on Wyner's common information for bivariate sources."""
from .bounds import (
    agc_lower,
    agc_upper,
    gaussian_wyner,
    kl_form_lower,
    lemma1_exact,
    relaxed_gaussian_wyner,
    theorem1_lower,
    theorem3_lower,
    vector_lower,
)
from .core import BoundReport, Correlation, Covariance2, Gamma, correlation_of, psd_check
from .entropy import joint_entropy, marginal_entropy, mutual_information
from .evaluate import evaluate_bounds
from .models import (
    AdditiveGaussianChannelModel,
    BivariateLaplace,
    DiscretePair,
    GaussianPair,
    model_from_spec,
)
from .quadrature import QuadratureConfig

__version__ = "0.1.0"
