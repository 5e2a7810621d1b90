"""Hermite and Laguerre function evaluation, spectral-function bounds,
random Hermite series and Lᵖ norm experiments."""
from .errors import (
    BudgetExceeded,
    ConfigError,
    Degenerate,
    DomainError,
    HermRandError,
    HTooSmall,
    SearchFailed,
)
from .fitting import RateFit, fit_rate
from .lp_analysis import (
    alpha_star,
    estrad_prediction,
    lower_bound_certificate,
    lp_norm_radial,
    lp_norms_radial,
    lp_rate,
    square_function_lp,
    square_function_sweep,
)
from .random_series import (
    RandomLaw,
    bernstein_exponent,
    bernstein_probe,
    draw_noise,
    modulus_of_continuity,
    sample_partial_sum,
    salem_zygmund_experiment,
    sup_norm,
)
from .special_fn import (
    erdelyi_envelope,
    hermite_functions,
    hermite_tensor,
    laguerre_functions,
    radial_hermite,
    szeg_lower_region,
)
from .spectral import (
    BucketConstant,
    CoefficientRule,
    Explicit,
    HolderBlocks,
    PowerLaw,
    SpectralLayout,
    check_condition,
    hs_norm,
    karadzhov_ratios,
    spectral_function,
    zs_norm,
)

__version__ = "0.1.0"
