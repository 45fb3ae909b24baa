"""
Tail-postcolored long-run variance estimation.

Kernel LRV estimators miss the autocovariances their lag window cuts
off. Tail postcoloring multiplies the kernel estimate by
eta = v(theta) / M_{ell,K}(theta) computed from a fitted parametric
coloring model, restoring the neglected tail while leaving the kernel
estimate itself untouched.
"""
from .core import (
    AutocovTable,
    DegenerateSeriesError,
    KernelSpec,
    bartlett_kernel,
    get_kernel,
    lugsail_kernel,
    sample_autocov,
    sample_cross_autocov,
    sample_cross_autocovs,
    truncated_kernel,
)
from .models import (
    AR1Model,
    ARMA11Model,
    ARModel,
    FitWarning,
    MAModel,
    VAR1Model,
    fit_ar1,
    fit_arma11,
    fit_arp,
    fit_maq,
    fit_var1,
    model_autocov,
    model_lrv,
    model_M,
    model_vp,
)
from .estimators import (
    LrvEstimate,
    WeightScheme,
    adaptive_weights,
    lrv_multi_model,
    lrv_parametric_ar1,
    lrv_prewhitened_ar1,
    lrv_tail_finite_sample,
    lrv_tail_postcolored,
    lrv_tail_postcolored_general,
    lrv_unadjusted,
)
from .bandwidth import (
    asymptotic_profile,
    ell_andrews_ar1,
    ell_tail,
    improvement_region_ar1,
    xi1_nonparametric,
    xi1_parametric,
)
from .multivariate import (
    CovEstimate,
    cov_prewhitened_var1,
    cov_tail_postcolored,
    cov_unadjusted,
    eigenvalue_floor,
    ell_tail_multivariate,
)
from .spectral import SpectralEstimate, spectral_tail_postcolored, spectral_unadjusted
from .applications import (
    RegressionProblem,
    StoppingState,
    WaldResult,
    fixed_width_should_stop,
    hac_wald_test,
    mcmc_monitor,
    ols_fit,
)
from .auto import estimate_lrv

__version__ = "0.1.0"

__all__ = [
    "AutocovTable",
    "DegenerateSeriesError",
    "KernelSpec",
    "bartlett_kernel",
    "get_kernel",
    "lugsail_kernel",
    "sample_autocov",
    "sample_cross_autocov",
    "sample_cross_autocovs",
    "truncated_kernel",
    "AR1Model",
    "ARMA11Model",
    "ARModel",
    "FitWarning",
    "MAModel",
    "VAR1Model",
    "fit_ar1",
    "fit_arma11",
    "fit_arp",
    "fit_maq",
    "fit_var1",
    "model_autocov",
    "model_lrv",
    "model_M",
    "model_vp",
    "LrvEstimate",
    "WeightScheme",
    "adaptive_weights",
    "lrv_multi_model",
    "lrv_parametric_ar1",
    "lrv_prewhitened_ar1",
    "lrv_tail_finite_sample",
    "lrv_tail_postcolored",
    "lrv_tail_postcolored_general",
    "lrv_unadjusted",
    "asymptotic_profile",
    "ell_andrews_ar1",
    "ell_tail",
    "improvement_region_ar1",
    "xi1_nonparametric",
    "xi1_parametric",
    "CovEstimate",
    "cov_prewhitened_var1",
    "cov_tail_postcolored",
    "cov_unadjusted",
    "eigenvalue_floor",
    "ell_tail_multivariate",
    "SpectralEstimate",
    "spectral_tail_postcolored",
    "spectral_unadjusted",
    "RegressionProblem",
    "StoppingState",
    "WaldResult",
    "fixed_width_should_stop",
    "hac_wald_test",
    "mcmc_monitor",
    "ols_fit",
    "estimate_lrv",
]
