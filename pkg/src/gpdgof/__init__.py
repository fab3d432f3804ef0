"""Goodness-of-fit tests for the generalized Pareto distribution.

Extropy-based U-statistic tests for negative shape (including right-censored
data) and a Stein-identity test for non-negative shape, with Monte Carlo
critical values and bootstrap calibration.
"""

from .core import AltSpec, GpdParams, gpd_cdf, gpd_pdf, gpd_quantile, gpd_sample, gpd_sf
from .datasets import load_bilbao, load_ozone
from .estimate import (CensoredSample, estimate_aml, estimate_censored, estimate_cmm,
                       estimate_mom, kappa_from_beta)
from .estimators import CensoredGoodnessOfFit, GPDEstimator, GPDGoodnessOfFit
from .gof import (TestReport, censored_test, delta_n_censored, delta_n_hat, delta_n_star,
                  delta_p_hat, test_negative, test_positive)
from .montecarlo import bootstrap_a1, build_table, critical_value, power_study

__version__ = "0.1.0"

__all__ = [
    "AltSpec", "CensoredGoodnessOfFit", "CensoredSample", "GPDEstimator",
    "GPDGoodnessOfFit", "GpdParams", "TestReport", "bootstrap_a1", "build_table",
    "censored_test", "critical_value", "delta_n_censored", "delta_n_hat", "delta_n_star",
    "delta_p_hat", "estimate_aml", "estimate_censored", "estimate_cmm", "estimate_mom",
    "gpd_cdf", "gpd_pdf", "gpd_quantile", "gpd_sample", "gpd_sf", "kappa_from_beta",
    "load_bilbao", "load_ozone", "power_study", "test_negative", "test_positive",
]
