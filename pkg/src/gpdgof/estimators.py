"""scikit-learn style wrappers around the estimation and testing functions."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_sample
from .core import gpd_cdf
from .estimate import CensoredSample, estimate_aml, estimate_cmm, estimate_mom
from .gof import REJECT, censored_test, test_negative, test_positive

_FITTERS = {
    "cmm": lambda x, k: estimate_cmm(x),
    "aml": estimate_aml,
    "mom": lambda x, k: estimate_mom(x),
}


class GPDEstimator(BaseEstimator, TransformerMixin):
    """Fit GPD parameters; `transform` maps data through the fitted CDF.

    Parameters
    ----------
    method : {"cmm", "aml", "mom"}
        ``"cmm"`` always gives a negative shape and ``"aml"`` a positive one.
    k_upper : int, optional
        Upper order statistics used by ``"aml"``; ``ceil(0.2 n)`` when None.

    Attributes
    ----------
    params_ : GpdParams
    theta_, beta_ : float
    n_samples_ : int
    """

    def __init__(self, method="cmm", k_upper=None):
        self.method = method
        self.k_upper = k_upper

    def fit(self, X, y=None):
        if self.method not in _FITTERS:
            raise ValueError(f"method must be one of {sorted(_FITTERS)}, got {self.method!r}")
        x = check_sample(X, min_size=2)
        self.params_ = _FITTERS[self.method](x, self.k_upper)
        self.theta_ = self.params_.theta
        self.beta_ = self.params_.beta
        self.n_samples_ = x.shape[0]
        return self

    def transform(self, X):
        """Probability integral transform ``F(x)`` under the fitted GPD."""
        check_is_fitted(self, "params_")
        x = check_sample(X, min_size=1)
        out = gpd_cdf(x, self.params_)
        return out.reshape(np.shape(X))


class GPDGoodnessOfFit(BaseEstimator):
    """Bootstrap goodness-of-fit test for the GPD.

    Parameters
    ----------
    case : {"negative", "positive"}
        Shape branch under test.
    alpha : float
        Significance level.
    n_bootstrap : int
        Bootstrap replications.
    bootstrap : {"parametric", "a1"}
    sided : {"two-sided", "upper"}
        Negative case only.
    k_upper : int, optional
        AML order statistics for the positive case.
    random_state : int, optional
        Master seed; a random one is drawn and stored in ``report_`` if None.
    n_jobs : int, optional

    Attributes
    ----------
    report_ : TestReport
    statistic_, p_value_ : float
    reject_ : bool
    """

    def __init__(self, case="negative", alpha=0.05, n_bootstrap=10_000,
                 bootstrap="parametric", sided="two-sided", k_upper=None,
                 random_state=None, n_jobs=None):
        self.case = case
        self.alpha = alpha
        self.n_bootstrap = n_bootstrap
        self.bootstrap = bootstrap
        self.sided = sided
        self.k_upper = k_upper
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        if self.case == "negative":
            report = test_negative(X, self.alpha, self.n_bootstrap, self.random_state,
                                   self.bootstrap, self.sided, self.n_jobs)
        elif self.case == "positive":
            report = test_positive(X, self.alpha, self.n_bootstrap, self.random_state,
                                   self.bootstrap, self.k_upper, self.n_jobs)
        else:
            raise ValueError(f"case must be 'negative' or 'positive', got {self.case!r}")
        _store_report(self, report)
        return self


def _store_report(est, report):
    est.report_ = report
    est.statistic_ = report.statistic
    est.p_value_ = report.p_value
    est.reject_ = report.decision == REJECT


class CensoredGoodnessOfFit(BaseEstimator):
    """Asymptotic normal test for right-censored data with negative shape.

    ``fit(X, delta)`` takes observed times and event indicators (1 = observed,
    0 = censored). Attributes match `GPDGoodnessOfFit`.
    """

    def __init__(self, alpha=0.05, variance_form="consistent"):
        self.alpha = alpha
        self.variance_form = variance_form

    def fit(self, X, delta=None):
        x = check_sample(X, min_size=3)
        d = np.ones(x.shape[0], np.int8) if delta is None else delta
        _store_report(self, censored_test(CensoredSample(x, d), self.alpha, self.variance_form))
        return self


__all__ = ["CensoredGoodnessOfFit", "GPDEstimator", "GPDGoodnessOfFit"]
