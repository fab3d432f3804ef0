"""Parameter estimators for complete and right-censored GPD samples."""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_delta, check_sample
from .core import GpdParams
from .exceptions import DegenerateSampleError, GpdDomainError, InestimableTailError


def kappa_from_beta(beta):
    """Proportionality constant ``1 / (2 (beta - 2))`` of the extropy
    characterization; negative for every beta < 2."""
    if beta >= 2:
        raise GpdDomainError(f"kappa is undefined for beta >= 2, got {beta}")
    return 1.0 / (2.0 * (beta - 2.0))


def estimate_cmm(s):
    """Combined ML / moment estimator for negative shape.

    ``beta = mean / (mean - max)`` and ``theta = -beta * max``, so the fitted
    upper bound ``-theta/beta`` equals the sample maximum.
    """
    x = check_sample(s, min_size=2)
    mean = math.fsum(x) / x.shape[0]
    mx = float(x.max())
    if not mean < mx:
        raise DegenerateSampleError("all observations are equal")
    beta = mean / (mean - mx)
    return GpdParams(-beta * mx, beta)


def default_k_upper(n):
    """Default number of upper order statistics for AML: ``ceil(0.2 n)``."""
    return max(1, math.ceil(0.2 * n))


def aml_shape(s, k_upper=None):
    """Shape part of the asymptotic ML estimator.

    Mean of the ``k`` largest log order statistics minus the ``k``-th largest.
    Always >= 0.
    """
    x = np.sort(check_sample(s, min_size=2))
    n = x.shape[0]
    k = default_k_upper(n) if k_upper is None else int(k_upper)
    if not 1 <= k < n:
        raise ValueError(f"k_upper must satisfy 1 <= k < n = {n}, got {k}")
    w = np.log(x)
    top = w[n - k:]
    return math.fsum(top) / k - float(w[n - k])


def estimate_aml(s, k_upper=None):
    """Asymptotic maximum likelihood estimator (positive shape branch).

    Parameters
    ----------
    s : array-like
        Positive observations.
    k_upper : int, optional
        Number of upper order statistics, ``1 <= k_upper < n``. Defaults to
        ``ceil(0.2 n)``.

    Returns
    -------
    GpdParams

    Raises
    ------
    DegenerateSampleError
        When the top ``k_upper`` values coincide; the shape estimate is then 0
        and the scale estimate collapses to 0.
    """
    x = np.sort(check_sample(s, min_size=2))
    n = x.shape[0]
    k = default_k_upper(n) if k_upper is None else int(k_upper)
    beta = aml_shape(x, k)
    if beta <= 0:
        raise DegenerateSampleError(
            "top order statistics are tied; AML scale estimate is zero")
    theta = beta * math.exp(math.log(x[n - k]) + beta * math.log(k / n))
    return GpdParams(theta, beta)


def estimate_mom(s):
    """Method-of-moments estimator using the ``n - 1`` sample variance.

    The moments it matches exist only for shape < 0.5. The estimate itself is
    always below 0.5, so heavier tails cannot be detected from its value:
    data from such a GPD yield a finite but meaningless estimate.
    """
    x = check_sample(s, min_size=2)
    mean = math.fsum(x) / x.shape[0]
    var = float(np.var(x, ddof=1))
    if var <= 0:
        raise DegenerateSampleError("sample variance is zero")
    ratio = mean * mean / var
    beta = 0.5 * (1.0 - ratio)
    theta = 0.5 * mean * (1.0 + ratio)
    return GpdParams(theta, beta)


# -- censored data -----------------------------------------------------------

@dataclass(frozen=True)
class CensoredSample:
    """Right-censored observations ``(min(X, C), 1{X <= C})``."""

    times: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        t = check_sample(self.times, min_size=1, name="times")
        d = check_delta(self.delta, t.shape[0])
        t.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "delta", d)

    @classmethod
    def from_records(cls, records):
        records = list(records)
        return cls(np.array([r[0] for r in records], float),
                   np.array([r[1] for r in records]))

    @classmethod
    def uncensored(cls, times):
        t = np.asarray(times, float)
        return cls(t, np.ones(t.shape[0], np.int8))

    def __len__(self):
        return self.times.shape[0]

    def scaled(self, c):
        return CensoredSample(c * self.times, self.delta)

    @property
    def n_events(self):
        return int(self.delta.sum())


@dataclass(frozen=True)
class StepSurvival:
    """Right-continuous nonincreasing step function starting at 1."""

    jump_times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        jt = np.asarray(self.jump_times, float)
        v = np.asarray(self.values, float)
        if jt.shape != v.shape:
            raise ValueError("jump_times and values must have equal length")
        if np.any(np.diff(jt) <= 0):
            raise ValueError("jump_times must be strictly increasing")
        if np.any(v < 0) or np.any(v > 1) or np.any(np.diff(v) > 0):
            raise ValueError("values must be nonincreasing within [0, 1]")
        jt.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "jump_times", jt)
        object.__setattr__(self, "values", v)

    def _lookup(self, t, side):
        arr = np.asarray(t, float)
        idx = np.searchsorted(self.jump_times, arr, side=side)
        out = np.concatenate(([1.0], self.values))[idx]
        return float(out) if arr.ndim == 0 else out

    def __call__(self, t):
        """Value at ``t`` (jumps at ``t`` included)."""
        return self._lookup(t, "right")

    def value_at_minus(self, t):
        """Left limit at ``t`` (jumps at ``t`` excluded)."""
        return self._lookup(t, "left")


def kaplan_meier_censoring(cs):
    """Kaplan-Meier estimate of the censoring survival function.

    The censoring records (``delta == 0``) are the events; observed lifetimes
    act as censored for this estimator. Tied times form one risk-set step.
    """
    t = cs.times
    cens = cs.delta == 0
    if not np.any(cens):
        return StepSurvival(np.empty(0), np.empty(0))
    uniq, inverse = np.unique(t, return_inverse=True)
    n_cens = np.bincount(inverse, weights=cens, minlength=uniq.shape[0])
    n_at = np.bincount(inverse, minlength=uniq.shape[0])
    at_risk = n_at[::-1].cumsum()[::-1]
    mask = n_cens > 0
    factors = 1.0 - n_cens[mask] / at_risk[mask]
    return StepSurvival(uniq[mask], np.cumprod(factors))


def ipcw_weights(cs, km=None, at="left", floor=None):
    """Inverse-probability-of-censoring weights ``delta_i / K_c(X_i)``.

    Parameters
    ----------
    cs : CensoredSample
    km : StepSurvival, optional
        Precomputed censoring survival estimate.
    at : {"left", "right"}
        Evaluate the censoring survival at the left limit ``K_c(X_i-)``
        (default) or at ``K_c(X_i)``.
    floor : float, optional
        Replace zero survival at uncensored times by this value instead of
        raising `InestimableTailError`. The Kaplan-Meier estimate built from
        ``cs`` itself is always positive there; zeros can only come from a
        supplied ``km``.
    """
    km = kaplan_meier_censoring(cs) if km is None else km
    if at == "left":
        k = km.value_at_minus(cs.times)
    elif at == "right":
        k = km(cs.times)
    else:
        raise ValueError(f"at must be 'left' or 'right', got {at!r}")
    k = np.atleast_1d(k)
    event = cs.delta == 1
    bad = event & (k <= 0)
    if np.any(bad):
        if floor is None:
            raise InestimableTailError(
                f"{int(bad.sum())} uncensored observation(s) have zero censoring "
                "survival; pass floor=... to use a floored weight")
        k = np.where(bad, floor, k)
    w = np.zeros(k.shape[0])
    w[event] = 1.0 / k[event]
    return w


@dataclass(frozen=True)
class CensoredEstimates:
    beta_c: float
    theta_c: float
    k_c: float
    mean_c: float

    @property
    def params(self):
        return GpdParams(self.theta_c, self.beta_c)


def estimate_censored(cs, at="left", floor=None):
    """IPCW analogue of the CMM estimator for right-censored data.

    ``mean_c = mean(X_i delta_i / K_c(X_i))``, ``beta_c = mean_c / (mean_c - max)``,
    ``theta_c = -beta_c * max`` and ``k_c = 1 / (2 (beta_c - 2))``. Without
    censoring this is exactly `estimate_cmm` plus `kappa_from_beta`.
    """
    if cs.n_events == 0:
        raise DegenerateSampleError("no uncensored observations")
    w = ipcw_weights(cs, at=at, floor=floor)
    return _censored_from_weights(cs.times, w)


def _censored_from_weights(t, w):
    n = t.shape[0]
    mean_c = math.fsum(t * w) / n
    mx = float(t.max())
    if mean_c >= mx:
        # weights can push the mean past the maximum under heavy censoring
        raise DegenerateSampleError(
            f"weighted mean {mean_c:.6g} is not below the sample maximum {mx:.6g}")
    beta = mean_c / (mean_c - mx)
    return CensoredEstimates(beta, -beta * mx, kappa_from_beta(beta), mean_c)
