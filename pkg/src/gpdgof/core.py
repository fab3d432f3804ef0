"""Generalized Pareto distribution functions, variate generation and
numerical checks of the two characterizations used by the tests.

The GPD here has location zero, scale ``theta > 0`` and shape ``beta``::

    F(x) = 1 - (1 + beta * x / theta) ** (-1 / beta)

with support ``[0, inf)`` for ``beta >= 0`` and ``[0, -theta / beta]`` for
``beta < 0``. ``beta = 0`` is the exponential limit.
"""

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .exceptions import GpdDomainError, QuadratureError

# |beta| below this uses the exponential closed forms.
BETA_ZERO_SWITCH = 1e-8

_QUAD_EPSABS = 1e-9


@dataclass(frozen=True)
class GpdParams:
    """Scale and shape of a generalized Pareto distribution."""

    theta: float
    beta: float

    def __post_init__(self):
        theta = float(self.theta)
        beta = float(self.beta)
        if not math.isfinite(theta) or theta <= 0:
            raise GpdDomainError(f"theta must be finite and > 0, got {self.theta!r}")
        if not math.isfinite(beta):
            raise GpdDomainError(f"beta must be finite, got {self.beta!r}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "beta", beta)

    @property
    def upper(self):
        """Upper end of the support (``inf`` when beta >= 0)."""
        if self.beta < 0:
            return -self.theta / self.beta
        return math.inf

    @property
    def is_exponential(self):
        return abs(self.beta) < BETA_ZERO_SWITCH

    def scaled(self, c):
        """Parameters of ``c * X`` for ``X ~ GPD(theta, beta)``."""
        return GpdParams(c * self.theta, self.beta)


def _as_array(x):
    arr = np.asarray(x, dtype=np.float64)
    return arr, arr.ndim == 0


def _check_support(x, p):
    if not np.all(np.isfinite(x)):
        raise GpdDomainError("x must be finite")
    if np.any(x < 0):
        raise GpdDomainError("x must be >= 0")
    if p.beta < 0 and np.any(x > p.upper):
        raise GpdDomainError(f"x exceeds the upper support bound {p.upper!r}")


def _log1p_ratio(x, p):
    # log(1 + beta * x / theta); equals -inf exactly at the upper bound
    z = p.beta * x / p.theta
    with np.errstate(divide="ignore"):
        return np.log1p(z)


def gpd_cdf(x, p):
    """Distribution function of GPD(theta, beta).

    Raises `GpdDomainError` for non-finite ``x`` or ``x`` outside the support.
    ``F(-theta/beta) = 1`` exactly when beta < 0.
    """
    arr, scalar = _as_array(x)
    _check_support(arr, p)
    if p.is_exponential:
        out = -np.expm1(-arr / p.theta)
    else:
        out = -np.expm1(-_log1p_ratio(arr, p) / p.beta)
        if p.beta < 0:
            out = np.where(arr >= p.upper, 1.0, out)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if scalar else out


def gpd_sf(x, p):
    """Survival function ``1 - F(x)``, computed without cancellation."""
    arr, scalar = _as_array(x)
    _check_support(arr, p)
    if p.is_exponential:
        out = np.exp(-arr / p.theta)
    else:
        out = np.exp(-_log1p_ratio(arr, p) / p.beta)
        if p.beta < 0:
            out = np.where(arr >= p.upper, 0.0, out)
    return float(out) if scalar else out


def gpd_pdf(x, p):
    """Density of GPD(theta, beta).

    At the upper bound of a bounded support the limit is returned: 0 for
    -1 < beta < 0 and ``1/theta`` for beta = -1. For beta < -1 the density
    diverges there and `GpdDomainError` is raised.
    """
    arr, scalar = _as_array(x)
    _check_support(arr, p)
    if p.is_exponential:
        out = np.exp(-arr / p.theta) / p.theta
    else:
        at_bound = (arr >= p.upper) if p.beta < 0 else np.zeros(arr.shape, bool)
        if p.beta < -1 and np.any(at_bound):
            raise GpdDomainError("density diverges at the upper bound for beta < -1")
        expo = -1.0 / p.beta - 1.0
        lr = _log1p_ratio(np.where(at_bound, 0.0, arr), p)
        out = np.exp(expo * lr) / p.theta
        if p.beta < 0:
            limit = 1.0 / p.theta if p.beta == -1 else 0.0
            out = np.where(at_bound, limit, out)
    return float(out) if scalar else out


def gpd_quantile(u, p):
    """Inverse of `gpd_cdf` for ``0 <= u < 1``."""
    arr, scalar = _as_array(u)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0) or np.any(arr >= 1):
        raise GpdDomainError("u must lie in [0, 1)")
    lsf = np.log1p(-arr)
    if p.is_exponential:
        out = -p.theta * lsf
    else:
        out = p.theta / p.beta * np.expm1(-p.beta * lsf)
        if p.beta < 0:
            out = np.minimum(out, p.upper)
    out = np.maximum(out, 0.0)
    return float(out) if scalar else out


def make_rng(seed):
    """Return a `numpy.random.Generator`; generators are passed through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def gpd_sample(n, p, seed=None):
    """Draw ``n`` i.i.d. GPD variates by inverse-transform sampling.

    ``seed`` may be an int, a `numpy.random.SeedSequence` or a ready
    `numpy.random.Generator`.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = make_rng(seed)
    return gpd_quantile(rng.random(n), p)


def gpd_hazard(x, p):
    """Hazard rate ``1 / (theta + beta*x)``."""
    arr, scalar = _as_array(x)
    denom = p.theta + p.beta * arr
    if np.any(arr < 0) or np.any(denom <= 0):
        raise GpdDomainError("x must lie in the interior of the support")
    out = 1.0 / denom
    return float(out) if scalar else out


def dynamic_survival_extropy(p, t):
    """Closed-form dynamic survival extropy ``(theta + beta*t) / (2(beta - 2))``.

    This is ``-1/2 * int_t^inf (S(x)/S(t))**2 dx`` for the GPD; it is finite
    only for beta < 2.
    """
    if p.beta >= 2:
        raise GpdDomainError("dynamic survival extropy diverges for beta >= 2")
    arr, scalar = _as_array(t)
    if np.any(arr < 0) or (p.beta < 0 and np.any(arr >= p.upper)):
        raise GpdDomainError("t must lie in the interior of the support")
    out = (p.theta + p.beta * arr) / (2.0 * (p.beta - 2.0))
    return float(out) if scalar else out


def _quad(func, a, b, what):
    val, err, info = integrate.quad(func, a, b, epsabs=_QUAD_EPSABS, epsrel=1e-12,
                                    limit=200, full_output=True)[:3]
    if err > 10 * _QUAD_EPSABS + 1e-12 * abs(val):
        raise QuadratureError(
            f"{what}: estimated error {err:.3g} exceeds tolerance "
            f"(value {val:.12g}, {info['neval']} evaluations)")
    return val


def dynamic_survival_extropy_numeric(p, t):
    """Quadrature evaluation of the dynamic survival extropy at ``t``.

    Integrates ``(S(x)/S(t))**2`` over ``x > t`` after mapping the residual
    lifetime to ``v = F_t(x) in [0, 1)``, so infinite supports need no
    truncation.
    """
    if p.beta >= 2:
        raise GpdDomainError("dynamic survival extropy diverges for beta >= 2")
    if t < 0 or (p.beta < 0 and t >= p.upper):
        raise GpdDomainError("t must lie in the interior of the support")
    # residual lifetime [X - t | X > t] is GPD(theta + beta*t, beta)
    res = GpdParams(p.theta + p.beta * t, p.beta)

    def integrand(v):
        # S^2 dx with x = Q(v), dx = dv / f(Q(v))
        x = gpd_quantile(v, res)
        return (1.0 - v) ** 2 / gpd_pdf(x, res)

    return -0.5 * _quad(integrand, 0.0, 1.0, "dynamic survival extropy")


def stein_cdf_oracle(t, p):
    """Evaluate ``E[(beta+1)/(theta+beta*X) * min(X, t)]`` by quadrature.

    For ``X ~ GPD(theta, beta)`` with beta > -1 the expectation equals
    ``F(t)``. For beta = -1 the density does not vanish at the upper bound and
    the bounded-support form adds ``t * f(upper-)``; that term is included so
    the oracle reproduces ``F(t)`` over the whole range beta >= -1.
    """
    if p.beta < -1:
        raise GpdDomainError("characterization requires beta >= -1")
    if t <= 0 or (p.beta < 0 and t >= p.upper):
        raise GpdDomainError("t must lie in the interior of the support")
    b1 = p.beta + 1.0

    def integrand(u):
        x = gpd_quantile(u, p)
        return b1 / (p.theta + p.beta * x) * min(x, t)

    # the kink of min(x, t) sits at u = F(t)
    ut = gpd_cdf(t, p)
    val = (_quad(integrand, 0.0, ut, "Stein oracle")
           + _quad(integrand, ut, 1.0, "Stein oracle"))
    if p.beta == -1:
        val += t * gpd_pdf(p.upper, p)
    return val


# -- alternative distributions ----------------------------------------------

_FAMILY_ARITY = {
    "Beta": 2,
    "Weibull": 2,
    "Gamma": 2,
    "GenGamma": 2,
    "AbsNormal": 2,
    "ChiSquare": 1,
    "AbsGumbel": 2,
    "Gpd": 2,
}

_FAMILY_ALIASES = {
    "beta": "Beta",
    "weibull": "Weibull",
    "gamma": "Gamma",
    "gengamma": "GenGamma",
    "gen-gamma": "GenGamma",
    "absnormal": "AbsNormal",
    "absnorm": "AbsNormal",
    "chisquare": "ChiSquare",
    "chisq": "ChiSquare",
    "absgumbel": "AbsGumbel",
    "gpd": "Gpd",
}


@dataclass(frozen=True)
class AltSpec:
    """An alternative distribution for power studies.

    Parameter conventions:

    ============  ==========================================
    Beta          (a, b) shapes
    Weibull       (shape, scale)
    Gamma         (shape, rate)
    GenGamma      (shape, power): ``Gamma(shape, 1) ** power``
    AbsNormal     (mean, sd), absolute value taken
    ChiSquare     (df,)
    AbsGumbel     (location, scale), absolute value taken
    Gpd           (theta, beta)
    ============  ==========================================
    """

    family: str
    params: tuple

    def __post_init__(self):
        fam = _FAMILY_ALIASES.get(str(self.family).lower())
        if fam is None:
            raise GpdDomainError(f"unknown family {self.family!r}")
        params = tuple(float(v) for v in self.params)
        if len(params) != _FAMILY_ARITY[fam]:
            raise GpdDomainError(
                f"{fam} takes {_FAMILY_ARITY[fam]} parameter(s), got {len(params)}")
        if not all(math.isfinite(v) for v in params):
            raise GpdDomainError("parameters must be finite")
        positive = {
            "Beta": (0, 1), "Weibull": (0, 1), "Gamma": (0, 1), "GenGamma": (0, 1),
            "AbsNormal": (1,), "ChiSquare": (0,), "AbsGumbel": (1,), "Gpd": (0,),
        }[fam]
        for i in positive:
            if params[i] <= 0:
                raise GpdDomainError(f"{fam} parameter {i + 1} must be > 0")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "params", params)

    @classmethod
    def parse(cls, text):
        """Parse ``"Family(p1,p2)"``; fractions such as ``1/3`` are accepted."""
        m = re.fullmatch(r"\s*([A-Za-z\-]+)\s*\(([^)]*)\)\s*", text)
        if m is None:
            raise GpdDomainError(f"cannot parse alternative {text!r}")
        values = []
        for tok in m.group(2).split(","):
            tok = tok.strip()
            if "/" in tok:
                num, den = tok.split("/", 1)
                values.append(float(num) / float(den))
            else:
                values.append(float(tok))
        return cls(m.group(1), tuple(values))

    def label(self):
        return f"{self.family}({','.join(f'{v:g}' for v in self.params)})"


def alt_sample(spec, n, seed=None):
    """Draw ``n`` positive variates from an alternative distribution."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = make_rng(seed)
    a = spec.params
    fam = spec.family
    if fam == "Beta":
        return rng.beta(a[0], a[1], n)
    if fam == "Weibull":
        return a[1] * rng.weibull(a[0], n)
    if fam == "Gamma":
        return rng.gamma(a[0], 1.0 / a[1], n)
    if fam == "GenGamma":
        return rng.gamma(a[0], 1.0, n) ** a[1]
    if fam == "AbsNormal":
        return np.abs(rng.normal(a[0], a[1], n))
    if fam == "ChiSquare":
        return rng.chisquare(a[0], n)
    if fam == "AbsGumbel":
        return np.abs(rng.gumbel(a[0], a[1], n))
    return gpd_sample(n, GpdParams(a[0], a[1]), rng)
