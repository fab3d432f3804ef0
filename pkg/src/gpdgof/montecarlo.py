"""Monte Carlo critical values, bootstrap calibration and power studies.

Every replication ``r`` draws from its own counter-based stream keyed by
``(seed, stream, r)``, so results do not depend on the number of worker
processes or on scheduling order. Replicate statistics are collected in
index order and sorted before quantiles are taken.
"""

import csv
import io
import math
import os
import secrets
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_alpha, check_count, check_sample
from .core import GpdParams, alt_sample, gpd_sample
from .estimate import default_k_upper, estimate_aml, estimate_cmm, kappa_from_beta
from .exceptions import SimulationIntegrityError
from .gof import NEGATIVE, POSITIVE, delta_n_hat, delta_n_star, delta_p_hat

# stream tags mixed into the seed of each replication
STREAM_NULL = 0
STREAM_ALT = 1
STREAM_BOOT = 2
_REDRAW = 1000

MAX_FAILURE_RATE = 0.01
QUICK_R = 1000

# below this many sampled values per call the process pool is not worth it
_PARALLEL_MIN_WORK = 2_000_000


def replication_rng(seed, r, stream=STREAM_NULL):
    """Independent generator for replication ``r`` of a run seeded by ``seed``."""
    ss = np.random.SeedSequence([int(seed), int(stream), int(r)])
    return np.random.Generator(np.random.Philox(ss))


def resolve_seed(seed):
    """Return ``seed`` or a fresh random 63-bit seed when it is None."""
    return secrets.randbits(63) if seed is None else int(seed)


def resolve_workers(n_jobs=None):
    """Worker count: explicit ``n_jobs``, else ``GPDGOF_THREADS``, else all cores."""
    if n_jobs is None:
        env = os.environ.get("GPDGOF_THREADS")
        n_jobs = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(n_jobs))


def type1_quantile(sorted_values, q):
    """Order-statistic quantile with 1-based index ``ceil(q * m)``."""
    m = sorted_values.shape[0]
    if m == 0:
        raise ValueError("no values")
    idx = min(max(math.ceil(q * m), 1), m)
    return float(sorted_values[idx - 1])


# -- replication kernels (module level so they pickle) ------------------------

def _null_stat(x, case, k_upper):
    if case == NEGATIVE:
        return abs(delta_n_star(x).statistic)
    est = estimate_aml(x, k_upper)
    return delta_p_hat(x, est)


def _stat_or_nan(fn, *args):
    try:
        return fn(*args)
    except (ValueError, ArithmeticError):
        return math.nan


def _null_chunk(args):
    beta, n, case, k_upper, seed, start, stop = args
    p = GpdParams(1.0, beta)
    out = np.empty(stop - start)
    fails = 0
    for j, r in enumerate(range(start, stop)):
        val = _stat_or_nan(_null_stat, gpd_sample(n, p, replication_rng(seed, r)), case, k_upper)
        if math.isnan(val):
            fails += 1
            redraw = gpd_sample(n, p, replication_rng(seed, r, STREAM_NULL + _REDRAW))
            val = _stat_or_nan(_null_stat, redraw, case, k_upper)
        out[j] = val
    return out, fails


def _boot_stat(x, y, case, method, fixed, k_upper):
    if case == NEGATIVE:
        if method == "a1":
            theta, k = fixed
            return delta_n_hat(y, k) / theta
        return delta_n_star(y).statistic
    if method == "a1":
        return delta_p_hat(y, fixed)
    return delta_p_hat(y, estimate_aml(y, k_upper))


def _boot_chunk(args):
    x, case, method, fixed, params, k_upper, seed, start, stop = args
    n = x.shape[0]
    out = np.empty(stop - start)
    fails = 0
    for j, b in enumerate(range(start, stop)):
        val = math.nan
        for stream in (STREAM_BOOT, STREAM_BOOT + _REDRAW):
            rng = replication_rng(seed, b, stream)
            if method == "a1":
                y = x[rng.integers(0, n, n)]
            else:
                y = gpd_sample(n, params, rng)
            val = _stat_or_nan(_boot_stat, x, y, case, method, fixed, k_upper)
            if not math.isnan(val):
                break
            fails += stream == STREAM_BOOT
        out[j] = val
    return out, fails


def _run(kernel, make_args, R, work, n_jobs):
    workers = resolve_workers(n_jobs)
    if workers == 1 or work < _PARALLEL_MIN_WORK or R < 2 * workers:
        return kernel(make_args(0, R))
    bounds = np.linspace(0, R, min(R, 4 * workers) + 1).astype(int)
    chunks = [make_args(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(kernel, chunks))
    return np.concatenate([p[0] for p in parts]), sum(p[1] for p in parts)


def _finish(values, fails, R):
    """Drop failed replications, enforcing the integrity bound."""
    bad = np.isnan(values)
    excluded = int(bad.sum())
    if excluded > MAX_FAILURE_RATE * R:
        raise SimulationIntegrityError(
            f"{excluded} of {R} replications failed after one redraw")
    return np.sort(values[~bad]), {"redrawn": int(fails), "excluded": excluded}


# -- null distribution and critical values -------------------------------------

def case_for_beta(beta):
    return NEGATIVE if beta < 0 else POSITIVE


@dataclass(frozen=True)
class NullDistribution:
    """Sorted null statistics from ``R`` replications at ``GPD(1, beta)``."""

    beta: float
    n: int
    case: str
    values: np.ndarray = field(repr=False)
    R: int
    seed: int
    failures: dict
    k_upper: int | None = None

    def critical_value(self, alpha):
        return type1_quantile(self.values, 1.0 - alpha)


def null_distribution(beta, n, R=10_000, seed=0, k_upper=None, n_jobs=None):
    """Simulate the null distribution of the statistic matching ``beta``.

    Negative ``beta`` uses CMM estimates and ``|delta_n_star|``; ``beta >= 0``
    uses AML estimates and ``delta_p_hat``. Scale is fixed at 1, which is
    harmless because both statistics are scale invariant.
    """
    R = check_count(R, "R", 1)
    n = check_count(n, "n", 3)
    seed = int(seed)
    case = case_for_beta(beta)
    if case == POSITIVE and k_upper is None:
        k_upper = default_k_upper(n)
    values, fails = _run(_null_chunk,
                         lambda a, b: (float(beta), n, case, k_upper, seed, a, b),
                         R, R * n, n_jobs)
    values, failures = _finish(values, fails, R)
    return NullDistribution(float(beta), n, case, values, R, seed, failures,
                            k_upper if case == POSITIVE else None)


def critical_value(beta, n, alpha, R=10_000, seed=0, k_upper=None, n_jobs=None):
    """Empirical ``1 - alpha`` null quantile for sample size ``n`` and shape ``beta``."""
    if R < 100:
        raise ValueError(f"R must be >= 100, got {R}")
    alpha = check_alpha(alpha)
    return null_distribution(beta, n, R, seed, k_upper, n_jobs).critical_value(alpha)


TABLE_HEADER = ("beta", "n", "alpha", "critical_value", "R", "seed")


@dataclass
class CriticalTable:
    """Grid of critical values indexed by ``(beta, n)``."""

    alpha: float
    case: str
    grid: dict
    meta: dict

    def value(self, beta, n):
        return self.grid[(beta, n)]

    def rows(self):
        for (beta, n), cv in self.grid.items():
            yield beta, n, cv

    def to_csv(self, path=None):
        """Write ``beta,n,alpha,critical_value,R,seed`` rows with 5 decimals.

        Returns the CSV text; also writes it to ``path`` when given.
        """
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TABLE_HEADER)
        for beta, n, cv in self.rows():
            writer.writerow([f"{beta:g}", n, f"{self.alpha:g}", f"{cv:.5f}",
                             self.meta["R"], self.meta["seed"]])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text):
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != TABLE_HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        grid = {}
        alpha = R = seed = None
        for row in reader:
            grid[(float(row["beta"]), int(row["n"]))] = float(row["critical_value"])
            alpha, R, seed = float(row["alpha"]), int(row["R"]), int(row["seed"])
        case = case_for_beta(next(iter(grid))[0]) if grid else NEGATIVE
        return cls(alpha, case, grid, {"R": R, "seed": seed})


def build_table(betas, ns, alpha, R=10_000, seed=0, k_upper=None, n_jobs=None):
    """Critical values over the grid ``betas x ns``.

    All cells share ``seed`` (common random numbers), so a one-cell grid
    reproduces `critical_value` exactly.
    """
    alpha = check_alpha(alpha)
    betas = [float(b) for b in betas]
    if not betas:
        raise ValueError("betas must not be empty")
    cases = {case_for_beta(b) for b in betas}
    if len(cases) != 1:
        raise ValueError("betas must be all negative or all non-negative")
    grid = {}
    failures = {}
    for beta in betas:
        for n in ns:
            dist = null_distribution(beta, int(n), R, seed, k_upper, n_jobs)
            grid[(beta, int(n))] = dist.critical_value(alpha)
            if dist.failures["excluded"] or dist.failures["redrawn"]:
                failures[f"{beta:g},{n}"] = dist.failures
    meta = {"R": int(R), "seed": int(seed), "quantile": "type1",
            "statistic": "|delta_n_star|" if NEGATIVE in cases else "delta_p_hat",
            "failures": failures}
    if POSITIVE in cases:
        meta["k_upper"] = "ceil(0.2 n)" if k_upper is None else int(k_upper)
    if R < QUICK_R:
        meta["warning"] = f"quick mode: R={R} < {QUICK_R}; critical values are noisy"
    return CriticalTable(alpha, cases.pop(), grid, meta)


# -- bootstrap -----------------------------------------------------------------

@dataclass(frozen=True)
class BootstrapResult:
    """Bootstrap calibration of an observed statistic.

    ``values`` are the sorted replicate statistics on the comparison scale
    (absolute values for the two-sided negative test).
    """

    observed: float
    C1: float
    C2: float
    p_value: float
    values: np.ndarray = field(repr=False)
    B: int
    seed: int
    method: str
    sided: str
    failures: dict

    def quantile(self, q):
        return type1_quantile(self.values, q)


BOOTSTRAP_METHODS = ("parametric", "a1")


def bootstrap_null(s, case, B=10_000, seed=None, method="parametric", sided="two-sided",
                   k_upper=None, n_jobs=None):
    """Bootstrap distribution of the statistic for ``case``.

    Parameters
    ----------
    s : array-like
        Observed sample.
    case : {"NegativeBeta", "PositiveBeta"}
    method : {"parametric", "a1"}
        ``"parametric"``: replicate samples are drawn from the fitted GPD and
        the parameters re-estimated each time. ``"a1"``: the data are
        resampled with replacement and the original estimates held fixed.
    sided : {"two-sided", "upper"}
        Only used for the negative case; the positive case is always upper.
    """
    x = check_sample(s)
    B = check_count(B, "B", 1)
    seed = resolve_seed(seed)
    if method not in BOOTSTRAP_METHODS:
        raise ValueError(f"method must be one of {BOOTSTRAP_METHODS}, got {method!r}")
    if sided not in ("two-sided", "upper"):
        raise ValueError(f"sided must be 'two-sided' or 'upper', got {sided!r}")
    if case == NEGATIVE:
        est = estimate_cmm(x)
        k = kappa_from_beta(est.beta)
        observed = delta_n_hat(x, k) / est.theta
        fixed = (est.theta, k)
    elif case == POSITIVE:
        k_upper = default_k_upper(x.shape[0]) if k_upper is None else k_upper
        est = estimate_aml(x, k_upper)
        observed = delta_p_hat(x, est)
        fixed = est
        sided = "upper"
    else:
        raise ValueError(f"unknown case {case!r}")
    n = x.shape[0]
    values, fails = _run(_boot_chunk,
                         lambda a, b: (x, case, method, fixed, est, k_upper, seed, a, b),
                         B, B * n, n_jobs)
    values, failures = _finish(values, fails, B)
    if sided == "two-sided":
        values = np.sort(np.abs(values))
        observed = abs(observed)
    p_value = (1 + int(np.count_nonzero(values >= observed))) / (values.shape[0] + 1)
    return BootstrapResult(observed, type1_quantile(values, 0.95),
                           type1_quantile(values, 0.99), p_value, values, B, seed,
                           method, sided, failures)


def bootstrap_a1(s, B=10_000, seed=None, n_jobs=None):
    """Nonparametric bootstrap for the negative-shape statistic.

    Estimates ``beta = mean/(mean - max)``, ``k = 1/(2(beta - 2))`` and
    ``theta = -beta max`` once, then recomputes ``delta_n_hat(y, k) / theta``
    on ``B`` resamples ``y`` drawn with replacement. ``C1``/``C2`` are the
    0.95/0.99 quantiles of the signed replicate statistics.
    """
    return bootstrap_null(s, NEGATIVE, B=B, seed=seed, method="a1", sided="upper",
                          n_jobs=n_jobs)


# -- power -----------------------------------------------------------------------

@dataclass(frozen=True)
class PowerResult:
    alt: object  # AltSpec
    n: int
    beta_case: float
    alpha: float
    power: float
    replications: int
    seed: int
    critical_value: float
    failures: dict = field(default_factory=dict)

    @property
    def standard_error(self):
        return math.sqrt(self.power * (1 - self.power) / self.replications)

    def csv_row(self):
        return [self.alt.family, ";".join(f"{v:g}" for v in self.alt.params), self.n,
                f"{self.beta_case:g}", f"{self.alpha:g}", f"{self.power:.3f}",
                self.replications, self.seed]


POWER_HEADER = ("family", "params", "n", "beta_case", "alpha", "power", "R", "seed")


def _alt_chunk(args):
    alt, n, case, k_upper, seed, start, stop = args
    out = np.empty(stop - start)
    fails = 0
    for j, r in enumerate(range(start, stop)):
        val = _stat_or_nan(_null_stat, alt_sample(alt, n, replication_rng(seed, r, STREAM_ALT)),
                           case, k_upper)
        if math.isnan(val):
            fails += 1
            redraw = alt_sample(alt, n, replication_rng(seed, r, STREAM_ALT + _REDRAW))
            val = _stat_or_nan(_null_stat, redraw, case, k_upper)
        out[j] = val
    return out, fails


def power_study(alt, n, beta_case, alpha=0.05, R=1000, seed=0, critical=None,
                null_R=10_000, k_upper=None, n_jobs=None):
    """Rejection rate of the test for ``beta_case`` on samples from ``alt``.

    The critical value is the Monte Carlo null quantile at ``GPD(1, beta_case)``
    (``null_R`` replications, same ``seed``) unless ``critical`` is given.
    Negative ``beta_case`` rejects on ``|delta_n_star|``; zero or positive on
    ``delta_p_hat`` with AML estimates.
    """
    if R < 100:
        raise ValueError(f"R must be >= 100, got {R}")
    alpha = check_alpha(alpha)
    n = check_count(n, "n", 3)
    case = case_for_beta(beta_case)
    if case == POSITIVE and k_upper is None:
        k_upper = default_k_upper(n)
    if critical is None:
        critical = critical_value(beta_case, n, alpha, null_R, seed, k_upper, n_jobs)
    values, fails = _run(_alt_chunk, lambda a, b: (alt, n, case, k_upper, int(seed), a, b),
                         R, R * n, n_jobs)
    values, failures = _finish(values, fails, R)
    power = float(np.count_nonzero(values > critical)) / values.shape[0]
    return PowerResult(alt, n, float(beta_case), alpha, power, int(R), int(seed),
                       float(critical), failures)


def power_csv(results, path=None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(POWER_HEADER)
    for res in results:
        writer.writerow(res.csv_row())
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


# -- standard alternative sets -------------------------------------------------

_CORE_ALTERNATIVES = ("Beta(5,5)", "Weibull(2,1)", "Weibull(3,1)", "Gamma(5,1)", "Gamma(8,1)",
                      "GenGamma(2,1/3)", "GenGamma(2,1/2)", "GenGamma(1,1/2)")

POWER_PRESETS = {
    # exponential (beta = 0) and uniform (beta = -1) null cases
    "exp-uniform": {
        "alternatives": _CORE_ALTERNATIVES + (
            "AbsNormal(2,1)", "AbsNormal(3,1)", "ChiSquare(6)", "ChiSquare(15)",
            "AbsGumbel(3,2)", "AbsGumbel(5,2)"),
        "cells": ((20, 0.0), (30, 0.0), (50, 0.0), (20, -1.0), (30, -1.0), (50, -1.0)),
    },
    # a spread of positive and negative null shapes
    "shape-grid": {
        "alternatives": ("Beta(1,2)", "Beta(2,1)") + _CORE_ALTERNATIVES + (
            "AbsNormal(2,2)", "AbsNormal(2,1)", "AbsNormal(3,1)", "ChiSquare(6)",
            "ChiSquare(15)", "AbsGumbel(3,2)", "AbsGumbel(5,2)", "AbsGumbel(5,5)"),
        "cells": ((20, 0.1), (20, 0.2), (20, 1.0), (30, 0.1), (30, 0.2), (50, 0.5),
                  (30, -0.5), (50, -0.5)),
    },
}

# default grids for critical-value tables
NEGATIVE_BETAS = tuple(round(-0.1 * i, 1) for i in range(1, 11))
POSITIVE_BETAS = tuple(round(0.1 * i, 1) for i in range(1, 11))
TABLE_NS = (20, 30, 50, 70, 100)
