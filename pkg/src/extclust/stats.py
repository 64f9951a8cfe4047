"""Shared statistical utilities: tail index, goodness of fit, independence,
Monte Carlo error accounting.

All routines report raw statistics; pass/fail verdicts are applied by the
callers (experiment driver, acceptance harness) at their stated
tolerances.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, InsufficientDataError
from .seeds import rng_from


@dataclass(frozen=True)
class MCValue:
    """A Monte Carlo estimate with its standard error."""

    value: float
    stderr: float


def mc_value(samples) -> MCValue:
    samples = np.asarray(samples, dtype=np.float64)
    n = samples.size
    if n == 0:
        raise InsufficientDataError("no samples", 0)
    se = float(samples.std(ddof=1) / np.sqrt(n)) if n > 1 else float("inf")
    return MCValue(value=float(samples.mean()), stderr=se)


def combined_stderr(*errs):
    return float(np.sqrt(sum(e * e for e in errs)))


@dataclass(frozen=True)
class KSReport:
    statistic: float
    n: int

    @property
    def crit_5pct(self):
        return 1.36 / np.sqrt(self.n)

    @property
    def crit_1pct(self):
        return 1.63 / np.sqrt(self.n)


def ks_test(sample, cdf) -> KSReport:
    """One-sample Kolmogorov-Smirnov statistic against a callable CDF."""
    sample = np.sort(np.asarray(sample, dtype=np.float64))
    n = sample.size
    if n == 0:
        raise InsufficientDataError("empty sample in ks_test", 0)
    f = np.asarray(cdf(sample), dtype=np.float64)
    grid = np.arange(1, n + 1) / n
    d_plus = np.max(grid - f)
    d_minus = np.max(f - (grid - 1.0 / n))
    return KSReport(statistic=float(max(d_plus, d_minus)), n=n)


@dataclass(frozen=True)
class HillEstimate:
    value: float
    stderr: float  # asymptotic value / sqrt(k)
    k: int


def hill_estimator(sample, k=None) -> HillEstimate:
    """Hill estimate of the tail index from the top k + 1 order statistics.

    alpha_hat = k / sum_{i<=k} log(X_(i) / X_(k+1)).  Default
    k = ceil(n^0.6).
    """
    sample = np.asarray(sample, dtype=np.float64)
    if np.any(sample <= 0):
        raise DomainError("hill_estimator requires strictly positive values")
    n = sample.size
    if k is None:
        k = int(np.ceil(n ** 0.6))
    if not 1 <= k < n:
        raise DomainError(f"order-statistic count k={k} must satisfy 1 <= k < n={n}")
    top = np.sort(sample)[-(k + 1):]
    log_excess = np.log(top[1:]) - np.log(top[0])
    total = log_excess.sum()
    if total <= 0:
        raise DomainError("degenerate sample: top order statistics are tied")
    value = k / total
    return HillEstimate(value=float(value), stderr=float(value / np.sqrt(k)), k=k)


def _centered_distance_matrix(x):
    x = np.asarray(x, dtype=np.float64)
    d = np.abs(x[:, None] - x[None, :])
    return d - d.mean(axis=0, keepdims=True) - d.mean(axis=1, keepdims=True) + d.mean()


@dataclass(frozen=True)
class DcorResult:
    statistic: float
    p_value: float
    n: int
    permutations: int


def distance_correlation(x, y, permutations=1000, seed=0, max_n=4000) -> DcorResult:
    """Distance correlation with a permutation p-value.

    Uses the standard V-statistic (double-centered distance matrices).
    The p-value is (1 + #{permuted dCov^2 >= observed}) / (permutations + 1);
    a degenerate marginal (zero distance variance) yields statistic 0 and
    p-value 1.  Samples longer than ``max_n`` are thinned deterministically
    (evenly spaced) to bound the O(n^2) cost.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DomainError("x and y must have equal length")
    if x.size < 50:
        raise InsufficientDataError("distance_correlation needs >= 50 pairs", x.size)
    if x.size > max_n:
        idx = np.linspace(0, x.size - 1, max_n).astype(np.int64)
        x, y = x[idx], y[idx]
    n = x.size
    a = _centered_distance_matrix(x)
    b = _centered_distance_matrix(y)
    dcov2 = float((a * b).mean())
    dvar_x = float((a * a).mean())
    dvar_y = float((b * b).mean())
    if dvar_x <= 0 or dvar_y <= 0:
        return DcorResult(statistic=0.0, p_value=1.0, n=n, permutations=permutations)
    statistic = float(np.sqrt(max(dcov2, 0.0) / np.sqrt(dvar_x * dvar_y)))

    rng = rng_from(seed)
    perms = np.empty((permutations, n), dtype=np.int64)
    for i in range(permutations):
        perms[i] = rng.permutation(n)
    perm_stats = kernels.dcov_permutation_stats(a, b, perms)
    exceed = int(np.sum(perm_stats >= dcov2))
    p_value = (1.0 + exceed) / (permutations + 1.0)
    return DcorResult(statistic=statistic, p_value=float(p_value), n=n, permutations=permutations)
