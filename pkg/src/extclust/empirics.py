"""Empirical tail-process estimation and block-dependence diagnostics.

The two diagnostics quantify, at finite n, the asymptotic conditions the
limit theory rests on: approximate factorization of the Laplace
functional over disjoint blocks, and non-spreading of exceedances across
a block ("anticlustering").  Both are numeric evidence only, not tests
of the conditions themselves.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import InsufficientDataError, ParameterError
from .models import ModelSpec, generate, normalizing_constant, vector_norms
from .seeds import replication_seed


@dataclass(frozen=True)
class TailWindow:
    """Rescaled observation window around one exceedance time.

    ``values`` has shape (2m + 1, d); row m is the exceedance itself.
    ``scale`` is the conditioning threshold (tail windows) or the
    exceedance norm (spectral windows).  ``path_id`` and ``index``
    locate the exceedance, so downstream statistics can group windows
    of one exceedance cluster.
    """

    values: np.ndarray
    scale: float
    path_id: int = 0
    index: int = 0

    @property
    def max_lag(self):
        return (self.values.shape[0] - 1) // 2

    def at_lag(self, lag):
        return self.values[self.max_lag + lag]

    def lag_norms(self, norm="sup"):
        return vector_norms(self.values, norm)


def window_run_count(windows, gap=None):
    """Number of exceedance runs: windows of one path closer than ``gap``
    (default 2m + 1) belong to one run.  Clustered exceedances produce
    near-duplicate windows, so run counts are the honest effective sample
    size for goodness-of-fit critical values."""
    if not windows:
        return 0
    if gap is None:
        gap = 2 * windows[0].max_lag + 1
    runs = 0
    last = None
    for w in windows:
        if last is None or w.path_id != last[0] or w.index - last[1] > gap:
            runs += 1
        last = (w.path_id, w.index)
    return runs


@dataclass(frozen=True)
class BlockScheme:
    """Disjoint-block bookkeeping: n = k_n * r_n + ragged tail."""

    n: int
    r_n: int
    u: float = 1.0

    def __post_init__(self):
        if not 1 <= self.r_n <= self.n:
            raise ParameterError("need 1 <= r_n <= n")
        if self.u <= 0:
            raise ParameterError("threshold multiplier u must be positive")

    @property
    def k_n(self):
        return self.n // self.r_n

    @classmethod
    def for_length(cls, n, beta=0.5, u=1.0):
        """Default scheme r_n = ceil(n^beta)."""
        if not 0 < beta < 1:
            raise ParameterError("block exponent must be in (0, 1)")
        return cls(n=n, r_n=int(np.ceil(n ** beta)), u=u)


def _windows(paths, x, m, spectral, norm):
    if x <= 0:
        raise ParameterError("threshold must be positive")
    if m < 0:
        raise ParameterError("max lag must be >= 0")
    out = []
    for path_id, path in enumerate(paths):
        norms = path.norms(norm)
        idx = np.nonzero(norms > x)[0]
        idx = idx[(idx >= m) & (idx < path.n - m)]
        for i in idx:
            window = path.values[i - m : i + m + 1]
            scale = norms[i] if spectral else x
            out.append(
                TailWindow(values=window / scale, scale=float(scale), path_id=path_id, index=int(i))
            )
    if len(out) < 100:
        raise InsufficientDataError("fewer than 100 exceedances above the threshold", len(out))
    return out


def estimate_tail_process(paths, x, m, norm="sup"):
    """Windows (X_{i-m}, ..., X_{i+m}) / x around each exceedance ||X_i|| > x.

    The lag-0 norms form an empirical sample of the conditional rescaled
    exceedance magnitude, which tends to a Pareto(alpha) law on [1, inf)
    as x grows.
    """
    return _windows(paths, x, m, spectral=False, norm=norm)


def estimate_spectral_tail(paths, x, m, norm="sup"):
    """As estimate_tail_process, but each window is divided by ||X_i||,
    so the lag-0 norm is exactly 1."""
    return _windows(paths, x, m, spectral=True, norm=norm)


def default_threshold(paths, quantile=0.999, norm="sup"):
    """Empirical high quantile of the pooled norms (bias/variance desk default)."""
    pooled = np.concatenate([p.norms(norm) for p in paths])
    return float(np.quantile(pooled, quantile))


@dataclass(frozen=True)
class BlockDiagnostics:
    """Result of one block-factorization run."""

    value: float  # |full-path Laplace - product over blocks|
    stderr: float
    full: float
    blockwise: float
    n: int
    r_n: int


def diagnose_Aprime(spec: ModelSpec, n, scheme: BlockScheme, f, reps, seed=None, norm="sup"):
    """Gap between the path Laplace functional and its block factorization.

    Estimates | E exp{-sum_i f(i/n, X_i/a_n)}
              - prod_k E exp{-sum_{i in block k} f(k r_n / n, X_i/a_n)} |.

    Both expectations are estimated from the same ``reps`` independent
    paths (blocks of a stationary path have the block marginal law), which
    couples the two estimates and cancels most of their shared Monte Carlo
    noise; the standard error is computed from per-path influences on the
    coupled difference.
    """
    if reps < 2:
        raise ParameterError("reps must be >= 2")
    base_seed = spec.seed if seed is None else seed
    r, k_n = scheme.r_n, n // scheme.r_n
    a_n = normalizing_constant(spec, n)
    s = f.scale

    g_full_cache = None
    block_times = f.time_factor(np.arange(1, k_n + 1) * r / n)

    full_vals = np.empty(reps)
    # per-path exp(-s * g_k * H_k) for every block: reps x k_n
    block_factors = np.ones((reps, k_n))
    for rep in range(reps):
        path = generate(replace(spec, seed=replication_seed(base_seed, rep)), n)
        h = f.space_factor(path.norms(norm) / a_n)
        nz = np.nonzero(h)[0]
        if g_full_cache is None:
            g_full_cache = f.time_factor((np.arange(1, n + 1)) / n)
        full_vals[rep] = np.exp(-s * np.dot(g_full_cache[nz], h[nz]))
        in_blocks = nz[nz < k_n * r]
        if in_blocks.size:
            block_ids = in_blocks // r
            h_sums = np.bincount(block_ids, weights=h[in_blocks], minlength=k_n)
            active = np.nonzero(h_sums)[0]
            block_factors[rep, active] = np.exp(-s * block_times[active] * h_sums[active])

    full = full_vals.mean()
    means = block_factors.mean(axis=0)
    blockwise = float(np.prod(means))
    # influence of path p on (full - product): delta-method linearization
    influence = full_vals - blockwise * ((block_factors / means).sum(axis=1) - (k_n - 1))
    stderr = float(influence.std(ddof=1) / np.sqrt(reps))
    return BlockDiagnostics(
        value=float(abs(full - blockwise)),
        stderr=stderr,
        full=float(full),
        blockwise=blockwise,
        n=n,
        r_n=r,
    )


@dataclass(frozen=True)
class AnticlusterDiagnostics:
    value: float  # P(max_{m <= |i| <= r_n} ||X_i|| > a_n u | ||X_0|| > a_n u)
    stderr: float
    exceedances: int
    n: int
    m: int
    r_n: int


def diagnose_AC(spec: ModelSpec, n, scheme: BlockScheme, m, reps, seed=None, norm="sup"):
    """Conditional spread probability of exceedances at lags m..r_n.

    Every exceedance with a full +-r_n window inside the path is a
    conditioning event; the ratio estimator pools hits over paths and the
    standard error comes from per-path deltas (paths are independent,
    exceedances within a path are not).
    """
    if not 0 <= m < scheme.r_n:
        raise ParameterError("need 0 <= m < r_n")
    base_seed = spec.seed if seed is None else seed
    r = scheme.r_n
    threshold = normalizing_constant(spec, n) * scheme.u
    hits = np.zeros(reps)
    events = np.zeros(reps)
    for rep in range(reps):
        path = generate(replace(spec, seed=replication_seed(base_seed, rep)), n)
        norms = path.norms(norm)
        idx = np.nonzero(norms > threshold)[0]
        idx = idx[(idx >= r) & (idx < n - r)]
        events[rep] = idx.size
        for i in idx:
            window = np.concatenate([norms[i - r : i - m + 1], norms[i + m : i + r + 1]])
            if window.max() > threshold:
                hits[rep] += 1
    total_events = events.sum()
    if total_events == 0:
        raise InsufficientDataError("no exceedances with full windows", 0)
    ratio = hits.sum() / total_events
    # delta-method for the ratio of means over independent paths
    resid = hits - ratio * events
    stderr = float(np.sqrt(np.sum(resid ** 2)) / total_events) if reps > 1 else float("inf")
    return AnticlusterDiagnostics(
        value=float(ratio),
        stderr=stderr,
        exceedances=int(total_events),
        n=n,
        m=m,
        r_n=r,
    )
