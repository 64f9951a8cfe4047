"""Running-maximum paths, the positive-sup functional of point measures,
an approximate M1 path distance, and Frechet-limit checks.

The M1 distance between nondecreasing cadlag step paths is computed as
the discrete Frechet distance (max-metric) between their completed
graphs, densified to a fixed grid of aligned parametrizations.  It is
upper-bounded by the uniform distance and, unlike the jump-matching J1
distance, tolerant of jump splitting.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import DimensionError, DomainError, InsufficientDataError, ParameterError
from .models import generate
from .limitproc import LimitSpec, PointMeasure, sample_limit
from .seeds import replication_seed, rng_from
from .stats import MCValue, ks_test


@dataclass(frozen=True)
class StepPath:
    """Nondecreasing cadlag step function on [0, 1].

    The value on [times[i], times[i+1]) is levels[i+1]; levels[0] holds on
    [0, times[0]).  ``raw`` marks running-maximum paths that may start
    below zero before the positive-part clamp.
    """

    times: np.ndarray  # ascending jump times in [0, 1]
    levels: np.ndarray  # len(times) + 1 nondecreasing values
    raw: bool = False

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        levels = np.asarray(self.levels, dtype=np.float64)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "levels", levels)
        if levels.size != times.size + 1:
            raise DomainError("need len(levels) == len(times) + 1")
        if times.size and (np.any(np.diff(times) <= 0) or times[0] < 0 or times[-1] > 1):
            raise DomainError("jump times must be strictly increasing within [0, 1]")
        if np.any(np.diff(levels) < 0):
            raise DomainError("levels must be nondecreasing")
        if not self.raw and levels.size and levels[0] < 0:
            raise DomainError("levels must be nonnegative (flag raw to relax)")

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        idx = np.searchsorted(self.times, t, side="right")
        return self.levels[idx]

    def clamped(self):
        """Positive part, collapsing duplicate levels created by the clamp."""
        levels = np.maximum(self.levels, 0.0)
        keep = np.nonzero(np.diff(levels) > 0)[0]
        return StepPath(times=self.times[keep], levels=np.concatenate([[levels[0]], levels[keep + 1]]))

    def uniform_distance(self, other):
        grid = np.unique(np.concatenate([self.times, other.times, [0.0, 1.0]]))
        probe = np.concatenate([grid, np.nextafter(grid, -np.inf)[1:]])
        return float(np.max(np.abs(self(probe) - other(probe))))

    def to_record(self):
        return {
            "times": [float(t) for t in self.times],
            "levels": [float(v) for v in self.levels],
            "raw": self.raw,
        }


def step_path_from_record(rec):
    return StepPath(
        times=np.asarray(rec["times"], dtype=np.float64),
        levels=np.asarray(rec["levels"], dtype=np.float64),
        raw=bool(rec.get("raw", False)),
    )


def maximal_path(path) -> StepPath:
    """Y_n(t) = (running max of X_1..X_{floor(nt)}) / a_n, raw-flagged.

    The level on [0, 1/n) is X_1 / a_n, which may be negative; all later
    levels are the running maxima.
    """
    if path.model.d != 1:
        raise DimensionError("maximal_path is defined for univariate paths")
    x = path.univariate() / path.a_n
    n = x.shape[0]
    m = kernels.running_max(np.ascontiguousarray(x))
    jumps = np.nonzero(np.diff(m) > 0)[0]  # m[j+1] > m[j]: jump at (j+1+1)/n
    times = (jumps + 2) / n
    levels = np.concatenate([[m[0]], m[jumps + 1]])
    return StepPath(times=times, levels=levels, raw=True)


def t_plus(measure: PointMeasure) -> StepPath:
    """T+(m)(t) = sup{ x_i : t_i <= t } v 0, with sup of nothing = 0."""
    if measure.values.ndim == 2 and measure.values.shape[1] != 1:
        raise DimensionError("t_plus is defined for univariate point measures")
    if measure.size == 0:
        return StepPath(times=np.empty(0), levels=np.zeros(1))
    order = np.argsort(measure.times, kind="stable")
    t = measure.times[order]
    x = np.maximum(measure.values.reshape(-1)[order], 0.0)
    running = np.maximum.accumulate(x)
    # keep the first time each new running-max level is reached
    new_level = np.diff(np.concatenate([[0.0], running])) > 0
    times = t[new_level]
    levels = np.concatenate([[0.0], running[new_level]])
    # collapse simultaneous jumps (same time, increasing level): keep the last
    if times.size:
        last_at_time = np.concatenate([np.diff(times) > 0, [True]])
        times = times[last_at_time]
        levels = np.concatenate([[0.0], levels[1:][last_at_time]])
    return StepPath(times=times, levels=levels)


def _completed_graph(path: StepPath):
    """Vertices of the completed graph (monotone polyline in the plane)."""
    verts = [(0.0, path.levels[0])]
    for i, t in enumerate(path.times):
        verts.append((t, path.levels[i]))
        verts.append((t, path.levels[i + 1]))
    verts.append((1.0, path.levels[-1]))
    return np.asarray(verts, dtype=np.float64)


def _densify(verts, grid):
    """Resample a polyline at ``grid`` points even in L1 arc length."""
    deltas = np.abs(np.diff(verts, axis=0)).sum(axis=1)
    cum = np.concatenate([[0.0], np.cumsum(deltas)])
    total = cum[-1]
    if total == 0.0:
        return np.repeat(verts[:1], grid, axis=0)
    s = np.linspace(0.0, total, grid)
    t = np.interp(s, cum, verts[:, 0])
    x = np.interp(s, cum, verts[:, 1])
    return np.column_stack([t, x])


def _require_monotone(path: StepPath):
    if path.raw:
        return path.clamped()
    return path


def m1_distance(f: StepPath, g: StepPath, grid=1000) -> float:
    """Approximate M1 distance between nondecreasing step paths.

    Minimal sup-distance (max-metric in the plane) over monotone aligned
    parametrizations of the completed graphs, each densified to ``grid``
    points.  Exact up to one grid cell; raw paths are clamped at 0 first.
    """
    if grid < 2:
        raise ParameterError("grid must be >= 2")
    pf = _densify(_completed_graph(_require_monotone(f)), grid)
    pg = _densify(_completed_graph(_require_monotone(g)), grid)
    return float(kernels.frechet_distance(np.ascontiguousarray(pf), np.ascontiguousarray(pg)))


def _cadlag_samples(path: StepPath, grid):
    """Graph samples (t, f(t)) on a uniform grid refined by the jump times."""
    t = np.unique(np.concatenate([np.linspace(0.0, 1.0, grid), path.times]))
    return np.column_stack([t, path(t)])


def j1_distance(f: StepPath, g: StepPath, grid=1000) -> float:
    """Grid J1 distance: sup-distance minimized over monotone time
    alignments of the sampled graphs (no traversal of jump verticals).

    Used for the jump-splitting demonstration; unlike m1_distance it
    penalizes one large jump matched against two smaller ones.
    """
    pf = _cadlag_samples(_require_monotone(f), grid)
    pg = _cadlag_samples(_require_monotone(g), grid)
    return float(kernels.frechet_distance(np.ascontiguousarray(pf), np.ascontiguousarray(pg)))


@dataclass(frozen=True)
class ExtremalLaw:
    """Frechet law G(x) = exp(-kappa x^{-alpha}) on x > 0."""

    kappa: float
    alpha: float

    def __post_init__(self):
        if self.kappa <= 0 or self.alpha <= 0:
            raise ParameterError("kappa and alpha must be positive")

    def cdf(self, x, power=1.0):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = np.exp(-power * self.kappa * x[pos] ** -self.alpha)
        return out

    def quantile(self, q, power=1.0):
        q = np.asarray(q, dtype=np.float64)
        return (-np.log(q) / (power * self.kappa)) ** (-1.0 / self.alpha)


def kappa(theta, alpha, q_sampler, reps, seed) -> MCValue:
    """kappa = theta * E (sup_j Q_j v 0)^alpha over cluster draws."""
    rng = rng_from(seed)
    vals = np.empty(reps)
    for i in range(reps):
        q = np.atleast_2d(q_sampler.draw(rng))
        if q.shape[1] != 1:
            raise DimensionError("kappa needs a univariate cluster sampler")
        vals[i] = max(float(q.max()), 0.0) ** alpha
    est = theta * vals.mean()
    se = theta * vals.std(ddof=1) / np.sqrt(reps) if reps > 1 else float("inf")
    return MCValue(value=float(est), stderr=float(se))


@dataclass(frozen=True)
class FidiReport:
    times: tuple
    marginal_ks: tuple  # KSReport per time
    joint_deviation: float  # sup |empirical - limit| over the quantile grid
    reps: int


def _fidi_cdf(law: ExtremalLaw, times, x):
    """Limit joint CDF G^{s1}(min x) G^{s2-s1}(min tail) ... at one grid point."""
    val = 1.0
    prev = 0.0
    for j, s in enumerate(times):
        val *= float(law.cdf(np.array([min(x[j:])]), power=s - prev)[0])
        prev = s
    return val


def extremal_fidi_check(source, law: ExtremalLaw, times, reps, seed, levels=(0.1, 0.25, 0.5, 0.75, 0.9)):
    """Finite-dimensional comparison of running maxima with the G-extremal law.

    ``source`` is either (ModelSpec, n) for path maxima or a LimitSpec for
    the positive-sup of sampled limit measures.  Reports per-time KS
    statistics against G^{s_i} and the sup deviation of the empirical
    joint CDF from the product formula over a grid of marginal quantiles.
    """
    times = tuple(float(s) for s in times)
    if not 1 <= len(times) <= 3 or any(not 0 < s <= 1 for s in times):
        raise ParameterError("need 1..3 evaluation times in (0, 1]")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ParameterError("times must be strictly increasing")
    if reps < 500:
        raise InsufficientDataError("fidi check needs >= 500 replications", reps)

    k = len(times)
    samples = np.empty((reps, k))
    if isinstance(source, LimitSpec):
        for rep in range(reps):
            m = sample_limit(source, replication_seed(seed, rep))
            if m.size == 0:
                samples[rep] = 0.0
                continue
            x = np.maximum(m.values.reshape(-1), 0.0)
            for j, s in enumerate(times):
                sel = m.times <= s
                samples[rep, j] = x[sel].max() if np.any(sel) else 0.0
    else:
        spec, n = source
        if spec.d != 1:
            raise DimensionError("fidi check is univariate")
        idx = [max(1, int(np.floor(n * s))) for s in times]
        for rep in range(reps):
            path = generate(replace(spec, seed=replication_seed(seed, rep)), n)
            x = path.univariate() / path.a_n
            running = kernels.running_max(np.ascontiguousarray(x))
            samples[rep] = [running[i - 1] for i in idx]

    marginal = tuple(
        ks_test(samples[:, j], lambda v, s=s: law.cdf(v, power=s))
        for j, s in enumerate(times)
    )

    # joint deviation over the per-coordinate quantile grid
    grids = [law.quantile(np.asarray(levels), power=s) for s in times]
    mesh = np.meshgrid(*grids, indexing="ij")
    flat = np.stack([m.ravel() for m in mesh], axis=1)
    dev = 0.0
    for row in flat:
        emp = float(np.mean(np.all(samples <= row, axis=1)))
        dev = max(dev, abs(emp - _fidi_cdf(law, times, row)))
    return FidiReport(times=times, marginal_ks=marginal, joint_deviation=float(dev), reps=reps)
