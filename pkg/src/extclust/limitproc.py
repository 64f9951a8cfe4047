"""Exact simulation of the limiting Poisson cluster process and its
Laplace functionals.

The limit above a truncation level u is simulated exactly: a Poisson
number of clusters with mean theta * u^{-alpha}, uniform anchor times,
Pareto anchor magnitudes above u, and i.i.d. normalized clusters from a
Q-sampler.  The closed-form Laplace functional is evaluated by adaptive
quadrature of

    exp[ -int_0^1 int (1 - E e^{-sum_j f(t, v Q_j)}) theta alpha v^{-alpha-1} dv dt ]

with the v-integral computed exactly on the substitution w = v^{-alpha}
over the finite interval [0, u_f^{-alpha}] (the integrand vanishes for
v <= u_f because sup_j ||Q_j|| = 1 and f has support above u_f).
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from .errors import DomainError, ParameterError, UnsupportedParameterError
from .models import ModelSpec, analytic_cluster_sampler, generate, theoretical_theta, vector_norms
from .seeds import replication_seed, rng_from
from .stats import MCValue


@dataclass(frozen=True)
class PointMeasure:
    """Finite space-time point measure on [0, 1] x (R^d \\ {0}).

    ``floor`` is the level below which points are not represented.  For
    samples of the limit process the anchor bookkeeping (anchors,
    anchor_times, cluster_ids) is retained so the measure can be
    restricted to clusters with anchors above a higher level.
    """

    times: np.ndarray  # (k,)
    values: np.ndarray  # (k, d)
    floor: float
    anchors: np.ndarray = None  # (K,) cluster anchor magnitudes
    anchor_times: np.ndarray = None  # (K,)
    cluster_ids: np.ndarray = None  # (k,) index into anchors

    @property
    def size(self):
        return self.times.shape[0]

    def norms(self, norm="sup"):
        return vector_norms(self.values, norm)

    def to_lines(self):
        rows = []
        for t, x in zip(self.times, np.atleast_2d(self.values)):
            rows.append(" ".join([repr(float(t))] + [repr(float(v)) for v in x]))
        return "\n".join(rows)


def measure_from_lines(text, floor):
    rows = [line.split() for line in text.strip().splitlines() if line.strip()]
    if not rows:
        return PointMeasure(times=np.empty(0), values=np.empty((0, 1)), floor=floor)
    data = np.asarray(rows, dtype=np.float64)
    return PointMeasure(times=data[:, 0], values=data[:, 1:], floor=floor)


@dataclass(frozen=True)
class LimitSpec:
    """Parameters of the limiting Poisson cluster process above level u."""

    alpha: float
    theta: float
    d: int
    u: float
    q_sampler: object  # .draw(rng) -> (k, d) array with sup-norm exactly 1

    def __post_init__(self):
        if self.alpha <= 0 or not 0 < self.theta <= 1 or self.u <= 0 or self.d < 1:
            raise ParameterError("need alpha > 0, theta in (0, 1], u > 0, d >= 1")


def catalog_limit_spec(spec: ModelSpec, u=1.0, floor=1e-3) -> LimitSpec:
    """LimitSpec of a catalog model with its analytic cluster sampler."""
    theta = theoretical_theta(spec)
    if theta is None:
        raise ParameterError(
            "no closed-form extremal index for this model; build a LimitSpec "
            "from extracted clusters instead"
        )
    return LimitSpec(
        alpha=spec.alpha,
        theta=theta,
        d=spec.d,
        u=u,
        q_sampler=analytic_cluster_sampler(spec, floor=floor),
    )


def sample_limit(spec: LimitSpec, seed) -> PointMeasure:
    """One draw of the limit process truncated to anchors above u.

    K ~ Poisson(theta u^{-alpha}); anchors T_i ~ U[0,1] and
    P_i = u V_i^{-1/alpha} (Pareto above u); cluster i contributes points
    (T_i, P_i Q_{ij}).
    """
    rng = rng_from(seed)
    mean = spec.theta * spec.u ** -spec.alpha
    k = int(rng.poisson(mean))
    anchor_times = rng.random(k)
    anchors = spec.u * (1.0 - rng.random(k)) ** (-1.0 / spec.alpha)
    times, values, ids = [], [], []
    for i in range(k):
        q = np.atleast_2d(spec.q_sampler.draw(rng))
        times.append(np.full(q.shape[0], anchor_times[i]))
        values.append(anchors[i] * q)
        ids.append(np.full(q.shape[0], i, dtype=np.int64))
    if k:
        times = np.concatenate(times)
        values = np.concatenate(values)
        ids = np.concatenate(ids)
    else:
        times = np.empty(0)
        values = np.empty((0, spec.d))
        ids = np.empty(0, dtype=np.int64)
    return PointMeasure(
        times=times,
        values=values,
        floor=spec.u,
        anchors=anchors,
        anchor_times=anchor_times,
        cluster_ids=ids,
    )


def restrict_to_level(measure: PointMeasure, u_new) -> PointMeasure:
    """Keep only clusters whose anchor exceeds u_new (u_new >= floor)."""
    if measure.anchors is None:
        raise DomainError("measure carries no anchor bookkeeping")
    if u_new < measure.floor:
        raise DomainError("can only restrict upward")
    keep_cluster = measure.anchors > u_new
    new_index = -np.ones(measure.anchors.size, dtype=np.int64)
    new_index[keep_cluster] = np.arange(int(keep_cluster.sum()))
    keep_point = keep_cluster[measure.cluster_ids] if measure.size else np.zeros(0, bool)
    return PointMeasure(
        times=measure.times[keep_point],
        values=measure.values[keep_point],
        floor=float(u_new),
        anchors=measure.anchors[keep_cluster],
        anchor_times=measure.anchor_times[keep_cluster],
        cluster_ids=new_index[measure.cluster_ids[keep_point]] if measure.size else measure.cluster_ids[:0],
    )


def model_point_sampler(spec: ModelSpec, n, floor=0.05, norm="sup"):
    """Sampler of the rescaled space-time measure of a model path.

    Only points with ||X_i / a_n|| >= floor are materialized; the Laplace
    evaluation is unaffected as long as floor <= the functional support.
    """

    def draw(seed):
        path = generate(replace(spec, seed=seed), n)
        norms = path.norms(norm) / path.a_n
        keep = np.nonzero(norms >= floor)[0]
        return PointMeasure(
            times=(keep + 1) / n,
            values=path.values[keep] / path.a_n,
            floor=floor,
        )

    return draw


def limit_point_sampler(spec: LimitSpec):
    def draw(seed):
        return sample_limit(spec, seed)

    return draw


@dataclass(frozen=True)
class LaplaceValue:
    value: float
    stderr: float


def laplace_empirical(sampler, f, reps, seed, norm="sup") -> LaplaceValue:
    """Monte Carlo mean of exp(-sum_points f(t, x)) over sampled measures."""
    return laplace_empirical_batch(sampler, [f], reps, seed, norm)[0]


def laplace_empirical_batch(sampler, fs, reps, seed, norm="sup"):
    """laplace_empirical for several functionals sharing the same draws.

    Sharing the measures across functionals is a common-random-numbers
    device; each estimate stays unbiased with its own standard error.
    """
    if reps < 2:
        raise ParameterError("reps must be >= 2")
    vals = np.empty((reps, len(fs)))
    for rep in range(reps):
        m = sampler(replication_seed(seed, rep))
        norms = m.norms(norm) if m.size else None
        for j, f in enumerate(fs):
            if m.floor > f.support:
                raise DomainError("measure floor exceeds the functional support")
            if m.size:
                vals[rep, j] = np.exp(-np.sum(f(m.times, norms)))
            else:
                vals[rep, j] = 1.0
    return [
        LaplaceValue(
            value=float(vals[:, j].mean()),
            stderr=float(vals[:, j].std(ddof=1) / np.sqrt(reps)),
        )
        for j in range(len(fs))
    ]


def _cluster_batch(spec: LimitSpec, q_reps, seed):
    """Freeze q_reps cluster draws as flat norm arrays with segment ids."""
    rng = rng_from(seed)
    norms, seg = [], []
    for i in range(q_reps):
        q = np.atleast_2d(spec.q_sampler.draw(rng))
        norms.append(vector_norms(q))
        seg.append(np.full(q.shape[0], i, dtype=np.int64))
    return np.concatenate(norms), np.concatenate(seg)


def laplace_closed_form(spec: LimitSpec, f, q_reps=256, seed=0, tol=1e-6, batches=16) -> LaplaceValue:
    """Closed-form Laplace functional of the limit process at f.

    The inner expectation over clusters is a frozen Monte Carlo average
    (exact for deterministic samplers); its sampling error is propagated
    through batch means.  The reported stderr combines the batch spread
    with the quadrature tolerance on the exponent.
    """
    if f.support < spec.u:
        raise DomainError(
            f"functional support {f.support} is below the truncation level {spec.u}"
        )
    if getattr(spec.q_sampler, "deterministic", False):
        q_reps, batches = 1, 1
    q_norms, seg = _cluster_batch(spec, q_reps, seed)

    w_hi = f.support ** -spec.alpha
    s = f.scale

    def kink_points(norms):
        # w-locations where a point's space factor has a kink or jump
        if f.kind == "step":
            breaks = (norms / f.support) ** spec.alpha
        else:
            breaks = np.concatenate(
                [(norms / f.support) ** spec.alpha, (norms / (2 * f.support)) ** spec.alpha]
            )
        breaks = np.unique(breaks[(breaks > 0) & (breaks < w_hi)])
        if breaks.size > 50:
            breaks = np.quantile(breaks, np.linspace(0, 1, 50))
        return breaks

    def make_exponent(norms, segments, n_clusters):
        breaks = kink_points(norms)

        def one_minus_h(w, gamma):
            # w = v^{-alpha}; at w = 0 both space shapes saturate at 1 per point
            if w <= 0.0:
                per_point = np.ones_like(norms)
            else:
                per_point = f.space_factor(w ** (-1.0 / spec.alpha) * norms)
            sums = np.bincount(segments, weights=per_point, minlength=n_clusters)
            return float(np.mean(1.0 - np.exp(-s * gamma * sums)))

        def exponent(gamma):
            if gamma == 0.0:
                return 0.0
            val, _ = quad(
                one_minus_h,
                0.0,
                w_hi,
                args=(gamma,),
                epsabs=tol / 4,
                epsrel=0.0,
                limit=400,
                points=breaks if breaks.size else None,
            )
            return spec.theta * val

        if f.time_shape == "one":
            return exponent(1.0)
        # g(t) = t or 1 - t: substitute gamma = g(t), uniform on [0, 1]
        val, _ = quad(exponent, 0.0, 1.0, epsabs=tol / 2, epsrel=0.0, limit=200)
        return val

    expo = make_exponent(q_norms, seg, q_reps)

    # cluster-sampling error via batch means of the exponent (linear in the
    # cluster average), skipped for deterministic samplers
    se_expo = tol
    if batches > 1 and q_reps >= batches:
        per_batch = q_reps // batches
        batch_vals = []
        for b in range(batches):
            mask = (seg >= b * per_batch) & (seg < (b + 1) * per_batch)
            batch_vals.append(make_exponent(q_norms[mask], seg[mask] - b * per_batch, per_batch))
        batch_vals = np.asarray(batch_vals)
        se_expo = float(np.sqrt(batch_vals.var(ddof=1) / batches) + tol)

    value = float(np.exp(-expo))
    return LaplaceValue(value=value, stderr=float(value * se_expo))


def spectral_functional(q_sampler, theta, alpha, t, reps, seed) -> MCValue:
    """theta * alpha/(2-alpha) * E (sum_j <t, Q_j>)_+^alpha by Monte Carlo.

    ``t`` is a Euclidean unit vector; the inner product uses the Euclidean
    geometry regardless of the norm used elsewhere.  The identity presumes
    E (sum_j ||Q_j||)^alpha < infty; the catalog samplers satisfy it, but
    an empirical resampler cannot certify it, so treat its estimate as
    descriptive.
    """
    if not 0 < alpha < 2:
        raise ParameterError("spectral functional requires alpha in (0, 2)")
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if abs(np.linalg.norm(t) - 1.0) > 1e-9:
        raise ParameterError("t must be a Euclidean unit vector")
    rng = rng_from(seed)
    vals = np.empty(reps)
    for i in range(reps):
        q = np.atleast_2d(q_sampler.draw(rng))
        inner = float(np.sum(q @ t))
        vals[i] = max(inner, 0.0) ** alpha
    factor = theta * alpha / (2.0 - alpha)
    est = vals.mean() * factor
    se = vals.std(ddof=1) / np.sqrt(reps) * factor if reps > 1 else float("inf")
    return MCValue(value=float(est), stderr=float(se))


def cluster_index(spectral_value, alpha) -> float:
    """b(t) = (1-alpha) / (Gamma(2-alpha) cos(pi alpha / 2)) * spectral_value."""
    if alpha == 1.0:
        raise UnsupportedParameterError("cluster index degenerates at alpha = 1")
    if not 0 < alpha < 2:
        raise ParameterError("cluster index requires alpha in (0, 1) u (1, 2)")
    return float((1.0 - alpha) / (gamma_fn(2.0 - alpha) * np.cos(np.pi * alpha / 2.0)) * spectral_value)
