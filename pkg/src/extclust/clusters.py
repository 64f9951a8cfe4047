"""Exceedance clusters of disjoint blocks and their limit-law checks.

A block whose maximum norm exceeds a_n * u is rescaled by a_n * u and
kept as one cluster.  The cluster splits into its sup L (Pareto(alpha)
on [1, inf) in the limit) and the normalized point sequence Q with
sup-norm exactly 1; the two are asymptotically independent, which the
independence report tests empirically.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InsufficientDataError, ParameterError
from .models import vector_norms
from .seeds import derive_seed
from .stats import KSReport, distance_correlation, ks_test


@dataclass(frozen=True)
class Cluster:
    """One block's exceedance cluster on the a_n * u scale."""

    points: np.ndarray  # (k, d), every row norm >= floor
    L: float  # sup of point norms, >= 1 by conditioning
    Q: np.ndarray  # points / L, sup-norm exactly 1
    path_id: int = 0
    block_id: int = 0

    @property
    def size(self):
        return self.points.shape[0]

    def q_norms(self, norm="sup"):
        return vector_norms(self.Q, norm)


def extract_clusters(paths, scheme, floor=1e-3, norm="sup"):
    """Per-block clusters of rescaled values above ``floor``.

    Blocks are disjoint with the ragged tail of length n - k_n r_n
    discarded; a block qualifies when its maximum norm exceeds a_n * u.
    """
    if not 0 < floor < 1:
        raise ParameterError("cluster floor must be in (0, 1)")
    clusters = []
    blocks_seen = 0
    for path_id, path in enumerate(paths):
        r = scheme.r_n
        k_n = path.n // r
        blocks_seen += k_n
        scale = path.a_n * scheme.u
        norms = path.norms(norm)
        maxima = kernels.block_maxima(np.ascontiguousarray(norms), r)
        for block_id in np.nonzero(maxima > scale)[0]:
            lo = block_id * r
            block_norms = norms[lo : lo + r] / scale
            keep = block_norms >= floor
            points = path.values[lo : lo + r][keep] / scale
            L = float(maxima[block_id] / scale)
            clusters.append(
                Cluster(
                    points=points,
                    L=L,
                    Q=points / L,
                    path_id=path_id,
                    block_id=int(block_id),
                )
            )
    if not clusters:
        raise InsufficientDataError("no block maximum exceeded a_n * u", blocks_seen)
    return clusters


@dataclass(frozen=True)
class ThetaEstimate:
    value: float
    stderr: float
    u: float
    paths: int


def estimate_theta(paths, scheme, norm="sup"):
    """Extremal index from the block-count normalization
    k_n P(M_{r_n} > a_n u) -> theta u^{-alpha}.

    Per path, theta_hat = u^alpha * (number of blocks with block maximum
    above a_n u); the estimate and Monte Carlo standard error are the mean
    and SE over paths.
    """
    per_path = []
    alpha = None
    for path in paths:
        alpha = path.model.alpha
        r = scheme.r_n
        norms = path.norms(norm)
        maxima = kernels.block_maxima(np.ascontiguousarray(norms), r)
        count = int(np.sum(maxima > path.a_n * scheme.u))
        per_path.append(scheme.u ** alpha * count)
    per_path = np.asarray(per_path, dtype=np.float64)
    if per_path.sum() == 0:
        raise InsufficientDataError("no qualifying blocks in any path", 0)
    stderr = per_path.std(ddof=1) / np.sqrt(per_path.size) if per_path.size > 1 else float("inf")
    return ThetaEstimate(
        value=float(per_path.mean()),
        stderr=float(stderr),
        u=scheme.u,
        paths=per_path.size,
    )


def check_L_pareto(clusters, alpha) -> KSReport:
    """KS statistic of the cluster sups {L} against P(L > v) = v^{-alpha}."""
    if len(clusters) < 100:
        raise InsufficientDataError("check_L_pareto needs >= 100 clusters", len(clusters))
    sample = np.array([c.L for c in clusters])
    return ks_test(sample, lambda v: 1.0 - v ** -alpha)


# Default functionals g(Q) for the independence report
def _count_above_half(q_norms):
    return float(np.sum(q_norms > 0.5))


def _alpha_sum(alpha):
    def g(q_norms):
        return float(np.sum(q_norms ** alpha))

    g.__name__ = "alpha_sum"
    return g


def _second_largest(q_norms):
    if q_norms.size < 2:
        return 0.0
    return float(np.sort(q_norms)[-2])


def default_cluster_functionals(alpha):
    return (
        ("count_above_half", _count_above_half),
        ("alpha_sum", _alpha_sum(alpha)),
        ("second_largest", _second_largest),
    )


@dataclass(frozen=True)
class FactorizationRow:
    v: float
    residual: float
    stderr: float


@dataclass(frozen=True)
class IndependenceReport:
    n_clusters: int
    dcor: tuple  # (name, DcorResult) pairs
    factorization: tuple  # FactorizationRow at each tested level


def check_independence(
    clusters,
    alpha=1.0,
    statistics=None,
    permutations=1000,
    levels=(1.5, 2.0),
    seed=0,
    norm="sup",
) -> IndependenceReport:
    """Empirical independence of L and the normalized cluster Q.

    For each cluster functional g: distance correlation between L and
    g(Q) with a permutation p-value.  The factorization rows report
    | mean(e^{-g(Q)} 1{L>v}) - mean(e^{-g(Q)}) P(L>v) |, i.e. the sample
    covariance of the two factors, with its Monte Carlo standard error.
    ``alpha`` parameterizes the default functionals.
    """
    if len(clusters) < 500:
        raise InsufficientDataError("check_independence needs >= 500 clusters", len(clusters))
    if statistics is None:
        statistics = default_cluster_functionals(alpha)
    L = np.array([c.L for c in clusters])
    q_norms = [c.q_norms(norm) for c in clusters]

    dcor_rows = []
    for i, (name, g) in enumerate(statistics):
        gq = np.array([g(qn) for qn in q_norms])
        res = distance_correlation(
            L, gq, permutations=permutations, seed=derive_seed(seed, 0xDC0, i)
        )
        dcor_rows.append((name, res))

    # factorization residual with the first functional's exponential weight
    name0, g0 = statistics[0]
    w = np.exp(-np.array([g0(qn) for qn in q_norms]))
    fact_rows = []
    n = L.size
    for v in levels:
        ind = (L > v).astype(np.float64)
        prod = (w - w.mean()) * (ind - ind.mean())
        residual = abs(float(np.mean(w * ind) - w.mean() * ind.mean()))
        stderr = float(prod.std(ddof=1) / np.sqrt(n))
        fact_rows.append(FactorizationRow(v=float(v), residual=residual, stderr=stderr))
    return IndependenceReport(
        n_clusters=len(clusters),
        dcor=tuple(dcor_rows),
        factorization=tuple(fact_rows),
    )


class EmpiricalClusterSampler:
    """Uniform-with-replacement resampler over extracted clusters' Q arrays."""

    deterministic = False

    def __init__(self, clusters):
        if not clusters:
            raise InsufficientDataError("no clusters to resample", 0)
        self._qs = [np.asarray(c.Q, dtype=np.float64) for c in clusters]

    def draw(self, rng):
        return self._qs[int(rng.integers(len(self._qs)))]


def empirical_cluster_sampler(clusters) -> EmpiricalClusterSampler:
    return EmpiricalClusterSampler(clusters)


def write_cluster_records(clusters, fh):
    """Line-delimited records (path-id, block-id, L, Q points)."""
    for c in clusters:
        rec = {
            "path": c.path_id,
            "block": c.block_id,
            "L": c.L,
            "q": [list(map(float, row)) for row in np.atleast_2d(c.Q)],
        }
        fh.write(json.dumps(rec) + "\n")


def read_cluster_records(fh):
    clusters = []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        q = np.asarray(rec["q"], dtype=np.float64)
        L = float(rec["L"])
        clusters.append(
            Cluster(points=q * L, L=L, Q=q, path_id=rec["path"], block_id=rec["block"])
        )
    return clusters
