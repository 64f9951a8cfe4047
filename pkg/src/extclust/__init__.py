"""extclust: Monte Carlo simulation and verification of extremal clusters
in heavy-tailed stationary time series.

Subpackage map
--------------
models      heavy-tailed series catalog, normalizing constants, cluster samplers
empirics    tail / spectral tail process estimation, block diagnostics
clusters    block exceedance clusters, extremal index, cluster-law checks
limitproc   exact simulation of the limiting Poisson cluster process, Laplace functionals
extremal    running-maximum paths, positive-sup functional, M1 distance, Frechet checks
stats       KS / Hill / distance correlation / MC error accounting
cli         batch experiment driver (`extclust run`, `extclust demo-remark`)
kernels     compiled (Cython) or NumPy backend for the hot loops
"""

__version__ = "0.1.0"

from .kernels import BACKEND
from .models import ModelSpec, SeriesPath, generate, normalizing_constant, theoretical_theta

__all__ = [
    "BACKEND",
    "ModelSpec",
    "SeriesPath",
    "generate",
    "normalizing_constant",
    "theoretical_theta",
    "__version__",
]
