"""Backend selection for the numerical kernels.

On import, the compiled extension ``extclust._ckernels`` is preferred and
the NumPy implementations in ``extclust._kernels_py`` are the fallback.
The environment variable ``EXTCLUST_KERNELS`` forces a backend:

* ``EXTCLUST_KERNELS=c``       require the compiled extension (ImportError if absent)
* ``EXTCLUST_KERNELS=python``  force the NumPy fallback

Run ``python benchmarks/bench_kernels.py`` for a timing comparison.
"""

import os

from . import _kernels_py

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

_requested = os.environ.get("EXTCLUST_KERNELS", "").strip().lower()
if _requested in ("c", "compiled", "cython"):
    if _ckernels is None:
        raise ImportError(
            "EXTCLUST_KERNELS=c requested but extclust._ckernels is not built"
        )
    _impl = _ckernels
elif _requested in ("python", "py", "numpy"):
    _impl = _kernels_py
elif _requested == "":
    _impl = _ckernels if _ckernels is not None else _kernels_py
else:
    raise ValueError(f"unknown EXTCLUST_KERNELS value: {_requested!r}")

BACKEND = "c" if _impl is _ckernels and _ckernels is not None else "python"

ar1_path = _impl.ar1_path
moving_max_path = _impl.moving_max_path
block_maxima = _impl.block_maxima
running_max = _impl.running_max
frechet_distance = _impl.frechet_distance
dcov_permutation_stats = _impl.dcov_permutation_stats


def available_backends():
    names = ["python"]
    if _ckernels is not None:
        names.insert(0, "c")
    return names


def backend_module(name):
    if name == "python":
        return _kernels_py
    if name == "c":
        if _ckernels is None:
            raise ImportError("compiled kernel backend is not built")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
