"""Test functionals on [0, 1] x (R^d \\ {0}) used by the verification suite.

All functionals are separable, f(t, x) = s * g(t) * h(||x||), bounded,
nonnegative, and vanish for ||x|| <= support.  The default "ramp" space
shape (min(||x|| / u, 2) - 1)_+ is continuous and compactly supported
away from 0; "step" functionals s * 1{||x|| > u} are admitted for
validation because Laplace-functional identities extend to them by
monotone approximation.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

TIME_SHAPES = ("one", "t", "one-minus-t")


@dataclass(frozen=True)
class TestFunctional:
    __test__ = False  # not a pytest class, despite the name

    scale: float  # s
    time_shape: str = "one"
    support: float = 1.0  # u: f(t, x) = 0 whenever ||x|| <= u
    kind: str = "ramp"

    def __post_init__(self):
        if self.scale <= 0 or self.support <= 0:
            raise DomainError("scale and support must be positive")
        if self.time_shape not in TIME_SHAPES:
            raise DomainError(f"unknown time shape {self.time_shape!r}")
        if self.kind not in ("ramp", "step"):
            raise DomainError(f"unknown space shape {self.kind!r}")

    @property
    def label(self):
        return f"{self.kind}(s={self.scale:g},g={self.time_shape},u={self.support:g})"

    def time_factor(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.time_shape == "one":
            return np.ones_like(t)
        if self.time_shape == "t":
            return t
        return 1.0 - t

    def space_factor(self, norms):
        norms = np.asarray(norms, dtype=np.float64)
        if self.kind == "ramp":
            return np.clip(norms / self.support, 1.0, 2.0) - 1.0
        return (norms > self.support).astype(np.float64)

    def __call__(self, t, norms):
        return self.scale * self.time_factor(t) * self.space_factor(norms)


def ramp_library(support=1.0):
    """The nine continuous library functionals: g in {1, t, 1-t} x s in {.5, 1, 2}."""
    return tuple(
        TestFunctional(scale=s, time_shape=g, support=support)
        for g in TIME_SHAPES
        for s in (0.5, 1.0, 2.0)
    )


def step_functional(scale, support=1.0):
    return TestFunctional(scale=scale, support=support, kind="step")
