"""The test-functional library."""

import numpy as np
import pytest

from extclust.errors import DomainError
from extclust.functionals import TestFunctional, ramp_library, step_functional


def test_library_shape():
    lib = ramp_library()
    assert len(lib) == 9
    assert {f.time_shape for f in lib} == {"one", "t", "one-minus-t"}
    assert {f.scale for f in lib} == {0.5, 1.0, 2.0}


def test_ramp_vanishes_below_support_and_saturates():
    f = TestFunctional(scale=2.0, time_shape="one", support=1.0)
    norms = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 5.0])
    np.testing.assert_allclose(f.space_factor(norms), [0.0, 0.0, 0.0, 0.5, 1.0, 1.0])
    np.testing.assert_allclose(f(0.3, norms), 2.0 * f.space_factor(norms))


def test_time_shapes():
    t = np.array([0.0, 0.25, 1.0])
    assert np.allclose(TestFunctional(1.0, "t").time_factor(t), t)
    assert np.allclose(TestFunctional(1.0, "one-minus-t").time_factor(t), 1 - t)
    assert np.allclose(TestFunctional(1.0, "one").time_factor(t), 1.0)


def test_step_functional():
    f = step_functional(1.5, support=2.0)
    np.testing.assert_allclose(f.space_factor(np.array([1.9, 2.0, 2.1])), [0.0, 0.0, 1.0])
    assert f.support == 2.0 and f.kind == "step"


def test_validation():
    with pytest.raises(DomainError):
        TestFunctional(scale=-1.0)
    with pytest.raises(DomainError):
        TestFunctional(scale=1.0, time_shape="t^2")
    with pytest.raises(DomainError):
        TestFunctional(scale=1.0, kind="bump")
