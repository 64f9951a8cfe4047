"""Backend agreement and kernel-level properties."""

import numpy as np
import pytest

from extclust import kernels


BACKENDS = kernels.available_backends()
pairwise = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(1234)


@pairwise
@pytest.mark.parametrize("phi", [0.0, 0.3, 0.5, 0.95])
def test_ar1_backends_bitwise_equal(rng, phi):
    z = rng.random(50_000)
    out = [kernels.backend_module(b).ar1_path(z, phi) for b in BACKENDS]
    assert np.array_equal(out[0], out[1])


@pairwise
def test_moving_max_backends_bitwise_equal(rng):
    z = rng.random(50_000) * 5
    for c in ([1.0], [1.0, 1.0], [0.25, 1.0, 0.5, 0.0]):
        out = [kernels.backend_module(b).moving_max_path(z, np.array(c)) for b in BACKENDS]
        assert np.array_equal(out[0], out[1])


@pairwise
def test_block_and_running_max_backends_bitwise_equal(rng):
    z = rng.random(12_345)
    for b1, b2 in [(BACKENDS[0], BACKENDS[1])]:
        m1 = kernels.backend_module(b1)
        m2 = kernels.backend_module(b2)
        assert np.array_equal(m1.block_maxima(z, 100), m2.block_maxima(z, 100))
        assert np.array_equal(m1.running_max(z), m2.running_max(z))


@pairwise
def test_frechet_backends_bitwise_equal(rng):
    p = np.ascontiguousarray(np.cumsum(rng.random((400, 2)), axis=0))
    q = np.ascontiguousarray(np.cumsum(rng.random((300, 2)), axis=0))
    vals = [kernels.backend_module(b).frechet_distance(p, q) for b in BACKENDS]
    assert vals[0] == vals[1]


@pairwise
def test_dcov_backends_close(rng):
    # different summation orders: equal to roundoff, not bitwise
    a = rng.standard_normal((150, 150))
    a = a + a.T
    b = rng.standard_normal((150, 150))
    b = b + b.T
    perms = np.stack([rng.permutation(150) for _ in range(10)]).astype(np.int64)
    out = [kernels.backend_module(name).dcov_permutation_stats(a, b, perms) for name in BACKENDS]
    np.testing.assert_allclose(out[0], out[1], rtol=1e-10, atol=1e-12)


def test_ar1_matches_naive_recursion(rng):
    z = rng.random(500)
    phi = 0.73
    expected = np.empty_like(z)
    expected[0] = z[0]
    for t in range(1, z.size):
        expected[t] = phi * expected[t - 1] + z[t]
    assert np.array_equal(kernels.ar1_path(z, phi), expected)


def test_moving_max_matches_naive_scan(rng):
    z = rng.random(200)
    c = np.array([0.5, 1.0, 0.25])
    out = kernels.moving_max_path(z, c)
    m = c.size - 1
    for t in range(z.size - m):
        assert out[t] == max(c[j] * z[t + m - j] for j in range(c.size))


def test_block_maxima_drops_ragged_tail(rng):
    z = rng.random(1000)
    out = kernels.block_maxima(z, 317)
    assert out.shape == (3,)
    np.testing.assert_array_equal(out, z[: 3 * 317].reshape(3, 317).max(axis=1))


def test_frechet_basic_properties(rng):
    a = np.ascontiguousarray(np.cumsum(rng.random((50, 2)), axis=0))
    b = np.ascontiguousarray(np.cumsum(rng.random((60, 2)), axis=0))
    c = np.ascontiguousarray(np.cumsum(rng.random((40, 2)), axis=0))
    d_ab = kernels.frechet_distance(a, b)
    assert kernels.frechet_distance(a, a) == 0.0
    assert d_ab == kernels.frechet_distance(b, a)
    assert d_ab <= kernels.frechet_distance(a, c) + kernels.frechet_distance(c, b) + 1e-12
    # lower bound: endpoints must be matched
    end_gap = np.abs(a[-1] - b[-1]).max()
    start_gap = np.abs(a[0] - b[0]).max()
    assert d_ab >= max(end_gap, start_gap) - 1e-12
