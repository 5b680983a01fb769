import os
import subprocess
import sys

import numpy as np
import pytest

from dualconn import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def _triples(n, seed=0, ties=True):
    g = np.random.default_rng(seed)
    xm = np.sqrt(g.exponential(size=n) / (np.pi * 1.47e-5))
    x1 = np.sqrt(g.exponential(size=n) / (np.pi * 7.35e-5))
    x2 = np.sqrt(g.exponential(size=n) / (np.pi * 7.35e-5))
    if ties:
        k = n // 10
        x2[:k] = x1[:k]
        xm[k:2 * k] = x1[k:2 * k]
        xm[2 * k:3 * k] = 2.0 * x1[2 * k:3 * k]
    return xm, x1, x2


def test_numpy_classifier_covers_every_triple():
    codes = _kernels.classify_codes_numpy(*_triples(100_000), 2.0)
    assert codes.min() >= 0 and codes.max() <= 11


@needs_numba
@pytest.mark.parametrize("root_eta", [1.0, 2.0, 10**0.325])
def test_numba_classifier_matches_numpy(root_eta):
    t = _triples(200_000, seed=int(root_eta * 10))
    assert np.array_equal(_kernels.classify_codes_numba(*t, root_eta), _kernels.classify_codes_numpy(*t, root_eta))


def _bank(n=500, seed=1):
    g = np.random.default_rng(seed)
    counts = g.poisson(40, n)
    total = counts.sum()
    return counts, 1.0 - g.random(total), g.standard_exponential(total)


@needs_numba
@pytest.mark.parametrize("excl", [False, True])
@pytest.mark.parametrize("half_alpha", [1.5, 1.75, 2.0, 3.0])
def test_numba_interference_matches_numpy(excl, half_alpha):
    counts, u, h = _bank()
    e = np.random.default_rng(2).uniform(0, 1e4, counts.size) if excl else None
    a = _kernels.aggregate_interference_numba(counts, u, h, 1e6, half_alpha, e)
    b = _kernels.aggregate_interference_numpy(counts, u, h, 1e6, half_alpha, e)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_interference_against_direct_sum():
    counts, u, h = _bank(20)
    out = _kernels.aggregate_interference_numpy(counts, u, h, 4.0, 2.0)
    start = 0
    for i, c in enumerate(counts):
        r = np.sqrt(4.0 * u[start:start + c])
        assert out[i] == pytest.approx(np.sum(h[start:start + c] * r**-4.0), rel=1e-12)
        start += c


@pytest.mark.parametrize("flag, expected", [("1", "numpy"), ("0", "numba")])
def test_environment_flag_selects_backend(flag, expected):
    if expected == "numba" and not _kernels.HAVE_NUMBA:
        pytest.skip("numba not installed")
    env = dict(os.environ, DUALCONN_NO_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", "from dualconn import _kernels; print(_kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == expected
