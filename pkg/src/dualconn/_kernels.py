"""Hot loops: triple classification and interference aggregation.

Each kernel has a numba implementation and a pure-numpy one with the same
inputs and outputs. The numba path is used when numba imports and the
environment variable ``DUALCONN_NO_NUMBA`` is unset or ``0``. Both paths
consume the same pre-drawn random arrays, so the backend choice never
changes which random numbers a run sees.

Subcase codes: ``2 * (case - 1) + (subcase - 1)``, i.e. 0 is subcase 1.1 and
11 is subcase 6.2. Code -1 means no row matched and is a bug.
"""
import os

import numpy as np

__all__ = ["BACKEND", "classify_codes", "aggregate_interference"]


def _numba_requested():
    return os.environ.get("DUALCONN_NO_NUMBA", "0").strip().lower() in ("", "0", "false", "no")


try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on the environment
    HAVE_NUMBA = False


# --- classification ---------------------------------------------------------
#
# Ties are broken by the fixed precedence MCell < SCell 1 < SCell 2, so a
# comparison "A before B" is `<=` when A outranks B and `<` otherwise. The
# MCell's downlink position uses x_m / sqrt(eta); the same quotient is used
# by the ordering classifier so both share their rounding.


def classify_codes_numpy(xm, x1, x2, root_eta):
    xm = np.asarray(xm, dtype=np.float64)
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    md = xm / root_eta
    s12 = x1 <= x2
    s21 = ~s12
    conditions = [
        (xm <= x1) & s12,
        (xm <= x2) & s21,
        (x1 < md) & (xm <= x2),
        (x2 < md) & (xm <= x1),
        (x1 < md) & (md <= x2) & (x2 < xm),
        (x2 < md) & (md <= x1) & (x1 < xm),
        s12 & (x2 < xm) & (md <= x1),
        s21 & (x1 < xm) & (md <= x2),
        (xm <= x2) & (x1 < xm) & (md <= x1),
        (xm <= x1) & (x2 < xm) & (md <= x2),
        s12 & (x2 < md),
        s21 & (x1 < md),
    ]
    return np.select(conditions, np.arange(12, dtype=np.int8), default=np.int8(-1)).astype(np.int8)


def _classify_one(xm, x1, x2, root_eta):
    md = xm / root_eta
    s12 = x1 <= x2
    if s12:
        if xm <= x1:
            return 0
        if xm <= x2:
            return 8 if md <= x1 else 2
        if md <= x1:
            return 6
        if md <= x2:
            return 4
        return 10
    if xm <= x2:
        return 1
    if xm <= x1:
        return 9 if md <= x2 else 3
    if md <= x2:
        return 7
    if md <= x1:
        return 5
    return 11


def _classify_loop(xm, x1, x2, root_eta):
    n = xm.shape[0]
    out = np.empty(n, dtype=np.int8)
    for i in range(n):
        out[i] = _classify_one(xm[i], x1[i], x2[i], root_eta)
    return out


# --- interference -------------------------------------------------------------


def aggregate_interference_numpy(counts, u, h, r2_cut, half_alpha, exclusion_r2=None):
    """Sum ``h * r**-alpha`` per field for interferers uniform on a disc.

    ``u`` in (0, 1] maps to squared radius ``r2_cut * u``. Interferers at
    squared radius not above ``exclusion_r2[i]`` are dropped from field i.
    """
    n = counts.shape[0]
    seg = np.repeat(np.arange(n), counts)
    r2 = r2_cut * u
    w = h * r2 ** (-half_alpha)
    if exclusion_r2 is not None:
        w = np.where(r2 > exclusion_r2[seg], w, 0.0)
    return np.bincount(seg, weights=w, minlength=n)


def _aggregate_loop(counts, u, h, r2_cut, half_alpha, exclusion_r2, use_exclusion):
    n = counts.shape[0]
    out = np.zeros(n, dtype=np.float64)
    # integer exponents (alpha = 4, 6, ...) avoid the generic pow
    int_power = 0
    if half_alpha == np.floor(half_alpha) and 1.0 <= half_alpha <= 8.0:
        int_power = int(half_alpha)
    j = 0
    for i in range(n):
        acc = 0.0
        floor = exclusion_r2[i] if use_exclusion else -1.0
        for _ in range(counts[i]):
            r2 = r2_cut * u[j]
            if r2 > floor:
                if int_power:
                    p = r2
                    for _k in range(int_power - 1):
                        p *= r2
                    acc += h[j] / p
                else:
                    acc += h[j] * r2 ** (-half_alpha)
            j += 1
        out[i] = acc
    return out


if HAVE_NUMBA:
    _classify_one_nb = njit(cache=True)(_classify_one)

    @njit(cache=True)
    def _classify_loop_nb(xm, x1, x2, root_eta):
        n = xm.shape[0]
        out = np.empty(n, dtype=np.int8)
        for i in range(n):
            out[i] = _classify_one_nb(xm[i], x1[i], x2[i], root_eta)
        return out

    _aggregate_loop_nb = njit(cache=True)(_aggregate_loop)


def classify_codes_numba(xm, x1, x2, root_eta):
    if not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    xm, x1, x2 = (np.ascontiguousarray(a, dtype=np.float64) for a in np.broadcast_arrays(xm, x1, x2))
    return _classify_loop_nb(xm.ravel(), x1.ravel(), x2.ravel(), float(root_eta)).reshape(xm.shape)


def aggregate_interference_numba(counts, u, h, r2_cut, half_alpha, exclusion_r2=None):
    if not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    use_exclusion = exclusion_r2 is not None
    excl = np.ascontiguousarray(exclusion_r2 if use_exclusion else np.zeros(1), dtype=np.float64)
    return _aggregate_loop_nb(counts, u, h, float(r2_cut), float(half_alpha), excl, use_exclusion)


BACKEND = "numba" if (HAVE_NUMBA and _numba_requested()) else "numpy"

if BACKEND == "numba":
    classify_codes = classify_codes_numba
    aggregate_interference = aggregate_interference_numba
else:
    classify_codes = classify_codes_numpy
    aggregate_interference = aggregate_interference_numpy
