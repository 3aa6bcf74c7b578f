"""Numba kernels for the stencil, CG vector updates and reproducible dots.

Every kernel writes disjoint output slots per loop iteration, so results do
not depend on how ``prange`` distributes work across threads.
"""
from __future__ import annotations

import math

import numba
import numpy as np
from numba import njit, prange

# tbb in this image is too old; try omp first so numba does not warn probing it
numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

CHUNK = 1 << 14
FOLDS = 3


@njit(inline="always")
def _stencil(u, i, j, height, width, ith, iph):
    c = u[i, j]
    if i > 0:
        down = u[i - 1, j]
    else:
        down = c
    if i < height - 1:
        up = u[i + 1, j]
    else:
        up = u[i, (j + width // 2) % width]
    if j > 0:
        left = u[i, j - 1]
    else:
        left = u[i, width - 1]
    if j < width - 1:
        right = u[i, j + 1]
    else:
        right = u[i, 0]
    return (up - 2.0 * c + down) * ith + (right - 2.0 * c + left) * iph


@njit(parallel=True, cache=True)
def laplacian(u, ith, iph, out):
    height, width = u.shape
    for i in prange(height):
        for j in range(width):
            out[i, j] = _stencil(u, i, j, height, width, ith, iph)


@njit(parallel=True, cache=True)
def system(u, known, ith, iph, out):
    height, width = u.shape
    for i in prange(height):
        for j in range(width):
            if known[i, j]:
                out[i, j] = u[i, j]
            else:
                out[i, j] = -_stencil(u, i, j, height, width, ith, iph)


@njit(parallel=True, cache=True)
def neg_laplacian_unknown(u, known, ith, iph, out):
    """-(A u) on unknown pixels, exact zero on known ones."""
    height, width = u.shape
    for i in prange(height):
        for j in range(width):
            if known[i, j]:
                out[i, j] = 0.0
            else:
                out[i, j] = -_stencil(u, i, j, height, width, ith, iph)


@njit(parallel=True, cache=True)
def laplacian_unknown(u, known, ith, iph, out):
    """A u on unknown pixels, exact zero on known ones."""
    height, width = u.shape
    for i in prange(height):
        for j in range(width):
            if known[i, j]:
                out[i, j] = 0.0
            else:
                out[i, j] = _stencil(u, i, j, height, width, ith, iph)


@njit(parallel=True, cache=True)
def absmax_product(x, y):
    """max |x_k * y_k| and a flag set if any product is not finite."""
    n = x.size
    nch = (n + CHUNK - 1) // CHUNK
    part = np.zeros(nch)
    bad = np.zeros(nch, dtype=np.bool_)
    for c in prange(nch):
        lo = c * CHUNK
        hi = min(n, lo + CHUNK)
        m = 0.0
        b = False
        for k in range(lo, hi):
            v = abs(x[k] * y[k])
            if not v < np.inf:
                b = True
            elif v > m:
                m = v
        part[c] = m
        bad[c] = b
    m = 0.0
    for c in range(nch):
        if part[c] > m:
            m = part[c]
    return m, bad.any()


@njit(cache=True)
def _sigmas(absmax, n):
    # Extraction constants 1.5 * 2**k; each fold's rounded parts are
    # multiples of 2**(k-52) whose sum over n terms stays below 2**(k+1),
    # so all additions inside a fold are exact and order-independent.
    levels = 1
    while (1 << levels) < n:
        levels += 1
    _, e = math.frexp(absmax)
    sig = np.empty(FOLDS)
    k = e + levels + 1
    for f in range(FOLDS):
        sig[f] = 1.5 * math.ldexp(1.0, k)
        k = k - 53 + levels + 1
    return sig


@njit(parallel=True, cache=True)
def folded_dot(x, y, absmax):
    """Dot product that is bitwise independent of summation order."""
    n = x.size
    if absmax == 0.0 or n == 0:
        return 0.0
    sig = _sigmas(absmax, n)
    s1, s2, s3 = sig[0], sig[1], sig[2]
    nch = (n + CHUNK - 1) // CHUNK
    acc = np.zeros((nch, FOLDS))
    for c in prange(nch):
        lo = c * CHUNK
        hi = min(n, lo + CHUNK)
        a1 = 0.0
        a2 = 0.0
        a3 = 0.0
        for k in range(lo, hi):
            v = x[k] * y[k]
            q = (s1 + v) - s1
            v = v - q
            a1 += q
            q = (s2 + v) - s2
            v = v - q
            a2 += q
            q = (s3 + v) - s3
            a3 += q
        acc[c, 0] = a1
        acc[c, 1] = a2
        acc[c, 2] = a3
    t1 = 0.0
    t2 = 0.0
    t3 = 0.0
    for c in range(nch):
        t1 += acc[c, 0]
        t2 += acc[c, 1]
        t3 += acc[c, 2]
    return (t1 + t2) + t3


@njit(parallel=True, cache=True)
def update_solution(x, r, p, q, alpha):
    """x += alpha p, r -= alpha q; returns (max r_k^2, any non-finite)."""
    n = x.size
    nch = (n + CHUNK - 1) // CHUNK
    part = np.zeros(nch)
    bad = np.zeros(nch, dtype=np.bool_)
    for c in prange(nch):
        lo = c * CHUNK
        hi = min(n, lo + CHUNK)
        m = 0.0
        b = False
        for k in range(lo, hi):
            x[k] = x[k] + alpha * p[k]
            rk = r[k] - alpha * q[k]
            r[k] = rk
            v = rk * rk
            if not v < np.inf:
                b = True
            elif v > m:
                m = v
        part[c] = m
        bad[c] = b
    m = 0.0
    for c in range(nch):
        if part[c] > m:
            m = part[c]
    return m, bad.any()


@njit(parallel=True, cache=True)
def update_direction(p, r, beta):
    n = p.size
    nch = (n + CHUNK - 1) // CHUNK
    for c in prange(nch):
        lo = c * CHUNK
        hi = min(n, lo + CHUNK)
        for k in range(lo, hi):
            p[k] = r[k] + beta * p[k]
