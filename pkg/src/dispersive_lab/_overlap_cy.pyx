# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled overlap-counting kernel.

Scalar per-point loops mirroring the candidate enumeration of
``dispersive_lab.dyadic`` / ``dispersive_lab._overlap_np``; built
optionally, with the vectorized module as the fallback.
"""

from libc.math cimport ceil, fabs, floor, ldexp, log2, sqrt

import numpy as np

cdef int[4] _OFFSETS = [-3, -2, 2, 3]


cdef void _point_a(double tau, double xi, double ms, long long* row) noexcept nogil:
    cdef double d, c_lo, c_hi, j_lo, cand, w, inv2j, q, lam, lo, hi, s
    cdef long j, j_first, j_last, k, k_first, k_last, ell
    cdef int mi, m, am
    if xi <= 0:
        return
    d = tau - xi * xi * xi / 4.0
    if d <= 0:
        return
    c_lo = 0.73 - 0.0125 * ms
    c_hi = 12.1 + 0.0125 * ms
    j_lo = log2(2.0 / xi)
    if c_lo > 0:
        cand = 0.5 * log2(c_lo * xi / d)
        if cand > j_lo:
            j_lo = cand
    j_first = <long>ceil(j_lo) - 2
    j_last = <long>floor(0.5 * log2(c_hi * xi / d)) + 2
    for j in range(j_first, j_last + 1):
        w = xi * ldexp(1.0, <int>j)
        inv2j = ldexp(1.0, <int>(-j))
        q = 0.75 * xi * inv2j * inv2j
        for mi in range(4):
            m = _OFFSETS[mi]
            am = m if m > 0 else -m
            k_first = <long>ceil((w - m - 2) / 2.0)
            k_last = <long>floor((w - m) / 2.0)
            for k in range(k_first, k_last + 1):
                ell = k + m
                if k < 0 or ell < 0:
                    continue
                s = 2.0 * k + m
                if s > w or w >= s + 2:
                    continue
                lam = ms * k * inv2j * inv2j * inv2j / 100.0
                lo = (am - 1) * (am - 1) * q - lam
                hi = (am + 1) * (am + 1) * q + lam
                if lo <= d < hi:
                    row[mi] += 1


cdef void _point_b(double tau, double xi, double ms, long long* row) noexcept nogil:
    cdef double d, ax, inv2j, q, ratio, lam, e1, e2, lo, hi, sf
    cdef long j, j_first, j_last, s0, s, k, ell
    cdef int mi, m, am, ds
    if xi == 0:
        return
    d = tau - xi * xi * xi / 4.0
    ax = fabs(xi)
    for mi in range(4):
        m = _OFFSETS[mi]
        if (m > 0) == (xi > 0):
            continue
        am = m if m > 0 else -m
        j_first = <long>ceil(log2((am - 1) / ax)) - 1
        j_last = <long>floor(log2((am + 1) / ax)) + 1
        for j in range(j_first, j_last + 1):
            inv2j = ldexp(1.0, <int>(-j))
            if (am - 1) * inv2j > ax or ax >= (am + 1) * inv2j:
                continue
            q = 0.75 * xi * inv2j * inv2j
            ratio = d / q
            s0 = <long>floor(sqrt(ratio)) if ratio > 0 else 0
            for ds in range(-4, 3):
                s = s0 + ds
                if (s - m) % 2 != 0:
                    continue
                k = (s - m) // 2
                ell = k + m
                if k < 0 or ell < 0:
                    continue
                sf = <double>s
                e1 = sf * sf * q
                e2 = (sf + 2.0) * (sf + 2.0) * q
                if e1 > e2:
                    lo = e2
                    hi = e1
                else:
                    lo = e1
                    hi = e2
                lam = ms * k * inv2j * inv2j * inv2j / 100.0
                if lo - lam <= d < hi + lam:
                    row[mi] += 1


def count_many(double[::1] tau, double[::1] xi, int family_code, double margin_scale):
    """Per-m overlap counts, shape (n, 4), columns ordered (-3, -2, 2, 3)."""
    cdef Py_ssize_t n = tau.shape[0]
    out = np.zeros((n, 4), dtype=np.int64)
    cdef long long[:, ::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        if family_code == 0:
            for i in range(n):
                _point_a(tau[i], xi[i], margin_scale, &ov[i, 0])
        else:
            for i in range(n):
                _point_b(tau[i], xi[i], margin_scale, &ov[i, 0])
    return out
