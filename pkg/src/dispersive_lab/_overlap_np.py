"""Vectorized overlap counting, the fallback when the compiled kernel is
absent.  Mirrors the scalar enumeration in :mod:`dispersive_lab.dyadic`:
closed-form candidate windows per point, exact membership arithmetic,
one fused pass per (scale offset, m, position offset) triple.
"""

from __future__ import annotations

import numpy as np

_OFFSETS = (-3, -2, 2, 3)


def _count_a(tau: np.ndarray, xi: np.ndarray, ms: float, out: np.ndarray) -> None:
    # xi*xi*xi matches the scalar and compiled paths bit for bit; the
    # cubic cancellation makes any ulp difference here visible.
    d = tau - xi * xi * xi / 4.0
    idx = np.nonzero((xi > 0) & (d > 0))[0]
    if idx.size == 0:
        return
    x = xi[idx]
    dd = d[idx]
    c_lo = 0.73 - 0.0125 * ms
    c_hi = 12.1 + 0.0125 * ms
    j_lo = np.log2(2.0 / x)
    if c_lo > 0:
        j_lo = np.maximum(j_lo, 0.5 * np.log2(c_lo * x / dd))
    j_first = (np.ceil(j_lo) - 2).astype(np.int64)
    j_last = (np.floor(0.5 * np.log2(c_hi * x / dd)) + 2).astype(np.int64)
    span = int((j_last - j_first).max()) + 1
    for off in range(span):
        j = j_first + off
        active = j <= j_last
        jf = j.astype(np.float64)
        w = x * np.exp2(jf)
        inv2j = np.exp2(-jf)
        q = 0.75 * x * inv2j * inv2j
        inv2j3 = inv2j * inv2j * inv2j
        for mi, m in enumerate(_OFFSETS):
            k_first = np.ceil((w - m - 2) / 2.0)
            band_lo = (abs(m) - 1) ** 2 * q
            band_hi = (abs(m) + 1) ** 2 * q
            for dk in (0.0, 1.0):
                k = k_first + dk
                s = 2.0 * k + m
                lam = ms * k * inv2j3 / 100.0
                ok = (
                    active
                    & (k >= 0)
                    & (k + m >= 0)
                    & (s <= w)
                    & (w < s + 2)
                    & (band_lo - lam <= dd)
                    & (dd < band_hi + lam)
                )
                out[idx[ok], mi] += 1


def _count_b(tau: np.ndarray, xi: np.ndarray, ms: float, out: np.ndarray) -> None:
    d = tau - xi * xi * xi / 4.0
    for mi, m in enumerate(_OFFSETS):
        sign_ok = (xi < 0) if m > 0 else (xi > 0)
        idx = np.nonzero(sign_ok)[0]
        if idx.size == 0:
            continue
        x = xi[idx]
        ax = np.abs(x)
        dd = d[idx]
        am = abs(m)
        j_first = (np.ceil(np.log2((am - 1) / ax)) - 1).astype(np.int64)
        j_last = (np.floor(np.log2((am + 1) / ax)) + 1).astype(np.int64)
        span = int((j_last - j_first).max()) + 1
        for off in range(span):
            j = j_first + off
            jf = j.astype(np.float64)
            inv2j = np.exp2(-jf)
            window = (j <= j_last) & ((am - 1) * inv2j <= ax) & (ax < (am + 1) * inv2j)
            q = 0.75 * x * inv2j * inv2j
            ratio = dd / q
            s0 = np.floor(np.sqrt(np.maximum(ratio, 0.0)))
            inv2j3 = inv2j * inv2j * inv2j
            for ds in range(-4, 3):
                s = s0 + ds
                k = (s - m) / 2.0
                e1 = s * s * q
                e2 = (s + 2) * (s + 2) * q
                lam = ms * k * inv2j3 / 100.0
                ok = (
                    window
                    & (np.mod(s - m, 2.0) == 0.0)
                    & (k >= 0)
                    & (k + m >= 0)
                    & (np.minimum(e1, e2) - lam <= dd)
                    & (dd < np.maximum(e1, e2) + lam)
                )
                out[idx[ok], mi] += 1


def count_many(
    tau: np.ndarray, xi: np.ndarray, family_code: int, margin_scale: float
) -> np.ndarray:
    """Per-m overlap counts, shape (n, 4), columns ordered (-3, -2, 2, 3)."""
    out = np.zeros((tau.size, 4), dtype=np.int64)
    if family_code == 0:
        _count_a(tau, xi, margin_scale, out)
    else:
        _count_b(tau, xi, margin_scale, out)
    return out
