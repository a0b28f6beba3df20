"""Dyadic intervals, the Whitney frequency relation, and the explicit
bilinear support regions in the (tau, xi) plane with their tau-direction
enlargements.

Two region families describe where the space-time transform of a product
of two frequency-localized Airy waves can live.  With ``m = ell - k``:

* Family A: ``xi`` in ``[(k+ell)/2^j, (k+ell+2)/2^j]`` and
  ``tau - xi^3/4`` between ``(3/4)(|m|-1)^2 xi/2^{2j}`` and
  ``(3/4)(|m|+1)^2 xi/2^{2j}``.
* Family B: ``xi`` in ``[(k-ell-1)/2^j, (k-ell+1)/2^j]`` (opposite sign
  to ``m``) and ``tau - xi^3/4`` between ``(3/4)(k+ell)^2 xi/2^{2j}``
  and ``(3/4)(k+ell+2)^2 xi/2^{2j}`` (edges ordered by the sign of xi).

The admissible index set requires ``m`` in {-3, -2, 2, 3} and
``k, ell >= 0``.  Enlarging a region widens its tau band by ``lambda``
on both sides; the canonical margin is ``k/(100 * 2^{3j})``.

Membership uses closed inequalities on every face: the regions are
closed bands and the almost-everywhere overlap statements ignore the
measure-zero boundaries.

Overlap counting enumerates a finite candidate set in closed form:
given a query point, the xi-window pins ``k`` (family A) or the scale
``j`` (family B) and the tau band pins the rest; candidates are then
checked exactly.  A compiled kernel accelerates bulk queries when the
optional extension is present, with a vectorized fallback otherwise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DispersiveLabError, ParameterError

#: Admissible values of m = ell - k.
WHITNEY_OFFSETS = (-3, -2, 2, 3)

#: Overlap enumeration supports margins up to this multiple of the
#: canonical lambda; beyond it the widened bands merge across scales and
#: the finite-overlap regime is gone.
MAX_MARGIN_SCALE = 50.0


@dataclass(frozen=True)
class DyadicInterval:
    """The half-open dyadic interval [k/2^j, (k+1)/2^j) at scale j."""

    j: int
    k: int

    @property
    def length(self) -> float:
        return math.ldexp(1.0, -self.j)

    def bounds(self) -> tuple[float, float]:
        return (math.ldexp(float(self.k), -self.j), math.ldexp(float(self.k + 1), -self.j))

    def contains(self, x: float) -> bool:
        lo, hi = self.bounds()
        return lo <= x < hi


def interval_bounds(iv: DyadicInterval) -> tuple[float, float]:
    """Endpoints of the dyadic interval, lower closed, upper open."""
    return iv.bounds()


@dataclass(frozen=True)
class FrequencyPoint:
    """A point (tau, xi) in the temporal/spatial frequency plane."""

    tau: float
    xi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.tau) and math.isfinite(self.xi)):
            raise ParameterError("frequency point must be finite")


def whitney_related(k: int, ell: int) -> bool:
    """The binary relation pairing same-scale dyadic intervals.

    Even ``k`` pairs with ``ell - k`` in {-2, 2, 3}; odd ``k`` with
    {-3, -2, 2}.  Both directions of the off-diagonal are covered while
    keeping the offset bounded.
    """
    if k < 0 or ell < 0:
        raise ParameterError("relation defined for nonnegative indices")
    d = ell - k
    if k % 2 == 0:
        return d in (-2, 2, 3)
    return d in (-3, -2, 2)


def whitney_cover_matches(xi: float, eta: float) -> list[tuple[int, int, int]]:
    """All (j, k, ell) with xi in tau^j_k, eta in tau^j_ell, related.

    The scan window in j is derived from the gap |xi - eta|: a related
    pair needs the gap to span roughly 1 to 4 cells.
    """
    if xi <= 0 or eta <= 0:
        raise ParameterError("Whitney location needs positive frequencies")
    if xi == eta:
        raise ParameterError("diagonal points have no Whitney cover")
    gap = abs(xi - eta)
    j_lo = math.floor(math.log2(1.0 / gap)) - 2
    j_hi = math.ceil(math.log2(4.0 / gap)) + 2
    found = []
    for j in range(j_lo, j_hi + 1):
        scale = math.ldexp(1.0, j)
        k = math.floor(xi * scale)
        ell = math.floor(eta * scale)
        if k >= 0 and ell >= 0 and whitney_related(k, ell):
            found.append((j, k, ell))
    return found


def locate_whitney(xi: float, eta: float) -> tuple[int, int, int]:
    """The covering triple (j, k, ell), scanning coarse to fine."""
    matches = whitney_cover_matches(xi, eta)
    if not matches:
        raise DispersiveLabError(f"no Whitney cover found for ({xi}, {eta})")
    return matches[0]


@dataclass(frozen=True)
class BilinearRegion:
    """An indexed region A_{j,k,ell} or B_{j,k,ell}."""

    family: str
    j: int
    k: int
    ell: int

    def __post_init__(self) -> None:
        if self.family not in ("A", "B"):
            raise ParameterError(f"unknown region family {self.family!r}")
        if self.k < 0 or self.ell < 0:
            raise ParameterError("region indices must be nonnegative")
        if self.ell - self.k not in WHITNEY_OFFSETS:
            raise ParameterError(f"offset {self.ell - self.k} outside {WHITNEY_OFFSETS}")

    @property
    def m(self) -> int:
        return self.ell - self.k

    def xi_window(self) -> tuple[float, float]:
        two_j = math.ldexp(1.0, -self.j)
        if self.family == "A":
            return ((self.k + self.ell) * two_j, (self.k + self.ell + 2) * two_j)
        return ((self.k - self.ell - 1) * two_j, (self.k - self.ell + 1) * two_j)

    def tau_band(self, xi: float) -> tuple[float, float]:
        """The band for tau - xi^3/4 at this xi, edges sorted."""
        two_j = math.ldexp(1.0, -self.j)
        q = 0.75 * xi * two_j * two_j
        if self.family == "A":
            a = (abs(self.m) - 1) ** 2 * q
            b = (abs(self.m) + 1) ** 2 * q
        else:
            s = self.k + self.ell
            a = s * s * q
            b = (s + 2) * (s + 2) * q
        return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class EnlargedRegion:
    """A bilinear region widened by ``lam`` in the tau direction."""

    base: BilinearRegion
    lam: float

    def __post_init__(self) -> None:
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ParameterError("enlargement margin must be finite and nonnegative")

    @classmethod
    def canonical(cls, base: BilinearRegion, scale: float = 1.0) -> "EnlargedRegion":
        return cls(base, scale * base.k * math.ldexp(1.0, -3 * base.j) / 100.0)


def canonical_margin(region: BilinearRegion, scale: float = 1.0) -> float:
    return scale * region.k * math.ldexp(1.0, -3 * region.j) / 100.0


def region_contains(r: EnlargedRegion, p: FrequencyPoint) -> bool:
    """Exact membership test, lower faces closed and upper faces open.

    Half-open faces follow ``DyadicInterval.contains``: the regions tile
    by the same convention as the intervals they are built from, so a
    point on a shared face is counted once, never twice.  Overlap depth
    is a pointwise a.e. statement and must not inflate on the
    measure-zero skeleton of shared faces.
    """
    lo_xi, hi_xi = r.base.xi_window()
    if not (lo_xi <= p.xi < hi_xi):
        return False
    lo, hi = r.base.tau_band(p.xi)
    # xi*xi*xi (not xi**3) so that every counting path, compiled
    # included, evaluates the cubic identically: points near the cubic
    # have catastrophically cancelling tau - xi^3/4.
    d = p.tau - p.xi * p.xi * p.xi / 4.0
    return lo - r.lam <= d < hi + r.lam


# ---------------------------------------------------------------------------
# Overlap enumeration
# ---------------------------------------------------------------------------
#
# Family A candidate bounds for a point with xi > 0, D = tau - xi^3/4 > 0:
# the xi-window forces 2^{-j} <= xi/2 (its left edge is at least 2*2^{-j}),
# and under that the canonical margin is below 0.0125*ms*xi*2^{-2j}.  The
# widened tau band is then contained in
#     [ (0.75 - 0.0125 ms) xi 2^{-2j}, (12 + 0.0125 ms) xi 2^{-2j} ],
# which brackets j once D is fixed.  Within one scale, k is pinned by
# 2k + m in [xi 2^j - 2, xi 2^j].
#
# Family B: the xi-window alone pins 2^{-j} within a factor of
# (|m|+1)/(|m|-1), and the tau band pins s = 2k + m near
# sqrt(D / (0.75 xi 2^{-2j})).  The margin shifts s by well under one
# unit for margin scales up to MAX_MARGIN_SCALE.
#
# All bounds are used only to generate candidates; each candidate is
# accepted or rejected by the exact membership test.


def _check_margin_scale(margin_scale: float) -> None:
    if not (0.0 <= margin_scale <= MAX_MARGIN_SCALE):
        raise ParameterError(
            f"margin scale {margin_scale} outside [0, {MAX_MARGIN_SCALE}]"
        )


def _candidates_a(tau: float, xi: float, margin_scale: float) -> Iterator[BilinearRegion]:
    if xi <= 0:
        return
    d = tau - xi * xi * xi / 4.0
    if d <= 0:
        return
    c_lo = 0.73 - 0.0125 * margin_scale
    c_hi = 12.1 + 0.0125 * margin_scale
    j_window = math.log2(2.0 / xi)
    j_lo = j_window
    if c_lo > 0:
        j_lo = max(j_lo, 0.5 * math.log2(c_lo * xi / d))
    j_first = math.ceil(j_lo) - 2
    j_last = math.floor(0.5 * math.log2(c_hi * xi / d)) + 2
    for j in range(j_first, j_last + 1):
        w = xi * math.ldexp(1.0, j)
        for m in WHITNEY_OFFSETS:
            k_first = math.ceil((w - m - 2) / 2.0)
            k_last = math.floor((w - m) / 2.0)
            for k in range(k_first, k_last + 1):
                ell = k + m
                if k < 0 or ell < 0:
                    continue
                yield BilinearRegion("A", j, k, ell)


def _candidates_b(tau: float, xi: float, margin_scale: float) -> Iterator[BilinearRegion]:
    if xi == 0:
        return
    d = tau - xi * xi * xi / 4.0
    axi = abs(xi)
    s_pad = 4
    for m in WHITNEY_OFFSETS:
        if (m > 0) == (xi > 0):
            continue  # window sign is opposite to m
        am = abs(m)
        j_first = math.ceil(math.log2((am - 1) / axi)) - 1
        j_last = math.floor(math.log2((am + 1) / axi)) + 1
        for j in range(j_first, j_last + 1):
            two_j = math.ldexp(1.0, -j)
            q = 0.75 * xi * two_j * two_j
            ratio = d / q  # nonnegative whenever the point can match
            s_center = math.sqrt(ratio) if ratio > 0 else 0.0
            s0 = math.floor(s_center)
            for s in range(s0 - s_pad, s0 + 3):
                if (s - m) % 2:
                    continue
                k = (s - m) // 2
                ell = k + m
                if k < 0 or ell < 0:
                    continue
                yield BilinearRegion("B", j, k, ell)


@dataclass(frozen=True)
class OverlapCount:
    """Total overlap count with the per-offset breakdown."""

    total: int
    by_m: dict[int, int]

    def __int__(self) -> int:
        return self.total


def enumerate_overlaps(
    family: str, p: FrequencyPoint, margin_scale: float = 1.0
) -> list[BilinearRegion]:
    """All admissible regions of the family whose canonical enlargement
    (scaled by ``margin_scale``) contains the point."""
    _check_margin_scale(margin_scale)
    if family == "A":
        gen = _candidates_a(p.tau, p.xi, margin_scale)
    elif family == "B":
        gen = _candidates_b(p.tau, p.xi, margin_scale)
    else:
        raise ParameterError(f"unknown region family {family!r}")
    hits = []
    seen = set()
    for region in gen:
        key = (region.j, region.k, region.ell)
        if key in seen:
            continue
        seen.add(key)
        if region_contains(EnlargedRegion.canonical(region, margin_scale), p):
            hits.append(region)
    return hits


def overlap_count(family: str, p: FrequencyPoint, margin_scale: float = 1.0) -> OverlapCount:
    """Count admissible enlarged regions containing the point."""
    by_m = {m: 0 for m in WHITNEY_OFFSETS}
    for region in enumerate_overlaps(family, p, margin_scale):
        by_m[region.m] += 1
    return OverlapCount(sum(by_m.values()), by_m)


# ---------------------------------------------------------------------------
# Bulk counting: compiled kernel if available, vectorized fallback
# ---------------------------------------------------------------------------

try:  # pragma: no cover - exercised only when the extension is built
    from ._overlap_cy import count_many as _count_many_compiled
except ImportError:
    _count_many_compiled = None

from ._overlap_np import count_many as _count_many_vectorized

HAVE_COMPILED_KERNEL = _count_many_compiled is not None


def overlap_counts_bulk(
    family: str,
    taus: Sequence[float] | np.ndarray,
    xis: Sequence[float] | np.ndarray,
    margin_scale: float = 1.0,
    force_fallback: bool = False,
) -> np.ndarray:
    """Per-m overlap counts for many points at once.

    Returns an integer array of shape (n, 4) with columns ordered as
    ``WHITNEY_OFFSETS``; row sums are the totals.
    """
    _check_margin_scale(margin_scale)
    if family not in ("A", "B"):
        raise ParameterError(f"unknown region family {family!r}")
    tau = np.ascontiguousarray(taus, dtype=np.float64)
    xi = np.ascontiguousarray(xis, dtype=np.float64)
    if tau.shape != xi.shape or tau.ndim != 1:
        raise ParameterError("tau and xi must be 1-D arrays of equal length")
    kernel = _count_many_compiled
    if kernel is None or force_fallback:
        kernel = _count_many_vectorized
    return kernel(tau, xi, 0 if family == "A" else 1, margin_scale)


def write_overlap_audit(
    path: str,
    taus: Sequence[float] | np.ndarray,
    xis: Sequence[float] | np.ndarray,
    families: Sequence[str] = ("A", "B"),
    margin_scale: float = 1.0,
) -> None:
    """Audit CSV: one row per (point, family) with the count breakdown."""
    tau = np.asarray(taus, dtype=np.float64)
    xi = np.asarray(xis, dtype=np.float64)
    per_family = {f: overlap_counts_bulk(f, tau, xi, margin_scale) for f in families}
    header = ["tau", "xi", "family", "count_total"] + [
        f"count_m_{m}" for m in WHITNEY_OFFSETS
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for f in families:
            counts = per_family[f]
            for i in range(tau.size):
                row = counts[i]
                writer.writerow(
                    [repr(float(tau[i])), repr(float(xi[i])), f, int(row.sum())]
                    + [int(c) for c in row]
                )
