"""Morrey and hat-Morrey norms over a truncated dyadic interval lattice.

The norms are evaluated for the piecewise-constant model of the sampled
data: a grid function is treated as constant on each sample cell, so
every local norm over a dyadic interval is an exact integral of the
model rather than a quadrature approximation. Scales outside the
truncation window contribute a tail that is estimated from the weight
decay and reported alongside the value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .spectral import GridFunction, lebesgue_norm, transform

INF = math.inf

_DIRECT = "direct"
_HAT = "hat"


def _conjugate(p: float) -> float:
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1.0)


def _check_direct_triple(beta: float, gamma: float, delta: float) -> None:
    # 1 <= gamma <= beta <= inf, beta < delta <= inf; beta = gamma < inf
    # is admitted only for delta = inf (where it reproduces L^beta).
    if not (1.0 <= gamma <= beta):
        raise ParameterError(f"need 1 <= gamma <= beta, got gamma={gamma}, beta={beta}")
    if not (beta < delta or (beta == delta == INF)):
        raise ParameterError(f"need delta > beta, got delta={delta}, beta={beta}")
    if beta == gamma and gamma < INF and delta != INF:
        raise ParameterError("beta = gamma < inf requires delta = inf")


@dataclass(frozen=True)
class MorreyParams:
    """Exponent triple (beta, gamma, delta) plus the direct/hat side."""

    beta: float
    gamma: float
    delta: float
    side: str = _DIRECT

    def __post_init__(self) -> None:
        for name, value in (("beta", self.beta), ("gamma", self.gamma), ("delta", self.delta)):
            if not (value == INF or (math.isfinite(value) and value >= 1.0)):
                raise ParameterError(f"{name} must be in [1, inf], got {value}")
        if self.side not in (_DIRECT, _HAT):
            raise ParameterError(f"side must be 'direct' or 'hat', got {self.side!r}")
        if self.side == _DIRECT:
            _check_direct_triple(self.beta, self.gamma, self.delta)
        else:
            # the hat norm is the direct norm of the transform with
            # conjugate exponents, and inherits that validity region
            _check_direct_triple(_conjugate(self.beta), _conjugate(self.gamma), self.delta)

    @property
    def inner_exponent(self) -> float:
        return self.gamma if self.side == _DIRECT else _conjugate(self.gamma)

    @property
    def weight_exponent(self) -> float:
        b = 0.0 if self.beta == INF else 1.0 / self.beta
        g = 0.0 if self.gamma == INF else 1.0 / self.gamma
        return (b - g) if self.side == _DIRECT else (g - b)

    def describe(self) -> dict:
        return {"beta": self.beta, "gamma": self.gamma, "delta": self.delta, "side": self.side}


@dataclass(frozen=True)
class LatticeTruncation:
    """Scale window [j_min, j_max]; positions are derived from support."""

    j_min: int
    j_max: int

    def __post_init__(self) -> None:
        if self.j_min > self.j_max:
            raise ParameterError(f"j_min {self.j_min} exceeds j_max {self.j_max}")

    @classmethod
    def for_domain(cls, span: float, spacing: float) -> "LatticeTruncation":
        # two scales of headroom past the domain size and the cell size
        if not (span > 0 and spacing > 0):
            raise ParameterError("span and spacing must be positive")
        return cls(-math.ceil(math.log2(span)) - 2, math.ceil(math.log2(1.0 / spacing)) + 2)

    def describe(self) -> dict:
        return {"j_min": self.j_min, "j_max": self.j_max}


class _CellProfile:
    """Nonnegative piecewise-constant profile on [x0, x0 + n*dx)."""

    def __init__(self, values: np.ndarray, x0: float, dx: float) -> None:
        self.values = np.asarray(values, dtype=np.float64)
        self.x0 = float(x0)
        self.dx = float(dx)
        self.n = self.values.size
        nz = np.flatnonzero(self.values)
        if nz.size == 0:
            self.support = None
        else:
            self.support = (
                self.x0 + nz[0] * self.dx,
                self.x0 + (nz[-1] + 1.0) * self.dx,
            )
        self._prefixes: dict = {}
        self._max_tables = None

    def _prefix(self, gamma: float) -> np.ndarray:
        pref = self._prefixes.get(gamma)
        if pref is None:
            pref = np.empty(self.n + 1)
            pref[0] = 0.0
            np.cumsum(self.values**gamma * self.dx, out=pref[1:])
            self._prefixes[gamma] = pref
        return pref

    def _antiderivative(self, pos: np.ndarray, gamma: float) -> np.ndarray:
        pref = self._prefix(gamma)
        t = np.clip((pos - self.x0) / self.dx, 0.0, float(self.n))
        idx = np.minimum(np.floor(t).astype(np.int64), self.n - 1)
        return pref[idx] + (t - idx) * self.dx * self.values[idx] ** gamma

    def local_norms(self, a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
        if gamma == INF:
            return self._local_sups(a, b)
        ints = np.maximum(self._antiderivative(b, gamma) - self._antiderivative(a, gamma), 0.0)
        return ints ** (1.0 / gamma)

    def _local_sups(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self._max_tables is None:
            tables = [self.values]
            step = 1
            while 2 * step <= self.n:
                prev = tables[-1]
                tables.append(np.maximum(prev[: prev.size - step], prev[step:]))
                step *= 2
            self._max_tables = tables
        lo = np.clip(np.floor((a - self.x0) / self.dx), 0, self.n).astype(np.int64)
        hi = np.clip(np.ceil((b - self.x0) / self.dx), 0, self.n).astype(np.int64)
        out = np.zeros(a.size)
        length = hi - lo
        nonempty = length > 0
        if not np.any(nonempty):
            return out
        levels = np.zeros(a.size, dtype=np.int64)
        levels[nonempty] = np.floor(np.log2(length[nonempty])).astype(np.int64)
        for level in np.unique(levels[nonempty]):
            table = self._max_tables[level]
            mask = nonempty & (levels == level)
            left = lo[mask]
            right = hi[mask] - (1 << int(level))
            out[mask] = np.maximum(table[left], table[right])
        return out

    def total_norm(self, gamma: float) -> float:
        if gamma == INF:
            return float(self.values.max(initial=0.0))
        return float(np.sum(self.values**gamma * self.dx) ** (1.0 / gamma))


def _lattice_norm(
    profile: _CellProfile, params: MorreyParams, tr: LatticeTruncation
) -> tuple[float, float]:
    """Norm over the truncated lattice plus the excluded-scale tail bound."""
    if profile.support is None:
        return 0.0, 0.0
    inner = params.inner_exponent
    w = params.weight_exponent
    delta = params.delta
    s_lo, s_hi = profile.support

    use_sup = delta == INF
    best = 0.0
    power_sum = 0.0
    for j in range(tr.j_min, tr.j_max + 1):
        h = math.ldexp(1.0, -j)
        k_lo = math.floor(s_lo / h)
        k_hi = math.ceil(s_hi / h)
        ks = np.arange(k_lo, k_hi, dtype=np.float64)
        a = ks * h
        locals_ = profile.local_norms(a, a + h, inner)
        terms = 2.0 ** (-j * w) * locals_
        if use_sup:
            best = max(best, float(terms.max(initial=0.0)))
        else:
            power_sum += float(np.sum(terms**delta))

    value = best if use_sup else power_sum ** (1.0 / delta)
    return value, _tail_estimate(profile, params, tr)


def _tail_estimate(
    profile: _CellProfile, params: MorreyParams, tr: LatticeTruncation
) -> float:
    # Scales finer than j_max decay like 2^(-j e) with e = w + 1/inner
    # (the reciprocal of beta on the direct side, of beta' on the hat
    # side); scales coarser than j_min decay like 2^(j |w|). Validity of
    # the exponent triple makes both series summable whenever delta is
    # finite, so the bounds below are closed forms.
    inner = params.inner_exponent
    w = params.weight_exponent
    delta = params.delta
    s_lo, s_hi = profile.support
    span = s_hi - s_lo
    vmax = profile.total_norm(INF)
    total = profile.total_norm(inner)
    e = w + (0.0 if inner == INF else 1.0 / inner)
    j_hi = tr.j_max + 1
    j_lo = tr.j_min - 1

    if delta == INF:
        if e > 0:
            fine = vmax * 2.0 ** (-j_hi * e)
        else:
            # terms saturate at the cell maximum; already attained once
            # the window reaches sub-cell scales
            fine = 0.0 if math.ldexp(1.0, -tr.j_max) <= profile.dx else vmax
        if w < 0:
            coarse = total * 2.0 ** (-j_lo * w)
        else:
            # weight-free sup saturates at the one-sided totals once a
            # single interval covers each side of the support
            reach = math.ldexp(1.0, -tr.j_min)
            coarse = 0.0 if reach >= max(abs(s_lo), abs(s_hi)) else total
        return max(fine, coarse)

    # finite delta: validity guarantees delta*e > 1 and w < 0
    de = delta * e
    fine = vmax**delta * (
        span * 2.0 ** (j_hi * (1.0 - de)) / (1.0 - 2.0 ** (1.0 - de))
        + 2.0 * 2.0 ** (-j_hi * de) / (1.0 - 2.0**-de)
    )
    wd = w * delta
    coarse = 2.0 * total**delta * 2.0 ** (-j_lo * wd) / (1.0 - 2.0**wd)
    return (fine + coarse) ** (1.0 / delta)


def _direct_profile(f: GridFunction) -> _CellProfile:
    return _CellProfile(np.abs(f.samples), -f.box_length / 2.0, f.dx)


def _hat_profile(f: GridFunction) -> _CellProfile:
    spectrum = transform(f)
    dxi = spectrum.dxi
    return _CellProfile(np.abs(spectrum.coefficients), -(f.n_x // 2) * dxi, dxi)


def _default_truncation(profile: _CellProfile) -> LatticeTruncation:
    return LatticeTruncation.for_domain(profile.n * profile.dx, profile.dx)


def morrey_norm(
    f: GridFunction, params: MorreyParams, truncation: LatticeTruncation | None = None
) -> float:
    """Direct Morrey norm of the cell model of ``f``."""
    if params.side != _DIRECT:
        raise ParameterError("morrey_norm requires direct-side parameters")
    profile = _direct_profile(f)
    value, _ = _lattice_norm(profile, params, truncation or _default_truncation(profile))
    return value


def hat_morrey_norm(
    f: GridFunction, params: MorreyParams, truncation: LatticeTruncation | None = None
) -> float:
    """Hat-Morrey norm: the conjugate-exponent norm of the transform."""
    if params.side != _HAT:
        raise ParameterError("hat_morrey_norm requires hat-side parameters")
    profile = _hat_profile(f)
    value, _ = _lattice_norm(profile, params, truncation or _default_truncation(profile))
    return value


def norm_report(
    f: GridFunction, params: MorreyParams, truncation: LatticeTruncation | None = None
) -> dict:
    """Machine-readable record of one norm evaluation."""
    profile = _direct_profile(f) if params.side == _DIRECT else _hat_profile(f)
    tr = truncation or _default_truncation(profile)
    value, tail = _lattice_norm(profile, params, tr)
    return {
        "params": params.describe(),
        "truncation": tr.describe(),
        "value": value,
        "tail_estimate": tail,
    }


def hat_lebesgue_norm(f: GridFunction, alpha: float) -> float:
    """Conjugate Lebesgue norm of the transform (rectangle-rule cells)."""
    spectrum = transform(f)
    return lebesgue_norm(spectrum.coefficients, _conjugate(alpha), dx=spectrum.dxi)


def _ratio(lhs: float, rhs: float) -> float:
    # 0/0 reads as saturation of the embedding constant
    if rhs == 0.0:
        return 1.0 if lhs == 0.0 else INF
    return lhs / rhs


def embedding_gap(
    f: GridFunction,
    which: str,
    *,
    truncation: LatticeTruncation | None = None,
    **exponents: float,
) -> tuple[float, float, float]:
    """Evaluate one of the five lattice embedding inequalities.

    Returns (lhs, rhs, lhs/rhs) where the inequality asserts lhs <= C*rhs;
    for variants "i" and "ii" the constant C is exactly 1.
    """
    if which in ("i", "ii"):
        beta = exponents.pop("beta")
        g1, g2 = exponents.pop("gamma1"), exponents.pop("gamma2")
        d1, d2 = exponents.pop("delta1"), exponents.pop("delta2")
        _reject_extra(exponents)
        if not d1 <= d2:
            raise ParameterError("need delta1 <= delta2")
        if which == "i":
            if not g2 <= g1 <= beta:
                raise ParameterError("need gamma2 <= gamma1 <= beta")
            norm, side = morrey_norm, _DIRECT
        else:
            if not beta <= g1 <= g2:
                raise ParameterError("need beta <= gamma1 <= gamma2")
            norm, side = hat_morrey_norm, _HAT
        lhs = norm(f, MorreyParams(beta, g2, d2, side), truncation)
        rhs = norm(f, MorreyParams(beta, g1, d1, side), truncation)
    elif which in ("iii", "iv"):
        beta = exponents.pop("beta")
        gamma, delta = exponents.pop("gamma"), exponents.pop("delta")
        _reject_extra(exponents)
        if which == "iii":
            if not (1.0 <= gamma < beta < delta):
                raise ParameterError("need 1 <= gamma < beta < delta")
            lhs = morrey_norm(f, MorreyParams(beta, gamma, delta, _DIRECT), truncation)
            rhs = lebesgue_norm(f, beta)
        else:
            if not (_conjugate(gamma) < _conjugate(beta) < delta):
                raise ParameterError("need gamma' < beta' < delta")
            lhs = hat_morrey_norm(f, MorreyParams(beta, gamma, delta, _HAT), truncation)
            rhs = hat_lebesgue_norm(f, beta)
    elif which == "v":
        from .spectral import fractional_derivative

        alpha = exponents.pop("alpha")
        sigma = exponents.pop("sigma")
        g1, g2 = exponents.pop("gamma1"), exponents.pop("gamma2")
        d1, d2 = exponents.pop("delta1"), exponents.pop("delta2")
        _reject_extra(exponents)
        if sigma <= 0:
            raise ParameterError("need sigma > 0")
        if not d1 <= d2:
            raise ParameterError("need delta1 <= delta2")
        if not 1.0 / g1 - 1.0 / g2 > sigma:
            raise ParameterError("need 1/gamma1 - 1/gamma2 > sigma")
        beta = 1.0 / (1.0 / alpha + sigma)
        lhs = hat_morrey_norm(f, MorreyParams(alpha, g2, d2, _HAT), truncation)
        rhs = hat_morrey_norm(
            fractional_derivative(f, sigma), MorreyParams(beta, g1, d1, _HAT), truncation
        )
    else:
        raise ParameterError(f"unknown embedding variant {which!r}")
    return lhs, rhs, _ratio(lhs, rhs)


def _reject_extra(exponents: dict) -> None:
    if exponents:
        raise ParameterError(f"unexpected exponent arguments: {sorted(exponents)}")
