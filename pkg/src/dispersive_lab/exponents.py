"""Exact exponent bookkeeping for the dispersive estimates.

Every relation is evaluated in rational arithmetic on reciprocals, with
0 standing for the reciprocal of infinity, so branch predicates and
admissibility windows never suffer floating-point rounding. Conversion
to floats happens only when a norm evaluator needs concrete exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

from .errors import ParameterError
from .spectral import MixedNormSpec

INF = math.inf

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


def reciprocal(value) -> Fraction:
    """Exact reciprocal of an exponent in [1, inf]; inf maps to 0."""
    if value is None:
        raise ParameterError("exponent must not be None")
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "oo"):
            return Fraction(0)
        try:
            value = Fraction(text)
        except ValueError as exc:
            raise ParameterError(f"cannot read exponent from {value!r}") from exc
    if isinstance(value, float):
        if value == INF:
            return Fraction(0)
        if not math.isfinite(value):
            raise ParameterError(f"cannot read exponent from {value!r}")
        # exact decimal reading keeps 2.5 meaning 5/2
        value = Fraction(str(value))
    if not isinstance(value, Rational):
        raise ParameterError(f"cannot read exponent from {value!r}")
    value = Fraction(value)
    if value < 1:
        raise ParameterError(f"exponent must be at least 1, got {value}")
    return 1 / value


def as_rational(value) -> Fraction:
    """Exact rational reading of a parameter such as the smoothing gain."""
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as exc:
            raise ParameterError(f"cannot read rational from {value!r}") from exc
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ParameterError(f"expected a finite rational, got {value}")
        return Fraction(str(value))
    if isinstance(value, Rational):
        return Fraction(value)
    raise ParameterError(f"cannot read rational from {value!r}")


def from_reciprocal(r: Fraction):
    """Exponent with reciprocal ``r``: a Fraction, or inf when r = 0."""
    if r == 0:
        return INF
    return 1 / r


def conjugate_reciprocal(r: Fraction) -> Fraction:
    if not 0 <= r <= 1:
        raise ParameterError(f"reciprocal out of range: {r}")
    return 1 - r


def _as_float(r: Fraction) -> float:
    return INF if r == 0 else float(1 / r)


def _hat_triple_valid(inv_beta: Fraction, inv_gamma: Fraction, inv_delta: Fraction) -> bool:
    """Exact check that (beta, gamma, delta) defines a hat-side lattice norm."""
    if inv_gamma > inv_beta:
        return False
    if inv_gamma == inv_beta and inv_delta != 0:
        return False
    return inv_delta < 1 - inv_beta


# ---------------------------------------------------------------------------
# Classical mixed-norm admissibility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassicalPair:
    """Admissible (p, q) with the derived scaling and smoothing orders."""

    inv_p: Fraction
    inv_q: Fraction

    @property
    def inv_alpha(self) -> Fraction:
        return 2 * self.inv_p + self.inv_q

    @property
    def alpha(self):
        return from_reciprocal(self.inv_alpha)

    @property
    def smoothing(self) -> Fraction:
        return -self.inv_p + 2 * self.inv_q

    @property
    def p(self):
        return from_reciprocal(self.inv_p)

    @property
    def q(self):
        return from_reciprocal(self.inv_q)

    def describe(self) -> dict:
        return {
            "p": _fmt(self.inv_p),
            "q": _fmt(self.inv_q),
            "alpha": _fmt(self.inv_alpha),
            "s": str(self.smoothing),
        }


def classical_exponents(p, q) -> ClassicalPair:
    """Validate a mixed-norm pair and derive (alpha, s).

    Admissible pairs are the two endpoints (inf, 2) and (4, inf) plus the
    open region 0 <= 1/p < 1/4, 0 <= 1/q < 1/2 - 1/p.
    """
    inv_p, inv_q = reciprocal(p), reciprocal(q)
    endpoints = ((Fraction(0), HALF), (QUARTER, Fraction(0)))
    if (inv_p, inv_q) not in endpoints:
        if not inv_p < QUARTER:
            raise ParameterError(f"inadmissible pair: need 1/p < 1/4, got 1/p = {inv_p}")
        if not inv_q < HALF - inv_p:
            raise ParameterError(
                f"inadmissible pair: need 1/q < 1/2 - 1/p, got 1/q = {inv_q}, 1/p = {inv_p}"
            )
    return ClassicalPair(inv_p, inv_q)


# ---------------------------------------------------------------------------
# Refined estimates: derived lattice exponents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpaceOuterRefinement:
    """Exponents for the refined estimate with the space variable outside.

    The left side carries |D|^s in L^p_x L^q_t; the right side is the
    sigma-weighted lattice norm with the derived (beta, gamma, delta).
    """

    inv_p: Fraction
    inv_q: Fraction
    sigma: Fraction
    inv_alpha: Fraction
    smoothing: Fraction
    inv_beta: Fraction
    inv_gamma: Fraction
    inv_delta: Fraction
    branch_high: bool

    @property
    def lattice_valid(self) -> bool:
        """Whether the derived right-hand norm is a defined lattice norm.

        Corners of the closed admissibility window can land exactly on
        (or past) the edge of the lattice-norm parameter region, for
        example delta equal to the conjugate of beta when q < p sits on
        the closed 1/q bound, or gamma below beta once sigma exceeds
        1/q. Such records are still correct bookkeeping but cannot be
        fed to the norm evaluator.
        """
        return _hat_triple_valid(self.inv_beta, self.inv_gamma, self.inv_delta)

    def describe(self) -> dict:
        return {
            "estimate": "space-outer",
            "p": _fmt(self.inv_p),
            "q": _fmt(self.inv_q),
            "sigma": str(self.sigma),
            "alpha": _fmt(self.inv_alpha),
            "s": str(self.smoothing),
            "beta": _fmt(self.inv_beta),
            "gamma": _fmt(self.inv_gamma),
            "delta": _fmt(self.inv_delta),
            "branch": "1/q >= 1/p + sigma" if self.branch_high else "1/q < 1/p + sigma",
        }


def refine_space_outer(p, q, sigma) -> SpaceOuterRefinement:
    inv_p, inv_q, sigma = reciprocal(p), reciprocal(q), as_rational(sigma)
    if not 0 < sigma < QUARTER:
        raise ParameterError(f"need 0 < sigma < 1/4, got {sigma}")
    if not inv_p <= QUARTER - sigma:
        raise ParameterError(f"need 1/p <= 1/4 - sigma, got 1/p = {inv_p}, sigma = {sigma}")
    if not inv_q <= HALF - inv_p - sigma:
        raise ParameterError(
            f"need 1/q <= 1/2 - 1/p - sigma, got 1/q = {inv_q}, 1/p = {inv_p}, sigma = {sigma}"
        )
    inv_alpha = 2 * inv_p + inv_q
    inv_beta = inv_alpha + sigma
    branch_high = inv_q >= inv_p + sigma
    inv_gamma = (inv_beta - inv_p) if branch_high else (inv_beta - inv_q + sigma)
    inv_delta = HALF - min(inv_p, inv_q)
    return SpaceOuterRefinement(
        inv_p, inv_q, sigma, inv_alpha, -inv_p + 2 * inv_q, inv_beta,
        inv_gamma, inv_delta, branch_high,
    )


@dataclass(frozen=True)
class TimeOuterRefinement:
    """Exponents for the refined estimate with the time variable outside.

    The left side carries |D|^{1/p} in L^p_t L^q_x; the right side is the
    unweighted lattice norm at the scaling exponent alpha.
    """

    inv_p: Fraction
    inv_q: Fraction
    sigma: Fraction
    inv_alpha: Fraction
    inv_gamma: Fraction
    inv_delta: Fraction
    branch_high: bool

    @property
    def derivative_order(self) -> Fraction:
        return self.inv_p

    @property
    def lattice_valid(self) -> bool:
        """Whether the derived right-hand norm is a defined lattice norm.

        The closed corner 1/p = 1/4 with q >= p yields delta exactly
        equal to the conjugate of alpha, which the lattice norm
        excludes; interior points are always fine.
        """
        return _hat_triple_valid(self.inv_alpha, self.inv_gamma, self.inv_delta)

    def describe(self) -> dict:
        return {
            "estimate": "time-outer",
            "p": _fmt(self.inv_p),
            "q": _fmt(self.inv_q),
            "sigma": str(self.sigma),
            "alpha": _fmt(self.inv_alpha),
            "derivative": str(self.inv_p),
            "gamma": _fmt(self.inv_gamma),
            "delta": _fmt(self.inv_delta),
            "branch": "1/q >= 1/p - sigma" if self.branch_high else "1/q < 1/p - sigma",
        }


def refine_time_outer(p, q, sigma) -> TimeOuterRefinement:
    inv_p, inv_q, sigma = reciprocal(p), reciprocal(q), as_rational(sigma)
    if not 0 < sigma < QUARTER:
        raise ParameterError(f"need 0 < sigma < 1/4, got {sigma}")
    if not inv_p <= QUARTER:
        raise ParameterError(f"need 1/p <= 1/4, got 1/p = {inv_p}")
    if not inv_q <= HALF - inv_p - sigma:
        raise ParameterError(
            f"need 1/q <= 1/2 - 1/p - sigma, got 1/q = {inv_q}, 1/p = {inv_p}, sigma = {sigma}"
        )
    inv_alpha = 2 * inv_p + inv_q
    branch_high = inv_q >= inv_p - sigma
    inv_gamma = (inv_alpha - inv_p + sigma) if branch_high else (inv_alpha - inv_q)
    inv_delta = HALF - min(inv_p, inv_q)
    return TimeOuterRefinement(inv_p, inv_q, sigma, inv_alpha, inv_gamma, inv_delta, branch_high)


# ---------------------------------------------------------------------------
# Well-posedness parameter windows
# ---------------------------------------------------------------------------

ALPHA_LO = Fraction(5, 3)
ALPHA_HI_CLOSED = Fraction(20, 9)
ALPHA_HI_OPEN = Fraction(12, 5)


def _sigma_cap(inv_alpha: Fraction) -> Fraction:
    return min(Fraction(3, 5) - inv_alpha, QUARTER - Fraction(2, 5) * inv_alpha)


@dataclass(frozen=True)
class LwpParams:
    """Validated (or annotated) well-posedness parameter record.

    ``assumption`` 1 is the closed window used by the contraction
    argument; assumption 2 is the strict-interior variant with the local
    L^2 structure (gamma = 2) required by the decoupling machinery.
    """

    alpha: Fraction
    sigma: Fraction
    inv_beta: Fraction
    inv_gamma: Fraction
    inv_delta: Fraction
    assumption: int
    violations: tuple = field(default=())

    @property
    def valid(self) -> bool:
        return not self.violations

    def describe(self) -> dict:
        return {
            "alpha": str(self.alpha),
            "sigma": str(self.sigma),
            "beta": _fmt(self.inv_beta),
            "gamma": _fmt(self.inv_gamma),
            "delta": _fmt(self.inv_delta),
            "assumption": self.assumption,
            "violations": list(self.violations),
        }


def lwp_params(alpha, sigma, gamma, delta, assumption: int = 1) -> LwpParams:
    """Check a parameter tuple against one of the two windows.

    Returns the record with the complete list of violated constraints;
    an empty list means the tuple is admissible.
    """
    alpha, sigma = as_rational(alpha), as_rational(sigma)
    inv_gamma, inv_delta = reciprocal(gamma), reciprocal(delta)
    if alpha <= 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    inv_alpha = 1 / alpha
    inv_beta = inv_alpha + sigma
    bad: list[str] = []
    cap = _sigma_cap(inv_alpha)
    if assumption == 1:
        if not ALPHA_LO < alpha <= ALPHA_HI_CLOSED:
            bad.append(f"need 5/3 < alpha <= 20/9, got {alpha}")
        if not 0 < sigma <= cap:
            bad.append(f"need 0 < sigma <= min(3/5 - 1/alpha, 1/4 - 2/(5 alpha)) = {cap}")
        if not Fraction(4, 5) * inv_alpha + 2 * sigma <= inv_gamma < inv_beta:
            bad.append("need 4/(5 alpha) + 2 sigma <= 1/gamma < 1/beta")
        if not HALF - Fraction(1, 5) * inv_alpha <= inv_delta < 1 - inv_beta:
            bad.append("need 1/2 - 1/(5 alpha) <= 1/delta < 1 - 1/beta")
    elif assumption == 2:
        if inv_gamma != HALF:
            bad.append(f"need gamma = 2, got 1/gamma = {inv_gamma}")
        if not ALPHA_LO < alpha < ALPHA_HI_OPEN:
            bad.append(f"need 5/3 < alpha < 12/5, got {alpha}")
        if not max(Fraction(0), HALF - inv_alpha) < sigma < cap:
            bad.append(
                f"need max(0, 1/2 - 1/alpha) < sigma < min(3/5 - 1/alpha, 1/4 - 2/(5 alpha)) = {cap}"
            )
        if not HALF - Fraction(1, 5) * inv_alpha < inv_delta < 1 - inv_beta:
            bad.append("need 1/2 - 1/(5 alpha) < 1/delta < 1 - 1/beta")
    else:
        raise ParameterError(f"assumption must be 1 or 2, got {assumption}")
    return LwpParams(alpha, sigma, inv_beta, inv_gamma, inv_delta, assumption, tuple(bad))


# ---------------------------------------------------------------------------
# Iteration-space norms
# ---------------------------------------------------------------------------

SPACE_TAGS = ("L", "M", "S", "D_sigma", "N", "N_sigma")


def space_norm_spec(tag: str, alpha, sigma=None) -> tuple[Fraction, MixedNormSpec]:
    """Derivative order and mixed norm for one of the iteration spaces.

    Tags: L and M are the two smoothing companions, S the plain
    space-time norm, D_sigma the diagonal refinement, N the nonlinearity
    target, and N_sigma its sigma-shifted variant.
    """
    alpha = as_rational(alpha)
    if alpha <= 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    inv_alpha = 1 / alpha
    if tag in ("D_sigma", "N_sigma"):
        if sigma is None:
            raise ParameterError(f"tag {tag} requires sigma")
        sigma = as_rational(sigma)
        if not ALPHA_LO < alpha <= ALPHA_HI_CLOSED or not 0 < sigma <= _sigma_cap(inv_alpha):
            raise ParameterError(f"(alpha, sigma) = ({alpha}, {sigma}) outside the admitted window")
        inv_beta = inv_alpha + sigma

    if tag == "L":
        return inv_alpha, _mixed(inv_alpha / 5, Fraction(3, 5) * inv_alpha)
    if tag == "M":
        return inv_alpha / 2, _mixed(Fraction(3, 10) * inv_alpha, Fraction(2, 5) * inv_alpha)
    if tag == "S":
        return Fraction(0), _mixed(Fraction(2, 5) * inv_alpha, Fraction(1, 5) * inv_alpha)
    if tag == "D_sigma":
        inv_3b = inv_beta / 3
        return sigma + inv_3b, MixedNormSpec(_as_float(inv_3b), _as_float(inv_3b), "diagonal")
    if tag == "N":
        inv_p = Fraction(3, 10) * inv_alpha + 2 * alpha * Fraction(2, 5) * inv_alpha
        inv_q = Fraction(2, 5) * inv_alpha + 2 * alpha * Fraction(1, 5) * inv_alpha
        return inv_alpha / 2, _mixed(inv_p, inv_q)
    if tag == "N_sigma":
        beta = 1 / inv_beta
        if not ALPHA_LO <= beta < ALPHA_HI_CLOSED:
            raise ParameterError(f"sigma-shifted exponent {beta} outside [5/3, 20/9)")
        # solve 2/p + 1/q = 1/beta + 2 and -1/p + 2/q = 1/(3 beta)
        inv_3b = inv_beta / 3
        inv_p = (2 * (inv_beta + 2) - inv_3b) / 5
        inv_q = (inv_beta + 2 + 2 * inv_3b) / 5
        return inv_3b + sigma, _mixed(inv_p, inv_q)
    raise ParameterError(f"unknown space tag {tag!r}; expected one of {SPACE_TAGS}")


def _mixed(inv_p: Fraction, inv_q: Fraction) -> MixedNormSpec:
    return MixedNormSpec(_as_float(inv_p), _as_float(inv_q), "space-outer")


def _fmt(inv: Fraction) -> str:
    return "inf" if inv == 0 else str(1 / inv)
