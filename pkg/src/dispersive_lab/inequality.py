"""Ratio engine over the estimate catalog.

Each catalog entry packages the two sides of one estimate as pure
functionals; the engine reports empirical left/right ratios over data
families together with their stability under grid refinement.  A stable
finite ratio demonstrates coherent bookkeeping of exponents, scales,
and truncations; it is never a proof and never a sharp constant.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .airy import (
    CutoffSpec,
    MultiplierBoundSpec,
    airy_field,
    apply_band_multiplier,
    make_cutoff,
    wraparound_horizon,
)
from .dyadic import (
    WHITNEY_OFFSETS,
    BilinearRegion,
    EnlargedRegion,
    canonical_margin,
    overlap_counts_bulk,
    write_overlap_audit,
)
from .errors import (
    ConfigurationError,
    DegenerateDataError,
    DispersiveLabError,
    HorizonError,
    HorizonWarning,
    ParameterError,
)
from .exponents import (
    ClassicalPair,
    LwpParams,
    SpaceOuterRefinement,
    TimeOuterRefinement,
    _as_float,
    classical_exponents,
    lwp_params,
    refine_space_outer,
    refine_time_outer,
)
from .families import TestFamily
from .morrey import (
    LatticeTruncation,
    MorreyParams,
    hat_lebesgue_norm,
    hat_morrey_norm,
)
from .spectral import (
    FrequencyFunction,
    GridFunction,
    MixedNormSpec,
    SpaceTimeField,
    fractional_derivative,
    inverse_transform,
    mixed_spacetime_norm,
    transform,
)

INF = math.inf


# ---------------------------------------------------------------------------
# Evaluation domain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalDomain:
    """The truncated domain on which both sides are computed.

    Time norms run over ``[t_center - T, t_center + T]`` with ``n_t``
    samples; ``T`` defaults to half the datum's wrap-around horizon so
    the box keeps approximating the line, which under-estimates the
    left side only and keeps every verification conservative.
    """

    n_t: int = 65
    t_window: float | None = None
    t_center: float = 0.0
    truncation: LatticeTruncation | None = None

    def __post_init__(self) -> None:
        if self.n_t < 2:
            raise ParameterError("time grids need at least two samples")
        if self.t_window is not None and not (
            self.t_window > 0 and math.isfinite(self.t_window)
        ):
            raise ParameterError("explicit time window must be positive and finite")
        if not math.isfinite(self.t_center):
            raise ParameterError("time center must be finite")

    def refined(self) -> "EvalDomain":
        """Same window, doubled time resolution (old samples retained)."""
        return EvalDomain(
            n_t=2 * self.n_t - 1,
            t_window=self.t_window,
            t_center=self.t_center,
            truncation=self.truncation,
        )

    def describe(self) -> dict:
        return {
            "n_t": self.n_t,
            "t_window": self.t_window,
            "t_center": self.t_center,
            "truncation": self.truncation.describe() if self.truncation else None,
        }


def _window_for(f: GridFunction, dom: EvalDomain) -> float:
    horizon = wraparound_horizon(f)
    if dom.t_window is None:
        if not math.isfinite(horizon):
            raise ParameterError(
                "data with no populated modes need an explicit time window"
            )
        T = horizon / 2.0
    else:
        T = dom.t_window
    if abs(dom.t_center) + T > horizon:
        raise HorizonError(
            f"time window reaches |t| = {abs(dom.t_center) + T:.6g}, beyond the "
            f"wrap-around horizon {horizon:.6g} of the datum"
        )
    return T


def _time_grid(f: GridFunction, dom: EvalDomain) -> np.ndarray:
    T = _window_for(f, dom)
    return np.linspace(dom.t_center - T, dom.t_center + T, dom.n_t)


# ---------------------------------------------------------------------------
# Specs and the ratio
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InequalitySpec:
    """One estimate: a name, the two sides, and its exponent record.

    ``constant`` carries a stated admissible constant when the estimate
    fixes one; ``datum_kind`` routes the accepted input type ("grid",
    "field" for space-time data, "trajectory" for solver output).
    """

    name: str
    label: str
    lhs: Callable
    rhs: Callable
    exponent_context: object
    constant: float | None = None
    datum_kind: str = "grid"
    time_rule: str = "half-horizon"

    def default_domain(self) -> EvalDomain:
        if isinstance(self.exponent_context, BandBoundContext):
            return EvalDomain(n_t=self.exponent_context.n_t)
        return EvalDomain()

    def describe(self) -> dict:
        return {
            "name": self.name,
            "label": self.label,
            "constant": self.constant,
            "datum_kind": self.datum_kind,
            "time_rule": self.time_rule,
            "exponents": _context_summary(self.exponent_context),
        }


def _context_summary(ctx) -> dict:
    if hasattr(ctx, "describe"):
        raw = ctx.describe()
    elif dataclasses.is_dataclass(ctx):
        raw = dataclasses.asdict(ctx)
    else:
        raw = {"value": str(ctx)}
    return _jsonable(raw)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    return str(value)


def ratio(spec: InequalitySpec, datum, domain: EvalDomain | None = None) -> float:
    """Empirical left/right ratio of the estimate on one datum."""
    dom = domain or spec.default_domain()
    _check_datum_kind(spec, datum)
    rhs = spec.rhs(datum, dom)
    if not math.isfinite(rhs):
        raise DegenerateDataError(f"{spec.name}: right side is not finite")
    if rhs == 0.0:
        raise DegenerateDataError(
            f"{spec.name}: right side vanishes, the ratio is undefined"
        )
    lhs = spec.lhs(datum, dom)
    return lhs / rhs


def _check_datum_kind(spec: InequalitySpec, datum) -> None:
    if spec.datum_kind == "trajectory":
        if isinstance(datum, (GridFunction, SpaceTimeField)):
            raise ParameterError(
                f"{spec.name} consumes a solver trajectory, not "
                f"{type(datum).__name__}"
            )
        return
    if spec.datum_kind == "field":
        if not isinstance(datum, (GridFunction, SpaceTimeField)):
            raise ParameterError(f"{spec.name} needs grid or space-time data")
        return
    if not isinstance(datum, GridFunction):
        raise ParameterError(f"{spec.name} consumes grid data")


# ---------------------------------------------------------------------------
# Flow-based entries
# ---------------------------------------------------------------------------


def _flow_mixed_norm(
    f: GridFunction, t_grid: np.ndarray, order: float, norm: MixedNormSpec
) -> float:
    g = fractional_derivative(f, order) if order != 0.0 else f
    return mixed_spacetime_norm(airy_field(g, t_grid), norm)


def mixed_norm_entry(pair: ClassicalPair | None = None) -> InequalitySpec:
    """Two-sided dispersive mixed-norm bound with spectrum-size data norm."""
    ctx = pair if pair is not None else classical_exponents(8, 8)
    p = _as_float(ctx.inv_p)
    q = _as_float(ctx.inv_q)
    s = float(ctx.smoothing)
    alpha = _as_float(ctx.inv_alpha)
    inv_p = float(ctx.inv_p)

    def lhs(f: GridFunction, dom: EvalDomain) -> float:
        t = _time_grid(f, dom)
        space_term = _flow_mixed_norm(f, t, s, MixedNormSpec(p, q, "space-outer"))
        time_term = _flow_mixed_norm(f, t, inv_p, MixedNormSpec(p, q, "time-outer"))
        return space_term + time_term

    def rhs(f: GridFunction, dom: EvalDomain) -> float:
        return hat_lebesgue_norm(f, alpha)

    return InequalitySpec(
        name="eq:mixed",
        label="mixed-norm flow bound against the conjugate spectrum norm",
        lhs=lhs,
        rhs=rhs,
        exponent_context=ctx,
    )


def _refinement_morrey(rec: SpaceOuterRefinement | TimeOuterRefinement) -> MorreyParams:
    if not rec.lattice_valid:
        raise ParameterError(
            "derived lattice exponents sit outside the validity region; "
            "move the point into the interior of the admissible window"
        )
    if isinstance(rec, SpaceOuterRefinement):
        outer, tie = rec.inv_beta, rec.inv_q == rec.inv_p + rec.sigma
        alternate = rec.inv_beta - rec.inv_q + rec.sigma
    else:
        outer, tie = rec.inv_alpha, rec.inv_q == rec.inv_p - rec.sigma
        alternate = rec.inv_alpha - rec.inv_q
    if tie and alternate != rec.inv_gamma:
        # at a branch boundary both formulas must agree; a mismatch would
        # mean the record was built inconsistently
        raise ConfigurationError("branch formulas disagree at their boundary")
    return MorreyParams(
        _as_float(outer), _as_float(rec.inv_gamma), _as_float(rec.inv_delta), "hat"
    )


def refined_space_entry(rec: SpaceOuterRefinement | None = None) -> InequalitySpec:
    """Space-outer flow bound against the lattice norm of lifted data."""
    ctx = rec if rec is not None else refine_space_outer(6, 6, Fraction(1, 30))
    params = _refinement_morrey(ctx)
    p = _as_float(ctx.inv_p)
    q = _as_float(ctx.inv_q)
    s = float(ctx.smoothing)
    sigma = float(ctx.sigma)

    def lhs(f: GridFunction, dom: EvalDomain) -> float:
        t = _time_grid(f, dom)
        return _flow_mixed_norm(f, t, s, MixedNormSpec(p, q, "space-outer"))

    def rhs(f: GridFunction, dom: EvalDomain) -> float:
        lifted = fractional_derivative(f, sigma)
        return hat_morrey_norm(lifted, params, dom.truncation)

    return InequalitySpec(
        name="qwe",
        label="space-outer refinement with smoothing-lifted lattice data norm",
        lhs=lhs,
        rhs=rhs,
        exponent_context=ctx,
    )


def refined_time_entry(rec: TimeOuterRefinement | None = None) -> InequalitySpec:
    """Time-outer flow bound against the lattice norm of the data."""
    ctx = rec if rec is not None else refine_time_outer(5, 8, Fraction(1, 8))
    params = _refinement_morrey(ctx)
    p = _as_float(ctx.inv_p)
    q = _as_float(ctx.inv_q)
    order = float(ctx.derivative_order)

    def lhs(f: GridFunction, dom: EvalDomain) -> float:
        t = _time_grid(f, dom)
        return _flow_mixed_norm(f, t, order, MixedNormSpec(p, q, "time-outer"))

    def rhs(f: GridFunction, dom: EvalDomain) -> float:
        return hat_morrey_norm(f, params, dom.truncation)

    return InequalitySpec(
        name="qwe2",
        label="time-outer refinement with lattice data norm",
        lhs=lhs,
        rhs=rhs,
        exponent_context=ctx,
    )


# ---------------------------------------------------------------------------
# Band multiplier entries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BandBoundContext:
    """Cutoff region and exponents for the band multiplier bound.

    Grid data are lifted to a squared flow field on a window scaled like
    the region (length ``window * 8^j``), where the product of waves
    lands exactly on the region's offset band.
    """

    bound: MultiplierBoundSpec
    region: EnlargedRegion = field(
        default_factory=lambda: EnlargedRegion(BilinearRegion("A", 0, 1, 3), 1.0)
    )
    n_t: int = 1024
    window: float = 26.0

    def __post_init__(self) -> None:
        if self.n_t < 2:
            raise ParameterError("band lift needs at least two time samples")
        if not (self.window > 0 and math.isfinite(self.window)):
            raise ParameterError("band window must be positive and finite")

    @property
    def cutoff(self) -> CutoffSpec:
        return make_cutoff(self.region)

    def describe(self) -> dict:
        base = self.region.base
        return {
            "variant": self.bound.variant,
            "p": self.bound.p,
            "q": self.bound.q,
            "sigma": self.bound.sigma,
            "region": f"{base.family}({base.j},{base.k},{base.ell})",
            "margin": self.region.lam,
            "n_t": self.n_t,
            "window": self.window,
        }


def _band_field(datum, ctx: BandBoundContext, dom: EvalDomain) -> SpaceTimeField:
    if isinstance(datum, SpaceTimeField):
        return datum
    scale = 8.0**ctx.region.base.j
    n_t = max(ctx.n_t, dom.n_t)
    t = np.linspace(0.0, ctx.window * scale, n_t, endpoint=False)
    with warnings.catch_warnings():
        # the band window deliberately outruns the horizon: the squared
        # field is exact box data, not a line surrogate
        warnings.simplefilter("ignore", HorizonWarning)
        u = airy_field(datum, t)
    return SpaceTimeField(u.values**2, t, datum.box_length)


def band_bound_entry(ctx: BandBoundContext) -> InequalitySpec:
    name = "bound" if ctx.bound.variant == "space-loss" else "bound3"
    scale_factor = math.ldexp(1.0, -ctx.region.base.j) ** ctx.bound.sigma

    def lhs(datum, dom: EvalDomain) -> float:
        F = _band_field(datum, ctx, dom)
        filtered = apply_band_multiplier(F, ctx.cutoff)
        return mixed_spacetime_norm(filtered, ctx.bound.lhs_norm())

    def rhs(datum, dom: EvalDomain) -> float:
        F = _band_field(datum, ctx, dom)
        return scale_factor * mixed_spacetime_norm(F, ctx.bound.rhs_norm())

    return InequalitySpec(
        name=name,
        label=f"band cutoff multiplier bound, {ctx.bound.variant} variant",
        lhs=lhs,
        rhs=rhs,
        exponent_context=ctx,
        datum_kind="field",
        time_rule="band-window",
    )


# ---------------------------------------------------------------------------
# Scattering-size entry (consumes solver trajectories)
# ---------------------------------------------------------------------------


def scattering_bound_entry(params: LwpParams | None = None) -> InequalitySpec:
    """Global solution-size bound for small data, stated constant 2."""
    ctx = params if params is not None else lwp_params(2, Fraction(1, 25), 2, Fraction(5, 2))
    if not ctx.valid:
        raise ParameterError(
            "exponents violate the well-posedness window: " + "; ".join(ctx.violations)
        )
    sigma = float(ctx.sigma)
    alpha = float(ctx.alpha)
    morrey = MorreyParams(
        _as_float(ctx.inv_beta), _as_float(ctx.inv_gamma), _as_float(ctx.inv_delta), "hat"
    )
    flow_norm = MixedNormSpec(2.5 * alpha, 5.0 * alpha, "space-outer")

    def _states(traj):
        states = list(traj.states)
        if not states:
            raise DegenerateDataError("trajectory holds no states")
        return states

    def lhs(traj, dom: EvalDomain) -> float:
        states = _states(traj)
        sup_term = max(
            hat_morrey_norm(fractional_derivative(s, sigma), morrey, dom.truncation)
            for s in states
        )
        values = np.stack([s.samples for s in states])
        field_term = mixed_spacetime_norm(
            SpaceTimeField(values, np.asarray(traj.times), states[0].box_length),
            flow_norm,
        )
        return sup_term + field_term

    def rhs(traj, dom: EvalDomain) -> float:
        initial = _states(traj)[0]
        return hat_morrey_norm(
            fractional_derivative(initial, sigma), morrey, dom.truncation
        )

    return InequalitySpec(
        name="SDSbound",
        label="global trajectory size against twice the initial lattice norm",
        lhs=lhs,
        rhs=rhs,
        exponent_context=ctx,
        constant=2.0,
        datum_kind="trajectory",
        time_rule="trajectory",
    )


# ---------------------------------------------------------------------------
# Norm comparison entries
# ---------------------------------------------------------------------------


def embedding_entry(params: MorreyParams | None = None) -> InequalitySpec:
    """Lattice norm against the conjugate spectrum norm of the same data."""
    ctx = params if params is not None else MorreyParams(2.5, 4.0, 4.0, "hat")
    if ctx.side != "hat":
        raise ParameterError("the embedding entry compares hat-side norms")
    conj_gamma = _conj(ctx.gamma)
    conj_beta = _conj(ctx.beta)
    if not (conj_gamma < conj_beta < ctx.delta):
        raise ParameterError(
            "embedding needs conjugate(gamma) < conjugate(beta) < delta"
        )

    def lhs(f: GridFunction, dom: EvalDomain) -> float:
        return hat_morrey_norm(f, ctx, dom.truncation)

    def rhs(f: GridFunction, dom: EvalDomain) -> float:
        return hat_lebesgue_norm(f, ctx.beta)

    return InequalitySpec(
        name="embeddings",
        label="lattice norm dominated by the conjugate spectrum norm",
        lhs=lhs,
        rhs=rhs,
        exponent_context=ctx,
        time_rule="none",
    )


def _conj(p: float) -> float:
    if p == 1.0:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class BandInterpolationContext:
    """Window for interpolating the diagonal flow norm through its
    dyadic-band pieces, with weight exponent ``zeta = max(gamma', delta)``."""

    alpha: float = 2.0
    sigma: float = 0.04
    gamma: float = 2.0
    delta: float = 2.4

    def __post_init__(self) -> None:
        if not self.alpha > 1.6:
            raise ParameterError("alpha must exceed 8/5")
        cap = 0.25 - 2.0 / (5.0 * self.alpha)
        if not (0.0 < self.sigma < cap):
            raise ParameterError(f"sigma must lie strictly inside (0, {cap:g})")
        inv_beta = 1.0 / self.alpha + self.sigma
        lo_g = 4.0 / (5.0 * self.alpha) + 2.0 * self.sigma
        if not (lo_g < 1.0 / self.gamma < inv_beta):
            raise ParameterError("gamma outside its strict window")
        lo_d = 0.5 - 1.0 / (5.0 * self.alpha)
        if not (lo_d < 1.0 / self.delta < 1.0 - inv_beta):
            raise ParameterError("delta outside its strict window")

    @property
    def beta(self) -> float:
        return 1.0 / (1.0 / self.alpha + self.sigma)

    @property
    def zeta(self) -> float:
        return max(_conj(self.gamma), self.delta)

    @property
    def morrey(self) -> MorreyParams:
        return MorreyParams(self.beta, self.gamma, self.delta, "hat")

    def describe(self) -> dict:
        return {
            "alpha": self.alpha,
            "sigma": self.sigma,
            "beta": self.beta,
            "gamma": self.gamma,
            "delta": self.delta,
            "zeta": self.zeta,
        }


def dyadic_projection(f: GridFunction, level: int) -> GridFunction:
    """Sharp projection onto frequencies ``2^level <= |xi| < 2^(level+1)``."""
    F = transform(f)
    absxi = np.abs(F.xi)
    lo = math.ldexp(1.0, level)
    mask = (absxi >= lo) & (absxi < 2.0 * lo)
    return inverse_transform(FrequencyFunction(F.coefficients * mask, f.box_length))


def _populated_levels(f: GridFunction, rel_tol: float = 1e-13) -> list[int]:
    F = transform(f)
    mags = np.abs(F.coefficients)
    top = float(mags.max())
    if top == 0.0:
        return []
    nonzero = np.abs(F.xi[(mags > rel_tol * top) & (F.xi != 0.0)])
    if nonzero.size == 0:
        return []
    levels = np.unique(np.floor(np.log2(nonzero)).astype(int))
    return [int(n) for n in levels]


def band_interpolation_entry(
    ctx: BandInterpolationContext | None = None,
) -> InequalitySpec:
    ctx = ctx if ctx is not None else BandInterpolationContext()
    three_alpha = 3.0 * ctx.alpha
    order = 1.0 / three_alpha
    diag = MixedNormSpec(three_alpha, three_alpha, "diagonal")
    theta = ctx.zeta / three_alpha
    morrey = ctx.morrey
    sigma = ctx.sigma

    def lhs(f: GridFunction, dom: EvalDomain) -> float:
        t = _time_grid(f, dom)
        return _flow_mixed_norm(f, t, order, diag)

    def rhs(f: GridFunction, dom: EvalDomain) -> float:
        t = _time_grid(f, dom)
        best = 0.0
        for level in _populated_levels(f):
            piece = dyadic_projection(f, level)
            best = max(best, _flow_mixed_norm(piece, t, order, diag))
        lattice = hat_morrey_norm(
            fractional_derivative(f, sigma), morrey, dom.truncation
        )
        return best ** (1.0 - theta) * lattice**theta

    return InequalitySpec(
        name="cc_claim",
        label="diagonal flow norm interpolated through its largest dyadic band",
        lhs=lhs,
        rhs=rhs,
        exponent_context=ctx,
    )


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------


_BUILDERS = {
    "eq:mixed": mixed_norm_entry,
    "qwe": refined_space_entry,
    "qwe2": refined_time_entry,
    "bound": lambda ctx=None: band_bound_entry(
        ctx or BandBoundContext(MultiplierBoundSpec(4.0, 2.0, 0.1, "space-loss"))
    ),
    "bound3": lambda ctx=None: band_bound_entry(
        ctx or BandBoundContext(MultiplierBoundSpec(4.0, 2.0, 0.1, "time-loss"))
    ),
    "SDSbound": scattering_bound_entry,
    "embeddings": embedding_entry,
    "cc_claim": band_interpolation_entry,
}


def build_spec(name: str, context=None) -> InequalitySpec:
    """Construct a catalog estimate, optionally at explicit exponents."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ParameterError(
            f"unknown estimate {name!r}; catalog: {sorted(_BUILDERS)}"
        ) from None
    return builder(context) if context is not None else builder()


def builtin_catalog() -> list[InequalitySpec]:
    """Every estimate at its default admissible exponents."""
    return [build_spec(name) for name in _BUILDERS]


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


@dataclass
class RatioReport:
    """Per-exponent-point ratios with the refinement drift."""

    name: str
    points: list[dict]
    max_ratio: float
    drift: float
    truncation: dict
    parameters: dict

    def __post_init__(self) -> None:
        if not math.isfinite(self.max_ratio):
            raise ConfigurationError(f"{self.name}: ratios diverged")

    def as_dict(self) -> dict:
        return {
            "spec": self.name,
            "points": _jsonable(self.points),
            "max": self.max_ratio,
            "drift": self.drift,
            "truncation": _jsonable(self.truncation),
            "parameters": _jsonable(self.parameters),
        }


def _family_ratios(
    spec: InequalitySpec,
    members: Sequence[GridFunction],
    dom: EvalDomain,
    threads: int,
) -> list[float]:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda f: ratio(spec, f, dom), members))
    return [ratio(spec, f, dom) for f in members]


def sweep(
    spec: InequalitySpec,
    family: TestFamily,
    contexts: Sequence | None = None,
    domain: EvalDomain | None = None,
    threads: int = 1,
) -> RatioReport:
    """Max ratios over the family per exponent point, with drift.

    The drift compares the overall max ratio against a rerun with the
    family regenerated on a doubled spatial grid and the time grid
    doubled; functionals must be pure, so points and members can be
    evaluated in any order.
    """
    if threads < 1:
        raise ParameterError("thread count must be at least 1")
    dom = domain or spec.default_domain()
    specs = (
        [spec]
        if contexts is None
        else [build_spec(spec.name, ctx) for ctx in contexts]
    )
    members = family.members()

    points = []
    for sp in specs:
        ratios = _family_ratios(sp, members, dom, threads)
        points.append(
            {
                "context": _context_summary(sp.exponent_context),
                "ratios": ratios,
                "max": max(ratios),
            }
        )
    base_max = max(pt["max"] for pt in points)

    fine_members = family.refined().members()
    fine_dom = dom.refined()
    fine_max = max(
        max(_family_ratios(sp, fine_members, fine_dom, threads)) for sp in specs
    )
    drift = abs(fine_max - base_max) / base_max

    return RatioReport(
        name=spec.name,
        points=points,
        max_ratio=base_max,
        drift=drift,
        truncation=_truncation_info(spec, members, dom),
        parameters={"family": family.describe(), "domain": dom.describe()},
    )


def _truncation_info(
    spec: InequalitySpec, members: Sequence[GridFunction], dom: EvalDomain
) -> dict:
    if spec.time_rule == "none":
        return {"rule": "none"}
    if spec.time_rule == "band-window":
        ctx = spec.exponent_context
        return {
            "rule": "band-window",
            "windows": [ctx.window * 8.0**ctx.region.base.j],
        }
    if spec.time_rule == "trajectory":
        return {"rule": "trajectory"}
    rule = "explicit" if dom.t_window is not None else "half-horizon"
    windows = [_window_for(f, dom) for f in members]
    return {"rule": rule, "windows": windows}


# ---------------------------------------------------------------------------
# Overlap audit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OverlapAuditConfig:
    """Sampling plan for the almost-orthogonality audit."""

    samples: int = 10000
    seed: int = 0
    families: tuple[str, ...] = ("A", "B")
    margin_scale: float = 1.0
    adversarial: bool = True
    csv_path: str | None = None

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ParameterError("audit needs at least one sample")
        for fam in self.families:
            if fam not in ("A", "B"):
                raise ParameterError(f"unknown region family {fam!r}")


def _adversarial_cloud() -> tuple[np.ndarray, np.ndarray]:
    """Points on the edges, corners, and margin rims of concrete regions.

    Shared band edges of consecutive scales are where counts peak, so
    small indices at a few adjacent scales are enumerated exhaustively.
    """
    taus, xis = [], []
    for family in ("A", "B"):
        for j in (-2, -1, 0, 1, 2):
            for k in range(0, 7):
                for m in WHITNEY_OFFSETS:
                    ell = k + m
                    if ell < 0:
                        continue
                    region = BilinearRegion(family, j, k, ell)
                    lam = canonical_margin(region)
                    lo, hi = region.xi_window()
                    for xi in (lo, 0.5 * (lo + hi), hi):
                        a, b = region.tau_band(xi)
                        base = xi * xi * xi / 4.0
                        for off in (a - lam, a, a + lam, b - lam, b, b + lam):
                            taus.append(base + off)
                            xis.append(xi)
    # frozen nested-edge witness where the per-offset count peaks, with
    # its mirror exercising the positive offsets
    taus.extend([15.49028125, -15.49028125])
    xis.extend([1.25, -1.25])
    return np.asarray(taus), np.asarray(xis)


def overlap_audit(
    config: OverlapAuditConfig | None = None, strict: bool = True
) -> dict:
    """Count enlarged-region overlaps over a sample cloud.

    With ``strict`` the audit raises when any point exceeds 12 total
    regions or 3 per Whitney offset within one family; otherwise the
    report records the violations for the caller to judge.
    """
    cfg = config or OverlapAuditConfig()
    rng = np.random.default_rng(cfg.seed)
    xi = np.exp2(rng.uniform(-12, 12, cfg.samples))
    dev = np.exp2(rng.uniform(-30, 30, cfg.samples))
    sign = np.where(rng.uniform(size=cfg.samples) < 0.9, 1.0, -1.0)
    tau = xi * xi * xi / 4.0 + sign * dev
    # mirror half the cloud into the opposite quadrant, where the
    # positive-offset regions live
    mirror = rng.uniform(size=cfg.samples) < 0.5
    xi = np.where(mirror, -xi, xi)
    tau = np.where(mirror, -tau, tau)
    if cfg.adversarial:
        extra_tau, extra_xi = _adversarial_cloud()
        tau = np.concatenate([tau, extra_tau])
        xi = np.concatenate([xi, extra_xi])

    report: dict = {
        "samples": int(tau.size),
        "seed": cfg.seed,
        "margin_scale": cfg.margin_scale,
        "adversarial": cfg.adversarial,
        "families": {},
    }
    failures = []
    for fam in cfg.families:
        counts = overlap_counts_bulk(fam, tau, xi, cfg.margin_scale)
        totals = counts.sum(axis=1)
        per_offset = {
            int(m): int(counts[:, i].max()) for i, m in enumerate(WHITNEY_OFFSETS)
        }
        entry = {
            "max_total": int(totals.max()),
            "max_per_offset": per_offset,
            "total_bound_ok": bool(totals.max() <= 12),
            "offset_bound_ok": bool(counts.max() <= 3),
        }
        report["families"][fam] = entry
        if not entry["total_bound_ok"]:
            failures.append(f"family {fam}: total count {entry['max_total']} > 12")
        if not entry["offset_bound_ok"]:
            worst = max(per_offset.values())
            failures.append(f"family {fam}: per-offset count {worst} > 3")
    if cfg.csv_path is not None:
        write_overlap_audit(cfg.csv_path, tau, xi, cfg.families, cfg.margin_scale)
    if strict and failures:
        raise DispersiveLabError("overlap audit failed: " + "; ".join(failures))
    return report
