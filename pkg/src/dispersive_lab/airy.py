"""The Airy group on the periodic box and the band cutoff multiplier.

The propagator is exact mode-wise multiplication by ``e^{i t xi^3}`` (no
time stepping). The cutoff multiplier is smooth only in the time
frequency: the indicator of a half-enlarged band is convolved along tau
with a compact bump, reproducing the sandwich
``1_R <= psi <= 1_{R + lambda}`` at every sample.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dyadic import BilinearRegion, EnlargedRegion
from .errors import (
    DegenerateDataError,
    HorizonWarning,
    ParameterError,
    ResolutionError,
)
from .spectral import (
    GridFunction,
    MixedNormSpec,
    SpaceTimeField,
    _alternating_signs,
    mixed_spacetime_norm,
    transform,
)

INF = math.inf

# 1 / integral of exp(-1/(1-x^2)) over (-1, 1); trapezoid at n = 2^20
# and 2^22 agree to the last digit.
_BUMP_NORM = 2.2522836210435813


def mollifier(x) -> np.ndarray:
    """The fixed bump: nonnegative, supported in [-1, 1], unit integral."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = _BUMP_NORM * np.exp(-1.0 / (1.0 - xi * xi))
    return out


# ---------------------------------------------------------------------------
# Propagator
# ---------------------------------------------------------------------------


def airy_flow(f: GridFunction, t: float) -> GridFunction:
    """Evolve by the Airy group: multiply mode ``m`` by ``e^{i t xi_m^3}``.

    Unitary for every ``t``; real data stay real up to the unpaired
    highest mode, which is at roundoff level for box-supported data.
    """
    if not math.isfinite(t):
        raise ParameterError(f"time {t} must be finite")
    if t == 0.0:
        return GridFunction(f.samples.copy(), f.box_length, is_real=f.is_real)
    F = transform(f)
    phases = np.exp(1j * t * F.xi**3)
    n = f.n_x
    pre = np.fft.ifftshift(F.coefficients * phases * _alternating_signs(n))
    samples = np.fft.ifft(pre) * (n * F.dxi / math.sqrt(2 * math.pi))
    # reality survives up to the unpaired highest mode, which carries
    # only roundoff for box-supported data; keep the flag honest
    scale = float(np.max(np.abs(samples)))
    is_real = f.is_real and (
        scale == 0.0 or float(np.max(np.abs(samples.imag))) <= 1e-12 * scale
    )
    return GridFunction(samples, f.box_length, is_real=is_real)


def wraparound_horizon(f: GridFunction, rel_tol: float = 1e-12) -> float:
    """Time for the fastest populated mode to cross the box.

    A packet at frequency xi travels at group speed ``3 xi^2``; the box
    surrogate stops resembling the line once ``3 xi_cut^2 |t|`` exceeds
    the box length. Data with no populated nonzero mode have an
    infinite horizon.
    """
    F = transform(f)
    mags = np.abs(F.coefficients)
    top = float(mags.max())
    if top == 0.0:
        return INF
    populated = np.abs(F.xi[mags > rel_tol * top])
    xi_cut = float(populated.max()) if populated.size else 0.0
    if xi_cut == 0.0:
        return INF
    return f.box_length / (3.0 * xi_cut * xi_cut)


def airy_field(f: GridFunction, t_grid) -> SpaceTimeField:
    """Rows ``i`` of the result sample ``airy_flow(f, t_i)``.

    Rows are independent (the propagator is diagonal per mode), computed
    in one vectorized pass. Times beyond the wrap-around horizon are
    allowed but reported with a warning.
    """
    t = np.asarray(t_grid, dtype=np.float64)
    if t.ndim != 1 or t.size == 0:
        raise ParameterError("time grid must be a nonempty 1-D array")
    horizon = wraparound_horizon(f)
    worst = float(np.max(np.abs(t)))
    if worst > horizon:
        warnings.warn(
            f"time grid reaches |t| = {worst:.6g} beyond the wrap-around "
            f"horizon {horizon:.6g}; box artifacts likely",
            HorizonWarning,
            stacklevel=2,
        )
    F = transform(f)
    n = f.n_x
    phases = np.exp(1j * np.outer(t, F.xi**3))
    pre = np.fft.ifftshift(phases * (F.coefficients * _alternating_signs(n)), axes=1)
    rows = np.fft.ifft(pre, axis=1) * (n * F.dxi / math.sqrt(2 * math.pi))
    return SpaceTimeField(rows, t, f.box_length)


# ---------------------------------------------------------------------------
# Band cutoff
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RawBand:
    """The set ``xi_lo <= xi <= xi_hi``, ``c xi <= tau - xi^3/4 <= d xi``.

    ``slope_lo``/``slope_hi`` are c and d; for negative xi the two edge
    values swap order, so membership always tests against the sorted
    pair, matching the indexed-region convention.
    """

    xi_lo: float
    xi_hi: float
    slope_lo: float
    slope_hi: float

    def __post_init__(self) -> None:
        vals = (self.xi_lo, self.xi_hi, self.slope_lo, self.slope_hi)
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError("band parameters must be finite")
        if self.xi_lo > self.xi_hi:
            raise ParameterError("band requires xi_lo <= xi_hi")
        if self.slope_lo > self.slope_hi:
            raise ParameterError("band requires slope_lo <= slope_hi")

    @classmethod
    def from_region(cls, region: BilinearRegion) -> "RawBand":
        a, b = region.xi_window()
        c, d = region.tau_band(1.0)
        return cls(a, b, c, d)

    def offset_window(self, xi: float) -> tuple[float, float]:
        """The interval of ``tau - xi^3/4`` at this ``xi``, edges sorted."""
        lo, hi = self.slope_lo * xi, self.slope_hi * xi
        return (lo, hi) if lo <= hi else (hi, lo)

    def contains(self, tau: float, xi: float, pad: float = 0.0) -> bool:
        if not (self.xi_lo <= xi <= self.xi_hi):
            return False
        lo, hi = self.offset_window(xi)
        d = tau - xi * xi * xi / 4.0
        return lo - pad <= d <= hi + pad


@dataclass(frozen=True)
class CutoffSpec:
    """A band plus the tau-direction smoothing width ``lam``.

    ``scale_j`` records the dyadic scale when the band came from an
    indexed region; the multiplier bound normalizes by ``2^{-j sigma}``
    and therefore requires it.
    """

    band: RawBand
    lam: float
    scale_j: int | None = None

    def __post_init__(self) -> None:
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ParameterError(f"smoothing width {self.lam} must be positive")


def make_cutoff(region, lam: float | None = None) -> CutoffSpec:
    """Build a cutoff from an enlarged region, a bare region, or a band.

    An :class:`EnlargedRegion` supplies its own margin as ``lam`` (an
    explicit ``lam`` overrides); other inputs require ``lam``.
    """
    if isinstance(region, EnlargedRegion):
        width = lam if lam is not None else region.lam
        return CutoffSpec(RawBand.from_region(region.base), width, region.base.j)
    if isinstance(region, BilinearRegion):
        if lam is None:
            raise ParameterError("a bare region needs an explicit smoothing width")
        return CutoffSpec(RawBand.from_region(region), lam, region.j)
    if isinstance(region, RawBand):
        if lam is None:
            raise ParameterError("a raw band needs an explicit smoothing width")
        return CutoffSpec(region, lam, None)
    raise ParameterError(f"cannot build a cutoff from {type(region).__name__}")


def _tau_kernel(lam: float, dtau: float) -> np.ndarray:
    """Discrete bump along tau: radius floor((lam/2)/dtau).

    The weights sum to exactly 1.0 when accumulated in the convolution's
    order (off-center entries ascending, center last), so the convolution
    returns exactly 1.0 wherever the indicator covers the whole stencil.
    """
    if not lam > 4.0 * dtau:
        raise ResolutionError(
            f"smoothing width {lam:.6g} must exceed 4 tau-grid cells "
            f"(cell {dtau:.6g}); refine the time grid or widen the band"
        )
    radius = int(math.floor((lam / 2.0) / dtau))
    offsets = np.arange(-radius, radius + 1) * dtau
    weights = mollifier(2.0 * offsets / lam)
    total = float(weights.sum())
    if total <= 0.0:
        raise ResolutionError("degenerate smoothing kernel")
    weights /= total
    # exactness scheme: the convolution accumulates the off-center
    # weights in ascending order and the center weight last, so nudging
    # the center makes the running sum land on exactly 1.0
    others = 0.0
    for i in range(weights.size):
        if i != radius:
            others += float(weights[i])
    center = 1.0 - others
    for _ in range(256):
        if others + center == 1.0:
            break
        center = math.nextafter(center, 2.0 if others + center < 1.0 else -2.0)
    else:
        raise ResolutionError("smoothing kernel failed to normalize exactly")
    if center <= 0.0:
        raise ResolutionError("degenerate smoothing kernel")
    weights[radius] = center
    return weights


def evaluate_cutoff(spec: CutoffSpec, tau_grid, xi_grid) -> np.ndarray:
    """Sample ``psi[i, j]`` at ``(tau_i, xi_j)`` on a uniform tau grid.

    The indicator of the half-enlarged band is convolved along tau with
    the discrete bump kernel by direct accumulation, so samples outside
    the fully enlarged band are exactly 0 and samples in the core band
    are exactly 1 (the kernel sums to 1 in accumulation order); clipping
    trims at most one ulp of rounding above 1.
    """
    tau = np.asarray(tau_grid, dtype=np.float64)
    xi = np.asarray(xi_grid, dtype=np.float64)
    if tau.ndim != 1 or tau.size < 2:
        raise ParameterError("tau grid must be 1-D with at least two samples")
    steps = np.diff(tau)
    dtau = float(steps[0])
    if dtau <= 0 or float(np.max(np.abs(steps - dtau))) > 1e-9 * abs(dtau):
        raise ParameterError("tau grid must be uniformly increasing")
    kernel = _tau_kernel(spec.lam, dtau)

    # indicator of the half-enlarged band, column by column in xi
    half = spec.lam / 2.0
    in_xi = (xi >= spec.band.xi_lo) & (xi <= spec.band.xi_hi)
    lo = np.minimum(spec.band.slope_lo * xi, spec.band.slope_hi * xi) - half
    hi = np.maximum(spec.band.slope_lo * xi, spec.band.slope_hi * xi) + half
    offs = tau[:, None] - (xi * xi * xi / 4.0)[None, :]
    ind = ((offs >= lo[None, :]) & (offs <= hi[None, :]) & in_xi[None, :]).astype(
        np.float64
    )

    radius = kernel.size // 2
    n_tau = tau.size
    padded = np.zeros((n_tau + 2 * radius, xi.size))
    padded[radius : radius + n_tau] = ind
    out = np.zeros((n_tau, xi.size))
    # psi[j] = sum_i kernel[i] * ind[j + radius - i]; the slice below is
    # that shift expressed on the padded array.  The center tap is added
    # last to match the kernel's exact-normalization order.
    order = [i for i in range(kernel.size) if i != radius] + [radius]
    for i in order:
        start = 2 * radius - i
        out += kernel[i] * padded[start : start + n_tau]
    return np.clip(out, 0.0, 1.0)


def apply_band_multiplier(F: SpaceTimeField, spec: CutoffSpec) -> SpaceTimeField:
    """Multiply the space-time spectrum of ``F`` by the smooth cutoff.

    The field is transformed in both variables, multiplied pointwise by
    ``psi(tau, xi)``, and transformed back; the time window must be long
    enough that the tau cells resolve the smoothing width.
    """
    if F.n_t < 2:
        raise ParameterError("band multiplier needs at least two time samples")
    n_t, n_x = F.n_t, F.n_x
    dtau = 2.0 * math.pi / (n_t * F.dt)
    dxi = 2.0 * math.pi / F.box_length
    tau = np.arange(-(n_t // 2), (n_t + 1) // 2) * dtau
    xi = np.arange(-(n_x // 2), n_x - n_x // 2) * dxi
    psi = evaluate_cutoff(spec, tau, xi)
    spectrum = np.fft.fftshift(np.fft.fft2(F.values))
    filtered = np.fft.ifft2(np.fft.ifftshift(spectrum * psi))
    return SpaceTimeField(filtered, F.t_grid, F.box_length)


# ---------------------------------------------------------------------------
# Multiplier bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiplierBoundSpec:
    """Exponents for the cutoff bound with its small loss.

    ``space-loss`` bounds ``L^p_x L^q_t`` of the filtered field by the
    ``p_sigma`` norm of the input (1/p_sigma = 1/p + sigma); the
    ``time-loss`` variant puts the loss on the inner space exponent of
    ``L^p_t L^q_x`` instead.
    """

    p: float
    q: float
    sigma: float
    variant: str = "space-loss"

    def __post_init__(self) -> None:
        if self.variant not in ("space-loss", "time-loss"):
            raise ParameterError(f"unknown bound variant {self.variant!r}")
        if not (0.0 < self.sigma < 1.0):
            raise ParameterError(f"loss sigma {self.sigma} must lie in (0, 1)")
        lossy = self.p if self.variant == "space-loss" else self.q
        other = self.q if self.variant == "space-loss" else self.p
        if not (1.0 / (1.0 - self.sigma) <= lossy or lossy == INF):
            raise ParameterError(
                f"lossy exponent {lossy} must be at least 1/(1 - sigma)"
            )
        if not (1.0 <= other):
            raise ParameterError(f"exponent {other} must be at least 1")

    @property
    def lossy_exponent(self) -> float:
        """The shifted exponent carrying the loss."""
        base = self.p if self.variant == "space-loss" else self.q
        inv = (0.0 if base == INF else 1.0 / base) + self.sigma
        return 1.0 / inv

    def lhs_norm(self) -> MixedNormSpec:
        order = "space-outer" if self.variant == "space-loss" else "time-outer"
        return MixedNormSpec(self.p, self.q, order)

    def rhs_norm(self) -> MixedNormSpec:
        if self.variant == "space-loss":
            return MixedNormSpec(self.lossy_exponent, self.q, "space-outer")
        return MixedNormSpec(self.p, self.lossy_exponent, "time-outer")


def multiplier_bound_ratio(
    F: SpaceTimeField, cutoff: CutoffSpec, spec: MultiplierBoundSpec
) -> float:
    """``norm(filtered) / (2^{-j sigma} norm_shifted(F))`` at the band's scale."""
    if cutoff.scale_j is None:
        raise ParameterError("bound ratio needs a cutoff built from an indexed region")
    rhs = mixed_spacetime_norm(F, spec.rhs_norm())
    if rhs == 0.0:
        raise DegenerateDataError("zero field has no bound ratio")
    filtered = apply_band_multiplier(F, cutoff)
    lhs = mixed_spacetime_norm(filtered, spec.lhs_norm())
    return lhs / (math.ldexp(1.0, -cutoff.scale_j) ** spec.sigma * rhs)


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def cutoff_to_csv(spec: CutoffSpec, tau_grid, xi_grid, path: str) -> None:
    """Write psi samples as rows ``tau, xi, psi``."""
    psi = evaluate_cutoff(spec, tau_grid, xi_grid)
    tau = np.asarray(tau_grid, dtype=np.float64)
    xi = np.asarray(xi_grid, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau", "xi", "psi"])
        for i in range(tau.size):
            for j in range(xi.size):
                writer.writerow([repr(float(tau[i])), repr(float(xi[j])), repr(float(psi[i, j]))])
