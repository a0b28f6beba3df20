"""Uniform periodic grids, the unitary Fourier transform, fractional
derivatives, and Lebesgue / mixed space-time norms.

Every other module consumes these primitives.  The conventions are fixed
once, here:

* The spatial domain is a periodic box of length ``L`` centered at 0,
  sampled at ``n_x`` points ``x_i = -L/2 + i*L/n_x``.
* The transform is unitary with kernel ``exp(-i*x*xi)`` and symmetric
  ``(2*pi)**-0.5`` normalization.  Mode ``m`` carries the physical
  frequency ``xi_m = 2*pi*m/L``.
* All integrals are left-endpoint rectangle rules on the grid; the
  function is modeled as piecewise constant on cells ``[x_i, x_i + dx)``.
  ``L^inf`` is the sample maximum.
* Exponent ``inf`` is represented by ``math.inf``; norm code branches
  explicitly on it.

The box is a surrogate for the whole line: test data are expected to be
numerically supported inside the box (tail below ``1e-10`` at the edge),
and time-dependent experiments record a wrap-around horizon.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, ParameterError, ZeroFrequencySingularity

INF = math.inf

#: Relative tolerance for declaring stored samples "real".
_REALITY_RTOL = 1e-12


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _as_complex_array(values: Sequence[complex] | np.ndarray) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128)
    if arr.ndim != 1:
        raise ConfigurationError(f"expected a 1-D sample array, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples of a function on the uniform periodic spatial grid.

    ``is_real`` asserts that the physical signal is real valued; the
    constructor enforces it against the stored samples.
    """

    samples: np.ndarray
    box_length: float
    is_real: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", _as_complex_array(self.samples))
        n = self.samples.size
        if not (_is_power_of_two(n) and n >= 8):
            raise ConfigurationError(f"grid size {n} must be a power of two and >= 8")
        if not (self.box_length > 0 and math.isfinite(self.box_length)):
            raise ConfigurationError(f"box length {self.box_length} must be positive")
        if self.is_real:
            scale = float(np.max(np.abs(self.samples)))
            if scale > 0 and float(np.max(np.abs(self.samples.imag))) > _REALITY_RTOL * scale:
                raise ConfigurationError("is_real set but samples carry imaginary parts")

    @property
    def n_x(self) -> int:
        return self.samples.size

    @property
    def dx(self) -> float:
        return self.box_length / self.n_x

    @property
    def x(self) -> np.ndarray:
        """Sample coordinates, the left edges of the quadrature cells."""
        return -self.box_length / 2 + self.dx * np.arange(self.n_x)

    def real_samples(self) -> np.ndarray:
        return self.samples.real.copy()

    def scaled(self, c: complex) -> "GridFunction":
        return replace(self, samples=self.samples * c, is_real=self.is_real and c.imag == 0)


@dataclass(frozen=True, eq=False)
class FrequencyFunction:
    """Fourier coefficients indexed by integer mode ``m in [-n/2, n/2)``.

    ``coefficients[j]`` belongs to mode ``m = j - n/2``, i.e. the array is
    stored in increasing-frequency order.  ``convention`` is a fixed tag
    documenting the transform normalization; only one value exists.
    """

    coefficients: np.ndarray
    box_length: float
    convention: str = "unitary e^{-ix xi}, (2 pi)^{-1/2}"

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", _as_complex_array(self.coefficients))
        n = self.coefficients.size
        if not (_is_power_of_two(n) and n >= 8):
            raise ConfigurationError(f"mode count {n} must be a power of two and >= 8")
        if not (self.box_length > 0 and math.isfinite(self.box_length)):
            raise ConfigurationError(f"box length {self.box_length} must be positive")

    @property
    def n_x(self) -> int:
        return self.coefficients.size

    @property
    def modes(self) -> np.ndarray:
        n = self.n_x
        return np.arange(-n // 2, n // 2)

    @property
    def dxi(self) -> float:
        return 2 * math.pi / self.box_length

    @property
    def xi(self) -> np.ndarray:
        """Physical frequencies ``xi_m = 2 pi m / L`` in increasing order."""
        return self.modes * self.dxi


def _alternating_signs(n: int) -> np.ndarray:
    # (-1)^m for m = -n/2 .. n/2-1; the half-box grid offset appears in the
    # transform as exactly this sign pattern.
    signs = np.ones(n)
    signs[(np.arange(-n // 2, n // 2) % 2) != 0] = -1.0
    return signs


def transform(f: GridFunction) -> FrequencyFunction:
    """Forward unitary transform of a grid function.

    The coefficients approximate ``(2 pi)^{-1/2} * integral f(x) e^{-ix xi_m} dx``
    by the rectangle rule; together with :func:`inverse_transform` the pair
    is exact on the grid (round trip to machine precision) and satisfies
    the Plancherel identity in the ``dx`` / ``dxi`` weighted norms.
    """
    n = f.n_x
    raw = np.fft.fftshift(np.fft.fft(f.samples))
    coeffs = raw * (_alternating_signs(n) * f.dx / math.sqrt(2 * math.pi))
    return FrequencyFunction(coeffs, f.box_length)


def inverse_transform(F: FrequencyFunction, is_real: bool | None = None) -> GridFunction:
    """Inverse of :func:`transform`; exact on the grid.

    ``is_real=None`` auto-detects reality of the output.
    """
    n = F.n_x
    pre = np.fft.ifftshift(F.coefficients * _alternating_signs(n))
    samples = np.fft.ifft(pre) * (n * F.dxi / math.sqrt(2 * math.pi))
    if is_real is None:
        scale = float(np.max(np.abs(samples)))
        is_real = scale == 0 or float(np.max(np.abs(samples.imag))) <= _REALITY_RTOL * scale
    return GridFunction(samples, F.box_length, is_real=is_real)


def transform_pair(f: GridFunction) -> tuple[FrequencyFunction, GridFunction]:
    """Forward transform together with its round trip, for auditing."""
    F = transform(f)
    return F, inverse_transform(F, is_real=f.is_real)


def fractional_derivative(f: GridFunction, s: float) -> GridFunction:
    """Apply ``|d/dx|^s``: multiply mode ``m`` by ``|xi_m|**s``.

    For ``s > 0`` the zero mode is annihilated.  For ``s < 0`` the input
    must have (numerically) vanishing mean, otherwise the zero frequency
    is non-integrable and the call fails.
    """
    F = transform(f)
    coeffs = F.coefficients.copy()
    n = F.n_x
    zero_idx = n // 2
    if s == 0:
        return GridFunction(f.samples.copy(), f.box_length, is_real=f.is_real)
    absxi = np.abs(F.xi)
    if s < 0:
        top = float(np.max(np.abs(coeffs)))
        if top > 0 and abs(coeffs[zero_idx]) > 1e-10 * top:
            raise ZeroFrequencySingularity(
                "negative-order derivative of data with nonzero mean"
            )
        coeffs[zero_idx] = 0.0
        absxi[zero_idx] = 1.0  # dummy, the mode is already zeroed
        coeffs = coeffs * absxi**s
    else:
        coeffs = coeffs * absxi**s
        coeffs[zero_idx] = 0.0
    out = inverse_transform(FrequencyFunction(coeffs, f.box_length))
    if f.is_real and out.is_real:
        return out
    return replace(out, is_real=False)


def lebesgue_norm(f: GridFunction | np.ndarray, p: float, dx: float | None = None) -> float:
    """Rectangle-rule ``L^p`` norm; ``p = inf`` is the sample maximum."""
    if isinstance(f, GridFunction):
        values, dx = f.samples, f.dx
    else:
        values = np.asarray(f)
        if dx is None:
            raise ConfigurationError("dx required for bare arrays")
    if p < 1:
        raise ParameterError(f"Lebesgue exponent {p} < 1")
    mags = np.abs(values)
    if p == INF:
        return float(mags.max()) if mags.size else 0.0
    return float((np.sum(mags**p) * dx) ** (1.0 / p))


@dataclass(frozen=True)
class MixedNormSpec:
    """Mixed space-time Lebesgue norm: outer exponent, inner exponent, order.

    ``space-outer`` is ``L^p_x L^q_t`` (inner integral in time),
    ``time-outer`` is ``L^p_t L^q_x``, and ``diagonal`` is the flat
    space-time ``L^p`` norm (requires ``p == q``).
    """

    p: float
    q: float
    order: str = "space-outer"

    _ORDERS = ("space-outer", "time-outer", "diagonal")

    def __post_init__(self) -> None:
        if self.order not in self._ORDERS:
            raise ParameterError(f"unknown mixed-norm order {self.order!r}")
        for name, e in (("p", self.p), ("q", self.q)):
            if not (e == INF or (1 <= e < INF)):
                raise ParameterError(f"exponent {name}={e} outside [1, inf]")
        if self.order == "diagonal" and self.p != self.q:
            raise ParameterError("diagonal norm requires p == q")


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Samples ``values[i, j] = F(t_i, x_j)`` on a uniform (t, x) rectangle.

    The spatial grid is the periodic-box grid of :class:`GridFunction`
    with the given ``box_length``; the time grid must be uniform and
    strictly increasing.
    """

    values: np.ndarray
    t_grid: np.ndarray
    box_length: float

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.complex128)
        t = np.asarray(self.t_grid, dtype=np.float64)
        if vals.ndim != 2:
            raise ConfigurationError("field values must be 2-D (time, space)")
        if t.ndim != 1 or t.size != vals.shape[0]:
            raise ConfigurationError("time grid length must match the value rows")
        if t.size >= 2:
            steps = np.diff(t)
            if np.any(steps <= 0):
                raise ConfigurationError("time grid must be strictly increasing")
            if np.max(np.abs(steps - steps[0])) > 1e-9 * max(abs(float(t[-1])), 1.0):
                raise ConfigurationError("time grid must be uniformly spaced")
        if not (_is_power_of_two(vals.shape[1]) and vals.shape[1] >= 8):
            raise ConfigurationError("spatial size must be a power of two and >= 8")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "t_grid", t)

    @property
    def n_t(self) -> int:
        return self.values.shape[0]

    @property
    def n_x(self) -> int:
        return self.values.shape[1]

    @property
    def dt(self) -> float:
        if self.n_t < 2:
            return 1.0
        return float(self.t_grid[1] - self.t_grid[0])

    @property
    def dx(self) -> float:
        return self.box_length / self.n_x

    @property
    def x(self) -> np.ndarray:
        return -self.box_length / 2 + self.dx * np.arange(self.n_x)

    def row(self, i: int) -> GridFunction:
        return GridFunction(self.values[i], self.box_length)


def _axis_norm(mags: np.ndarray, p: float, weight: float, axis: int) -> np.ndarray:
    if p == INF:
        return np.max(mags, axis=axis)
    return (np.sum(mags**p, axis=axis) * weight) ** (1.0 / p)


def mixed_spacetime_norm(F: SpaceTimeField, spec: MixedNormSpec) -> float:
    """Mixed norm of a space-time field with rectangle-rule weights."""
    mags = np.abs(F.values)
    if spec.order == "diagonal":
        if spec.p == INF:
            return float(mags.max()) if mags.size else 0.0
        return float((np.sum(mags**spec.p) * F.dt * F.dx) ** (1.0 / spec.p))
    if spec.order == "space-outer":
        inner = _axis_norm(mags, spec.q, F.dt, axis=0)  # per x-column over t
        outer = _axis_norm(inner, spec.p, F.dx, axis=0)
    else:  # time-outer
        inner = _axis_norm(mags, spec.q, F.dx, axis=1)  # per t-row over x
        outer = _axis_norm(inner, spec.p, F.dt, axis=0)
    return float(outer)


# ---------------------------------------------------------------------------
# Serialization (CSV, dimensionless units)
# ---------------------------------------------------------------------------

def grid_function_to_csv(f: GridFunction, path: str) -> None:
    """Write samples as rows ``x, re, im`` (dimensionless units)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "re", "im"])
        for x, v in zip(f.x, f.samples):
            writer.writerow([repr(float(x)), repr(float(v.real)), repr(float(v.imag))])


def grid_function_from_csv(path: str, box_length: float | None = None) -> GridFunction:
    """Read a grid function written by :func:`grid_function_to_csv`.

    The box length is recovered from the uniform x-spacing unless given.
    """
    xs: list[float] = []
    vals: list[complex] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header[:3]] != ["x", "re", "im"]:
            raise ConfigurationError(f"unexpected CSV header {header!r}")
        for row in reader:
            xs.append(float(row[0]))
            vals.append(complex(float(row[1]), float(row[2])))
    if len(xs) < 8:
        raise ConfigurationError("too few rows for a grid function")
    dx = xs[1] - xs[0]
    if box_length is None:
        box_length = dx * len(xs)
    return GridFunction(np.array(vals), box_length)


def spacetime_field_to_csv(F: SpaceTimeField, path: str) -> None:
    """Write field samples as rows ``t, x, re, im`` (dimensionless units)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x", "re", "im"])
        xs = F.x
        for i, t in enumerate(F.t_grid):
            for j in range(F.n_x):
                v = F.values[i, j]
                writer.writerow(
                    [repr(float(t)), repr(float(xs[j])), repr(float(v.real)), repr(float(v.imag))]
                )
