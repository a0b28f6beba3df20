"""Structured test-function families for the ratio engine.

Every member is numerically supported inside its periodic box, so the
box surrogate faithfully represents the line; construction fails loudly
when a parameter choice would put visible mass at the box edge.  The
random draws are made before any grid is touched, so regenerating a
family at doubled resolution samples the same analytic functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ConfigurationError, ParameterError, ResolutionError
from .spectral import FrequencyFunction, GridFunction, inverse_transform

FAMILY_KINDS = (
    "gaussian",
    "modulated_gaussian",
    "lacunary_sum",
    "rescaled_bump",
    "random_band_limited",
)

#: Largest relative magnitude allowed in the outer sixteenth of the box.
SUPPORT_TAIL_TOL = 1e-10


def box_support_tail(f: GridFunction) -> float:
    """Relative sample magnitude in the outer sixteenth of the box."""
    mags = np.abs(f.samples)
    top = float(mags.max())
    if top == 0.0:
        return 0.0
    edge = max(f.n_x // 16, 1)
    return float(max(mags[:edge].max(), mags[-edge:].max()) / top)


@dataclass(frozen=True)
class TestFamily:
    """A reproducible collection of test data of one structural kind.

    ``parameters`` tunes the kind (``levels`` for the lacunary sum,
    ``band`` for the random trigonometric data); unknown keys are
    rejected so config typos cannot silently change a run.
    """

    kind: str
    size: int
    seed: int = 0
    box_length: float = 64.0
    n_x: int = 1024
    parameters: Mapping[str, float] = field(default_factory=dict)

    # not a pytest suite despite the name
    __test__ = False

    _KNOWN_PARAMS = {
        "gaussian": set(),
        "modulated_gaussian": set(),
        "lacunary_sum": {"levels"},
        "rescaled_bump": set(),
        "random_band_limited": {"band"},
    }

    def __post_init__(self) -> None:
        if self.kind not in FAMILY_KINDS:
            raise ParameterError(f"unknown family kind {self.kind!r}")
        if self.size < 1:
            raise ParameterError("family size must be at least 1")
        if not (self.box_length > 0 and math.isfinite(self.box_length)):
            raise ParameterError("box length must be positive and finite")
        if self.n_x < 16:
            raise ParameterError("family grids need at least 16 samples")
        unknown = set(self.parameters) - self._KNOWN_PARAMS[self.kind]
        if unknown:
            raise ParameterError(
                f"parameters {sorted(unknown)} not understood by {self.kind!r}"
            )

    def refined(self, factor: int = 2) -> "TestFamily":
        """The same analytic family sampled on a ``factor``-finer grid."""
        if factor < 1:
            raise ParameterError("refinement factor must be at least 1")
        return TestFamily(
            kind=self.kind,
            size=self.size,
            seed=self.seed,
            box_length=self.box_length,
            n_x=self.n_x * factor,
            parameters=dict(self.parameters),
        )

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "size": self.size,
            "seed": self.seed,
            "box_length": self.box_length,
            "n_x": self.n_x,
            "parameters": dict(self.parameters),
        }

    # -- construction ------------------------------------------------

    def members(self) -> list[GridFunction]:
        rng = np.random.default_rng(self.seed)
        build = getattr(self, f"_make_{self.kind}")
        out = []
        for _ in range(self.size):
            f = build(rng)
            tail = box_support_tail(f)
            if tail > SUPPORT_TAIL_TOL:
                raise ConfigurationError(
                    f"{self.kind} member has box-edge tail {tail:.3g}; "
                    f"enlarge the box"
                )
            out.append(f)
        return out

    @property
    def _x(self) -> np.ndarray:
        dx = self.box_length / self.n_x
        return -self.box_length / 2 + dx * np.arange(self.n_x)

    @property
    def _nyquist(self) -> float:
        return math.pi * self.n_x / self.box_length

    def _make_gaussian(self, rng: np.random.Generator) -> GridFunction:
        width = rng.uniform(0.7, 2.0)
        center = rng.uniform(-self.box_length / 10, self.box_length / 10)
        amp = rng.uniform(0.5, 2.0)
        samples = amp * np.exp(-(((self._x - center) / width) ** 2))
        return GridFunction(samples, self.box_length, is_real=True)

    def _make_modulated_gaussian(self, rng: np.random.Generator) -> GridFunction:
        width = rng.uniform(0.7, 2.0)
        center = rng.uniform(-self.box_length / 10, self.box_length / 10)
        xi0 = rng.uniform(-6.0, 6.0)
        x = self._x
        samples = np.exp(-(((x - center) / width) ** 2)) * np.exp(1j * xi0 * x)
        return GridFunction(samples, self.box_length)

    def _make_lacunary_sum(self, rng: np.random.Generator) -> GridFunction:
        # default fits the default 1024-point grid; deeper sums need n_x
        # raised so the top tone stays under the resolution guard
        levels = int(self.parameters.get("levels", 5))
        if levels < 1:
            raise ParameterError("lacunary sum needs at least one level")
        top = 2.0**levels
        if top >= 0.8 * self._nyquist:
            raise ResolutionError(
                f"lacunary top frequency {top:g} too close to the grid limit "
                f"{self._nyquist:g}; raise n_x"
            )
        x = self._x
        envelope = np.exp(-(x**2))
        samples = np.zeros(self.n_x, dtype=np.complex128)
        for level in range(levels + 1):
            amp = rng.uniform(0.5, 1.5) * np.exp(1j * rng.uniform(0, 2 * math.pi))
            samples += amp * np.exp(1j * (2.0**level) * x)
        return GridFunction(samples * envelope, self.box_length)

    def _make_rescaled_bump(self, rng: np.random.Generator) -> GridFunction:
        # dilation h with square-root amplitude weight keeps the mass
        # of every member comparable across four octaves of scale
        h = 2.0 ** rng.uniform(-2.0, 2.0)
        samples = math.sqrt(h) * np.exp(-((h * self._x) ** 2))
        return GridFunction(samples, self.box_length, is_real=True)

    def _make_random_band_limited(self, rng: np.random.Generator) -> GridFunction:
        band = int(self.parameters.get("band", 20))
        if band < 1:
            raise ParameterError("random band must be at least 1 mode wide")
        dxi = 2 * math.pi / self.box_length
        if band * dxi >= 0.8 * self._nyquist:
            raise ResolutionError("random band exceeds the grid limit; raise n_x")
        coeffs = np.zeros(self.n_x, dtype=np.complex128)
        half = self.n_x // 2
        idx = np.arange(half - band, half + band + 1)
        coeffs[idx] = rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)
        wave = inverse_transform(FrequencyFunction(coeffs, self.box_length))
        # a trigonometric sum has no decay of its own; the envelope makes
        # the member box-supported while barely smearing the spectrum
        envelope = np.exp(-((self._x / (self.box_length / 12.0)) ** 2))
        return GridFunction(wave.samples * envelope, self.box_length)
