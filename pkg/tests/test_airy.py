"""Tests for the Airy propagator and the band cutoff multiplier."""

import csv
import math
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dispersive_lab.airy import (
    CutoffSpec,
    MultiplierBoundSpec,
    RawBand,
    airy_field,
    airy_flow,
    apply_band_multiplier,
    cutoff_to_csv,
    evaluate_cutoff,
    make_cutoff,
    mollifier,
    multiplier_bound_ratio,
    wraparound_horizon,
)
from dispersive_lab.dyadic import BilinearRegion, EnlargedRegion
from dispersive_lab.errors import (
    DegenerateDataError,
    HorizonWarning,
    ParameterError,
    ResolutionError,
)
from dispersive_lab.spectral import (
    FrequencyFunction,
    GridFunction,
    SpaceTimeField,
    inverse_transform,
    lebesgue_norm,
    transform,
)


def gaussian(box_length: float = 64.0, n_x: int = 1024) -> GridFunction:
    dx = box_length / n_x
    x = -box_length / 2 + dx * np.arange(n_x)
    return GridFunction(np.exp(-(x**2)), box_length, is_real=True)


def random_band_limited(
    rng: np.random.Generator, box_length: float = 32.0, n_x: int = 256, band: int = 20
) -> GridFunction:
    coeffs = np.zeros(n_x, dtype=np.complex128)
    half = n_x // 2
    idx = np.arange(half - band, half + band + 1)
    coeffs[idx] = rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)
    return inverse_transform(FrequencyFunction(coeffs, box_length))


def single_mode(k: int, box_length: float = 32.0, n_x: int = 256) -> GridFunction:
    dx = box_length / n_x
    x = -box_length / 2 + dx * np.arange(n_x)
    xi0 = k * 2 * math.pi / box_length
    return GridFunction(np.exp(1j * xi0 * x), box_length)


def two_tone_squared_field(j: int, n_t: int = 1024, n_x: int = 256) -> SpaceTimeField:
    """The square of a two-frequency wave: spectrum on the (j, 1, 3) band.

    The tones sit at 1.5 and 3.5 times ``2^-j`` so the cross term lands
    at sum frequency 5 with separation 2, inside the first upper band at
    scale ``j``; the grids rescale with the dyadic scaling so that every
    scale sees the same relative resolution.
    """
    L = 32.0 * 2.0**j
    T = 26.0 * 2.0 ** (3 * j)
    t = np.linspace(0.0, T, n_t, endpoint=False)
    x = -L / 2 + (L / n_x) * np.arange(n_x)
    detune = 1.0 + 0.07 * math.sin(1.3 * j + 0.5)
    a = 3.0 * 2.0**j * detune
    lo, hi = 1.5 * 2.0**-j, 3.5 * 2.0**-j
    f = np.exp(-((x / a) ** 2)) * (np.exp(1j * lo * x) + np.exp(1j * hi * x))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HorizonWarning)
        u = airy_field(GridFunction(f, L), t)
    return SpaceTimeField(u.values**2, t, L)


def delta_spectrum_field(
    m: int, k: int, n_t: int = 256, n_x: int = 128, dt: float = 0.05, L: float = 32.0
) -> SpaceTimeField:
    """A field whose space-time spectrum is a single shifted-index delta."""
    S = np.zeros((n_t, n_x), dtype=complex)
    S[m + n_t // 2, k + n_x // 2] = 1.0
    rows = np.fft.ifft2(np.fft.ifftshift(S))
    return SpaceTimeField(rows, np.arange(n_t) * dt, L)


# ---------------------------------------------------------------------------
# Propagator
# ---------------------------------------------------------------------------


def test_zero_time_is_identity() -> None:
    f = gaussian()
    out = airy_flow(f, 0.0)
    assert np.array_equal(out.samples, f.samples)
    assert out.is_real
    assert out.box_length == f.box_length


def test_flow_requires_finite_time() -> None:
    f = gaussian()
    with pytest.raises(ParameterError):
        airy_flow(f, math.inf)
    with pytest.raises(ParameterError):
        airy_flow(f, math.nan)


def test_single_mode_picks_up_cubic_phase() -> None:
    f = single_mode(4)
    xi0 = 4 * 2 * math.pi / 32.0
    t = 0.7
    out = airy_flow(f, t)
    expected = np.exp(1j * t * xi0**3) * f.samples
    assert_allclose(out.samples, expected, atol=1e-12)


def test_flow_matches_line_quadrature_for_gaussian() -> None:
    # wide gaussian so the evolved tail stays inside the box: the hat of
    # exp(-(x/2)^2) is sqrt(2) exp(-xi^2), and the line evolution is the
    # oscillatory integral (2 pi)^{-1/2} int hat(xi) e^{i(x xi + t xi^3)} dxi
    box_length, n_x, t = 256.0, 4096, 1.0
    dx = box_length / n_x
    x = -box_length / 2 + dx * np.arange(n_x)
    f = GridFunction(np.exp(-((x / 2.0) ** 2)), box_length, is_real=True)
    out = airy_flow(f, t)

    xi_line = np.arange(-800, 801) * 0.01
    weights = np.full(xi_line.size, 0.01)
    weights[0] = weights[-1] = 0.005
    hat = math.sqrt(2.0) * np.exp(-(xi_line**2))
    x_sub = x[::8]
    phases = np.exp(1j * (np.outer(x_sub, xi_line) + t * xi_line**3))
    expected = phases @ (hat * weights) / math.sqrt(2 * math.pi)
    assert np.max(np.abs(out.samples[::8] - expected)) <= 1e-8


def test_flow_is_unitary_and_preserves_hat_modulus() -> None:
    rng = np.random.default_rng(7)
    times = [-3.7, -1.0, 0.25, 2.0, 8.5]
    for _ in range(20):
        f = random_band_limited(rng)
        base_norm = lebesgue_norm(f, 2)
        base_hat = np.abs(transform(f).coefficients)
        for t in times:
            out = airy_flow(f, t)
            assert abs(lebesgue_norm(out, 2) - base_norm) <= 1e-12 * base_norm
            hat = np.abs(transform(out).coefficients)
            assert np.max(np.abs(hat - base_hat)) <= 1e-12 * base_hat.max()


def test_flow_group_law() -> None:
    rng = np.random.default_rng(11)
    for s, t in [(0.3, 0.9), (-1.2, 2.7), (4.0, -4.0)]:
        f = random_band_limited(rng)
        two_step = airy_flow(airy_flow(f, s), t)
        one_step = airy_flow(f, s + t)
        scale = np.max(np.abs(one_step.samples))
        assert np.max(np.abs(two_step.samples - one_step.samples)) <= 1e-12 * scale


def test_flow_commutes_with_grid_shifts() -> None:
    rng = np.random.default_rng(3)
    f = random_band_limited(rng)
    shifted = GridFunction(np.roll(f.samples, 17), f.box_length)
    a = airy_flow(shifted, 1.3).samples
    b = np.roll(airy_flow(f, 1.3).samples, 17)
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))


def test_reality_flag_tracks_data() -> None:
    real_out = airy_flow(gaussian(), 2.0)
    assert real_out.is_real
    f = gaussian()
    complex_in = GridFunction(f.samples * np.exp(1j * f.x), f.box_length)
    assert not airy_flow(complex_in, 2.0).is_real


# ---------------------------------------------------------------------------
# Horizon
# ---------------------------------------------------------------------------


def test_horizon_of_single_mode() -> None:
    f = single_mode(2)
    xi0 = 2 * 2 * math.pi / 32.0
    assert_allclose(wraparound_horizon(f), 32.0 / (3 * xi0**2), rtol=1e-12)


def test_horizon_of_featureless_data_is_infinite() -> None:
    const = GridFunction(np.ones(64), 16.0, is_real=True)
    assert wraparound_horizon(const) == math.inf
    zero = GridFunction(np.zeros(64), 16.0, is_real=True)
    assert wraparound_horizon(zero) == math.inf


def test_field_warns_beyond_horizon_and_is_silent_within() -> None:
    f = single_mode(2)
    horizon = wraparound_horizon(f)
    with pytest.warns(HorizonWarning):
        airy_field(f, np.linspace(0.0, 1.5 * horizon, 8))
    with warnings.catch_warnings():
        warnings.simplefilter("error", HorizonWarning)
        airy_field(f, np.linspace(0.0, 0.5 * horizon, 8))


def test_field_rows_match_single_flows() -> None:
    rng = np.random.default_rng(19)
    f = random_band_limited(rng)
    times = np.array([-1.1, 0.1, 1.3, 2.5])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HorizonWarning)
        field = airy_field(f, times)
    assert field.n_t == 4
    for i, t in enumerate(times):
        row = airy_flow(f, float(t)).samples
        scale = np.max(np.abs(row))
        assert np.max(np.abs(field.values[i] - row)) <= 1e-13 * scale


def test_field_rejects_bad_time_grids() -> None:
    f = gaussian()
    with pytest.raises(ParameterError):
        airy_field(f, np.zeros((2, 2)))
    with pytest.raises(ParameterError):
        airy_field(f, np.array([]))


# ---------------------------------------------------------------------------
# Cutoff kernel and sandwich
# ---------------------------------------------------------------------------


def test_mollifier_shape() -> None:
    x = np.linspace(-2, 2, 401)
    vals = mollifier(x)
    assert np.all(vals >= 0)
    assert np.all(vals[np.abs(x) >= 1] == 0)
    # unit integral on a fine grid
    fine = np.linspace(-1, 1, 200001)
    assert abs(np.trapezoid(mollifier(fine), fine) - 1.0) < 1e-10


def test_cutoff_requires_resolving_grid() -> None:
    spec = CutoffSpec(RawBand(1.0, 2.0, 0.5, 1.5), lam=0.3)
    coarse = np.arange(-1.0, 12.0, 0.1)
    with pytest.raises(ResolutionError):
        evaluate_cutoff(spec, coarse, np.array([1.5]))


def test_cutoff_rejects_nonuniform_tau() -> None:
    spec = CutoffSpec(RawBand(1.0, 2.0, 0.5, 1.5), lam=0.3)
    with pytest.raises(ParameterError):
        evaluate_cutoff(spec, np.array([0.0, 0.02, 0.05]), np.array([1.5]))
    with pytest.raises(ParameterError):
        evaluate_cutoff(spec, np.array([0.0]), np.array([1.5]))


def test_sandwich_is_exact_at_every_sample() -> None:
    # at xi = 1.5 the offset window is [0.75, 2.25] and xi^3/4 = 0.84375,
    # so the core band in tau is [1.59375, 3.09375]
    spec = CutoffSpec(RawBand(1.0, 2.0, 0.5, 1.5), lam=0.3)
    tau = np.arange(-1.0, 12.0, 0.02)
    xi = np.array([0.5, 1.0, 1.5, 2.0, 2.5])
    psi = evaluate_cutoff(spec, tau, xi)

    assert np.all(psi >= 0.0) and np.all(psi <= 1.0)
    assert np.all(psi[:, [0, 4]] == 0.0)

    col = psi[:, 2]
    core = (tau >= 1.59375) & (tau <= 3.09375)
    outside = (tau < 1.59375 - 0.3) | (tau > 3.09375 + 0.3)
    assert core.sum() == 75 and outside.sum() == 545
    assert np.all(col[core] == 1.0)
    assert np.all(col[outside] == 0.0)

    left = (tau >= 1.59375 - 0.3) & (tau <= 1.59375)
    right = (tau >= 3.09375) & (tau <= 3.09375 + 0.3)
    assert np.all(np.diff(col[left]) >= 0)
    assert np.all(np.diff(col[right]) <= 0)


def test_transition_frozen_values() -> None:
    spec = CutoffSpec(RawBand(1.0, 2.0, 0.5, 1.5), lam=0.3)
    tau = np.arange(-1.0, 12.0, 0.02)
    psi = evaluate_cutoff(spec, tau, np.array([1.5]))[:, 0]
    assert_allclose(psi[123], 0.5552312711122367, atol=1e-12)
    assert_allclose(psi[128], 0.9812021313644015, atol=1e-12)
    assert_allclose(psi[210], 0.7660341436637343, atol=1e-12)


def test_cutoff_matches_direct_convolution() -> None:
    # independent path: normalize the bump naively and let np.convolve
    # do the shifting; agreement pins the alignment of the custom loop
    lam, dtau = 0.3, 0.02
    spec = CutoffSpec(RawBand(1.0, 2.0, 0.5, 1.5), lam=lam)
    tau = np.arange(-1.0, 12.0, dtau)
    psi = evaluate_cutoff(spec, tau, np.array([1.5]))[:, 0]

    radius = int(math.floor((lam / 2) / dtau))
    offsets = np.arange(-radius, radius + 1) * dtau
    kernel = mollifier(2 * offsets / lam)
    kernel /= kernel.sum()
    lo = 0.5 * 1.5 + 1.5**3 / 4 - lam / 2
    hi = 1.5 * 1.5 + 1.5**3 / 4 + lam / 2
    ind = ((tau >= lo) & (tau <= hi)).astype(float)
    oracle = np.convolve(ind, kernel, mode="same")
    assert np.max(np.abs(psi - oracle)) <= 1e-12


def test_band_with_negative_frequencies() -> None:
    band = RawBand(-2.0, -1.0, 0.5, 1.5)
    # at xi = -1.5 the slope window flips: offsets in [-2.25, -0.75]
    assert band.offset_window(-1.5) == (-2.25, -0.75)
    center = (-1.5) ** 3 / 4.0 - 1.5
    assert band.contains(center, -1.5)
    assert not band.contains(center + 5.0, -1.5)
    assert not band.contains(center, -3.0)

    spec = CutoffSpec(band, lam=0.3)
    tau = np.arange(-6.0, 3.0, 0.02)
    psi = evaluate_cutoff(spec, tau, np.array([-1.5]))[:, 0]
    core = (tau >= center - 0.75 + 0.0) & (tau <= center + 0.75)
    assert np.all(psi[core] == 1.0)


def test_rawband_validation() -> None:
    with pytest.raises(ParameterError):
        RawBand(2.0, 1.0, 0.5, 1.5)
    with pytest.raises(ParameterError):
        RawBand(1.0, 2.0, 1.5, 0.5)
    with pytest.raises(ParameterError):
        RawBand(1.0, math.inf, 0.5, 1.5)


def test_rawband_from_region() -> None:
    band = RawBand.from_region(BilinearRegion("A", 1, 2, 4))
    assert_allclose((band.xi_lo, band.xi_hi), (3.0, 4.0))
    assert_allclose((band.slope_lo, band.slope_hi), (0.1875, 1.6875))


def test_make_cutoff_variants() -> None:
    region = BilinearRegion("A", 0, 1, 3)
    enlarged = EnlargedRegion(region, 0.25)

    auto = make_cutoff(enlarged)
    assert auto.lam == 0.25 and auto.scale_j == 0
    assert (auto.band.xi_lo, auto.band.xi_hi) == (4.0, 6.0)

    override = make_cutoff(enlarged, lam=0.5)
    assert override.lam == 0.5

    bare = make_cutoff(region, lam=0.4)
    assert bare.scale_j == 0
    with pytest.raises(ParameterError):
        make_cutoff(region)

    band = RawBand(1.0, 2.0, 0.5, 1.5)
    raw = make_cutoff(band, lam=0.4)
    assert raw.scale_j is None
    with pytest.raises(ParameterError):
        make_cutoff(band)

    with pytest.raises(ParameterError):
        make_cutoff("not a region", lam=0.4)
    with pytest.raises(ParameterError):
        CutoffSpec(band, lam=0.0)


def test_cutoff_csv_roundtrip(tmp_path) -> None:
    spec = CutoffSpec(RawBand(1.0, 2.0, 0.5, 1.5), lam=0.3)
    tau = np.arange(1.0, 4.0, 0.02)
    xi = np.array([1.5])
    path = tmp_path / "cutoff.csv"
    cutoff_to_csv(spec, tau, xi, str(path))

    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["tau", "xi", "psi"]
    assert len(rows) == 1 + tau.size
    psi = evaluate_cutoff(spec, tau, xi)[:, 0]
    picked = rows[1 + 60]
    assert float(picked[0]) == tau[60]
    assert float(picked[1]) == 1.5
    assert float(picked[2]) == psi[60]


# ---------------------------------------------------------------------------
# Band multiplier
# ---------------------------------------------------------------------------


def test_multiplier_preserves_core_spectrum() -> None:
    # tau at index m=5 is 2.45, inside the core window [1.75, 3.33] of
    # the band at xi = 8 grid frequencies = 1.5708
    spec = CutoffSpec(RawBand(1.0, 2.0, 0.5, 1.5), lam=2.5)
    F = delta_spectrum_field(5, 8)
    G = apply_band_multiplier(F, spec)
    scale = np.max(np.abs(F.values))
    assert np.max(np.abs(G.values - F.values)) <= 1e-13 * scale
    assert np.array_equal(G.t_grid, F.t_grid)
    assert G.box_length == F.box_length


def test_multiplier_kills_dead_zone_spectrum() -> None:
    spec = CutoffSpec(RawBand(1.0, 2.0, 0.5, 1.5), lam=2.5)
    F = delta_spectrum_field(40, 8)
    G = apply_band_multiplier(F, spec)
    assert np.max(np.abs(G.values)) <= 1e-13 * np.max(np.abs(F.values))


def test_multiplier_needs_two_time_samples() -> None:
    spec = CutoffSpec(RawBand(1.0, 2.0, 0.5, 1.5), lam=2.5)
    F = SpaceTimeField(np.ones((1, 64), dtype=complex), np.array([0.0]), 32.0)
    with pytest.raises(ParameterError):
        apply_band_multiplier(F, spec)


def test_squared_wave_lands_on_matched_band() -> None:
    # product of tones at 1.5 and 3.5 puts the cross term at frequency 5
    # with tau offset 3 xi, inside the (0, 1, 3) band; a band four units
    # away in frequency sees nothing at all
    F = two_tone_squared_field(0)
    total = np.linalg.norm(F.values)

    matched = make_cutoff(EnlargedRegion(BilinearRegion("A", 0, 1, 3), 1.0))
    fraction = np.linalg.norm(apply_band_multiplier(F, matched).values) / total
    assert 0.6 < fraction < 0.8

    far = make_cutoff(EnlargedRegion(BilinearRegion("A", 0, 5, 7), 1.0))
    leak = np.linalg.norm(apply_band_multiplier(F, far).values) / total
    assert leak <= 1e-12


def test_bound_ratio_is_stable_across_scales() -> None:
    # the same relative datum and grid at every dyadic scale must give
    # nearly the same normalized ratio; drift would mean a bookkeeping
    # error in one of the 2^j factors
    windows = {"space-loss": (0.4, 0.6), "time-loss": (0.45, 0.65)}
    for variant, (lo, hi) in windows.items():
        bound = MultiplierBoundSpec(p=4.0, q=2.0, sigma=0.1, variant=variant)
        ratios = []
        for j in range(-2, 5):
            cut = make_cutoff(
                EnlargedRegion(BilinearRegion("A", j, 1, 3), 2.0 ** (-3 * j))
            )
            ratios.append(
                multiplier_bound_ratio(two_tone_squared_field(j), cut, bound)
            )
        assert all(lo < r < hi for r in ratios), (variant, ratios)
        assert max(ratios) / min(ratios) < 1.1


def test_bound_ratio_rejects_degenerate_input() -> None:
    cut = make_cutoff(EnlargedRegion(BilinearRegion("A", 0, 1, 3), 1.0))
    bound = MultiplierBoundSpec(p=4.0, q=2.0, sigma=0.1)
    zero = SpaceTimeField(
        np.zeros((64, 64), dtype=complex), np.arange(64) * 0.1, 32.0
    )
    with pytest.raises(DegenerateDataError):
        multiplier_bound_ratio(zero, cut, bound)

    unindexed = make_cutoff(RawBand(4.0, 6.0, 0.75, 6.75), lam=1.0)
    F = two_tone_squared_field(0)
    with pytest.raises(ParameterError):
        multiplier_bound_ratio(F, unindexed, bound)


def test_bound_spec_validation() -> None:
    with pytest.raises(ParameterError):
        MultiplierBoundSpec(p=4.0, q=2.0, sigma=0.0)
    with pytest.raises(ParameterError):
        MultiplierBoundSpec(p=4.0, q=2.0, sigma=1.0)
    with pytest.raises(ParameterError):
        MultiplierBoundSpec(p=1.0, q=2.0, sigma=0.1)
    with pytest.raises(ParameterError):
        MultiplierBoundSpec(p=4.0, q=0.5, sigma=0.1)
    with pytest.raises(ParameterError):
        MultiplierBoundSpec(p=4.0, q=2.0, sigma=0.1, variant="sideways")

    spec = MultiplierBoundSpec(p=4.0, q=2.0, sigma=0.1)
    assert_allclose(spec.lossy_exponent, 20.0 / 7.0, rtol=1e-12)
    assert spec.lhs_norm().order == "space-outer"
    assert spec.rhs_norm().p == spec.lossy_exponent

    timewise = MultiplierBoundSpec(p=4.0, q=2.0, sigma=0.1, variant="time-loss")
    assert timewise.lhs_norm().order == "time-outer"
    assert_allclose(timewise.rhs_norm().q, 1.0 / (0.5 + 0.1), rtol=1e-12)
