"""Tests for the gKdV solver, its ledger, and the flow diagnostics."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dispersive_lab import (
    ConfigurationError,
    DegenerateDataError,
    GridFunction,
    HorizonError,
    InstabilityError,
    ParameterError,
    SolverConfig,
    airy_field,
    conserved_report,
    duhamel_residual,
    evolve,
    lebesgue_norm,
    lwp_params,
    scattering_profile,
    sds_threshold,
    solver_config_from_mapping,
    soliton_profile,
    soliton_residual,
    stability_experiment,
    stability_scaling,
    trajectory_field,
)

BOX = 64.0


def _gaussian(n_x: int, amplitude: float = 1.0) -> GridFunction:
    x = np.linspace(-BOX / 2, BOX / 2, n_x, endpoint=False)
    return GridFunction((amplitude * np.exp(-(x**2))).astype(complex), BOX)


# ---------------------------------------------------------------------------
# Soliton profile: the ODE residual oracle comes before anything else
# ---------------------------------------------------------------------------


def test_soliton_ode_residual_oracle():
    # the closed form is trusted only because Q'' - c Q + Q^{2a+1}
    # vanishes on the grid; this is the gate for every soliton test below
    for alpha, c in ((1.0, 1.0), (2.0, 1.0), (0.8, 2.0), (1.5, 1.0)):
        q = soliton_profile(alpha, c)
        assert soliton_residual(q, alpha, c) <= 1e-8


def test_soliton_closed_forms():
    q = soliton_profile(1.0, 1.0)
    x = q.x
    assert np.max(np.abs(q.samples.real - math.sqrt(2.0) / np.cosh(x))) < 1e-13
    q2 = soliton_profile(2.0, 1.0)
    expected = 3.0**0.25 / np.cosh(2.0 * x) ** 0.5
    assert np.max(np.abs(q2.samples.real - expected)) < 1e-13


def test_soliton_translation_covariance():
    base = soliton_profile(1.0, 1.0)
    shifted = soliton_profile(1.0, 1.0, x0=3.0)
    cells = round(3.0 / base.dx)
    assert cells * base.dx == 3.0
    assert np.max(np.abs(shifted.samples - np.roll(base.samples, cells))) < 1e-10


@settings(max_examples=10, deadline=None)
@given(
    alpha=st.floats(min_value=0.7, max_value=1.6),
    c=st.floats(min_value=0.8, max_value=1.5),
)
def test_soliton_residual_across_parameters(alpha, c):
    q = soliton_profile(alpha, c)
    assert soliton_residual(q, alpha, c) <= 1e-8
    peak = ((alpha + 1.0) * c) ** (1.0 / (2.0 * alpha))
    assert float(np.max(q.samples.real)) == pytest.approx(peak, rel=1e-12)


def test_soliton_validation():
    with pytest.raises(ParameterError):
        soliton_profile(1.0, 0.0)
    with pytest.raises(ParameterError):
        soliton_profile(1.0, -2.0)
    with pytest.raises(ParameterError):
        soliton_profile(0.0, 1.0)
    with pytest.raises(ParameterError):
        soliton_profile(1.0, 1.0, x0=math.inf)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def test_solver_config_validation():
    good = SolverConfig(alpha=1.0, mu=-1.0)
    assert good.dx == pytest.approx(BOX / 1024)
    with pytest.raises(ParameterError):
        SolverConfig(alpha=0.0, mu=-1.0)
    with pytest.raises(ParameterError):
        SolverConfig(alpha=2.4, mu=-1.0)
    with pytest.raises(ParameterError):
        SolverConfig(alpha=1.0, mu=math.nan)
    with pytest.raises(ParameterError):
        SolverConfig(alpha=1.0, mu=-1.0, n_x=100)
    with pytest.raises(ParameterError):
        SolverConfig(alpha=1.0, mu=-1.0, dt=0.0)
    with pytest.raises(ParameterError):
        SolverConfig(alpha=1.0, mu=-1.0, integrator="euler")
    with pytest.raises(ParameterError):
        SolverConfig(alpha=1.0, mu=-1.0, cfl_constant=0.0)


def test_step_guard():
    # dt above c * dx^3 is refused; raising c deliberately admits it
    with pytest.raises(ParameterError):
        SolverConfig(alpha=1.0, mu=-1.0, n_x=1024, dt=1e-3)
    SolverConfig(alpha=1.0, mu=-1.0, n_x=1024, dt=1e-3, cfl_constant=8.0)


def test_config_mapping_roundtrip():
    cfg, horizon, diags = solver_config_from_mapping(
        {
            "alpha": 1.0,
            "mu": -1.0,
            "L": 32.0,
            "n_x": 256,
            "dt": 1e-3,
            "T": 0.5,
            "integrator": "etd-rk4",
            "dealias": False,
            "diagnostics": ["conserved", "duhamel"],
        }
    )
    assert cfg.box_length == 32.0 and cfg.n_x == 256
    assert cfg.integrator == "etd-rk4" and not cfg.dealias
    assert horizon == 0.5
    assert diags == ["conserved", "duhamel"]


def test_config_mapping_rejects_bad_tables():
    base = {"alpha": 1.0, "mu": -1.0, "T": 0.5, "n_x": 256, "dt": 1e-3}
    with pytest.raises(ConfigurationError):
        solver_config_from_mapping({**base, "junk": 1})
    with pytest.raises(ConfigurationError):
        solver_config_from_mapping({"mu": -1.0, "T": 0.5})
    with pytest.raises(ConfigurationError):
        solver_config_from_mapping({**base, "diagnostics": ["parity"]})
    with pytest.raises(ConfigurationError):
        solver_config_from_mapping({**base, "diagnostics": "conserved"})
    with pytest.raises(ConfigurationError):
        solver_config_from_mapping({**base, "T": -1.0})


# ---------------------------------------------------------------------------
# Evolution basics
# ---------------------------------------------------------------------------


def test_zero_datum_stays_zero():
    z = GridFunction(np.zeros(256, dtype=complex), BOX)
    cfg = SolverConfig(alpha=1.0, mu=-1.0, n_x=256, dt=1e-3)
    traj = evolve(z, cfg, 0.05, store_every=10)
    assert max(float(np.max(np.abs(s.samples))) for s in traj.states) == 0.0


def test_linear_flow_matches_free_propagator():
    u0 = _gaussian(512)
    cfg = SolverConfig(alpha=1.0, mu=0.0, n_x=512, dt=5e-4)
    traj = evolve(u0, cfg, 0.05, store_every=25)
    free = airy_field(u0, traj.times)
    worst = max(
        float(np.max(np.abs(s.samples - free.values[i])))
        for i, s in enumerate(traj.states)
    )
    assert worst <= 1e-10


def test_soliton_translates_rigidly():
    u0 = soliton_profile(1.0, 1.0, x0=-8.0, n_x=512)
    cfg = SolverConfig(alpha=1.0, mu=-1.0, n_x=512, dt=2e-4)
    traj = evolve(u0, cfg, 1.0, store_every=500)
    target = soliton_profile(1.0, 1.0, x0=-7.0, n_x=512)
    err = lebesgue_norm(
        GridFunction(traj.states[-1].samples - target.samples, BOX), 2.0
    )
    assert err <= 1e-8


def test_integrators_agree_on_soliton():
    u0 = soliton_profile(1.0, 1.0, x0=-8.0, n_x=512)
    final = {}
    for method in ("if-rk4", "etd-rk4"):
        cfg = SolverConfig(alpha=1.0, mu=-1.0, n_x=512, dt=2e-4, integrator=method)
        final[method] = evolve(u0, cfg, 0.25, store_every=1250).states[-1].samples
    assert np.max(np.abs(final["if-rk4"] - final["etd-rk4"])) <= 1e-6


def test_fourth_order_self_convergence():
    u0 = soliton_profile(1.0, 1.0, x0=-8.0, n_x=512)
    ref_cfg = SolverConfig(alpha=1.0, mu=-1.0, n_x=512, dt=1.5625e-4)
    reference = evolve(u0, ref_cfg, 0.5, store_every=3200).states[-1].samples
    errors = []
    for dt in (5e-3, 2.5e-3):
        cfg = SolverConfig(alpha=1.0, mu=-1.0, n_x=512, dt=dt)
        last = evolve(u0, cfg, 0.5, store_every=round(0.5 / dt)).states[-1].samples
        errors.append(lebesgue_norm(GridFunction(last - reference, BOX), 2.0))
    assert errors[0] / errors[1] >= 8.0


def test_evolve_validation():
    u0 = _gaussian(256)
    cfg = SolverConfig(alpha=1.0, mu=-1.0, n_x=512, dt=1e-3)
    with pytest.raises(ParameterError):
        evolve(u0, cfg, 0.1)  # grid mismatch
    cfg = SolverConfig(alpha=1.0, mu=-1.0, n_x=256, dt=1e-3)
    with pytest.raises(ParameterError):
        evolve(u0, cfg, 0.0505)  # no integer step count
    with pytest.raises(ParameterError):
        evolve(u0, cfg, 0.05, store_every=7)  # stride does not divide 50
    with pytest.raises(ParameterError):
        evolve(u0, cfg, (0.2, 0.1))  # reversed span
    spun = GridFunction(u0.samples * np.exp(0.5j), BOX)
    with pytest.raises(ParameterError):
        evolve(spun, cfg, 0.05)  # complex data


def test_instability_detector():
    x = np.linspace(-BOX / 2, BOX / 2, 512, endpoint=False)
    big = GridFunction((40.0 * np.exp(-(x**2))).astype(complex), BOX)
    cfg = SolverConfig(alpha=2.0, mu=-1.0, n_x=512, dt=5e-3, cfl_constant=10.0)
    with pytest.raises(InstabilityError):
        evolve(big, cfg, 0.5, store_every=100)


def test_trajectory_bookkeeping():
    u0 = _gaussian(256)
    cfg = SolverConfig(alpha=1.0, mu=-1.0, n_x=256, dt=1e-3)
    traj = evolve(u0, cfg, 0.05, store_every=10)
    assert len(traj.states) == 6
    assert traj.times.shape == (6,)
    assert traj.times[0] == 0.0 and traj.times[-1] == pytest.approx(0.05)
    assert traj.ledger["time"].size == 51
    assert traj.initial is traj.states[0]
    assert traj.box_length == BOX
    assert all(s.is_real for s in traj.states)
    info = traj.describe()
    assert info["steps"] == 50 and info["steps_per_state"] == 10
    field = trajectory_field(traj)
    assert field.values.shape == (6, 256)


# ---------------------------------------------------------------------------
# Conservation ledger
# ---------------------------------------------------------------------------


def test_conserved_quantities_on_soliton_run():
    u0 = soliton_profile(1.0, 1.0, x0=-8.0, n_x=512)
    cfg = SolverConfig(alpha=1.0, mu=-1.0, n_x=512, dt=2e-4)
    rep = conserved_report(evolve(u0, cfg, 0.2, store_every=100))
    assert rep["mean"]["max_drift"] <= 1e-12
    assert rep["l2"]["relative_drift"] <= 1e-8
    assert rep["hamiltonian"]["relative_drift"] <= 1e-6
    # the focusing Hamiltonian of this soliton is exactly -2/3 in the
    # continuum; the grid value agrees to quadrature accuracy
    assert rep["hamiltonian"]["initial"] == pytest.approx(-2.0 / 3.0, abs=1e-10)


def test_conserved_quantities_linear_flow():
    cfg = SolverConfig(alpha=1.0, mu=0.0, n_x=512, dt=5e-4)
    rep = conserved_report(evolve(_gaussian(512), cfg, 0.1, store_every=100))
    for key in ("mean", "l2", "hamiltonian"):
        assert rep[key]["relative_drift"] <= 1e-10


# ---------------------------------------------------------------------------
# Integral form
# ---------------------------------------------------------------------------


def test_duhamel_vanishes_for_linear_flow():
    cfg = SolverConfig(alpha=1.0, mu=0.0, n_x=512, dt=5e-4)
    traj = evolve(_gaussian(512), cfg, 0.05, store_every=10)
    assert duhamel_residual(traj) <= 1e-10


def test_duhamel_residual_quadrature_order():
    u0 = soliton_profile(1.0, 1.0, x0=-8.0, n_x=512)
    cfg = SolverConfig(alpha=1.0, mu=-1.0, n_x=512, dt=2e-4)
    residuals = [
        duhamel_residual(evolve(u0, cfg, 0.2, store_every=stride))
        for stride in (20, 10, 5)
    ]
    for coarse, fine in zip(residuals, residuals[1:]):
        assert 3.4 <= coarse / fine <= 4.6


def test_duhamel_needs_two_states():
    u0 = _gaussian(256)
    cfg = SolverConfig(alpha=1.0, mu=-1.0, n_x=256, dt=1e-3)
    traj = evolve(u0, cfg, 0.05, store_every=50)
    assert len(traj.states) == 2
    duhamel_residual(traj)
    lone = evolve(u0, cfg, 0.05, store_every=50)
    object.__setattr__(lone, "states", lone.states[:1])
    with pytest.raises(ParameterError):
        duhamel_residual(lone)


# ---------------------------------------------------------------------------
# Scattering diagnostics
# ---------------------------------------------------------------------------


def test_scattering_linear_flow_is_already_scattered():
    cfg = SolverConfig(alpha=2.0, mu=0.0, n_x=1024, dt=1e-4)
    traj = evolve(_gaussian(1024, amplitude=1e-3), cfg, 0.09, store_every=100)
    prof = scattering_profile(traj)
    assert len(prof["probe_times"]) >= 4
    assert max(prof["increments"]) <= 1e-10
    assert prof["sds_ratio"] <= 2.0
    assert "horizon" in prof and "surrogate" in prof
    assert prof["exponents"]["gamma"] == 2.0


def test_scattering_small_data_bound():
    # the global-size statement at its benchmark exponents: power 2,
    # smoothing 0.04, inner lattice exponent 2; tiny Gaussian data
    cfg = SolverConfig(alpha=2.0, mu=-1.0, n_x=1024, dt=1e-4)
    traj = evolve(_gaussian(1024, amplitude=1e-3), cfg, 0.09, store_every=100)
    prof = scattering_profile(traj)
    assert prof["sds_ratio"] <= 2.0
    assert prof["constant"] == 2.0


def test_scattering_increments_decrease():
    cfg = SolverConfig(alpha=2.0, mu=-1.0, n_x=1024, dt=1e-4)
    traj = evolve(_gaussian(1024, amplitude=0.5), cfg, 0.09, store_every=100)
    prof = scattering_profile(traj)
    assert max(prof["increments"]) > 1e-6
    assert prof["increments_decreasing"]


def test_scattering_horizon_gate():
    cfg = SolverConfig(alpha=2.0, mu=-1.0, n_x=1024, dt=1e-4)
    traj = evolve(_gaussian(1024, amplitude=1e-3), cfg, 0.09, store_every=450)
    with pytest.raises(HorizonError):
        scattering_profile(traj)


def test_scattering_rejects_invalid_exponents():
    cfg = SolverConfig(alpha=2.0, mu=-1.0, n_x=1024, dt=1e-4)
    traj = evolve(_gaussian(1024, amplitude=1e-3), cfg, 0.09, store_every=100)
    bad = lwp_params(2, Fraction(1, 4), 2, Fraction(5, 2))
    assert not bad.valid
    with pytest.raises(ParameterError):
        scattering_profile(traj, bad)


def test_sds_threshold_bisection():
    u0 = _gaussian(512)
    cfg = SolverConfig(alpha=2.0, mu=-1.0, n_x=512, dt=4e-4)
    report = sds_threshold(
        u0, cfg, 0.088, bracket=(1e-3, 8.0), iterations=4, store_every=20
    )
    assert report["threshold"] is not None
    assert report["threshold"] > 1.0
    assert len(report["evaluations"]) >= 4
    passing = [r for _, r in report["evaluations"] if r <= 2.0]
    assert passing
    with pytest.raises(ParameterError):
        sds_threshold(u0, cfg, 0.088, bracket=(2.0, 1.0))


# ---------------------------------------------------------------------------
# Approximate-solution stability
# ---------------------------------------------------------------------------


def test_identical_runs_have_zero_difference():
    u0 = _gaussian(512, amplitude=0.5)
    cfg = SolverConfig(alpha=2.0, mu=-1.0, n_x=512, dt=4e-4)
    rep = stability_experiment(u0, None, None, cfg, 0.04, store_every=10)
    assert rep["difference"] <= 1e-10
    assert rep["nonlinearity_mismatch"] <= 1e-10


def test_perturbation_scaling_is_linear():
    u0 = _gaussian(512, amplitude=0.5)
    direction = _gaussian(512)
    cfg = SolverConfig(alpha=2.0, mu=-1.0, n_x=512, dt=4e-4)
    rep = stability_scaling(u0, direction, cfg, 0.04, store_every=10)
    assert rep["mode"] == "perturbation"
    for r in rep["linearity_ratios"]:
        assert 1.0 / 3.0 <= r <= 3.0
    assert 0.7 <= rep["slope"] <= 1.3


def test_forcing_scaling_is_linear():
    u0 = _gaussian(512, amplitude=0.5)
    direction = _gaussian(512)
    cfg = SolverConfig(alpha=2.0, mu=-1.0, n_x=512, dt=4e-4)
    rep = stability_scaling(u0, direction, cfg, 0.04, mode="forcing", store_every=10)
    for r in rep["linearity_ratios"]:
        assert 1.0 / 3.0 <= r <= 3.0


def test_stability_validation():
    u0 = _gaussian(256)
    cfg = SolverConfig(alpha=2.0, mu=-1.0, n_x=256, dt=1e-3)
    with pytest.raises(ParameterError):
        stability_scaling(u0, u0, cfg, 0.05, mode="adjoint")
    zero = GridFunction(np.zeros(256, dtype=complex), BOX)
    with pytest.raises(DegenerateDataError):
        stability_scaling(u0, zero, cfg, 0.05)
    with pytest.raises(ParameterError):
        stability_experiment(u0, _gaussian(512), None, cfg, 0.05)
