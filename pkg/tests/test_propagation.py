import warnings

import numpy as np
import pytest

from floquet_resonance import (DrivenModel, GaussianProfile, Harmonic, HarmonicPerturbation, PropagationConfig,
                               ReflectionWarning, averaged_survival, benchmark_model, benchmark_static, fit_decay,
                               propagate, scaling_study, step)
from floquet_resonance.errors import FitQualityWarning, PerturbativeRegimeWarning
from floquet_resonance.propagation import SurvivalSeries, s_max_for

T = np.pi


@pytest.fixture(scope="module")
def small():
    """Benchmark on a coarse, short box: cheap enough for many steps."""
    return benchmark_model(20.0, 201).with_alpha(0.3)


def random_state(rng, n):
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    return psi / np.linalg.norm(psi)


# single steps

def test_step_stationary_state(small):
    model = small.with_alpha(0.0)
    phi = model.static.phi0
    out = step(phi, 0.3, model, T / 16)
    ov = model.grid.inner(phi, out)
    assert abs(abs(ov) - 1.0) < 1e-12
    assert np.linalg.norm(out - ov * phi) * np.sqrt(model.grid.h) < 1e-12
    # the phase is the Cayley image of E0
    dt = T / 16
    assert np.angle(ov) == pytest.approx(-2.0 * np.arctan(0.5 * dt * model.static.E0), abs=1e-12)


def test_step_unitary(small, rng):
    psi = random_state(rng, small.grid.n_points)
    out = step(psi, 0.7, small, 0.05)
    assert abs(np.linalg.norm(out) - 1.0) < 1e-12


def test_step_rejects_nonpositive_dt(small):
    with pytest.raises(ValueError):
        step(small.static.phi0, 0.0, small, 0.0)


def test_step_second_order(small):
    """Global error at t = T against a dt/4 reference halves by ~4 per halving of dt."""
    psi0 = small.static.phi0.astype(complex)

    def run(spp):
        cfg = PropagationConfig(steps_per_period=spp, max_boundary_amplitude=np.inf)
        return propagate(psi0, 0.0, T, small, cfg).psi

    ref = run(1024)
    errs = [np.linalg.norm(run(spp) - ref) for spp in (32, 64, 128, 256)]
    slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(slopes - 2.0) < 0.1), slopes


# propagate

def test_propagate_identity(small, rng):
    psi = random_state(rng, small.grid.n_points)
    assert np.array_equal(propagate(psi, 1.0, 1.0, small).psi, psi)


def test_propagate_requires_integral_steps(small):
    with pytest.raises(ValueError):
        propagate(small.static.phi0, 0.0, 0.1, small)


def test_cocycle(small, rng):
    psi = random_state(rng, small.grid.n_points)
    cfg = PropagationConfig(max_boundary_amplitude=np.inf)
    dt = cfg.dt(T)
    t0, t1, t2 = 3 * dt, 11 * dt, 40 * dt
    direct = propagate(psi, t0, t2, small, cfg).psi
    composed = propagate(propagate(psi, t0, t1, small, cfg).psi, t1, t2, small, cfg).psi
    assert np.linalg.norm(direct - composed) < 1e-12


def test_floquet_periodicity(small, rng):
    psi = random_state(rng, small.grid.n_points)
    cfg = PropagationConfig(max_boundary_amplitude=np.inf)
    dt = cfg.dt(T)
    a = propagate(psi, 5 * dt, 29 * dt, small, cfg).psi
    b = propagate(psi, 5 * dt + T, 29 * dt + T, small, cfg).psi
    assert np.linalg.norm(a - b) <= 1e-12 * np.linalg.norm(a)


def test_norm_drift_long_run(small, rng):
    psi = random_state(rng, small.grid.n_points)
    out = propagate(psi, 0.0, 10_000 * T / 16, small, PropagationConfig(max_boundary_amplitude=np.inf)).psi
    assert abs(np.linalg.norm(out) - 1.0) < 1e-8


def test_reflection_warning_carries_time(small):
    psi = np.zeros(small.grid.n_points, complex)
    x = small.grid.x
    psi[:] = np.exp(-(x - 10.0) ** 2 + 3j * x)  # packet moving right at speed 6
    with pytest.warns(ReflectionWarning) as rec:
        res = propagate(psi, 0.0, 2 * T, small)
    hits = [w.message for w in rec if isinstance(w.message, ReflectionWarning)]
    assert res.reflection_time is not None and 0 < res.reflection_time <= 2 * T
    assert hits[0].time == res.reflection_time


# averaged survival

@pytest.fixture(scope="module")
def coarse_cfg():
    return PropagationConfig(h=0.2)


def test_stationary_survival(coarse_cfg):
    model = benchmark_model(30.0, 301)
    ser = averaged_survival(model, 0.0, 20 * T, config=coarse_cfg)
    assert abs(ser.amplitudes[0] - 1.0) <= 1e-12
    assert np.max(np.abs(np.abs(ser.amplitudes) - 1.0)) <= 1e-9
    fit = fit_decay(ser)
    assert abs(fit.Gamma_fit) <= 1e-8
    assert abs(fit.E_fit - ser.E0) <= 1e-6


def test_survival_normalization_and_bound(coarse_cfg):
    ser = averaged_survival(benchmark_model(30.0, 301), 0.4, 30 * T, config=coarse_cfg)
    assert abs(ser.amplitudes[0] - 1.0) <= 1e-12
    assert np.all(np.abs(ser.amplitudes) <= 1.0 + 1e-10)
    assert ser.s_values[1] - ser.s_values[0] == pytest.approx(T / 4)
    assert ser.valid_horizon == np.inf


def test_survival_decays_monotonically(coarse_cfg):
    ser = averaged_survival(benchmark_model(30.0, 301), 0.4, 60 * T, config=coarse_cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("error", FitQualityWarning)
        fit = fit_decay(ser)
    assert fit.Gamma_fit > 0
    # envelope over whole periods is strictly decreasing
    per = np.abs(ser.amplitudes[::4])
    assert np.all(np.diff(per) < 0)


def test_survival_preconditions(coarse_cfg):
    model = benchmark_model(30.0, 301)
    with pytest.raises(ValueError):
        averaged_survival(model, 0.1, 2.5 * T, config=coarse_cfg)
    with pytest.raises(ValueError):
        averaged_survival(model, 0.1, 2 * T, stride=3, config=coarse_cfg)


def test_time_reversal_pair(coarse_cfg):
    static = benchmark_static(30.0, 301)
    W = HarmonicPerturbation((Harmonic(1, GaussianProfile(0.3, 1.0), 1.0, "cos"),
                              Harmonic(1, GaussianProfile(-0.5, 0.7), 0.8, "sin")))
    model = DrivenModel(static, W, T)
    a = averaged_survival(model, 0.3, 10 * T, config=coarse_cfg).amplitudes
    b = averaged_survival(model.with_perturbation(W.time_reversed()), 0.3, 10 * T, config=coarse_cfg).amplitudes
    assert np.max(np.abs(np.abs(a) - np.abs(b))) <= 1e-12
    # the launch-time average makes the pair coincide, not just their moduli
    assert np.max(np.abs(a - b)) <= 1e-12


def test_survival_reports_valid_horizon():
    model = benchmark_model(30.0, 301)
    cfg = PropagationConfig(h=0.2, half_width=40.0)
    with pytest.warns(ReflectionWarning):
        ser = averaged_survival(model, 0.4, 20 * T, config=cfg)
    assert 0 < ser.valid_horizon < ser.s_max


def test_survival_dt_convergence():
    model = benchmark_model(30.0, 301)
    cfg = dict(h=0.2, half_width=400.0)
    runs = {spp: averaged_survival(model, 0.3, 8 * T, stride=spp // 4,
                                   config=PropagationConfig(steps_per_period=spp, n_t0=4, **cfg)).amplitudes
            for spp in (32, 64, 512)}
    e1 = np.max(np.abs(runs[32] - runs[512]))
    e2 = np.max(np.abs(runs[64] - runs[512]))
    assert e1 / e2 == pytest.approx(4.0 * (1 - 1 / 64) / (1 - 1 / 256), rel=0.2)


# fitting

def synthetic(E, G, s, background=0.0):
    return SurvivalSeries(s, np.exp(-(1j * E + 0.5 * G) * s) + background, alpha=0.0)


def test_fit_exact_model():
    ser = synthetic(0.5, 0.01, np.linspace(0.0, 200.0, 801))
    fit = fit_decay(ser)
    assert fit.E_fit == pytest.approx(0.5, abs=1e-10)
    assert fit.Gamma_fit == pytest.approx(0.01, abs=1e-10)
    assert fit.a_fit == pytest.approx(1.0, abs=1e-10)


def test_fit_with_background():
    s = np.linspace(0.0, 300.0, 1201)
    ser = synthetic(0.5, 0.01, s, background=1e-3)
    # decay term >= 10x background up to s = 2 ln(100) / 0.01 ~ 921
    fit = fit_decay(ser, (20.0, 250.0))
    assert fit.Gamma_fit == pytest.approx(0.01, rel=0.05)


def test_fit_preconditions():
    ser = synthetic(0.5, 0.01, np.linspace(0.0, 1000.0, 101))
    with pytest.raises(ValueError):
        fit_decay(ser, (0.0, 50.0))  # 6 samples
    with pytest.raises(ValueError):
        fit_decay(ser, (400.0, 900.0))  # |A| ~ 0.13 at s_lo


def test_fit_quality_warning():
    s = np.linspace(0.0, 100.0, 401)
    ser = SurvivalSeries(s, np.exp(-0.005 * s) * (1 + 0.2 * np.cos(0.3 * s)), alpha=0.0)
    with pytest.warns(FitQualityWarning):
        fit_decay(ser)


def test_fit_clips_to_valid_horizon():
    s = np.linspace(0.0, 200.0, 801)
    ser = SurvivalSeries(s, np.exp(-(0.5j + 0.005) * s), alpha=0.0, valid_horizon=80.0)
    with pytest.warns(ReflectionWarning):
        fit = fit_decay(ser)
    assert s[fit.window[1] - 1] <= 80.0


# scaling

def test_scaling_study_large_alphas():
    model = benchmark_model()
    rep = scaling_study(model, [0.3, 0.35, 0.4], config=PropagationConfig())
    assert rep.slope == pytest.approx(2.0, abs=0.1)
    assert np.exp(rep.intercept) == pytest.approx(2.0 * rep.im_F, rel=0.15)
    assert all(0.85 <= r <= 1.15 for r in rep.ratios)
    for ser in rep.series:
        assert ser.fit.Gamma_fit * ser.s_max == pytest.approx(1.2, abs=0.2)


def test_scaling_study_shift():
    model = benchmark_model(static_shift=0.3)
    rep = scaling_study(model, [-0.2, -0.1, 0.1, 0.2], s_max=20 * T)
    assert rep.c1 != 0
    assert rep.shift_coefficient == pytest.approx(rep.c1, rel=0.1)


def test_scaling_study_preconditions():
    model = benchmark_model()
    with pytest.raises(ValueError):
        scaling_study(model, [0.1, 0.2])
    with pytest.raises(PerturbativeRegimeWarning):
        scaling_study(model, [0.1, 0.2, 0.6], gamma_ref=0.04)


def test_s_max_for():
    model = benchmark_model()
    sm = s_max_for(model, 0.2, 0.04, 1.2)
    assert sm / T == pytest.approx(round(sm / T))
    assert 0.04 * 0.04 * sm >= 1.2 > 0.04 * 0.04 * (sm - T)
