"""Direct propagation of the driven equation and the period-averaged survival amplitude.

The averaged amplitude

    A(s) = T^{-1} int_0^T <phi0, U(t + s, t) phi0> dt

is evaluated by launching one trajectory per quadrature node ``t_j`` in
``[0, T)``.  All trajectories see the same Hamiltonian at a given absolute
time, so they are advanced together as columns of one array; trajectory
``j`` simply starts later.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import _cayley
from .errors import FitQualityWarning, PerturbativeRegimeWarning, ReflectionWarning
from .floquet import first_order_shift, gamma_limiting
from .grid import SpatialGrid
from .models import DrivenModel
from .spectral import bound_states


@dataclass(frozen=True)
class PropagationConfig:
    """Time stepping and box settings.

    ``dt = T / steps_per_period`` exactly.  ``h`` and ``half_width`` define the
    propagation box; ``h = None`` keeps the model spacing and ``half_width =
    None`` sizes the box so that outgoing flux does not reach the walls before
    the last sample.
    """

    steps_per_period: int = 16
    n_t0: int | None = None
    stride: int | None = None
    h: float | None = 0.2
    half_width: float | None = None
    boundary_monitor_width: int = 20
    max_boundary_amplitude: float = 1e-6
    box_margin: float = 20.0

    def dt(self, period: float) -> float:
        return period / self.steps_per_period

    @property
    def launches(self) -> int:
        return self.n_t0 or max(1, self.steps_per_period // 4)

    @property
    def spacing(self) -> int:
        """Steps between consecutive launch times."""
        return self.steps_per_period // self.launches

    @property
    def sample_stride(self) -> int:
        return self.stride or self.spacing

    def validate(self):
        spp = self.steps_per_period
        if spp < 1 or self.steps_per_period % self.launches:
            raise ValueError(f"n_t0 = {self.launches} must divide steps_per_period = {spp}")
        if self.spacing % self.sample_stride:
            raise ValueError(f"stride {self.sample_stride} must divide the launch spacing {self.spacing}")

    def accuracy_hint(self, period: float, h: float) -> bool:
        """``dt < 0.5 h^2``; accuracy heuristic only, the scheme is unconditionally stable."""
        return self.dt(period) < 0.5 * h * h


# ---------------------------------------------------------------------------
# single steps

def _diagonal(model: DrivenModel, t: float, x=None) -> np.ndarray:
    H = model.static.hamiltonian
    if model.alpha == 0.0:
        return H.diagonal
    return H.diagonal + model.alpha * model.W(t, x)


def step(psi, t: float, model: DrivenModel, dt: float):
    """One Crank-Nicolson step from ``t`` to ``t + dt`` with the potential at ``t + dt/2``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    H = model.static.hamiltonian
    d = _diagonal(model, t + 0.5 * dt)
    a = 0.5 * dt
    cp, inv = _cayley.factor(d, H.off_diagonal, a)
    psi = np.asarray(psi, dtype=complex)
    col = psi.reshape(psi.shape[0], -1)
    out = _cayley.apply(np.ascontiguousarray(col), d, H.off_diagonal, a, cp, inv)
    return out.reshape(psi.shape)


def boundary_amplitude(psi, width: int) -> float:
    psi = np.asarray(psi)
    return float(max(np.abs(psi[:width]).max(), np.abs(psi[-width:]).max()))


@dataclass(frozen=True)
class PropagationResult:
    psi: np.ndarray = field(repr=False)
    t_end: float
    reflection_time: float | None


def propagate(psi0, t_start: float, t_end: float, model: DrivenModel,
              config: PropagationConfig = PropagationConfig()) -> PropagationResult:
    """``U(t_end, t_start) psi0`` as a composition of steps of size ``T / steps_per_period``."""
    dt = config.dt(model.period)
    nsteps = (t_end - t_start) / dt
    if nsteps < -1e-9 or abs(nsteps - round(nsteps)) > 1e-9 * max(1.0, abs(nsteps)):
        raise ValueError(f"(t_end - t_start)/dt = {nsteps} is not a nonnegative integer")
    psi = np.array(psi0, dtype=complex)
    hit = None
    for m in range(int(round(nsteps))):
        psi = step(psi, t_start + m * dt, model, dt)
        if hit is None and boundary_amplitude(psi, config.boundary_monitor_width) > config.max_boundary_amplitude:
            hit = t_start + (m + 1) * dt
            warnings.warn(ReflectionWarning(
                f"boundary amplitude above {config.max_boundary_amplitude} at t = {hit:.6g}", hit), stacklevel=2)
    return PropagationResult(psi, t_end, hit)


# ---------------------------------------------------------------------------
# averaged survival amplitude

@dataclass(frozen=True)
class DecayFit:
    Gamma_fit: float  # decay rate of |A|^2
    E_fit: float
    a_fit: float
    window: tuple  # (first index, last index + 1)
    residual: float
    E_fit_raw: float  # phase slope before the Crank-Nicolson energy correction


@dataclass(frozen=True)
class SurvivalSeries:
    s_values: np.ndarray = field(repr=False)
    amplitudes: np.ndarray = field(repr=False)
    alpha: float
    dt: float | None = None
    valid_horizon: float = np.inf
    E0: float | None = None  # bound-state energy on the propagation grid
    n_t0: int = 1
    half_width: float | None = None
    fit: DecayFit | None = None

    @property
    def s_max(self) -> float:
        return float(self.s_values[-1])


def front_speed(model: DrivenModel) -> float:
    """Upper estimate of outgoing group velocity: two-quantum channel of the top harmonic."""
    m = max(1, model.perturbation.highest_harmonic)
    e = model.static.E0 + 2 * m * model.omega
    return 2.0 * np.sqrt(max(e, 1.0))


def box_half_width(model: DrivenModel, s_total: float, config: PropagationConfig) -> float:
    return config.box_margin + 1.2 * front_speed(model) * s_total


def _propagation_model(model: DrivenModel, s_max: float, config: PropagationConfig):
    """Model on the propagation box and its h-normalized bound state."""
    h = config.h or model.grid.h
    L = config.half_width or box_half_width(model, s_max + model.period, config)
    core = SpatialGrid.with_spacing(model.grid.half_width, h)
    big = SpatialGrid.with_spacing(max(L, core.half_width), h)
    core_state = bound_states(model.static.regrid(core).hamiltonian, model.static.threshold_margin)
    phi_core = core_state[model.static.state_index].wavefunction
    extra = (big.n_points - core.n_points) // 2
    pm = model.regrid(big)
    phi = np.pad(phi_core, extra)
    phi = phi / big.norm(phi)
    E0 = float(big.h * phi @ pm.static.hamiltonian.apply(phi))
    return pm, phi, E0


def averaged_survival(model: DrivenModel, alpha: float, s_max: float, stride: int | None = None,
                      config: PropagationConfig = PropagationConfig()) -> SurvivalSeries:
    """Sampled ``A(s)`` for ``0 <= s <= s_max`` with trapezoid (uniform) quadrature over launch times."""
    if stride is not None:
        config = replace(config, stride=stride)
    config.validate()
    T = model.period
    periods = s_max / T
    if abs(periods - round(periods)) > 1e-9 * max(1.0, periods) or round(periods) < 1:
        raise ValueError(f"s_max = {s_max} is not a positive multiple of T = {T}")
    spp, k, spacing, stride = config.steps_per_period, config.launches, config.spacing, config.sample_stride
    dt = config.dt(T)

    pm, phi, E0 = _propagation_model(model.with_alpha(alpha), s_max, config)
    pm = pm.with_alpha(alpha)
    H = pm.static.hamiltonian
    off, a, h = H.off_diagonal, 0.5 * dt, H.grid.h
    factors = []
    for p in range(spp):
        d = _diagonal(pm, (p + 0.5) * dt)
        factors.append((d,) + _cayley.factor(d, off, a))

    s_steps = int(round(periods)) * spp
    n_samples = s_steps // stride + 1
    total = (k - 1) * spacing + s_steps
    amps = np.zeros((k, n_samples), dtype=complex)
    psi = np.zeros((H.n, k), dtype=complex)
    width = config.boundary_monitor_width
    hit = None
    for m in range(total + 1):
        if m % spacing == 0 and m // spacing < k:
            psi[:, m // spacing] = phi
        if m % stride == 0:
            ov = h * (phi @ psi)
            for j in range(k):
                sidx = (m - j * spacing) // stride
                if m >= j * spacing and sidx < n_samples:
                    amps[j, sidx] = ov[j]
            if hit is None and boundary_amplitude(psi, width) > config.max_boundary_amplitude:
                hit = m * dt
                warnings.warn(ReflectionWarning(
                    f"boundary amplitude above {config.max_boundary_amplitude} at t = {hit:.6g}", hit), stacklevel=2)
        if m == total:
            break
        d, cp, inv = factors[m % spp]
        psi = _cayley.apply(psi, d, off, a, cp, inv)

    s = dt * stride * np.arange(n_samples)
    horizon = np.inf if hit is None else hit - (k - 1) * spacing * dt
    return SurvivalSeries(s, amps.mean(axis=0), float(alpha), dt, horizon, E0, k, H.grid.half_width)


def fit_decay(series: SurvivalSeries, window=None, ripple_tol: float = 0.05) -> DecayFit:
    """Fit ``A(s) ~ a exp(-i E s - Gamma s / 2)`` on ``window = (s_lo, s_hi)``.

    ``Gamma_fit`` is the decay rate of ``|A|^2``.  When the series comes from
    Crank-Nicolson steps, the phase slope is mapped back through the scheme's
    dispersion ``E = (2/dt) tan(E_cn dt / 2)``.
    """
    s, A = series.s_values, series.amplitudes
    lo, hi = window if window is not None else (0.1 * series.s_max, 0.6 * series.s_max)
    if hi > series.valid_horizon:
        warnings.warn(ReflectionWarning(f"fit window clipped to the valid horizon {series.valid_horizon:.6g}",
                                        series.valid_horizon), stacklevel=2)
        hi = series.valid_horizon
    idx = np.flatnonzero((s >= lo - 1e-12) & (s <= hi + 1e-12))
    if idx.size < 10:
        raise ValueError(f"fit window [{lo}, {hi}] holds {idx.size} < 10 samples")
    mag = np.abs(A[idx])
    if mag[0] <= 0.2:
        raise ValueError(f"|A(s_lo)| = {mag[0]:.3g} is at the noise floor (<= 0.2)")
    ss = s[idx]
    logm = np.log(mag)
    slope, icpt = np.polyfit(ss, logm, 1)
    resid = logm - (slope * ss + icpt)
    # largest rise of log|A| anywhere in the window; a small periodic ripple is intrinsic
    rise = np.max(logm - np.minimum.accumulate(logm))
    if rise > ripple_tol:
        warnings.warn("|A| is not monotone in the fit window; background may dominate",
                      FitQualityWarning, stacklevel=2)
    phase = np.unwrap(np.angle(A[idx]))
    e_raw = -np.polyfit(ss, phase, 1)[0]
    e_fit = e_raw if series.dt is None else 2.0 / series.dt * np.tan(0.5 * e_raw * series.dt)
    return DecayFit(float(-2.0 * slope), float(e_fit), float(np.exp(icpt)), (int(idx[0]), int(idx[-1]) + 1),
                    float(np.sqrt(np.mean(resid ** 2))), float(e_raw))


# ---------------------------------------------------------------------------
# alpha scaling

@dataclass(frozen=True)
class ScalingReport:
    alphas: list
    gamma_fit: list
    E_fit: list
    ratios: list  # Gamma_fit / (2 alpha^2 Im F)
    slope: float  # d log Gamma_fit / d log |alpha|
    intercept: float
    im_F: float
    c1: float
    shift_coefficient: float  # linear coefficient of E_fit - E0 in alpha
    series: list = field(repr=False, default_factory=list)


def s_max_for(model: DrivenModel, alpha: float, gamma: float, decay_product: float = 1.2) -> float:
    """Smallest multiple of ``T`` with ``alpha^2 gamma s_max >= decay_product``."""
    T = model.period
    return T * max(1, int(np.ceil(decay_product / (alpha ** 2 * gamma * T))))


def survival_fit(model: DrivenModel, alpha: float, s_max: float,
                 config: PropagationConfig = PropagationConfig(), window=None) -> SurvivalSeries:
    """:func:`averaged_survival` followed by :func:`fit_decay`; the fit is attached to the series."""
    ser = averaged_survival(model, alpha, s_max, config=config)
    return replace(ser, fit=fit_decay(ser, window))


def scaling_study(model: DrivenModel, alphas, s_max: float | None = None,
                  config: PropagationConfig = PropagationConfig(), gamma_ref: float | None = None,
                  decay_product: float = 1.2, windows=None, mapper=map) -> ScalingReport:
    """Fit decay and phase for each ``alpha``; regress against the perturbative predictions.

    Without ``s_max`` each run lasts ``s_max_for(alpha)``, so that
    ``Gamma_fit * s_max`` is close to ``decay_product``.  ``mapper`` may be a
    thread pool's ``map``: the stepping kernel releases the GIL.
    """
    alphas = [float(a) for a in alphas]
    if len(alphas) < 3:
        raise ValueError("scaling study needs at least three alphas")
    check_alphas(model, alphas)
    im_f = 0.5 * (gamma_ref if gamma_ref is not None else gamma_limiting(model).Gamma)
    if s_max is None and not im_f > 0:
        raise ValueError("automatic s_max needs a positive reference width")
    spans = [s_max if s_max is not None else s_max_for(model, a, 2.0 * im_f, decay_product) for a in alphas]
    wins = windows if windows is not None else [None] * len(alphas)
    series = list(mapper(lambda args: survival_fit(model, args[0], args[1], config, args[2]),
                         zip(alphas, spans, wins)))
    return regress(series, im_f, first_order_shift(model))


def check_alphas(model: DrivenModel, alphas):
    E0, sup = model.static.E0, model.sup_norm()
    for a in alphas:
        if abs(a) * sup >= 0.5 * abs(E0):
            raise PerturbativeRegimeWarning(f"alpha = {a}: |alpha| sup|W| = {abs(a) * sup:.3g} >= 0.5 |E0|")


def regress(series, im_f: float, c1: float) -> ScalingReport:
    """Log-log width law and linear energy shift across fitted series."""
    alphas = np.array([s.alpha for s in series])
    gfit = [s.fit.Gamma_fit for s in series]
    efit = [s.fit.E_fit for s in series]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = [g / (2.0 * a * a * im_f) if im_f else np.nan for g, a in zip(gfit, alphas)]
        lg = np.log(np.asarray(gfit))
    if len(series) >= 2 and np.all(np.isfinite(lg)):
        slope, icpt = np.polyfit(np.log(np.abs(alphas)), lg, 1)
    else:
        slope = icpt = np.nan
    shift = np.asarray(efit) - np.asarray([s.E0 for s in series])
    coef, *_ = np.linalg.lstsq(np.column_stack([alphas, alphas ** 2]), shift, rcond=None)
    return ScalingReport(alphas.tolist(), gfit, efit, [float(r) for r in ratios], float(slope), float(icpt),
                         float(im_f), float(c1), float(coef[0]), list(series))
