"""Second-order Floquet perturbation theory for a driven bound state.

The function ``F(E0 + i eps, 0)`` is a sum over temporal harmonics of
resolvent matrix elements of the coupling vectors.  Its imaginary part at
``eps -> 0+`` gives the width; it is computed here by limiting absorption
(:func:`gamma_limiting`) and, independently, from generalized eigenfunctions
(:func:`gamma_fgr`).

Two normalizations appear.  :func:`fourier_modes` returns
``W_n = T^{-1/2} int_0^T exp(-i n w t) W(x, t) dt``.  Matrix elements of the
Floquet coupling between ``e_n (x) phi0`` and ``e_m (x) phi0`` with
``e_n = T^{-1/2} exp(i n w t)`` are ``T^{-1} int exp(-i(n - m) w t) W dt``,
so the coupling vectors entering ``F`` are ``W_n phi0 / sqrt(T)``.
With that choice ``|<phi0, U(t+s, t) phi0>|^2`` decays at rate
``2 alpha^2 Im F``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import InvalidModelError, PerturbativeRegimeWarning
from .grid import DiscreteHamiltonian
from .models import BumpProfile, DrivenModel, Harmonic, HarmonicPerturbation, StaticModel, SumProfile
from .spectral import (
    DEFAULT_DELTA_THR,
    DEFAULT_LADDER,
    boundary_value,
    check_hypotheses,
    extend_for,
    lattice_group_velocity,
    scattering_basis,
    solve_shifted,
)

DEFAULT_N_MAX = 8
GAMMA_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class FourierMode:
    n: int
    profile: np.ndarray = field(repr=False)


def fourier_modes(model: DrivenModel, n_max: int = DEFAULT_N_MAX) -> list[FourierMode]:
    """Temporal Fourier modes ``W_n(x)`` for ``-n_max <= n <= n_max``."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    modes = model.perturbation.modes(model.grid.x, n_max, model.period)
    return [FourierMode(n, modes[n]) for n in range(-n_max, n_max + 1)]


def coupling_vectors(model: DrivenModel, n_max: int = DEFAULT_N_MAX) -> dict[int, np.ndarray]:
    """``W_n phi0 / sqrt(T)`` keyed by ``n``."""
    phi0 = model.static.phi0
    scale = 1.0 / np.sqrt(model.period)
    return {m.n: scale * m.profile * phi0 for m in fourier_modes(model, n_max)}


def _require_hypotheses(model: DrivenModel, n_max: int, delta_thr: float):
    static = model.static
    rep = check_hypotheses(static.state, model.omega, n_max, delta_thr, static.spectrum)
    if not rep.passed:
        n, mu, why = rep.failures[0]
        raise InvalidModelError(f"E0 + n*omega = {mu:.6g} hits the {why} at n = {n}")
    return rep


# ---------------------------------------------------------------------------
# F(E0 + i eps, 0)

@dataclass(frozen=True)
class FTerms:
    eps: float
    n0: int
    terms: dict  # harmonic offset m = n - n0 -> complex matrix element
    projector_term: complex
    tail_estimate: float

    @property
    def total(self) -> complex:
        return complex(sum(self.terms.values()) + self.projector_term)


def f_terms(model: DrivenModel, eps: float, n_max: int = DEFAULT_N_MAX, n0: int = 0,
            eps_pad: float | None = None) -> FTerms:
    """Terms of ``F(E0 + n0 w + i eps, 0)``.

    Every index is shifted by ``n0``: the term of harmonic ``n`` uses the
    resolvent ``(H + n w - z)^{-1}`` at ``z = E0 + n0 w + i eps`` and the mode
    ``W_{n - n0}``.  The box is padded for damping at ``eps_pad`` (default ``eps``).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    eps_pad = eps if eps_pad is None else eps_pad
    H = model.static.hamiltonian
    h = H.grid.h
    E0, w = model.static.E0, model.omega
    phi0 = model.static.phi0
    coup = coupling_vectors(model, n_max)
    z = E0 + n0 * w + 1j * eps

    terms = {}
    for n in range(n0 - n_max, n0 + n_max + 1):
        m = n - n0
        if m == 0:
            continue
        f = coup[m]
        if not np.any(f):
            terms[m] = 0j
            continue
        Hx, fx = extend_for(H, f, E0 - m * w, eps_pad)
        u = solve_shifted(Hx, z - n * w, fx)
        terms[m] = complex(h * np.vdot(fx, u))

    f = coup[0]
    if np.any(f):
        Hx, fx = extend_for(H, f, E0, eps_pad)
        px = np.pad(phi0, (Hx.n - H.n) // 2)
        fx = fx - px * (h * np.dot(px, fx))
        u = solve_shifted(Hx, z - n0 * w, fx)
        u = u - px * (h * np.dot(px, u))
        proj = complex(h * np.vdot(fx, u))
    else:
        proj = 0j

    edge = np.linalg.norm(coup[n_max]) ** 2 + np.linalg.norm(coup[-n_max]) ** 2
    tail = float(h * edge / (n_max * w))
    return FTerms(float(eps), int(n0), terms, proj, tail)


def f_value(model: DrivenModel, eps: float, n_max: int = DEFAULT_N_MAX, n0: int = 0) -> complex:
    """``F(E0 + n0 w + i eps, 0)``."""
    return f_terms(model, eps, n_max, n0).total


# ---------------------------------------------------------------------------
# width by two routes

@dataclass(frozen=True)
class Channel:
    n: int
    energy: float  # e_n = E0 + n w
    contribution: float  # share of Im c2 (= Gamma / 2)
    parts: tuple = ()  # per real generalized eigenfunction (even, odd when available)


@dataclass(frozen=True)
class ResonanceData:
    E0: float
    omega: float
    Gamma: float
    channels: list
    c1: float | None = None
    c2: complex | None = None
    alpha: float | None = None
    E_alpha: complex | None = None
    ladder: dict | None = None
    route: str = ""
    diagnostics: dict = field(default_factory=dict)


def gamma_limiting(model: DrivenModel, n_max: int = DEFAULT_N_MAX, ladder=DEFAULT_LADDER,
                   delta_thr: float = DEFAULT_DELTA_THR) -> ResonanceData:
    """``c2 = F(E0 + i0, 0)`` by term-wise limiting absorption; ``Gamma = 2 Im c2``."""
    _require_hypotheses(model, n_max, delta_thr)
    static = model.static
    H, E0, w = static.hamiltonian, static.E0, model.omega
    coup = coupling_vectors(model, n_max)

    values, closed_imag, channels = {}, {}, []
    for m in range(-n_max, n_max + 1):
        if m == 0 or not np.any(coup[m]):
            continue
        lam = E0 - m * w
        bv = boundary_value(H, coup[m], lam, ladder)
        values[m] = bv.value
        if lam > delta_thr:
            channels.append(Channel(-m, lam, bv.value.imag))
        else:
            closed_imag[m] = bv.value.imag
    if np.any(coup[0]):
        bv0 = boundary_value(H, coup[0], E0, ladder, projector=static.phi0)
        proj = bv0.value
    else:
        proj = 0j
    c2 = complex(sum(values.values()) + proj)
    channels.sort(key=lambda c: c.n)
    diag = {"terms": values, "projector_term": proj, "closed_imag": closed_imag}
    return ResonanceData(E0, w, 2.0 * c2.imag, channels, c2=c2, route="limiting", diagnostics=diag)


@lru_cache(maxsize=64)
def _cached_basis(H: DiscreteHamiltonian, energy: float, parity: bool):
    return scattering_basis(H, energy, parity=parity)


def _is_symmetric(H: DiscreteHamiltonian) -> bool:
    v = H.potential_samples
    g = H.grid
    return abs(g.x_min + g.x_max) <= 1e-9 * g.half_width and np.allclose(v, v[::-1], rtol=1e-12, atol=1e-14)


def gamma_fgr(model: DrivenModel, n_max: int = DEFAULT_N_MAX,
              delta_thr: float = DEFAULT_DELTA_THR) -> ResonanceData:
    """Width from the eigenfunction expansion at the open-channel energies.

    ``Gamma/2 = pi * sum_n (|<phi(+q_n), f_n>|^2 + |<phi(-q_n), f_n>|^2) / (dE/dq)``
    with ``f_n = W_n phi0 / sqrt(T)`` and ``e_n = E0 + n w > delta_thr``.
    """
    _require_hypotheses(model, n_max, delta_thr)
    static = model.static
    H, E0, w = static.hamiltonian, static.E0, model.omega
    h = H.grid.h
    coup = coupling_vectors(model, n_max)
    parity = _is_symmetric(H)

    channels = []
    for n in range(1, n_max + 1):
        e = E0 + n * w
        if e <= delta_thr:
            continue
        f = coup[n]
        if not np.any(f):
            channels.append(Channel(n, e, 0.0, (0.0, 0.0)))
            continue
        phi, q, _ = _cached_basis(H, float(e), parity)
        ov = h * (phi[0] @ f)
        parts = np.pi * np.abs(ov) ** 2 / lattice_group_velocity(q[0], h)
        channels.append(Channel(n, e, float(parts.sum()), tuple(float(p) for p in parts)))
    half = sum(c.contribution for c in channels)
    return ResonanceData(E0, w, 2.0 * half, channels, route="fgr",
                         diagnostics={"basis": "parity" if parity else "asymptotic"})


# ---------------------------------------------------------------------------
# resonance position

def first_order_shift(model: DrivenModel) -> float:
    """``c1 = T^{-1} int_0^T int |phi0|^2 W dx dt``."""
    static = model.static
    W0 = model.perturbation.modes(model.grid.x, 1, model.period)[0]
    return float(model.grid.h * np.sum(static.phi0 ** 2 * W0.real) / np.sqrt(model.period))


def resonance_expansion(model: DrivenModel, alpha: float, n_max: int = DEFAULT_N_MAX,
                        ladder=DEFAULT_LADDER, delta_thr: float = DEFAULT_DELTA_THR) -> ResonanceData:
    """``E_alpha = E0 + alpha c1 - alpha^2 c2`` and the ladder ``E_alpha + n w``."""
    E0 = model.static.E0
    bound = abs(alpha) * model.sup_norm()
    if bound >= 0.5 * abs(E0):
        warnings.warn(f"|alpha| sup|W| = {bound:.3g} exceeds 0.5 |E0| = {0.5 * abs(E0):.3g}",
                      PerturbativeRegimeWarning, stacklevel=2)
    lim = gamma_limiting(model, n_max, ladder, delta_thr)
    c1 = first_order_shift(model)
    E_alpha = complex(E0 + alpha * c1 - alpha ** 2 * lim.c2)
    rungs = {n: E_alpha + n * model.omega for n in range(-n_max, n_max + 1)}
    return ResonanceData(E0, model.omega, lim.Gamma, lim.channels, c1=c1, c2=lim.c2, alpha=float(alpha),
                         E_alpha=E_alpha, ladder=rungs, route="limiting", diagnostics=lim.diagnostics)


# ---------------------------------------------------------------------------
# genericity

@dataclass(frozen=True)
class GenericityReport:
    fraction: float
    gammas: list
    channels: list  # per trial
    threshold: float


def random_bump_drive(n_bumps=(1, 4), centers=(-3.0, 3.0), radii=(0.5, 3.0), m: int = 1) -> Callable:
    """Generator of smooth compactly supported drives ``w(x) cos(m w t) + w'(x) sin(m w t)``."""
    def draw(rng: np.random.Generator) -> HarmonicPerturbation:
        harmonics = []
        for kind in ("cos", "sin"):
            k = int(rng.integers(n_bumps[0], n_bumps[1] + 1))
            terms = tuple((float(rng.normal()), BumpProfile(float(rng.uniform(*centers)), float(rng.uniform(*radii))))
                          for _ in range(k))
            harmonics.append(Harmonic(m, SumProfile(terms), 1.0, kind))
        return HarmonicPerturbation(tuple(harmonics))
    return draw


def genericity_sample(static: StaticModel, period: float, generator: Callable, trials: int, seed: int,
                      n_max: int = DEFAULT_N_MAX, threshold: float = GAMMA_FLOOR) -> GenericityReport:
    """Fraction of random drives with ``Gamma > threshold`` (via :func:`gamma_fgr`)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    children = np.random.SeedSequence(seed).spawn(trials)
    gammas, chans = [], []
    for child in children:
        W = generator(np.random.default_rng(child))
        res = gamma_fgr(DrivenModel(static, W, period), n_max)
        gammas.append(res.Gamma)
        chans.append(res.channels)
    frac = float(np.mean(np.asarray(gammas) > threshold))
    return GenericityReport(frac, gammas, chans, threshold)
