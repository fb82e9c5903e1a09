"""Static potentials, periodic perturbations and the models built from them."""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import InvalidModelError, SamplingError
from .grid import DiscreteHamiltonian, SpatialGrid, build_hamiltonian
from .spectral import BoundState, bound_states


# ---------------------------------------------------------------------------
# potentials and spatial profiles (vectorized callables of x)

@dataclass(frozen=True)
class PoschlTeller:
    """``V(x) = -depth * sech^2(x / width)``; depth 2, width 1 has the single level -1."""

    depth: float = 2.0
    width: float = 1.0

    def __call__(self, x):
        y = np.minimum(np.abs(np.asarray(x, dtype=float)) / self.width, 350.0)
        return -self.depth / np.cosh(y) ** 2


@dataclass(frozen=True)
class GaussianWell:
    depth: float = 1.0
    width: float = 1.0

    def __call__(self, x):
        return -self.depth * np.exp(-0.5 * (np.asarray(x, dtype=float) / self.width) ** 2)


@dataclass(frozen=True)
class ZeroPotential:
    def __call__(self, x):
        return np.zeros(np.shape(x))


@dataclass(frozen=True, eq=False)
class SampledPotential:
    """Linear interpolation of tabulated samples, zero outside the table."""

    x: np.ndarray
    v: np.ndarray

    def __call__(self, x):
        return np.interp(x, self.x, self.v, left=0.0, right=0.0)


@dataclass(frozen=True)
class GaussianProfile:
    center: float = 0.0
    width: float = 1.0

    def __call__(self, x):
        return np.exp(-0.5 * ((np.asarray(x, dtype=float) - self.center) / self.width) ** 2)


@dataclass(frozen=True)
class BumpProfile:
    """Smooth compactly supported bump ``exp(1 - 1/(1 - r^2))``, ``r = |x - center| / radius``."""

    center: float = 0.0
    radius: float = 1.0

    def __call__(self, x):
        r2 = ((np.asarray(x, dtype=float) - self.center) / self.radius) ** 2
        out = np.zeros_like(r2)
        inside = r2 < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        return out


@dataclass(frozen=True)
class SumProfile:
    terms: tuple  # ((coefficient, profile), ...)

    def __call__(self, x):
        out = np.zeros(np.shape(x))
        for c, p in self.terms:
            out = out + c * p(x)
        return out


# ---------------------------------------------------------------------------
# perturbations W(x, t), T-periodic and real

@dataclass(frozen=True)
class Harmonic:
    """``coefficient * profile(x) * cos(m w t)`` (or ``sin``)."""

    m: int
    profile: Callable
    coefficient: float = 1.0
    kind: str = "cos"

    def __post_init__(self):
        if self.kind not in ("cos", "sin"):
            raise InvalidModelError(f"harmonic kind must be 'cos' or 'sin', got {self.kind!r}")
        if int(self.m) != self.m or self.m < 0:
            raise InvalidModelError(f"harmonic index must be a nonnegative integer, got {self.m!r}")


@dataclass(frozen=True)
class HarmonicPerturbation:
    """Finite trigonometric sum; its Fourier modes are known in closed form."""

    harmonics: tuple = ()

    def __call__(self, x, t, omega):
        out = np.zeros(np.shape(x))
        for hm in self.harmonics:
            trig = np.cos if hm.kind == "cos" else np.sin
            out = out + hm.coefficient * trig(hm.m * omega * t) * hm.profile(x)
        return out

    def modes(self, x, n_max: int, period: float) -> dict[int, np.ndarray]:
        """``W_n = T^{-1/2} int_0^T exp(-i n w t) W dt`` for ``|n| <= n_max``."""
        rt = np.sqrt(period)
        out = {n: np.zeros(np.shape(x), dtype=complex) for n in range(-n_max, n_max + 1)}
        for hm in self.harmonics:
            w = hm.coefficient * hm.profile(x)
            if hm.m == 0:
                if hm.kind == "cos":
                    out[0] += rt * w
            elif hm.m <= n_max:
                if hm.kind == "cos":
                    out[hm.m] += 0.5 * rt * w
                    out[-hm.m] += 0.5 * rt * w
                else:
                    out[hm.m] += -0.5j * rt * w
                    out[-hm.m] += 0.5j * rt * w
        return out

    def time_reversed(self) -> "HarmonicPerturbation":
        """``W(x, -t)``."""
        return HarmonicPerturbation(tuple(
            replace(hm, coefficient=-hm.coefficient) if hm.kind == "sin" else hm for hm in self.harmonics))

    def scaled(self, c: float) -> "HarmonicPerturbation":
        return HarmonicPerturbation(tuple(replace(hm, coefficient=c * hm.coefficient) for hm in self.harmonics))

    def plus(self, other: "HarmonicPerturbation") -> "HarmonicPerturbation":
        return HarmonicPerturbation(self.harmonics + other.harmonics)

    @property
    def highest_harmonic(self) -> int:
        return max((hm.m for hm in self.harmonics), default=0)


@dataclass(frozen=True)
class SampledPerturbation:
    """General ``W(x, t)`` given as a callable, periodized by reducing ``t`` mod ``T``.

    Fourier modes use trapezoidal quadrature on ``n_t`` equispaced times.
    """

    func: Callable
    n_t: int = 64

    def __call__(self, x, t, omega):
        period = 2.0 * np.pi / omega
        return np.asarray(self.func(x, np.mod(t, period)), dtype=float)

    def samples(self, x, period: float) -> np.ndarray:
        t = period * np.arange(self.n_t) / self.n_t
        return np.stack([self.func(x, tk) for tk in t])

    def modes(self, x, n_max: int, period: float) -> dict[int, np.ndarray]:
        if self.n_t < 4 * n_max:
            raise SamplingError(f"n_t = {self.n_t} < 4 * n_max = {4 * n_max}")
        spec = np.fft.fft(self.samples(x, period), axis=0) * (np.sqrt(period) / self.n_t)
        return {n: spec[n % self.n_t].copy() for n in range(-n_max, n_max + 1)}

    def time_reversed(self) -> "SampledPerturbation":
        f = self.func
        return SampledPerturbation(lambda x, t: f(x, -t), self.n_t)

    def scaled(self, c: float) -> "SampledPerturbation":
        f = self.func
        return SampledPerturbation(lambda x, t: c * f(x, t), self.n_t)

    @property
    def highest_harmonic(self) -> int:
        return self.n_t // 4


def monochromatic(profile: Callable, coefficient: float = 1.0, m: int = 1) -> HarmonicPerturbation:
    return HarmonicPerturbation((Harmonic(m, profile, coefficient, "cos"),))


ZERO_PERTURBATION = HarmonicPerturbation(())


# ---------------------------------------------------------------------------
# models

@dataclass(frozen=True, eq=False)
class StaticModel:
    """Potential, its discretization, and the tracked bound state ``(E0, phi0)``."""

    potential: Callable
    grid: SpatialGrid
    state_index: int = 0
    threshold_margin: float = 1e-2

    @cached_property
    def hamiltonian(self) -> DiscreteHamiltonian:
        return build_hamiltonian(self.potential, self.grid)

    @cached_property
    def bound_states(self) -> list[BoundState]:
        return bound_states(self.hamiltonian, self.threshold_margin)

    @cached_property
    def state(self) -> BoundState:
        states = self.bound_states
        if self.state_index >= len(states):
            raise InvalidModelError(f"model has {len(states)} bound states; index {self.state_index} requested")
        return states[self.state_index]

    @property
    def E0(self) -> float:
        return self.state.energy

    @property
    def phi0(self) -> np.ndarray:
        return self.state.wavefunction

    @property
    def spectrum(self) -> np.ndarray:
        return np.array([b.energy for b in self.bound_states])

    def regrid(self, grid: SpatialGrid) -> "StaticModel":
        return StaticModel(self.potential, grid, self.state_index, self.threshold_margin)


@dataclass(frozen=True, eq=False)
class DrivenModel:
    """``H + alpha W(x, t)`` with ``W`` periodic of period ``T``."""

    static: StaticModel
    perturbation: HarmonicPerturbation | SampledPerturbation
    period: float
    alpha: float = 0.0

    def __post_init__(self):
        if not self.period > 0:
            raise InvalidModelError("period must be positive")

    @property
    def omega(self) -> float:
        return 2.0 * np.pi / self.period

    @property
    def grid(self) -> SpatialGrid:
        return self.static.grid

    def W(self, t: float, x=None) -> np.ndarray:
        """Perturbation profile at time ``t`` on ``x`` (default: model grid)."""
        return self.perturbation(self.grid.x if x is None else x, t, self.omega)

    def sup_norm(self, n_t: int = 64) -> float:
        x = self.grid.x
        return float(max(np.max(np.abs(self.W(self.period * k / n_t, x))) for k in range(n_t)))

    def with_alpha(self, alpha: float) -> "DrivenModel":
        return replace(self, alpha=float(alpha))

    def with_perturbation(self, perturbation) -> "DrivenModel":
        return replace(self, perturbation=perturbation)

    def regrid(self, grid: SpatialGrid) -> "DrivenModel":
        return replace(self, static=self.static.regrid(grid))


def benchmark_static(half_width: float = 30.0, n_points: int = 3001) -> StaticModel:
    """``V = -2 sech^2 x``; single bound state ``E0 = -1``, ``phi0 = sech(x)/sqrt(2)``."""
    return StaticModel(PoschlTeller(2.0, 1.0), SpatialGrid.symmetric(half_width, n_points))


def benchmark_model(half_width: float = 30.0, n_points: int = 3001, static_shift: float = 0.0) -> DrivenModel:
    """Benchmark drive ``W = exp(-x^2/2) cos(2t)``; ``static_shift`` adds ``c * exp(-x^2)``."""
    harmonics = [Harmonic(1, GaussianProfile(0.0, 1.0), 1.0, "cos")]
    if static_shift:
        harmonics.append(Harmonic(0, GaussianProfile(0.0, np.sqrt(0.5)), static_shift, "cos"))
    return DrivenModel(benchmark_static(half_width, n_points), HarmonicPerturbation(tuple(harmonics)), np.pi)
