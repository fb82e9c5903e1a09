"""Resonance widths of bound states under weak time-periodic perturbations.

A bound state of ``-d^2/dx^2 + V`` driven by ``alpha W(x, t)`` with period
``T`` turns into a resonance whose width is ``Gamma alpha^2 + O(alpha^3)``.
The package computes ``Gamma`` by two independent spectral routes and checks
it against direct propagation of the driven equation.
"""
from .errors import (BoxContaminationWarning, DegenerateEnergyError, FitQualityWarning, IllConditionedLimitWarning,
                     InvalidModelError, NearSpectrumError, PerturbativeRegimeWarning, QualityWarning,
                     ReflectionWarning, SamplingError, SizeError)
from .grid import DiscreteHamiltonian, SpatialGrid, build_hamiltonian, eigensolve, solve_shifted
from .models import (BumpProfile, DrivenModel, GaussianProfile, GaussianWell, Harmonic, HarmonicPerturbation,
                     PoschlTeller, SampledPerturbation, SampledPotential, StaticModel, ZeroPotential,
                     benchmark_model, benchmark_static, monochromatic)
from .spectral import (bound_states, boundary_value, check_hypotheses, resolvent_element, scattering_basis,
                       scattering_density, scattering_state)
from .floquet import (coupling_vectors, f_terms, f_value, first_order_shift, fourier_modes, gamma_fgr,
                      gamma_limiting, genericity_sample, random_bump_drive, resonance_expansion)
from .propagation import (PropagationConfig, averaged_survival, fit_decay, propagate, scaling_study, step,
                          survival_fit)
from .config import ExperimentConfig, parse_config, render_config

__version__ = "0.1.0"
