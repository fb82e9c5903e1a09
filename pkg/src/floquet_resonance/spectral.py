"""Spectral data of the static operator ``H = -d^2/dx^2 + V``.

Bound states come from the dense tridiagonal eigensolve.  Continuum data
comes two ways that never share code paths:

* generalized eigenfunctions, integrated through the stationary recurrence
  from the left wall and normalized from their plane-wave asymptotics on both
  sides (delta-normalized in lattice momentum);
* boundary values ``<psi, (H - lam - i0)^{-1} psi>`` from shifted solves on an
  ``eps`` ladder, extrapolated polynomially to ``eps = 0+``.

With these conventions ``Im <psi, (H - lam - i0)^{-1} psi> = pi * dmu/dlam`` and
``dmu/dlam = (|<phi(+q), psi>|^2 + |<phi(-q), psi>|^2) / (dE/dq)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BoxContaminationWarning,
    DegenerateEnergyError,
    IllConditionedLimitWarning,
    InvalidModelError,
)
from .grid import DiscreteHamiltonian, SpatialGrid, build_hamiltonian, eigensolve, solve_shifted

DEFAULT_LADDER = (1e-1, 5e-2, 2.5e-2, 1.25e-2)
DEFAULT_DELTA_THR = 1e-2


@dataclass(frozen=True, eq=False)
class BoundState:
    energy: float
    wavefunction: np.ndarray = field(repr=False)
    index: int
    boundary_amplitude: float = 0.0
    gap: float = np.inf  # distance to the nearest other eigenvalue
    contaminated: bool = False


def bound_states(H: DiscreteHamiltonian, threshold_margin: float = 1e-2,
                 boundary_tol: float = 1e-6) -> list[BoundState]:
    """Eigenpairs of ``H`` below ``-threshold_margin``.

    States whose amplitude at the walls exceeds ``boundary_tol`` are kept but
    flagged as box-contaminated.
    """
    if threshold_margin <= 0:
        raise ValueError("threshold_margin must be positive")
    pairs = eigensolve(H, upper=-threshold_margin)
    if len(pairs.values) == 0:
        return []
    # one extra eigenvalue above the cut, only to measure the gap of the top state
    nxt = eigensolve(H, upper=-threshold_margin + 1.0).values
    nxt = nxt[nxt > -threshold_margin]
    levels = np.concatenate([pairs.values, nxt[:1]])
    states = []
    for i, (e, amp) in enumerate(zip(pairs.values, pairs.boundary_amplitude)):
        others = np.delete(levels, i)
        gap = float(np.min(np.abs(others - e))) if len(others) else np.inf
        contaminated = bool(amp > boundary_tol)
        if contaminated:
            warnings.warn(f"bound state {i} (E = {e:.6g}) has wall amplitude {amp:.2e}",
                          BoxContaminationWarning, stacklevel=2)
        states.append(BoundState(float(e), pairs.vectors[:, i].copy(), i, float(amp), gap, contaminated))
    return states


@dataclass(frozen=True)
class HypothesisReport:
    passed: bool
    failures: list  # (n, mu_n, reason)
    energy_below_one: bool  # |E0| < 1

    def __bool__(self):
        return self.passed


def check_hypotheses(state: BoundState | float, omega: float, n_max: int,
                     delta_thr: float = DEFAULT_DELTA_THR, spectrum=()) -> HypothesisReport:
    """Check that the shifted energies ``E0 + n*omega`` avoid thresholds and eigenvalues.

    ``spectrum`` is the discrete spectrum of ``H``.  ``|E0| < 1`` is reported,
    not enforced.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    e0 = state.energy if isinstance(state, BoundState) else float(state)
    spectrum = np.asarray(spectrum, dtype=float)
    failures = []
    for n in range(1, n_max + 1):
        mu = e0 + n * omega
        if abs(mu) <= delta_thr:
            failures.append((n, mu, "threshold"))
        elif spectrum.size and np.min(np.abs(spectrum - mu)) <= delta_thr:
            failures.append((n, mu, "discrete spectrum"))
    return HypothesisReport(not failures, failures, abs(e0) < 1.0)


# ---------------------------------------------------------------------------
# generalized eigenfunctions

def lattice_momentum(energy, h: float):
    """Momentum ``q`` of the free 3-point lattice at ``energy``: ``(2 - 2cos qh)/h^2 = E``."""
    s = np.asarray(energy, dtype=float) * h * h / 4.0
    if np.any(s <= 0) or np.any(s >= 1):
        raise InvalidModelError("energy outside the lattice continuum (0, 4/h^2)")
    return 2.0 / h * np.arcsin(np.sqrt(s))


def lattice_group_velocity(q, h: float):
    """``dE/dq`` on the lattice; tends to ``2q`` as ``h -> 0``."""
    return 2.0 * np.sin(q * h) / h


@dataclass(frozen=True, eq=False)
class ScatteringState:
    k: float  # signed momentum label; +|k| and -|k| are the two real channels
    energy: float
    q: float  # lattice momentum
    wavefunction: np.ndarray = field(repr=False)
    wronskian_spread: float = 0.0
    fit_residual: float = 0.0
    normalization: str = "delta-in-momentum"


def _recurrence(H: DiscreteHamiltonian, energies: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Two real solutions per energy, seeded with cos/sin data at the left wall."""
    x = H.grid.x
    h2 = H.grid.h ** 2
    n = H.n
    u = np.empty((n, 2, energies.size))
    u[0, 0], u[1, 0] = np.cos(q * x[0]), np.cos(q * x[1])
    u[0, 1], u[1, 1] = np.sin(q * x[0]), np.sin(q * x[1])
    for j in range(1, n - 1):
        u[j + 1] = h2 * (H.diagonal[j] - energies) * u[j] - u[j - 1]
    return u


def _asymptotic_coefficients(x, u, q, n_fit):
    """Least-squares ``a cos(qx) + b sin(qx)`` on a window; returns (coef, rel. residual)."""
    c = np.cos(np.outer(x, q))  # (n_fit, m)
    s = np.sin(np.outer(x, q))
    m = q.size
    coef = np.empty((m, 2, 2))  # energy, (a, b), solution
    res = np.empty(m)
    for i in range(m):
        A = np.column_stack([c[:, i], s[:, i]])
        sol, *_ = np.linalg.lstsq(A, u[:, :, i], rcond=None)
        coef[i] = sol
        r = A @ sol - u[:, :, i]
        res[i] = np.linalg.norm(r) / max(np.linalg.norm(u[:, :, i]), 1e-300)
    return coef, res


def scattering_basis(H: DiscreteHamiltonian, energies, parity: bool = False, fit_fraction: float = 0.05):
    """Delta-normalized real generalized eigenfunctions at each energy.

    Returns ``(phi, q, info)`` where ``phi`` has shape ``(m, 2, n)``: for each
    energy the pair ``phi(+q), phi(-q)`` satisfying
    ``<phi_a(q), phi_b(q')> = delta_ab delta(q - q')``.  With ``parity=True``
    (symmetric grid and potential) the pair is rotated to (even, odd).
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    h = H.grid.h
    q = lattice_momentum(energies, h)
    u = _recurrence(H, energies, q)
    x = H.grid.x

    wr = u[:-1, 0] * u[1:, 1] - u[1:, 0] * u[:-1, 1]  # discrete Wronskian, (n-1, m)
    wmean = wr.mean(axis=0)
    if np.any(np.abs(wmean) < 1e-12):
        raise DegenerateEnergyError("vanishing Wronskian; solutions are dependent")
    spread = (wr.max(axis=0) - wr.min(axis=0)) / np.abs(wmean)

    n_fit = max(8, int(fit_fraction * H.n))
    cl, rl = _asymptotic_coefficients(x[:n_fit], u[:n_fit], q, n_fit)
    cr, rr = _asymptotic_coefficients(x[-n_fit:], u[-n_fit:], q, n_fit)
    # delta-normalization Gram matrix of the two solutions: (pi/2) sum over both sides
    gram = 0.5 * np.pi * (np.einsum("mki,mkj->mij", cl, cl) + np.einsum("mki,mkj->mij", cr, cr))
    w, V = np.linalg.eigh(gram)
    inv_sqrt = np.einsum("mik,mk,mjk->mij", V, 1.0 / np.sqrt(w), V)
    phi = np.einsum("nim,mij->mjn", u, inv_sqrt)

    if parity:
        phi = _parity_rotate(H, phi)
    info = {"wronskian_spread": spread, "fit_residual": np.maximum(rl, rr)}
    return phi, q, info


def _parity_rotate(H, phi):
    v = H.potential_samples
    if abs(H.grid.x_min + H.grid.x_max) > 1e-9 * H.grid.half_width or not np.allclose(v, v[::-1], rtol=1e-12, atol=1e-14):
        raise InvalidModelError("parity basis needs a symmetric grid and potential")
    out = np.empty_like(phi)
    for i in range(phi.shape[0]):
        basis = phi[i].T
        M, *_ = np.linalg.lstsq(basis, basis[::-1], rcond=None)
        w, R = np.linalg.eigh(0.5 * (M + M.T))
        R = R[:, np.argsort(-w)]  # even (eigenvalue +1) first
        out[i] = (basis @ R).T
    return out


def scattering_state(V, grid: SpatialGrid, k: float, parity: bool = False) -> ScatteringState:
    """Real generalized eigenfunction at energy ``k**2``; the sign of ``k`` picks the channel."""
    if k == 0:
        raise ValueError("k must be nonzero")
    H = V if isinstance(V, DiscreteHamiltonian) else build_hamiltonian(V, grid)
    e = float(k) ** 2
    phi, q, info = scattering_basis(H, e, parity=parity)
    j = 0 if k > 0 else 1
    return ScatteringState(float(k), e, float(q[0]), phi[0, j],
                           float(info["wronskian_spread"][0]), float(info["fit_residual"][0]))


def scattering_density(H: DiscreteHamiltonian, psi, energy: float, parity: bool = False):
    """``dmu_psi/dE`` from the eigenfunction expansion; returns (density, per-channel parts)."""
    phi, q, _ = scattering_basis(H, energy, parity=parity)
    overlaps = H.grid.h * (phi[0] @ np.asarray(psi))
    parts = np.abs(overlaps) ** 2 / lattice_group_velocity(q[0], H.grid.h)
    return float(parts.sum()), parts


# ---------------------------------------------------------------------------
# limiting absorption

def resolvent_element(H: DiscreteHamiltonian, psi, lam: float, eps: float) -> complex:
    """``<psi, (H - lam - i eps)^{-1} psi>``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    psi = np.asarray(psi, dtype=complex)
    u = solve_shifted(H, lam + 1j * eps, psi)
    return complex(H.grid.h * np.vdot(psi, u))


@dataclass(frozen=True)
class SpectralMeasureSample:
    lam: float
    density: float  # Im(limit) / pi
    value: complex  # extrapolated <psi, (H - lam - i0)^{-1} psi>
    epsilon_ladder: list  # [(eps, value at eps)]
    estimates: list  # Richardson sequence of increasing order
    half_width: float  # box half-width actually used


def required_half_width(lam: float, eps: float, tol: float = 1e-8) -> float:
    """Half-width beyond which wall reflections are damped below ``tol`` at ``lam + i eps``."""
    decay = np.sqrt(complex(lam, eps)).imag
    return float(np.log(1.0 / tol) / (2.0 * decay))


def level_spacing(lam: float, half_width: float) -> float:
    """Box-quantization spacing near ``lam`` for a box of width ``2*half_width``."""
    return float(np.pi * np.sqrt(max(lam, 0.0)) / half_width)


def extend_for(H: DiscreteHamiltonian, psi, lam: float, eps_min: float, tol: float = 1e-8):
    """Zero-pad ``H`` and ``psi`` so that walls are invisible at ``lam + i eps_min``."""
    edge = max(abs(H.potential_samples[0]), abs(H.potential_samples[-1]))
    if edge > 1e-10:
        warnings.warn(f"potential is {edge:.2e} at the walls; zero padding truncates it",
                      BoxContaminationWarning, stacklevel=3)
    L = H.grid.half_width + required_half_width(lam, eps_min, tol)
    Hx = H.extended(L)
    extra = (Hx.n - H.n) // 2
    psi = np.asarray(psi)
    pad = [(extra, extra)] + [(0, 0)] * (psi.ndim - 1)
    return Hx, np.pad(psi, pad)


def _richardson(eps: np.ndarray, vals: np.ndarray, degree: int):
    """Values at ``eps = 0`` of polynomial fits through the smallest-eps points."""
    order = np.argsort(eps)
    e, v = eps[order], vals[order]
    out = []
    for d in range(1, degree + 1):
        c_re = np.polyfit(e[: d + 1], v[: d + 1].real, d)
        c_im = np.polyfit(e[: d + 1], v[: d + 1].imag, d)
        out.append(complex(c_re[-1], c_im[-1]))
    return out


def boundary_value(H: DiscreteHamiltonian, psi, lam: float, ladder=DEFAULT_LADDER, pad: bool = True,
                   tol: float = 1e-8, spectrum=None, delta_thr: float = DEFAULT_DELTA_THR,
                   projector: np.ndarray | None = None) -> SpectralMeasureSample:
    """Limiting-absorption boundary value at ``lam`` from an ``eps`` ladder.

    The ladder is extrapolated by polynomial interpolation of full degree.
    With ``pad`` the box is enlarged so that ``ladder[-1]`` exceeds twice the
    level spacing and wall reflections are damped below ``tol``; otherwise the
    spacing condition is checked and violations raise.

    ``projector`` (an h-normalized real vector) removes that direction from
    both sides of the matrix element.
    """
    ladder = np.asarray(ladder, dtype=float)
    if ladder.size < 2 or np.any(ladder <= 0) or np.any(np.diff(ladder) >= 0):
        raise ValueError("ladder must be strictly decreasing and positive with at least two entries")
    if spectrum is not None and len(spectrum):
        if np.min(np.abs(np.asarray(spectrum) - lam)) <= delta_thr:
            raise InvalidModelError(f"lam = {lam} within {delta_thr} of the discrete spectrum")
    psi = np.asarray(psi, dtype=complex)
    eps_min = float(ladder[-1])
    if pad:
        Hx, px = extend_for(H, psi, lam, eps_min, tol)
        proj = None if projector is None else np.pad(projector, (Hx.n - H.n) // 2)
    else:
        Hx, px, proj = H, psi, projector
    if eps_min <= 2.0 * level_spacing(lam, Hx.grid.half_width):
        raise InvalidModelError(
            f"eps_min = {eps_min} does not exceed twice the level spacing "
            f"{level_spacing(lam, Hx.grid.half_width):.3g} of a box of half-width {Hx.grid.half_width}")

    h = Hx.grid.h
    if proj is not None:
        px = px - proj * (h * np.dot(proj, px))
    vals = []
    for eps in ladder:
        u = solve_shifted(Hx, lam + 1j * eps, px)
        if proj is not None:
            u = u - proj * (h * np.dot(proj, u))
        vals.append(complex(h * np.vdot(px, u)))
    vals = np.array(vals)

    est = _richardson(ladder, vals, ladder.size - 1)
    if len(est) >= 3:
        d = np.abs(np.diff(est))
        floor = 1e-12 * max(np.max(np.abs(vals)), 1e-300)
        if np.any(d[1:] > d[:-1]) and d[0] > floor:
            warnings.warn(f"non-monotone Richardson corrections {d} at lam = {lam}",
                          IllConditionedLimitWarning, stacklevel=2)
    limit = est[-1]
    return SpectralMeasureSample(float(lam), limit.imag / np.pi, limit,
                                 list(zip(ladder.tolist(), vals.tolist())), est, Hx.grid.half_width)
