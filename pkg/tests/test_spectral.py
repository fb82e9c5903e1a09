import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floquet_resonance import (InvalidModelError, PoschlTeller, SpatialGrid, ZeroPotential, benchmark_static,
                               bound_states, boundary_value, build_hamiltonian, check_hypotheses, resolvent_element,
                               scattering_density, scattering_state)
from floquet_resonance.spectral import lattice_group_velocity, scattering_basis


@pytest.fixture(scope="module")
def pt():
    return build_hamiltonian(PoschlTeller(), SpatialGrid.symmetric(30.0, 3001))


@pytest.fixture(scope="module")
def free():
    return build_hamiltonian(ZeroPotential(), SpatialGrid.symmetric(30.0, 3001))


def unit_gaussian(x, center=0.0):
    return np.pi ** -0.25 * np.exp(-0.5 * (x - center) ** 2)


# bound states and hypotheses

def test_no_bound_states_for_free(free):
    assert bound_states(free) == []


def test_poschl_teller_ground_state():
    H = build_hamiltonian(PoschlTeller(), SpatialGrid.symmetric(20.0, 2001))
    states = bound_states(H)
    assert len(states) == 1
    b = states[0]
    assert abs(b.energy + 1.0) < 1e-3
    assert abs(H.grid.norm(b.wavefunction) - 1.0) < 1e-10
    assert np.max(np.abs(b.wavefunction - 1.0 / (np.sqrt(2.0) * np.cosh(H.grid.x)))) < 1e-4
    assert not b.contaminated and b.boundary_amplitude < 1e-6


def test_bound_state_box_independence():
    e20 = benchmark_static(20.0, 2001).E0
    e40 = benchmark_static(40.0, 4001).E0
    assert abs(e20 - e40) < 1e-8


def test_hypotheses_pass():
    rep = check_hypotheses(-1.0, 2.0, 3, spectrum=[-1.0])
    assert rep.passed and rep.failures == []
    assert not rep.energy_below_one  # |E0| < 1 is reported, not enforced


def test_hypotheses_threshold():
    rep = check_hypotheses(-1.0, 1.0, 3, spectrum=[-1.0])
    assert not rep.passed and rep.failures[0][0] == 1 and rep.failures[0][2] == "threshold"


def test_hypotheses_discrete_spectrum():
    rep = check_hypotheses(-1.0, 0.5, 3, spectrum=[-1.0, -0.5])
    assert not rep.passed and rep.failures[0][:1] == (1,) and rep.failures[0][2] == "discrete spectrum"


# generalized eigenfunctions

def test_free_plane_wave(free):
    even = scattering_state(free, free.grid, 1.0)
    odd = scattering_state(free, free.grid, -1.0)
    wave = (even.wavefunction + 1j * odd.wavefunction) / np.sqrt(2.0)
    inner = slice(100, -100)
    assert np.allclose(np.abs(wave[inner]), 1.0 / np.sqrt(2.0 * np.pi), rtol=1e-6)
    assert even.wronskian_spread < 1e-8


def test_wronskian_constant(pt):
    for k in (0.5, 1.0, 2.0):
        assert scattering_state(pt, pt.grid, k).wronskian_spread < 1e-8


def test_scattering_states_solve_equation(pt):
    st_ = scattering_state(pt, pt.grid, 1.3)
    r = pt.apply(st_.wavefunction) - st_.energy * st_.wavefunction
    assert np.max(np.abs(r[1:-1])) < 1e-8 * np.max(np.abs(pt.diagonal * st_.wavefunction))


def test_parseval_completeness(pt):
    x, h = pt.grid.x, pt.grid.h
    psi = np.exp(-0.5 * (x - 0.7) ** 2)
    phi0 = bound_states(pt)[0].wavefunction
    bound = (h * phi0 @ psi) ** 2
    q = np.linspace(1e-3, 7.0, 1400)
    energies = (2.0 - 2.0 * np.cos(q * h)) / h ** 2
    phi, qq, _ = scattering_basis(pt, energies)
    dens = np.sum((h * phi @ psi) ** 2, axis=1)
    cont = np.trapezoid(dens, q) if hasattr(np, "trapezoid") else np.trapz(dens, q)
    assert abs(bound + cont - pt.grid.norm(psi) ** 2) < 1e-2


# resolvent and boundary values

def test_resolvent_zero(pt):
    assert resolvent_element(pt, np.zeros(pt.n), 1.0, 0.1) == 0


def test_resolvent_imaginary_part_identity(pt, rng):
    psi = rng.normal(size=pt.n) + 1j * rng.normal(size=pt.n)
    from floquet_resonance import solve_shifted
    eps = 0.05
    u = solve_shifted(pt, 0.7 + 1j * eps, psi)
    val = resolvent_element(pt, psi, 0.7, eps)
    assert val.imag == pytest.approx(eps * pt.grid.norm(u) ** 2, rel=1e-10)
    assert val.imag >= 0


def test_free_resolvent_three_rung_ladder(free):
    psi = unit_gaussian(free.grid.x)
    bv = boundary_value(free, psi, 1.0, ladder=(1e-1, 5e-2, 2.5e-2))
    assert abs(bv.value.imag - np.sqrt(np.pi) / np.e) < 1e-3
    assert bv.density == pytest.approx(np.exp(-1.0) / np.sqrt(np.pi), abs=1e-3 / np.pi)


def test_density_below_spectrum(pt):
    psi = unit_gaussian(pt.grid.x, 0.5)
    assert abs(boundary_value(pt, psi, -2.0).density) < 1e-6


def test_density_of_bound_state_vanishes(pt):
    phi0 = bound_states(pt)[0].wavefunction
    assert abs(boundary_value(pt, phi0, 1.0).density) < 1e-6


def test_unpadded_box_rejects_small_eps(free):
    with pytest.raises(InvalidModelError):
        boundary_value(free, unit_gaussian(free.grid.x), 1.0, pad=False)


def test_ladder_validation(free):
    with pytest.raises(ValueError):
        boundary_value(free, unit_gaussian(free.grid.x), 1.0, ladder=(0.01, 0.1))


def test_lambda_near_discrete_spectrum_rejected(pt):
    with pytest.raises(InvalidModelError):
        boundary_value(pt, unit_gaussian(pt.grid.x), -1.0, spectrum=[-1.0])


@pytest.mark.parametrize("lam", [0.5, 1.0, 3.0])
def test_fgr_density_identity(pt, lam):
    psi = np.exp(-0.5 * (pt.grid.x - 0.4) ** 2) / np.cosh(pt.grid.x)
    limit = boundary_value(pt, psi, lam).density
    expansion, parts = scattering_density(pt, psi, lam)
    assert limit == pytest.approx(expansion, rel=1e-2)
    assert len(parts) == 2


def test_fgr_density_identity_continuum_limit(pt):
    # lattice dE/dq tends to 2 sqrt(lam)
    q = np.sqrt(1.0)
    assert lattice_group_velocity(q, pt.grid.h) == pytest.approx(2.0 * q, rel=1e-4)


def test_box_robustness():
    vals = []
    for L, n in ((30.0, 3001), (60.0, 6001)):
        H = build_hamiltonian(PoschlTeller(), SpatialGrid.symmetric(L, n))
        psi = np.exp(-0.5 * H.grid.x ** 2) / np.cosh(H.grid.x)
        vals.append(boundary_value(H, psi, 1.0).value)
    assert abs(vals[1] - vals[0]) < 1e-3 * abs(vals[0])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-3.0, 10.0), st.floats(1e-3, 1.0))
def test_herglotz_positivity(seed, lam, eps):
    r = np.random.default_rng(seed)
    g = SpatialGrid.symmetric(15.0, 601)
    H = build_hamiltonian(PoschlTeller(), g)
    psi = r.normal(size=g.n_points) + 1j * r.normal(size=g.n_points)
    assert resolvent_element(H, psi, lam, eps).imag >= 0
