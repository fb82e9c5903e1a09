"""The static problem: the bound state of V = -2 sech^2 x and its discretization error.

The exact level is E0 = -1 with phi0 = sech(x)/sqrt(2).  The three-point
stencil is second order, so halving h cuts the energy error by four.
"""
import numpy as np

from floquet_resonance import PoschlTeller, SpatialGrid, bound_states, build_hamiltonian

for n in (751, 1501, 3001):
    grid = SpatialGrid.symmetric(30.0, n)
    H = build_hamiltonian(PoschlTeller(), grid)
    (b,) = bound_states(H)
    exact = 1.0 / (np.sqrt(2.0) * np.cosh(grid.x))
    print(f"h = {grid.h:.3f}   E0 = {b.energy:.10f}   |E0 + 1| = {abs(b.energy + 1):.2e}   "
          f"max|phi0 - exact| = {np.max(np.abs(b.wavefunction - exact)):.2e}   wall amplitude = {b.boundary_amplitude:.1e}")

# The drive W = exp(-x^2/2) cos(2t) lifts E0 by one quantum to e_1 = 1,
# inside the continuum: this is the single open decay channel.
