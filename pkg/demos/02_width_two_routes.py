"""The width coefficient Gamma, computed two independent ways.

Route 1 evaluates the resolvent matrix elements of the coupling vectors at
E0 + i eps for a ladder of eps and extrapolates to eps -> 0.  Route 2 builds
real generalized eigenfunctions at the open-channel energy and sums squared
overlaps.  They share only the Hamiltonian and the bound state.
"""
import numpy as np

from floquet_resonance import benchmark_model, f_terms, gamma_fgr, gamma_limiting, resonance_expansion
from floquet_resonance.spectral import DEFAULT_LADDER

model = benchmark_model()
print(f"E0 = {model.static.E0:.8f}, omega = {model.omega}")

print("\nF(E0 + i eps) along the ladder:")
for eps in DEFAULT_LADDER:
    ft = f_terms(model, eps)
    print(f"  eps = {eps:<7}  F = {ft.total.real:+.8f} {ft.total.imag:+.8f}i   "
          f"(open channel m=-1: Im = {ft.terms[-1].imag:.8f}, closed m=+1: Im = {ft.terms[1].imag:.2e})")

lim = gamma_limiting(model)
fgr = gamma_fgr(model)
print(f"\nGamma, limiting absorption : {lim.Gamma:.10f}")
print(f"Gamma, eigenfunctions      : {fgr.Gamma:.10f}")
print(f"relative difference        : {abs(lim.Gamma - fgr.Gamma) / lim.Gamma:.2e}")
for c in fgr.channels:
    if c.contribution:
        print(f"channel n = {c.n}: e_n = {c.energy:.6f}, even/odd parts = {np.round(c.parts, 12).tolist()}")

res = resonance_expansion(model, 0.1)
print(f"\nalpha = 0.1: E_alpha = {res.E_alpha.real:.8f} {res.E_alpha.imag:+.3e}i  (lifetime ~ {1 / (0.01 * lim.Gamma):.0f})")
