"""How often does a random drive fail to ionize the bound state?

Each trial draws smooth compactly supported bumps for the cos and sin parts
of a first-harmonic drive and computes Gamma from the eigenfunction route.
A vanishing width needs the coupling to be orthogonal to both scattering
states at e_1, which random drives essentially never are.
"""
import numpy as np

from floquet_resonance import benchmark_static, genericity_sample, random_bump_drive

rep = genericity_sample(benchmark_static(), np.pi, random_bump_drive(), trials=200, seed=1)
g = np.asarray(rep.gammas)
print(f"fraction with Gamma > {rep.threshold:g}: {rep.fraction:.3f}")
print(f"Gamma quantiles (5%, 50%, 95%): {np.quantile(g, [0.05, 0.5, 0.95])}")
