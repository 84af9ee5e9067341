"""Stored memories as attractors.

An ideal network leaves every incoherent state alone and wipes coherence
step by step. Iterating it drives any input to its dephased version, which
is also the incoherent state closest to the input in relative entropy.
"""
import numpy as np

from aqnn import ChannelSpec, c_l1, closest_attractor, iterate, random_density, relative_entropy

spec = ChannelSpec.ideal(4, uniform=-0.4)
memory = np.diag([0.1, 0.2, 0.3, 0.4])
print("memory is stationary:", np.allclose(iterate(spec, memory, 1), memory))

rho = random_density(4, seed=7)
for r in (0, 1, 5, 20, 60):
    print(f"r={r:3d}  C_l1 = {c_l1(iterate(spec, rho, r)):.3e}")

attractor, c_re = closest_attractor(rho)
print("converged to the dephased state:", np.allclose(iterate(spec, rho, 200), attractor, atol=1e-10))
print(f"S(rho || attractor) = {relative_entropy(rho, attractor):.6f} = C_re = {c_re:.6f}")
