"""How distinguishable a faulty network is from the ideal one.

The diamond distance equals the fault rate eps, whatever the damping gamma.
"""
import numpy as np

from aqnn import ChannelSpec, diamond_analytic_diagonal, diamond_distance, diamond_lower_bound

for n in (2, 3):
    for eps in (0.1, 0.5, 1.0):
        alpha = -(1 + eps) / 2
        ideal = ChannelSpec.ideal(n, uniform=alpha)
        values = []
        for g in np.linspace(0, eps / (n - 1), 3):
            faulty = ChannelSpec.faulty(n, eps, gamma=g, uniform=alpha)
            values.append(diamond_distance(ideal, faulty).value)
        faulty = ChannelSpec.faulty(n, eps, uniform=alpha)
        print(f"N={n} eps={eps:.1f}  SDP over gamma: {np.round(values, 8)}  "
              f"analytic {diamond_analytic_diagonal(ideal, faulty).value:.8f}  "
              f"lower bound {diamond_lower_bound(ideal, faulty, trials=50):.8f}")
