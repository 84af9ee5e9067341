"""Where the channel families are physical.

Bisection on the Choi spectrum recovers the closed-form uniform-alpha
ranges, and a small grid shows how far the shift lambda can go.
"""
import numpy as np

from aqnn import ChannelSpec, is_cptp


def edge(ok, bad, good, tol=1e-10):
    while abs(good - bad) > tol:
        mid = 0.5 * (bad + good)
        bad, good = (bad, mid) if ok(mid) else (mid, good)
    return good


for n in (2, 3, 5):
    ideal = edge(lambda a: is_cptp(ChannelSpec.ideal(n, uniform=a)).ok, -5.0, -0.5)
    print(f"N={n}: ideal lower edge {ideal:+.8f}  closed form {-n / (n - 1):+.8f}")
    eps = 0.3
    ok = lambda a: is_cptp(ChannelSpec.faulty(n, eps, uniform=a)).ok
    lo, hi = edge(ok, -5.0, -0.65), edge(ok, 0.5, -0.65)
    print(f"     faulty eps={eps}: [{lo:+.8f}, {hi:+.8f}]  closed form "
          f"[{(eps - n) / (n - 1):+.8f}, {-eps:+.8f}]")

print("\nlargest admissible |lambda| for N=3, eps=0.3, alpha=-0.6:")
for gamma in (0.0, 0.1, 0.15):
    lam = edge(lambda x: is_cptp(ChannelSpec.faulty(3, 0.3, gamma=gamma, lambda_shift=x, uniform=-0.6)).ok,
               1.0, 1e-9)
    print(f"  gamma={gamma:.2f}: |lambda| <= {lam:.6f}")
