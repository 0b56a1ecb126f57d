"""
Badly approximable versus fast-approximable numbers
===================================================

x_theta is the lattice u_theta Z^2.  For the golden ratio the orbit never
goes far from the origin; for theta with huge partial quotients it dips
deep and often, spending less and less time above a fixed height.  The
Dirichlet quantity S(Q) tells the same story from the number-theory side.
"""

import numpy as np

from pgnkit.lattice_dynamics import (make_lattice_from_A, occupation_fraction, singularity_probe,
                                     theta_from_partial_quotients)

golden = theta_from_partial_quotients([1] * 200, dps=100)
fast = theta_from_partial_quotients([2 ** j for j in range(1, 12)], dps=120)

for name, theta, dps in [("golden", golden, 100), ("2^j quotients", fast, 120)]:
    x = make_lattice_from_A([[theta]], dps=dps)
    fr = [occupation_fraction(x, T, -1.0, 0.05).fraction for T in (10, 50)]
    print(f"{name:>14}: time fraction with log lambda_1 >= -1: T=10 {fr[0]:.3f}, T=50 {fr[1]:.3f}")

print("\nS(Q) = Q min_{q<=Q} <q theta>")
for name, theta in [("golden", golden), ("2^j quotients", fast)]:
    p = singularity_probe(theta, 40000, num=9)
    print(f"{name:>14}:", " ".join(f"{s:.3f}" for s in p.S))

# S is not monotone for the second number: it drops at each convergent
# denominator and recovers just before the next one
q = [1, 2]
for a in [4, 8, 16]:
    q.append(a * q[-1] + q[-2])
p = singularity_probe(fast, q[-1], num=None)
print("at convergent denominators", q[1:], ":", np.round(p.S[np.array(q[1:]) - 1], 4))
