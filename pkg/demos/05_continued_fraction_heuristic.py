"""
A continued fraction that follows f^(1) (heuristic)
===================================================

For (m,n) = (1,1), the orbit of x_theta dips once per partial quotient.
A quotient a produces a dip of depth about (log a)/2 that lasts about log a.
Block p of f^(1) has depth p and length 2p, so quotients a_p ~ e^{2p}
should make the orbit shadow f^(1).  This is a finite-horizon experiment,
not a construction with a proof; bounded window sups are evidence only.
"""

import math

from pgnkit import Dims, build_f1
from pgnkit.lattice_dynamics import (compare_trace_to_template, log_minima_trace,
                                     make_lattice_from_A, theta_from_partial_quotients, time_grid)

T = 90
f = build_f1(Dims(1, 1), T)

shadow = [round(math.exp(2 * p)) for p in range(1, 12)]
golden = [1] * 200
for name, quotients in [("a_p = e^{2p}", shadow), ("golden ratio", golden)]:
    theta = theta_from_partial_quotients(quotients, dps=150)
    x = make_lattice_from_A([[theta]], dps=150)
    cmp = compare_trace_to_template(log_minima_trace(x, time_grid(T, 0.1)), f, window=10)
    sups = [f"{s:.2f}" for _, _, s in cmp.window_sups[:-1]]
    print(f"{name:>13}: window sups {' '.join(sups)}")

print(f"\nbounded sups for the first, growing for the second ({cmp.label})")
