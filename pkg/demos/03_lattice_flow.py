"""
Successive minima along the diagonal flow
=========================================

Z^3 under (m,n) = (2,1) has an exact answer: log-minima (-t, t/2, t/2).
A random lattice wanders, and its product of minima always sits between
Minkowski's bounds 1/d! and 1.
"""

import math

import numpy as np

from pgnkit import Dims
from pgnkit.lattice_dynamics import (Lattice, identity_lattice, log_minima_trace, random_lattice,
                                     time_grid)

dims = Dims(2, 1)
tr = log_minima_trace(identity_lattice(dims), time_grid(10, 2.5))
for t, row in zip(tr.times, tr.log_minima):
    print(f"t={t:5.1f}  log lambda = {np.round(row, 12)}")

# A generic lattice needs extra digits once the flow runs long: short vectors
# have coefficients of size e^t and binary64 cancels them away.
x = random_lattice(dims, np.random.default_rng(1), max_cond=20)
hi = Lattice(x.basis, dims, dps=50)
tr = log_minima_trace(hi, time_grid(30, 0.5))
prod = tr.minima.prod(axis=1)
print(f"\nrandom lattice over [0,30]: prod lambda in [{prod.min():.4f}, {prod.max():.4f}]"
      f" (bounds [{1 / math.factorial(3):.4f}, 1])")
print("lowest log lambda_1:", round(float(tr.log_minima[:, 0].min()), 4))

# the same trace as CSV, ready for the comparison tools
print("\n" + "\n".join(tr.to_csv().splitlines()[:3]))
