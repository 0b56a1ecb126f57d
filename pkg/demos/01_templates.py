"""
Building and checking templates
===============================

A template is a piecewise-linear path in R^d that behaves like the
log-minima of a lattice under the diagonal flow.  Everything here is exact
rational arithmetic.
"""

from fractions import Fraction

from pgnkit import Dims, build_f1, build_fk, standard_block, validate_template
from pgnkit.template_core import PiecewisePath

dims = Dims(2, 1)

# The building block: one dip of component 1 balanced by the others.
g = standard_block(dims)
print("block breakpoints:", [str(t) for t in g.path.breakpoints])
for t, row in zip(g.path.breakpoints, g.path.values):
    print(f"  t={t}:", [str(v) for v in row])

# f^(1) glues rescaled copies end to end; it returns to zero at each anchor.
f1 = build_f1(dims, 18)
print("\nf^(1) anchors:", [str(a) for a in f1.anchors])
print("f^(1)(5) =", [str(v) for v in f1.at(5)])

# Each level replays the previous one over longer stretches.
for k in range(4):
    lt = build_fk(dims, k, 200)
    print(f"level k={k}: {len(lt.path.breakpoints)} breakpoints, first anchors",
          [str(a) for a in lt.anchors[:5]])

# Validation names the axiom that fails and where.
bad = PiecewisePath(Dims(1, 1), (0, 1, 2), ((-3, 3), (-2, 2), (-3, 3)))
report = validate_template(bad)
print("\nvalid?", report.ok, "failed:", sorted(report.failed_axioms))
for v in report.violations:
    print(" ", v.axiom, "component", v.component, "at t =", v.time, "-", v.detail)

print("\nexact arithmetic throughout:", type(f1.at(Fraction(7, 3))[0]).__name__)
