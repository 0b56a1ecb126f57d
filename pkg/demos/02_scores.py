"""
Scores of explicit templates
============================

The score is the long-run average of an integer pair count.  On the
explicit families it hits the closed form mn - mn/(m+n) at every anchor,
and the running average in between stays within a shrinking band.
"""

from pgnkit import Dims, build_fk, closed_form_delta, score_template
from pgnkit.score_engine import DeltaProfile

for m, n in [(1, 1), (2, 1), (3, 2)]:
    dims = Dims(m, n)
    target = closed_form_delta(dims)
    lt = build_fk(dims, 2, 3000)
    prof = DeltaProfile(lt)
    at_anchors = {prof.average(c) for c in lt.anchors[1:]}
    print(f"(m,n)=({m},{n}) target {target}: averages at anchors {sorted(map(str, at_anchors))}")

# a full report on the first block of (2,1)
rep = score_template(build_fk(Dims(2, 1), 0, 9), 3)
print("\nsegments on [0,3]:")
for s in rep.segments:
    print(f"  piece {s.piece[0]}..{s.piece[1]}  S+ = {list(s.s_plus)}  delta = {s.delta}")
print("average", rep.average, "abs error", rep.abs_error)

# between anchors the average wanders, but less and less
lt = build_fk(Dims(2, 1), 1, 20000)
prof = DeltaProfile(lt)
for T in (100, 1000, 10000, 20000):
    print(f"T={T:>6}: average {float(prof.average(T)):.5f}, "
          f"liminf proxy {float(prof.liminf_estimate(T)):.5f}")
