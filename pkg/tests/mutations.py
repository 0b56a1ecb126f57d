"""Single-breakpoint perturbations of valid templates, each aimed at one axiom.

A perturbation aimed at (a) or (b) may break other axioms as a side
effect; what must hold is that the aimed axiom is reported with a witness
located at the perturbed breakpoint.
"""

from dataclasses import dataclass
from fractions import Fraction

from pgnkit.template_core import PiecewisePath


@dataclass(frozen=True)
class Mutation:
    path: PiecewisePath
    axiom: str
    index: int

    def witnessed(self, report) -> bool:
        bps = self.path.breakpoints
        k = self.index
        lo = bps[max(k - 1, 0)]
        hi = bps[min(k + 1, len(bps) - 1)]
        for v in report.for_axiom(self.axiom):
            a, b = v.interval
            if self.axiom == "a" and a < bps[k] < b and v.time == bps[k]:
                return True
            if self.axiom == "b" and v.component == self.path.d and lo <= a and b <= bps[k]:
                return True
            if self.axiom == "c" and a < hi and b > lo:
                return True
        return False


def _replace(path, k, row):
    vals = list(path.values)
    vals[k] = tuple(row)
    return PiecewisePath(path.dims, path.breakpoints, tuple(vals))


def break_order(path, k):
    """Lift ``f_1`` above ``f_d`` at interior breakpoint ``k``."""
    row = list(path.values[k])
    row[0] = row[-1] + 1
    return Mutation(_replace(path, k, row), "a", k)


def break_slope(path, k):
    """Raise ``f_d`` at breakpoint ``k >= 1`` so its incoming slope exceeds ``1/m``."""
    m, n = path.dims.m, path.dims.n
    dt = path.breakpoints[k] - path.breakpoints[k - 1]
    row = list(path.values[k])
    row[-1] += 2 * dt * (Fraction(1, m) + Fraction(1, n))
    return Mutation(_replace(path, k, row), "b", k)


def convexity_candidates(path):
    """Interior breakpoints where ``f_1 < f_2`` and ``f_1`` has a kink."""
    out = []
    sl = path.slopes
    for k in range(1, len(path.breakpoints) - 1):
        v = path.values[k]
        if v[0] < v[1] and sl[k - 1][0] != sl[k][0]:
            out.append(k)
    return out


def break_convexity(path, k):
    """Nudge ``f_1`` at breakpoint ``k`` so its slopes leave ``Z(1)``.

    ``Z(1) = {1/m, -1/n}`` is exactly the pair of slope bounds, so a nudge
    that keeps both neighbouring slopes strictly inside the bounds (and
    ``f_1 < f_2``) breaks only axiom (c).  Returns None when no direction
    has room.
    """
    m, n = path.dims.m, path.dims.n
    lo_s, hi_s = Fraction(-1, n), Fraction(1, m)
    bps, sl = path.breakpoints, path.slopes
    left, right = bps[k] - bps[k - 1], bps[k + 1] - bps[k]
    s_in, s_out = sl[k - 1][0], sl[k][0]
    gap = path.values[k][1] - path.values[k][0]
    for sign in (1, -1):
        if sign > 0:
            room = min(gap, left * (hi_s - s_in), right * (s_out - lo_s))
        else:
            room = min(left * (s_in - lo_s), right * (hi_s - s_out))
        if room > 0:
            row = list(path.values[k])
            row[0] += sign * room / 2
            return Mutation(_replace(path, k, row), "c", k)
    return None
