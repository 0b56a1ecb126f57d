"""Score of a template: equality intervals, M+/M-, S+/S-, the pair count
delta and its Cesaro average.

Equality structure on a linear piece is read off exactly at the piece
midpoint together with the slopes, so no tie-breaking tolerance exists.
delta(f, t) at a breakpoint takes the value of the piece to its right; this
never matters for integrals.

The reference text calls M+ and M- "positive integers", but its own worked
example has M+ = 0.  They are treated as nonnegative integers here.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .template_core import Dims, as_fraction, format_rational, _as_path
from .errors import DomainError, InvalidTemplateError


@dataclass(frozen=True)
class EqualityInterval:
    """Integer block ``(p, q]`` of components equal on ``piece``."""

    p: int
    q: int
    piece: tuple
    slope_sum: Fraction

    @property
    def size(self) -> int:
        return self.q - self.p


@dataclass(frozen=True)
class ScoreSegment:
    piece: tuple
    intervals: tuple
    m_plus: tuple
    m_minus: tuple
    s_plus: tuple
    s_minus: tuple
    delta: int

    @property
    def length(self) -> Fraction:
        return self.piece[1] - self.piece[0]


@dataclass(frozen=True)
class ScoreReport:
    dims: Dims
    horizon: Fraction
    segments: tuple
    average: Fraction
    target: Fraction
    liminf_estimate: Fraction

    @property
    def abs_error(self) -> Fraction:
        return abs(self.average - self.target)

    def to_dict(self) -> dict:
        return {
            "m": self.dims.m,
            "n": self.dims.n,
            "horizon": format_rational(self.horizon),
            "segments": [
                {"t_start": format_rational(s.piece[0]),
                 "t_end": format_rational(s.piece[1]),
                 "delta": s.delta,
                 "S_plus": list(s.s_plus)}
                for s in self.segments
            ],
            "average": format_rational(self.average),
            "target": format_rational(self.target),
            "abs_error": format_rational(self.abs_error),
            "liminf_estimate": format_rational(self.liminf_estimate),
            "liminf_note": "finite-horizon estimate: min of averages at piece "
                           "boundaries in [T/2, T]; not a certified liminf",
        }


def closed_form_delta(dims: Dims) -> Fraction:
    """``mn - mn/(m+n)``."""
    mn = dims.m * dims.n
    return mn - Fraction(mn, dims.d)


def _check_piece(path, piece) -> tuple:
    a, b = (as_fraction(x) for x in piece)
    if not a < b:
        raise DomainError(f"degenerate piece [{a}, {b}]")
    if a < 0 or b > path.horizon:
        raise DomainError(f"piece [{a}, {b}] outside the domain [0, {path.horizon}]")
    k = path.piece_index(a)
    bps = path.breakpoints
    j = k
    while bps[j + 1] < b:
        j += 1
        if path.slopes[j] != path.slopes[k]:
            raise DomainError(f"template is not linear on [{a}, {b}]")
    return a, b, k


def _runs(start: tuple, slopes: tuple) -> tuple:
    """Boundaries of runs of components that coincide on a piece.

    Two affine components coincide on an open interval iff they agree at one
    interior point and have the same slope.
    """
    cuts = [i for i in range(1, len(start))
            if start[i] != start[i - 1] or slopes[i] != slopes[i - 1]]
    return tuple(cuts)


def _groups(cuts: tuple, slopes: tuple) -> list:
    """Runs ``(p, q, slope_sum)`` from the cut positions."""
    edges = (0,) + cuts + (len(slopes),)
    return [(p, q, sum(slopes[p:q], Fraction(0))) for p, q in zip(edges, edges[1:])]


def equality_intervals(template, piece) -> list:
    path = _as_path(template)
    a, b, k = _check_piece(path, piece)
    mid = path.at((a + b) / 2)
    sl = path.slopes[k]
    return [EqualityInterval(p, q, (a, b), s) for p, q, s in _groups(_runs(mid, sl), sl)]


def _solve_m(size: int, slope_sum: Fraction, m: int, n: int) -> tuple:
    # M+ + M- = size, M+/m - M-/n = slope_sum
    mp = (slope_sum + Fraction(size, n)) * Fraction(m * n, m + n)
    mm = size - mp
    if mp.denominator != 1 or mp < 0 or mm < 0:
        raise InvalidTemplateError(
            f"M+ = {mp}, M- = {mm} are not nonnegative integers "
            f"(block size {size}, slope sum {slope_sum})")
    return int(mp), int(mm)


def m_plus_minus(template, interval: EqualityInterval) -> tuple:
    """Solve for ``(M+, M-)`` on an equality interval."""
    dims = _as_path(template).dims
    return _solve_m(interval.size, interval.slope_sum, dims.m, dims.n)


@lru_cache(maxsize=4096)
def _structure(cuts: tuple, slopes: tuple, m: int, n: int) -> tuple:
    d = len(slopes)
    s_plus = []
    mps, mms = [], []
    for p, q, s in _groups(cuts, slopes):
        mp, mm = _solve_m(q - p, s, m, n)
        mps.append(mp)
        mms.append(mm)
        s_plus.extend(range(p + 1, p + mp + 1))
    members = set(s_plus)
    s_minus = [i for i in range(1, d + 1) if i not in members]
    delta = count_pairs(s_plus, s_minus)
    return tuple(mps), tuple(mms), tuple(s_plus), tuple(s_minus), delta


def count_pairs(s_plus, s_minus) -> int:
    """``#{(i+, i-) : i+ < i-}`` by direct pair enumeration."""
    return sum(1 for i in s_plus for j in s_minus if i < j)


def s_plus(template, piece) -> tuple:
    """``(S+, S-)`` as sorted tuples partitioning ``1..d``."""
    path = _as_path(template)
    return _piece_structure(path, piece)[2:4]


def delta_on_piece(template, piece) -> int:
    return _piece_structure(_as_path(template), piece)[4]


def _piece_structure(path, piece) -> tuple:
    a, b, k = _check_piece(path, piece)
    sl = path.slopes[k]
    return _structure(_runs(path.at((a + b) / 2), sl), sl, path.dims.m, path.dims.n)


def _piece_key(path, k: int) -> tuple:
    # the start value identifies the affine function together with the slope
    sl = path.slopes[k]
    return _runs(path.values[k], sl), sl


class DeltaProfile:
    """Cumulative integral of ``delta(f, t)`` over the breakpoints of a path.

    Built once in a single pass; ``integral`` and ``average`` are then
    ``O(log K)`` lookups.
    """

    def __init__(self, template):
        path = _as_path(template)
        self.path = path
        m, n = path.dims.m, path.dims.n
        self.deltas = [_structure(*_piece_key(path, k), m, n)[4]
                       for k in range(len(path.breakpoints) - 1)]
        cum = [Fraction(0)]
        bps = path.breakpoints
        for k, dl in enumerate(self.deltas):
            cum.append(cum[-1] + dl * (bps[k + 1] - bps[k]))
        self.cumulative = cum

    def integral(self, T) -> Fraction:
        T = as_fraction(T)
        bps = self.path.breakpoints
        if T < 0 or T > bps[-1]:
            raise DomainError(f"T={T} outside the domain [0, {bps[-1]}]")
        k = bisect_right(bps, T) - 1
        if bps[k] == T:
            return self.cumulative[k]
        return self.cumulative[k] + self.deltas[k] * (T - bps[k])

    def average(self, T) -> Fraction:
        T = as_fraction(T)
        if T <= 0:
            raise DomainError(f"T must be positive, got {T}")
        return self.integral(T) / T

    def liminf_estimate(self, T) -> Fraction:
        """Min of running averages at breakpoints in ``[T/2, T]``, and at ``T``."""
        T = as_fraction(T)
        best = self.average(T)
        for t, acc in zip(self.path.breakpoints, self.cumulative):
            if T / 2 <= t <= T and t > 0:
                best = min(best, acc / t)
        return best


def average_delta(template, T) -> Fraction:
    """Exact ``(1/T) * integral_0^T delta(f, t) dt``."""
    return DeltaProfile(template).average(T)


def score_template(template, T=None) -> ScoreReport:
    """Full score report on ``[0, T]`` (whole domain by default)."""
    path = _as_path(template)
    T = path.horizon if T is None else as_fraction(T)
    if T <= 0 or T > path.horizon:
        raise DomainError(f"T={T} outside (0, {path.horizon}]")
    dims = path.dims
    segs = []
    for a, b in path.pieces():
        if a >= T:
            break
        k = path.piece_index(a)
        cuts, sl = _piece_key(path, k)
        mps, mms, sp, sm, dl = _structure(cuts, sl, dims.m, dims.n)
        piece = (a, min(b, T))
        ivs = tuple(EqualityInterval(p, q, piece, s) for p, q, s in _groups(cuts, sl))
        segs.append(ScoreSegment(piece, ivs, mps, mms, sp, sm, dl))
    prof = DeltaProfile(path)
    return ScoreReport(dims, T, tuple(segs), prof.average(T), closed_form_delta(dims),
                       prof.liminf_estimate(T))
