"""The explicit templates: the standard block, the 1-divergent family and
the interval-replay operator that lifts a linked template one divergence
level up.

Infinite templates are materialized on ``[0, T]``.  Anchor lists only hold
genuine zeros ``<= T``; a partial last interval stays in the path.
"""

from __future__ import annotations

from bisect import bisect_left
from fractions import Fraction
from functools import partial

from .template_core import (Dims, LinkedTemplate, PiecewisePath, Template, as_fraction,
                            format_rational)
from .errors import DomainError


def _block_peak(dims: Dims) -> tuple:
    m, n, d = dims.m, dims.n, dims.d
    return (Fraction(-1),) + (Fraction(1, m + n - 1),) * (d - 1)


def standard_block(dims: Dims) -> Template:
    """The block ``g`` on ``[0, m+n]``: one dip of ``f_1`` balanced by the rest.

    ``g_1`` falls with slope ``-1/n`` to ``-1`` at ``t = n`` and climbs back at
    slope ``1/m``; the other components share the compensating tent.
    """
    zero = (Fraction(0),) * dims.d
    path = PiecewisePath(dims, (Fraction(0), Fraction(dims.n), Fraction(dims.d)),
                         (zero, _block_peak(dims), zero))
    return Template(path)


def f1_anchors(dims: Dims, horizon) -> list:
    """Anchors ``b_p = d p (p-1) / 2`` not exceeding ``horizon``."""
    T = as_fraction(horizon)
    out, p = [], 1
    while True:
        b = Fraction(dims.d * p * (p - 1), 2)
        if b > T:
            return out
        out.append(b)
        p += 1


def phi_anchors(source_anchors, horizon) -> list:
    """Anchors of the replayed family, ``c_{q+1} = c_q + b_{q+1}``.

    ``source_anchors`` must list the source anchors in order; the output
    stops before the first ``c`` exceeding ``horizon`` or when the source
    runs out.
    """
    T = as_fraction(horizon)
    out = [Fraction(0)]
    for b in source_anchors[1:]:
        c = out[-1] + b
        if c > T:
            break
        out.append(c)
    return out


def _truncate(bps: list, vals: list, dims: Dims, T: Fraction) -> PiecewisePath:
    path = PiecewisePath(dims, tuple(bps), tuple(vals))
    if path.horizon == T:
        return path
    return path.restrict(T)


def build_f1(dims: Dims, horizon) -> LinkedTemplate:
    """The 1-divergent linked template on ``[0, horizon]``.

    Block ``p`` lives on ``[b_p, b_{p+1}]`` (length ``p d``) and is ``g``
    stretched by ``p`` in time and scaled by ``p`` in value, so slopes match
    those of ``g``.
    """
    T = as_fraction(horizon)
    if T <= 0:
        raise DomainError(f"horizon must be positive, got {T}")
    peak = _block_peak(dims)
    zero = (Fraction(0),) * dims.d
    bps, vals = [Fraction(0)], [zero]
    p = 1
    while bps[-1] < T:
        b = bps[-1]
        bps += [b + p * dims.n, b + p * dims.d]
        vals += [tuple(p * v for v in peak), zero]
        p += 1
    path = _truncate(bps, vals, dims, T)
    return LinkedTemplate(
        Template(path), tuple(f1_anchors(dims, T)),
        generator=partial(build_f1, dims),
        provenance={"builder": "f1", "m": dims.m, "n": dims.n, "k": 0,
                    "horizon": format_rational(T)})


def _source_for(lt: LinkedTemplate, T: Fraction) -> LinkedTemplate:
    if lt.horizon >= T:
        return lt
    if lt.generator is not None:
        return lt.generator(T)
    return lt


def phi(lt: LinkedTemplate, horizon) -> LinkedTemplate:
    """Replay a linked template over nested, lengthening interval unions.

    The first new interval copies the first source interval; interval
    ``q + 1`` starts at ``c_{q+1}`` and replays the source on
    ``[0, b_{q+2}]``, i.e. on the union of the first ``q + 1`` source
    intervals.  Source material on ``[0, horizon]`` always suffices.
    """
    T = as_fraction(horizon)
    if T <= 0:
        raise DomainError(f"horizon must be positive, got {T}")
    src = _source_for(lt, T)
    sb, sv, sa = src.path.breakpoints, src.path.values, src.anchors
    dims = src.dims

    ss = src.path.slopes
    bps, vals, slopes = [Fraction(0)], [sv[0]], []
    c, q = Fraction(0), 1
    while c < T:
        # interval q replays the source on [0, b_{q+1}]
        if q < len(sa):
            length = sa[q]
        elif T - c <= src.horizon:
            length = None  # next source anchor is beyond what we need
        else:
            raise DomainError(
                f"source linked template on [0, {src.horizon}] cannot supply "
                f"the replay needed for horizon {T}")
        end = T - c if length is None else min(length, T - c)
        k = bisect_left(sb, end)
        seg_b = list(sb[1:k])
        seg_v = list(sv[1:k])
        seg_b.append(end)
        seg_v.append(sv[k] if k < len(sb) and sb[k] == end else src.path.at(end))
        bps += [c + t for t in seg_b]
        vals += seg_v
        slopes += ss[:k]
        if length is None or length > T - c:
            break
        c += length
        q += 1
    path = PiecewisePath(dims, tuple(bps), tuple(vals))
    # replay keeps source slopes piece by piece
    path.__dict__["slopes"] = tuple(slopes)
    prov = dict(src.provenance or {})
    prov = {"builder": "phi", "m": dims.m, "n": dims.n,
            "k": int(prov.get("k", 0)) + 1, "horizon": format_rational(T)}
    gen = partial(_phi_regen, lt.generator) if lt.generator is not None else None
    return LinkedTemplate(Template(path), tuple(phi_anchors(sa, T)),
                          generator=gen, provenance=prov)


def _phi_regen(source_generator, horizon):
    return phi(source_generator(as_fraction(horizon)), horizon)


def build_fk(dims: Dims, k: int, horizon) -> LinkedTemplate:
    """``k`` applications of :func:`phi` to :func:`build_f1`.

    ``k = 0`` returns the 1-divergent family itself; ``k >= 1`` gives the
    ``k``-fold replay, which the induction shows is ``k``-divergent.
    """
    if isinstance(k, bool) or not isinstance(k, int) or k < 0:
        raise DomainError(f"k must be a nonnegative integer, got {k!r}")
    lt = build_f1(dims, horizon)
    for _ in range(k):
        lt = phi(lt, horizon)
    return lt


def anchor_sequence(dims: Dims, k: int, count: int) -> list:
    """First ``count`` anchors of the level-``k`` family, without building paths."""
    anchors = [Fraction(dims.d * p * (p - 1), 2) for p in range(1, count + 1)]
    for _ in range(k):
        nxt = [Fraction(0)]
        for b in anchors[1:]:
            nxt.append(nxt[-1] + b)
        anchors = nxt
    return anchors


def interval_ratio(anchors, p: int) -> Fraction:
    """``length(J_1 u ... u J_{p-1}) / length(J_1 u ... u J_p)`` (1-based ``p``)."""
    return anchors[p - 1] / anchors[p]
