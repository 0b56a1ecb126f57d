"""Exact piecewise-linear paths, template axioms and sup-norm comparison.

Everything here works over :class:`fractions.Fraction`; no tolerance is
involved anywhere in axiom checking.
"""

from __future__ import annotations

import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Sequence

from .errors import DomainError, InvalidTemplateError

FORMAT_TAG = "pgn-template-v1"


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions, floats (exactly) and ``"p/q"`` strings."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, (int, float, str)):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Dims:
    """Numbers of expanding (``m``) and contracting (``n``) directions."""

    m: int
    n: int

    def __post_init__(self):
        for name in ("m", "n"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise DomainError(f"{name} must be a positive integer, got {v!r}")

    @property
    def d(self) -> int:
        return self.m + self.n


@dataclass(frozen=True)
class PiecewisePath:
    """Continuous piecewise-linear map ``[0, T] -> Q^d``.

    The path is affine between consecutive breakpoints.  ``values[k]`` is the
    value at ``breakpoints[k]``.
    """

    dims: Dims
    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bps = tuple(as_fraction(t) for t in self.breakpoints)
        vals = tuple(tuple(as_fraction(v) for v in row) for row in self.values)
        if len(bps) < 2:
            raise DomainError("a path needs at least two breakpoints")
        if bps[0] != 0:
            raise DomainError(f"first breakpoint must be 0, got {bps[0]}")
        for a, b in zip(bps, bps[1:]):
            if not a < b:
                raise DomainError(f"breakpoints not strictly increasing at {a}, {b}")
        if len(vals) != len(bps):
            raise DomainError("one value row per breakpoint is required")
        d = self.dims.d
        for row in vals:
            if len(row) != d:
                raise DomainError(f"value rows must have length d={d}")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)

    @property
    def d(self) -> int:
        return self.dims.d

    @property
    def horizon(self) -> Fraction:
        return self.breakpoints[-1]

    def __len__(self):
        return len(self.breakpoints)

    @cached_property
    def slopes(self) -> tuple:
        """Per-piece slope vectors; ``slopes[k]`` is the slope on piece ``k``."""
        out = []
        bps, vals = self.breakpoints, self.values
        for k in range(len(bps) - 1):
            dt = bps[k + 1] - bps[k]
            out.append(tuple((b - a) / dt for a, b in zip(vals[k], vals[k + 1])))
        return tuple(out)

    def at(self, t) -> tuple:
        t = as_fraction(t)
        bps = self.breakpoints
        if t < 0 or t > bps[-1]:
            raise DomainError(f"t={t} outside the domain [0, {bps[-1]}]")
        k = bisect_right(bps, t) - 1
        if bps[k] == t:
            return self.values[k]
        dt = t - bps[k]
        return tuple(v + s * dt for v, s in zip(self.values[k], self.slopes[k]))

    def piece_index(self, t) -> int:
        """Index of the piece containing ``t`` (right-continuous convention)."""
        k = bisect_right(self.breakpoints, as_fraction(t)) - 1
        return min(max(k, 0), len(self.breakpoints) - 2)

    def restrict(self, horizon) -> "PiecewisePath":
        T = as_fraction(horizon)
        if T <= 0 or T > self.horizon:
            raise DomainError(f"cannot restrict to [0, {T}] inside [0, {self.horizon}]")
        k = bisect_left(self.breakpoints, T)
        bps = list(self.breakpoints[:k])
        vals = list(self.values[:k])
        bps.append(T)
        vals.append(self.at(T))
        return PiecewisePath(self.dims, tuple(bps), tuple(vals))

    def pieces(self) -> list:
        """Maximal linear pieces as ``(start, end)`` pairs."""
        bps, sl = self.breakpoints, self.slopes
        out = []
        start = bps[0]
        for k in range(len(sl)):
            if k + 1 < len(sl) and sl[k + 1] == sl[k]:
                continue
            out.append((start, bps[k + 1]))
            start = bps[k + 1]
        return out

    def shifted(self, offset) -> "PiecewisePath":
        """Add a constant vector ``offset`` (scalar or d-vector) to every value."""
        if isinstance(offset, (list, tuple)):
            off = tuple(as_fraction(o) for o in offset)
        else:
            off = (as_fraction(offset),) * self.d
        vals = tuple(tuple(v + o for v, o in zip(row, off)) for row in self.values)
        return PiecewisePath(self.dims, self.breakpoints, vals)


def evaluate(path, t) -> tuple:
    """Value of a path (or template) at rational time ``t``."""
    return _as_path(path).at(t)


@lru_cache(maxsize=None)
def _slope_set(j: int, m: int, n: int) -> frozenset:
    out = set()
    for lp in range(0, m + 1):
        lm = j - lp
        if 0 <= lm <= n:
            out.add(Fraction(lp, m) - Fraction(lm, n))
    return frozenset(out)


def slope_set(j: int, dims: Dims) -> frozenset:
    """Admissible slopes ``L+/m - L-/n`` with ``L+ + L- = j``."""
    if not 0 <= j <= dims.d:
        raise DomainError(f"j={j} outside [0, {dims.d}]")
    return _slope_set(j, dims.m, dims.n)


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    axiom: str
    component: int | None
    time: Fraction | None = None
    interval: tuple | None = None
    slope: Fraction | None = None
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def failed_axioms(self) -> frozenset:
        return frozenset(v.axiom for v in self.violations)

    @property
    def passed(self) -> dict:
        failed = self.failed_axioms
        return {ax: ax not in failed for ax in ("a", "b", "c")}

    def for_axiom(self, axiom: str) -> list:
        return [v for v in self.violations if v.axiom == axiom]

    def to_dict(self) -> dict:
        def fmt(x):
            return None if x is None else format_rational(x)

        return {
            "valid": self.ok,
            "passed": self.passed,
            "violations": [
                {
                    "axiom": v.axiom,
                    "component": v.component,
                    "time": fmt(v.time),
                    "interval": None if v.interval is None else [fmt(a) for a in v.interval],
                    "slope": fmt(v.slope),
                    "detail": v.detail,
                }
                for v in self.violations
            ],
        }


def _positive_intervals(times: Sequence[Fraction], h: Sequence[Fraction]) -> list:
    """Maximal intervals where the piecewise-linear ``h`` is strictly positive.

    Interior endpoints are the exact zeros of ``h``; an interval may touch the
    ends of the domain.
    """
    out: list = []
    for k in range(len(times) - 1):
        a, b = times[k], times[k + 1]
        ha, hb = h[k], h[k + 1]
        if ha > 0 and hb > 0:
            lo, hi = a, b
        elif ha > 0:
            lo, hi = a, a + ha / (ha - hb) * (b - a)
        elif hb > 0:
            lo, hi = a + ha / (ha - hb) * (b - a), b
        else:
            continue
        if out and out[-1][1] == lo == a and ha > 0:
            out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return out


def validate_template(path) -> ValidationReport:
    """Check the three template axioms exactly and collect witnesses."""
    path = _as_path(path)
    dims = path.dims
    m, n, d = dims.m, dims.n, dims.d
    bps, vals, slopes = path.breakpoints, path.values, path.slopes
    viol: list[Violation] = []

    # (a) ordering
    for i in range(1, d):
        neg = [vals[k][i - 1] - vals[k][i] for k in range(len(bps))]
        for lo, hi in _positive_intervals(bps, neg):
            inside = [k for k in range(bisect_left(bps, lo), bisect_right(bps, hi))]
            if inside:
                k = max(inside, key=lambda k: neg[k])
                t = bps[k]
            else:
                t = (lo + hi) / 2
            viol.append(Violation("a", i, time=t, interval=(lo, hi),
                                  detail=f"f_{i} > f_{i + 1}"))

    # (b) slope bounds
    lo_s, hi_s = Fraction(-1, n), Fraction(1, m)
    for k, sl in enumerate(slopes):
        for i, s in enumerate(sl, start=1):
            if s < lo_s or s > hi_s:
                viol.append(Violation("b", i, time=bps[k], interval=(bps[k], bps[k + 1]),
                                      slope=s, detail=f"slope of f_{i} outside [-1/n, 1/m]"))

    # (c) convexity and slope sets of partial sums on strict-gap intervals
    partial = [tuple(_cumsum(sl)) for sl in slopes]
    for j in range(1, d + 1):
        zj = slope_set(j, dims)
        if j == d:
            intervals = [(bps[0], bps[-1])]
        else:
            gap = [vals[k][j] - vals[k][j - 1] for k in range(len(bps))]
            intervals = _positive_intervals(bps, gap)
        for lo, hi in intervals:
            k = max(bisect_right(bps, lo) - 1, 0)
            prev = None
            while k < len(slopes) and bps[k] < hi:
                s = partial[k][j - 1]
                if s not in zj:
                    viol.append(Violation("c", j, time=max(bps[k], lo),
                                          interval=(max(bps[k], lo), min(bps[k + 1], hi)),
                                          slope=s, detail=f"partial sum slope not in Z({j})"))
                if prev is not None and s < prev and lo < bps[k]:
                    viol.append(Violation("c", j, time=bps[k], interval=(lo, hi),
                                          slope=s, detail=f"partial sum {j} not convex"))
                prev = s
                k += 1
    return ValidationReport(tuple(viol))


def _cumsum(xs):
    acc = Fraction(0)
    for x in xs:
        acc += x
        yield acc


# --------------------------------------------------------------------------
# templates


@dataclass(frozen=True)
class Template:
    """A path together with its (lazily computed) axiom report."""

    path: PiecewisePath

    @cached_property
    def report(self) -> ValidationReport:
        return validate_template(self.path)

    @property
    def ok(self) -> bool:
        return self.report.ok

    def check(self) -> "Template":
        if not self.report.ok:
            first = self.report.violations[0]
            raise InvalidTemplateError(
                f"axiom ({first.axiom}) violated at t={first.time}: {first.detail}")
        return self

    @property
    def dims(self) -> Dims:
        return self.path.dims

    @property
    def horizon(self) -> Fraction:
        return self.path.horizon

    def at(self, t):
        return self.path.at(t)

    def restrict(self, horizon) -> "Template":
        return Template(self.path.restrict(horizon))


@dataclass(frozen=True)
class LinkedTemplate:
    """Template with anchor times ``0 = b_1 < b_2 < ...`` where it vanishes.

    ``generator``, when present, rebuilds the same family at any horizon; it
    lets transformers request more source material than was materialized.
    """

    template: Template
    anchors: tuple
    generator: Callable | None = field(default=None, compare=False, repr=False)
    provenance: dict | None = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        anchors = tuple(as_fraction(a) for a in self.anchors)
        if not anchors or anchors[0] != 0:
            raise DomainError("anchors must start at 0")
        for a, b in zip(anchors, anchors[1:]):
            if not a < b:
                raise DomainError("anchors must be strictly increasing")
        if anchors[-1] > self.template.horizon:
            raise DomainError("anchor beyond the template domain")
        zero = (Fraction(0),) * self.template.dims.d
        for a in anchors:
            if self.template.at(a) != zero:
                raise DomainError(f"template is not zero at anchor {a}")
        object.__setattr__(self, "anchors", anchors)

    @property
    def path(self) -> PiecewisePath:
        return self.template.path

    @property
    def dims(self) -> Dims:
        return self.template.dims

    @property
    def horizon(self) -> Fraction:
        return self.template.horizon

    def at(self, t):
        return self.template.at(t)

    def restrict(self, horizon) -> "LinkedTemplate":
        T = as_fraction(horizon)
        prov = dict(self.provenance or {})
        if "horizon" in prov:
            prov["horizon"] = format_rational(T)
        return LinkedTemplate(self.template.restrict(T),
                              tuple(a for a in self.anchors if a <= T),
                              self.generator, prov or None)


def _as_path(obj) -> PiecewisePath:
    if isinstance(obj, PiecewisePath):
        return obj
    if isinstance(obj, Template):
        return obj.path
    if isinstance(obj, LinkedTemplate):
        return obj.template.path
    raise TypeError(f"expected a path or template, got {type(obj).__name__}")


def sup_distance(f, g, window=None) -> Fraction:
    """Exact ``sup_{t in window} max_i |f_i(t) - g_i(t)|``.

    Both arguments are affine between breakpoints, so the supremum is
    attained on the merged breakpoint set.
    """
    f, g = _as_path(f), _as_path(g)
    if f.d != g.d:
        raise DomainError(f"dimension mismatch: {f.d} vs {g.d}")
    if window is None:
        window = (Fraction(0), min(f.horizon, g.horizon))
    ta, tb = (as_fraction(w) for w in window)
    if not 0 <= ta <= tb or tb > f.horizon or tb > g.horizon:
        raise DomainError(f"window [{ta}, {tb}] outside a domain")
    times = {ta, tb}
    for p in (f, g):
        times.update(p.breakpoints[bisect_right(p.breakpoints, ta):bisect_left(p.breakpoints, tb)])
    best = Fraction(0)
    for t in times:
        for a, b in zip(f.at(t), g.at(t)):
            best = max(best, abs(a - b))
    return best


# --------------------------------------------------------------------------
# JSON


def template_to_dict(obj, provenance: dict | None = None) -> dict:
    path = _as_path(obj)
    out = {
        "format": FORMAT_TAG,
        "m": path.dims.m,
        "n": path.dims.n,
        "breakpoints": [format_rational(t) for t in path.breakpoints],
        "values": [[format_rational(v) for v in row] for row in path.values],
    }
    if isinstance(obj, LinkedTemplate):
        out["anchors"] = [format_rational(a) for a in obj.anchors]
        provenance = provenance or obj.provenance
    if provenance:
        out["provenance"] = provenance
    return out


def template_from_dict(data: dict):
    """Inverse of :func:`template_to_dict`; returns Template or LinkedTemplate."""
    if data.get("format") != FORMAT_TAG:
        raise DomainError(f"unsupported template format {data.get('format')!r}")
    try:
        dims = Dims(int(data["m"]), int(data["n"]))
        path = PiecewisePath(dims, tuple(Fraction(t) for t in data["breakpoints"]),
                             tuple(tuple(Fraction(v) for v in row) for row in data["values"]))
    except (KeyError, TypeError, ZeroDivisionError) as exc:
        raise DomainError(f"malformed template JSON: {exc}") from exc
    template = Template(path)
    if "anchors" in data:
        return LinkedTemplate(template, tuple(Fraction(a) for a in data["anchors"]),
                              provenance=data.get("provenance"))
    return template


def dumps_template(obj, provenance: dict | None = None) -> str:
    return json.dumps(template_to_dict(obj, provenance), indent=1) + "\n"


def loads_template(text: str):
    return template_from_dict(json.loads(text))


def zero_path(dims: Dims, horizon) -> PiecewisePath:
    zero = (Fraction(0),) * dims.d
    return PiecewisePath(dims, (Fraction(0), as_fraction(horizon)), (zero, zero))


def path_from_samples(dims: Dims, times: Iterable, rows: Iterable) -> PiecewisePath:
    """Interpolating path through sample points (floats converted exactly)."""
    return PiecewisePath(dims, tuple(as_fraction(t) for t in times),
                         tuple(tuple(as_fraction(v) for v in r) for r in rows))
