"""Unimodular lattices under the diagonal flow and their successive minima.

Norm is the sup norm throughout.  Lattices are binary64 by default; pass
``dps`` to carry the basis as mpmath numbers with that many decimal digits.
High precision matters for lattices like ``x_theta`` whose flowed basis
suffers catastrophic cancellation after moderate times (around t = 14 to 18
for d = 2 in binary64).  Binary64 minima come with a forward error bound;
when it exceeds a relative 1e-6 the computation stops with InvariantError
rather than returning plausible-looking noise.

Successive minima come from a candidate set that provably contains a
spanning set at every radius.  For balanced bases that set is a coefficient
box around an LLL-reduced basis.  When the reduced vectors span many
decades (any long flow) the box would explode, so the short sublattice is
split off and each of its cosets contributes only its own minimum plus any
vectors shorter than the short basis vectors.  Reported norms are always
recomputed from the original basis, so the fast path and the brute-force
oracle produce bit-identical values.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .template_core import Dims, _as_path
from .errors import BudgetExceededError, DomainError, FlowRangeError, InvariantError

DEFAULT_BUDGET = 10**7
DEFAULT_DT = 0.05
DEFAULT_HORIZON = 50.0
_EXP_LIMIT = 700.0
_BOX_SLACK = 1e-7
_UNIT_ROUNDOFF = 2.0**-53
_ROUNDING_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class Lattice:
    """Lattice generated by the columns of ``basis``."""

    basis: np.ndarray
    dims: Dims
    dps: int | None = None
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        d = self.dims.d
        if self.dps is None:
            B = np.array(self.basis, dtype=float)
        else:
            with mpmath.workdps(self.dps):
                B = np.array([[_to_mpf(v) for v in row] for row in np.asarray(self.basis, dtype=object)],
                             dtype=object)
        if B.shape != (d, d):
            raise DomainError(f"basis must be {d}x{d}, got {B.shape}")
        object.__setattr__(self, "basis", B)
        if self.check:
            det = self.det()
            if not abs(abs(det) - 1.0) <= 1e-9:
                raise DomainError(f"basis is not unimodular: det = {det!r}")

    @property
    def d(self) -> int:
        return self.dims.d

    def det(self) -> float:
        B = self.basis
        if self.dps is None:
            return float(np.linalg.det(np.asarray(B, dtype=float)))
        with mpmath.workdps(self.dps):
            return float(mpmath.det(mpmath.matrix(np.asarray(B).tolist())))

    def to_dict(self) -> dict:
        return {"m": self.dims.m, "n": self.dims.n,
                "basis": [[float(v) for v in row] for row in self.basis]}

    @classmethod
    def from_dict(cls, data: dict, dps: int | None = None) -> "Lattice":
        try:
            dims = Dims(int(data["m"]), int(data["n"]))
            basis = np.array(data["basis"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed lattice JSON: {exc}") from exc
        return cls(basis, dims, dps)


def _to_mpf(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    if isinstance(v, str):
        return mpmath.mpf(v)
    return mpmath.mpf(v)


def make_lattice_from_A(A, dims: Dims | None = None, dps: int | None = None) -> Lattice:
    """``x_A = u_A Z^d`` with ``u_A = [[I_m, A], [0, I_n]]``."""
    A = np.array(A, dtype=object if dps else float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    m, n = A.shape
    dims = dims or Dims(m, n)
    if (dims.m, dims.n) != (m, n):
        raise DomainError(f"A has shape {A.shape}, expected ({dims.m}, {dims.n})")
    d = dims.d
    if dps:
        with mpmath.workdps(dps):
            B = np.array([[mpmath.mpf(int(i == j)) for j in range(d)] for i in range(d)], dtype=object)
            for i in range(m):
                for j in range(n):
                    B[i, m + j] = _to_mpf(A[i, j])
    else:
        B = np.eye(d)
        B[:m, m:] = A
    return Lattice(B, dims, dps, check=False)


def identity_lattice(dims: Dims, dps: int | None = None) -> Lattice:
    return make_lattice_from_A(np.zeros((dims.m, dims.n)), dims, dps)


def flow_factors(dims: Dims, t, dps: int | None = None) -> list:
    m, n = dims.m, dims.n
    if dps is None:
        up, down = math.exp(t / m), math.exp(-t / n)
    else:
        with mpmath.workdps(dps):
            tt = mpmath.mpf(t)
            up, down = mpmath.exp(tt / m), mpmath.exp(-tt / n)
    return [up] * m + [down] * n


def apply_flow(x: Lattice, t) -> Lattice:
    """``a_t x`` with ``a_t = diag(e^{t/m} (m times), e^{-t/n} (n times))``."""
    if x.dps is None:
        safe = _EXP_LIMIT * min(x.dims.m, x.dims.n)
        if abs(t) > safe:
            raise FlowRangeError(f"|t| = {abs(t)} overflows binary64 scaling; "
                                 f"safe bound is {safe}", safe_bound=safe)
        f = np.array(flow_factors(x.dims, t))
        return Lattice(x.basis * f[:, None], x.dims, None, check=False)
    with mpmath.workdps(x.dps):
        f = flow_factors(x.dims, t, x.dps)
        B = np.array([[f[i] * v for v in row] for i, row in enumerate(x.basis)], dtype=object)
    return Lattice(B, x.dims, x.dps, check=False)


# --------------------------------------------------------------------------
# reduction and enumeration


def _dot(u, v):
    s = u[0] * v[0]
    for a, b in zip(u[1:], v[1:]):
        s += a * b
    return s


def _gso(b):
    n = len(b)
    mu = [[0.0] * n for _ in range(n)]
    star, norms = [], []
    for i in range(n):
        v = list(b[i])
        for j in range(i):
            mu[i][j] = _dot(b[i], star[j]) / norms[j]
            v = [x - mu[i][j] * y for x, y in zip(v, star[j])]
        star.append(v)
        norms.append(_dot(v, v))
    return mu, norms


def lll_reduce(columns, delta: float = 0.99, max_iter: int = 100_000):
    """LLL on a list of column vectors.

    Returns ``(reduced_columns, U)`` with ``U[i]`` the integer coefficients of
    reduced column ``i`` in terms of the input columns.  Works for float and
    mpmath entries alike.
    """
    b = [list(c) for c in columns]
    n = len(b)
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    mu, norms = _gso(b)
    k, it = 1, 0
    while k < n:
        it += 1
        if it > max_iter:
            raise BudgetExceededError("LLL did not converge", needed=max_iter)
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                U[k] = [x - q * y for x, y in zip(U[k], U[j])]
                for i in range(j):
                    mu[k][i] -= q * mu[j][i]
                mu[k][j] -= q
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            U[k], U[k - 1] = U[k - 1], U[k]
            mu, norms = _gso(b)
            k = max(k - 1, 1)
    return b, U


def _sup_norms(B, C) -> np.ndarray:
    """Sup norms of ``B @ c`` for each row ``c`` of ``C``, in a fixed order.

    Used by both the fast path and the oracle so equal coefficient vectors
    always get bit-identical norms.
    """
    if B.dtype != object and C.dtype != object:
        V = C[:, 0:1] * B[:, 0]
        for j in range(1, B.shape[1]):
            V = V + C[:, j:j + 1] * B[:, j]
        return np.abs(V).max(axis=1)
    out = np.empty(len(C))
    d = B.shape[1]
    rows = B.tolist()
    for k, c in enumerate(C.tolist()):
        best = 0
        for row in rows:
            s = row[0] * c[0]
            for j in range(1, d):
                s += row[j] * c[j]
            s = abs(s)
            if s > best:
                best = s
        out[k] = float(best)
    return out


def _coeff_array(rows) -> np.ndarray:
    big = max((abs(v) for r in rows for v in r), default=0)
    if big < 2**52:
        return np.array(rows, dtype=np.int64).reshape(len(rows), -1)
    return np.array(rows, dtype=object).reshape(len(rows), -1)


def _greedy_minima(C: np.ndarray, norms: np.ndarray, d: int):
    """Walk candidates in (norm, lexicographic) order, keep independent ones."""
    keys = [C[:, j] for j in range(C.shape[1] - 1, -1, -1)]
    if C.dtype == object:
        order = sorted(range(len(C)), key=lambda i: (norms[i], tuple(C[i])))
    else:
        order = np.lexsort(keys + [norms])
    echelon: list = []
    lam, chosen = [], []
    for i in order:
        v = [Fraction(int(x)) for x in C[i]]
        for piv, row in echelon:
            if v[piv]:
                f = v[piv] / row[piv]
                v = [a - f * r for a, r in zip(v, row)]
        nz = next((j for j, a in enumerate(v) if a), None)
        if nz is None:
            continue
        echelon.append((nz, v))
        lam.append(float(norms[i]))
        chosen.append(tuple(int(x) for x in C[i]))
        if len(lam) == d:
            return np.array(lam), chosen
    raise InvariantError("candidate set does not span the lattice")


def _box(bounds) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(-h, h + 1, dtype=np.int64) for h in bounds], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    return pts[np.any(pts != 0, axis=1)]


def _reduced(x: Lattice, hint=None):
    B = x.basis
    d = x.d
    start = [list(r) for r in hint] if hint is not None else [[int(i == j) for j in range(d)] for i in range(d)]
    cols = _columns(B, start, x.dps)
    ctx = mpmath.workdps(x.dps) if x.dps else _null()
    with ctx:
        _, U2 = lll_reduce(cols)
    U = [[sum(U2[i][k] * start[k][j] for k in range(d)) for j in range(d)] for i in range(d)]
    return U


class _null:
    def __enter__(self):
        return self

    def __exit__(self, *a):
        return False


def _columns(B, coeffs, dps):
    """Images ``B @ c`` for integer coefficient vectors, full precision."""
    d = B.shape[0]
    ctx = mpmath.workdps(dps) if dps else _null()
    out = []
    with ctx:
        for c in coeffs:
            col = []
            for i in range(d):
                s = B[i, 0] * c[0]
                for j in range(1, d):
                    s += B[i, j] * c[j]
                col.append(s)
            out.append(col)
    return out


class _Chebyshev:
    """Real minimax problems ``min_x ||y + W[:, :k] x||_inf`` for one ``W``.

    The optimum sits at a vertex where ``k + 1`` rows are active; every
    candidate vertex is solved once per ``k`` (pseudo-inverses are cached)
    and the objective is evaluated exactly at each, so degenerate systems
    are harmless.
    """

    def __init__(self, W: np.ndarray):
        self.W = W
        # columns are normalized so the vertex systems stay well scaled
        self._scale = np.abs(W).max(axis=0)
        self._Wn = W / self._scale
        self._systems = {}

    def _get(self, k):
        if k not in self._systems:
            d = self.W.shape[0]
            rows, signs = [], []
            for sub in itertools.combinations(range(d), k + 1):
                for sg in itertools.product((1.0, -1.0), repeat=k):
                    rows.append(sub)
                    signs.append((1.0,) + sg)
            rows = np.array(rows, dtype=int)
            signs = np.array(signs)
            Wk = self._Wn[:, :k]
            A = np.concatenate([signs[:, :, None] * Wk[rows], -np.ones(rows.shape + (1,))], axis=2)
            self._systems[k] = (rows, signs, np.linalg.pinv(A))
        return self._systems[k]

    def solve(self, y: np.ndarray, k: int):
        if k == 0:
            return float(np.abs(y).max()), np.zeros(0)
        rows, signs, pinv = self._get(k)
        sol = np.einsum("nij,nj->ni", pinv, -signs * y[rows])
        x = np.vstack([sol[:, :k] / self._scale[:k], np.zeros((1, k))])
        vals = np.abs(y[None, :] + x @ self.W[:, :k].T).max(axis=1)
        best = vals.min()
        # on flat optimal faces prefer the point nearest the origin, which
        # keeps integer coefficients small
        near = np.flatnonzero(vals <= best * (1 + 1e-12))
        i = near[np.argmin(np.abs(x[near]).max(axis=1))]
        return float(best), x[i]


def _coset_min(cheb: _Chebyshev, w: np.ndarray, max_nodes: int, tol: float = 1e-9):
    """Integer ``a`` minimizing ``||W a + w||_inf`` by branch and bound.

    Coordinates are fixed from the last to the first.  For a partial
    assignment the real relaxation over the remaining coordinates is convex
    in the next coordinate, so the scan walks outward from the relaxed
    optimum and stops in each direction once the bound reaches the
    incumbent.  Branches that could improve on the incumbent by less than a
    relative ``tol`` are pruned.
    """
    W = cheb.W
    s = W.shape[1]
    best = [math.inf, None]
    nodes = [0]

    def rec(k, y, tail):
        if k < 0:
            v = float(np.abs(y).max())
            if v < best[0]:
                best[0], best[1] = v, tail[::-1]
            return
        _, x = cheb.solve(y, k + 1)
        j0 = int(math.floor(x[k]))
        for j, step in ((j0, -1), (j0 + 1, 1)):
            while True:
                nodes[0] += 1
                if nodes[0] > max_nodes:
                    raise BudgetExceededError(
                        f"coset minimization exceeded {max_nodes} nodes", needed=nodes[0])
                yj = y + j * W[:, k]
                g = cheb.solve(yj, k)[0]
                if g >= best[0] * (1 - tol):
                    break
                rec(k - 1, yj, tail + [j])
                j += step

    rec(s - 1, w, [])
    return best[1]


def _scaled_inverse(red: np.ndarray) -> np.ndarray:
    # reduced columns are nearly orthogonal once normalized, so inverting
    # the normalized matrix is accurate even when the norms span many decades
    norms = np.abs(red).max(axis=0)
    return np.linalg.inv(red / norms) / norms[:, None]


def _plan(red: np.ndarray, radius: float):
    """Pick the split ``s`` minimizing the estimated candidate count.

    ``s = d`` is the plain coefficient box.  For ``s < d`` the first ``s``
    columns span the short sublattice; the outer box runs over the rest.
    """
    d = red.shape[1]
    norms = np.abs(red).max(axis=0)
    inv = _scaled_inverse(red)
    hs = [int(math.floor(radius * float(np.abs(inv[i]).sum()) * (1 + _BOX_SLACK))) for i in range(d)]
    best = None
    for s in range(1, d + 1):
        outer = math.prod(2 * h + 1 for h in hs[s:])
        if s == d:
            cost = math.prod(2 * h + 1 for h in hs)
            inner_h = None
        else:
            rho = float(norms[s - 1])
            r = np.abs(inv[:s]).sum(axis=1)
            inner_h = [int(math.ceil(2 * rho * ri * (1 + _BOX_SLACK))) for ri in r]
            cost = outer * (math.prod(2 * h + 1 for h in inner_h) + 64 * s)
        if best is None or cost < best[0]:
            best = (cost, s, hs, inner_h)
    return best


def _minima_and_basis(x: Lattice, budget: int = DEFAULT_BUDGET, hint=None):
    d = x.d
    U = _reduced(x, hint)
    red = np.array([[float(v) for v in col] for col in _columns(x.basis, U, x.dps)]).T
    norms = np.abs(red).max(axis=0)
    order = np.argsort(norms, kind="stable")
    red = red[:, order]
    U = [U[i] for i in order]
    radius = float(norms.max())
    cost, s, hs, inner_h = _plan(red, radius)
    if cost > budget:
        raise BudgetExceededError(
            f"enumeration needs about {cost} candidates, budget is {budget}", needed=cost)
    if s == d:
        box = _box(hs)
        pre = np.abs(box @ red.T).max(axis=1)
        cands = box[pre <= radius * (1 + _BOX_SLACK)]
    else:
        cands = _split_candidates(red, s, hs, inner_h, radius, budget)
    coeffs = [[sum(int(c[i]) * U[i][j] for i in range(d)) for j in range(d)] for c in cands]
    C = _coeff_array(coeffs)
    ctx = mpmath.workdps(x.dps) if x.dps else _null()
    with ctx:
        norms = _sup_norms(x.basis, C)
    lam, chosen = _greedy_minima(C, norms, d)
    _check_rounding(x, chosen, lam)
    return lam, [U[i] for i in np.argsort(order, kind="stable")]


def _check_rounding(x: Lattice, chosen, lam) -> None:
    """Refuse minima whose rounding error could exceed ``_ROUNDING_RTOL``.

    The forward error of ``B @ c`` is at most ``(d + 1) u sum_j |B_rj| |c_j|``
    per row (one extra unit for the rounded flow scaling), with ``u`` the
    unit roundoff of binary64 or of the lattice's ``dps``.  Long flows need
    coefficients of size ``e^t``, at which point the cancellation wipes out
    every significant digit; the result would look plausible and be wrong,
    so stop and point at ``dps`` instead.
    """
    d = x.d
    u = _UNIT_ROUNDOFF if x.dps is None else 0.5 * 10.0 ** (1 - x.dps)
    absB = np.abs(np.array([[float(v) for v in row] for row in x.basis]))
    for c, v in zip(chosen, lam):
        err = (d + 1) * u * float((absB @ np.abs(np.array(c, dtype=float))).max())
        if err > _ROUNDING_RTOL * v:
            prec = "binary64" if x.dps is None else f"dps={x.dps}"
            raise InvariantError(
                f"{prec} cancellation: minimum {v!r} carries rounding error up to {err:.3g} "
                f"(raise dps for this lattice)")


def _split_candidates(red, s, hs, inner_h, radius, budget):
    """Candidate coefficient vectors for a split at ``s``.

    Every lattice vector no longer than ``radius`` lies in a coset ``w + L``
    of the short sublattice ``L`` with ``w`` from the outer box.  Within a
    coset, vectors no longer than ``rho`` (the longest short basis vector)
    are kept outright; any longer one differs from the coset minimum by an
    element of ``L``, whose span is already covered by vectors no longer
    than ``rho``.  So the coset minimum plus the short vectors suffice.
    """
    W, V = red[:, :s], red[:, s:]
    rho = float(np.abs(W).max(axis=0).max())
    cheb = _Chebyshev(W)
    inner = _box(inner_h)
    inner = np.vstack([np.zeros((1, s), dtype=np.int64), inner])
    out = []
    outer = _box(hs[s:]) if s < red.shape[1] else np.zeros((0, 0), dtype=np.int64)
    outer = np.vstack([np.zeros((1, red.shape[1] - s), dtype=np.int64), outer])
    for o in outer:
        w = V @ o
        zero = not o.any()
        fstar, xstar = (0.0, np.zeros(s)) if zero else cheb.solve(w, s)
        tail = [int(v) for v in o]
        if fstar <= rho * (1 + _BOX_SLACK):
            # the centre can exceed int64 on nearly degenerate lattices, so
            # it stays a Python int and only the small offsets are vectorized
            centre = [int(v) for v in np.rint(xstar)]
            base = W @ np.array(centre, dtype=float) + w
            vals = np.abs(inner @ W.T + base).max(axis=1)
            for row in inner[vals <= rho * (1 + _BOX_SLACK)]:
                if zero and not row.any():
                    continue
                out.append([c + int(r) for c, r in zip(centre, row)] + tail)
        if not zero:
            out.append(_coset_min(cheb, w, max_nodes=budget) + tail)
    return out


def successive_minima(x: Lattice, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Sup-norm successive minima ``lambda_1 <= ... <= lambda_d``.

    LLL-reduce, then collect a candidate set that is guaranteed to contain
    a minimal system: a coefficient box when the reduced basis is balanced,
    otherwise per-coset enumeration over the short sublattice.  Independent
    vectors are picked greedily by norm with exact rank tests.
    """
    return _minima_and_basis(x, budget)[0]


def successive_minima_oracle(x: Lattice, coeff_bound: int) -> np.ndarray:
    """Brute force over ``[-coeff_bound, coeff_bound]^d`` in the given basis.

    Correct when ``coeff_bound >= oracle_sufficient_bound(x)``.
    """
    if coeff_bound < 1:
        raise DomainError("coeff_bound must be >= 1")
    C = _box([coeff_bound] * x.d)
    ctx = mpmath.workdps(x.dps) if x.dps else _null()
    with ctx:
        norms = _sup_norms(x.basis, C)
    return _greedy_minima(C, norms, x.d)[0]


def oracle_sufficient_bound(x: Lattice) -> int:
    """Coefficient bound that provably contains all successive-minima vectors.

    ``lambda_d`` is at most the longest basis column, and a vector ``v`` has
    coefficients ``|c_i| <= ||v|| * ||row_i(B^-1)||_1``.
    """
    B = np.array(x.basis, dtype=float)
    radius = float(np.abs(B).max(axis=0).max())
    inv = np.linalg.inv(B)
    return max(1, int(math.ceil(radius * float(np.abs(inv).sum(axis=1).max()) * (1 + _BOX_SLACK))))


def random_lattice(dims: Dims, rng: np.random.Generator, max_cond: float | None = None) -> Lattice:
    """Gaussian basis rescaled to determinant 1."""
    d = dims.d
    while True:
        B = rng.standard_normal((d, d))
        det = np.linalg.det(B)
        if abs(det) < 1e-3:
            continue
        if det < 0:
            B[:, 0] = -B[:, 0]
        B = B / abs(det) ** (1.0 / d)
        if max_cond is None or np.linalg.cond(B) <= max_cond:
            return Lattice(B, dims)


# --------------------------------------------------------------------------
# traces


@dataclass(frozen=True, eq=False)
class MinimaTrace:
    dims: Dims
    times: np.ndarray
    minima: np.ndarray

    @property
    def log_minima(self) -> np.ndarray:
        return np.log(self.minima)

    def to_csv(self) -> str:
        d = self.dims.d
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"lambda_{i}" for i in range(1, d + 1)]
                   + [f"log_lambda_{i}" for i in range(1, d + 1)])
        logs = self.log_minima
        for t, lam, lg in zip(self.times, self.minima, logs):
            w.writerow([_g(t)] + [_g(v) for v in lam] + [_g(v) for v in lg])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, dims: Dims | None = None) -> "MinimaTrace":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        d = (len(header) - 1) // 2
        if header[0] != "t" or len(header) != 2 * d + 1 or d < 2:
            raise DomainError("not a minima trace CSV")
        if dims is None:
            dims = Dims(d - 1, 1) if d > 1 else None
        elif dims.d != d:
            raise DomainError(f"trace has d={d}, expected {dims.d}")
        data = np.array([[float(v) for v in r] for r in body], dtype=float).reshape(-1, 2 * d + 1)
        return cls(dims, data[:, 0], data[:, 1:d + 1])


def _g(v) -> str:
    return format(float(v), ".17g")


def _check_minkowski(lam: np.ndarray, d: int, t) -> None:
    if np.any(np.diff(lam) < 0):
        raise InvariantError(f"minima out of order at t={t}")
    prod = float(np.prod(lam))
    lo, hi = 1.0 / math.factorial(d), 1.0
    if not (lo * (1 - 1e-6) <= prod <= hi * (1 + 1e-6)):
        raise InvariantError(
            f"Minkowski bounds violated at t={t}: prod lambda = {prod!r} "
            f"(raise dps for this lattice)")


def _trace_chunk(args):
    x, times, budget = args
    hint = None
    out = []
    for t in times:
        y = apply_flow(x, t)
        try:
            lam, hint = _minima_and_basis(y, budget, hint)
        except BudgetExceededError as exc:
            raise BudgetExceededError(f"{exc} (at t={t})", needed=exc.needed) from exc
        _check_minkowski(lam, x.d, t)
        out.append(lam)
    return out


def log_minima_trace(x: Lattice, t_grid, budget: int = DEFAULT_BUDGET,
                     workers: int | None = None) -> MinimaTrace:
    """Successive minima of ``a_t x`` along ``t_grid``.

    Consecutive samples reuse the previous reduced basis as a warm start.
    With ``workers > 1`` the grid is split into contiguous chunks processed
    in separate processes; output order is the grid order regardless.
    """
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise DomainError("t_grid must be a nonempty 1-d sequence")
    if np.any(np.diff(times) <= 0):
        raise DomainError("t_grid must be increasing")
    if workers and workers > 1 and len(times) > workers:
        chunks = np.array_split(times, workers)
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_trace_chunk, [(x, c, budget) for c in chunks]))
        rows = [r for p in parts for r in p]
    else:
        rows = _trace_chunk((x, times, budget))
    return MinimaTrace(x.dims, times, np.array(rows))


def time_grid(t_max: float = DEFAULT_HORIZON, dt: float = DEFAULT_DT) -> np.ndarray:
    if dt <= 0 or t_max < 0:
        raise DomainError("need dt > 0 and t_max >= 0")
    n = int(math.floor(t_max / dt + 1e-9))
    return dt * np.arange(n + 1)


@dataclass(frozen=True)
class TraceComparison:
    sup_dist: float
    window_sups: list
    growth_slope: float
    label: str = "finite-horizon diagnostic"

    def to_dict(self) -> dict:
        return {"sup_dist": self.sup_dist,
                "window_sups": [{"t_start": a, "t_end": b, "sup": s} for a, b, s in self.window_sups],
                "growth_slope": self.growth_slope,
                "label": self.label}


def compare_trace_to_template(trace: MinimaTrace, f, window: float = 5.0) -> TraceComparison:
    """Sup distance between the log-minima samples and a template.

    Bounded window sups are evidence toward (never proof of) equivalence;
    growing ones are evidence against.
    """
    path = _as_path(f)
    if path.d != trace.dims.d:
        raise DomainError(f"dimension mismatch: trace d={trace.dims.d}, template d={path.d}")
    if trace.times[0] < 0 or trace.times[-1] > float(path.horizon):
        raise DomainError(f"trace times exceed the template domain [0, {float(path.horizon)}]")
    if window <= 0:
        raise DomainError("window must be positive")
    xp = np.array([float(t) for t in path.breakpoints])
    fp = np.array([[float(v) for v in row] for row in path.values])
    ref = np.stack([np.interp(trace.times, xp, fp[:, i]) for i in range(path.d)], axis=1)
    dev = np.abs(trace.log_minima - ref).max(axis=1)
    t0 = float(trace.times[0])
    idx = np.floor((trace.times - t0) / window).astype(int)
    sups = []
    for w in np.unique(idx):
        sel = idx == w
        sups.append((t0 + w * window, t0 + (w + 1) * window, float(dev[sel].max())))
    if len(sups) > 1:
        centers = np.array([(a + b) / 2 for a, b, _ in sups])
        slope = float(np.polyfit(centers, [s for _, _, s in sups], 1)[0])
    else:
        slope = 0.0
    return TraceComparison(float(dev.max()), sups, slope)


@dataclass(frozen=True)
class OccupationProfile:
    threshold: float
    horizon: float
    dt: float
    fraction: float
    samples: int

    def to_dict(self) -> dict:
        return {"threshold": self.threshold, "horizon": self.horizon, "dt": self.dt,
                "fraction": self.fraction, "samples": self.samples,
                "label": "finite-horizon diagnostic"}


def occupation_fraction(x: Lattice, T: float, M: float, dt: float,
                        budget: int = DEFAULT_BUDGET, workers: int | None = None) -> OccupationProfile:
    """Left Riemann-sum fraction of ``[0, T)`` with ``log lambda_1(a_t x) >= M``."""
    if T <= 0 or dt <= 0:
        raise DomainError("need T > 0 and dt > 0")
    n = max(1, int(round(T / dt)))
    trace = log_minima_trace(x, dt * np.arange(n), budget, workers)
    frac = float(np.mean(trace.log_minima[:, 0] >= M))
    return OccupationProfile(float(M), float(T), float(dt), frac, n)


# --------------------------------------------------------------------------
# weak-stable perturbations


def weak_stable_element(h_minus, h_zero, dps: int | None = None) -> np.ndarray:
    """Block matrix ``[[A, 0], [H, B]]`` from ``h_zero = (A, B)`` and ``H``."""
    A, Bm = (np.atleast_2d(np.array(M, dtype=object if dps else float)) for M in h_zero)
    H = np.atleast_2d(np.array(h_minus, dtype=object if dps else float))
    m, n = A.shape[0], Bm.shape[0]
    if A.shape != (m, m) or Bm.shape != (n, n) or H.shape != (n, m):
        raise DomainError("h_zero blocks must be square and h_minus must be n x m")
    det = float(np.linalg.det(A.astype(float))) * float(np.linalg.det(Bm.astype(float)))
    if not abs(abs(det) - 1.0) <= 1e-9:
        raise InvariantError(f"det(A) det(B) = {det!r}, expected +-1")
    h = np.zeros((m + n, m + n), dtype=object if dps else float)
    h[:m, :m] = A
    h[m:, :m] = H
    h[m:, m:] = Bm
    return h


def weak_stable_perturb(x: Lattice, h_minus, h_zero) -> Lattice:
    """``g^- g^0 x`` for the block lower-triangular element built from the inputs."""
    h = weak_stable_element(h_minus, h_zero, x.dps)
    if (h.shape[0] - len(np.atleast_2d(np.array(h_zero[0])))) != x.dims.n:
        raise DomainError("perturbation block sizes do not match the lattice dims")
    if x.dps is None:
        return Lattice(h @ x.basis, x.dims, None, check=False)
    with mpmath.workdps(x.dps):
        hb = np.array([[_to_mpf(v) for v in row] for row in h], dtype=object)
        B = hb.dot(x.basis)
    return Lattice(B, x.dims, x.dps, check=False)


def sup_operator_norm(M) -> float:
    """Operator norm induced by the sup norm: max absolute row sum."""
    return float(np.abs(np.asarray(M, dtype=float)).sum(axis=1).max())


def distortion_bound(h) -> float:
    """``log(||h|| * ||h^-1||)`` in the sup operator norm."""
    hf = np.asarray(h, dtype=float)
    return math.log(sup_operator_norm(hf) * sup_operator_norm(np.linalg.inv(hf)))


# --------------------------------------------------------------------------
# Diophantine probes


@dataclass(frozen=True, eq=False)
class SingularityProbe:
    Q: np.ndarray
    S: np.ndarray

    def to_dict(self) -> dict:
        return {"Q": [int(q) for q in self.Q], "S": [float(s) for s in self.S],
                "label": "finite-horizon diagnostic"}


def singularity_probe(theta, Q_max: int, num: int | None = 40) -> SingularityProbe:
    """``S(Q) = Q^{1/m} min_{1 <= q <= Q} <q theta>`` on a geometric grid of Q.

    ``<.>`` is the sup-norm distance to ``Z^m``.  Fractions are handled
    exactly, mpmath numbers in their own precision, floats vectorized.
    ``num=None`` returns every Q.
    """
    if Q_max < 1:
        raise DomainError("Q_max must be >= 1")
    th = list(theta) if isinstance(theta, (list, tuple, np.ndarray)) else [theta]
    m = len(th)
    if all(isinstance(v, (int, float, np.floating)) for v in th):
        tv = np.array(th, dtype=float)
        runmin = np.empty(Q_max)
        best = np.inf
        step = 1 << 16
        for s in range(0, Q_max, step):
            q = np.arange(s + 1, min(Q_max, s + step) + 1, dtype=float)[:, None]
            x = q * tv[None, :]
            dist = np.abs(x - np.rint(x)).max(axis=1)
            block = np.minimum.accumulate(dist)
            block = np.minimum(block, best)
            runmin[s:s + len(block)] = block
            best = block[-1]
    else:
        runmin = np.empty(Q_max)
        best = None
        for q in range(1, Q_max + 1):
            dist = max(abs(q * v - _nearest(q * v)) for v in th)
            if best is None or dist < best:
                best = dist
            runmin[q - 1] = float(best)
    Qs = np.arange(1, Q_max + 1)
    if num is not None:
        Qs = np.unique(np.rint(np.geomspace(1, Q_max, num)).astype(int))
    S = Qs.astype(float) ** (1.0 / m) * runmin[Qs - 1]
    return SingularityProbe(Qs, S)


def _nearest(v):
    if isinstance(v, Fraction):
        return Fraction(round(v))
    return mpmath.nint(v)


def theta_from_partial_quotients(quotients, a0: int = 0, dps: int = 60):
    """Value of ``[a0; a1, a2, ...]`` as an mpmath number (tail truncated)."""
    with mpmath.workdps(dps + 10):
        x = mpmath.mpf(0)
        for a in reversed(list(quotients)):
            x = 1 / (a + x)
        val = a0 + x
    with mpmath.workdps(dps):
        return +val
