"""Lorentzian warped products over finite metric spaces.

A warped product I x_f Y carries the line element -dt^2 + f(t)^2 d_Y^2
over an open interval I with positive warping f.  Time separation and
causal classification of two points reduce to the two-dimensional
comparison strip: only the base distance enters.  The cos warping on
(-pi/2, pi/2) reproduces the model strip exactly; constant warpings are
Minkowski strips; tabulated warpings are handled by geodesic shooting
on the conserved quantity f(t)^2 x'.

Sampling a finite metric space against a time grid yields a finite
causal space with closed-form entries for the cos warping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import model_space as ms
from .causal_space import FiniteCausalSpace
from .errors import (
    ConvergenceError,
    DomainError,
    ParameterError,
    StructuralError,
)

COS = "cos"
CONSTANT = "constant"
TABLE = "table"

# Matching the model-space convention: base displacements within this
# band of the null offset classify as null.
NULL_BAND = 1e-9

# Metric axioms are audited with this slack.
METRIC_TOL = 1e-9

# Five-point Gauss-Legendre rule on [-1, 1].
_GL_NODES = np.array([
    -0.9061798459386640, -0.5384693101056831, 0.0,
    0.5384693101056831, 0.9061798459386640,
])
_GL_WEIGHTS = np.array([
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
    0.4786286704993665, 0.2369268850561891,
])


@dataclass(frozen=True)
class WarpingSpec:
    """Warping function over an open interval.

    kind "cos" fixes the interval to (-pi/2, pi/2); kind "constant"
    carries a positive value; kind "table" interpolates linearly between
    strictly increasing knots spanning the interval, with all values
    positive.
    """

    kind: str
    interval: tuple
    value: float = None
    knots: tuple = None
    values: tuple = None

    def __post_init__(self):
        if self.kind not in (COS, CONSTANT, TABLE):
            raise StructuralError(f"unknown warping kind {self.kind!r}")
        a, b = (float(v) for v in self.interval)
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise StructuralError(f"interval {self.interval!r} is not a finite open interval")
        object.__setattr__(self, "interval", (a, b))
        if self.kind == COS:
            if abs(a + ms.HALF_PI) > 1e-12 or abs(b - ms.HALF_PI) > 1e-12:
                raise StructuralError("cos warping lives on (-pi/2, pi/2)")
            if self.value is not None or self.knots is not None or self.values is not None:
                raise StructuralError("cos warping takes no extra parameters")
        elif self.kind == CONSTANT:
            if self.value is None or not (math.isfinite(self.value) and self.value > 0.0):
                raise StructuralError(f"constant warping needs a positive value, got {self.value!r}")
            if self.knots is not None or self.values is not None:
                raise StructuralError("constant warping takes no knots")
        else:
            if self.value is not None:
                raise StructuralError("table warping takes no constant value")
            if self.knots is None or self.values is None:
                raise StructuralError("table warping needs knots and values")
            knots = tuple(float(v) for v in self.knots)
            values = tuple(float(v) for v in self.values)
            if len(knots) < 2 or len(knots) != len(values):
                raise StructuralError("table needs equally many knots and values, at least two")
            if any(u >= v for u, v in zip(knots, knots[1:])):
                raise StructuralError("table knots must be strictly increasing")
            if any(not (math.isfinite(v) and v > 0.0) for v in values):
                raise StructuralError("table values must be positive and finite")
            if knots[0] > a + 1e-12 or knots[-1] < b - 1e-12:
                raise StructuralError("table knots must span the interval")
            object.__setattr__(self, "knots", knots)
            object.__setattr__(self, "values", values)

    def at(self, t: float) -> float:
        """Warping value f(t)."""
        if self.kind == COS:
            return math.cos(t)
        if self.kind == CONSTANT:
            return self.value
        return float(np.interp(t, self.knots, self.values))


def cos_warping() -> WarpingSpec:
    return WarpingSpec(COS, (-ms.HALF_PI, ms.HALF_PI))


def constant_warping(value: float, interval) -> WarpingSpec:
    return WarpingSpec(CONSTANT, tuple(interval), value=float(value))


def table_warping(knots, values, interval=None) -> WarpingSpec:
    knots = tuple(float(v) for v in knots)
    if interval is None:
        interval = (knots[0], knots[-1])
    return WarpingSpec(TABLE, tuple(interval), knots=knots, values=tuple(values))


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Labelled finite metric space with a validated distance matrix."""

    labels: tuple
    dist: np.ndarray

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        n = len(labels)
        if n == 0:
            raise StructuralError("a metric space needs at least one point")
        if len(set(labels)) != n:
            raise StructuralError("labels must be unique")
        dist = np.array(self.dist, dtype=float)
        if dist.shape != (n, n):
            raise StructuralError(f"dist shape {dist.shape} does not match {n} labels")
        if not np.isfinite(dist).all():
            raise StructuralError("distances must be finite")
        if (np.diag(dist) != 0.0).any():
            raise StructuralError("dist diagonal must be zero")
        if np.abs(dist - dist.T).max() > 1e-12:
            raise StructuralError("dist must be symmetric")
        off = ~np.eye(n, dtype=bool)
        if n > 1 and not (dist[off] > 0.0).all():
            raise StructuralError("off-diagonal distances must be positive")
        for k in range(n):
            slack = dist - (dist[:, k][:, None] + dist[k, :][None, :])
            if slack.max() > METRIC_TOL:
                i, j = np.unravel_index(np.argmax(slack), slack.shape)
                raise StructuralError(
                    f"triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
                )
        dist.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dist", dist)

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ParameterError(f"unknown base point label {label!r}") from None

    def distance(self, a: str, b: str) -> float:
        return float(self.dist[self.index(a), self.index(b)])


@dataclass(frozen=True)
class WarpedPoint:
    """Point (t, base) of a warped product; t must lie inside the
    interval of the warping in use, which is checked at evaluation."""

    t: float
    base: str

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise DomainError(f"t = {self.t!r} is not finite")


def _check_inside(f: WarpingSpec, name: str, t: float) -> None:
    a, b = f.interval
    if not (a < t < b):
        raise DomainError(f"{name} = {t!r} outside the open interval ({a!r}, {b!r})")


def _table_pieces(f: WarpingSpec, lo: float, hi: float):
    """Integration piece edges: [lo, hi] split at interior knots."""
    knots = np.asarray(f.knots)
    inner = knots[(knots > lo) & (knots < hi)]
    return np.concatenate(([lo], inner, [hi]))


def _simpson_piecewise(g, edges: np.ndarray, tol: float) -> float:
    """Composite Simpson per piece, uniformly refined until the summed
    update falls below tol.  Pieces are smooth by construction (the
    integrand has kinks only at knots, which are piece edges)."""
    lo, hi = edges[:-1], edges[1:]
    width = hi - lo

    def total(m: int) -> float:
        k = np.arange(m + 1)
        nodes = lo[:, None] + width[:, None] * (k[None, :] / m)
        w = np.full(m + 1, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        return float(np.sum((width / (3.0 * m)) * np.sum(g(nodes) * w[None, :], axis=1)))

    m = 2
    prev = total(m)
    for _ in range(12):
        m *= 2
        cur = total(m)
        if abs(cur - prev) <= tol:
            return cur
        prev = cur
    raise ConvergenceError("Simpson refinement did not reach the tolerance")


def null_offset(f: WarpingSpec, t0: float, t1: float) -> float:
    """Maximal base displacement causally reachable from time t0 to t1.

    This is the integral of 1/f: closed form for cos and constant
    warpings, piecewise adaptive Simpson at tolerance 1e-10 for tables.
    """
    _check_inside(f, "t0", t0)
    _check_inside(f, "t1", t1)
    if t0 > t1:
        raise ParameterError(f"need t0 <= t1, got {t0!r} > {t1!r}")
    if t0 == t1:
        return 0.0
    if f.kind == COS:
        return ms.conformal_time(t1) - ms.conformal_time(t0)
    if f.kind == CONSTANT:
        return (t1 - t0) / f.value
    knots = np.asarray(f.knots)
    vals = np.asarray(f.values)
    edges = _table_pieces(f, t0, t1)
    return _simpson_piecewise(lambda ts: 1.0 / np.interp(ts, knots, vals), edges, 1e-10)


def _gl_integrate(g, edges: np.ndarray) -> float:
    """Five-point Gauss-Legendre quadrature summed over the pieces."""
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    return float(np.sum(half[:, None] * _GL_WEIGHTS[None, :] * g(nodes)))


def _refined_pieces(f: WarpingSpec, lo: float, hi: float, max_width: float = 0.01):
    """Knot-aligned pieces additionally split to at most max_width, so
    coarse tables cannot starve the fixed-order quadrature."""
    base = _table_pieces(f, lo, hi)
    out = [base[0]]
    for a, b in zip(base[:-1], base[1:]):
        parts = max(1, int(math.ceil((b - a) / max_width)))
        out.extend(a + (b - a) * np.arange(1, parts + 1) / parts)
    return np.asarray(out)


def _shoot_table_tau(f: WarpingSpec, lo: float, hi: float, dx: float) -> float:
    """Time separation by shooting on the conserved quantity p = f^2 x'.

    The base displacement dx(p) of the geodesic with constant p is
    strictly increasing toward the null offset, so bisection on p
    converges; tau is then the proper-time integral along the solution.
    """
    knots = np.asarray(f.knots)
    vals = np.asarray(f.values)
    edges = _refined_pieces(f, lo, hi)

    def fvals(ts):
        return np.interp(ts, knots, vals)

    def displacement(p: float) -> float:
        return _gl_integrate(lambda ts: p / (fvals(ts) * np.hypot(fvals(ts), p)), edges)

    def proper_time(p: float) -> float:
        return _gl_integrate(lambda ts: fvals(ts) / np.hypot(fvals(ts), p), edges)

    if dx == 0.0:
        return proper_time(0.0)
    p_hi = 1.0
    for _ in range(80):
        if displacement(p_hi) >= dx:
            break
        p_hi *= 2.0
    else:
        return _pl_path_tau(f, lo, hi, dx)
    p_lo = 0.0
    for _ in range(80):
        p_mid = 0.5 * (p_lo + p_hi)
        if displacement(p_mid) < dx:
            p_lo = p_mid
        else:
            p_hi = p_mid
    return proper_time(0.5 * (p_lo + p_hi))


def _pl_path_tau(f: WarpingSpec, lo: float, hi: float, dx: float) -> float:
    """Fallback: maximize proper time over piecewise-linear paths by
    coordinate ascent with dyadic refinement of the time partition."""

    knots = np.asarray(f.knots)
    vals = np.asarray(f.values)

    def segment(t0, t1, x0, x1):
        slope = (x1 - x0) / (t1 - t0)
        edges = _refined_pieces(f, t0, t1)

        def g(ts):
            rad = 1.0 - (np.interp(ts, knots, vals) * slope) ** 2
            return np.sqrt(np.maximum(rad, 0.0)) * (rad >= 0.0)

        if np.any(1.0 - (np.interp(edges, knots, vals) * slope) ** 2 < 0.0):
            return -math.inf
        return _gl_integrate(g, edges)

    best = 0.0
    prev_best = -math.inf
    for depth in range(1, 13):
        segs = 2 ** depth
        ts = np.linspace(lo, hi, segs + 1)
        xs = np.linspace(0.0, dx, segs + 1)
        for _ in range(40):
            moved = 0.0
            for i in range(1, segs):
                a, b = xs[i - 1], xs[i + 1]
                width = abs(b - a)
                span = (min(a, b) - width - 1.0, max(a, b) + width + 1.0)
                left, right = span
                for _ in range(60):
                    m1 = left + (right - left) / 3.0
                    m2 = right - (right - left) / 3.0
                    v1 = segment(ts[i - 1], ts[i], xs[i - 1], m1) + segment(ts[i], ts[i + 1], m1, xs[i + 1])
                    v2 = segment(ts[i - 1], ts[i], xs[i - 1], m2) + segment(ts[i], ts[i + 1], m2, xs[i + 1])
                    if v1 < v2:
                        left = m1
                    else:
                        right = m2
                new_x = 0.5 * (left + right)
                moved = max(moved, abs(new_x - xs[i]))
                xs[i] = new_x
            if moved < 1e-10:
                break
        total = sum(
            segment(ts[i], ts[i + 1], xs[i], xs[i + 1]) for i in range(segs)
        )
        best = max(best, total)
        if abs(best - prev_best) < 1e-9:
            break
        prev_best = best
    return best


def comparison_space_tau(f: WarpingSpec, s: float, t: float, dx: float) -> ms.IntervalResult:
    """Interval of ((s, 0), (t, dx)) in the two-dimensional strip I x_f R.

    The pair is causal iff the base displacement does not exceed the
    null offset and the times are ordered; strictness on both gives
    timelike.  The cos kind delegates to the model strip closed form;
    constant is the Minkowski formula; tables are solved by geodesic
    shooting.
    """
    _check_inside(f, "s", s)
    _check_inside(f, "t", t)
    if not (math.isfinite(dx) and dx >= 0.0):
        raise ParameterError(f"base displacement must be a nonnegative real, got {dx!r}")
    if f.kind == COS:
        return ms.ads_interval(ms.AdsPrimePoint(s, 0.0), ms.AdsPrimePoint(t, dx))
    ordered = s <= t
    lo, hi = (s, t) if ordered else (t, s)
    reach = null_offset(f, lo, hi)
    if dx > reach + NULL_BAND:
        return ms.IntervalResult(ms.UNRELATED, 0.0)
    if dx >= reach - NULL_BAND:
        return ms.IntervalResult(ms.NULL if ordered else ms.PAST_DIRECTED, 0.0)
    if f.kind == CONSTANT:
        span = hi - lo
        tau = math.sqrt(span * span - (f.value * dx) ** 2)
    else:
        tau = _shoot_table_tau(f, lo, hi, dx)
    return ms.IntervalResult(ms.TIMELIKE if ordered else ms.PAST_DIRECTED, tau)


def wp_interval(
    f: WarpingSpec, Y: FiniteMetricSpace, p: WarpedPoint, q: WarpedPoint
) -> ms.IntervalResult:
    """Interval of two warped-product points over a finite base."""
    i = Y.index(p.base)
    j = Y.index(q.base)
    return comparison_space_tau(f, p.t, q.t, float(Y.dist[i, j]))


def sample_warped_product(f: WarpingSpec, S: FiniteMetricSpace, t_grid) -> FiniteCausalSpace:
    """Finite causal space sampling I x_f S on a time grid.

    The cos kind delegates to sample_suspension; constant warpings fill
    the matrices with the vectorized Minkowski closed form; table
    warpings shoot per distinct (time pair, distance) combination with
    memoization.  Point order and labels follow sample_suspension.
    """
    if f.kind == COS:
        return sample_suspension(S, t_grid)
    grid = _checked_grid(f.interval, t_grid)
    nb = S.size
    t = np.repeat(np.asarray(grid), nb)
    base = np.tile(np.arange(nb), len(grid))
    D = S.dist[np.ix_(base, base)]
    labels = tuple(f"{S.labels[b]}@{g}" for g in range(len(grid)) for b in range(nb))
    coords = np.column_stack([t, base.astype(float)])
    if f.kind == CONSTANT:
        dt = t[None, :] - t[:, None]
        order = dt >= 0.0
        reach = np.where(order, dt, 0.0) / f.value
        leq = order & (D <= reach + NULL_BAND)
        timelike = order & (D < reach - NULL_BAND)
        rad = np.maximum(dt * dt - (f.value * D) ** 2, 0.0)
        tau = np.where(timelike, np.sqrt(rad), 0.0)
        return FiniteCausalSpace(labels, tau, leq, coords)
    n = len(labels)
    tau = np.zeros((n, n))
    leq = np.eye(n, dtype=bool)
    memo = {}
    for i in range(n):
        for j in range(n):
            if i == j or t[i] > t[j]:
                continue
            key = (t[i], t[j], D[i, j])
            res = memo.get(key)
            if res is None:
                res = comparison_space_tau(f, float(t[i]), float(t[j]), float(D[i, j]))
                memo[key] = res
            if res.relation in (ms.TIMELIKE, ms.NULL):
                leq[i, j] = True
                tau[i, j] = res.tau
    return FiniteCausalSpace(labels, tau, leq, coords)


def _checked_grid(interval, t_grid):
    grid = [float(v) for v in t_grid]
    if not grid:
        raise ParameterError("t_grid must be nonempty")
    if any(u >= v for u, v in zip(grid, grid[1:])):
        raise ParameterError("t_grid must be strictly increasing")
    a, b = interval
    for v in grid:
        if not a < v < b:
            raise DomainError(f"grid time {v!r} outside the open interval ({a!r}, {b!r})")
    return grid


def sample_suspension(S: FiniteMetricSpace, t_grid) -> FiniteCausalSpace:
    """Finite causal space sampling the cos warped product over S.

    Points are ordered time-major: index = grid_index * |S| + base_index
    with labels "<base>@<grid_index>".  Entries are the closed-form cos
    values, classified exactly as in the model strip, so the sample is
    deterministic and validates by construction.
    """
    grid = _checked_grid((-ms.HALF_PI, ms.HALF_PI), t_grid)
    nb = S.size
    t = np.repeat(np.asarray(grid), nb)
    base = np.tile(np.arange(nb), len(grid))
    D = S.dist[np.ix_(base, base)]
    arg = np.sin(t)[:, None] * np.sin(t)[None, :] + np.cos(t)[:, None] * np.cos(t)[
        None, :
    ] * np.cosh(D)
    order = t[:, None] <= t[None, :]
    leq = order & (arg <= 1.0 + ms.ARG_SLACK)
    timelike = leq & (arg < 1.0 - ms.ARG_SLACK)
    tau = np.where(timelike, np.arccos(np.clip(arg, -1.0, 1.0)), 0.0)
    labels = tuple(
        f"{S.labels[b]}@{g}" for g in range(len(grid)) for b in range(nb)
    )
    coords = np.column_stack([t, base.astype(float)])
    return FiniteCausalSpace(labels, tau, leq, coords)
