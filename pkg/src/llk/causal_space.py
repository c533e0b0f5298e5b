"""Finite causal spaces and their curvature audits.

A finite causal space is a labelled point set with a time separation
matrix tau and a causal relation matrix leq.  This module validates the
defining axioms (reflexivity, transitivity, timelikeness, the reverse
triangle inequality), extracts longest chains as discrete stand-ins for
distance realizers, and runs the comparison checkers: triangle
comparison against the model strip, angle monotonicity, subdivision
(Alexandrov lemma) audits, and the diameter bound.

Conventions: tau(i, j) is the forward time separation and is 0 whenever
i is not below j; leq is reflexive; coords, when present, store a time
coordinate in column 0 that is isotone for the relation.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from . import model_space as ms
from .errors import (
    CausalityError,
    ChainError,
    GeometryError,
    ParameterError,
    SizeBoundError,
    StructuralError,
    UndefinedAngleError,
)

# Reverse-triangle audit slack on validated spaces.
RTI_TOL = 1e-9

# Reports keep at most this many violation records; counts stay exact.
VIOLATION_CAP = 200

# Chain-reconstruction tie collar.  Must stay well below the staleness
# tolerance so collared chains still count as maximizing.
RECON_COLLAR = 1e-12


@dataclass(frozen=True)
class Violation:
    """One failed comparison: lhs exceeded rhs by deficit at the given
    point tuple."""

    pair: tuple
    lhs: float
    rhs: float
    deficit: float
    note: str = ""


@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of one audit sweep.

    checked counts performed comparisons, skipped the ones whose domain
    was undefined (null pairs, degenerate angles).  violations holds at
    most VIOLATION_CAP records in deterministic scan order while
    violation_count is exact.  The excess fields tally the reversed
    inequality so curvature-above can be read off the same report.
    """

    checked: int
    violations: tuple
    violation_count: int
    max_deficit: float
    verdict: bool
    max_excess: float = 0.0
    excess_count: int = 0
    skipped: int = 0
    notes: tuple = ()


@dataclass(frozen=True)
class Chain:
    """Causal chain with cumulative time-separation parameters.

    indices lists the points in causal order; params starts at 0 and
    increases by tau of each consecutive pair, so params[-1] is the
    chain value used as a side length downstream.
    """

    indices: tuple
    params: tuple

    def __post_init__(self):
        if len(self.indices) != len(self.params):
            raise ChainError("indices and params must have equal length")
        if len(self.indices) == 0:
            raise ChainError("a chain needs at least one point")
        if self.params[0] != 0.0:
            raise ChainError("chain params must start at 0")
        if any(b < a for a, b in zip(self.params, self.params[1:])):
            raise ChainError("chain params must be nondecreasing")

    @property
    def value(self) -> float:
        return self.params[-1]


@dataclass(frozen=True, eq=False)
class FiniteCausalSpace:
    """Labelled finite point set with tau and leq matrices.

    tau holds forward time separations (np.inf is the +infinity
    encoding); leq is the reflexive causal relation.  coords is optional
    per-point provenance, column 0 being a time coordinate usable as a
    topological-sort key.
    """

    labels: tuple
    tau: np.ndarray
    leq: np.ndarray
    coords: np.ndarray = None

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        n = len(labels)
        if n == 0:
            raise StructuralError("a space needs at least one point")
        if len(set(labels)) != n:
            raise StructuralError("labels must be unique")
        tau = np.array(self.tau, dtype=float)
        leq = np.array(self.leq, dtype=bool)
        if tau.shape != (n, n):
            raise StructuralError(f"tau shape {tau.shape} does not match {n} labels")
        if leq.shape != (n, n):
            raise StructuralError(f"leq shape {leq.shape} does not match {n} labels")
        if np.isnan(tau).any():
            raise StructuralError("tau contains NaN entries")
        if (tau < 0.0).any():
            raise StructuralError("tau entries must be nonnegative")
        if (np.diag(tau) != 0.0).any():
            raise StructuralError("tau diagonal must be zero")
        if not np.diag(leq).all():
            raise StructuralError("leq must be reflexive")
        coords = self.coords
        if coords is not None:
            coords = np.array(coords, dtype=float)
            if coords.ndim != 2 or coords.shape[0] != n:
                raise StructuralError(f"coords shape {coords.shape} does not match {n} labels")
            coords.setflags(write=False)
        tau.setflags(write=False)
        leq.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "leq", leq)
        object.__setattr__(self, "coords", coords)

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ParameterError(f"unknown point label {label!r}") from None

    def relation(self, i: int, j: int) -> str:
        """Relation string of the ordered pair, matching the model-space
        vocabulary."""
        if self.tau[i, j] > 0.0:
            return ms.TIMELIKE
        if self.leq[i, j]:
            return ms.NULL
        if self.tau[j, i] > 0.0 or self.leq[j, i]:
            return ms.PAST_DIRECTED
        return ms.UNRELATED


def sample_model_points(points, labels=None) -> FiniteCausalSpace:
    """Finite causal space of model-strip points with closed-form tau.

    Classification matches ads_interval entrywise: arguments within
    ARG_SLACK of the cone count as null with tau = 0.
    """
    pts = list(points)
    if not pts:
        raise ParameterError("need at least one point")
    t = np.array([p.t for p in pts])
    x = np.array([p.x for p in pts])
    arg = np.sin(t)[:, None] * np.sin(t)[None, :] + np.cos(t)[:, None] * np.cos(t)[
        None, :
    ] * np.cosh(x[None, :] - x[:, None])
    order = t[:, None] <= t[None, :]
    leq = order & (arg <= 1.0 + ms.ARG_SLACK)
    timelike = leq & (arg < 1.0 - ms.ARG_SLACK)
    tau = np.where(timelike, np.arccos(np.clip(arg, -1.0, 1.0)), 0.0)
    if labels is None:
        width = len(str(len(pts) - 1))
        labels = tuple(f"p{k:0{width}d}" for k in range(len(pts)))
    return FiniteCausalSpace(labels, tau, leq, np.column_stack([t, x]))


def _clip_violations(records):
    return tuple(records[:VIOLATION_CAP])


def validate_space(X: FiniteCausalSpace, tol: float = RTI_TOL) -> ComparisonReport:
    """Exhaustive audit of the causal-space axioms.

    Checks timelikeness (tau > 0 implies leq), transitivity of leq and
    of the chronological relation tau > 0, and the reverse triangle
    inequality over every leq-compatible triple.  All checks are
    vectorized; the report lists the first VIOLATION_CAP offenders in
    row-major order.
    """
    tau, leq = X.tau, X.leq
    n = X.size
    records = []
    count = 0
    max_deficit = 0.0

    def add(pair, lhs, rhs, deficit, note):
        nonlocal count, max_deficit
        count += 1
        max_deficit = max(max_deficit, deficit)
        if len(records) < VIOLATION_CAP:
            records.append(Violation(pair, lhs, rhs, deficit, note))

    bad = (tau > 0.0) & ~leq
    for i, j in zip(*np.nonzero(bad)):
        add((int(i), int(j)), float(tau[i, j]), 0.0, float(tau[i, j]),
            "timelike pair is not leq-related")

    reach = leq @ leq
    for i, j in zip(*np.nonzero(reach & ~leq)):
        add((int(i), int(j)), 1.0, 0.0, 1.0, "leq is not transitive")

    ll = tau > 0.0
    for i, j in zip(*np.nonzero((ll @ ll) & ~ll)):
        add((int(i), int(j)), 1.0, 0.0, 1.0, "chronological relation is not transitive")

    checked = 3 * n * n
    for k in range(n):
        mask = leq[:, k][:, None] & leq[k, :][None, :]
        if not mask.any():
            continue
        checked += int(mask.sum())
        sums = tau[:, k][:, None] + tau[k, :][None, :]
        bad = mask & (tau + tol < sums)
        for i, j in zip(*np.nonzero(bad)):
            add((int(i), int(k), int(j)), float(tau[i, j]), float(sums[i, j]),
                float(sums[i, j] - tau[i, j]),
                "reverse triangle inequality fails through the middle point")

    return ComparisonReport(
        checked=checked,
        violations=_clip_violations(records),
        violation_count=count,
        max_deficit=max_deficit,
        verdict=count == 0,
    )


def _order_valid(leq: np.ndarray, order: np.ndarray) -> bool:
    sub = leq[np.ix_(order, order)]
    return not np.tril(sub, -1).any()


def _kahn_order(leq: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    sub = leq[np.ix_(nodes, nodes)].copy()
    np.fill_diagonal(sub, False)
    indeg = sub.sum(axis=0)
    ready = [int(nodes[r]) for r in np.nonzero(indeg == 0)[0]]
    heapq.heapify(ready)
    pos = {int(node): r for r, node in enumerate(nodes)}
    order = []
    while ready:
        node = heapq.heappop(ready)
        r = pos[node]
        order.append(node)
        for m in np.nonzero(sub[r])[0]:
            indeg[m] -= 1
            if indeg[m] == 0:
                heapq.heappush(ready, int(nodes[m]))
    if len(order) != len(nodes):
        raise CausalityError("causal relation has a cycle among distinct points")
    return np.array(order, dtype=int)


def _topological_order(X: FiniteCausalSpace, nodes: np.ndarray) -> np.ndarray:
    """Topological order of the node subset, smallest-index deterministic.

    Uses the time coordinate as a sort key when coords are present and
    the resulting order respects leq; otherwise falls back to Kahn's
    algorithm, which also detects cycles.
    """
    if X.coords is not None:
        order = nodes[np.lexsort((nodes, X.coords[nodes, 0]))]
        if _order_valid(X.leq, order):
            return order
    return _kahn_order(X.leq, nodes)


def longest_chain(X: FiniteCausalSpace, i: int, j: int) -> Chain:
    """Chain from i to j maximizing the summed time separation.

    Dynamic programming over a topological order of the causal interval
    [i, j]; ties (within a rounding collar, since floating sums along a
    realizer drift by an ulp per hop) break toward the earliest achieving
    point, which in particular walks through every point lying on a
    realizer.  The value never exceeds tau(i, j) on a space satisfying
    the reverse triangle inequality, up to the same collar.
    """
    n = X.size
    for name, v in (("i", i), ("j", j)):
        if not 0 <= v < n:
            raise ParameterError(f"{name} = {v!r} out of range for {n} points")
    if not X.leq[i, j]:
        raise ChainError(f"points {i} and {j} are not causally related")
    if i == j:
        return Chain((i,), (0.0,))
    nodes = np.nonzero(X.leq[i] & X.leq[:, j])[0]
    order = _topological_order(X, nodes)
    m = len(order)
    pos = {int(node): r for r, node in enumerate(order)}
    ri, rj = pos[i], pos[j]
    T = X.tau[np.ix_(order, order)]
    A = X.leq[np.ix_(order, order)].copy()
    np.fill_diagonal(A, False)
    best = np.full(m, -np.inf)
    best[rj] = 0.0
    for r in range(m - 1, -1, -1):
        if r == rj:
            continue
        succ = A[r] & (best > -np.inf)
        if succ.any():
            best[r] = np.max(T[r, succ] + best[succ])
    if best[ri] == -np.inf:
        raise ChainError(f"points {i} and {j} are not connected by a chain")
    indices = [int(i)]
    params = [0.0]
    r = ri
    while r != rj:
        succ = np.nonzero(A[r] & (best > -np.inf))[0]
        achieving = succ[T[r, succ] + best[succ] >= best[r] - RECON_COLLAR]
        r_next = achieving[np.argmin(order[achieving])]
        params.append(params[-1] + float(T[r, r_next]))
        r = int(r_next)
        indices.append(int(order[r]))
    return Chain(tuple(indices), tuple(params))


def make_chain(X: FiniteCausalSpace, indices) -> Chain:
    """Chain through the given indices, with params accumulated from tau.

    Consecutive pairs must be leq-related.
    """
    idx = [int(k) for k in indices]
    for a, b in zip(idx, idx[1:]):
        if not X.leq[a, b]:
            raise ChainError(f"consecutive points {a}, {b} are not causally related")
    params = [0.0]
    for a, b in zip(idx, idx[1:]):
        params.append(params[-1] + float(X.tau[a, b]))
    return Chain(tuple(idx), tuple(params))


def _realize_clamped(a12: float, a23: float, a13: float, eps: float):
    """Realize sides, clamping a13 up to a12 + a23 when within eps.

    Chain values can undershoot the reverse triangle inequality by the
    discretization budget; the clamp restores feasibility and is
    reported via the returned note.
    """
    note = ""
    if a13 < a12 + a23:
        if a13 + eps < a12 + a23:
            raise ChainError(
                f"side {a13!r} undershoots {a12 + a23!r} beyond the eps budget {eps!r}"
            )
        note = f"long side clamped from {a13!r} to {a12 + a23!r}"
        a13 = a12 + a23
    tri = ms.realize_triangle(ms.TriangleSides(a12, a23, a13, 1))
    return tri, a13, note


def _check_triangle_inputs(X, verts, chains):
    i, j, k = (int(v) for v in verts)
    c12, c23, c13 = chains
    expected = ((c12, i, j), (c23, j, k), (c13, i, k))
    for chain, a, b in expected:
        if chain.indices[0] != a or chain.indices[-1] != b:
            raise ParameterError(
                f"chain endpoints {chain.indices[0]}..{chain.indices[-1]} "
                f"do not match vertices ({a}, {b})"
            )
    for a, b in ((i, j), (j, k), (i, k)):
        if not X.tau[a, b] > 0.0:
            raise ParameterError(f"vertex pair ({a}, {b}) is not timelike related")
    return i, j, k


def _stale_check(X, chains, pairs, eps):
    for chain, (a, b) in zip(chains, pairs):
        if chain.value < X.tau[a, b] - eps:
            raise ChainError(
                f"chain {a}..{b} value {chain.value!r} is stale against "
                f"tau = {X.tau[a, b]!r} (eps = {eps!r})"
            )


def check_triangle_comparison(
    X: FiniteCausalSpace, verts, chains, tol: float, eps: float = None
) -> ComparisonReport:
    """Triangle comparison of a chained timelike triangle against the model.

    Realizes the comparison triangle for the chain values, maps every
    chain point to its comparison point by cumulative parameter, and for
    every ordered pair of mapped points checks the curvature bound
    tau(u, v) <= tau_bar(u_bar, v_bar) + tol.  The reversed inequality
    is tallied in the excess fields so a curvature-above audit can read
    the same sweep.  Chains must be eps-maximizing against tau.
    """
    i, j, k = _check_triangle_inputs(X, verts, chains)
    c12, c23, c13 = chains
    if eps is None:
        eps = tol
    _stale_check(X, chains, ((i, j), (j, k), (i, k)), eps)
    a12, a23 = c12.value, c23.value
    tri, a13, clamp_note = _realize_clamped(a12, a23, c13.value, eps)
    notes = [clamp_note] if clamp_note else []
    for name, chain in (("12", c12), ("23", c23), ("13", c13)):
        if any(b - a <= 0.0 for a, b in zip(chain.params, chain.params[1:])):
            notes.append(f"chain {name} contains a null step (suspect realizer)")

    scale13 = a13 / c13.value
    mapped = {}
    for side, chain, scale in (("12", c12, 1.0), ("23", c23, 1.0), ("13", c13, scale13)):
        for idx, s in zip(chain.indices, chain.params):
            if idx not in mapped:
                mapped[idx] = ms.comparison_point(tri, side, s * scale)
    items = sorted(mapped.items())

    records = []
    count = 0
    checked = 0
    max_deficit = 0.0
    max_excess = 0.0
    excess_count = 0
    for u, pu in items:
        for v, pv in items:
            if u == v:
                continue
            checked += 1
            lhs = float(X.tau[u, v])
            res = ms.ads_interval(pu, pv)
            rhs = res.tau if res.relation in (ms.TIMELIKE, ms.NULL) else 0.0
            deficit = lhs - rhs
            if deficit > max_deficit:
                max_deficit = deficit
            if deficit > tol:
                count += 1
                if len(records) < VIOLATION_CAP:
                    records.append(
                        Violation((u, v), lhs, rhs, deficit, "tau exceeds comparison tau")
                    )
            excess = rhs - lhs
            if excess > max_excess:
                max_excess = excess
            if excess > tol:
                excess_count += 1

    return ComparisonReport(
        checked=checked,
        violations=_clip_violations(records),
        violation_count=count,
        max_deficit=max_deficit,
        verdict=max_deficit <= tol,
        max_excess=max_excess,
        excess_count=excess_count,
        notes=tuple(notes),
    )


def _signed_angle_at(X, a: int, x: int, b: int):
    """Signed comparison angle at x of the triangle (a, x, b) from matrix
    taus; raises UndefinedAngleError when the domain is empty."""
    omega, sigma = ms.comparison_angle(
        float(X.tau[a, x]), float(X.tau[x, a]),
        float(X.tau[x, b]), float(X.tau[b, x]),
        float(X.tau[a, b]), float(X.tau[b, a]),
    )
    return sigma * omega, sigma


def check_monotonicity(
    X: FiniteCausalSpace, vertex: int, alpha: Chain, beta: Chain, tol: float
) -> ComparisonReport:
    """Angle-monotonicity audit at a common vertex of two future chains.

    Computes the signed comparison angle on the grid of chain points
    where it is defined and verifies it is nondecreasing in each
    argument within tol.  Undefined pairs (null or unrelated across the
    chains) are skipped and counted.
    """
    vertex = int(vertex)
    if alpha.indices[0] != vertex or beta.indices[0] != vertex:
        raise ParameterError("both chains must start at the vertex")
    for chain in (alpha, beta):
        if not chain.value < math.pi:
            raise SizeBoundError("chain length reaches the size bound pi")
    arows = alpha.indices[1:]
    brows = beta.indices[1:]
    grid = np.full((len(arows), len(brows)), np.nan)
    skipped = 0
    for ia, a in enumerate(arows):
        for ib, b in enumerate(brows):
            if a == b:
                skipped += 1
                continue
            try:
                grid[ia, ib] = _signed_angle_at(X, a, vertex, b)[0]
            except GeometryError:
                skipped += 1
    if np.isnan(grid).all():
        raise UndefinedAngleError("no grid pair admits a comparison angle")

    records = []
    count = 0
    checked = 0
    max_deficit = 0.0

    def sweep(values, tag, fixed):
        nonlocal count, checked, max_deficit
        defined = [(p, v) for p, v in enumerate(values) if not math.isnan(v)]
        for (p0, v0), (p1, v1) in zip(defined, defined[1:]):
            drop = v0 - v1
            checked += 1
            if drop > max_deficit:
                max_deficit = drop
            if drop > tol:
                count += 1
                if len(records) < VIOLATION_CAP:
                    records.append(
                        Violation(
                            (tag, fixed, p0, p1), v0, v1, drop,
                            "signed comparison angle decreases along the chain",
                        )
                    )

    for ia in range(len(arows)):
        sweep(grid[ia, :], "row", ia)
    for ib in range(len(brows)):
        sweep(grid[:, ib], "col", ib)

    return ComparisonReport(
        checked=checked,
        violations=_clip_violations(records),
        violation_count=count,
        max_deficit=max_deficit,
        verdict=max_deficit <= tol,
        skipped=skipped,
    )


@dataclass(frozen=True)
class AngleEstimate:
    """Comparison angle at the smallest defined parameter pair, its sign,
    and the spread over the nearest few pairs as a resolution error bar."""

    angle: float
    sigma: int
    spread: float
    pairs_used: int


def upper_angle_estimate(
    X: FiniteCausalSpace, vertex: int, alpha: Chain, beta: Chain
) -> AngleEstimate:
    """Finite stand-in for the upper angle between two chains at a vertex.

    Uses the comparison angle at the smallest defined parameter pair;
    the spread over the four smallest defined pairs is reported because
    the continuum definition is a limit the grid cannot take.
    """
    vertex = int(vertex)
    if alpha.indices[0] != vertex or beta.indices[0] != vertex:
        raise ParameterError("both chains must start at the vertex")
    if len(alpha.indices) < 3 or len(beta.indices) < 3:
        raise ParameterError("angle estimation needs chains with at least 3 points")
    if alpha.indices == beta.indices:
        return AngleEstimate(0.0, 1, 0.0, 0)
    candidates = []
    for a, s in zip(alpha.indices[1:], alpha.params[1:]):
        for b, t in zip(beta.indices[1:], beta.params[1:]):
            if a != b:
                candidates.append((s + t, s, t, a, b))
    candidates.sort()
    found = []
    for _, s, t, a, b in candidates:
        try:
            signed, sigma = _signed_angle_at(X, a, vertex, b)
        except GeometryError:
            continue
        found.append((abs(signed), sigma))
        if len(found) == 4:
            break
    if not found:
        raise UndefinedAngleError("no parameter pair admits a comparison angle")
    angles = [a for a, _ in found]
    return AngleEstimate(found[0][0], found[0][1], max(angles) - min(angles), len(found))


def _realized_angles(tri) -> dict:
    """Unsigned hyperbolic angles of a realized triangle at its vertices."""
    spec = {
        1: (tri.x1, ("12", True), ("13", True)),
        2: (tri.x2, ("12", False), ("23", True)),
        3: (tri.x3, ("23", False), ("13", False)),
    }
    out = {}
    for vertex, (p, (sa, fa), (sb, fb)) in spec.items():
        out[vertex] = ms.hyperbolic_angle(
            p, _side_tangent(tri, sa, fa), _side_tangent(tri, sb, fb)
        )
    return out


def _side_tangent(tri, side: str, at_start: bool):
    g, la, lb = tri.sides[side]
    if at_start:
        return ms.geodesic_tangent(g, la)
    dt, dx = ms.geodesic_tangent(g, lb)
    return (-dt, -dx)


def _segment_angles(p: "ms.AdsPrimePoint", q: "ms.AdsPrimePoint"):
    """Directed tangents of the geodesic segment p -> q at both ends,
    oriented away from each endpoint; requires a timelike forward pair."""
    g, la, lb = ms.geodesic_through(p, q)
    u_p = ms.geodesic_tangent(g, la)
    dt, dx = ms.geodesic_tangent(g, lb)
    return u_p, (-dt, -dx)


def check_subdivision(
    X: FiniteCausalSpace, verts, chains, p: int, which: str, tol: float,
    eps: float = None,
) -> ComparisonReport:
    """Alexandrov-lemma audit for a subdivided timelike triangle.

    which = "across": p lies on the long side (between the first and
    last vertex) and is connected to the middle vertex; the situation is
    classified convex or concave by comparing tau with the comparison
    separation, and the implied angle dominances between the glued
    sub-comparison-triangles and the subdivided whole-triangle
    comparison are verified, together with the unconditional vertex
    inequality at the middle vertex.

    which = "future": p lies on the first side and is connected to the
    last vertex, with the inequality pattern of the future version.
    """
    if which not in ("across", "future"):
        raise ParameterError(f'which must be "across" or "future", got {which!r}')
    i, j, k = _check_triangle_inputs(X, verts, chains)
    c12, c23, c13 = chains
    if eps is None:
        eps = tol
    _stale_check(X, chains, ((i, j), (j, k), (i, k)), eps)
    p = int(p)
    host = c13 if which == "across" else c12
    if p not in host.indices[1:-1]:
        raise ParameterError(
            f"p = {p} is not an interior point of the side chain {host.indices}"
        )
    s_p = host.params[host.indices.index(p)]

    records = []
    count = 0
    checked = 0
    skipped = 0
    max_deficit = 0.0
    notes = []

    def compare(label, lhs, rhs, kind):
        # kind "ge": expect lhs >= rhs - tol; "le": expect lhs <= rhs + tol
        nonlocal count, checked, max_deficit
        checked += 1
        deficit = (rhs - lhs) if kind == "ge" else (lhs - rhs)
        if deficit > max_deficit:
            max_deficit = deficit
        if deficit > tol:
            count += 1
            if len(records) < VIOLATION_CAP:
                records.append(
                    Violation(label, lhs, rhs, deficit, f"expected {kind} within tol")
                )

    whole, a13w, clamp_note = _realize_clamped(c12.value, c23.value, c13.value, eps)
    if clamp_note:
        notes.append(clamp_note)
    whole_angles = _realized_angles(whole)

    if which == "across":
        up = X.tau[p, j] > 0.0
        down = X.tau[j, p] > 0.0
        if not (up or down):
            raise ParameterError(
                f"p = {p} and the middle vertex {j} are not timelike related"
            )
        conn = longest_chain(X, p, j) if up else longest_chain(X, j, p)
        c_py = conn.value
        a_xp, a_pz = s_p, c13.value - s_p
        if up:
            tri1, _, n1 = _realize_clamped(a_xp, c_py, c12.value, eps)
            tri2, _, n2 = _realize_clamped(c_py, c23.value, a_pz, eps)
            ang1, ang2 = _realized_angles(tri1), _realized_angles(tri2)
            angle_p_xy, angle_p_yz = ang1[2], ang2[1]
            angle_y_sum = ang1[3] + ang2[2]
            sub1 = (("x", 1, ang1[1]), ("p", 2, ang1[2]), ("y", 3, ang1[3]))
            sub2 = (("p", 1, ang2[1]), ("y", 2, ang2[2]), ("z", 3, ang2[3]))
        else:
            tri1, _, n1 = _realize_clamped(c12.value, c_py, a_xp, eps)
            tri2, _, n2 = _realize_clamped(c_py, a_pz, c23.value, eps)
            ang1, ang2 = _realized_angles(tri1), _realized_angles(tri2)
            angle_p_xy, angle_p_yz = ang1[3], ang2[2]
            angle_y_sum = ang1[2] + ang2[1]
            sub1 = (("x", 1, ang1[1]), ("y", 2, ang1[2]), ("p", 3, ang1[3]))
            sub2 = (("y", 1, ang2[1]), ("p", 2, ang2[2]), ("z", 3, ang2[3]))
        for n in (n1, n2):
            if n:
                notes.append(n)

        scale = a13w / c13.value
        g13, la13, _ = whole.sides["13"]
        p_t = ms.geodesic_point(g13, la13 + s_p * scale)
        y_t = whole.x2
        res = ms.ads_interval(p_t, y_t) if up else ms.ads_interval(y_t, p_t)
        tau_py = float(X.tau[p, j] if up else X.tau[j, p])
        if res.relation != ms.TIMELIKE:
            notes.append("comparison segment p-y is degenerate; angle audit skipped")
            skipped += 1
            tau_bar = res.tau
            tilde = None
        else:
            tau_bar = res.tau
            if up:
                fwd, bwd = _segment_angles(p_t, y_t)
            else:
                fwd, bwd = _segment_angles(y_t, p_t)
                fwd, bwd = bwd, fwd
            # fwd points away from p_t, bwd away from y_t
            u13_p = ms.geodesic_tangent(g13, la13 + s_p * scale)
            angle_tp_x = ms.hyperbolic_angle(p_t, (-u13_p[0], -u13_p[1]), fwd)
            angle_tp_z = ms.hyperbolic_angle(p_t, u13_p, fwd)
            angle_ty_x = ms.hyperbolic_angle(y_t, _side_tangent(whole, "12", False), bwd)
            angle_ty_z = ms.hyperbolic_angle(y_t, _side_tangent(whole, "23", True), bwd)
            if up:
                tilde = {
                    "sub1": {"x": whole_angles[1], "p": angle_tp_x, "y": angle_ty_x},
                    "sub2": {"p": angle_tp_z, "y": angle_ty_z, "z": whole_angles[3]},
                }
            else:
                tilde = {
                    "sub1": {"x": whole_angles[1], "y": angle_ty_x, "p": angle_tp_x},
                    "sub2": {"y": angle_ty_z, "p": angle_tp_z, "z": whole_angles[3]},
                }

        # When the opposite vertex lies below p, time reversal exchanges the
        # outer vertices, so the angle ordering that certifies convexity flips.
        diff_angle = (angle_p_xy - angle_p_yz) if up else (angle_p_yz - angle_p_xy)
        diff_tau = tau_bar - tau_py
        checked += 1
        if (diff_angle > tol and diff_tau < -tol) or (diff_angle < -tol and diff_tau > tol):
            gap = min(abs(diff_angle), abs(diff_tau))
            count += 1
            if gap > max_deficit:
                max_deficit = gap
            records.append(
                Violation(("classification",), diff_angle, diff_tau, gap,
                          "angle ordering contradicts the tau comparison")
            )
        shape = "convex" if diff_tau >= -tol else "concave"
        if abs(diff_tau) <= tol and abs(diff_angle) <= tol:
            shape = "degenerate"
        notes.append(f"classified {shape} (angle gap {diff_angle!r}, tau gap {diff_tau!r})")

        if tilde is not None:
            kind = "ge" if diff_tau >= -tol else "le"
            for name, triple in (("sub1", sub1), ("sub2", sub2)):
                for label, _, bar_angle in triple:
                    compare(
                        ("angle", name, label), bar_angle, tilde[name][label], kind
                    )
            if shape == "degenerate":
                for name, triple in (("sub1", sub1), ("sub2", sub2)):
                    for label, _, bar_angle in triple:
                        compare(
                            ("angle-rev", name, label), bar_angle, tilde[name][label],
                            "le" if kind == "ge" else "ge",
                        )
        compare(("vertex", "y"), angle_y_sum, whole_angles[2], "ge")

    else:
        if not X.tau[p, k] > 0.0:
            raise ParameterError(
                f"p = {p} is not timelike below the opposite vertex {k}"
            )
        conn = longest_chain(X, p, k)
        c_pz = conn.value
        a_xp, a_py = s_p, c12.value - s_p
        tri1, _, n1 = _realize_clamped(a_xp, c_pz, c13.value, eps)
        tri2, _, n2 = _realize_clamped(a_py, c23.value, c_pz, eps)
        for n in (n1, n2):
            if n:
                notes.append(n)
        ang1, ang2 = _realized_angles(tri1), _realized_angles(tri2)
        angle_p_xz, angle_p_yz = ang1[2], ang2[1]
        angle_z_sum = ang1[3] + ang2[3]
        sub1 = (("x", 1, ang1[1]), ("p", 2, ang1[2]), ("z", 3, ang1[3]))
        sub2 = (("p", 1, ang2[1]), ("y", 2, ang2[2]), ("z", 3, ang2[3]))

        g12, la12, _ = whole.sides["12"]
        p_t = ms.geodesic_point(g12, la12 + s_p)
        z_t = whole.x3
        res = ms.ads_interval(p_t, z_t)
        tau_pz = float(X.tau[p, k])
        if res.relation != ms.TIMELIKE:
            notes.append("comparison segment p-z is degenerate; angle audit skipped")
            skipped += 1
            tau_bar = res.tau
            tilde = None
        else:
            tau_bar = res.tau
            fwd, bwd = _segment_angles(p_t, z_t)
            u12_p = ms.geodesic_tangent(g12, la12 + s_p)
            angle_tp_x = ms.hyperbolic_angle(p_t, (-u12_p[0], -u12_p[1]), fwd)
            angle_tp_y = ms.hyperbolic_angle(p_t, u12_p, fwd)
            angle_tz_x = ms.hyperbolic_angle(z_t, _side_tangent(whole, "13", False), bwd)
            angle_tz_y = ms.hyperbolic_angle(z_t, _side_tangent(whole, "23", False), bwd)
            tilde = {
                "sub1": {"x": whole_angles[1], "p": angle_tp_x, "z": angle_tz_x},
                "sub2": {"p": angle_tp_y, "y": whole_angles[2], "z": angle_tz_y},
            }

        diff_angle = angle_p_xz - angle_p_yz
        diff_tau = tau_bar - tau_pz
        checked += 1
        if (diff_angle > tol and diff_tau < -tol) or (diff_angle < -tol and diff_tau > tol):
            gap = min(abs(diff_angle), abs(diff_tau))
            count += 1
            if gap > max_deficit:
                max_deficit = gap
            records.append(
                Violation(("classification",), diff_angle, diff_tau, gap,
                          "angle ordering contradicts the tau comparison")
            )
        shape = "convex" if diff_tau >= -tol else "concave"
        if abs(diff_tau) <= tol and abs(diff_angle) <= tol:
            shape = "degenerate"
        notes.append(f"classified {shape} (angle gap {diff_angle!r}, tau gap {diff_tau!r})")

        if tilde is not None:
            kind1 = "ge" if diff_tau >= -tol else "le"
            kind2 = "le" if kind1 == "ge" else "ge"
            for name, triple, kind in (("sub1", sub1, kind1), ("sub2", sub2, kind2)):
                for label, _, bar_angle in triple:
                    compare(("angle", name, label), bar_angle, tilde[name][label], kind)
            if shape == "degenerate":
                for name, triple, kind in (("sub1", sub1, kind2), ("sub2", sub2, kind1)):
                    for label, _, bar_angle in triple:
                        compare(("angle-rev", name, label), bar_angle, tilde[name][label], kind)
        compare(("vertex", "z"), angle_z_sum, whole_angles[3], "le")

    return ComparisonReport(
        checked=checked,
        violations=_clip_violations(records),
        violation_count=count,
        max_deficit=max_deficit,
        verdict=max_deficit <= tol,
        skipped=skipped,
        notes=tuple(notes),
    )


def myers_check(X: FiniteCausalSpace, tol: float = 1e-9) -> ComparisonReport:
    """Diameter audit: finite time separations may not exceed pi.

    Lists every finite entry above pi - tol as a watch record with
    deficit tau - pi; the verdict fails only when some entry exceeds
    pi + tol.
    """
    tau = X.tau
    finite = np.isfinite(tau)
    listed = finite & (tau > math.pi - tol)
    records = []
    count = 0
    max_deficit = -math.inf
    for i, j in zip(*np.nonzero(listed)):
        value = float(tau[i, j])
        count += 1
        max_deficit = max(max_deficit, value - math.pi)
        if len(records) < VIOLATION_CAP:
            records.append(
                Violation((int(i), int(j)), value, math.pi, value - math.pi,
                          "finite time separation near or above the diameter bound")
            )
    if count == 0:
        max_deficit = float(np.max(tau[finite]) - math.pi) if finite.any() else -math.pi
        return ComparisonReport(
            checked=int(finite.sum()), violations=(), violation_count=0,
            max_deficit=max_deficit, verdict=True,
        )
    return ComparisonReport(
        checked=int(finite.sum()),
        violations=_clip_violations(records),
        violation_count=count,
        max_deficit=max_deficit,
        verdict=max_deficit <= tol,
    )
