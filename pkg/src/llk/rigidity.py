"""Splitting pipeline: Busemann estimates, asymptotes, parallelism, slices.

Given a finite causal space containing a near-maximal timelike line,
the operations here recover warped-product structure: Busemann-style
time estimates give each point a time coordinate, asymptote extraction
groups points into fibers, the c-functions metrize the fiber space, and
the assembled map is audited entry by entry against the cosine warped
product over the recovered base.  Everything is deterministic; no
operation mutates its input space.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import causal_space as cs
from . import model_space as ms
from . import warped_product as wp
from .errors import (
    ChainError,
    ConvergenceError,
    DataQualityError,
    DomainError,
    ExtractionError,
    GeometryError,
    InfeasibleError,
    ParameterError,
    SizeBoundError,
    StructuralError,
)

# table entries this close to the strip edge leave the verdict (1/cos blowup)
EDGE_COS = 0.05

# fiber-membership defect below this is attributed to rounding, not geometry
MEMBER_FLOOR = 1e-6

# line params must reproduce the sampled time separations this closely
LINE_TOL = 1e-6

# parallel distances at or below this are treated as zero when grouping
ZERO_C = 1e-9

# slack allowed between a line's value and pi minus twice its edge margin
SPAN_TOL = 1e-9


def _clamp_unit(v: float) -> float:
    return min(1.0, max(-1.0, v))


@dataclass(frozen=True)
class LineSample:
    """Sampled timelike line of near-maximal length.

    indices lists the sample points in time order; params holds their
    time coordinates, strictly increasing with increments equal to the
    pairwise time separations; delta is the edge margin, so the params
    span an interval of length pi - 2 delta inside (-pi/2, pi/2).
    """

    indices: tuple
    params: tuple
    delta: float

    def __post_init__(self):
        indices = tuple(int(k) for k in self.indices)
        params = tuple(float(q) for q in self.params)
        if len(indices) != len(params):
            raise ParameterError("indices and params must have equal length")
        if len(indices) < 2:
            raise ParameterError("a line sample needs at least two points")
        if len(set(indices)) != len(indices):
            raise ParameterError("line sample points must be distinct")
        if any(b <= a for a, b in zip(params, params[1:])):
            raise ParameterError("line params must be strictly increasing")
        if not (-ms.HALF_PI < params[0] and params[-1] < ms.HALF_PI):
            raise ParameterError("line params must lie inside (-pi/2, pi/2)")
        delta = float(self.delta)
        if not (math.isfinite(delta) and delta > 0.0):
            raise ParameterError(f"edge margin delta = {delta!r} must be positive")
        span = params[-1] - params[0]
        if abs(span - (math.pi - 2.0 * delta)) > SPAN_TOL:
            raise ParameterError(
                f"span {span!r} is inconsistent with edge margin {delta!r}"
            )
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "delta", delta)

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def value(self) -> float:
        return self.params[-1] - self.params[0]


@dataclass(frozen=True)
class BusemannValue:
    """Busemann estimates of one point against a line.

    plus and minus are the final entries of the two estimate tails
    (future and past renormalized time separations); each tail is
    ordered toward its end of the line.  certificate is the largest
    upward step observed along either tail: exact data gives 0.0 and
    the construction rejects anything above its tolerance, so a small
    positive value certifies how close to monotone the data ran.
    """

    plus: float
    minus: float
    plus_tail: tuple
    minus_tail: tuple
    certificate: float


@dataclass(frozen=True)
class ParallelReport:
    """The four c-function tables of a line pair and their verdict.

    Tables hold (s, t, value) triples over the defined parameter pairs;
    the null tables record the interpolated cone-crossing parameter as
    t.  constant is the median over entries kept by the edge rule,
    deviation the largest distance from it, and the verdict passes iff
    the deviation stays within tol.  excluded lists the entries left
    out of the verdict as (table, s, t, value).
    """

    c_ab: tuple
    c_ba: tuple
    c_null_a: tuple
    c_null_b: tuple
    constant: float
    deviation: float
    verdict: bool
    tol: float
    excluded: tuple = ()


@dataclass(frozen=True)
class SplittingResult:
    """Audit of the reconstructed warped product against the space.

    samples lists (slice label, time param, space index) triples, one
    per asymptote point; residual is the largest difference between
    sampled and reconstructed signed time separations over all sample
    pairs; mismatches counts pairs whose causal class disagrees beyond
    the near-cone collar, forgiven the ones inside it.
    """

    slice_space: wp.FiniteMetricSpace
    asymptotes: tuple
    samples: tuple
    residual: float
    mismatches: int
    forgiven: int
    tol: float
    collar: float
    verdict: bool


def line_from_chain(X: cs.FiniteCausalSpace, chain: cs.Chain) -> LineSample:
    """Line sample from a timelike chain, centered so params are symmetric.

    The chain value fixes the edge margin delta = (pi - value) / 2; a
    chain at least pi long cannot fit inside the strip.
    """
    value = chain.value
    if not value < math.pi:
        raise SizeBoundError(f"chain value {value!r} reaches the size bound pi")
    if any(b - a <= 0.0 for a, b in zip(chain.params, chain.params[1:])):
        raise ChainError("chain contains a null step and cannot be a line sample")
    half = value / 2.0
    line = LineSample(
        chain.indices,
        tuple(q - half for q in chain.params),
        (math.pi - value) / 2.0,
    )
    _require_line(X, line, "chain")
    return line


def find_line(X: cs.FiniteCausalSpace, min_value: float = 2.0) -> LineSample:
    """Longest chain in the space, as a line sample.

    Starts from the pair maximizing tau (first flat index on ties, so
    the result is deterministic) and walks the longest chain between
    them; a value below min_value means the space has no usable line.
    """
    flat = int(np.argmax(X.tau))
    i, j = np.unravel_index(flat, X.tau.shape)
    if X.tau[i, j] <= 0.0:
        raise InfeasibleError("the space has no timelike related pair")
    chain = cs.longest_chain(X, int(i), int(j))
    if chain.value < min_value:
        raise InfeasibleError(
            f"longest chain value {chain.value!r} is below min_value {min_value!r}"
        )
    return line_from_chain(X, chain)


def _require_line(X: cs.FiniteCausalSpace, line: LineSample, name: str) -> None:
    n = X.size
    for k in line.indices:
        if not 0 <= k < n:
            raise ParameterError(f"{name} index {k} out of range for {n} points")
    for (a, b), (qa, qb) in zip(
        zip(line.indices, line.indices[1:]), zip(line.params, line.params[1:])
    ):
        if abs(float(X.tau[a, b]) - (qb - qa)) > LINE_TOL:
            raise ParameterError(
                f"{name} params do not match the sampled time separations "
                f"at pair ({a}, {b})"
            )


def _line_arrays(line: LineSample):
    return np.array(line.indices, dtype=int), np.array(line.params, dtype=float)


def _median_step(line: LineSample) -> float:
    return float(np.median(np.diff(line.params)))


def busemann(
    X: cs.FiniteCausalSpace, gamma: LineSample, x: int, cert_tol: float = 1e-9
) -> BusemannValue:
    """Busemann estimates of point x against the line gamma.

    The future value is t_k - tau(x, gamma(t_k)) at the largest sampled
    t_k with a timelike relation, the past value -t_j - tau(gamma(t_j), x)
    at the smallest; both estimate tails decrease toward their limits,
    and an upward step beyond cert_tol marks the data as inconsistent.
    """
    _require_line(X, gamma, "gamma")
    x = int(x)
    if not 0 <= x < X.size:
        raise ParameterError(f"x = {x} out of range for {X.size} points")
    g_idx, g_par = _line_arrays(gamma)
    to_future = X.tau[x, g_idx]
    to_past = X.tau[g_idx, x]
    ks = np.nonzero(to_future > 0.0)[0]
    js = np.nonzero(to_past > 0.0)[0]
    if len(ks) == 0 or len(js) == 0:
        raise DomainError(
            f"point {x} is not timelike related to both ends of the line"
        )
    plus_tail = tuple(float(g_par[k] - to_future[k]) for k in ks)
    minus_tail = tuple(float(-g_par[j] - to_past[j]) for j in js[::-1])
    worst = 0.0
    for tail in (plus_tail, minus_tail):
        for a, b in zip(tail, tail[1:]):
            worst = max(worst, b - a)
    if worst > cert_tol:
        raise DataQualityError(
            f"Busemann estimate tail for point {x} increases by {worst!r}"
        )
    return BusemannValue(plus_tail[-1], minus_tail[-1], plus_tail, minus_tail, worst)


def _model_times(X: cs.FiniteCausalSpace, g_idx: np.ndarray, g_par: np.ndarray):
    """Per-point time coordinates fitted against the line.

    Solves cos tau = sin t sin T + cos t cos T cosh d for sin t from the
    last visible future row and the first visible past row of the line;
    two rows determine sin t without knowing the fiber distance d.  The
    rows straddle the point in time, so their parameter gap stays inside
    (0, pi) and the solve never degenerates.  Points lacking a strictly
    timelike row on either side are outside the line's timelike domain
    and get in_dom False.
    """
    n = X.size
    m = len(g_idx)
    txg = X.tau[:, g_idx]
    tgx = X.tau[g_idx, :].T
    fut = txg > 0.0
    pst = tgx > 0.0
    in_dom = fut.any(axis=1) & pst.any(axis=1)
    kf = m - 1 - np.argmax(fut[:, ::-1], axis=1)
    jp = np.argmax(pst, axis=1)
    rows = np.arange(n)
    t1 = g_par[kf]
    c1 = np.cos(txg[rows, kf])
    t2 = g_par[jp]
    c2 = np.cos(tgx[rows, jp])
    with np.errstate(invalid="ignore", divide="ignore"):
        u = (c1 * np.cos(t2) - c2 * np.cos(t1)) / np.sin(t1 - t2)
    th = np.where(in_dom, np.arcsin(np.clip(u, -1.0, 1.0)), np.nan)
    return th, in_dom


def _member_levels(g_par: np.ndarray, th: np.ndarray, in_dom: np.ndarray):
    """Nearest line level per point; valid within half the smallest step."""
    lev = np.abs(g_par[None, :] - th[:, None]).argmin(axis=1)
    half = float(np.min(np.diff(g_par))) / 2.0
    with np.errstate(invalid="ignore"):
        ok = in_dom & (np.abs(g_par[lev] - th) <= half)
    return lev, ok


def _membership_defect(X: cs.FiniteCausalSpace, th: np.ndarray, p: int) -> np.ndarray:
    """Comparison-plane distance between p and every point, given times.

    For a timelike pair at times s, t the quantity
    arcosh((cos tau - sin s sin t) / (cos s cos t)) is the spacelike
    separation of the pair's fibers in a two-fiber comparison strip;
    points on the asymptote through p make it vanish.  Pairs without a
    timelike relation to p get +inf.
    """
    fwd = X.tau[p] > 0.0
    rev = X.tau[:, p] > 0.0
    tau_px = np.where(fwd, X.tau[p], X.tau[:, p])
    with np.errstate(invalid="ignore", divide="ignore"):
        arg = (np.cos(tau_px) - math.sin(th[p]) * np.sin(th)) / (
            math.cos(th[p]) * np.cos(th)
        )
        h = np.arccosh(np.maximum(arg, 1.0))
    return np.where(fwd | rev, h, np.inf)


def _select_members(
    X: cs.FiniteCausalSpace,
    th: np.ndarray,
    lev: np.ndarray,
    ok: np.ndarray,
    p: int,
):
    """Asymptote membership through p: per-level argmin of the defect.

    Keeps at most one point per line level (the smallest defect, ties
    toward the smaller index), always including p itself, drops levels
    whose defect exceeds three times the median (floored so rounding
    noise never splits a fiber), and finally prunes to the longest
    timelike-chained subsequence through p, so noisy near-ties cannot
    leave an unchainable selection behind.  Returns members in time
    order.
    """
    h = _membership_defect(X, th, p)
    best = {}
    for x in np.nonzero(ok)[0]:
        x = int(x)
        if x == p or not math.isfinite(h[x]):
            continue
        key = int(lev[x])
        cand = (float(h[x]), x)
        if key not in best or cand < best[key]:
            best[key] = cand
    best[int(lev[p])] = (0.0, p)
    defects = sorted(v for v, _ in best.values())
    cutoff = max(3.0 * defects[len(defects) // 2], MEMBER_FLOOR)
    picked = sorted(
        ((x, v) for v, x in best.values() if v <= cutoff),
        key=lambda rec: (th[rec[0]], rec[0]),
    )
    return _chained_through(X, picked, p)


def _chained_through(X: cs.FiniteCausalSpace, picked, p: int):
    """Longest timelike-chained subsequence passing through p.

    picked holds (index, defect) pairs in time order including p.  Two
    independent passes find the best chain ending at p from the left
    and starting at p to the right; candidates compare by length first,
    then by smaller summed defect, so the result is deterministic.
    """
    order = [x for x, _ in picked]
    defect = {x: v for x, v in picked}
    ip = order.index(p)

    def side(indices, linked):
        best = {}
        for pos, x in enumerate(indices):
            best[x] = (1, defect[x], None)
            for y in indices[:pos]:
                if linked(y, x):
                    cand = (best[y][0] + 1, best[y][1] + defect[x], y)
                    if (-cand[0], cand[1]) < (-best[x][0], best[x][1]):
                        best[x] = cand
        out = []
        x = indices[-1] if indices else None
        while x is not None:
            out.append(x)
            x = best[x][2]
        return out[::-1]

    left = side(order[: ip + 1], lambda y, x: X.tau[y, x] > 0.0)
    right = side(order[ip:][::-1], lambda y, x: X.tau[x, y] > 0.0)
    return left[:-1] + right[::-1]


def _chain_into_line(X: cs.FiniteCausalSpace, members, th) -> LineSample:
    """Members ordered by time, parametrized by cumulative tau.

    The anchor is the member nearest time zero; its fitted time is kept
    exactly and the rest accumulate sampled separations outward, so the
    params reproduce tau along the line by construction.
    """
    order = sorted(members, key=lambda x: (th[x], x))
    a = min(range(len(order)), key=lambda i: (abs(th[order[i]]), i))
    par = [0.0] * len(order)
    for i in range(a + 1, len(order)):
        step = float(X.tau[order[i - 1], order[i]])
        if step <= 0.0:
            raise ConvergenceError(
                f"selected points {order[i - 1]} and {order[i]} are not chained"
            )
        par[i] = par[i - 1] + step
    for i in range(a - 1, -1, -1):
        step = float(X.tau[order[i], order[i + 1]])
        if step <= 0.0:
            raise ConvergenceError(
                f"selected points {order[i]} and {order[i + 1]} are not chained"
            )
        par[i] = par[i + 1] - step
    base = float(th[order[a]])
    params = tuple(base + q for q in par)
    span = params[-1] - params[0]
    if not span < math.pi:
        raise ConvergenceError(f"selected points span {span!r}, at least pi")
    return LineSample(tuple(order), params, (math.pi - span) / 2.0)


def construct_asymptote(
    X: cs.FiniteCausalSpace, gamma: LineSample, p: int
) -> LineSample:
    """The asymptote through p: the line p shares with gamma's far ends.

    Selects, per line level, the point minimizing the comparison-plane
    defect against p's fitted time, then parametrizes the selection by
    cumulative time separation anchored at the fitted time.  Fewer than
    three stable members means the sample cannot support an asymptote.
    """
    _require_line(X, gamma, "gamma")
    p = int(p)
    if not 0 <= p < X.size:
        raise ParameterError(f"p = {p} out of range for {X.size} points")
    g_idx, g_par = _line_arrays(gamma)
    th, in_dom = _model_times(X, g_idx, g_par)
    if not in_dom[p]:
        raise DomainError(
            f"point {p} is not timelike related to both ends of the line"
        )
    lev, ok = _member_levels(g_par, th, in_dom)
    members = _select_members(X, th, lev, ok, p)
    if len(members) < 3:
        raise ConvergenceError(
            f"asymptote through point {p} keeps only {len(members)} stable members"
        )
    return _chain_into_line(X, members, th)


def _c_value(tau: float, s: float, t: float) -> float:
    arg = (math.cos(tau) - math.sin(s) * math.sin(t)) / (math.cos(s) * math.cos(t))
    return math.acosh(max(arg, 1.0))


def _cone_crossing(X: cs.FiniteCausalSpace, i: int, l_idx, l_par):
    """Parameter where the future cone of point i meets the line.

    The grid infimum is the first causally related row; when that row
    is strictly timelike the crossing is pulled inside the bracketing
    interval by solving u sin t + v cos t = 1, the two-row model fit of
    the point against the line.  Returns None when no row is related.
    """
    first = None
    for k in range(len(l_idx)):
        if X.leq[i, l_idx[k]]:
            first = k
            break
    if first is None:
        return None
    hi = float(l_par[first])
    if X.tau[i, l_idx[first]] <= 0.0:
        return hi
    rows = []
    ks = [k for k in range(len(l_idx)) if X.tau[i, l_idx[k]] > 0.0]
    js = [k for k in range(len(l_idx)) if X.tau[l_idx[k], i] > 0.0]
    if ks:
        rows.append((float(l_par[ks[-1]]), math.cos(float(X.tau[i, l_idx[ks[-1]]]))))
    if js:
        rows.append((float(l_par[js[0]]), math.cos(float(X.tau[l_idx[js[0]], i]))))
    if len(rows) < 2 and len(ks) >= 2:
        rows.append((float(l_par[ks[-2]]), math.cos(float(X.tau[i, l_idx[ks[-2]]]))))
    if len(rows) < 2:
        return hi
    (t1, c1), (t2, c2) = rows
    den = math.sin(t1 - t2)
    u = (c1 * math.cos(t2) - c2 * math.cos(t1)) / den
    v = (c2 * math.sin(t1) - c1 * math.sin(t2)) / den
    radius = math.hypot(u, v)
    if radius < 1.0:
        return hi
    phi = math.atan2(v, u)
    base = math.asin(min(1.0, 1.0 / radius))
    lo = float(l_par[first - 1]) if first > 0 else -ms.HALF_PI
    cands = [
        t
        for t0 in (base - phi, math.pi - base - phi)
        for t in (t0 - 2.0 * math.pi, t0, t0 + 2.0 * math.pi)
        if lo - 1e-9 <= t <= hi + 1e-9
    ]
    if not cands:
        return hi
    return min(cands, key=lambda t: abs(t - hi))


def c_functions(
    X: cs.FiniteCausalSpace,
    alpha: LineSample,
    beta: LineSample,
    tol: float = None,
    edge_cos: float = EDGE_COS,
) -> ParallelReport:
    """The four c-function tables of a line pair.

    Pair tables evaluate the arcosh formula on every strictly timelike
    parameter pair in either direction; the null tables evaluate it at
    the cone crossing of each parameter onto the other line.  Entries
    too close to the strip edge (min cosine under edge_cos) are listed
    but excluded from the median and the verdict.  tol defaults to
    twice the median parameter step of the two lines.
    """
    _require_line(X, alpha, "alpha")
    _require_line(X, beta, "beta")
    if tol is None:
        steps = np.concatenate([np.diff(alpha.params), np.diff(beta.params)])
        tol = 2.0 * float(np.median(steps))
    a_idx, a_par = _line_arrays(alpha)
    b_idx, b_par = _line_arrays(beta)
    tables = {"ab": [], "ba": [], "null_a": [], "null_b": []}
    kept = []
    excluded = []

    def record(table, s, t, value):
        tables[table].append((float(s), float(t), float(value)))
        if min(math.cos(s), math.cos(t)) < edge_cos:
            excluded.append((table, float(s), float(t), float(value)))
        else:
            kept.append(float(value))

    for i, s in zip(a_idx, a_par):
        for j, t in zip(b_idx, b_par):
            if X.tau[i, j] > 0.0:
                record("ab", s, t, _c_value(float(X.tau[i, j]), s, t))
            if X.tau[j, i] > 0.0:
                record("ba", s, t, _c_value(float(X.tau[j, i]), s, t))
    for i, s in zip(a_idx, a_par):
        t_c = _cone_crossing(X, int(i), b_idx, b_par)
        if t_c is not None:
            record("null_a", s, t_c, _c_value(0.0, s, t_c))
    for j, t in zip(b_idx, b_par):
        s_c = _cone_crossing(X, int(j), a_idx, a_par)
        if s_c is not None:
            record("null_b", t, s_c, _c_value(0.0, t, s_c))

    if not any(tables.values()):
        raise DomainError("the lines share no causally related parameter pairs")
    if kept:
        constant = float(np.median(kept))
        deviation = float(np.max(np.abs(np.array(kept) - constant)))
    else:
        constant = float(np.median([e[3] for e in excluded]))
        deviation = math.inf
    return ParallelReport(
        c_ab=tuple(tables["ab"]),
        c_ba=tuple(tables["ba"]),
        c_null_a=tuple(tables["null_a"]),
        c_null_b=tuple(tables["null_b"]),
        constant=constant,
        deviation=deviation,
        verdict=deviation <= tol,
        tol=float(tol),
        excluded=tuple(excluded),
    )


def check_parallel(
    X: cs.FiniteCausalSpace, alpha: LineSample, beta: LineSample, tol: float = None
):
    """Whether two lines run parallel, and at what spacelike distance."""
    report = c_functions(X, alpha, beta, tol=tol)
    return report.verdict, report.constant


def _floyd_warshall(dist: np.ndarray) -> np.ndarray:
    closed = dist.copy()
    for k in range(closed.shape[0]):
        closed = np.minimum(closed, closed[:, k][:, None] + closed[k, :][None, :])
    return closed


def extract_slice(
    X: cs.FiniteCausalSpace, gamma: LineSample, metric_slack: float = None
):
    """The slice of fibers over gamma and its parallel-distance metric.

    Constructs the asymptote through every point of the line's timelike
    domain, groups points whose asymptotes share the same member set,
    merges groups closer than half the smallest nonzero parallel
    distance, and metrizes the result by pairwise parallel distance.
    Labels come from each group's member nearest time zero.  Triangle
    violations are repaired by shortest paths up to metric_slack, which
    defaults to twice the median line step or twice the worst c-table
    deviation observed, whichever is larger: distances are only as
    trustworthy as the tables they came from.  Larger violations fail
    the extraction.
    """
    _require_line(X, gamma, "gamma")
    g_idx, g_par = _line_arrays(gamma)
    th, in_dom = _model_times(X, g_idx, g_par)
    lev, ok = _member_levels(g_par, th, in_dom)

    lines = {}
    counts = {}
    for p in np.nonzero(in_dom)[0]:
        members = _select_members(X, th, lev, ok, int(p))
        if len(members) < 3:
            raise ConvergenceError(
                f"asymptote through point {int(p)} keeps only "
                f"{len(members)} stable members"
            )
        key = tuple(members)
        counts[key] = counts.get(key, 0) + 1
        if key not in lines:
            lines[key] = _chain_into_line(X, members, th)
    keys = sorted(lines, key=lambda k: (min(k), k))

    parent = list(range(len(keys)))

    def root(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    # asymptotes through a shared point coincide in the limit, so key
    # variants sharing a majority of members are the same fiber read
    # through noise; merge them before any distance is trusted
    sets = [set(k) for k in keys]
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            common = len(sets[a] & sets[b])
            if common > min(len(sets[a]), len(sets[b])) / 2.0:
                parent[root(b)] = root(a)
    families = {}
    for a in range(len(keys)):
        families.setdefault(root(a), []).append(a)
    # each family speaks through the key produced by the most points:
    # the majority reading of the fiber, not whichever variant happened
    # to contain the smallest index
    heads = [
        min(ks, key=lambda a: (-counts[keys[a]], keys[a]))
        for ks in sorted(families.values(), key=min)
    ]
    head_lines = [lines[keys[h]] for h in heads]

    m = len(heads)
    dist = np.zeros((m, m))
    worst_dev = 0.0
    for a in range(m):
        for b in range(a + 1, m):
            report = c_functions(X, head_lines[a], head_lines[b])
            dist[a, b] = dist[b, a] = report.constant
            if math.isfinite(report.deviation):
                worst_dev = max(worst_dev, report.deviation)
    if metric_slack is None:
        metric_slack = max(2.0 * _median_step(gamma), 2.0 * worst_dev)

    parent = list(range(m))
    off = dist[~np.eye(m, dtype=bool)]
    positive = off[off > ZERO_C]
    threshold = max(ZERO_C, float(positive.min()) / 2.0) if len(positive) else math.inf
    for a in range(m):
        for b in range(a + 1, m):
            if dist[a, b] < threshold:
                parent[root(b)] = root(a)

    groups = {}
    for a in range(m):
        groups.setdefault(root(a), []).append(a)
    reps = sorted(min(members) for members in groups.values())
    rep_lines = [head_lines[r] for r in reps]

    labels = []
    seen = set()
    for line in rep_lines:
        at = min(range(line.size), key=lambda i: (abs(line.params[i]), i))
        label = X.labels[line.indices[at]]
        while label in seen:
            label += "'"
        seen.add(label)
        labels.append(label)

    k = len(reps)
    d_s = np.zeros((k, k))
    for a in range(k):
        for b in range(a + 1, k):
            d_s[a, b] = d_s[b, a] = dist[reps[a], reps[b]]
    repaired = _floyd_warshall(d_s)
    slack = float(np.max(d_s - repaired))
    if slack > metric_slack:
        raise ExtractionError(
            f"parallel distances violate the triangle inequality by {slack!r}"
        )
    try:
        slice_space = wp.FiniteMetricSpace(tuple(labels), repaired)
    except StructuralError as exc:
        raise ExtractionError(f"parallel distances do not form a metric: {exc}")
    return slice_space, tuple(rep_lines)


def build_splitting(
    X: cs.FiniteCausalSpace,
    gamma: LineSample,
    tol: float = None,
    collar: float = None,
) -> SplittingResult:
    """Reconstruct the warped product over the slice and audit it.

    Every asymptote point is a sample of the map (time param, slice
    point) -> space point.  The residual is the largest difference of
    signed time separations between the space and the cosine warped
    product over the recovered metric; causal-class disagreements are
    mismatches unless the pair sits within collar of the reconstructed
    null cone, where grid quantization decides the class, not geometry.
    Both tolerances default to twice the median line step.
    """
    step = _median_step(gamma)
    if tol is None:
        tol = 2.0 * step
    if collar is None:
        collar = 2.0 * step
    slice_space, asymptotes = extract_slice(X, gamma)

    samples = []
    for b, line in enumerate(asymptotes):
        for q, idx in zip(line.params, line.indices):
            samples.append((slice_space.labels[b], float(q), int(idx)))
    samples.sort(key=lambda rec: (rec[0], rec[1]))
    svals = np.array([rec[1] for rec in samples])
    bidx = np.array([slice_space.index(rec[0]) for rec in samples])
    xidx = np.array([rec[2] for rec in samples])

    tau_x = X.tau[np.ix_(xidx, xidx)]
    leq_x = X.leq[np.ix_(xidx, xidx)]
    signed_x = tau_x - tau_x.T

    dmat = slice_space.dist[np.ix_(bidx, bidx)]
    arg = np.sin(svals)[:, None] * np.sin(svals)[None, :] + np.cos(svals)[
        :, None
    ] * np.cos(svals)[None, :] * np.cosh(dmat)
    future = svals[None, :] > svals[:, None]
    timelike_w = future & (arg < 1.0 - wp.NULL_BAND)
    wtau = np.where(timelike_w, np.arccos(np.clip(arg, -1.0, 1.0)), 0.0)
    signed_w = wtau - wtau.T

    distinct = xidx[:, None] != xidx[None, :]
    residual = float(np.max(np.abs(np.where(distinct, signed_x - signed_w, 0.0))))

    null_x = leq_x & (tau_x <= 0.0) & distinct
    cls_x = np.where(tau_x > 0.0, 2, np.where(null_x, 1, 0))
    null_w = future & (np.abs(arg - 1.0) <= wp.NULL_BAND)
    cls_w = np.where(timelike_w, 2, np.where(null_w, 1, 0))
    mismatch = (cls_x != cls_w) & distinct

    lam = np.log(np.tan(svals / 2.0 + math.pi / 4.0))
    margin = np.abs(dmat - np.abs(lam[None, :] - lam[:, None]))
    near_cone = margin <= collar
    upper = np.triu(np.ones_like(mismatch, dtype=bool), 1)
    bad = (mismatch | mismatch.T) & upper
    forgiven = int(np.count_nonzero(bad & near_cone))
    mismatches = int(np.count_nonzero(bad & ~near_cone))

    return SplittingResult(
        slice_space=slice_space,
        asymptotes=asymptotes,
        samples=tuple(samples),
        residual=residual,
        mismatches=mismatches,
        forgiven=forgiven,
        tol=float(tol),
        collar=float(collar),
        verdict=(residual <= tol) and mismatches == 0,
    )


def stacking_audit(
    X: cs.FiniteCausalSpace,
    gamma: LineSample,
    p: int,
    t1: float,
    t2: float,
    t3: float,
    tol: float = 1e-9,
) -> cs.ComparisonReport:
    """Audit that comparison configurations along a line stack.

    Realizes the comparison triangles of (p, y1, y2) and (p, y2, y3) for
    line rows y_i at params t1 < t2 < t3, glues them along the shared
    side, and checks that the images of y1, y2, y3 are collinear: the
    glued distance from y1-bar to y3-bar must equal the sum of the two
    line segments, as must the sampled separation.  The sweep then
    verifies the comparison angle at y2 between p and every other usable
    row is one constant.
    """
    _require_line(X, gamma, "gamma")
    p = int(p)
    if not 0 <= p < X.size:
        raise ParameterError(f"p = {p} out of range for {X.size} points")
    if p in gamma.indices:
        raise ParameterError("p lies on the line; the stacked triangles degenerate")
    if not t1 < t2 < t3:
        raise ParameterError("params must satisfy t1 < t2 < t3")
    g_par = np.array(gamma.params)
    rows = []
    for t in (t1, t2, t3):
        k = int(np.argmin(np.abs(g_par - t)))
        if abs(g_par[k] - t) > 1e-9:
            raise ParameterError(f"t = {t!r} is not a sampled line parameter")
        rows.append(int(gamma.indices[k]))
    y1, y2, y3 = rows
    for y, t in zip(rows, (t1, t2, t3)):
        if X.tau[p, y] <= 0.0 and X.tau[y, p] <= 0.0:
            raise DomainError(f"p is not timelike related to the row at t = {t!r}")

    def directed(a, b):
        return float(X.tau[a, b]), float(X.tau[b, a])

    omega1, _ = ms.comparison_angle(
        *directed(y1, y2), *directed(y2, p), *directed(y1, p)
    )
    omega2, _ = ms.comparison_angle(
        *directed(y3, y2), *directed(y2, p), *directed(y3, p)
    )
    len12 = float(X.tau[y1, y2])
    len23 = float(X.tau[y2, y3])
    len13 = float(X.tau[y1, y3])
    # relative rapidity of the glued segments at y2-bar: both future
    # representatives sit on the same side of the shared side p-bar,y2-bar
    glued = math.acos(
        _clamp_unit(
            math.cos(len12) * math.cos(len23)
            - math.sin(len12) * math.sin(len23) * math.cosh(omega1 - omega2)
        )
    )

    records = []
    checked = 0
    max_deficit = 0.0

    def check(pair, lhs, rhs, note):
        nonlocal checked, max_deficit
        checked += 1
        dev = abs(lhs - rhs)
        if dev > max_deficit:
            max_deficit = dev
        if dev > tol:
            records.append(cs.Violation(pair, lhs, rhs, dev, note))

    check((y1, y2, y3), glued, len12 + len23, "glued images are not collinear")
    check((y1, y3), len13, len12 + len23, "line separation is not additive")

    sweep = []
    skipped = 0
    for k, y in enumerate(gamma.indices):
        if y == y2:
            continue
        try:
            omega, _ = ms.comparison_angle(
                *directed(y, y2), *directed(y2, p), *directed(y, p)
            )
        except GeometryError:
            skipped += 1
            continue
        sweep.append((k, omega))
    if sweep:
        ref = float(np.median([w for _, w in sweep]))
        for k, omega in sweep:
            check((y2, gamma.indices[k]), omega, ref, "comparison angle drifts")

    return cs.ComparisonReport(
        checked=checked,
        violations=tuple(records[: cs.VIOLATION_CAP]),
        violation_count=len(records),
        max_deficit=max_deficit,
        verdict=max_deficit <= tol,
        skipped=skipped,
    )


def check_slice_alexandrov(
    S: wp.FiniteMetricSpace, tol: float = 1e-6
) -> cs.ComparisonReport:
    """Lower curvature bound -1 on a finite metric space, by quadruples.

    For every center a and triple b, c, d the three comparison angles at
    a, realized in the hyperbolic plane by the law of cosines, must sum
    to at most 2 pi + tol.  Quadruples with a zero distance are skipped.
    The default tol absorbs arccos rounding at collinear triples.
    """
    n = S.size
    dist = S.dist
    ch = np.cosh(dist)
    sh = np.sinh(dist)

    def angle(a, b, c):
        num = ch[a, b] * ch[a, c] - ch[b, c]
        den = sh[a, b] * sh[a, c]
        return math.acos(_clamp_unit(num / den))

    records = []
    count = 0
    checked = 0
    skipped = 0
    max_deficit = 0.0
    bound = 2.0 * math.pi
    for a in range(n):
        others = [x for x in range(n) if x != a]
        for b, c, d in itertools.combinations(others, 3):
            if min(dist[a, b], dist[a, c], dist[a, d], dist[b, c], dist[c, d], dist[b, d]) <= 0.0:
                skipped += 1
                continue
            total = angle(a, b, c) + angle(a, c, d) + angle(a, d, b)
            checked += 1
            deficit = total - bound
            if deficit > max_deficit:
                max_deficit = deficit
            if deficit > tol:
                count += 1
                if len(records) < cs.VIOLATION_CAP:
                    records.append(
                        cs.Violation(
                            (a, b, c, d),
                            total,
                            bound,
                            deficit,
                            "comparison angles at the center exceed a full turn",
                        )
                    )
    return cs.ComparisonReport(
        checked=checked,
        violations=tuple(records),
        violation_count=count,
        max_deficit=max(max_deficit, 0.0),
        verdict=max_deficit <= tol,
        skipped=skipped,
    )
