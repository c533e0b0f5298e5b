"""Batch front door: parse space files, run checks, emit reports.

Input files are UTF-8 JSON describing either a sampled causal space
("finite_causal": labels, tau and leq matrices, optional coords; a null
tau entry encodes the +inf of an unrelated pair) or a request to build
one ("suspension_request": warping spec, base metric space, time grid).
Check commands answer with a ReportFile: a JSON document carrying the
tool version, the input digest, the effective tolerances, per-check
verdicts with violation lists, and deterministic work counters in the
timings slot, so a report is byte-identical for a fixed input, command,
seed, and tolerance set regardless of worker count.  suspend answers
with the materialized finite_causal SpaceFile and geodesics with a CSV
table; both are equally deterministic.

Randomized sweeps draw each sample from its own counter-based stream
keyed by (seed, sample index), so any partition of samples over workers
sees the same triangles.
"""

import argparse
import hashlib
import itertools
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import causal_space as cs
from . import model_space as ms
from . import rigidity as rg
from . import warped_product as wp
from .errors import (
    GeometryError,
    ParameterError,
    SizeBoundError,
    StructuralError,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

COMMANDS = (
    "validate",
    "curvature",
    "myers",
    "subdivide",
    "split",
    "suspend",
    "geodesics",
)

DRAW_TRIES = 64


@dataclass(frozen=True)
class SpaceFile:
    """Parsed input file: a causal space or a request to build one."""

    kind: str
    space: cs.FiniteCausalSpace = None
    warping: wp.WarpingSpec = None
    base: wp.FiniteMetricSpace = None
    t_grid: tuple = None


# ---------------------------------------------------------------- parsing


def _fail(path: str, message: str):
    raise StructuralError(f"{path}: {message}")


def _reject_constant(token):
    raise StructuralError(
        f"non-finite number {token} outside the null (+inf) encoding"
    )


def _load_json(raw: bytes, path: str = "<input>"):
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        _fail(path, f"not UTF-8: {exc}")
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        _fail(path, f"not JSON: {exc}")


def _number(value, path: str):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        _fail(path, "non-finite number outside the null (+inf) encoding")
    return value


def _matrix(rows, n: int, path: str, entry):
    if not isinstance(rows, list) or len(rows) != n:
        _fail(path, f"expected {n} rows")
    out = []
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            got = len(row) if isinstance(row, list) else type(row).__name__
            _fail(f"{path}[{r}]", f"expected {n} entries, got {got}")
        out.append([entry(v, f"{path}[{r}][{c}]") for c, v in enumerate(row)])
    return out


def _string_list(values, path: str):
    if not isinstance(values, list) or not values:
        _fail(path, "expected a nonempty list of labels")
    for k, v in enumerate(values):
        if not isinstance(v, str):
            _fail(f"{path}[{k}]", f"expected a string, got {v!r}")
    return list(values)


def _parse_finite_causal(doc) -> SpaceFile:
    labels = _string_list(doc.get("labels"), "labels")
    n = len(labels)

    def tau_entry(v, path):
        return None if v is None else _number(v, path)

    def leq_entry(v, path):
        if v not in (0, 1):
            _fail(path, f"expected 0 or 1, got {v!r}")
        return int(v)

    tau_rows = _matrix(doc.get("tau"), n, "tau", tau_entry)
    leq_rows = _matrix(doc.get("leq"), n, "leq", leq_entry)
    tau = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            entry = tau_rows[i][j]
            if entry is None:
                if leq_rows[i][j]:
                    _fail(f"tau[{i}][{j}]", "null (+inf) entry on a related pair")
            else:
                if entry > 0.0 and not leq_rows[i][j]:
                    _fail(f"tau[{i}][{j}]", "positive entry on an unrelated pair")
                tau[i, j] = entry
    coords = None
    if doc.get("coords") is not None:
        rows = doc["coords"]
        if not isinstance(rows, list) or len(rows) != n:
            _fail("coords", f"expected {n} rows")
        width = None
        coords = []
        for r, row in enumerate(rows):
            if not isinstance(row, list) or not row:
                _fail(f"coords[{r}]", "expected a nonempty row of numbers")
            if width is None:
                width = len(row)
            elif len(row) != width:
                _fail(f"coords[{r}]", f"expected {width} entries, got {len(row)}")
            coords.append([_number(v, f"coords[{r}][{c}]") for c, v in enumerate(row)])
    space = cs.FiniteCausalSpace(
        tuple(labels), tau, np.array(leq_rows, dtype=bool), coords
    )
    return SpaceFile(kind="finite_causal", space=space)


def _parse_warping(doc):
    if not isinstance(doc, dict):
        _fail("warping", "expected an object")
    kind = doc.get("kind")
    try:
        if kind == "cos":
            return wp.cos_warping()
        if kind == "constant":
            interval = doc.get("interval")
            if not isinstance(interval, list) or len(interval) != 2:
                _fail("warping.interval", "expected [a, b]")
            return wp.constant_warping(
                _number(doc.get("value"), "warping.value"),
                (
                    _number(interval[0], "warping.interval[0]"),
                    _number(interval[1], "warping.interval[1]"),
                ),
            )
        if kind == "table":
            knots = doc.get("knots")
            values = doc.get("values")
            if not isinstance(knots, list) or not isinstance(values, list):
                _fail("warping", "table warping needs knots and values lists")
            return wp.table_warping(
                [_number(v, f"warping.knots[{k}]") for k, v in enumerate(knots)],
                [_number(v, f"warping.values[{k}]") for k, v in enumerate(values)],
            )
    except StructuralError as exc:
        _fail("warping", str(exc))
    _fail("warping.kind", f"unknown warping kind {kind!r}")


def _parse_suspension_request(doc) -> SpaceFile:
    warping = _parse_warping(doc.get("warping"))
    base_doc = doc.get("base")
    if not isinstance(base_doc, dict):
        _fail("base", "expected an object with labels and dist")
    labels = _string_list(base_doc.get("labels"), "base.labels")
    dist = _matrix(base_doc.get("dist"), len(labels), "base.dist", _number)
    try:
        base = wp.FiniteMetricSpace(tuple(labels), np.array(dist))
    except StructuralError as exc:
        _fail("base", str(exc))
    grid_doc = doc.get("t_grid")
    if not isinstance(grid_doc, list) or not grid_doc:
        _fail("t_grid", "expected a nonempty list of times")
    t_grid = tuple(_number(v, f"t_grid[{k}]") for k, v in enumerate(grid_doc))
    return SpaceFile(
        kind="suspension_request", warping=warping, base=base, t_grid=t_grid
    )


def parse_space_file(raw: bytes) -> SpaceFile:
    """Parse and validate a SpaceFile, with path-to-field diagnostics."""
    doc = _load_json(raw)
    if not isinstance(doc, dict):
        _fail("<input>", "expected a JSON object")
    kind = doc.get("kind")
    if kind == "finite_causal":
        return _parse_finite_causal(doc)
    if kind == "suspension_request":
        return _parse_suspension_request(doc)
    _fail("kind", f"unknown kind {kind!r}")


def space_payload(X: cs.FiniteCausalSpace) -> dict:
    """finite_causal SpaceFile document for a sampled space."""
    n = X.size
    tau = [
        [float(X.tau[i, j]) if X.leq[i, j] else None for j in range(n)]
        for i in range(n)
    ]
    leq = [[int(X.leq[i, j]) for j in range(n)] for i in range(n)]
    doc = {"kind": "finite_causal", "labels": list(X.labels), "tau": tau, "leq": leq}
    if X.coords is not None:
        doc["coords"] = [[float(v) for v in row] for row in X.coords]
    return doc


def parse_geodesic_file(raw: bytes):
    """Parse a geodesic request: {"curves": [{"omega": w, "c": c}, ...]}."""
    doc = _load_json(raw)
    if not isinstance(doc, dict) or not isinstance(doc.get("curves"), list):
        _fail("curves", "expected a list of {omega, c} objects")
    curves = []
    for k, entry in enumerate(doc["curves"]):
        if not isinstance(entry, dict):
            _fail(f"curves[{k}]", "expected an object")
        curves.append(
            ms.GeodesicParams(
                _number(entry.get("omega"), f"curves[{k}].omega"),
                _number(entry.get("c"), f"curves[{k}].c"),
            )
        )
    if not curves:
        _fail("curves", "expected at least one curve")
    return curves


# ---------------------------------------------------------------- reports


def _jsonable(value):
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def _violation_dict(v: cs.Violation) -> dict:
    return {
        "pair": _jsonable(v.pair),
        "lhs": float(v.lhs),
        "rhs": float(v.rhs),
        "deficit": float(v.deficit),
        "note": v.note,
    }


def _check_dict(name: str, rep: cs.ComparisonReport, **extra) -> dict:
    out = {
        "name": name,
        "verdict": bool(rep.verdict),
        "checked": int(rep.checked),
        "skipped": int(rep.skipped),
        "violation_count": int(rep.violation_count),
        "excess_count": int(rep.excess_count),
        "max_deficit": float(rep.max_deficit),
        "max_excess": float(rep.max_excess),
        "violations": [_violation_dict(v) for v in rep.violations],
        "notes": list(rep.notes),
    }
    out.update(extra)
    return out


def _merge_reports(reports) -> cs.ComparisonReport:
    violations = []
    for rep in reports:
        if len(violations) < cs.VIOLATION_CAP:
            violations.extend(rep.violations[: cs.VIOLATION_CAP - len(violations)])
    return cs.ComparisonReport(
        checked=sum(r.checked for r in reports),
        violations=tuple(violations),
        violation_count=sum(r.violation_count for r in reports),
        max_deficit=max((r.max_deficit for r in reports), default=0.0),
        verdict=all(r.verdict for r in reports),
        max_excess=max((r.max_excess for r in reports), default=0.0),
        excess_count=sum(r.excess_count for r in reports),
        skipped=sum(r.skipped for r in reports),
    )


def report_payload(command, options, parsed, checks, work_units, digest) -> dict:
    verdict = all(c["verdict"] for c in checks)
    return {
        "tool": {"name": "llk", "version": __version__},
        "command": command,
        "input": {
            "digest": f"sha256:{digest}",
            "kind": parsed.kind,
            "points": parsed.space.size if parsed.space is not None else None,
        },
        "options": {
            "tol_exact": options.tol_exact,
            "tol_disc": options.tol_disc,
            "samples": options.samples,
            "seed": options.seed,
            "grid": options.grid,
            "step": options.step,
        },
        "checks": checks,
        "verdict": verdict,
        "timings": {"work_units": int(work_units)},
    }


def _render_json(doc) -> bytes:
    return (json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n").encode()


# ---------------------------------------------------------------- sampling


def _sample_rng(seed: int, sample: int):
    key = np.array([seed & (2**63 - 1), sample], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _draw_triangle(X: cs.FiniteCausalSpace, rng, min_sep: float):
    n = X.size
    for _ in range(DRAW_TRIES):
        trio = [int(v) for v in rng.integers(0, n, size=3)]
        if len(set(trio)) < 3:
            continue
        for a, b, c in itertools.permutations(trio):
            if (
                X.tau[a, b] > min_sep
                and X.tau[b, c] > min_sep
                and X.tau[a, c] > min_sep
            ):
                return a, b, c
    return None


def _side_chains(X, verts):
    i, j, k = verts
    return (
        cs.longest_chain(X, i, j),
        cs.longest_chain(X, j, k),
        cs.longest_chain(X, i, k),
    )


def _curvature_sample(X, seed, sample, min_sep, tol):
    rng = _sample_rng(seed, sample)
    verts = _draw_triangle(X, rng, min_sep)
    if verts is None:
        return None
    chains = _side_chains(X, verts)
    try:
        triangle = cs.check_triangle_comparison(X, verts, chains, tol)
        monotone = cs.check_monotonicity(X, verts[0], chains[0], chains[2], tol)
    except SizeBoundError:
        return "unrealizable"
    return triangle, monotone


def _subdivision_sample(X, seed, sample, min_sep, tol):
    rng = _sample_rng(seed, sample)
    for _ in range(DRAW_TRIES):
        verts = _draw_triangle(X, rng, min_sep)
        if verts is None:
            return None
        chains = _side_chains(X, verts)
        which = "across" if int(rng.integers(0, 2)) == 0 else "future"
        for attempt in (which, "future" if which == "across" else "across"):
            host = chains[2] if attempt == "across" else chains[0]
            interior = host.indices[1:-1]
            if not interior:
                continue
            p = int(interior[int(rng.integers(0, len(interior)))])
            try:
                return attempt, cs.check_subdivision(X, verts, chains, p, attempt, tol)
            except SizeBoundError:
                return "unrealizable"
    return None


def _fan_out(worker, samples: int, jobs: int):
    if jobs <= 1:
        return [worker(k) for k in range(samples)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, range(samples)))


# ---------------------------------------------------------------- commands


def _effective_tol_disc(options, X: cs.FiniteCausalSpace) -> float:
    if options.tol_disc is not None:
        return options.tol_disc
    gaps = np.where(X.tau > 0.0, X.tau, np.inf).min(axis=1)
    gaps = gaps[np.isfinite(gaps)]
    if gaps.size == 0:
        return options.tol_exact
    return 2.0 * float(np.median(gaps))


def _materialize(parsed: SpaceFile, options) -> cs.FiniteCausalSpace:
    if parsed.kind == "finite_causal":
        return parsed.space
    t_grid = parsed.t_grid
    if options.grid is not None:
        if options.grid < 2:
            raise ParameterError(f"--grid must be at least 2, got {options.grid}")
        t_grid = tuple(np.linspace(t_grid[0], t_grid[-1], options.grid))
    return wp.sample_warped_product(parsed.warping, parsed.base, t_grid)


def _cmd_validate(parsed, options):
    X = _materialize(parsed, options)
    rep = cs.validate_space(X, tol=options.tol_exact)
    checks = [_check_dict("causal_axioms", rep, tol=options.tol_exact)]
    return checks, rep.checked


def _cmd_myers(parsed, options):
    X = _materialize(parsed, options)
    rep = cs.myers_check(X, tol=options.tol_exact)
    checks = [_check_dict("diameter_bound", rep, tol=options.tol_exact)]
    return checks, rep.checked


def _cmd_curvature(parsed, options):
    X = _materialize(parsed, options)
    tol = _effective_tol_disc(options, X)
    results = _fan_out(
        lambda k: _curvature_sample(X, options.seed, k, tol, tol),
        options.samples,
        options.jobs,
    )
    drawn = [r for r in results if isinstance(r, tuple)]
    unrealizable = sum(1 for r in results if r == "unrealizable")
    triangle = _merge_reports([r[0] for r in drawn])
    monotone = _merge_reports([r[1] for r in drawn])
    extra = {
        "tol": tol,
        "triangles": len(drawn),
        "triangles_violated": sum(1 for r in drawn if r[0].violation_count > 0),
        "unrealizable": unrealizable,
        "undrawn": int(options.samples - len(drawn) - unrealizable),
    }
    checks = [
        _check_dict("triangle_comparison", triangle, **extra),
        _check_dict("monotonicity", monotone, tol=tol),
    ]
    return checks, triangle.checked + monotone.checked


def _cmd_subdivide(parsed, options):
    X = _materialize(parsed, options)
    tol = _effective_tol_disc(options, X)
    results = _fan_out(
        lambda k: _subdivision_sample(X, options.seed, k, tol, tol),
        options.samples,
        options.jobs,
    )
    drawn = [r for r in results if isinstance(r, tuple)]
    unrealizable = sum(1 for r in results if r == "unrealizable")
    checks = []
    for which in ("across", "future"):
        rep = _merge_reports([r[1] for r in drawn if r[0] == which])
        checks.append(
            _check_dict(
                f"subdivision_{which}",
                rep,
                tol=tol,
                triangles=sum(1 for r in drawn if r[0] == which),
            )
        )
    checks[0]["unrealizable"] = unrealizable
    checks[0]["undrawn"] = int(options.samples - len(drawn) - unrealizable)
    return checks, sum(c["checked"] for c in checks)


def _cmd_split(parsed, options):
    X = _materialize(parsed, options)
    gamma = rg.find_line(X)
    result = rg.build_splitting(X, gamma, tol=options.tol_disc)
    S = result.slice_space
    check = {
        "name": "splitting",
        "verdict": bool(result.verdict),
        "tol": float(result.tol),
        "collar": float(result.collar),
        "residual": float(result.residual),
        "mismatches": int(result.mismatches),
        "forgiven": int(result.forgiven),
        "line": {
            "size": gamma.size,
            "value": float(gamma.value),
            "labels": [X.labels[i] for i in gamma.indices],
        },
        "slice": {
            "labels": list(S.labels),
            "dist": [[float(v) for v in row] for row in S.dist],
        },
        "samples": len(result.samples),
    }
    return [check], len(result.samples) ** 2


# ---------------------------------------------------------------- geodesics


def emit_geodesic_table(curves, step: float) -> bytes:
    """CSV table of geodesic points sampled at the given lambda step."""
    if not (isinstance(step, (int, float)) and math.isfinite(step) and step > 0):
        raise ParameterError(f"step must be a positive number, got {step!r}")
    lines = ["curve_id,lambda,t,x"]
    for cid, g in enumerate(curves):
        reach = math.asin(min(1.0, 1.0 / math.cosh(g.omega)))
        last = int(math.floor((reach - 1e-12) / step))
        for k in range(-last, last + 1):
            lam = k * step
            p = ms.geodesic_point(g, lam)
            lines.append(f"{cid},{lam!r},{p.t!r},{p.x!r}")
    return ("\n".join(lines) + "\n").encode()


# ---------------------------------------------------------------- driver


_CHECK_COMMANDS = {
    "validate": _cmd_validate,
    "curvature": _cmd_curvature,
    "myers": _cmd_myers,
    "subdivide": _cmd_subdivide,
    "split": _cmd_split,
}


def run_command(command: str, raw: bytes, options) -> tuple:
    """Dispatch one command over raw input bytes.

    Returns (output bytes, exit code): a ReportFile for check commands,
    a SpaceFile for suspend, a CSV table for geodesics.
    """
    if command == "geodesics":
        return emit_geodesic_table(parse_geodesic_file(raw), options.step), EXIT_PASS
    parsed = parse_space_file(raw)
    if command == "suspend":
        if parsed.kind != "suspension_request":
            raise ParameterError("suspend needs a suspension_request input")
        return _render_json(space_payload(_materialize(parsed, options))), EXIT_PASS
    checks, work_units = _CHECK_COMMANDS[command](parsed, options)
    digest = hashlib.sha256(raw).hexdigest()
    report = report_payload(command, options, parsed, checks, work_units, digest)
    code = EXIT_PASS if report["verdict"] else EXIT_FAIL
    return _render_json(report), code


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="llk",
        description="Checks and reconstructions over sampled causal spaces.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--in", dest="infile", required=True, help="input JSON file")
    parser.add_argument("--out", dest="outfile", help="output file (default stdout)")
    parser.add_argument("--tol-exact", dest="tol_exact", type=float, default=1e-8)
    parser.add_argument("--tol-disc", dest="tol_disc", type=float, default=None)
    parser.add_argument("--samples", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--grid", type=int, default=None)
    parser.add_argument("--step", type=float, default=0.05)
    return parser


def main(argv=None) -> int:
    options = _build_parser().parse_args(argv)
    try:
        with open(options.infile, "rb") as handle:
            raw = handle.read()
    except OSError as exc:
        print(f"error [cli.input] {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        output, code = run_command(options.command, raw, options)
    except GeometryError as exc:
        qualified = f"{type(exc).__module__}.{type(exc).__name__}"
        print(f"error [{qualified}] {exc}", file=sys.stderr)
        return EXIT_USAGE
    if options.outfile:
        with open(options.outfile, "wb") as handle:
            handle.write(output)
    else:
        sys.stdout.write(output.decode("utf-8"))
    return code


if __name__ == "__main__":
    sys.exit(main())
