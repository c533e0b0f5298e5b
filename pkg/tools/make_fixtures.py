"""Regenerate the fixture SpaceFiles and their golden reports.

Run from the repository root:

    python3 tools/make_fixtures.py

Fixtures are small by design: a 9x9 null-coordinate diamond sample of
the model strip, a cos-suspension request over a 12-point circle net,
and a constant-warping (flat) strip request of height 4 over the same
net.  Golden reports freeze one representative command per fixture; the
determinism test replays them with 1 and 8 workers and compares bytes.
"""

import json
import math
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from llk import causal_space as cs  # noqa: E402
from llk import cli  # noqa: E402
from llk import model_space as ms  # noqa: E402

ROOT = pathlib.Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
GOLDEN = FIXTURES / "golden"


def diamond_space(n=9, half_width=0.6):
    """Null-coordinate grid sample of the model strip."""
    u = np.linspace(-half_width, half_width, n)
    points = [
        ms.AdsPrimePoint((a + b) / 2.0, (b - a) / 2.0) for a in u for b in u
    ]
    return cs.sample_model_points(points)


def circle_base(n=12, circumference=4.0):
    dist = [
        [
            (circumference / n) * min(abs(i - j), n - abs(i - j))
            for j in range(n)
        ]
        for i in range(n)
    ]
    return {"labels": [f"c{i:02d}" for i in range(n)], "dist": dist}


def suspension_request(n_times=21, delta=0.05):
    grid = np.linspace(-ms.HALF_PI + delta, ms.HALF_PI - delta, n_times)
    return {
        "kind": "suspension_request",
        "warping": {"kind": "cos"},
        "base": circle_base(),
        "t_grid": [float(t) for t in grid],
    }


def flat_strip_request(n_times=21, height=4.0, margin=0.05):
    grid = np.linspace(margin, height - margin, n_times)
    return {
        "kind": "suspension_request",
        "warping": {"kind": "constant", "value": 1.0, "interval": [0.0, height]},
        "base": circle_base(),
        "t_grid": [float(t) for t in grid],
    }


def write_json(path, doc):
    path.write_bytes(cli._render_json(doc))
    print(f"wrote {path.relative_to(ROOT)}")


def write_golden(name, command, fixture, extra=()):
    out = GOLDEN / name
    argv = [command, "--in", str(fixture), "--out", str(out), *extra]
    code = cli.main(argv)
    print(f"wrote {out.relative_to(ROOT)} (exit {code})")


def main():
    FIXTURES.mkdir(exist_ok=True)
    GOLDEN.mkdir(exist_ok=True)

    diamond = FIXTURES / "ads_diamond_81.json"
    write_json(diamond, cli.space_payload(diamond_space()))
    suspension = FIXTURES / "suspension_circle12.json"
    write_json(suspension, suspension_request())
    strip = FIXTURES / "flat_strip.json"
    write_json(strip, flat_strip_request())

    write_golden("ads_diamond_81.validate.json", "validate", diamond)
    write_golden(
        "ads_diamond_81.curvature.json", "curvature", diamond,
        ("--samples", "50", "--seed", "0"),
    )
    write_golden("suspension_circle12.split.json", "split", suspension)
    write_golden("flat_strip.myers.json", "myers", strip)


if __name__ == "__main__":
    main()
