"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py`` (the lines are repeated in the
terminal summary) or ``python tests/test_acceptance.py``.
"""

import itertools
import json
import math
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from otgrowth import bounds as B
from otgrowth.ballprob import (BallSpec, ball_lower_loggrad, ball_lower_poly, ball_prob_quad,
                               density_inf_on_ball, muB0_lower)
from otgrowth.cli import run
from otgrowth.concentration import (LinearFunction, NormFunction, empirical_tail,
                                    exponential_profile, poly_tail, polytail_psi,
                                    subgaussian_profile)
from otgrowth.measures import DensityModel, sample
from otgrowth.transport import barycentric_map, check_cone_all, check_monotone, discrete_ot_exact, sq_cost

SCEN = Path(__file__).resolve().parents[1] / "scenarios"
RESULTS = []


def _cli(cmd, name, out, seed=None):
    code = run(cmd, SCEN / f"{name}.json", out, seed=seed)
    return code, json.loads((Path(out) / f"{name}_summary.json").read_text())


def _column(path, name):
    lines = Path(path).read_text().splitlines()
    i = lines[0].split(",").index(name)
    return np.array([float(ln.split(",")[i]) for ln in lines[1:]])


# -- criteria ------------------------------------------------------------------

def criterion_1():
    with tempfile.TemporaryDirectory() as out:
        code, s = _cli("verify-1d", "cauchy_to_normal", out)
        pass_col = _column(Path(out) / "cauchy_to_normal_verify1d.csv", "pass")
    ok = code == 0 and s["n_points"] == 2001 and s["violations"] == 0 and bool(s["gate"]) \
        and pass_col.size == 2001 and pass_col.all()
    return ok, f"points={s.get('n_points')} violations={s.get('violations')} max|T|/bound={s.get('max_ratio'):.4f}"


def criterion_2():
    with tempfile.TemporaryDirectory() as out:
        code, s = _cli("verify-1d", "cauchy_to_t2", out)
        path = Path(out) / "cauchy_to_t2_verify1d.csv"
        x, absT = _column(path, "x"), _column(path, "abs_T")
    tail = x > 100
    slope = np.polyfit(np.log(x[tail]), np.log(absT[tail]), 1)[0]
    ok = code == 0 and s["violations"] == 0 and abs(slope - 0.5) <= 0.15 * 0.5
    return ok, f"slope={slope:.4f} (target 0.5 +/- 15%) violations={s['violations']}"


def criterion_3():
    src = DensityModel.gaussian(0.0, 1.0, dim=2)
    tgt = DensityModel.gaussian([0.0, 0.0], [[1.0, 0.6], [0.6, 3.0]])
    mono = cone = checks = 0
    for n in (50, 100, 200):
        for seed in range(5):
            X, Y = sample(src, n, [seed, n, 0]), sample(tgt, n, [seed, n, 1])
            tmap = barycentric_map(discrete_ot_exact(X, Y, jitter_seed=seed))
            mono += check_monotone(tmap, 1e-9).n_violations
            reports, _ = check_cone_all(tmap, (0.5, 1.0, 2.0), 1e-9)
            cone += sum(len(r.violations) for r in reports)
            checks += len(reports)
    return mono == 0 and cone == 0, f"monotone violations={mono} cone violations={cone} over {checks} anchor checks"


def criterion_4():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        n, d = int(rng.integers(1, 8)), int(rng.integers(1, 4))
        X, Y = rng.standard_normal((n, d)), rng.standard_normal((n, d)) * 2 + 0.5
        C = sq_cost(X, Y)
        brute = min(C[np.arange(n), list(p)].sum() for p in itertools.permutations(range(n))) / n
        worst = max(worst, abs(discrete_ot_exact(X, Y).cost - brute))
    return worst <= 1e-9, f"max |LP - brute force| = {worst:.3g} over 100 instances"


def criterion_5():
    fails, n = [], 0
    for q in (2.0, 3.0):
        for d in (1, 2, 3):
            model = DensityModel.polyv(q, d)
            s = model.structural
            inf7 = density_inf_on_ball(model, 7.0)
            mu0 = muB0_lower(s["A"], s["V0"], d)
            u = np.zeros(d)
            u[0] = 1.0
            for r in (0.5, 1.0, 2.0, 4.0, 8.0):
                x = r * u
                for kind, lower, ball in (
                        ("poly", ball_lower_poly(s["L"], q, d, x, u, inf7), BallSpec(x + 4 * r * u, 2 * r)),
                        ("loggrad", ball_lower_loggrad(s["A"], d, x, mu0), BallSpec(x, 0.5))):
                    est = ball_prob_quad(model, ball)
                    n += 1
                    if lower > est.value + 3 * est.abserr:
                        fails.append((q, d, r, kind))
    return not fails, f"{n - len(fails)}/{n} analytic lower bounds below quadrature" + (f" fails={fails}" if fails else "")


def _tail_fails(X, prof, funcs, r_grid):
    bad = 0
    for f in funcs:
        for pt in empirical_tail(X, f, r_grid):
            bad += pt.estimate > float(prof(pt.r)) + 3 * pt.stderr
    return bad


def criterion_6():
    n = 200_000
    fails = checks = 0
    for q in (2.0, 3.0):
        for d in (1, 2):
            model = DensityModel.polyv(q, d)
            s = model.structural
            psi = polytail_psi(s["M"], s["p"], d)
            norms = np.linalg.norm(sample(model, n, [7, int(q), d]), axis=1)
            for r in (1.0, 2.0, 4.0, 8.0):
                est = np.mean(norms >= r)
                checks += 1
                fails += est > psi(r) + 3 * math.sqrt(est * (1 - est) / n)
    for d in (1, 3):
        X = sample(DensityModel.gaussian(0.0, 1.0, dim=d), n, [8, d])
        funcs = [LinearFunction(e) for e in np.eye(d)] + [NormFunction()]
        fails += _tail_fails(X, subgaussian_profile(1.0), funcs, [0.5, 1, 2, 3, 4])
        checks += len(funcs) * 5
    for b, d in ((1.0, 1), (0.5, 2)):
        model = DensityModel.laplace(b, d)
        c = model.structural
        X = sample(model, n, [9, d])
        funcs = [LinearFunction(e) for e in np.eye(d)] + [NormFunction()]
        r_grid = list(c["sigma"] * np.array([0.25, 0.5, 1.0, 2.0]))
        fails += _tail_fails(X, exponential_profile(c["c"], c["sigma"]), funcs, r_grid)
        checks += len(funcs) * 4
    return fails == 0, f"{checks - fails}/{checks} tail checks dominated (3 stderr)"


def criterion_7():
    L2 = math.log(2.0)
    hand = [
        (B.subgaussian_growth(1, 1, 1, 1, 0.0, "published"), 3 + 3 * math.sqrt(5 + L2)),
        (B.exponential_growth(1, 1, 1, 1, 1, 0.0, "published"), 2 + 3 * (5 + L2)),
        (B.generic_bound(poly_tail(1.0, 2.0), 0.04), 15.0),
        (B.generic_bound(poly_tail(1.0, 2.0, r0=2.0), 0.5), 6.0),
        (B.concentration_bound(subgaussian_profile(1.0), 0.0, math.exp(-2)), 6.0),
        (B.concentration_bound(exponential_profile(1, 1), 1.0, math.exp(-3)), 10.0),
        (B.exponential_growth(1, 1, 1, 1, 1, 3.0, "published") - B.exponential_growth(1, 1, 1, 1, 1, 1.5, "published"),
         6 * math.log(4 / 2.5)),
        (B.logconcave_growth(1, 1, 1, 1, 2, 5.0, "published"),
         B.exponential_growth(1, 1, 1, math.sqrt(math.log(2)), 2, 5.0, "published")),
        (B.polynomial_bound(1, 3, 1, 2, 1).constants["exponent"], 2.0),
        (B.unit_ball_volume(3), 4 * math.pi / 3),
    ]
    err = max(abs(a - b) / max(1.0, abs(b)) for a, b in hand)
    cauchy, lap, t3 = DensityModel.polyv(2, 1).structural, DensityModel.laplace(1.0, 1).structural, \
        DensityModel.polyv(3, 1).structural
    pairs = {
        "cauchy_to_normal": [B.subgaussian_bound(cauchy["A"], cauchy["V0"], 1.0, 1, f) for f in B.FLAVORS[:2]],
        "cauchy_to_laplace": [B.exponential_bound(cauchy["A"], cauchy["V0"], lap["c"], lap["sigma"], 1, f)
                              for f in B.FLAVORS[:2]],
        "cauchy_to_t2": [B.polynomial_bound(cauchy["L"], 2, t3["M"], t3["p"], 1, f) for f in B.FLAVORS[:2]],
        "curve_subgaussian": [B.subgaussian_bound(1, 1, 1, 1, f) for f in B.FLAVORS[:2]],
        "curve_polynomial": [B.polynomial_bound(1, 3, 1, 2, 1, f) for f in B.FLAVORS[:2]],
        "curve_logconcave": [B.logconcave_bound(1, 1, 1, 1, 4, f) for f in B.FLAVORS[:2]],
    }
    x = np.geomspace(1.0, 1e6, 400)
    spans = {}
    for name, (pub, asm) in pairs.items():
        lr = np.log(pub(x) / asm(x))
        # bounded: finite, and settled over the last decade of the grid
        settled = abs(lr[-1] - lr[-67]) < 0.05
        spans[name] = float(np.max(np.abs(lr))) if np.all(np.isfinite(lr)) and settled else math.inf
    worst = max(spans.values())
    ok = err <= 1e-9 and worst < math.log(50)
    return ok, f"max rel err {err:.2g} on {len(hand)} hand values; max |log(pub/asm)| = {worst:.3f} over {len(pairs)} scenarios"


def criterion_8():
    jobs = [("verify-1d", "cauchy_to_normal"), ("verify-1d", "cauchy_to_t2"),
            ("verify-nd", "gaussian_2d_lp"), ("verify-nd", "polyv_2d_bounds"),
            ("bound-curve", "curve_logconcave"), ("concentration-check", "tails_polyv"),
            ("concentration-check", "tails_gaussian"), ("ballprob-check", "ballprob_polyv_2d")]
    compared, diff = 0, []
    with tempfile.TemporaryDirectory() as tmp:
        for cmd, name in jobs:
            a, b = Path(tmp) / "a" / name, Path(tmp) / "b" / name
            run(cmd, SCEN / f"{name}.json", a, seed=11)
            run(cmd, SCEN / f"{name}.json", b, seed=11)
            for f in sorted(a.glob("*.csv")):
                compared += 1
                if f.read_bytes() != (b / f.name).read_bytes():
                    diff.append(f.name)
    return compared > 0 and not diff, f"{compared - len(diff)}/{compared} CSV files byte-identical"


CRITERIA = [
    (1, "1D subgaussian-target domination", criterion_1, 10),
    (2, "1D polynomial-exponent recovery", criterion_2, 10),
    (3, "cone lemma exactness on LP maps", criterion_3, 60),
    (4, "LP oracle equivalence", criterion_4, 30),
    (5, "ball-bound domination", criterion_5, 60),
    (6, "tail-function validity", criterion_6, 30),
    (7, "formula fidelity", criterion_7, None),
    (8, "determinism", criterion_8, None),
]


def evaluate(num, title, fn, limit):
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failure, reported on the line
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    dt = time.perf_counter() - t0
    within = limit is None or dt < limit
    ok = bool(ok and within)
    lim = f" (limit {limit} s)" if limit else ""
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {title}: {detail}; {dt:.2f} s{lim}"
    RESULTS.append(line)
    print(line)
    return ok, line


@pytest.mark.parametrize("num,title,fn,limit", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(num, title, fn, limit):
    ok, line = evaluate(num, title, fn, limit)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(*c)[0] for c in CRITERIA]
    raise SystemExit(0 if all(results) else 1)
