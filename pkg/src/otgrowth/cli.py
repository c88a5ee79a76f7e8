"""Scenario-driven command line harness.

Each subcommand reads a JSON scenario, verifies the declared hypotheses,
and only then writes CSV reports plus a JSON summary into ``--out-dir``.

Exit codes: 0 all checks pass, 2 invariant violation, 3 hypothesis gate
failure, 4 configuration error.
"""

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import jsonschema
import numpy as np

from . import bounds as B
from .ballprob import (ball_lower_loggrad, ball_lower_poly, ball_prob_mc, ball_prob_quad,
                       density_inf_on_ball, muB0_lower, write_ballprob_csv, BallSpec)
from .concentration import (LinearFunction, NormFunction, empirical_tail, exponential_profile,
                            polytail_psi, subgaussian_profile, write_tail_csv, TailPoint)
from .errors import ConfigurationError, DomainError, GateFailure, OTGrowthError
from .measures import DensityModel, radial_grid, sample, verify_log_grad_decay
from .transport import (barycentric_map, check_cone_all, check_monotone, discrete_ot_exact,
                        default_grid, quantile_map_1d, sinkhorn)

EXIT_OK, EXIT_VIOLATION, EXIT_GATE, EXIT_CONFIG = 0, 2, 3, 4

CONCENTRATION_THEOREMS = ("subgaussian_target", "exponential_target", "logconcave_target")
GROWTH_THEOREMS = CONCENTRATION_THEOREMS + ("polynomial_densities",)

FAMILY_PARAMS = {
    "gaussian": {"mean", "cov"},
    "polyv": {"q", "kappa"},
    "uniform": {"low", "high"},
    "laplace": {"scale"},
}

_NUM = {"type": "number"}
_NUM_OR_LIST = {"anyOf": [_NUM, {"type": "array", "items": _NUM}]}

_MODEL_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["family"],
    "properties": {
        "family": {"enum": sorted(FAMILY_PARAMS)},
        "dim": {"type": "integer", "minimum": 1},
        "params": {"type": "object"},
        "declared": {"type": "object", "additionalProperties": _NUM},
        "concentration": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "params"],
            "properties": {
                "kind": {"enum": ["subgaussian", "exponential", "polytail"]},
                "params": {"type": "object", "additionalProperties": _NUM},
            },
        },
    },
}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema"],
    "properties": {
        "schema": {"const": 1},
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "source": _MODEL_SCHEMA,
        "target": _MODEL_SCHEMA,
        "theorem": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": list(GROWTH_THEOREMS)},
                "flavor": {"enum": ["published", "assembled", "both"]},
                "params": {"type": "object", "additionalProperties": _NUM_OR_LIST},
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "p_min": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
                "points": {"type": "array", "items": _NUM, "minItems": 1},
                "x_min": {"type": "number", "exclusiveMinimum": 0},
                "x_max": {"type": "number", "exclusiveMinimum": 0},
                "include_zero": {"type": "boolean"},
                "n_source": {"type": "integer", "minimum": 2},
                "n_target": {"type": "integer", "minimum": 2},
                "lambdas": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                "r": {"type": "array", "items": _NUM, "minItems": 1},
                "x_norms": {"type": "array", "items": {"type": "number", "minimum": 0}},
            },
        },
        "mc": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "seeds": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
                "method": {"enum": ["auto", "quad", "mc"]},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "stat_sigmas": {"type": "number", "minimum": 0},
                "numeric": {"type": "number", "minimum": 0},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["exact", "sinkhorn"]},
                "epsilon": {"type": "number", "exclusiveMinimum": 0},
                "eps_start": {"type": "number", "exclusiveMinimum": 0},
                "max_iter": {"type": "integer", "minimum": 1},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "lp_cap": {"type": "integer", "minimum": 2},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"prefix": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"}},
        },
    },
}


# -- scenario loading ---------------------------------------------------------

def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as fh:
            sc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read scenario {path}: {exc}") from exc
    validate_scenario(sc)
    sc.setdefault("name", Path(path).stem)
    return sc


def validate_scenario(sc):
    try:
        jsonschema.validate(sc, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigurationError(f"scenario invalid at {where}: {exc.message}") from exc


def build_model(spec, role):
    if spec is None:
        raise ConfigurationError(f"scenario has no {role}")
    fam = spec["family"]
    params = dict(spec.get("params", {}))
    unknown = set(params) - FAMILY_PARAMS[fam]
    if unknown:
        raise ConfigurationError(f"{role}: unknown {fam} parameter(s) {sorted(unknown)}")
    dim = spec.get("dim", 1)
    if fam == "gaussian":
        return DensityModel.gaussian(params.get("mean", 0.0), params.get("cov", 1.0), dim)
    if fam == "polyv":
        if "q" not in params:
            raise ConfigurationError(f"{role}: polyv needs q")
        return DensityModel.polyv(params["q"], dim, params.get("kappa", 1.0))
    if fam == "uniform":
        return DensityModel.uniform(params.get("low", 0.0), params.get("high", 1.0), dim)
    return DensityModel.laplace(params.get("scale", 1.0), dim)


def _declared(spec, model, key):
    dec = spec.get("declared", {})
    if key in dec:
        return float(dec[key])
    if key in model.structural:
        return float(model.structural[key])
    raise ConfigurationError(f"{model!r}: structural constant {key!r} is neither declared nor known")


def _concentration(spec, model):
    """Declared concentration of a target as ``(kind, params)``."""
    if "concentration" in spec:
        c = spec["concentration"]
        return c["kind"], dict(c["params"])
    if model.family == "gaussian":
        return "subgaussian", {"sigma2": model.structural["sigma2"]}
    if model.family == "laplace":
        return "exponential", {"c": model.structural["c"], "sigma": model.structural["sigma"]}
    if model.family == "polyv":
        return "polytail", {"M": model.structural["M"], "p": model.structural["p"]}
    raise ConfigurationError(f"{model!r}: no concentration declared")


def _source_V0(model):
    return float(model.V(np.zeros((1, model.dim)))[0])


def theorem_params(sc, source, target):
    """Resolve the parameters of the scenario's theorem; explicit
    ``theorem.params`` entries override values derived from the models."""
    th = sc["theorem"]
    name = th["name"]
    given = dict(th.get("params", {}))
    out = {}
    if name in CONCENTRATION_THEOREMS:
        if source is not None:
            out["A"] = _declared(sc["source"], source, "A")
            out["V0"] = _source_V0(source)
            out["d"] = source.dim
        if target is not None and name != "logconcave_target":
            kind, cp = _concentration(sc["target"], target)
            want = "subgaussian" if name == "subgaussian_target" else "exponential"
            if kind != want:
                raise ConfigurationError(f"{name} needs a {want} target, declared {kind}")
            out.update(cp)
    else:
        if source is not None:
            out["L"] = _declared(sc["source"], source, "L")
            out["q"] = _declared(sc["source"], source, "q")
            out["d"] = source.dim
        if target is not None:
            out["M_tail"] = _declared(sc["target"], target, "M")
            out["p"] = _declared(sc["target"], target, "p")
    out.update(given)
    required = {
        "subgaussian_target": ("A", "V0", "sigma2", "d"),
        "exponential_target": ("A", "V0", "c", "sigma", "d"),
        "logconcave_target": ("A", "V0", "c1", "c2", "d"),
        "polynomial_densities": ("L", "q", "M_tail", "p", "d"),
    }[name]
    missing = [k for k in required if k not in out]
    if missing:
        raise ConfigurationError(f"{name}: missing parameter(s) {missing}")
    return out


def make_bound(name, params, flavor):
    p = params
    if name == "subgaussian_target":
        return B.subgaussian_bound(p["A"], p["V0"], p["sigma2"], p["d"], flavor)
    if name == "exponential_target":
        return B.exponential_bound(p["A"], p["V0"], p["c"], p["sigma"], p["d"], flavor)
    if name == "logconcave_target":
        return B.logconcave_bound(p["A"], p["V0"], p["c1"], p["c2"], p["d"], flavor)
    return B.polynomial_bound(p["L"], p["q"], p["M_tail"], p["p"], p["d"], flavor,
                              p.get("alpha"), p.get("density_inf_B4"))


def _flavors(flavor):
    return ("published", "assembled") if flavor == "both" else (flavor,)


def _bounds_for(name, params, flavor):
    out = {}
    for fl in _flavors(flavor):
        out[fl] = make_bound(name, params, fl)
    return out


# -- hypothesis gate ----------------------------------------------------------

def _tail_gate(target, kind, cp, n, seed, stat_sigmas):
    X = sample(target, n, [seed, 1])
    rows = []
    if kind == "polytail":
        psi = polytail_psi(cp["M"], cp["p"], target.dim)
        norms = np.linalg.norm(X, axis=1)
        for r in (1.0, 2.0, 4.0, 8.0):
            est = float(np.mean(norms >= r))
            se = math.sqrt(est * (1 - est) / n)
            rows.append({"f": "tail", "r": r, "estimate": est, "stderr": se, "bound": psi(r)})
    else:
        if kind == "subgaussian":
            prof, scale = subgaussian_profile(cp["sigma2"]), math.sqrt(cp["sigma2"])
        else:
            prof, scale = exponential_profile(cp["c"], cp["sigma"]), cp["sigma"]
        funcs = [LinearFunction(e) for e in np.eye(target.dim)]
        funcs += [LinearFunction(-np.eye(target.dim)[0]), NormFunction()]
        for f in funcs:
            tag = f.name if isinstance(f, NormFunction) else f"linear{np.round(f.theta, 3).tolist()}"
            for pt in empirical_tail(X, f, scale * np.array([0.5, 1.0, 2.0, 3.0, 4.0])):
                rows.append({"f": tag, "r": pt.r, "estimate": pt.estimate, "stderr": pt.stderr,
                             "bound": float(prof(pt.r))})
    bad = [r for r in rows if r["estimate"] > r["bound"] + stat_sigmas * r["stderr"]]
    return {"check": "target_tail", "kind": kind, "n": n, "rows": len(rows), "passed": not bad,
            "violations": bad}


def _envelope_gate(model, const, expo, upper, tol=1e-12):
    X = radial_grid(model.dim)
    r = np.linalg.norm(X, axis=1)
    with np.errstate(over="ignore"):
        V = model.V(X)
        env = const * (1.0 + r ** expo)
    bad = V > env * (1 + tol) if upper else V < env * (1 - tol)
    worst = float(np.max(V / env)) if upper else float(np.min(V / env))
    return {"check": "V_upper" if upper else "W_lower", "constant": const, "exponent": expo,
            "worst_ratio": worst, "passed": not bool(np.any(bad)), "n_points": int(X.shape[0])}


def run_gate(sc, source, target, params, seed):
    """Verify the theorem's hypotheses; raises :class:`GateFailure`."""
    name = sc["theorem"]["name"]
    tol = sc.get("tolerances", {})
    sig = tol.get("stat_sigmas", 3.0)
    n = sc.get("mc", {}).get("n", 100_000)
    checks = []
    if name in CONCENTRATION_THEOREMS:
        rep = verify_log_grad_decay(source, params["A"], radial_grid(source.dim))
        checks.append({"check": "log_grad_decay", **rep.to_dict()})
        if not rep.passed:
            raise GateFailure(f"source log-gradient decay: {rep.reason}", {"checks": checks})
        if target is not None:
            if name == "logconcave_target":
                kind = "exponential"
                cp = {"c": params["c1"], "sigma": params["c2"] * math.sqrt(math.log(params["d"]))}
            else:
                kind, cp = _concentration(sc["target"], target)
            rep = _tail_gate(target, kind, cp, n, seed, sig)
            checks.append(rep)
            if not rep["passed"]:
                raise GateFailure("target concentration not dominated by the declared profile",
                                  {"checks": checks})
    else:
        rep = _envelope_gate(source, params["L"], params["q"], upper=True)
        checks.append(rep)
        if not rep["passed"]:
            raise GateFailure("source violates V <= L(1 + |x|^q)", {"checks": checks})
        if target is not None:
            rep = _envelope_gate(target, params["M_tail"], params["p"], upper=False)
            checks.append(rep)
            if not rep["passed"]:
                raise GateFailure("target violates W >= M(1 + |y|^p)", {"checks": checks})
    return checks


# -- output helpers ------------------------------------------------------------

class Context:
    def __init__(self, sc, out_dir, seed, flavor):
        self.sc = sc
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        seeds = sc.get("mc", {}).get("seeds", [0])
        self.seed = int(seed) if seed is not None else int(seeds[0])
        self.flavor = flavor or sc.get("theorem", {}).get("flavor", "both")
        self.prefix = sc.get("outputs", {}).get("prefix", sc["name"])
        tol = sc.get("tolerances", {})
        self.stat_sigmas = float(tol.get("stat_sigmas", 3.0))
        self.numeric = float(tol.get("numeric", 1e-9))
        self.files = []

    def path(self, suffix):
        p = self.out_dir / f"{self.prefix}_{suffix}"
        self.files.append(p.name)
        return p

    def summary(self, payload, code):
        payload = {"scenario": self.sc["name"], "seed": self.seed, "exit_code": code,
                   "files": list(self.files), **payload}
        with open(self.out_dir / f"{self.prefix}_summary.json", "w", encoding="utf-8") as fh:
            json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return code


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _f(v):
    return f"{float(v):.17g}"


def _gated(ctx, source, target):
    name = ctx.sc["theorem"]["name"]
    params = theorem_params(ctx.sc, source, target)
    checks = run_gate(ctx.sc, source, target, params, ctx.seed)
    return name, params, checks


# -- subcommands -------------------------------------------------------------

def run_verify_1d(ctx):
    sc = ctx.sc
    source, target = build_model(sc.get("source"), "source"), build_model(sc.get("target"), "target")
    if source.dim != 1 or target.dim != 1:
        raise ConfigurationError("verify-1d needs 1D source and target")
    if "theorem" not in sc:
        raise ConfigurationError("verify-1d needs a theorem")
    name, params, checks = _gated(ctx, source, target)

    grid = sc.get("grid", {})
    if "points" in grid:
        x = np.unique(np.asarray(grid["points"], dtype=float))
    else:
        x = default_grid(source, grid.get("n", 2001), grid.get("p_min", 1e-6))
    tmap = quantile_map_1d(source, target, x)
    shift = float(target.center[0]) if name in CONCENTRATION_THEOREMS else 0.0
    absT = np.abs(tmap.values - shift)

    bnds = _bounds_for(name, params, ctx.flavor)
    rows = B.bound_curve(bnds.get("published"), bnds.get("assembled"), np.abs(x))
    primary = 2 if "assembled" in bnds else 1
    passed = [t <= row[primary] + ctx.numeric for t, row in zip(absT, rows)]
    with open(ctx.path("verify1d.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write("x,abs_T,bound_published,bound_assembled,pass\n")
        for xi, t, row, ok in zip(x, absT, rows, passed):
            fh.write(f"{_f(xi)},{_f(t)},{_f(row[1])},{_f(row[2])},{int(ok)}\n")
    ratios = absT / np.array([row[primary] for row in rows])
    violations = int(len(passed) - sum(passed))
    code = EXIT_VIOLATION if violations else EXIT_OK
    return ctx.summary({
        "command": "verify-1d", "theorem": name, "flavor": ctx.flavor,
        "checked_flavor": "assembled" if primary == 2 else "published",
        "gate": checks, "n_points": int(x.size), "violations": violations,
        "max_ratio": float(np.nanmax(ratios)), "target_shift": shift,
        "pushforward_error": tmap.pushforward_error,
        "published_notes": sorted({row[3] for row in rows if row[3]}),
        "bounds": {k: v.to_dict() for k, v in bnds.items()},
    }, code)


def _solve(ctx, X, Y):
    sol = ctx.sc.get("solver", {})
    kind = sol.get("kind", "exact")
    if kind == "exact":
        cap = sol.get("lp_cap", 512)
        if max(len(X), len(Y)) > cap:
            raise ConfigurationError(
                f"{max(len(X), len(Y))} points exceed the exact LP cap of {cap}; "
                "set solver.kind to 'sinkhorn' for larger problems")
        return discrete_ot_exact(X, Y, jitter_seed=ctx.seed)
    return sinkhorn(X, Y, sol.get("epsilon", 0.01), max_iter=sol.get("max_iter", 10_000),
                    tol=sol.get("tol", 1e-9), eps_start=sol.get("eps_start", 1.0))


def _ball_for(name, x, u):
    r = float(np.linalg.norm(x))
    if name == "polynomial_densities":
        lam = 2.0 * r if r >= 1.0 else 1.0
    else:
        lam = 0.5
    return x + 2.0 * lam * u, lam


def run_verify_nd(ctx):
    sc = ctx.sc
    source, target = build_model(sc.get("source"), "source"), build_model(sc.get("target"), "target")
    if source.dim != target.dim:
        raise ConfigurationError("source and target dimensions differ")
    gate = None
    if "theorem" in sc:
        name, params, gate = _gated(ctx, source, target)
    grid = sc.get("grid", {})
    n_s = grid.get("n_source", 100)
    n_t = grid.get("n_target", n_s)
    X = sample(source, n_s, [ctx.seed, 2])
    Y = sample(target, n_t, [ctx.seed, 3])
    shift = Y.mean(axis=0)
    Y = Y - shift
    coupling = _solve(ctx, X, Y)
    tmap = barycentric_map(coupling)
    tmap.write_csv(ctx.path("map.csv"))

    mono = check_monotone(tmap, ctx.numeric)
    lambdas = tuple(grid.get("lambdas", (0.5, 1.0, 2.0)))
    cone_tol = None if coupling.method == "sinkhorn" else ctx.numeric
    reports, skipped = check_cone_all(tmap, lambdas, cone_tol)
    cone_viol = sum(len(r.violations) for r in reports)

    diag = None
    if gate is not None:
        diag = _nd_bound_diagnostics(ctx, source, target, name, params, tmap)
    code = EXIT_VIOLATION if (mono.n_violations or cone_viol) else EXIT_OK
    return ctx.summary({
        "command": "verify-nd", "gate": gate, "n_source": n_s, "n_target": n_t,
        "dim": source.dim, "target_shift": shift, "solver": coupling.method,
        "coupling": {k: v for k, v in coupling.info.items() if k not in ("matching",)},
        "cost": coupling.cost, "provenance": tmap.provenance,
        "monotone": {"pairs": mono.n_pairs, "violations": mono.n_violations, "worst": mono.worst,
                     "tol": mono.tol},
        "cone": {"checks": len(reports), "violations": cone_viol, "lambdas": lambdas,
                 "skipped_anchors": skipped, "tol": reports[0].tol if reports else None,
                 "worst": min((r.worst for r in reports), default=math.inf),
                 "balls_with_points": sum(r.n_in_ball > 0 for r in reports)},
        "bound_diagnostics": diag,
    }, code)


def _nd_bound_diagnostics(ctx, source, target, name, params, tmap):
    """Compare ``|T(x_i)|`` with the analytic bound and with the abstract
    bound fed by Monte Carlo ball probabilities (statistical only)."""
    bound = make_bound(name, params, "assembled")
    n_mc = ctx.sc.get("mc", {}).get("n", 100_000)
    S = sample(source, n_mc, [ctx.seed, 4])
    if name == "polynomial_densities":
        psi = polytail_psi(params["M_tail"], params["p"], params["d"])
        invert = lambda s: B.generic_bound(psi, s)  # noqa: E731
    else:
        if name == "subgaussian_target":
            prof = subgaussian_profile(params["sigma2"])
        elif name == "exponential_target":
            prof = exponential_profile(params["c"], params["sigma"])
        else:
            prof = exponential_profile(params["c1"], params["c2"] * math.sqrt(math.log(params["d"])))
        M = bound.params["M_moment"]
        invert = lambda s: B.concentration_bound(prof, M, s)  # noqa: E731
    exceed_analytic = exceed_mc = 0
    rows = []
    for x, t in zip(tmap.sources, tmap.images):
        tn = float(np.linalg.norm(t))
        xn = float(np.linalg.norm(x))
        b = bound.evaluate(xn)
        bmc = math.nan
        if tn > 0:
            c, lam = _ball_for(name, x, t / tn)
            inside = np.count_nonzero(np.linalg.norm(S - c, axis=1) <= lam)
            p = inside / n_mc
            lower = p - ctx.stat_sigmas * math.sqrt(p * (1 - p) / n_mc)
            if lower > 0:
                bmc = invert(lower)
        exceed_analytic += tn > b
        exceed_mc += bool(tn > bmc)
        rows.append((xn, tn, b, bmc))
    with open(ctx.path("bounds.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write("x_norm,T_norm,bound_assembled,bound_mc_ball,within\n")
        for xn, tn, b, bmc in rows:
            fh.write(f"{_f(xn)},{_f(tn)},{_f(b)},{_f(bmc)},{int(tn <= b)}\n")
    return {"flag": "statistical", "n_mc": n_mc, "exceed_analytic": int(exceed_analytic),
            "exceed_mc_ball": int(exceed_mc), "max_ratio": max(r[1] / r[2] for r in rows)}


def run_bound_curve(ctx):
    sc = ctx.sc
    if "theorem" not in sc:
        raise ConfigurationError("bound-curve needs a theorem")
    source = build_model(sc["source"], "source") if "source" in sc else None
    target = build_model(sc["target"], "target") if "target" in sc else None
    name = sc["theorem"]["name"]
    params = theorem_params(sc, source, target)
    grid = sc.get("grid", {})
    x = B.log_grid(grid.get("x_min", 1e-3), grid.get("x_max", 1e6), grid.get("n", 200),
                   grid.get("include_zero", True))
    ds = params["d"] if isinstance(params["d"], list) else [params["d"]]
    curves = []
    for d in ds:
        p = dict(params, d=int(d))
        bnds = _bounds_for(name, p, ctx.flavor)
        rows = B.bound_curve(bnds.get("published"), bnds.get("assembled"), x)
        suffix = f"curve_d{int(d)}.csv" if len(ds) > 1 else "curve.csv"
        B.write_bound_curve_csv(rows, name, ctx.path(suffix))
        curves.append({"d": int(d), "degenerate_points": sum(r[3] == "published:degenerate" for r in rows),
                       "bounds": {k: v.to_dict() for k, v in bnds.items()}})
    return ctx.summary({"command": "bound-curve", "theorem": name, "flavor": ctx.flavor,
                        "curves": curves}, EXIT_OK)


def run_concentration_check(ctx):
    sc = ctx.sc
    target = build_model(sc.get("target"), "target")
    kind, cp = _concentration(sc["target"], target)
    n = sc.get("mc", {}).get("n", 100_000)
    X = sample(target, n, [ctx.seed, 1])
    grid = sc.get("grid", {})
    results = []
    if kind == "polytail":
        psi = polytail_psi(cp["M"], cp["p"], target.dim)
        r_grid = grid.get("r", [1.0, 2.0, 4.0, 8.0])
        norms = np.linalg.norm(X, axis=1)
        pts = []
        for r in r_grid:
            est = float(np.mean(norms >= r))
            pts.append(TailPoint(float(r), est, math.sqrt(est * (1 - est) / n)))
        results.append(("tail", pts, psi))
    else:
        if kind == "subgaussian":
            prof, scale = subgaussian_profile(cp["sigma2"]), math.sqrt(cp["sigma2"])
        else:
            prof, scale = exponential_profile(cp["c"], cp["sigma"]), cp["sigma"]
        r_grid = grid.get("r", (scale * np.array([0.5, 1.0, 2.0, 3.0, 4.0])).tolist())
        for i, e in enumerate(np.eye(target.dim)):
            results.append((f"linear_e{i + 1}", empirical_tail(X, LinearFunction(e), r_grid), prof))
        results.append(("norm", empirical_tail(X, NormFunction(), r_grid), prof))
    failures = 0
    for tag, pts, bound in results:
        write_tail_csv(pts, bound, ctx.path(f"tail_{tag}.csv"), ctx.stat_sigmas)
        failures += sum(p.estimate > float(bound(p.r)) + ctx.stat_sigmas * p.stderr for p in pts)
    return ctx.summary({"command": "concentration-check", "kind": kind, "params": cp, "n": n,
                        "failures": int(failures)},
                       EXIT_VIOLATION if failures else EXIT_OK)


def run_ballprob_check(ctx):
    sc = ctx.sc
    source = build_model(sc.get("source"), "source")
    d = source.dim
    grid = sc.get("grid", {})
    x_norms = grid.get("x_norms", [0.5, 1.0, 2.0, 4.0, 8.0])
    mc = sc.get("mc", {})
    method = mc.get("method", "auto")
    if method == "auto":
        method = "quad" if d <= 3 else "mc"
    n = mc.get("n", 200_000)
    L = _declared(sc["source"], source, "L")
    q = _declared(sc["source"], source, "q")
    A = _declared(sc["source"], source, "A")
    V0 = _source_V0(source)
    inf7 = density_inf_on_ball(source, 7.0)
    mu0 = muB0_lower(A, V0, d, "paper")
    u = np.zeros(d)
    u[0] = 1.0

    def estimate(ball, k):
        if method == "quad":
            q_est = ball_prob_quad(source, ball)
            return q_est.value, q_est.abserr
        est = ball_prob_mc(source, ball, n, [ctx.seed, 10 + k])
        return est.value, est.stderr

    out = {}
    failures = 0
    for kind in ("poly", "loggrad"):
        rows = []
        for k, r in enumerate(x_norms):
            x = r * u
            if kind == "poly":
                lower = ball_lower_poly(L, q, d, x, u, inf7)
                ball = BallSpec(x + 4.0 * r * u, 2.0 * r) if r > 0 else None
            else:
                lower = ball_lower_loggrad(A, d, x, mu0)
                ball = BallSpec(x, 0.5)
            if ball is None:
                continue
            est, se = estimate(ball, k)
            ok = lower <= est + ctx.stat_sigmas * se + ctx.numeric * est
            failures += not ok
            rows.append((float(r), lower, est, se, ok))
        write_ballprob_csv(rows, ctx.path(f"ballprob_{kind}.csv"))
        out[kind] = {"points": len(rows), "failures": sum(not r[4] for r in rows)}
    return ctx.summary({"command": "ballprob-check", "method": method, "dim": d,
                        "muB0_lower": mu0, "density_inf_B7": inf7, "checks": out},
                       EXIT_VIOLATION if failures else EXIT_OK)


COMMANDS = {
    "verify-1d": run_verify_1d,
    "verify-nd": run_verify_nd,
    "bound-curve": run_bound_curve,
    "concentration-check": run_concentration_check,
    "ballprob-check": run_ballprob_check,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="otgrowth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("scenario", help="path to a scenario JSON file")
        p.add_argument("--seed", type=int, default=None, help="override mc.seeds[0]")
        p.add_argument("--out-dir", default=".", help="directory for CSV and JSON outputs")
        p.add_argument("--flavor", choices=("published", "assembled", "both"), default=None)
    return parser


def run(command, scenario_path, out_dir=".", seed=None, flavor=None):
    """Run one subcommand and return its exit code."""
    try:
        sc = load_scenario(scenario_path)
        ctx = Context(sc, out_dir, seed, flavor)
    except (ConfigurationError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return COMMANDS[command](ctx)
    except GateFailure as exc:
        print(f"hypothesis gate failed: {exc.reason}", file=sys.stderr)
        return ctx.summary({"command": command, "status": "gate_failure", "reason": exc.reason,
                            "details": exc.details}, EXIT_GATE)
    except (ConfigurationError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return ctx.summary({"command": command, "status": "configuration_error",
                            "reason": str(exc)}, EXIT_CONFIG)
    except OTGrowthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ctx.summary({"command": command, "status": "error", "reason": str(exc)},
                           EXIT_CONFIG)


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(args.command, args.scenario, args.out_dir, args.seed, args.flavor)


if __name__ == "__main__":
    sys.exit(main())
